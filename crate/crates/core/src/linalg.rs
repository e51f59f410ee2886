//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn pauli(k: usize) -> Mat {
    let (a, b, cc, dd) = match k {
        0 => (ONE, ZERO, ZERO, ONE),
        1 => (ZERO, ONE, ONE, ZERO),
        2 => (ZERO, -I, I, ZERO),
        3 => (ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {k} out of range"),
    };
    Mat::from_row_slice(2, 2, &[a, b, cc, dd])
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn frob(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn unitarity_residual(u: &Mat) -> f64 {
    frob(&(u.adjoint() * u - eye(u.ncols())))
}

pub fn hermitian_part(m: &Mat) -> Mat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// f(H) for Hermitian H through its eigenbasis.
pub fn hermitian_fn(m: &Mat, f: impl Fn(f64) -> C64) -> Mat {
    let (vals, vecs) = eigh(m);
    let d = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| f(v)),
    ));
    &vecs * d * vecs.adjoint()
}

/// exp(i t H) for Hermitian H.
pub fn expi(h: &Mat, t: f64) -> Mat {
    hermitian_fn(h, |v| C64::from_polar(1.0, t * v))
}

/// Square root and inverse square root of a positive definite matrix.
pub fn psd_sqrt_pair(m: &Mat, what: &str) -> Result<(Mat, Mat)> {
    let (vals, _) = eigh(m);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = vals.iter().cloned().fold(0.0f64, f64::max);
    if !(min > 1e-12 * max.max(1e-300)) {
        return Err(Error::ConditionFailed {
            what: format!("{what} positive definiteness"),
            residual: min,
        });
    }
    let herm = frob(&(m - m.adjoint()));
    if herm > 1e-8 * frob(m).max(1.0) {
        return Err(Error::ConditionFailed {
            what: format!("{what} hermiticity"),
            residual: herm,
        });
    }
    Ok((
        hermitian_fn(m, |v| c(v.sqrt(), 0.0)),
        hermitian_fn(m, |v| c(1.0 / v.sqrt(), 0.0)),
    ))
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular matrix".into()))
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    Mat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) / std::f64::consts::SQRT_2
    })
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the R-diagonal phases removed.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> Mat {
    let z = gaussian_matrix(n, n, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random invertible matrix, well conditioned: unitary times positive diagonal times unitary.
pub fn random_invertible<R: Rng>(n: usize, rng: &mut R) -> Mat {
    let u = haar_unitary(n, rng);
    let v = haar_unitary(n, rng);
    let d = Mat::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        c(0.5 + rng.random::<f64>(), 0.0)
    }));
    u * d * v
}

pub fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    let g = gaussian_matrix(n, 1, rng);
    let nrm = frob(&g);
    g.iter().map(|z| z / nrm).collect()
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> Mat {
    hermitian_part(&gaussian_matrix(n, n, rng))
}

pub fn swap_gate(chi: usize) -> Mat {
    let n = chi * chi;
    let mut m = Mat::zeros(n, n);
    for a in 0..chi {
        for b in 0..chi {
            m[(b * chi + a, a * chi + b)] = ONE;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            assert!(unitarity_residual(&haar_unitary(n, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn expi_matches_pauli_rotation() {
        let t = 0.37;
        let u = expi(&pauli(1), t);
        let want = eye(2) * c(t.cos(), 0.0) + pauli(1) * c(0.0, t.sin());
        assert!(frob(&(u - want)) < 1e-14);
    }

    #[test]
    fn sqrt_pair_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_invertible(3, &mut rng);
        let p = &a * a.adjoint();
        let (s, si) = psd_sqrt_pair(&p, "p").unwrap();
        assert!(frob(&(&s * &s - &p)) < 1e-10);
        assert!(frob(&(&s * &si - eye(3))) < 1e-10);
    }
}
