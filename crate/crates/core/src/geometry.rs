//! Parameter counts and the numerical tangent dimension of the DI constraint variety.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{check_di, dual_matrix, iso_matrix};
use crate::error::{Error, Result};
use crate::linalg::{c, Mat, C64};
use crate::tensors::{DenseTensor, PepsTensor};

pub fn count_di_params(d: u64, chi: u64) -> u64 {
    2 * (d - 1) * chi.pow(4) + chi * chi
}

/// 2 d chi^4 - 4 chi^2 + 2; never negative for d, chi >= 1.
pub fn count_normal_peps_params(d: u64, chi: u64) -> u64 {
    2 * d * chi.pow(4) + 2 - 4 * chi * chi
}

pub fn count_state_params(d: u64, chi: u64) -> u64 {
    2 * (d - 1) * chi.pow(4)
}

pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Required ratio between the singular values on either side of the rank cut.
pub const GAP_AUDIT: f64 = 1e2;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionReport {
    pub total_params: usize,
    pub constraint_rank: usize,
    pub tangent_dim: usize,
    pub formula_dim: u64,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// sigma[rank - 1] / sigma[rank]; infinite when nothing lies below the cut.
    pub gap_ratio: f64,
    pub conclusive: bool,
}

/// Real coordinates of a Hermitian n x n matrix: the diagonal, then (re, im) of the upper triangle.
fn hermitian_coords(x: &Mat) -> Vec<f64> {
    let n = x.nrows();
    let mut v = Vec::with_capacity(n * n);
    for a in 0..n {
        v.push(x[(a, a)].re);
    }
    for a in 0..n {
        for b in a + 1..n {
            v.push(x[(a, b)].re);
            v.push(x[(a, b)].im);
        }
    }
    v
}

/// F(T): coordinates of (A^dag A - I) for the isometric and the dual matrix.
pub fn constraint_map(t: &PepsTensor) -> Vec<f64> {
    let mut out = Vec::new();
    for a in [iso_matrix(t), dual_matrix(t)] {
        let n = a.ncols();
        out.extend(hermitian_coords(&(a.adjoint() * &a - Mat::identity(n, n))));
    }
    out
}

/// Row and column of entry (p, l, b, r, t) in the isometric and in the dual matrix.
fn positions(chi: usize, p: usize, l: usize, b: usize, r: usize, t: usize) -> [(usize, usize); 2] {
    [((p * chi + r) * chi + t, l * chi + b), ((p * chi + l) * chi + t, b * chi + r)]
}

/// Exact Jacobian of `constraint_map` with respect to (re, im) of every tensor entry.
/// Column 2k is d/d Re T_k, column 2k+1 is d/d Im T_k, entries flattened as (p, l, b, r, t).
pub fn jacobian(t: &PepsTensor) -> Mat {
    let (d, chi) = (t.d(), t.chi());
    let mats = [iso_matrix(t), dual_matrix(t)];
    let n = chi * chi;
    let cols: Vec<Vec<f64>> = (0..2 * d * chi.pow(4))
        .into_par_iter()
        .map(|col| {
            let mut k = col / 2;
            let e = if col % 2 == 0 { c(1.0, 0.0) } else { c(0.0, 1.0) };
            let tt = k % chi;
            k /= chi;
            let r = k % chi;
            k /= chi;
            let b = k % chi;
            k /= chi;
            let l = k % chi;
            let p = k / chi;
            let mut out = Vec::with_capacity(2 * n * n);
            for (a, &(row, cc)) in mats.iter().zip(positions(chi, p, l, b, r, tt).iter()) {
                // dX = dA^dag A + A^dag dA with dA = e at (row, cc)
                let mut dx = Mat::zeros(n, n);
                for j in 0..n {
                    dx[(cc, j)] += e.conj() * a[(row, j)];
                    dx[(j, cc)] += a[(row, j)].conj() * e;
                }
                out.extend(hermitian_coords(&dx));
            }
            out
        })
        .collect();
    let rows = cols[0].len();
    Mat::from_fn(rows, cols.len(), |i, j| c(cols[j][i], 0.0))
}

pub fn tangent_dimension(t: &PepsTensor, rank_tol: f64) -> Result<DimensionReport> {
    let rep = check_di(t, 1e-8);
    if !rep.pass {
        return Err(Error::ConditionFailed { what: "DI conditions".into(), residual: rep.max_residual() });
    }
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidParameter("rank tolerance must be positive".into()));
    }
    let j = jacobian(t).map(|z| z.re);
    let mut sv: Vec<f64> = j.svd(false, false).singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv.first().cloned().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > rank_tol * smax).count();
    let gap_ratio = match (rank, sv.get(rank)) {
        (0, _) => 0.0,
        (_, None) => f64::INFINITY,
        (r, Some(&below)) => {
            if below == 0.0 {
                f64::INFINITY
            } else {
                sv[r - 1] / below
            }
        }
    };
    let total = 2 * t.d() * t.chi().pow(4);
    Ok(DimensionReport {
        total_params: total,
        constraint_rank: rank,
        tangent_dim: total - rank,
        formula_dim: count_di_params(t.d() as u64, t.chi() as u64),
        singular_values: sv,
        gap_ratio,
        conclusive: gap_ratio >= GAP_AUDIT,
    })
}

/// Tensor with real coordinates `x` added, in the Jacobian's column order.
pub fn perturbed(t: &PepsTensor, x: &[f64]) -> Result<PepsTensor> {
    let data: Vec<C64> = t.entries().data().iter().enumerate().map(|(k, z)| z + c(x[2 * k], x[2 * k + 1])).collect();
    PepsTensor::new(t.d(), t.chi(), DenseTensor::new(t.entries().shape().to_vec(), data)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{controlled_dual_unitary, permutation_phase, random_dual_unitary, Singles};
    use crate::linalg::ONE;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn count_examples() {
        assert_eq!(count_di_params(16, 2), 484);
        assert_eq!(count_di_params(1, 1), 1);
        assert_eq!(count_di_params(2, 2), 36);
        assert_eq!(count_normal_peps_params(2, 2), 50);
        assert_eq!(count_normal_peps_params(1, 1), 0);
        assert_eq!(count_normal_peps_params(16, 2), 498);
        assert_eq!(count_state_params(2, 2), 32);
        assert_eq!(count_state_params(1, 5), 0);
        assert_eq!(count_state_params(3, 2), 64);
    }

    fn cdu(d: usize, seed: u64) -> PepsTensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vs: Vec<Mat> = (0..d).map(|_| random_dual_unitary(&mut rng)).collect();
        let s = Singles::haar(d, 2, &mut rng);
        controlled_dual_unitary(&vs, Some(&s)).unwrap()
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let t = cdu(2, 4);
        let j = jacobian(&t);
        let h = 1e-6;
        let n = 2 * t.d() * 16;
        for col in 0..n {
            let mut x = vec![0.0; n];
            x[col] = h;
            let fp = constraint_map(&perturbed(&t, &x).unwrap());
            x[col] = -h;
            let fm = constraint_map(&perturbed(&t, &x).unwrap());
            for row in 0..fp.len() {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                assert!((fd - j[(row, col)].re).abs() < 1e-6, "({row},{col})");
            }
        }
    }

    #[test]
    fn generic_cdu_has_formula_dimension() {
        let r = tangent_dimension(&cdu(2, 1), DEFAULT_RANK_TOL).unwrap();
        assert!(r.conclusive);
        assert_eq!(r.tangent_dim, 36);
    }

    #[test]
    fn permutation_phase_is_larger() {
        let t = permutation_phase(2, &[ONE; 8], None).unwrap();
        let r = tangent_dimension(&t, DEFAULT_RANK_TOL).unwrap();
        assert!(r.tangent_dim > 36, "{}", r.tangent_dim);
    }
}
