//! Isometric, dual-isometric, generalized and dual-unitary checks; channel fixed points;
//! canonical form of generalized DI tensors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::Gate;
use crate::linalg::{c, eigh, eye, frob, hermitian_part, inverse, psd_sqrt_pair, Mat, C64, ZERO};
use crate::tensors::PepsTensor;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConditionReport {
    pub residual_iso: f64,
    pub residual_dual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ConditionReport {
    pub fn max_residual(&self) -> f64 {
        self.residual_iso.max(self.residual_dual)
    }
}

/// Matrix with rows (p, r, t) and columns (l, b).
pub(crate) fn iso_matrix(t: &PepsTensor) -> Mat {
    t.as_lb_map()
}

/// Matrix with rows (p, l, t) and columns (b, r).
pub(crate) fn dual_matrix(t: &PepsTensor) -> Mat {
    let ch = t.chi();
    Mat::from_fn(t.d() * ch * ch, ch * ch, |row, col| {
        let (p, lt) = (row / (ch * ch), row % (ch * ch));
        t.get(p, lt / ch, col / ch, col % ch, lt % ch)
    })
}

pub fn isometry_residual(t: &PepsTensor) -> f64 {
    let a = iso_matrix(t);
    frob(&(a.adjoint() * &a - eye(a.ncols())))
}

pub fn dual_residual(t: &PepsTensor) -> f64 {
    let a = dual_matrix(t);
    frob(&(a.adjoint() * &a - eye(a.ncols())))
}

pub fn check_isometry(t: &PepsTensor, tol: f64) -> ConditionReport {
    let iso = isometry_residual(t);
    ConditionReport { residual_iso: iso, residual_dual: dual_residual(t), tol, pass: iso <= tol }
}

pub fn check_dual_isometry(t: &PepsTensor, tol: f64) -> ConditionReport {
    let dual = dual_residual(t);
    ConditionReport { residual_iso: isometry_residual(t), residual_dual: dual, tol, pass: dual <= tol }
}

/// Both strict conditions; passes only if both do.
pub fn check_di(t: &PepsTensor, tol: f64) -> ConditionReport {
    let (iso, dual) = (isometry_residual(t), dual_residual(t));
    ConditionReport { residual_iso: iso, residual_dual: dual, tol, pass: iso <= tol && dual <= tol }
}

/// Matrices of the generalized condition: S enters the horizontal (iso) equation,
/// R both vertical slots, B the dual equation.
#[derive(Clone, Debug)]
pub struct GaugeTriple {
    pub s: Mat,
    pub r: Mat,
    pub b: Mat,
}

impl GaugeTriple {
    pub fn identity(chi: usize) -> Self {
        Self { s: eye(chi), r: eye(chi), b: eye(chi) }
    }

    /// The triple seen by the tensor after `gauge_transform(t, q, j)`.
    pub fn transformed(&self, q: &Mat, j: &Mat) -> Result<Self> {
        let qi = inverse(q)?;
        let ji = inverse(j)?;
        Ok(Self {
            s: q * &self.s * q.adjoint(),
            r: &ji * &self.r * ji.adjoint(),
            b: qi.transpose() * &self.b * qi.map(|z| z.conj()),
        })
    }
}

/// Gauge action: Q on l, Q^-1 on r, J on t, J^-1 on b.
pub fn gauge_transform(t: &PepsTensor, q: &Mat, j: &Mat) -> Result<PepsTensor> {
    let qi = inverse(q)?;
    let ji = inverse(j)?;
    t.apply_legs([None, Some(q), Some(&ji), Some(&qi.transpose()), Some(&j.transpose())])
}

pub fn generalized_residuals(t: &PepsTensor, g: &GaugeTriple) -> Result<(f64, f64)> {
    let ch = t.chi();
    for m in [&g.s, &g.r, &g.b] {
        if m.nrows() != ch || m.ncols() != ch {
            return Err(Error::Shape(format!("gauge matrices must be {ch}x{ch}")));
        }
    }
    let id = eye(t.d());
    // sum T_{l1 b1 r t} S_{r r'} R_{t t'} T*_{l2 b2 r' t'} = S_{l1 l2} R_{b1 b2}
    let a = iso_matrix(t);
    let k1 = id.kronecker(&g.s.kronecker(&g.r));
    let lhs1 = a.transpose() * k1 * a.map(|z| z.conj());
    let res1 = frob(&(lhs1 - g.s.kronecker(&g.r)));
    // sum T_{l b1 r1 t} B_{l l'} R_{t t'} T*_{l' b2 r2 t'} = B_{r1 r2} R_{b1 b2}
    let bm = dual_matrix(t);
    let k2 = id.kronecker(&g.b.kronecker(&g.r));
    let lhs2 = bm.transpose() * k2 * bm.map(|z| z.conj());
    let res2 = frob(&(lhs2 - g.r.kronecker(&g.b)));
    Ok((res1, res2))
}

pub fn check_generalized(t: &PepsTensor, g: &GaugeTriple, tol: f64) -> Result<ConditionReport> {
    let (a, b) = generalized_residuals(t, g)?;
    Ok(ConditionReport { residual_iso: a, residual_dual: b, tol, pass: a <= tol && b <= tol })
}

/// Residuals of a gate V_{tr,lb}: unitarity and the dual (spatial) unitarity.
pub fn check_dual_unitary(g: &Gate, tol: f64) -> ConditionReport {
    let v = &g.matrix;
    let n = v.nrows();
    let ch = (n as f64).sqrt().round() as usize;
    if ch * ch != n || v.ncols() != n {
        return ConditionReport { residual_iso: f64::INFINITY, residual_dual: f64::INFINITY, tol, pass: false };
    }
    let uni = frob(&(v.adjoint() * v - eye(n)));
    // D[(t, l), (r, b)] = V[(t, r), (l, b)]
    let d = Mat::from_fn(n, n, |row, col| {
        let (t, l) = (row / ch, row % ch);
        let (r, b) = (col / ch, col % ch);
        v[(t * ch + r, l * ch + b)]
    });
    let dual = frob(&(d.adjoint() * &d - eye(n)));
    ConditionReport { residual_iso: uni, residual_dual: dual, tol, pass: uni <= tol && dual <= tol }
}

/// Left-to-right map X -> (1/chi) sum_{b,p,t,l1,l2} T_{l1 b r1 t} X_{l1 l2} T*_{l2 b r2 t}
/// as a chi^2 x chi^2 matrix acting on row-major vec(X).
pub fn left_right_map(t: &PepsTensor) -> Mat {
    let ch = t.chi();
    let n = ch * ch;
    let mut phi = Mat::zeros(n, n);
    let s = 1.0 / ch as f64;
    for p in 0..t.d() {
        for b in 0..ch {
            for tt in 0..ch {
                for r1 in 0..ch {
                    for l1 in 0..ch {
                        let a = t.get(p, l1, b, r1, tt);
                        if a == ZERO {
                            continue;
                        }
                        for r2 in 0..ch {
                            for l2 in 0..ch {
                                phi[(r1 * ch + r2, l1 * ch + l2)] += a * t.get(p, l2, b, r2, tt).conj() * s;
                            }
                        }
                    }
                }
            }
        }
    }
    phi
}

fn vec_of(m: &Mat) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_row_slice(m.transpose().as_slice())
}

fn mat_of(v: &nalgebra::DVector<C64>, n: usize) -> Mat {
    Mat::from_row_slice(n, n, v.as_slice())
}

pub fn fixed_point_residual(t: &PepsTensor, b: &Mat) -> f64 {
    let phi = left_right_map(t);
    frob(&(mat_of(&(phi * vec_of(b)), t.chi()) - b))
}

/// Unit-trace positive fixed point of the left-to-right channel.
pub fn find_fixed_point(t: &PepsTensor) -> Result<Mat> {
    let iso = isometry_residual(t);
    if iso > 1e-8 {
        return Err(Error::ConditionFailed { what: "isometry precondition".into(), residual: iso });
    }
    let ch = t.chi();
    let n = ch * ch;
    let phi = left_right_map(t);
    let shifted = &phi - eye(n);
    let svd = shifted.clone().svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let scale = sv.iter().cloned().fold(1.0, f64::max);
    let null: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= 1e-8 * scale).collect();
    if null.is_empty() {
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        return Err(Error::Numerical(format!("no eigenvalue within 1e-8 of 1 (closest gap {min:.3e})")));
    }
    let candidate = if null.len() == 1 {
        let row = v_t.row(null[0]);
        let v = nalgebra::DVector::from_iterator(n, row.iter().map(|z| z.conj()));
        normalize_density(&mat_of(&v, ch))?
    } else {
        let id = eye(ch) * c(1.0 / ch as f64, 0.0);
        let unital = frob(&(mat_of(&(&phi * vec_of(&id)), ch) - &id));
        if unital <= 1e-10 {
            id
        } else {
            // degenerate eigenvalue 1: the lazy Cesaro-type iteration from the maximally mixed state
            let mut y = vec_of(&id);
            for _ in 0..20000 {
                let next = (&y + &phi * &y) * c(0.5, 0.0);
                let diff = (&next - &y).norm();
                y = next;
                if diff < 1e-15 {
                    break;
                }
            }
            normalize_density(&mat_of(&y, ch))?
        }
    };
    let res = fixed_point_residual(t, &candidate);
    if res > 1e-8 {
        return Err(Error::Numerical(format!("fixed point residual {res:.3e}")));
    }
    Ok(candidate)
}

fn normalize_density(m: &Mat) -> Result<Mat> {
    let tr = m.trace();
    if tr.norm() < 1e-14 {
        return Err(Error::Numerical("fixed point has zero trace".into()));
    }
    Ok(hermitian_part(&(m / tr)))
}

#[derive(Clone, Debug)]
pub struct Canonical {
    pub tensor: PepsTensor,
    /// Unit-trace, descending.
    pub lambda: Vec<f64>,
    /// True when two entries of lambda agree to 1e-8 relative; ordering then follows the tie-break.
    pub degenerate: bool,
}

/// Gauge-fix a generalized DI tensor: S = R = I and B diagonal positive.
pub fn canonicalize(t: &PepsTensor, g: &GaugeTriple) -> Result<Canonical> {
    let ch = t.chi();
    let (_, s_inv_half) = psd_sqrt_pair(&g.s, "S")?;
    let (r_half, _) = psd_sqrt_pair(&g.r, "R")?;
    let t1 = gauge_transform(t, &s_inv_half, &r_half)?;
    let g1 = g.transformed(&s_inv_half, &r_half)?;
    let bh = &g1.b;
    let herm = frob(&(bh - bh.adjoint()));
    if herm > 1e-8 * frob(bh).max(1.0) {
        return Err(Error::ConditionFailed { what: "B hermiticity".into(), residual: herm });
    }
    let (vals, vecs) = eigh(bh);
    let min = vals[0];
    if !(min > 1e-12 * vals[ch - 1].abs().max(1e-300)) {
        return Err(Error::ConditionFailed { what: "B positive definiteness".into(), residual: min });
    }
    // descending eigenvalues, phase-fixed eigenvectors
    let mut cols: Vec<(f64, Vec<C64>)> = (0..ch)
        .rev()
        .map(|k| {
            let v: Vec<C64> = vecs.column(k).iter().cloned().collect();
            let big = v.iter().cloned().fold(ZERO, |acc, z| if z.norm() > acc.norm() + 1e-12 { z } else { acc });
            let ph = if big.norm() > 0.0 { big.conj() / big.norm() } else { c(1.0, 0.0) };
            (vals[k], v.iter().map(|z| z * ph).collect())
        })
        .collect();
    let tol = 1e-8 * vals[ch - 1].abs();
    cols.sort_by(|a, b| {
        if (a.0 - b.0).abs() > tol {
            b.0.total_cmp(&a.0)
        } else {
            let key = |v: &Vec<C64>| v.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<f64>>();
            key(&a.1).partial_cmp(&key(&b.1)).unwrap_or(std::cmp::Ordering::Equal)
        }
    });
    let degenerate = cols.windows(2).any(|w| (w[0].0 - w[1].0).abs() <= tol);
    let w = Mat::from_fn(ch, ch, |i, j| cols[j].1[i]);
    let qu = w.transpose();
    let t2 = gauge_transform(&t1, &qu, &eye(ch))?;
    let tr: f64 = cols.iter().map(|x| x.0).sum();
    let lambda = cols.iter().map(|x| x.0 / tr).collect();
    Ok(Canonical { tensor: t2, lambda, degenerate })
}

/// Residuals of the canonical equations with the given Lambda.
pub fn canonical_residuals(t: &PepsTensor, lambda: &[f64]) -> Result<(f64, f64)> {
    let ch = t.chi();
    let l = Mat::from_diagonal(&nalgebra::DVector::from_iterator(ch, lambda.iter().map(|&x| c(x, 0.0))));
    generalized_residuals(t, &GaugeTriple { s: eye(ch), r: eye(ch), b: l })
}
