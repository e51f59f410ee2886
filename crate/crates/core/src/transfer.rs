//! Cylinder transfer operators of the Z2 plumbing family.
//!
//! The doubled tensor acts as I_H (x) A_V + sigma1_H (x) B_V, so the ring operator is a sum of
//! sigma1 strings whose coefficients are traces of 2x2 products over the shared vertical space.
//! Site i of the ring is bit (M - 1 - i) of a basis index.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{w_z2, WMatrix};
use crate::linalg::C64;

pub type RMat = DMatrix<f64>;

/// Dense guard: the operator has 4^M real entries.
pub const MAX_RING: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flux {
    Zero,
    Pi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Element-wise squared W, rows (l, b), columns (r, t).
#[derive(Clone, Debug)]
pub struct WTilde {
    pub alpha: f64,
    pub beta: f64,
    pub matrix: RMat,
}

impl WTilde {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        doubled_w(&w_z2(alpha, beta)?)
    }

    /// Reordered as rows (r, t), columns (l, b).
    pub fn rt_lb(&self) -> RMat {
        self.matrix.transpose()
    }

    /// (A, B) with W~_{rt,lb} = I_H (x) A + sigma1_H (x) B; A, B indexed [t][b].
    fn factors(&self) -> Result<([[f64; 2]; 2], [[f64; 2]; 2])> {
        let w = self.rt_lb();
        let at = |r: usize, t: usize, l: usize, b: usize| w[(r * 2 + t, l * 2 + b)];
        let mut a = [[0.0; 2]; 2];
        let mut bm = [[0.0; 2]; 2];
        let mut bad = 0.0f64;
        for t in 0..2 {
            for b in 0..2 {
                a[t][b] = at(0, t, 0, b);
                bm[t][b] = at(1, t, 0, b);
                bad = bad.max((at(1, t, 1, b) - a[t][b]).abs()).max((at(0, t, 1, b) - bm[t][b]).abs());
            }
        }
        if bad > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "doubled tensor is not of the I (x) A + sigma1 (x) B form (off by {bad:.2e})"
            )));
        }
        Ok((a, bm))
    }
}

pub fn doubled_w(w: &WMatrix) -> Result<WTilde> {
    if w.chi != 2 {
        return Err(Error::InvalidParameter("doubled_w needs chi = 2".into()));
    }
    if w.entries.iter().any(|z| z.im.abs() > 1e-14 || z.re < -1e-14) {
        return Err(Error::InvalidParameter("doubled_w needs real non-negative W entries".into()));
    }
    let matrix = RMat::from_fn(4, 4, |i, j| w.entries[(i, j)].re.powi(2));
    Ok(WTilde { alpha: matrix[(0, 0)], beta: matrix[(1, 1)], matrix })
}

fn check_ring(m: usize) -> Result<()> {
    if m < 2 || m % 2 == 1 {
        return Err(Error::InvalidParameter(format!("ring length M={m} must be even and >= 2")));
    }
    if m > MAX_RING {
        return Err(Error::Guard { what: "transfer ring length".into(), size: m as u128, limit: MAX_RING as u128 });
    }
    Ok(())
}

fn mul2(x: &[[f64; 2]; 2], y: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut o = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    o
}

const SIGMA3: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];

fn from_strings(m: usize, coef: impl Fn(usize) -> f64) -> RMat {
    let n = 1usize << m;
    let c: Vec<f64> = (0..n).map(coef).collect();
    RMat::from_fn(n, n, |i, j| c[i ^ j])
}

/// Tr_V of the ring product, sigma3 inserted in the vertical trace for flux pi.
pub fn build_transfer(wt: &WTilde, m: usize, flux: Flux) -> Result<RMat> {
    build_transfer_at(wt, m, flux, m)
}

/// As `build_transfer`, with the sigma3 placed after the first `position` sites.
pub fn build_transfer_at(wt: &WTilde, m: usize, flux: Flux, position: usize) -> Result<RMat> {
    check_ring(m)?;
    let (a, b) = wt.factors()?;
    Ok(from_strings(m, |s| {
        let mut p = [[1.0, 0.0], [0.0, 1.0]];
        for i in 0..m {
            if flux == Flux::Pi && i == position {
                p = mul2(&p, &SIGMA3);
            }
            let x = if (s >> (m - 1 - i)) & 1 == 1 { &b } else { &a };
            p = mul2(&p, x);
        }
        if flux == Flux::Pi && position >= m {
            p = mul2(&p, &SIGMA3);
        }
        p[0][0] + p[1][1]
    }))
}

/// The closed-form sigma1-string series.
pub fn analytic_transfer(alpha: f64, beta: f64, m: usize, flux: Flux) -> Result<RMat> {
    check_ring(m)?;
    let sign = if flux == Flux::Zero { 1.0 } else { -1.0 };
    Ok(from_strings(m, |s| {
        let pos: Vec<usize> = (0..m).filter(|&i| (s >> (m - 1 - i)) & 1 == 1).collect();
        if pos.len() % 2 == 1 {
            return 0.0;
        }
        let k = pos.len() / 2;
        let inside: usize = pos.chunks(2).map(|p| p[1] - p[0] - 1).sum();
        let outside = m - 2 * k - inside;
        let (ii, oo) = (inside as i32, outside as i32);
        ((1.0 - alpha) * (1.0 - beta)).powi(k as i32)
            * (beta.powi(ii) * alpha.powi(oo) + sign * alpha.powi(ii) * beta.powi(oo))
    }))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockSpectrum {
    pub parity: Parity,
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<C64>,
    pub leading: f64,
    pub degeneracy: usize,
    pub gap: f64,
}

pub const DEGENERACY_RTOL: f64 = 1e-8;

pub fn block_spectrum(op: &RMat, parity: Parity, m: usize) -> Result<BlockSpectrum> {
    let n = 1usize << m;
    if op.nrows() != n || op.ncols() != n {
        return Err(Error::Shape(format!("operator is {}x{}, expected {n}x{n}", op.nrows(), op.ncols())));
    }
    let odd = |s: usize| s.count_ones() % 2 == 1;
    let mut cross = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if odd(i) != odd(j) {
                cross += 4.0 * op[(i, j)].powi(2);
            }
        }
    }
    let cross = cross.sqrt();
    if cross > 1e-10 * op.norm().max(1.0) {
        return Err(Error::ConditionFailed { what: "commutation with the parity string".into(), residual: cross });
    }
    let want = parity == Parity::Odd;
    let idx: Vec<usize> = (0..n).filter(|&s| odd(s) == want).collect();
    let blk = RMat::from_fn(idx.len(), idx.len(), |i, j| op[(idx[i], idx[j])]);
    let asym = (&blk - blk.transpose()).norm();
    let mut ev: Vec<C64> = if asym <= 1e-12 * blk.norm().max(1.0) {
        blk.symmetric_eigen().eigenvalues.iter().map(|&x| C64::new(x, 0.0)).collect()
    } else {
        blk.complex_eigenvalues().iter().cloned().collect()
    };
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let leading = ev[0].norm();
    let tol = (DEGENERACY_RTOL * leading).max(1e-14);
    let degeneracy = ev.iter().take_while(|z| (leading - z.norm()).abs() <= tol).count();
    let gap = ev.get(degeneracy).map_or(leading, |z| leading - z.norm());
    Ok(BlockSpectrum { parity, eigenvalues: ev, leading, degeneracy, gap })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopoClass {
    ToricCodePhase,
    GhzPoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TopoReport {
    pub alpha: f64,
    pub beta: f64,
    pub m: usize,
    pub class: TopoClass,
    pub lambda_even: f64,
    pub lambda_odd: f64,
    pub lambda_flux_shift: f64,
    /// Leading degeneracy of the even flux-0 block.
    pub degeneracy: usize,
    /// The same count at a second ring length, for the GHZ growth check.
    pub degeneracy_other_m: Option<(usize, usize)>,
    pub gap: f64,
}

pub fn is_ghz_point(alpha: f64, beta: f64) -> bool {
    alpha == 1.0 || beta == 1.0 || (alpha == 0.0 && beta == 0.0)
}

/// Parameter-test classification, cross-checked against the block spectra. A disagreement is
/// returned as an error, never resolved silently.
pub fn topo_diagnostic(alpha: f64, beta: f64, m: usize) -> Result<TopoReport> {
    let wt = WTilde::new(alpha, beta)?;
    let t0 = build_transfer(&wt, m, Flux::Zero)?;
    let tpi = build_transfer(&wt, m, Flux::Pi)?;
    let e = block_spectrum(&t0, Parity::Even, m)?;
    let o = block_spectrum(&t0, Parity::Odd, m)?;
    let shift = block_spectrum(&tpi, Parity::Even, m)?
        .leading
        .max(block_spectrum(&tpi, Parity::Odd, m)?.leading);
    let mut report = TopoReport {
        alpha,
        beta,
        m,
        class: TopoClass::ToricCodePhase,
        lambda_even: e.leading,
        lambda_odd: o.leading,
        lambda_flux_shift: shift,
        degeneracy: e.degeneracy,
        degeneracy_other_m: None,
        gap: e.leading - shift,
    };
    let contradiction = |why: &str, residual: f64| Error::ConditionFailed {
        what: format!("topological cross-check at alpha={alpha}, beta={beta}, M={m}: {why}"),
        residual,
    };
    if is_ghz_point(alpha, beta) {
        report.class = TopoClass::GhzPoint;
        let m2 = if m + 2 <= MAX_RING { m + 2 } else { m - 2 };
        let t2 = build_transfer(&wt, m2, Flux::Zero)?;
        let d2 = block_spectrum(&t2, Parity::Even, m2)?.degeneracy;
        report.degeneracy_other_m = Some((m2, d2));
        let grows = if m2 > m { d2 > e.degeneracy } else { d2 < e.degeneracy };
        if !grows {
            return Err(contradiction("leading degeneracy does not grow with M", e.degeneracy as f64));
        }
    } else {
        let tol = DEGENERACY_RTOL * e.leading.max(1e-300);
        if (e.leading - o.leading).abs() > tol {
            return Err(contradiction("parity leaders differ", (e.leading - o.leading).abs()));
        }
        if e.leading - shift <= tol {
            return Err(contradiction("no gap to the flux-shifted leader", e.leading - shift));
        }
        if e.degeneracy != 1 || o.degeneracy != 1 {
            return Err(contradiction("degenerate leader in a parity block", e.degeneracy.max(o.degeneracy) as f64));
        }
    }
    Ok(report)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// Diagnostics over a parameter grid, alpha-major. Runs on the current rayon pool.
pub fn scan(alphas: &[f64], betas: &[f64], m: usize) -> Result<Vec<TopoReport>> {
    let points: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| betas.iter().map(move |&b| (a, b))).collect();
    points.par_iter().map(|&(a, b)| topo_diagnostic(a, b, m)).collect()
}
