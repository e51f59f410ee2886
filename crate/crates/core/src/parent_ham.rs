//! Toric-code parent Hamiltonian and its deformation for the Z2 plumbing family, checked on
//! small tori.
//!
//! Spins sit on edges of an N x M torus. Vertex (i, j) has left/right horizontal edges
//! h(i-1, j), h(i, j) and bottom/top vertical edges v(i, j-1), v(i, j). Spin k is bit
//! (n - 1 - k) of a basis index.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{plumbing, w_z2};
use crate::linalg::{c, eye, frob, kron, pauli, Mat, C64, ONE, ZERO};
use crate::network::{contract_greedy, Node};
use crate::tensors::DenseTensor;

pub const MAX_SPINS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Torus {
    pub n: usize,
    pub m: usize,
}

impl Torus {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 2 || m < 2 {
            return Err(Error::InvalidParameter(format!("torus {n}x{m} must be at least 2x2")));
        }
        Ok(Self { n, m })
    }

    pub fn spins(&self) -> usize {
        2 * self.n * self.m
    }

    pub fn h(&self, i: usize, j: usize) -> usize {
        (j % self.m) * self.n + i % self.n
    }

    pub fn v(&self, i: usize, j: usize) -> usize {
        self.n * self.m + (j % self.m) * self.n + i % self.n
    }

    /// Edges (l, b, r, t) of vertex (i, j).
    pub fn star(&self, i: usize, j: usize) -> [usize; 4] {
        let (n, m) = (self.n, self.m);
        [self.h(i + n - 1, j), self.v(i, j + m - 1), self.h(i, j), self.v(i, j)]
    }

    /// Edges of the plaquette with lower-left vertex (i, j).
    pub fn plaquette(&self, i: usize, j: usize) -> [usize; 4] {
        [self.h(i, j), self.h(i, j + 1), self.v(i, j), self.v(i + 1, j)]
    }
}

/// coefficient * prod_k sigma^{a_k}_{site_k}, a in {1, 2, 3}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PauliString {
    pub support: BTreeMap<usize, u8>,
    pub coefficient: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Star,
    Plaquette,
}

/// I - prod sigma, stored as its two Pauli strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToricTerm {
    pub kind: TermKind,
    pub anchor: (usize, usize),
    pub strings: Vec<PauliString>,
}

fn projector_term(kind: TermKind, anchor: (usize, usize), edges: [usize; 4], a: u8) -> ToricTerm {
    ToricTerm {
        kind,
        anchor,
        strings: vec![
            PauliString { support: BTreeMap::new(), coefficient: ONE },
            PauliString { support: edges.iter().map(|&e| (e, a)).collect(), coefficient: -ONE },
        ],
    }
}

pub fn toric_terms(torus: Torus) -> Vec<ToricTerm> {
    let mut v = Vec::new();
    for j in 0..torus.m {
        for i in 0..torus.n {
            v.push(projector_term(TermKind::Star, (i, j), torus.star(i, j), 3));
        }
    }
    for j in 0..torus.m {
        for i in 0..torus.n {
            v.push(projector_term(TermKind::Plaquette, (i, j), torus.plaquette(i, j), 1));
        }
    }
    v
}

/// Dense matrix of a sum of Pauli strings on the listed sites (in that order).
pub fn strings_on(strings: &[PauliString], sites: &[usize]) -> Mat {
    let dim = 1usize << sites.len();
    let mut out = Mat::zeros(dim, dim);
    for s in strings {
        let factors: Vec<Mat> = sites
            .iter()
            .map(|k| s.support.get(k).map_or_else(|| eye(2), |&a| pauli(a as usize)))
            .collect();
        let m = factors.iter().skip(1).fold(factors[0].clone(), |acc, f| kron(&acc, f));
        out += m * s.coefficient;
    }
    out
}

pub fn term_support(t: &ToricTerm) -> Vec<usize> {
    let mut s: Vec<usize> = t.strings.iter().flat_map(|p| p.support.keys().cloned()).collect();
    s.sort();
    s.dedup();
    s
}

/// Per-vertex deformation exp(h_b Z_b + h_t Z_t + h_bt Z_b Z_t) on the (bottom, top) edge pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Deformation {
    pub h_b: f64,
    pub h_t: f64,
    pub h_bt: f64,
}

impl Deformation {
    /// Diagonal 4x4 on (b, t), b the first factor.
    pub fn matrix(&self) -> Mat {
        let z = |s: usize| 1.0 - 2.0 * s as f64;
        Mat::from_fn(4, 4, |r, col| {
            if r != col {
                return ZERO;
            }
            let (zb, zt) = (z(r / 2), z(r % 2));
            c((self.h_b * zb + self.h_t * zt + self.h_bt * zb * zt).exp(), 0.0)
        })
    }

    fn value(&self, b: usize, t: usize) -> f64 {
        let z = |s: usize| 1.0 - 2.0 * s as f64;
        let (zb, zt) = (z(b), z(t));
        (self.h_b * zb + self.h_t * zt + self.h_bt * zb * zt).exp()
    }
}

pub fn deformation(alpha: f64, beta: f64) -> Result<Deformation> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "deformation needs alpha, beta in (0, 1); got ({alpha}, {beta})"
        )));
    }
    // the printed ratios of negative factors, written with positive ones
    Ok(Deformation {
        h_b: ((1.0 - alpha) * alpha / ((1.0 - beta) * beta)).ln() / 8.0,
        h_t: (alpha * (1.0 - beta) / ((1.0 - alpha) * beta)).ln() / 8.0,
        h_bt: (alpha * beta / ((1.0 - alpha) * (1.0 - beta))).ln() / 8.0,
    })
}

#[derive(Clone, Debug)]
pub struct DeformedTerm {
    pub kind: TermKind,
    pub anchor: (usize, usize),
    pub support: Vec<usize>,
    pub matrix: Mat,
}

impl DeformedTerm {
    pub fn locality(&self) -> usize {
        self.support.len()
    }
}

/// Drop sites on which `op` acts as the identity. Returns the reduced operator and support.
fn prune(op: &Mat, sites: &[usize]) -> (Mat, Vec<usize>) {
    let k = sites.len();
    let mut keep = Vec::new();
    let scale = frob(op).max(1.0);
    for pos in 0..k {
        // identity on this site: no off-diagonal blocks and equal diagonal blocks
        let bit = 1usize << (k - 1 - pos);
        let mut dev = 0.0f64;
        for a in 0..1usize << k {
            for b in 0..1usize << k {
                if a & bit != b & bit {
                    dev = dev.max(op[(a, b)].norm());
                } else if a & bit == 0 {
                    dev = dev.max((op[(a, b)] - op[(a | bit, b | bit)]).norm());
                }
            }
        }
        if dev > 1e-12 * scale {
            keep.push(pos);
        }
    }
    // partial trace over dropped sites, divided by their dimension
    let kd = keep.len();
    let mut red = Mat::zeros(1 << kd, 1 << kd);
    let dropped: Vec<usize> = (0..k).filter(|p| !keep.contains(p)).collect();
    let full = |kept: usize, drop: usize| {
        let mut s = 0usize;
        for (q, &p) in keep.iter().enumerate() {
            s |= ((kept >> (kd - 1 - q)) & 1) << (k - 1 - p);
        }
        for (q, &p) in dropped.iter().enumerate() {
            s |= ((drop >> (dropped.len() - 1 - q)) & 1) << (k - 1 - p);
        }
        s
    };
    for a in 0..1 << kd {
        for b in 0..1 << kd {
            let mut acc = ZERO;
            for e in 0..1 << dropped.len() {
                acc += op[(full(a, e), full(b, e))];
            }
            red[(a, b)] = acc / (1 << dropped.len()) as f64;
        }
    }
    (red, keep.iter().map(|&p| sites[p]).collect())
}

/// Stars unchanged; each plaquette conjugated by the deformations of its four corner vertices.
pub fn deformed_terms(alpha: f64, beta: f64, torus: Torus) -> Result<Vec<DeformedTerm>> {
    let def = deformation(alpha, beta)?;
    let mut out = Vec::new();
    for t in toric_terms(torus) {
        let base = term_support(&t);
        match t.kind {
            TermKind::Star => {
                out.push(DeformedTerm { kind: t.kind, anchor: t.anchor, matrix: strings_on(&t.strings, &base), support: base });
            }
            TermKind::Plaquette => {
                let (i, j) = t.anchor;
                let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
                let mut sites = base.clone();
                for &(x, y) in &corners {
                    let s = torus.star(x, y);
                    sites.push(s[1]);
                    sites.push(s[3]);
                }
                sites.sort();
                sites.dedup();
                let b = strings_on(&t.strings, &sites);
                // U diagonal: product of corner deformations on their (b, t) edges
                let diag: Vec<f64> = (0..1usize << sites.len())
                    .map(|s| {
                        let bit = |e: usize| {
                            let p = sites.iter().position(|&x| x == e).unwrap();
                            (s >> (sites.len() - 1 - p)) & 1
                        };
                        corners
                            .iter()
                            .map(|&(x, y)| {
                                let st = torus.star(x, y);
                                def.value(bit(st[1]), bit(st[3]))
                            })
                            .product()
                    })
                    .collect();
                let conj = Mat::from_fn(b.nrows(), b.ncols(), |r, col| b[(r, col)] * (diag[r] / diag[col]));
                let (matrix, support) = prune(&conj, &sites);
                out.push(DeformedTerm { kind: t.kind, anchor: t.anchor, support, matrix });
            }
        }
    }
    Ok(out)
}

fn check_size(torus: Torus) -> Result<()> {
    if torus.spins() > MAX_SPINS {
        return Err(Error::Guard { what: "torus spins".into(), size: torus.spins() as u128, limit: MAX_SPINS as u128 });
    }
    Ok(())
}

/// Equal superposition of all configurations with even parity at every vertex.
pub fn toric_state(torus: Torus) -> Result<Vec<C64>> {
    check_size(torus)?;
    let n = torus.spins();
    let mut psi = vec![ZERO; 1 << n];
    let stars: Vec<[usize; 4]> =
        (0..torus.m).flat_map(|j| (0..torus.n).map(move |i| (i, j))).map(|(i, j)| torus.star(i, j)).collect();
    for (s, amp) in psi.iter_mut().enumerate() {
        let even = stars.iter().all(|st| st.iter().map(|&e| (s >> (n - 1 - e)) & 1).sum::<usize>() % 2 == 0);
        if even {
            *amp = ONE;
        }
    }
    normalize(&mut psi);
    Ok(psi)
}

fn normalize(psi: &mut [C64]) {
    let nrm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in psi.iter_mut() {
        *z /= nrm;
    }
}

/// prod_v U_v |TC>, normalized.
pub fn deformed_state(alpha: f64, beta: f64, torus: Torus) -> Result<Vec<C64>> {
    let def = deformation(alpha, beta)?;
    let mut psi = toric_state(torus)?;
    let n = torus.spins();
    for (s, amp) in psi.iter_mut().enumerate() {
        let bit = |e: usize| (s >> (n - 1 - e)) & 1;
        for j in 0..torus.m {
            for i in 0..torus.n {
                let st = torus.star(i, j);
                *amp *= def.value(bit(st[1]), bit(st[3]));
            }
        }
    }
    normalize(&mut psi);
    Ok(psi)
}

/// Contract the plumbing PEPS on the torus. Each site's physical index splits into its four
/// copied edge bits; the two copies of an edge are merged by sum_i |i><ii|.
pub fn torus_peps_state(alpha: f64, beta: f64, torus: Torus) -> Result<Vec<C64>> {
    check_size(torus)?;
    let t = plumbing(&w_z2(alpha, beta)?);
    let site_shape = vec![2usize; 8];
    let site = DenseTensor::new(vec![16, 2, 2, 2, 2], t.entries().data().to_vec())?.reshape(site_shape)?;
    let n = torus.spins();
    // labels: virtual bond e -> e, physical copy of e at its first / second endpoint -> 1000 + 2e (+1)
    let mut nodes = Vec::new();
    let mut seen = vec![0u64; n];
    let mut copy = |e: usize| {
        let l = 1000 + 2 * e as u64 + seen[e];
        seen[e] += 1;
        l
    };
    for j in 0..torus.m {
        for i in 0..torus.n {
            let st = torus.star(i, j);
            let phys: Vec<u64> = st.iter().map(|&e| copy(e)).collect();
            let mut legs = phys;
            legs.extend(st.iter().map(|&e| e as u64));
            nodes.push(Node::new(site.clone(), legs));
        }
    }
    let merge = DenseTensor::from_fn(vec![2, 2, 2], |i| if i[0] == i[1] && i[1] == i[2] { ONE } else { ZERO });
    for e in 0..n {
        let e64 = e as u64;
        nodes.push(Node::new(merge.clone(), vec![5000 + e64, 1000 + 2 * e64, 1001 + 2 * e64]));
    }
    let open: Vec<u64> = (0..n as u64).map(|e| 5000 + e).collect();
    let (psi, _) = contract_greedy(&nodes, &open, 1 << 26)?;
    let mut v = psi.into_data();
    normalize(&mut v);
    Ok(v)
}

/// `op` on the listed spins applied to an n-spin state.
pub fn apply_local(op: &Mat, support: &[usize], psi: &[C64], n: usize) -> Vec<C64> {
    let k = support.len();
    let mask: usize = support.iter().map(|&e| 1usize << (n - 1 - e)).sum();
    let sub = |s: usize| support.iter().fold(0usize, |acc, &e| (acc << 1) | ((s >> (n - 1 - e)) & 1));
    let place = |base: usize, j: usize| {
        support.iter().enumerate().fold(base, |acc, (q, &e)| acc | (((j >> (k - 1 - q)) & 1) << (n - 1 - e)))
    };
    (0..psi.len())
        .map(|s| {
            let base = s & !mask;
            let row = sub(s);
            (0..1usize << k).map(|j| op[(row, j)] * psi[place(base, j)]).sum()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnihilationReport {
    pub max_residual: f64,
    pub per_term: Vec<f64>,
    /// |<U TC | PEPS>| between the two constructions of the state.
    pub overlap: f64,
}

pub fn check_annihilation(terms: &[DeformedTerm], alpha: f64, beta: f64, torus: Torus) -> Result<AnnihilationReport> {
    let psi = deformed_state(alpha, beta, torus)?;
    let peps = torus_peps_state(alpha, beta, torus)?;
    let overlap = psi.iter().zip(&peps).map(|(a, b)| a.conj() * b).sum::<C64>().norm();
    let n = torus.spins();
    let per_term: Vec<f64> = terms
        .par_iter()
        .map(|t| apply_local(&t.matrix, &t.support, &psi, n).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let max_residual = per_term.iter().cloned().fold(0.0, f64::max);
    Ok(AnnihilationReport { max_residual, per_term, overlap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;

    fn t22() -> Torus {
        Torus::new(2, 2).unwrap()
    }

    #[test]
    fn counts_and_projector_identity() {
        let terms = toric_terms(t22());
        assert_eq!(terms.len(), 8);
        assert_eq!(terms.iter().filter(|t| t.kind == TermKind::Star).count(), 4);
        for t in &terms {
            let s = term_support(t);
            assert_eq!(s.len(), 4);
            let m = strings_on(&t.strings, &s);
            assert!(frob(&(&m * &m - &m * c(2.0, 0.0))) < 1e-12);
        }
    }

    #[test]
    fn toric_ground_space_is_fourfold() {
        let all: Vec<usize> = (0..8).collect();
        let h = toric_terms(t22()).iter().fold(Mat::zeros(256, 256), |acc, t| acc + strings_on(&t.strings, &all));
        let (vals, _) = eigh(&h);
        assert_eq!(vals.iter().filter(|v| v.abs() < 1e-9).count(), 4);
    }

    #[test]
    fn deformation_examples() {
        let d = deformation(0.5, 0.5).unwrap();
        assert!(d.h_b.abs() < 1e-16 && d.h_t.abs() < 1e-16 && d.h_bt.abs() < 1e-16);
        assert!(frob(&(d.matrix() - eye(4))) < 1e-15);
        assert!(deformation(0.3, 0.7).unwrap().h_bt.abs() < 1e-15);
        let d = deformation(0.3, 0.6).unwrap();
        assert!((d.h_b - ((0.3f64 * 0.7) / (0.6 * 0.4)).ln() / 8.0).abs() < 1e-15);
        assert!((d.h_t - ((0.3f64 * 0.4) / (0.7 * 0.6)).ln() / 8.0).abs() < 1e-15);
        assert!((d.h_bt - ((0.3f64 * 0.6) / (0.7 * 0.4)).ln() / 8.0).abs() < 1e-15);
        assert!(deformation(1.0, 0.5).is_err());
    }

    #[test]
    fn locality() {
        let tor = Torus::new(3, 3).unwrap();
        let gen = deformed_terms(0.3, 0.6, tor).unwrap();
        assert!(gen.iter().all(|t| t.locality() <= 8));
        assert!(gen.iter().any(|t| t.locality() == 8));
        let line = deformed_terms(0.3, 0.7, tor).unwrap();
        assert!(line.iter().all(|t| t.locality() == 4));
    }

    #[test]
    fn annihilation_and_constructions_agree() {
        for (a, b) in [(0.5, 0.5), (0.3, 0.7), (0.3, 0.6)] {
            let terms = deformed_terms(a, b, t22()).unwrap();
            let r = check_annihilation(&terms, a, b, t22()).unwrap();
            assert!(r.max_residual < 1e-9, "{a} {b}: {}", r.max_residual);
            assert!(r.overlap > 1.0 - 1e-9, "{a} {b}: {}", r.overlap);
        }
    }
}
