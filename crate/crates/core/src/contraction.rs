//! Finite lattices with delta boundaries: the brute-force oracle, the DI reductions for local
//! and two-point observables, and the channel view of a single tensor.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::conditions::check_di;
use crate::error::{Error, Result};
use crate::families::{boundary_default, random_di_with, BoundaryKind};
use crate::linalg::{eye, frob, Mat, C64, ONE, ZERO};
use crate::network::{contract_sequential, merge, Node, Stats};
use crate::tensors::{outer, DenseTensor, ObservableVec, PepsTensor, Site};

/// Amplitude guard for dense states.
pub const STATE_GUARD: u128 = 1 << 24;
/// Default guard on intermediates of the efficient paths.
pub const PATCH_GUARD: u128 = 1 << 20;
/// Tolerance of the DI precondition of the efficient paths.
pub const DI_PRECONDITION_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Lattice {
    n: usize,
    m: usize,
    chi: usize,
    bulk: Vec<PepsTensor>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteKind {
    Bulk,
    Boundary(BoundaryKind),
}

impl Lattice {
    /// `bulk` is row-major from the bottom row: index (y-1)*n + (x-1).
    pub fn new(n: usize, m: usize, bulk: Vec<PepsTensor>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter("lattice needs N, M >= 1".into()));
        }
        if bulk.len() != n * m {
            return Err(Error::Shape(format!("{} bulk tensors for a {n}x{m} lattice", bulk.len())));
        }
        let chi = bulk[0].chi();
        if let Some(t) = bulk.iter().find(|t| t.chi() != chi) {
            return Err(Error::Shape(format!("bond dimension {} differs from {chi}", t.chi())));
        }
        Ok(Self { n, m, chi, bulk })
    }

    pub fn uniform(n: usize, m: usize, t: &PepsTensor) -> Result<Self> {
        Self::new(n, m, vec![t.clone(); n * m])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn bulk(&self, x: usize, y: usize) -> &PepsTensor {
        assert!((1..=self.n).contains(&x) && (1..=self.m).contains(&y), "({x},{y}) is not a bulk site");
        &self.bulk[(y - 1) * self.n + (x - 1)]
    }

    pub fn bulk_tensors(&self) -> &[PepsTensor] {
        &self.bulk
    }

    pub fn set_bulk(&mut self, x: usize, y: usize, t: PepsTensor) -> Result<()> {
        if !(1..=self.n).contains(&x) || !(1..=self.m).contains(&y) {
            return Err(Error::InvalidParameter(format!("({x},{y}) is not a bulk site")));
        }
        if t.chi() != self.chi {
            return Err(Error::Shape(format!("bond dimension {} differs from {}", t.chi(), self.chi)));
        }
        self.bulk[(y - 1) * self.n + (x - 1)] = t;
        Ok(())
    }

    /// Every physical site including edges and corners, bottom row first.
    pub fn sites(&self) -> Vec<Site> {
        let mut v = Vec::with_capacity((self.n + 2) * (self.m + 2));
        for y in 0..=self.m + 1 {
            for x in 0..=self.n + 1 {
                v.push((x, y));
            }
        }
        v
    }

    pub fn site_kind(&self, (x, y): Site) -> Option<SiteKind> {
        let (n1, m1) = (self.n + 1, self.m + 1);
        if x > n1 || y > m1 {
            return None;
        }
        let k = match (x, y) {
            (0, 0) => SiteKind::Boundary(BoundaryKind::CornerBl),
            (x, 0) if x == n1 => SiteKind::Boundary(BoundaryKind::CornerBr),
            (0, y) if y == m1 => SiteKind::Boundary(BoundaryKind::CornerTl),
            (x, y) if x == n1 && y == m1 => SiteKind::Boundary(BoundaryKind::CornerTr),
            (0, _) => SiteKind::Boundary(BoundaryKind::Left),
            (x, _) if x == n1 => SiteKind::Boundary(BoundaryKind::Right),
            (_, 0) => SiteKind::Boundary(BoundaryKind::Bottom),
            (_, y) if y == m1 => SiteKind::Boundary(BoundaryKind::Top),
            _ => SiteKind::Bulk,
        };
        Some(k)
    }

    pub fn phys_dim(&self, s: Site) -> Result<usize> {
        match self.site_kind(s) {
            Some(SiteKind::Bulk) => Ok(self.bulk(s.0, s.1).d()),
            Some(SiteKind::Boundary(k)) if k.is_corner() => Ok(self.chi * self.chi),
            Some(SiteKind::Boundary(_)) => Ok(self.chi),
            None => Err(Error::InvalidParameter(format!("site {s:?} is outside the lattice"))),
        }
    }

    /// Site tensor with the physical axis first, and the labels of its virtual legs.
    fn site_tensor(&self, s: Site) -> (DenseTensor, Vec<u64>) {
        let (x, y) = s;
        let (n, m) = (self.n, self.m);
        match self.site_kind(s).expect("site inside lattice") {
            SiteKind::Bulk => (
                self.bulk(x, y).entries().clone(),
                vec![lab(H, x - 1, y), lab(V, x, y - 1), lab(H, x, y), lab(V, x, y)],
            ),
            SiteKind::Boundary(kind) => {
                let legs = match kind {
                    BoundaryKind::Left => vec![lab(WL, 0, y - 1), lab(H, 0, y), lab(WL, 0, y)],
                    BoundaryKind::Right => vec![lab(H, n, y), lab(WR, 0, y - 1), lab(WR, 0, y)],
                    BoundaryKind::Bottom => vec![lab(WB, x - 1, 0), lab(WB, x, 0), lab(V, x, 0)],
                    BoundaryKind::Top => vec![lab(WT, x - 1, 0), lab(V, x, m), lab(WT, x, 0)],
                    BoundaryKind::CornerBl => vec![lab(WB, 0, 0), lab(WL, 0, 0)],
                    BoundaryKind::CornerBr => vec![lab(WB, n, 0), lab(WR, 0, 0)],
                    BoundaryKind::CornerTl => vec![lab(WL, 0, m), lab(WT, 0, 0)],
                    BoundaryKind::CornerTr => vec![lab(WT, n, 0), lab(WR, 0, m)],
                };
                (boundary_default(self.chi, kind).entries, legs)
            }
        }
    }

    /// Largest DI residual over the bulk tensors.
    pub fn di_residual(&self) -> f64 {
        self.bulk.iter().map(|t| check_di(t, 0.0).max_residual()).fold(0.0, f64::max)
    }
}

const H: u64 = 1;
const V: u64 = 2;
const WL: u64 = 3;
const WR: u64 = 4;
const WB: u64 = 5;
const WT: u64 = 6;
const P: u64 = 7;
const PB: u64 = 8;
const PK: u64 = 9;

fn lab(tag: u64, x: usize, y: usize) -> u64 {
    (tag << 48) | ((x as u64) << 24) | y as u64
}

/// Lattice of independent random DI tensors.
pub fn random_di_lattice(n: usize, m: usize, d: usize, chi: usize, seed: u64) -> Result<Lattice> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bulk = (0..n * m).map(|_| random_di_with(d, chi, &mut rng)).collect::<Result<Vec<_>>>()?;
    Lattice::new(n, m, bulk)
}

/// Keep only the listed physical outcomes on the physical axis (axis 0).
fn restrict_phys(a: &DenseTensor, keep: &[usize]) -> Result<DenseTensor> {
    let d = a.shape()[0];
    if let Some(&bad) = keep.iter().find(|&&k| k >= d) {
        return Err(Error::InvalidParameter(format!("outcome {bad} out of range for dimension {d}")));
    }
    let rest: usize = a.shape()[1..].iter().product();
    let mut shape = a.shape().to_vec();
    shape[0] = keep.len();
    let mut data = Vec::with_capacity(keep.len() * rest);
    for &k in keep {
        data.extend_from_slice(&a.data()[k * rest..(k + 1) * rest]);
    }
    DenseTensor::new(shape, data)
}

fn column_major(lat: &Lattice) -> Vec<Site> {
    let mut v = Vec::new();
    for x in 0..=lat.n + 1 {
        for y in 0..=lat.m + 1 {
            v.push((x, y));
        }
    }
    v
}

/// Exact wavefunction, axes in `Lattice::sites` order.
pub fn dense_state(lat: &Lattice) -> Result<DenseTensor> {
    dense_state_restricted(lat, &BTreeMap::new())
}

/// Wavefunction with the physical legs of some sites projected on the listed outcomes
/// (not renormalized). Axis k of the result runs over the kept outcomes of site k.
pub fn dense_state_restricted(lat: &Lattice, keep: &BTreeMap<Site, Vec<usize>>) -> Result<DenseTensor> {
    dense_state_ordered(lat, keep, &column_major(lat))
}

fn dense_state_ordered(lat: &Lattice, keep: &BTreeMap<Site, Vec<usize>>, order: &[Site]) -> Result<DenseTensor> {
    let sites = lat.sites();
    let mut total: u128 = 1;
    for &s in &sites {
        total *= keep.get(&s).map_or(lat.phys_dim(s)?, |k| k.len()) as u128;
    }
    if total > STATE_GUARD {
        return Err(Error::Guard { what: "dense state dimension".into(), size: total, limit: STATE_GUARD });
    }
    let index: BTreeMap<Site, usize> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut nodes = Vec::with_capacity(sites.len());
    for &s in &sites {
        let (mut t, mut legs) = lat.site_tensor(s);
        if let Some(k) = keep.get(&s) {
            t = restrict_phys(&t, k)?;
        }
        legs.insert(0, lab(P, s.0, s.1));
        nodes.push(Node::new(t, legs));
    }
    let order: Vec<usize> = order.iter().map(|s| index[s]).collect();
    let open: Vec<u64> = sites.iter().map(|s| lab(P, s.0, s.1)).collect();
    let (psi, _) = contract_sequential(&nodes, &order, &open, STATE_GUARD * 4)?;
    Ok(psi)
}

/// Interleave axes [v1..vk, v1..vk] (bra block, ket block) into doubled axes [v1^2..vk^2].
fn interleave(t: DenseTensor, lead: usize) -> Result<DenseTensor> {
    let k = (t.rank() - lead) / 2;
    let mut perm: Vec<usize> = (0..lead).collect();
    for i in 0..k {
        perm.push(lead + i);
        perm.push(lead + k + i);
    }
    let shape: Vec<usize> = t.shape()[..lead]
        .iter()
        .cloned()
        .chain((0..k).map(|i| t.shape()[lead + i] * t.shape()[lead + i]))
        .collect();
    t.permute(&perm)?.reshape(shape)
}

/// Doubled site tensor with the physical leg traced.
fn doubled(a: &DenseTensor) -> Result<DenseTensor> {
    let am = a.to_matrix(1);
    let f = am.adjoint() * &am;
    let vs = &a.shape()[1..];
    let shape: Vec<usize> = vs.iter().chain(vs.iter()).cloned().collect();
    interleave(DenseTensor::from_matrix(&f, shape)?, 0)
}

/// Doubled site tensor keeping bra and ket physical legs open: axes (p_bra, p_ket, doubled...).
fn half_doubled(a: &DenseTensor) -> Result<DenseTensor> {
    let k = a.rank() - 1;
    let o = outer(&a.conj(), a);
    // [p, v.., p', v'..] -> [p, p', v.., v'..]
    let mut perm = vec![0, k + 1];
    perm.extend(1..=k);
    perm.extend(k + 2..=2 * k + 1);
    interleave(o.permute(&perm)?, 2)
}

fn op_node(o: &ObservableVec) -> Result<Node> {
    let shape: Vec<usize> = o.dims.iter().chain(o.dims.iter()).cloned().collect();
    let legs: Vec<u64> = o
        .support
        .iter()
        .map(|s| lab(PB, s.0, s.1))
        .chain(o.support.iter().map(|s| lab(PK, s.0, s.1)))
        .collect();
    Ok(Node::new(DenseTensor::new(shape, o.entries.clone())?, legs))
}

fn check_ops(lat: &Lattice, obs: &[ObservableVec]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for o in obs {
        if o.support.len() != o.dims.len() || o.entries.len() != o.total_dim() * o.total_dim() {
            return Err(Error::Shape("malformed observable".into()));
        }
        for (&s, &d) in o.support.iter().zip(&o.dims) {
            let pd = lat.phys_dim(s)?;
            if pd != d {
                return Err(Error::Shape(format!("observable dimension {d} at {s:?}, site has {pd}")));
            }
            if !seen.insert(s) {
                return Err(Error::InvalidParameter(format!("observables overlap at {s:?}")));
            }
        }
    }
    Ok(())
}

/// <psi| prod O |psi> by contracting the whole doubled network. The oracle for the efficient paths.
pub fn dense_expectation(lat: &Lattice, obs: &[ObservableVec]) -> Result<C64> {
    check_ops(lat, obs)?;
    let owner: BTreeMap<Site, usize> =
        obs.iter().enumerate().flat_map(|(i, o)| o.support.iter().map(move |&s| (s, i))).collect();
    let mut nodes = Vec::new();
    let mut order = Vec::new();
    let mut placed = vec![false; obs.len()];
    for s in column_major(lat) {
        let (t, legs) = lat.site_tensor(s);
        let node = match owner.get(&s) {
            Some(_) => {
                let mut l = vec![lab(PB, s.0, s.1), lab(PK, s.0, s.1)];
                l.extend(legs);
                Node::new(half_doubled(&t)?, l)
            }
            None => Node::new(doubled(&t)?, legs),
        };
        order.push(nodes.len());
        nodes.push(node);
        if let Some(&i) = owner.get(&s) {
            if !placed[i] {
                placed[i] = true;
                order.push(nodes.len());
                nodes.push(op_node(&obs[i])?);
            }
        }
    }
    let (v, _) = contract_sequential(&nodes, &order, &[], STATE_GUARD)?;
    Ok(v.data()[0])
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    /// Contract even when the DI precondition fails; the result is then marked untrusted.
    pub force: bool,
    pub limit: u128,
}

impl Default for Options {
    fn default() -> Self {
        Self { force: false, limit: PATCH_GUARD }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: C64,
    pub method: String,
    pub trusted: bool,
    pub di_residual: f64,
    pub ops: u128,
    pub max_intermediate: u128,
}

/// Columns x0.. with heights; the sites kept after the DI reductions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub x0: usize,
    pub heights: Vec<usize>,
}

impl Region {
    fn height(&self, x: usize) -> usize {
        if x < self.x0 || x >= self.x0 + self.heights.len() {
            0
        } else {
            self.heights[x - self.x0]
        }
    }

    fn contains(&self, (x, y): Site) -> bool {
        y >= 1 && y <= self.height(x)
    }

    fn last(&self) -> usize {
        self.x0 + self.heights.len() - 1
    }
}

/// Row the operator needs in its column: bulk rows as is, bottom edge as row 1.
fn op_extent(lat: &Lattice, o: &ObservableVec) -> Result<(usize, usize, usize)> {
    if o.support.is_empty() {
        return Err(Error::InvalidParameter("observable with empty support".into()));
    }
    let mut xa = usize::MAX;
    let mut xb = 0;
    let mut h = 1;
    for &(x, y) in &o.support {
        let ok = (1..=lat.n).contains(&x) && y <= lat.m;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "site ({x},{y}): the reduced contraction handles bulk and bottom-edge operators only"
            )));
        }
        if y == 0 && o.support.len() > 1 {
            return Err(Error::InvalidParameter("bottom-edge operators must be single-site".into()));
        }
        xa = xa.min(x);
        xb = xb.max(x);
        h = h.max(y);
    }
    Ok((xa, xb, h))
}

fn precondition(lat: &Lattice, opts: &Options) -> Result<f64> {
    let r = lat.di_residual();
    if r > DI_PRECONDITION_TOL && !opts.force {
        return Err(Error::ConditionFailed { what: "DI conditions on the lattice".into(), residual: r });
    }
    Ok(r)
}

/// Single-observable expectation from the columns under the support.
pub fn local_expectation(lat: &Lattice, o: &ObservableVec, opts: &Options) -> Result<Evaluation> {
    let r = precondition(lat, opts)?;
    let (xa, xb, h) = op_extent(lat, o)?;
    let region = Region { x0: xa, heights: vec![h; xb - xa + 1] };
    let mut ev = region_expectation(lat, &region, std::slice::from_ref(o), opts.limit)?;
    ev.method = "column".into();
    ev.trusted = r <= DI_PRECONDITION_TOL;
    ev.di_residual = r;
    Ok(ev)
}

/// Two-point function from the reduced region: the two columns under the operators and the
/// patch of height min(y1, y2) between them.
pub fn two_point(lat: &Lattice, o1: &ObservableVec, o2: &ObservableVec, opts: &Options) -> Result<Evaluation> {
    let r = precondition(lat, opts)?;
    let (mut a, mut b) = (op_extent(lat, o1)?, op_extent(lat, o2)?);
    if b.0 < a.0 {
        std::mem::swap(&mut a, &mut b);
    }
    let x0 = a.0;
    let x1 = a.1.max(b.1);
    let low = a.2.min(b.2);
    let heights: Vec<usize> = (x0..=x1)
        .map(|x| {
            let mut h = 0;
            for e in [a, b] {
                if (e.0..=e.1).contains(&x) {
                    h = h.max(e.2);
                }
            }
            if h == 0 {
                low
            } else {
                h
            }
        })
        .collect();
    let region = Region { x0, heights };
    let mut ev = region_expectation(lat, &region, &[o1.clone(), o2.clone()], opts.limit)?;
    ev.method = if region.heights.len() == 1 { "column".into() } else { "patch".into() };
    ev.trusted = r <= DI_PRECONDITION_TOL;
    ev.di_residual = r;
    Ok(ev)
}

fn delta_cap(chi: usize) -> DenseTensor {
    DenseTensor::from_fn(vec![chi * chi], |i| if i[0] / chi == i[0] % chi { ONE } else { ZERO })
}

/// Contract the doubled network of `region` with every external leg capped, and divide by the
/// identity value chi^(columns + left-exposed sites). Valid only for DI bulk tensors.
pub fn region_expectation(lat: &Lattice, region: &Region, ops: &[ObservableVec], limit: u128) -> Result<Evaluation> {
    check_ops(lat, ops)?;
    let chi = lat.chi;
    if region.heights.is_empty() || region.x0 == 0 || region.last() > lat.n {
        return Err(Error::InvalidParameter("region outside the bulk".into()));
    }
    if region.heights.iter().any(|&h| h == 0 || h > lat.m) {
        return Err(Error::InvalidParameter("region heights must lie in 1..=M".into()));
    }
    let mut bottom: BTreeMap<usize, &ObservableVec> = BTreeMap::new();
    let mut owner: BTreeMap<Site, usize> = BTreeMap::new();
    for (i, o) in ops.iter().enumerate() {
        for &s in &o.support {
            if s.1 == 0 {
                bottom.insert(s.0, o);
            } else {
                owner.insert(s, i);
            }
            let inside = if s.1 == 0 { region.height(s.0) >= 1 } else { region.contains(s) };
            if !inside {
                return Err(Error::InvalidParameter(format!("operator site {s:?} lies outside the region")));
            }
        }
    }

    let ncols = region.heights.len();
    let hmax = *region.heights.iter().max().unwrap();
    let mut sweep = Vec::new();
    if ncols <= hmax {
        for y in 1..=hmax {
            for x in region.x0..=region.last() {
                if region.contains((x, y)) {
                    sweep.push((x, y));
                }
            }
        }
    } else {
        for x in region.x0..=region.last() {
            for y in 1..=region.height(x) {
                sweep.push((x, y));
            }
        }
    }

    let mut stats = Stats::default();
    let mut nodes = Vec::new();
    let mut placed = vec![false; ops.len()];
    let mut exposed = 0u32;
    for &(x, y) in &sweep {
        let (t, legs) = lat.site_tensor((x, y));
        let mut node = match owner.get(&(x, y)) {
            Some(_) => {
                let mut l = vec![lab(PB, x, y), lab(PK, x, y)];
                l.extend(legs.iter().cloned());
                Node::new(half_doubled(&t)?, l)
            }
            None => Node::new(doubled(&t)?, legs.clone()),
        };
        let mut caps = Vec::new();
        if x == region.x0 || region.height(x - 1) < y {
            exposed += 1;
            caps.push((legs[0], delta_cap(chi)));
        }
        if y == 1 {
            let cap = match bottom.get(&x) {
                Some(o) => DenseTensor::new(vec![chi * chi], o.entries.clone())?,
                None => delta_cap(chi),
            };
            caps.push((legs[1], cap));
        }
        if x == region.last() || region.height(x + 1) < y {
            caps.push((legs[2], delta_cap(chi)));
        }
        if y == region.height(x) {
            caps.push((legs[3], delta_cap(chi)));
        }
        for (l, cap) in caps {
            node = merge(node, &Node::new(cap, vec![l]), &mut stats, limit)?;
        }
        nodes.push(node);
        if let Some(&i) = owner.get(&(x, y)) {
            if !placed[i] {
                placed[i] = true;
                nodes.push(op_node(&ops[i])?);
            }
        }
    }
    let order: Vec<usize> = (0..nodes.len()).collect();
    let (v, st) = contract_sequential(&nodes, &order, &[], limit)?;
    let norm = (chi as f64).powi(ncols as i32 + exposed as i32);
    Ok(Evaluation {
        value: v.data()[0] / norm,
        method: "region".into(),
        trusted: true,
        di_residual: 0.0,
        ops: stats.ops + st.ops,
        max_intermediate: stats.max_size.max(st.max_size),
    })
}

/// Kraus form of a tensor read left-to-right: E^p[(t, r), (l, b)] = T^p_{lbrt}.
#[derive(Clone, Debug)]
pub struct Channel {
    pub chi: usize,
    pub kraus: Vec<Mat>,
}

pub fn channel_from_tensor(t: &PepsTensor) -> Channel {
    let ch = t.chi();
    let kraus = (0..t.d())
        .map(|p| {
            Mat::from_fn(ch * ch, ch * ch, |row, col| t.get(p, col / ch, col % ch, row % ch, row / ch))
        })
        .collect();
    Channel { chi: ch, kraus }
}

impl Channel {
    pub fn apply(&self, rho: &Mat) -> Mat {
        let n = self.chi * self.chi;
        self.kraus.iter().fold(Mat::zeros(n, n), |acc, e| acc + e * rho * e.adjoint())
    }

    /// ||sum_p E^p^dagger E^p - I||_F.
    pub fn trace_preservation_residual(&self) -> f64 {
        let n = self.chi * self.chi;
        let s = self.kraus.iter().fold(Mat::zeros(n, n), |acc, e| acc + e.adjoint() * e);
        frob(&(s - eye(n)))
    }

    /// Trace-preservation of the reshuffled map (l, t) <- (b, r): the dual condition.
    pub fn dual_trace_residual(&self) -> f64 {
        let ch = self.chi;
        let n = ch * ch;
        let mut s = Mat::zeros(n, n);
        for e in &self.kraus {
            // F[(l, t), (b, r)] = E[(t, r), (l, b)]
            let f = Mat::from_fn(n, n, |row, col| e[((row % ch) * ch + col % ch, (row / ch) * ch + col / ch)]);
            s += f.adjoint() * f;
        }
        frob(&(s - eye(n)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::isometry_residual;
    use crate::families::{grey_tensor, toric_code};
    use crate::linalg::{c, gaussian_matrix, pauli, random_hermitian, swap_gate};
    use crate::tensors::vectorize;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn norm2(psi: &DenseTensor) -> f64 {
        psi.data().iter().map(|z| z.norm_sqr()).sum()
    }

    #[test]
    fn toric_1x1_is_normalized() {
        let lat = Lattice::uniform(1, 1, &toric_code()).unwrap();
        assert!((norm2(&dense_state(&lat).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi1_is_product_of_scalars() {
        let t = PepsTensor::from_fn(2, 1, |p, _, _, _, _| if p == 0 { c(0.6, 0.0) } else { c(0.0, 0.8) });
        let lat = Lattice::uniform(2, 1, &t).unwrap();
        let psi = dense_state(&lat).unwrap();
        // boundary sites are one-dimensional; the bulk gives a product of two qubit states
        assert_eq!(psi.len(), 4);
        let want = [c(0.36, 0.0), c(0.0, 0.48), c(0.0, 0.48), c(-0.64, 0.0)];
        for (a, b) in psi.data().iter().zip(want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn random_di_2x2_normalized_and_order_free() {
        let lat = random_di_lattice(2, 2, 2, 2, 7).unwrap();
        let a = dense_state(&lat).unwrap();
        assert!((norm2(&a) - 1.0).abs() < 1e-10);
        let b = dense_state_ordered(&lat, &BTreeMap::new(), &lat.sites()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn dense_expectation_matches_state() {
        let lat = random_di_lattice(2, 1, 2, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let o = random_hermitian(4, &mut rng);
        let ov = vectorize(&o, &[(1, 1), (2, 1)], &[2, 2]).unwrap();
        let psi = dense_state(&lat).unwrap();
        // <psi|O|psi> from the state: move the two bulk axes last
        let sites = lat.sites();
        let ia = sites.iter().position(|&s| s == (1, 1)).unwrap();
        let ib = sites.iter().position(|&s| s == (2, 1)).unwrap();
        let mut perm: Vec<usize> = (0..sites.len()).filter(|&k| k != ia && k != ib).collect();
        perm.push(ia);
        perm.push(ib);
        let m = psi.permute(&perm).unwrap().to_matrix(sites.len() - 2);
        let rho = m.transpose() * m.map(|z| z.conj());
        let want = (0..4).map(|i| (0..4).map(|j| o[(i, j)] * rho[(j, i)]).sum::<C64>()).sum::<C64>();
        let got = dense_expectation(&lat, &[ov]).unwrap();
        assert!((got - want).norm() < 1e-11, "{got} {want}");
    }

    #[test]
    fn toric_sigma_z_vanishes() {
        let lat = Lattice::uniform(2, 2, &toric_code()).unwrap();
        let d = lat.bulk(1, 1).d();
        let z = crate::linalg::kron(&pauli(3), &eye(d / 2));
        let o = vectorize(&z, &[(1, 2)], &[d]).unwrap();
        assert!(dense_expectation(&lat, std::slice::from_ref(&o)).unwrap().norm() < 1e-10);
        assert!(local_expectation(&lat, &o, &Options::default()).unwrap().value.norm() < 1e-9);
    }

    #[test]
    fn local_matches_oracle() {
        let lat = random_di_lattice(3, 3, 2, 2, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let o = vectorize(&gaussian_matrix(2, 2, &mut rng), &[(2, 2)], &[2]).unwrap();
        let dense = dense_expectation(&lat, std::slice::from_ref(&o)).unwrap();
        let fast = local_expectation(&lat, &o, &Options::default()).unwrap();
        assert!((dense - fast.value).norm() < 1e-9, "{dense} {}", fast.value);
        let id = vectorize(&eye(2), &[(3, 3)], &[2]).unwrap();
        assert!((local_expectation(&lat, &id, &Options::default()).unwrap().value - ONE).norm() < 1e-11);
    }

    #[test]
    fn two_point_matches_oracle() {
        let lat = random_di_lattice(3, 3, 2, 2, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (s1, s2) in [((1, 2), (2, 1)), ((1, 3), (3, 2)), ((2, 1), (2, 3)), ((3, 2), (1, 0))] {
            let o1 = vectorize(&gaussian_matrix(2, 2, &mut rng), &[s1], &[2]).unwrap();
            let o2 = vectorize(&gaussian_matrix(2, 2, &mut rng), &[s2], &[2]).unwrap();
            let dense = dense_expectation(&lat, &[o1.clone(), o2.clone()]).unwrap();
            let fast = two_point(&lat, &o1, &o2, &Options::default()).unwrap();
            assert!((dense - fast.value).norm() < 1e-9, "{s1:?} {s2:?}: {dense} {}", fast.value);
        }
    }

    #[test]
    fn cost_independent_of_column() {
        let lat = random_di_lattice(4, 3, 2, 2, 5).unwrap();
        let ops: Vec<u128> = (1..=4)
            .map(|x| {
                let o = vectorize(&pauli(1), &[(x, 2)], &[2]).unwrap();
                local_expectation(&lat, &o, &Options::default()).unwrap().ops
            })
            .collect();
        assert!(ops.windows(2).all(|w| w[0] == w[1]), "{ops:?}");
    }

    #[test]
    fn refuses_non_di() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data = gaussian_matrix(32, 1, &mut rng).iter().cloned().collect();
        let t = PepsTensor::new(2, 2, DenseTensor::new(vec![2, 2, 2, 2, 2], data).unwrap()).unwrap();
        let lat = Lattice::uniform(2, 2, &t).unwrap();
        let o = vectorize(&pauli(3), &[(1, 1)], &[2]).unwrap();
        let err = local_expectation(&lat, &o, &Options::default()).unwrap_err();
        assert!(matches!(err, Error::ConditionFailed { .. }));
        let forced = local_expectation(&lat, &o, &Options { force: true, ..Options::default() }).unwrap();
        assert!(!forced.trusted);
        let top = vectorize(&pauli(3), &[(1, 3)], &[2]).unwrap();
        let lat = random_di_lattice(2, 2, 2, 2, 1).unwrap();
        assert!(local_expectation(&lat, &top, &Options::default()).is_err());
    }

    #[test]
    fn channel_views() {
        let t = crate::families::random_di(2, 2, 3).unwrap();
        let ch = channel_from_tensor(&t);
        assert!(ch.trace_preservation_residual() < 1e-12);
        assert!(ch.dual_trace_residual() < 1e-12);
        let g = channel_from_tensor(&grey_tensor());
        assert!(frob(&(&g.kraus[0] - swap_gate(2))) < 1e-15);
        assert!(g.kraus[1..].iter().all(|e| frob(e) == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data = gaussian_matrix(32, 1, &mut rng).iter().cloned().collect();
        let r = PepsTensor::new(2, 2, DenseTensor::new(vec![2, 2, 2, 2, 2], data).unwrap()).unwrap();
        assert!((channel_from_tensor(&r).trace_preservation_residual() - isometry_residual(&r)).abs() < 1e-13);
    }
}
