//! Brickwork dual-unitary circuits on an EPR chain, their simulation, and their encoding into a
//! post-selected DI-PEPS.
//!
//! Layout in the rotated frame k = x + y (time), u = x - y (position). A bulk site at (k, u) acts on
//! the wires at positions u - 1/2 (legs l -> t) and u + 1/2 (legs b -> r). The dark-blue tensors sit
//! on one antidiagonal and emit the EPR chain; each later antidiagonal is one brickwork layer.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::{check_di, check_dual_unitary};
use crate::contraction::{dense_state_restricted, Lattice};
use crate::error::{Error, Result};
use crate::families::{
    dark_blue_tensor, grey_tensor, identity_embedding, light_green_tensor, orange_tensor,
    random_dual_unitary, Gate,
};
use crate::linalg::{c, Mat, C64, ZERO};
use crate::tensors::{DenseTensor, PepsTensor, Site};

pub const MAX_WIDTH: usize = 12;
pub const GATE_TOL: f64 = 1e-12;
/// Below this norm a post-selected state counts as impossible.
pub const ZERO_NORM: f64 = 1e-14;

/// Two-qubit gate on wires (wire, wire + 1); rows (out_wire, out_wire+1), columns likewise for inputs.
#[derive(Clone, Debug)]
pub struct PlacedGate {
    pub wire: usize,
    pub matrix: Mat,
}

/// Layer j acts on wire pairs (w, w+1) with w = j + 1 (mod 2). The initial state pairs (0,1), (2,3), ...
/// and, for odd widths, pairs the last wire with a reference qubit that no gate touches.
/// Slots without a gate idle.
#[derive(Clone, Debug)]
pub struct DuCircuit {
    width: usize,
    layers: Vec<Vec<PlacedGate>>,
}

pub fn slot_parity(layer: usize) -> usize {
    (layer + 1) % 2
}

impl DuCircuit {
    pub fn new(width: usize, layers: Vec<Vec<PlacedGate>>) -> Result<Self> {
        if width == 0 || chain_len(width) > MAX_WIDTH {
            return Err(Error::InvalidParameter(format!("width {width} outside 1..={}", MAX_WIDTH - 1)));
        }
        for (j, layer) in layers.iter().enumerate() {
            let mut used = vec![false; width];
            for g in layer {
                if g.wire + 1 >= width || g.wire % 2 != slot_parity(j) {
                    return Err(Error::InvalidParameter(format!("layer {j} has no slot at wire {}", g.wire)));
                }
                if std::mem::replace(&mut used[g.wire], true) {
                    return Err(Error::InvalidParameter(format!("layer {j} uses wire {} twice", g.wire)));
                }
                let rep = check_dual_unitary(&Gate::two_leg(2, g.matrix.clone())?, GATE_TOL);
                if !rep.pass {
                    return Err(Error::ConditionFailed {
                        what: format!("dual-unitarity of gate ({j}, {})", g.wire),
                        residual: rep.residual_iso.max(rep.residual_dual),
                    });
                }
            }
        }
        Ok(Self { width, layers })
    }

    /// Every slot filled with an independent random dual-unitary gate.
    pub fn random<R: Rng>(width: usize, depth: usize, rng: &mut R) -> Result<Self> {
        let layers = (0..depth)
            .map(|j| {
                (slot_parity(j)..width.saturating_sub(1))
                    .step_by(2)
                    .map(|w| PlacedGate { wire: w, matrix: random_dual_unitary(rng) })
                    .collect()
            })
            .collect();
        Self::new(width, layers)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<PlacedGate>] {
        &self.layers
    }

    pub fn gate(&self, layer: usize, wire: usize) -> Option<&Mat> {
        self.layers[layer].iter().find(|g| g.wire == wire).map(|g| &g.matrix)
    }

    pub fn to_file(&self) -> CircuitFile {
        CircuitFile {
            width: self.width,
            layers: self
                .layers
                .iter()
                .map(|l| {
                    l.iter()
                        .map(|g| GateFile {
                            wire: g.wire,
                            matrix: (0..16).map(|k| [g.matrix[(k / 4, k % 4)].re, g.matrix[(k / 4, k % 4)].im]).collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_file(f: &CircuitFile) -> Result<Self> {
        let mut layers = Vec::with_capacity(f.layers.len());
        for l in &f.layers {
            let mut gates = Vec::with_capacity(l.len());
            for g in l {
                if g.matrix.len() != 16 {
                    return Err(Error::Shape(format!("gate matrix has {} entries, expected 16", g.matrix.len())));
                }
                gates.push(PlacedGate { wire: g.wire, matrix: Mat::from_fn(4, 4, |i, j| c(g.matrix[4 * i + j][0], g.matrix[4 * i + j][1])) });
            }
            layers.push(gates);
        }
        Self::new(f.width, layers)
    }
}

/// On-disk circuit; gate matrices are row-major [re, im] pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitFile {
    pub width: usize,
    pub layers: Vec<Vec<GateFile>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateFile {
    pub wire: usize,
    pub matrix: Vec<[f64; 2]>,
}

/// Qubits of the simulated state: the wires plus the reference for odd widths.
pub fn chain_len(width: usize) -> usize {
    width + width % 2
}

/// (|00> + |11>)/sqrt 2 on every pair (2i, 2i+1). Wire 0 is the most significant bit.
pub fn epr_chain(width: usize) -> Vec<C64> {
    let pairs = width / 2;
    let amp = c(0.5f64.powf(pairs as f64 / 2.0), 0.0);
    let mut psi = vec![ZERO; 1 << width];
    for s in 0..1usize << pairs {
        let mut idx = 0;
        for i in 0..pairs {
            let b = (s >> (pairs - 1 - i)) & 1;
            idx = (idx << 2) | (b * 3);
        }
        psi[idx] = amp;
    }
    psi
}

fn apply_gate(psi: &mut [C64], width: usize, wire: usize, g: &Mat) {
    let (s0, s1) = (width - 1 - wire, width - 2 - wire);
    for base in 0..psi.len() {
        if base >> s0 & 1 == 1 || base >> s1 & 1 == 1 {
            continue;
        }
        let idx = [base, base | 1 << s1, base | 1 << s0, base | 1 << s0 | 1 << s1];
        let a: Vec<C64> = idx.iter().map(|&i| psi[i]).collect();
        for (q, &i) in idx.iter().enumerate() {
            psi[i] = (0..4).map(|k| g[(q, k)] * a[k]).sum();
        }
    }
}

/// Final state on `chain_len(width)` qubits, the reference last.
pub fn simulate_circuit(circ: &DuCircuit) -> Vec<C64> {
    let q = chain_len(circ.width);
    let mut psi = epr_chain(q);
    for layer in &circ.layers {
        for g in layer {
            apply_gate(&mut psi, q, g.wire, &g.matrix);
        }
    }
    psi
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Color {
    Orange,
    LightGreen,
    DarkBlue,
    Grey,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Placement {
    pub x: usize,
    pub y: usize,
    pub color: Color,
}

/// Allowed physical outcomes per site; sites not listed are left open.
#[derive(Clone, Debug, Default)]
pub struct PostselectPattern {
    pub allowed: BTreeMap<Site, Vec<usize>>,
}

impl PostselectPattern {
    pub fn validate(&self, lat: &Lattice) -> Result<()> {
        for (&s, outs) in &self.allowed {
            let d = lat.phys_dim(s)?;
            if outs.is_empty() {
                return Err(Error::InvalidParameter(format!("no outcome allowed at {s:?}")));
            }
            if let Some(&bad) = outs.iter().find(|&&o| o >= d) {
                return Err(Error::InvalidParameter(format!("outcome {bad} at {s:?} exceeds dimension {d}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Encoding {
    pub lattice: Lattice,
    pub pattern: PostselectPattern,
    pub layout: Vec<Placement>,
    /// Boundary site carrying each wire, in wire order, then the reference for odd widths.
    pub readout: Vec<Site>,
    pub edge_sites: usize,
    pub idle_sites: usize,
}

impl Encoding {
    /// Probability of the post-selection: 1/4 per one-sided Bell projection, 1/16 per idle site and
    /// 1/16 for pinning the four corners.
    pub fn expected_probability(&self) -> f64 {
        0.0625 * 0.25f64.powi(self.edge_sites as i32) * 0.0625f64.powi(self.idle_sites as i32)
    }
}

fn to_site(k: i64, u: i64) -> Site {
    (((k + u) / 2) as usize, ((k - u) / 2) as usize)
}

pub fn encode(circ: &DuCircuit, u_iso: Option<&Mat>) -> Result<Encoding> {
    let w = circ.width as i64;
    let pairs = chain_len(circ.width) as i64 / 2;
    let k0 = pairs + 1;
    let u0 = 1 - pairs;
    let kf = k0 + circ.depth() as i64;

    let emb = identity_embedding();
    let dark = dark_blue_tensor(u_iso.unwrap_or(&emb))?;
    let green = light_green_tensor();
    let mut placed: BTreeMap<Site, (Color, PepsTensor)> = BTreeMap::new();
    let mut pattern = PostselectPattern::default();
    let (mut edge_sites, mut idle_sites) = (0, 0);
    for i in 0..pairs {
        placed.insert(to_site(k0, u0 + 2 * i), (Color::DarkBlue, dark.clone()));
    }
    for layer in 0..circ.depth() {
        let k = k0 + 1 + layer as i64;
        let mut j = slot_parity(layer) as i64 - 2;
        while j < w {
            let s = to_site(k, u0 + j);
            if j == -1 {
                // wire 0 passes b -> r; the outer pair l, t is measured freely
                pattern.allowed.insert(s, (0..4).map(|p1| 4 * p1).collect());
                placed.insert(s, (Color::LightGreen, green.clone()));
                edge_sites += 1;
            } else if j == w - 1 {
                pattern.allowed.insert(s, (0..4).collect());
                placed.insert(s, (Color::LightGreen, green.clone()));
                edge_sites += 1;
            } else if j >= 0 {
                match circ.gate(layer, j as usize) {
                    Some(g) => {
                        placed.insert(s, (Color::Orange, orange_tensor(g)?));
                    }
                    None => {
                        pattern.allowed.insert(s, vec![0]);
                        placed.insert(s, (Color::LightGreen, green.clone()));
                        idle_sites += 1;
                    }
                }
            }
            j += 2;
        }
    }
    let n = placed.keys().map(|s| s.0).max().unwrap_or(1);
    let m = placed.keys().map(|s| s.1).max().unwrap_or(1);
    let grey = grey_tensor();
    let mut bulk = Vec::with_capacity(n * m);
    let mut layout = Vec::with_capacity(n * m);
    for y in 1..=m {
        for x in 1..=n {
            let (color, t) = placed.remove(&(x, y)).unwrap_or((Color::Grey, grey.clone()));
            layout.push(Placement { x, y, color });
            bulk.push(t);
        }
    }
    let lattice = Lattice::new(n, m, bulk)?;
    for s in [(0, 0), (n + 1, 0), (0, m + 1), (n + 1, m + 1)] {
        pattern.allowed.insert(s, vec![0]);
    }
    // wire j leaves the last slice as the t leg of the site at u0 + j, or the r leg of the site at u0 + j - 1
    let mut readout: Vec<Site> = (0..w)
        .map(|j| {
            if (u0 + j - kf).rem_euclid(2) == 0 {
                (to_site(kf, u0 + j).0, m + 1)
            } else {
                (n + 1, to_site(kf, u0 + j - 1).1)
            }
        })
        .collect();
    if circ.width % 2 == 1 {
        // the last dark-blue sits on row 1 and its r leg runs straight to the right edge
        readout.push((n + 1, 1));
    }
    Ok(Encoding { lattice, pattern, layout, readout, edge_sites, idle_sites })
}

#[derive(Clone, Debug)]
pub struct PostselectedState {
    /// Axes of `amplitudes`, in `Lattice::sites` order.
    pub sites: Vec<Site>,
    /// Physical outcome behind each index of each axis.
    pub outcomes: Vec<Vec<usize>>,
    pub amplitudes: DenseTensor,
    pub norm: f64,
    pub probability: f64,
}

/// Outcomes on which a bulk tensor has any weight.
fn support(t: &PepsTensor) -> Vec<usize> {
    let block = t.chi().pow(4);
    (0..t.d()).filter(|&p| t.entries().data()[p * block..(p + 1) * block].iter().any(|z| z.norm() > 0.0)).collect()
}

/// Dense contraction with the pattern's outcomes substituted, not renormalized. Bulk sites outside the
/// pattern are restricted to the outcomes their tensor supports, which drops only zero amplitudes.
pub fn postselect_contract(lat: &Lattice, pattern: &PostselectPattern) -> Result<PostselectedState> {
    pattern.validate(lat)?;
    let mut keep = pattern.allowed.clone();
    for y in 1..=lat.m() {
        for x in 1..=lat.n() {
            let t = lat.bulk(x, y);
            if let std::collections::btree_map::Entry::Vacant(e) = keep.entry((x, y)) {
                let sup = support(t);
                if sup.len() < t.d() {
                    e.insert(sup);
                }
            }
        }
    }
    let amplitudes = dense_state_restricted(lat, &keep)?;
    let sites = lat.sites();
    let mut outcomes = Vec::with_capacity(sites.len());
    for &s in &sites {
        outcomes.push(match keep.get(&s) {
            Some(k) => k.clone(),
            None => (0..lat.phys_dim(s)?).collect(),
        });
    }
    let norm = amplitudes.norm();
    if norm < ZERO_NORM {
        return Err(Error::ZeroProbability { probability: norm * norm });
    }
    Ok(PostselectedState { sites, outcomes, amplitudes, norm, probability: norm * norm })
}

impl PostselectedState {
    /// Reduced density matrix (unnormalized) on the listed sites, first site most significant.
    pub fn reduced(&self, keep: &[Site]) -> Result<Mat> {
        let mut front = Vec::with_capacity(keep.len());
        for s in keep {
            let a = self
                .sites
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| Error::InvalidParameter(format!("site {s:?} is not in the state")))?;
            if front.contains(&a) {
                return Err(Error::InvalidParameter(format!("site {s:?} listed twice")));
            }
            front.push(a);
        }
        let mut perm = front.clone();
        perm.extend((0..self.sites.len()).filter(|a| !front.contains(a)));
        let a = self.amplitudes.permute(&perm)?.to_matrix(keep.len());
        Ok(&a * a.adjoint())
    }
}

/// <psi|rho|psi> / (tr rho <psi|psi>).
pub fn fidelity(rho: &Mat, psi: &[C64]) -> Result<f64> {
    if rho.nrows() != psi.len() {
        return Err(Error::Shape(format!("state of length {} against a {}-dim density matrix", psi.len(), rho.nrows())));
    }
    let v = Mat::from_column_slice(psi.len(), 1, psi);
    let num = (v.adjoint() * rho * &v)[(0, 0)].re;
    let den = rho.trace().re * v.norm_squared();
    if den <= 0.0 {
        return Err(Error::Numerical("fidelity against a zero state".into()));
    }
    Ok(num / den)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncodingCheck {
    pub fidelity: f64,
    pub postselect_probability: f64,
    pub expected_probability: f64,
    /// Largest DI residual over the placed tensors.
    pub residuals: f64,
    pub n: usize,
    pub m: usize,
    pub layout: Vec<Placement>,
}

pub fn check_encoding(circ: &DuCircuit, u_iso: Option<&Mat>) -> Result<EncodingCheck> {
    let enc = encode(circ, u_iso)?;
    let residuals = enc.lattice.bulk_tensors().iter().map(|t| check_di(t, 0.0).max_residual()).fold(0.0, f64::max);
    let st = postselect_contract(&enc.lattice, &enc.pattern)?;
    let rho = st.reduced(&enc.readout)?;
    Ok(EncodingCheck {
        fidelity: fidelity(&rho, &simulate_circuit(circ))?,
        postselect_probability: st.probability,
        expected_probability: enc.expected_probability(),
        residuals,
        n: enc.lattice.n(),
        m: enc.lattice.m(),
        layout: enc.layout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::{dense_state, random_di_lattice};
    use crate::linalg::{eye, kron, swap_gate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn full_matrix(circ: &DuCircuit) -> Mat {
        let w = circ.width();
        let mut u = eye(1 << w);
        for layer in circ.layers() {
            for g in layer {
                let op = kron(&kron(&eye(1 << g.wire), &g.matrix), &eye(1 << (w - g.wire - 2)));
                u = op * u;
            }
        }
        u
    }

    #[test]
    fn simulator_matches_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let circ = DuCircuit::random(4, 2, &mut rng).unwrap();
        let psi = simulate_circuit(&circ);
        let want = full_matrix(&circ) * Mat::from_column_slice(16, 1, &epr_chain(4));
        for k in 0..16 {
            assert!((psi[k] - want[(k, 0)]).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_layers_give_epr_chain() {
        let circ = DuCircuit::new(4, vec![]).unwrap();
        let psi = simulate_circuit(&circ);
        for (k, z) in psi.iter().enumerate() {
            let want = if [0b0000, 0b0011, 0b1100, 0b1111].contains(&k) { 0.5 } else { 0.0 };
            assert!((z.re - want).abs() < 1e-15 && z.im == 0.0);
        }
    }

    fn swap_circuit(width: usize, depth: usize) -> DuCircuit {
        let layers = (0..depth)
            .map(|j| {
                (slot_parity(j)..width - 1).step_by(2).map(|w| PlacedGate { wire: w, matrix: swap_gate(2) }).collect()
            })
            .collect();
        DuCircuit::new(width, layers).unwrap()
    }

    /// Pair partner of every wire after tracking the swaps.
    fn swapped_pairs(width: usize, depth: usize) -> Vec<C64> {
        let mut pos: Vec<usize> = (0..width).collect();
        for j in 0..depth {
            for w in (slot_parity(j)..width - 1).step_by(2) {
                pos.swap(w, w + 1);
            }
        }
        // pos[wire] = original label now on that wire; labels 2i and 2i+1 are paired
        let mut psi = vec![ZERO; 1 << width];
        for s in 0..1usize << (width / 2) {
            let mut idx = 0;
            for wire in 0..width {
                let bit = (s >> (width / 2 - 1 - pos[wire] / 2)) & 1;
                idx |= bit << (width - 1 - wire);
            }
            psi[idx] = c(0.5f64.powf(width as f64 / 4.0), 0.0);
        }
        psi
    }

    #[test]
    fn swap_circuit_permutes_pairs() {
        for (w, d) in [(4, 1), (4, 2), (6, 3)] {
            let psi = simulate_circuit(&swap_circuit(w, d));
            let want = swapped_pairs(w, d);
            let diff: f64 = psi.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-14, "({w},{d})");
        }
    }

    #[test]
    fn rejects_bad_circuits() {
        assert!(DuCircuit::new(0, vec![]).is_err());
        assert!(DuCircuit::new(13, vec![]).is_err());
        let bad_slot = vec![vec![PlacedGate { wire: 0, matrix: swap_gate(2) }]];
        assert!(DuCircuit::new(4, bad_slot).is_err());
        let not_du = vec![vec![PlacedGate { wire: 1, matrix: eye(4) }]];
        assert!(matches!(DuCircuit::new(4, not_du), Err(Error::ConditionFailed { .. })));
    }

    #[test]
    fn two_by_two_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let enc = encode(&DuCircuit::random(2, 2, &mut rng).unwrap(), None).unwrap();
        let colors: Vec<(Site, Color)> = enc.layout.iter().map(|p| ((p.x, p.y), p.color)).collect();
        assert_eq!(
            colors,
            vec![
                ((1, 1), Color::DarkBlue),
                ((2, 1), Color::LightGreen),
                ((1, 2), Color::LightGreen),
                ((2, 2), Color::Orange)
            ]
        );
        assert_eq!(enc.pattern.allowed[&(1, 2)], vec![0, 4, 8, 12]);
        assert_eq!(enc.pattern.allowed[&(2, 1)], vec![0, 1, 2, 3]);
        assert_eq!(enc.readout, vec![(2, 3), (3, 2)]);
    }

    #[test]
    fn placed_tensors_are_di() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let enc = encode(&DuCircuit::random(4, 2, &mut rng).unwrap(), None).unwrap();
        assert!(enc.lattice.di_residual() <= 1e-12);
    }

    #[test]
    fn depth_zero_reads_out_epr_chain() {
        let circ = DuCircuit::new(2, vec![]).unwrap();
        let chk = check_encoding(&circ, None).unwrap();
        assert!(chk.fidelity >= 1.0 - 1e-9, "{}", chk.fidelity);
    }

    #[test]
    fn swap_circuit_encoding() {
        let circ = swap_circuit(4, 1);
        let enc = encode(&circ, None).unwrap();
        let st = postselect_contract(&enc.lattice, &enc.pattern).unwrap();
        let f = fidelity(&st.reduced(&enc.readout).unwrap(), &swapped_pairs(4, 1)).unwrap();
        assert!(f >= 1.0 - 1e-9, "{f}");
    }

    #[test]
    fn random_circuits_match_simulator() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (w, d) in [(2, 1), (2, 2), (3, 2), (4, 1)] {
            let chk = check_encoding(&DuCircuit::random(w, d, &mut rng).unwrap(), None).unwrap();
            assert!(chk.fidelity >= 1.0 - 1e-9, "({w},{d}) {}", chk.fidelity);
            assert!((chk.postselect_probability - chk.expected_probability).abs() < 1e-9);
        }
    }

    #[test]
    fn odd_width_keeps_reference_pure() {
        let circ = DuCircuit::new(1, vec![vec![], vec![]]).unwrap();
        assert_eq!(simulate_circuit(&circ).len(), 4);
        let chk = check_encoding(&circ, None).unwrap();
        assert!(chk.fidelity >= 1.0 - 1e-9, "{}", chk.fidelity);
    }

    #[test]
    fn idle_slots_use_postselected_green() {
        let layers = vec![vec![], vec![]];
        let circ = DuCircuit::new(2, layers).unwrap();
        let enc = encode(&circ, None).unwrap();
        assert_eq!(enc.idle_sites, 1);
        let chk = check_encoding(&circ, None).unwrap();
        assert!(chk.fidelity >= 1.0 - 1e-9);
        assert!((chk.postselect_probability - chk.expected_probability).abs() < 1e-9);
    }

    #[test]
    fn empty_pattern_is_dense_state() {
        let lat = random_di_lattice(2, 1, 2, 2, 5).unwrap();
        let st = postselect_contract(&lat, &PostselectPattern::default()).unwrap();
        assert!(st.amplitudes.max_abs_diff(&dense_state(&lat).unwrap()) < 1e-14);
        assert!((st.probability - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fixing_everything_leaves_one_amplitude() {
        let lat = random_di_lattice(2, 2, 2, 1, 8).unwrap();
        let psi = dense_state(&lat).unwrap();
        let allowed = lat.sites().into_iter().map(|s| (s, vec![0])).collect();
        let st = postselect_contract(&lat, &PostselectPattern { allowed }).unwrap();
        assert_eq!(st.amplitudes.len(), 1);
        let zero = vec![0; psi.rank()];
        assert!((st.amplitudes.data()[0] - psi.get(&zero)).norm() < 1e-14);
    }

    #[test]
    fn zero_probability_is_distinct() {
        // the grey tensor has no weight on outcome 1
        let lat = Lattice::uniform(1, 1, &grey_tensor()).unwrap();
        let allowed = [((1, 1), vec![1])].into_iter().collect();
        let err = postselect_contract(&lat, &PostselectPattern { allowed }).unwrap_err();
        assert!(matches!(err, Error::ZeroProbability { .. }));
    }

    #[test]
    fn file_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let circ = DuCircuit::random(4, 2, &mut rng).unwrap();
        let back = DuCircuit::from_file(&circ.to_file()).unwrap();
        assert_eq!(simulate_circuit(&circ), simulate_circuit(&back));
    }
}
