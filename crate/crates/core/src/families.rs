//! Constructors for every DI-PEPS family, boundary tensors and random instances.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::check_dual_unitary;
use crate::error::{Error, Result};
use crate::linalg::{
    c, expi, eye, haar_unitary, kron, pauli, unitarity_residual, Mat, C64, ONE, ZERO,
};
use crate::tensors::{DenseTensor, PepsTensor};

/// Two-leg gate V_{tr,lb}: rows (t, r), columns (l, b).
#[derive(Clone, Debug)]
pub struct Gate {
    pub dims_in: Vec<usize>,
    pub dims_out: Vec<usize>,
    pub matrix: Mat,
}

impl Gate {
    pub fn two_leg(chi: usize, matrix: Mat) -> Result<Self> {
        if matrix.nrows() != chi * chi || matrix.ncols() != chi * chi {
            return Err(Error::Shape(format!("gate on {chi}x{chi} needs a {0}x{0} matrix", chi * chi)));
        }
        Ok(Self { dims_in: vec![chi, chi], dims_out: vec![chi, chi], matrix })
    }
}

/// Single-site unitaries on the legs (p, l, b, r, t).
#[derive(Clone, Debug)]
pub struct Singles {
    pub p: Mat,
    pub l: Mat,
    pub b: Mat,
    pub r: Mat,
    pub t: Mat,
}

impl Singles {
    pub fn haar<R: Rng>(d: usize, chi: usize, rng: &mut R) -> Self {
        Self {
            p: haar_unitary(d, rng),
            l: haar_unitary(chi, rng),
            b: haar_unitary(chi, rng),
            r: haar_unitary(chi, rng),
            t: haar_unitary(chi, rng),
        }
    }

    fn apply(&self, t: &PepsTensor) -> Result<PepsTensor> {
        for (name, m) in [("p", &self.p), ("l", &self.l), ("b", &self.b), ("r", &self.r), ("t", &self.t)] {
            let res = unitarity_residual(m);
            if res > 1e-10 {
                return Err(Error::ConditionFailed { what: format!("single-site unitary on {name}"), residual: res });
            }
        }
        t.apply_legs([Some(&self.p), Some(&self.l), Some(&self.b), Some(&self.r), Some(&self.t)])
    }
}

fn with_singles(t: PepsTensor, singles: Option<&Singles>) -> Result<PepsTensor> {
    match singles {
        Some(s) => s.apply(&t),
        None => Ok(t),
    }
}

/// U = P231 D with the ancilla fixed to 0: T^p_{lbrt} = D_{lb0} delta_{p,0} delta_{r,l} delta_{t,b}.
/// `phases` is the diagonal of D over (l, b, a), length chi^3.
pub fn permutation_phase(chi: usize, phases: &[C64], singles: Option<&Singles>) -> Result<PepsTensor> {
    if phases.len() != chi * chi * chi {
        return Err(Error::Shape(format!("D needs {} diagonal entries, got {}", chi * chi * chi, phases.len())));
    }
    if let Some(z) = phases.iter().find(|z| (z.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::InvalidParameter(format!("D entry {z} is not unimodular")));
    }
    let t = PepsTensor::from_fn(chi, chi, |p, l, b, r, t| {
        if p == 0 && r == l && t == b {
            phases[(l * chi + b) * chi]
        } else {
            ZERO
        }
    });
    with_singles(t, singles)
}

fn pauli_pair(k: usize) -> Mat {
    kron(&pauli(k), &pauli(k))
}

/// prod_alpha exp(i c_alpha sigma^alpha sigma^alpha) on a qubit pair.
fn xyz_exponential(coef: &[f64; 3]) -> Mat {
    let mut m = eye(4);
    for (k, &a) in coef.iter().enumerate() {
        m *= expi(&pauli_pair(k + 1), a);
    }
    m
}

/// Residuals of the two published solution branches of the three-qubit ansatz.
pub fn three_qubit_branch_residuals(q: [f64; 3], j: [f64; 3]) -> (f64, f64) {
    let r1 = (q[0].powi(2) + (q[1] - FRAC_PI_4).powi(2) + (j[2] - FRAC_PI_4).powi(2)).sqrt();
    let c3 = (2.0 * q[2]).cos();
    let r2 = ((q[1] - FRAC_PI_4).powi(2)
        + ((2.0 * j[0]).cos() * c3).powi(2)
        + ((2.0 * j[1]).cos() * c3).powi(2))
    .sqrt();
    (r1, r2)
}

/// The bare three-qubit gate U with qubits ordered (1, 2, 3), qubit 1 most significant.
pub fn three_qubit_unitary(q: [f64; 3], j: [f64; 3]) -> Mat {
    let eq = kron(&eye(2), &xyz_exponential(&q));
    let ej = kron(&xyz_exponential(&j), &eye(2));
    eq * ej
}

/// Tensor from a three-qubit gate without any branch check.
pub fn three_qubit_tensor_unchecked(q: [f64; 3], j: [f64; 3]) -> PepsTensor {
    // Read through the transpose: outputs (p, t, r) on qubits (1, 2, 3), inputs (b, l, ancilla).
    let m = three_qubit_unitary(q, j).transpose();
    PepsTensor::from_fn(2, 2, |p, l, b, r, t| m[(p * 4 + t * 2 + r, b * 4 + l * 2)])
}

pub fn three_qubit_gate(q: [f64; 3], j: [f64; 3], singles: Option<&Singles>) -> Result<PepsTensor> {
    let (r1, r2) = three_qubit_branch_residuals(q, j);
    if r1.min(r2) > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "parameters outside both solution branches (residuals {r1:.3e}, {r2:.3e})"
        )));
    }
    with_singles(three_qubit_tensor_unchecked(q, j), singles)
}

/// T^p_{lbrt} = V^p_{tr,lb} / sqrt(d), one dual-unitary gate per physical value.
pub fn controlled_dual_unitary(vs: &[Mat], singles: Option<&Singles>) -> Result<PepsTensor> {
    let d = vs.len();
    if d == 0 {
        return Err(Error::InvalidParameter("need at least one gate".into()));
    }
    let n = vs[0].nrows();
    let chi = (n as f64).sqrt().round() as usize;
    for (i, v) in vs.iter().enumerate() {
        let g = Gate::two_leg(chi, v.clone())?;
        let rep = check_dual_unitary(&g, 1e-10);
        if !rep.pass {
            return Err(Error::ConditionFailed {
                what: format!("dual-unitarity of gate {i}"),
                residual: rep.residual_iso.max(rep.residual_dual),
            });
        }
    }
    let s = 1.0 / (d as f64).sqrt();
    let t = PepsTensor::from_fn(d, chi, |p, l, b, r, t| vs[p][(t * chi + r, l * chi + b)] * s);
    with_singles(t, singles)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: [f64; 8],
    pub phi: [f64; 16],
}

/// Rank-4 weight W_{lb,rt} of a plumbing tensor.
#[derive(Clone, Debug)]
pub struct WMatrix {
    pub chi: usize,
    pub entries: Mat,
    pub params: Option<WParams>,
}

pub fn w_z2(alpha: f64, beta: f64) -> Result<WMatrix> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("alpha={alpha}, beta={beta} must lie in [0, 1]")));
    }
    let (a, ac, b, bc) = (alpha.sqrt(), (1.0 - alpha).sqrt(), beta.sqrt(), (1.0 - beta).sqrt());
    let z = 0.0;
    #[rustfmt::skip]
    let rows = [
        a,  z,  z,  ac,
        z,  b,  bc, z,
        z,  ac, a,  z,
        bc, z,  z,  b,
    ];
    Ok(WMatrix {
        chi: 2,
        entries: Mat::from_row_slice(4, 4, &rows.map(|x| c(x, 0.0))),
        params: None,
    })
}

pub fn w_parametrized(alpha: f64, beta: f64, theta: [f64; 8], phi: [f64; 16]) -> WMatrix {
    let (ca, sa, cb, sb) = (alpha.cos(), alpha.sin(), beta.cos(), beta.sin());
    let th = |i: usize| theta[i - 1];
    let e = |j: usize| C64::from_polar(1.0, phi[j - 1]);
    #[rustfmt::skip]
    let rows = [
        e(1) * ca * th(1).cos(),  e(2) * ca * th(1).sin(),  e(3) * sa * th(2).sin(),  e(4) * sa * th(2).cos(),
        e(9) * cb * th(5).sin(),  e(10) * cb * th(5).cos(), e(11) * sb * th(6).cos(), e(12) * sb * th(6).sin(),
        e(5) * sa * th(3).sin(),  e(6) * sa * th(3).cos(),  e(7) * ca * th(4).cos(),  e(8) * ca * th(4).sin(),
        e(13) * sb * th(7).cos(), e(14) * sb * th(7).sin(), e(15) * cb * th(8).sin(), e(16) * cb * th(8).cos(),
    ];
    WMatrix {
        chi: 2,
        entries: Mat::from_row_slice(4, 4, &rows),
        params: Some(WParams { alpha, beta, theta, phi }),
    }
}

/// Plumbing tensor: the physical index copies (l, b, r, t), weighted by W_{lb,rt}. d = chi^4.
pub fn plumbing(w: &WMatrix) -> PepsTensor {
    let chi = w.chi;
    let d = chi.pow(4);
    PepsTensor::from_fn(d, chi, |p, l, b, r, t| {
        if p == ((l * chi + b) * chi + r) * chi + t {
            w.entries[(l * chi + b, r * chi + t)]
        } else {
            ZERO
        }
    })
}

pub fn toric_code() -> PepsTensor {
    plumbing(&w_z2(0.5, 0.5).expect("valid parameters"))
}

/// Sequentially generated tensor T^p_{lbrt} = sum_k U^{pt}_{bk} V^{kr}_{l0}.
/// U maps (b, k) to (p, t) and V maps (l, a) to (k, r); both are (d chi) x (d chi).
pub fn sgs_tensor(u: &Mat, v: &Mat, d: usize, chi: usize) -> Result<PepsTensor> {
    let n = d * chi;
    for (name, m) in [("U", u), ("V", v)] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Shape(format!("{name} must be {n}x{n}")));
        }
        let res = unitarity_residual(m);
        if res > 1e-12 {
            return Err(Error::ConditionFailed { what: format!("unitarity of {name}"), residual: res });
        }
    }
    Ok(PepsTensor::from_fn(d, chi, |p, l, b, r, t| {
        let mut s = ZERO;
        for k in 0..d {
            s += u[(p * chi + t, b * d + k)] * v[(k * chi + r, l * d)];
        }
        s
    }))
}

/// Charge labels of one block: twice the bond charges (l, b, r, t) as +1/-1, and Q in {-1, 0, 1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeKey {
    pub s2: [i8; 4],
    pub q: i8,
}

pub const ALLOWED_BLOCKS: [ChargeKey; 4] = [
    ChargeKey { s2: [1, 1, -1, -1], q: 1 },
    ChargeKey { s2: [-1, 1, 1, -1], q: 0 },
    ChargeKey { s2: [1, -1, -1, 1], q: 0 },
    ChargeKey { s2: [-1, -1, 1, 1], q: -1 },
];

#[derive(Clone, Debug)]
pub struct ChargeBlockSpec {
    pub inner_d: usize,
    pub inner_chi: usize,
    pub blocks: Vec<(ChargeKey, PepsTensor)>,
}

/// Bond index of (s, alpha): s = +1/2 is sector 0.
pub fn u1_bond_index(s2: i8, alpha: usize, inner_chi: usize) -> usize {
    (if s2 > 0 { 0 } else { 1 }) * inner_chi + alpha
}

/// Physical index of (Q, Gamma): Q = 1, 0, -1 map to sectors 0, 1, 2.
pub fn u1_phys_index(q: i8, gamma: usize, inner_d: usize) -> usize {
    (1 - q as i64) as usize * inner_d + gamma
}

pub fn u1_tensor(spec: &ChargeBlockSpec) -> Result<PepsTensor> {
    let (di, ci) = (spec.inner_d, spec.inner_chi);
    let mut t = PepsTensor::zeros(3 * di, 2 * ci);
    let mut used = Vec::new();
    for (key, y) in &spec.blocks {
        // 2Q + s_r + s_t - s_l - s_b, in units of 1/2
        let charge = 4 * key.q as i32 + key.s2[2] as i32 + key.s2[3] as i32 - key.s2[0] as i32 - key.s2[1] as i32;
        if !ALLOWED_BLOCKS.contains(key) || charge != 0 {
            return Err(Error::InvalidParameter(format!("block {key:?} is not in the allowed pattern")));
        }
        if used.contains(key) {
            return Err(Error::InvalidParameter(format!("block {key:?} populated twice")));
        }
        used.push(*key);
        if y.d() != di || y.chi() != ci {
            return Err(Error::Shape(format!("inner tensor of block {key:?} has wrong dimensions")));
        }
        for g in 0..di {
            for a in 0..ci {
                for b in 0..ci {
                    for r in 0..ci {
                        for tt in 0..ci {
                            t.set(
                                u1_phys_index(key.q, g, di),
                                u1_bond_index(key.s2[0], a, ci),
                                u1_bond_index(key.s2[1], b, ci),
                                u1_bond_index(key.s2[2], r, ci),
                                u1_bond_index(key.s2[3], tt, ci),
                                y.get(g, a, b, r, tt),
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(t)
}

/// The spin-1 example: chi = 4, d = 3, every block built from a dual-unitary gate.
pub fn u1_spin1(gates: &[Mat; 4]) -> Result<PepsTensor> {
    let mut blocks = Vec::new();
    for (key, v) in ALLOWED_BLOCKS.iter().zip(gates) {
        blocks.push((*key, controlled_dual_unitary(std::slice::from_ref(v), None)?));
    }
    u1_tensor(&ChargeBlockSpec { inner_d: 1, inner_chi: 2, blocks })
}

/// Embed `t` in the Q = +1 block (x + y even) or the Q = -1 block (odd); other blocks use `filler`.
pub fn u1_checkerboard(t: &PepsTensor, even: bool, filler: &PepsTensor) -> Result<PepsTensor> {
    let blocks = ALLOWED_BLOCKS
        .iter()
        .map(|k| {
            let target = if even { 1 } else { -1 };
            (*k, if k.q == target { t.clone() } else { filler.clone() })
        })
        .collect();
    u1_tensor(&ChargeBlockSpec { inner_d: t.d(), inner_chi: t.chi(), blocks })
}

/// Phase picked up by entry (p, l, b, r, t) of a U(1) tensor under the symmetry action at angle theta.
pub fn u1_symmetry_phase(p: usize, l: usize, b: usize, r: usize, t: usize, inner_d: usize, inner_chi: usize, theta: f64) -> C64 {
    let q = 1 - (p / inner_d) as i32;
    let s2 = |x: usize| if x / inner_chi == 0 { 1 } else { -1 };
    let net = 4 * q - (s2(l) + s2(b) - s2(r) - s2(t));
    C64::from_polar(1.0, theta * net as f64 / 4.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Left,
    Right,
    Top,
    Bottom,
    CornerBl,
    CornerBr,
    CornerTl,
    CornerTr,
}

impl BoundaryKind {
    /// Virtual legs present, as PEPS leg numbers 1..=4 (l, b, r, t), in that order.
    pub fn legs(self) -> &'static [usize] {
        match self {
            BoundaryKind::Left => &[2, 3, 4],
            BoundaryKind::Right => &[1, 2, 4],
            BoundaryKind::Bottom => &[1, 3, 4],
            BoundaryKind::Top => &[1, 2, 3],
            BoundaryKind::CornerBl => &[3, 4],
            BoundaryKind::CornerBr => &[1, 4],
            BoundaryKind::CornerTl => &[2, 3],
            BoundaryKind::CornerTr => &[1, 2],
        }
    }

    pub fn is_corner(self) -> bool {
        self.legs().len() == 2
    }

    /// The leg pointing into the bulk, for edges.
    pub fn bulk_leg(self) -> Option<usize> {
        match self {
            BoundaryKind::Left => Some(3),
            BoundaryKind::Right => Some(1),
            BoundaryKind::Bottom => Some(4),
            BoundaryKind::Top => Some(2),
            _ => None,
        }
    }
}

/// Boundary tensor, legs (p, virtual legs in l, b, r, t order).
#[derive(Clone, Debug)]
pub struct BoundaryTensor {
    pub kind: BoundaryKind,
    pub entries: DenseTensor,
}

impl BoundaryTensor {
    pub fn phys_dim(&self) -> usize {
        self.entries.shape()[0]
    }
}

/// Delta boundaries. Edges copy the bulk-facing leg to the physical one and pass a wire between
/// the other two; corners copy both wires. Left, bottom edges and corners carry chi^(-1/2).
pub fn boundary_default(chi: usize, kind: BoundaryKind) -> BoundaryTensor {
    let w = 1.0 / (chi as f64).sqrt();
    let entries = match kind {
        BoundaryKind::Left | BoundaryKind::Bottom | BoundaryKind::Right | BoundaryKind::Top => {
            let weight = if matches!(kind, BoundaryKind::Left | BoundaryKind::Bottom) { w } else { 1.0 };
            let bulk = kind.bulk_leg().unwrap();
            let pos = kind.legs().iter().position(|&x| x == bulk).unwrap();
            DenseTensor::from_fn(vec![chi; 4], |i| {
                let v = &i[1..];
                let wire: Vec<usize> = (0..3).filter(|&k| k != pos).map(|k| v[k]).collect();
                if i[0] == v[pos] && wire[0] == wire[1] {
                    c(weight, 0.0)
                } else {
                    ZERO
                }
            })
        }
        _ => DenseTensor::from_fn(vec![chi * chi, chi, chi], |i| {
            if i[0] == i[1] * chi + i[2] {
                c(w, 0.0)
            } else {
                ZERO
            }
        }),
    };
    BoundaryTensor { kind, entries }
}

/// Solvable-boundary residual: after tracing the physical leg, the bulk-facing doubled leg of an
/// edge must be the identity cap times a tensor on the wire legs.
pub fn check_boundary(bt: &BoundaryTensor) -> f64 {
    let Some(bulk) = bt.kind.bulk_leg() else {
        return 0.0;
    };
    let e = &bt.entries;
    let chi = e.shape()[1];
    let pos = bt.kind.legs().iter().position(|&x| x == bulk).unwrap();
    let others: Vec<usize> = (0..3).filter(|&k| k != pos).collect();
    // M[(v1, v2), (w1, w2, w1', w2')] = sum_p L*[p, ..] L[p, ..]
    let n_w = chi * chi;
    let mut m = vec![ZERO; chi * chi * n_w * n_w];
    let d = e.shape()[0];
    let idx = |p: usize, v: usize, w: usize| {
        let mut full = [0usize; 3];
        full[pos] = v;
        full[others[0]] = w / chi;
        full[others[1]] = w % chi;
        e.get(&[p, full[0], full[1], full[2]])
    };
    for p in 0..d {
        for v1 in 0..chi {
            for v2 in 0..chi {
                for w1 in 0..n_w {
                    for w2 in 0..n_w {
                        m[((v1 * chi + v2) * n_w + w1) * n_w + w2] += idx(p, v1, w1).conj() * idx(p, v2, w2);
                    }
                }
            }
        }
    }
    let mut res = 0.0;
    for v1 in 0..chi {
        for v2 in 0..chi {
            for w in 0..n_w * n_w {
                let mut avg = ZERO;
                for k in 0..chi {
                    avg += m[(k * chi + k) * n_w * n_w + w];
                }
                let want = if v1 == v2 { avg / chi as f64 } else { ZERO };
                res += (m[(v1 * chi + v2) * n_w * n_w + w] - want).norm_sqr();
            }
        }
    }
    res.sqrt()
}

/// Bell states |phi^1..4> on two qubits, as length-4 vectors.
pub fn bell_states() -> [[f64; 4]; 4] {
    let h = FRAC_1_SQRT_2;
    [[h, 0.0, 0.0, h], [h, 0.0, 0.0, -h], [0.0, h, h, 0.0], [0.0, h, -h, 0.0]]
}

#[derive(Clone, Debug)]
pub struct ComplexityTensors {
    pub orange: PepsTensor,
    pub light_green: PepsTensor,
    pub dark_blue: PepsTensor,
    pub grey: PepsTensor,
}

pub const COMPLEXITY_D: usize = 16;

/// Identity embedding of (l, b) into the 16-dimensional physical space, p = 2 l + b.
pub fn identity_embedding() -> Mat {
    Mat::from_fn(COMPLEXITY_D, 4, |p, lb| if p == lb { ONE } else { ZERO })
}

pub fn orange_tensor(v: &Mat) -> Result<PepsTensor> {
    let g = Gate::two_leg(2, v.clone())?;
    let rep = check_dual_unitary(&g, 1e-10);
    if !rep.pass {
        return Err(Error::ConditionFailed {
            what: "dual-unitarity of the orange gate".into(),
            residual: rep.residual_iso.max(rep.residual_dual),
        });
    }
    Ok(PepsTensor::from_fn(COMPLEXITY_D, 2, |p, l, b, r, t| if p == 0 { v[(t * 2 + r, l * 2 + b)] } else { ZERO }))
}

/// Light-green: (1/chi) <lt|phi^{p1}> <rb|phi^{p2}>, p = 4 p1 + p2.
pub fn light_green_tensor() -> PepsTensor {
    let bell = bell_states();
    PepsTensor::from_fn(COMPLEXITY_D, 2, |p, l, b, r, t| {
        c(0.5 * bell[p / 4][l * 2 + t] * bell[p % 4][r * 2 + b], 0.0)
    })
}

pub fn dark_blue_tensor(u_iso: &Mat) -> Result<PepsTensor> {
    if u_iso.nrows() != COMPLEXITY_D || u_iso.ncols() != 4 {
        return Err(Error::Shape("dark-blue isometry must be 16x4".into()));
    }
    let res = unitarity_residual(u_iso);
    if res > 1e-10 {
        return Err(Error::ConditionFailed { what: "isometry of U".into(), residual: res });
    }
    let phi1 = bell_states()[0];
    Ok(PepsTensor::from_fn(COMPLEXITY_D, 2, |p, l, b, r, t| u_iso[(p, l * 2 + b)] * phi1[r * 2 + t]))
}

pub fn grey_tensor() -> PepsTensor {
    PepsTensor::from_fn(COMPLEXITY_D, 2, |p, l, b, r, t| if p == 0 && l == r && b == t { ONE } else { ZERO })
}

pub fn complexity_tensors(v: &Mat, u_iso: Option<&Mat>) -> Result<ComplexityTensors> {
    let emb = identity_embedding();
    Ok(ComplexityTensors {
        orange: orange_tensor(v)?,
        light_green: light_green_tensor(),
        dark_blue: dark_blue_tensor(u_iso.unwrap_or(&emb))?,
        grey: grey_tensor(),
    })
}

/// Qubit dual-unitary gate e^{i phi} (u+ (x) u-) exp(-i(pi/4 XX + pi/4 YY + J ZZ)) (v- (x) v+).
pub fn dual_unitary_from_params(phase: f64, j: f64, u_plus: &Mat, u_minus: &Mat, v_minus: &Mat, v_plus: &Mat) -> Mat {
    let core = expi(&pauli_pair(1), -FRAC_PI_4) * expi(&pauli_pair(2), -FRAC_PI_4) * expi(&pauli_pair(3), -j);
    kron(u_plus, u_minus) * core * kron(v_minus, v_plus) * C64::from_polar(1.0, phase)
}

pub fn random_dual_unitary<R: Rng>(rng: &mut R) -> Mat {
    let phase = rng.random::<f64>() * std::f64::consts::TAU;
    let j = rng.random::<f64>() * std::f64::consts::PI;
    let us: Vec<Mat> = (0..4).map(|_| haar_unitary(2, rng)).collect();
    dual_unitary_from_params(phase, j, &us[0], &us[1], &us[2], &us[3])
}

/// Random controlled-dual-unitary DI tensor; deterministic in the seed.
pub fn random_di(d: usize, chi: usize, seed: u64) -> Result<PepsTensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_di_with(d, chi, &mut rng)
}

pub fn random_di_with<R: Rng>(d: usize, chi: usize, rng: &mut R) -> Result<PepsTensor> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    match chi {
        1 => {
            let u = haar_unitary(d, rng);
            Ok(PepsTensor::from_fn(d, 1, |p, _, _, _, _| u[(p, 0)]))
        }
        2 => {
            let vs: Vec<Mat> = (0..d).map(|_| random_dual_unitary(rng)).collect();
            let singles = Singles::haar(d, 2, rng);
            controlled_dual_unitary(&vs, Some(&singles))
        }
        _ => Err(Error::InvalidParameter(format!("random_di supports chi = 1 or 2, got {chi}"))),
    }
}
