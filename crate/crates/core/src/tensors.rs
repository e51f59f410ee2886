//! Dense complex tensors, the rank-5 PEPS tensor and the folded (doubled) picture.
//!
//! PEPS legs are always stored as (p, l, b, r, t). Doubled legs pair a bra copy
//! with a ket copy as `bra * chi + ket`, bra being the conjugated layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::Shape(format!("zero extent in {shape:?}")));
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {n} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self { shape, data: vec![ZERO; n] }
    }

    pub fn scalar(z: C64) -> Self {
        Self { shape: vec![], data: vec![z] }
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let n: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        let mut off = 0;
        for (i, (&k, &e)) in idx.iter().zip(&self.shape).enumerate() {
            debug_assert!(k < e, "index {k} out of range on axis {i}");
            off = off * e + k;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], z: C64) {
        let o = self.offset(idx);
        self.data[o] = z;
    }

    pub fn reshape(mut self, shape: Vec<usize>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(Error::Shape(format!("cannot reshape {:?} to {shape:?}", self.shape)));
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn conj(&self) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape, "shape mismatch in comparison");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// New tensor with axes reordered so that output axis k is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r || perm.iter().any(|&p| p >= r || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Shape(format!("invalid permutation {perm:?} for rank {r}")));
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let old = strides(&self.shape);
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let st: Vec<usize> = perm.iter().map(|&p| old[p]).collect();
        let n = self.data.len();
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; r];
        let mut off = 0usize;
        for _ in 0..n {
            data.push(self.data[off]);
            for ax in (0..r).rev() {
                idx[ax] += 1;
                off += st[ax];
                if idx[ax] < shape[ax] {
                    break;
                }
                off -= st[ax] * shape[ax];
                idx[ax] = 0;
            }
        }
        Ok(Self { shape, data })
    }

    /// Matrix view grouping the first `k` axes as rows.
    pub fn to_matrix(&self, k: usize) -> Mat {
        let rows: usize = self.shape[..k].iter().product();
        let cols: usize = self.shape[k..].iter().product();
        Mat::from_row_slice(rows, cols, &self.data)
    }

    pub fn from_matrix(m: &Mat, shape: Vec<usize>) -> Result<Self> {
        let data: Vec<C64> = m.transpose().as_slice().to_vec();
        Self::new(shape, data)
    }
}

/// Tensor contraction over the listed axis pairs. Free axes of `a` come first, then free axes of `b`.
pub fn contract(a: &DenseTensor, b: &DenseTensor, pairs: &[(usize, usize)]) -> Result<DenseTensor> {
    let mut used_a = vec![false; a.rank()];
    let mut used_b = vec![false; b.rank()];
    for &(i, j) in pairs {
        if i >= a.rank() || j >= b.rank() {
            return Err(Error::Shape(format!("axis pair ({i}, {j}) out of range")));
        }
        if std::mem::replace(&mut used_a[i], true) || std::mem::replace(&mut used_b[j], true) {
            return Err(Error::Shape(format!("repeated axis in pair ({i}, {j})")));
        }
        if a.shape[i] != b.shape[j] {
            return Err(Error::Shape(format!(
                "extent mismatch {} vs {} on pair ({i}, {j})",
                a.shape[i], b.shape[j]
            )));
        }
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&i| !used_a[i]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&j| !used_b[j]).collect();
    let perm_a: Vec<usize> = free_a.iter().cloned().chain(pairs.iter().map(|p| p.0)).collect();
    let perm_b: Vec<usize> = pairs.iter().map(|p| p.1).chain(free_b.iter().cloned()).collect();
    let ap = a.permute(&perm_a)?;
    let bp = b.permute(&perm_b)?;
    let m: usize = free_a.iter().map(|&i| a.shape[i]).product();
    let k: usize = pairs.iter().map(|p| a.shape[p.0]).product();
    let n: usize = free_b.iter().map(|&j| b.shape[j]).product();
    let mut out = vec![ZERO; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for kk in 0..k {
            let aik = ap.data[i * k + kk];
            if aik == ZERO {
                continue;
            }
            let brow = &bp.data[kk * n..(kk + 1) * n];
            for (o, bv) in row.iter_mut().zip(brow) {
                *o += aik * bv;
            }
        }
    }
    let shape: Vec<usize> = free_a
        .iter()
        .map(|&i| a.shape[i])
        .chain(free_b.iter().map(|&j| b.shape[j]))
        .collect();
    Ok(DenseTensor { shape, data: out })
}

/// Outer product; axes of `a` then axes of `b`.
pub fn outer(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    contract(a, b, &[]).expect("outer product has no pairs to mismatch")
}

#[derive(Clone, Debug, PartialEq)]
pub struct PepsTensor {
    d: usize,
    chi: usize,
    entries: DenseTensor,
}

impl PepsTensor {
    pub fn new(d: usize, chi: usize, entries: DenseTensor) -> Result<Self> {
        if d == 0 || chi == 0 {
            return Err(Error::Shape("d and chi must be positive".into()));
        }
        if entries.shape() != [d, chi, chi, chi, chi] {
            return Err(Error::Shape(format!(
                "PEPS tensor shape {:?} does not match (d={d}, chi={chi})",
                entries.shape()
            )));
        }
        Ok(Self { d, chi, entries })
    }

    pub fn from_fn(d: usize, chi: usize, mut f: impl FnMut(usize, usize, usize, usize, usize) -> C64) -> Self {
        let entries =
            DenseTensor::from_fn(vec![d, chi, chi, chi, chi], |i| f(i[0], i[1], i[2], i[3], i[4]));
        Self { d, chi, entries }
    }

    pub fn zeros(d: usize, chi: usize) -> Self {
        Self { d, chi, entries: DenseTensor::zeros(vec![d, chi, chi, chi, chi]) }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn entries(&self) -> &DenseTensor {
        &self.entries
    }

    pub fn get(&self, p: usize, l: usize, b: usize, r: usize, t: usize) -> C64 {
        let c = self.chi;
        self.entries.data[(((p * c + l) * c + b) * c + r) * c + t]
    }

    pub fn set(&mut self, p: usize, l: usize, b: usize, r: usize, t: usize, z: C64) {
        let c = self.chi;
        self.entries.data[(((p * c + l) * c + b) * c + r) * c + t] = z;
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries.max_abs_diff(&other.entries)
    }

    /// Apply a matrix to one leg: new[.., i, ..] = sum_j m[i, j] old[.., j, ..].
    /// Leg 0 is physical, 1..=4 are l, b, r, t.
    pub fn apply_leg(&self, leg: usize, m: &Mat) -> Result<Self> {
        let ext = self.entries.shape[leg];
        if m.ncols() != ext {
            return Err(Error::Shape(format!("matrix with {} columns on leg of extent {ext}", m.ncols())));
        }
        let mt = DenseTensor::from_matrix(m, vec![m.nrows(), m.ncols()])?;
        let moved = contract(&mt, &self.entries, &[(1, leg)])?;
        let mut perm: Vec<usize> = (1..5).collect();
        perm.insert(leg, 0);
        let entries = moved.permute(&perm)?;
        let d = entries.shape[0];
        Self::new(d, self.chi, entries)
    }

    /// Unitary or gauge matrices on all legs at once; `None` leaves a leg untouched.
    pub fn apply_legs(&self, mats: [Option<&Mat>; 5]) -> Result<Self> {
        let mut t = self.clone();
        for (leg, m) in mats.iter().enumerate() {
            if let Some(m) = m {
                t = t.apply_leg(leg, m)?;
            }
        }
        Ok(t)
    }

    /// Matrix with rows (p, r, t) and columns (l, b): the tensor read as an isometry from l, b.
    pub fn as_lb_map(&self) -> Mat {
        let c = self.chi;
        Mat::from_fn(self.d * c * c, c * c, |row, col| {
            let (p, rt) = (row / (c * c), row % (c * c));
            self.get(p, col / c, col % c, rt / c, rt % c)
        })
    }

    pub fn to_file(&self) -> TensorFile {
        TensorFile {
            d: self.d,
            chi: self.chi,
            data: self.entries.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_file(f: &TensorFile) -> Result<Self> {
        let entries = DenseTensor::new(
            vec![f.d, f.chi, f.chi, f.chi, f.chi],
            f.data.iter().map(|p| C64::new(p[0], p[1])).collect(),
        )?;
        Self::new(f.d, f.chi, entries)
    }
}

/// On-disk tensor: row-major (p, l, b, r, t) entries as [re, im] pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub d: usize,
    pub chi: usize,
    pub data: Vec<[f64; 2]>,
}

/// T* (x) T with the physical index traced, doubled legs (l, b, r, t).
#[derive(Clone, Debug)]
pub struct FoldedTensor {
    chi: usize,
    entries: DenseTensor,
}

impl FoldedTensor {
    pub fn entries(&self) -> &DenseTensor {
        &self.entries
    }

    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn into_entries(self) -> DenseTensor {
        self.entries
    }

    /// The tensor with bra and ket swapped on every doubled leg, conjugated.
    pub fn bra_ket_swapped(&self) -> DenseTensor {
        let c = self.chi;
        let sw = |x: usize| (x % c) * c + x / c;
        let e = &self.entries;
        DenseTensor::from_fn(e.shape.clone(), |i| e.get(&[sw(i[0]), sw(i[1]), sw(i[2]), sw(i[3])]).conj())
    }
}

/// Doubled tensor with operator `op` (d x d) sandwiched on the physical leg:
/// sum_{p,q} conj(T^p) op[p, q] T^q.
pub fn fold_with(t: &PepsTensor, op: Option<&Mat>) -> DenseTensor {
    let c = t.chi;
    let c4 = c * c * c * c;
    let ket = t.entries.to_matrix(1); // d x chi^4
    let ket = match op {
        Some(o) => o * ket,
        None => ket,
    };
    let bra = t.entries.to_matrix(1);
    // F[(l b r t)_bra, (l b r t)_ket] = sum_p conj(bra[p, .]) ket[p, .]
    let f = bra.adjoint() * ket;
    let c2 = c * c;
    DenseTensor::from_fn(vec![c2, c2, c2, c2], |i| {
        let mut a = 0;
        let mut b = 0;
        for &x in i.iter() {
            a = a * c + x / c;
            b = b * c + x % c;
        }
        debug_assert!(a < c4 && b < c4);
        f[(a, b)]
    })
}

pub fn fold(t: &PepsTensor) -> FoldedTensor {
    FoldedTensor { chi: t.chi, entries: fold_with(t, None) }
}

pub type Site = (usize, usize);

/// Vectorized operator: entries[i * D + j] = O[i, j], i the bra index.
#[derive(Clone, Debug)]
pub struct ObservableVec {
    pub support: Vec<Site>,
    pub dims: Vec<usize>,
    pub entries: Vec<C64>,
}

impl ObservableVec {
    pub fn matrix(&self) -> Mat {
        let n: usize = self.dims.iter().product();
        Mat::from_row_slice(n, n, &self.entries)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Vectorize a dense operator on the given sites; `dims` are the local dimensions.
pub fn vectorize(o: &Mat, support: &[Site], dims: &[usize]) -> Result<ObservableVec> {
    if o.nrows() != o.ncols() {
        return Err(Error::Shape(format!("operator is {}x{}, not square", o.nrows(), o.ncols())));
    }
    if support.len() != dims.len() {
        return Err(Error::Shape("support and dims differ in length".into()));
    }
    let n: usize = dims.iter().product();
    if o.nrows() != n {
        return Err(Error::Shape(format!("operator side {} but support dimension {n}", o.nrows())));
    }
    let entries = o.transpose().as_slice().to_vec();
    Ok(ObservableVec { support: support.to_vec(), dims: dims.to_vec(), entries })
}

/// <O|(psi* (x) psi): the pairing that equals <psi|O|psi>.
pub fn pair_with_state(o: &ObservableVec, psi: &[C64]) -> Result<C64> {
    let n = o.total_dim();
    if psi.len() != n {
        return Err(Error::Shape(format!("state of length {} for operator dimension {n}", psi.len())));
    }
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += o.entries[i * n + j] * psi[i].conj() * psi[j];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, eye, gaussian_matrix, pauli, random_unit_vector, ONE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(shape: Vec<usize>, rng: &mut ChaCha8Rng) -> DenseTensor {
        let n = shape.iter().product();
        let g = gaussian_matrix(n, 1, rng);
        DenseTensor::new(shape, g.iter().cloned().collect()).unwrap()
    }

    #[test]
    fn identity_contracts_to_same_vector() {
        let id = DenseTensor::from_matrix(&eye(2), vec![2, 2]).unwrap();
        let v = DenseTensor::new(vec![2], vec![c(1.0, 2.0), c(-0.5, 0.0)]).unwrap();
        let out = contract(&id, &v, &[(1, 0)]).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn full_contraction_is_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_tensor(vec![3], &mut rng);
        let v = random_tensor(vec![3], &mut rng);
        let out = contract(&u, &v, &[(0, 0)]).unwrap();
        let mut want = ZERO;
        for i in 0..3 {
            want += u.data()[i] * v.data()[i];
        }
        assert_eq!(out.shape(), &[] as &[usize]);
        assert!((out.data()[0] - want).norm() < 1e-14);
    }

    #[test]
    fn matrix_product_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_tensor(vec![2, 3], &mut rng);
        let b = random_tensor(vec![3, 4], &mut rng);
        let out = contract(&a, &b, &[(1, 0)]).unwrap();
        for i in 0..2 {
            for k in 0..4 {
                let mut s = ZERO;
                for j in 0..3 {
                    s += a.get(&[i, j]) * b.get(&[j, k]);
                }
                assert!((out.get(&[i, k]) - s).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn contract_rejects_bad_pairs() {
        let a = DenseTensor::zeros(vec![2, 3]);
        let b = DenseTensor::zeros(vec![3, 2]);
        assert!(contract(&a, &b, &[(0, 0)]).is_err());
        assert!(contract(&a, &b, &[(1, 0), (1, 1)]).is_err());
    }

    #[test]
    fn permute_moves_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_tensor(vec![2, 3, 4], &mut rng);
        let p = a.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.shape(), &[4, 2, 3]);
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..4 {
                    assert_eq!(p.get(&[k, i, j]), a.get(&[i, j, k]));
                }
            }
        }
    }

    #[test]
    fn scalar_fold() {
        let t = PepsTensor::from_fn(1, 1, |_, _, _, _, _| ONE);
        let f = fold(&t);
        assert_eq!(f.entries().data(), &[ONE]);
    }

    #[test]
    fn fold_matches_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let e = random_tensor(vec![3, 2, 2, 2, 2], &mut rng);
        let t = PepsTensor::new(3, 2, e).unwrap();
        let f = fold(&t);
        for l in 0..4 {
            for b in 0..4 {
                for r in 0..4 {
                    for tt in 0..4 {
                        let mut s = ZERO;
                        for p in 0..3 {
                            s += t.get(p, l / 2, b / 2, r / 2, tt / 2).conj() * t.get(p, l % 2, b % 2, r % 2, tt % 2);
                        }
                        assert!((f.entries().get(&[l, b, r, tt]) - s).norm() < 1e-13);
                    }
                }
            }
        }
        assert!(f.entries().max_abs_diff(&f.bra_ket_swapped()) < 1e-13);
    }

    #[test]
    fn vectorize_paulis() {
        let id = vectorize(&eye(2), &[(1, 1)], &[2]).unwrap();
        assert_eq!(id.entries, vec![ONE, ZERO, ZERO, ONE]);
        let z = vectorize(&pauli(3), &[(1, 1)], &[2]).unwrap();
        assert_eq!(z.entries, vec![ONE, ZERO, ZERO, -ONE]);
        assert!(vectorize(&Mat::zeros(2, 3), &[(1, 1)], &[2]).is_err());
    }

    #[test]
    fn vectorized_pairing_is_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let o = gaussian_matrix(4, 4, &mut rng);
            let psi = random_unit_vector(4, &mut rng);
            let ov = vectorize(&o, &[(1, 1), (2, 1)], &[2, 2]).unwrap();
            let v = nalgebra::DVector::from_vec(psi.clone());
            let direct = (v.adjoint() * &o * &v)[(0, 0)];
            assert!((pair_with_state(&ov, &psi).unwrap() - direct).norm() < 1e-12);
        }
    }
}
