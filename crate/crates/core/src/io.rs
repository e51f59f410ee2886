//! JSON file formats for lattices, operators, gauges and constructor parameters.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::conditions::GaugeTriple;
use crate::contraction::Lattice;
use crate::error::{Error, Result};
use crate::linalg::{c, Mat};
use crate::tensors::{PepsTensor, TensorFile};

/// Dense matrix as rows of [re, im] pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile(pub Vec<Vec<[f64; 2]>>);

impl MatrixFile {
    pub fn from_mat(m: &Mat) -> Self {
        Self((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    pub fn to_mat(&self) -> Result<Mat> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, |r| r.len());
        if rows == 0 || self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("matrix rows are empty or ragged".into()));
        }
        Ok(Mat::from_fn(rows, cols, |i, j| c(self.0[i][j][0], self.0[i][j][1])))
    }
}

/// Bulk tensors row-major from the bottom row; a single tensor fills the whole lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeFile {
    pub n: usize,
    pub m: usize,
    pub tensors: Vec<TensorFile>,
}

impl LatticeFile {
    pub fn from_lattice(lat: &Lattice) -> Self {
        Self { n: lat.n(), m: lat.m(), tensors: lat.bulk_tensors().iter().map(|t| t.to_file()).collect() }
    }

    pub fn to_lattice(&self) -> Result<Lattice> {
        let ts = self.tensors.iter().map(PepsTensor::from_file).collect::<Result<Vec<_>>>()?;
        match ts.len() {
            1 => Lattice::uniform(self.n, self.m, &ts[0]),
            _ => Lattice::new(self.n, self.m, ts),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaugeFile {
    pub s: MatrixFile,
    pub r: MatrixFile,
    pub b: MatrixFile,
}

impl GaugeFile {
    pub fn to_triple(&self) -> Result<GaugeTriple> {
        Ok(GaugeTriple { s: self.s.to_mat()?, r: self.r.to_mat()?, b: self.b.to_mat()? })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_tensor(path: &Path) -> Result<PepsTensor> {
    PepsTensor::from_file(&read_json::<TensorFile>(path)?)
}

pub fn read_lattice(path: &Path) -> Result<Lattice> {
    read_json::<LatticeFile>(path)?.to_lattice()
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::random_di_lattice;

    #[test]
    fn lattice_round_trip() {
        let lat = random_di_lattice(2, 1, 2, 2, 3).unwrap();
        let text = to_json(&LatticeFile::from_lattice(&lat)).unwrap();
        let back: LatticeFile = serde_json::from_str(&text).unwrap();
        let back = back.to_lattice().unwrap();
        for (a, b) in lat.bulk_tensors().iter().zip(back.bulk_tensors()) {
            assert_eq!(a.max_abs_diff(b), 0.0);
        }
    }

    #[test]
    fn ragged_matrix_rejected() {
        let m = MatrixFile(vec![vec![[1.0, 0.0]], vec![]]);
        assert!(m.to_mat().is_err());
    }
}
