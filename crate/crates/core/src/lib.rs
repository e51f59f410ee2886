//! Dual-isometric PEPS: construction, condition checks and efficient contraction.

pub mod circuit;
pub mod conditions;
pub mod cli;
pub mod contraction;
pub mod error;
pub mod families;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod network;
pub mod parent_ham;
pub mod tensors;
pub mod transfer;

pub use error::{Error, Result};
pub use linalg::{Mat, C64};
pub use tensors::{DenseTensor, PepsTensor, Site};
