//! Reference completion methods: nearest neighbors, singular value
//! thresholding, and nuclear-norm regularized imputation.

mod knn;
mod soft_impute;
mod usvt;

use nalgebra::DMatrix;

pub use knn::{knn_impute, row_distances};
pub use soft_impute::{default_lambda, soft_impute, SoftImputeFit, LAMBDA_DIVISOR};
pub use usvt::usvt;

use crate::error::{Error, Result};
use crate::matrix::CellStatus;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub knn_k: usize,
    pub usvt_eta: f64,
    pub softimpute_lambda: f64,
    pub softimpute_max_iter: usize,
    pub softimpute_tol: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            knn_k: 5,
            usvt_eta: 0.5,
            softimpute_lambda: 1.0,
            softimpute_max_iter: 500,
            softimpute_tol: 1e-6,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.knn_k == 0 {
            return Err(Error::param("knn_k", "must be at least 1"));
        }
        if !(self.usvt_eta > 0.0 && self.usvt_eta <= 1.0) {
            return Err(Error::param("usvt_eta", format!("must lie in (0, 1], got {}", self.usvt_eta)));
        }
        if !(self.softimpute_lambda >= 0.0) {
            return Err(Error::param("softimpute_lambda", "must be nonnegative"));
        }
        if !(self.softimpute_tol > 0.0) {
            return Err(Error::param("softimpute_tol", "must be positive"));
        }
        Ok(())
    }
}

/// A completed matrix with per-cell statuses. Cells without a value hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutput {
    pub values: DMatrix<f64>,
    pub status: DMatrix<CellStatus>,
}

impl BaselineOutput {
    pub fn estimated_mask(&self) -> DMatrix<bool> {
        self.status.map(|s| s == CellStatus::Estimated)
    }
}
