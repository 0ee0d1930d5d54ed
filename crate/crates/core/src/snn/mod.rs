//! Synthetic nearest neighbors.
//!
//! For a target `(i, j)` the estimator regresses row `i` on a block of anchor
//! rows over the anchor columns (principal component regression), then applies
//! the fitted weights to the anchor rows' values in column `j`. Anchor rows
//! are split into `K` folds whose estimates are averaged.

mod ci;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use ci::{confidence_interval, normal_quantile, Interval};

use crate::anchors::{anchor_submatrix, partition_rows, AnchorPlan};
use crate::error::{Error, Result};
use crate::matrix::{CellStatus, MaskedMatrix};
use crate::spectral::{pcr_transposed_with, pcr_with, select_rank, svd, RankPolicy, SvdFactorization};

/// Number of anchor row folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KFolds {
    Fixed(usize),
    /// `⌊min side / max(2·rank, 4)⌋`, clamped to `1..=10`, then lowered until
    /// every fold has at least `min_anchor_rows` rows.
    Auto,
}

/// How the per-cell noise variance is estimated for intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    /// One variance from the fold regressions' residuals.
    #[default]
    Homoskedastic,
    /// Per-row variances; not available.
    PerRowPlugin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnnConfig {
    pub rank_policy: RankPolicy,
    pub k_folds: KFolds,
    pub min_anchor_rows: usize,
    pub ci_level: f64,
    pub noise_model: NoiseModel,
    /// Seeds the per-cell fold shuffles.
    pub seed: u64,
}

impl Default for SnnConfig {
    fn default() -> Self {
        Self {
            rank_policy: RankPolicy::default(),
            k_folds: KFolds::Fixed(1),
            min_anchor_rows: 1,
            ci_level: 0.95,
            noise_model: NoiseModel::Homoskedastic,
            seed: 0,
        }
    }
}

impl SnnConfig {
    pub fn validate(&self) -> Result<()> {
        self.rank_policy.validate()?;
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::param("ci_level", format!("must lie in (0, 1), got {}", self.ci_level)));
        }
        if self.min_anchor_rows == 0 {
            return Err(Error::param("min_anchor_rows", "must be at least 1"));
        }
        if self.k_folds == KFolds::Fixed(0) {
            return Err(Error::param("k_folds", "must be at least 1"));
        }
        Ok(())
    }
}

/// A point estimate with its fold decomposition and interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SnnEstimate {
    pub value: f64,
    pub fold_values: Vec<f64>,
    /// Regression weights over each fold's anchor rows.
    pub fold_betas: Vec<DVector<f64>>,
    pub fold_ranks: Vec<usize>,
    /// Estimated variance of `value`; `None` when no residual degrees of
    /// freedom remain.
    pub variance: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub plan: AnchorPlan,
}

/// Per-fold regression inputs and fit.
pub(crate) struct FoldFit {
    pub fact: SvdFactorization,
    pub rank: usize,
    /// Row `i` over the anchor columns.
    pub q: DVector<f64>,
    /// Column `j` over the fold's anchor rows.
    pub x: DVector<f64>,
    /// Anchor block `AR^(k) × AC`.
    pub s: DMatrix<f64>,
}

pub(crate) fn fold_fits(data: &MaskedMatrix, plan: &AnchorPlan, cfg: &SnnConfig) -> Result<Vec<FoldFit>> {
    plan.validate(data.mask())?;
    let (i, j) = plan.target;
    let v = |a: usize, b: usize| data.get(a, b);
    let q = DVector::from_iterator(
        plan.anchor_cols.len(),
        plan.anchor_cols.iter().map(|&b| v(i, b)).collect::<Result<Vec<_>>>()?,
    );
    let mut fits = Vec::with_capacity(plan.k());
    for (k, fold) in plan.anchor_row_folds.iter().enumerate() {
        if fold.len() < cfg.min_anchor_rows {
            return Err(Error::PlanViolation(format!(
                "fold {k} has {} rows, fewer than the minimum {}",
                fold.len(),
                cfg.min_anchor_rows
            )));
        }
        let s = DMatrix::from_fn(fold.len(), plan.anchor_cols.len(), |r, c| {
            data.get(fold[r], plan.anchor_cols[c]).expect("validated anchor block")
        });
        let x = DVector::from_fn(fold.len(), |r, _| data.get(fold[r], j).expect("validated anchor row"));
        let fact = svd(&s)?;
        let rank = select_rank(&fact, cfg.rank_policy, s.shape(), None)?;
        fits.push(FoldFit {
            fact,
            rank,
            q: q.clone(),
            x,
            s,
        });
    }
    Ok(fits)
}

/// Estimates `A[i, j]` from the anchors in `plan`.
pub fn snn_entry(data: &MaskedMatrix, i: usize, j: usize, plan: &AnchorPlan, cfg: &SnnConfig) -> Result<SnnEstimate> {
    check_target(plan, i, j)?;
    let fits = fold_fits(data, plan, cfg)?;
    let mut fold_values = Vec::with_capacity(fits.len());
    let mut fold_betas = Vec::with_capacity(fits.len());
    for fit in &fits {
        let beta = pcr_with(&fit.fact, &fit.q, fit.rank)?;
        fold_values.push(fit.x.dot(&beta));
        fold_betas.push(beta);
    }
    let value = fold_values.iter().sum::<f64>() / fold_values.len() as f64;
    let mut est = SnnEstimate {
        value,
        fold_values,
        fold_betas,
        fold_ranks: fits.iter().map(|f| f.rank).collect(),
        variance: None,
        ci: None,
        plan: plan.clone(),
    };
    let interval = ci::interval_from_fits(&est, &fits, cfg)?;
    est.variance = interval.variance;
    est.ci = interval.bounds;
    Ok(est)
}

/// The same estimate computed through the transposed regression of column
/// `j` on the anchor block's columns.
pub fn snn_entry_transposed(
    data: &MaskedMatrix,
    i: usize,
    j: usize,
    plan: &AnchorPlan,
    cfg: &SnnConfig,
) -> Result<SnnEstimate> {
    check_target(plan, i, j)?;
    let fits = fold_fits(data, plan, cfg)?;
    let mut fold_values = Vec::with_capacity(fits.len());
    let mut fold_betas = Vec::with_capacity(fits.len());
    for fit in &fits {
        let alpha = pcr_transposed_with(&fit.fact, &fit.x, fit.rank)?;
        fold_values.push(fit.q.dot(&alpha));
        fold_betas.push(pcr_with(&fit.fact, &fit.q, fit.rank)?);
    }
    let value = fold_values.iter().sum::<f64>() / fold_values.len() as f64;
    let mut est = SnnEstimate {
        value,
        fold_values,
        fold_betas,
        fold_ranks: fits.iter().map(|f| f.rank).collect(),
        variance: None,
        ci: None,
        plan: plan.clone(),
    };
    let interval = ci::interval_from_fits(&est, &fits, cfg)?;
    est.variance = interval.variance;
    est.ci = interval.bounds;
    Ok(est)
}

fn check_target(plan: &AnchorPlan, i: usize, j: usize) -> Result<()> {
    if plan.target != (i, j) {
        return Err(Error::PlanViolation(format!(
            "plan targets {:?}, asked for ({i}, {j})",
            plan.target
        )));
    }
    Ok(())
}

/// Which cells [`snn_complete`] estimates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Targets {
    AllMissing,
    Cells(Vec<(usize, usize)>),
}

/// Result for one target cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellEstimate {
    pub row: usize,
    pub col: usize,
    pub status: CellStatus,
    pub estimate: Option<SnnEstimate>,
}

/// A completed matrix. Cells without a value hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub values: DMatrix<f64>,
    pub status: DMatrix<CellStatus>,
    /// One entry per target, in row-major target order.
    pub cells: Vec<CellEstimate>,
}

impl Completion {
    /// Cells that received an estimate.
    pub fn estimated_mask(&self) -> DMatrix<bool> {
        self.status.map(|s| s == CellStatus::Estimated)
    }

    pub fn count(&self, status: CellStatus) -> usize {
        self.status.iter().filter(|&&s| s == status).count()
    }
}

/// Builds the anchor plan for one cell, choosing `K` per the config.
pub fn plan_for_cell(data: &MaskedMatrix, i: usize, j: usize, cfg: &SnnConfig) -> std::result::Result<AnchorPlan, CellStatus> {
    let (rows, cols) = anchor_submatrix(data.mask(), i, j).map_err(|_| CellStatus::NoAnchor)?;
    if rows.len() < cfg.min_anchor_rows {
        return Err(CellStatus::InsufficientAnchors);
    }
    let k = match cfg.k_folds {
        KFolds::Fixed(k) => {
            if k > rows.len() || rows.len() / k < cfg.min_anchor_rows {
                return Err(CellStatus::InsufficientAnchors);
            }
            k
        }
        KFolds::Auto => auto_k(data, &rows, &cols, cfg).ok_or(CellStatus::Degenerate)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(cfg.seed, i, j, data.ncols()));
    let folds = partition_rows(&rows, k, &mut rng).map_err(|_| CellStatus::InsufficientAnchors)?;
    Ok(AnchorPlan {
        target: (i, j),
        anchor_cols: cols,
        anchor_row_folds: folds,
    })
}

/// Seed for the cell at row-major index `i·n + j`.
pub fn cell_seed(seed: u64, i: usize, j: usize, ncols: usize) -> u64 {
    seed ^ (i * ncols + j) as u64
}

fn auto_k(data: &MaskedMatrix, rows: &[usize], cols: &[usize], cfg: &SnnConfig) -> Option<usize> {
    let block = DMatrix::from_fn(rows.len(), cols.len(), |r, c| data.get(rows[r], cols[c]).expect("anchor block"));
    let fact = svd(&block).ok()?;
    let rank = select_rank(&fact, cfg.rank_policy, block.shape(), None).ok()?;
    let min_side = rows.len().min(cols.len());
    let mut k = (min_side / (2 * rank).max(4)).clamp(1, 10);
    while k > 1 && rows.len() / k < cfg.min_anchor_rows {
        k -= 1;
    }
    Some(k)
}

/// Estimates every target cell in parallel and copies the other observed
/// cells through.
pub fn snn_complete(data: &MaskedMatrix, targets: &Targets, cfg: &SnnConfig) -> Result<Completion> {
    cfg.validate()?;
    if cfg.noise_model == NoiseModel::PerRowPlugin {
        return Err(Error::Unimplemented("per-row noise plug-in"));
    }
    let (m, n) = data.shape();
    let mut cells: Vec<(usize, usize)> = match targets {
        Targets::AllMissing => (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !data.is_observed(i, j))
            .collect(),
        Targets::Cells(list) => {
            for &(i, j) in list {
                if i >= m || j >= n {
                    return Err(Error::OutOfBounds { row: i, col: j, rows: m, cols: n });
                }
            }
            let mut list = list.clone();
            list.sort_unstable();
            list.dedup();
            list
        }
    };
    cells.shrink_to_fit();

    let results: Vec<CellEstimate> = cells
        .par_iter()
        .map(|&(i, j)| estimate_cell(data, i, j, cfg))
        .collect();

    let mut values = data.filled(f64::NAN);
    let mut status = data.mask().map(|o| if o { CellStatus::Observed } else { CellStatus::NoAnchor });
    for cell in &results {
        status[(cell.row, cell.col)] = cell.status;
        values[(cell.row, cell.col)] = cell.estimate.as_ref().map_or(f64::NAN, |e| e.value);
    }
    Ok(Completion {
        values,
        status,
        cells: results,
    })
}

fn estimate_cell(data: &MaskedMatrix, i: usize, j: usize, cfg: &SnnConfig) -> CellEstimate {
    let outcome = plan_for_cell(data, i, j, cfg).and_then(|plan| {
        snn_entry(data, i, j, &plan, cfg).map_err(|e| match e {
            Error::ZeroSpectrum => CellStatus::Degenerate,
            _ => CellStatus::InsufficientAnchors,
        })
    });
    match outcome {
        Ok(est) => CellEstimate {
            row: i,
            col: j,
            status: CellStatus::Estimated,
            estimate: Some(est),
        },
        Err(status) => CellEstimate {
            row: i,
            col: j,
            status,
            estimate: None,
        },
    }
}

#[cfg(test)]
mod tests;
