//! Masked matrices and the metrics computed on them.
//!
//! A [`MaskedMatrix`] pairs a dense value matrix with a boolean observation
//! mask. Unobserved cells hold a NaN sentinel that no accessor ever returns.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Observed values plus the observation mask (`true` means observed).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedMatrix {
    values: DMatrix<f64>,
    mask: DMatrix<bool>,
}

impl MaskedMatrix {
    /// Builds a masked matrix. Values under `mask == false` are discarded.
    pub fn new(values: DMatrix<f64>, mask: DMatrix<bool>) -> Result<Self> {
        if values.shape() != mask.shape() {
            return Err(Error::ShapeMismatch {
                expected: values.shape(),
                actual: mask.shape(),
            });
        }
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::param("values", "matrix must be at least 1x1"));
        }
        let mut values = values;
        for (v, &seen) in values.iter_mut().zip(mask.iter()) {
            if !seen {
                *v = f64::NAN;
            } else if !v.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { values, mask })
    }

    /// A matrix with every cell observed.
    pub fn fully_observed(values: DMatrix<f64>) -> Result<Self> {
        let mask = DMatrix::from_element(values.nrows(), values.ncols(), true);
        Self::new(values, mask)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn mask(&self) -> &DMatrix<bool> {
        &self.mask
    }

    /// Reads an observed cell.
    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        self.check_bounds(i, j)?;
        if !self.mask[(i, j)] {
            return Err(Error::CellUnobserved { row: i, col: j });
        }
        Ok(self.values[(i, j)])
    }

    /// Whether `(i, j)` is observed. Panics when out of bounds.
    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.mask[(i, j)]
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn observed_fraction(&self) -> f64 {
        self.observed_count() as f64 / (self.nrows() * self.ncols()) as f64
    }

    /// Observed cells as `(row, col, value)` in column-major order.
    pub fn observed(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let rows = self.nrows();
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| (k % rows, k / rows, self.values[k]))
    }

    /// Dense copy with unobserved cells set to `fill`.
    pub fn filled(&self, fill: f64) -> DMatrix<f64> {
        let mut out = self.values.clone();
        for (v, &seen) in out.iter_mut().zip(self.mask.iter()) {
            if !seen {
                *v = fill;
            }
        }
        out
    }

    /// Minimum and maximum over observed cells, `None` when nothing is observed.
    pub fn observed_range(&self) -> Option<(f64, f64)> {
        self.observed().fold(None, |acc, (_, _, v)| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// The same values under a stricter mask (`self.mask && keep`).
    pub fn restrict(&self, keep: &DMatrix<bool>) -> Result<Self> {
        if keep.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                actual: keep.shape(),
            });
        }
        let mask = self.mask.zip_map(keep, |a, b| a && b);
        Self::new(self.values.clone(), mask)
    }

    pub fn transpose(&self) -> Self {
        Self {
            values: self.values.transpose(),
            mask: self.mask.transpose(),
        }
    }

    fn check_bounds(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.nrows() || j >= self.ncols() {
            return Err(Error::OutOfBounds {
                row: i,
                col: j,
                rows: self.nrows(),
                cols: self.ncols(),
            });
        }
        Ok(())
    }
}

/// Outcome of estimating one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellStatus {
    /// Copied through from the input.
    Observed,
    Estimated,
    /// No anchor rows and columns exist for the cell.
    NoAnchor,
    /// Anchors exist but are fewer than the configured minimum.
    InsufficientAnchors,
    /// Every anchor fold had an all-zero spectrum.
    Degenerate,
    /// No neighbor row shares support with the target row.
    NoNeighbors,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Observed => "observed",
            CellStatus::Estimated => "estimated",
            CellStatus::NoAnchor => "no_anchor",
            CellStatus::InsufficientAnchors => "insufficient_anchors",
            CellStatus::Degenerate => "degenerate",
            CellStatus::NoNeighbors => "no_neighbors",
        }
    }

    /// Whether the cell carries a value.
    pub fn has_value(self) -> bool {
        matches!(self, CellStatus::Observed | CellStatus::Estimated)
    }
}

impl std::fmt::Display for CellStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// RMSE and MAE over a set of evaluated cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub rmse: f64,
    pub mae: f64,
    pub count: usize,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "rmse,mae,count";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{}",
            crate::io::fmt_f64(self.rmse),
            crate::io::fmt_f64(self.mae),
            self.count
        )
    }
}

/// RMSE/MAE of `pred` against `truth` over the cells where `eval_mask` is set.
pub fn evaluate(
    pred: &DMatrix<f64>,
    truth: &DMatrix<f64>,
    eval_mask: &DMatrix<bool>,
) -> Result<EvalReport> {
    for other in [truth.shape(), eval_mask.shape()] {
        if other != pred.shape() {
            return Err(Error::ShapeMismatch {
                expected: pred.shape(),
                actual: other,
            });
        }
    }
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut count = 0usize;
    for ((p, t), &m) in pred.iter().zip(truth.iter()).zip(eval_mask.iter()) {
        if m {
            let d = p - t;
            sq += d * d;
            abs += d.abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let n = count as f64;
    let rmse = (sq / n).sqrt();
    // rounding can put mae a few ulps above rmse when all errors are equal
    let mae = (abs / n).min(rmse);
    Ok(EvalReport { rmse, mae, count })
}

/// Counts per bin. Bins are `[e_k, e_{k+1})` except the last, which is closed.
/// Values outside `[first, last]` are ignored.
pub fn histogram(values: &[f64], bin_edges: &[f64]) -> Result<Vec<usize>> {
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::NonAscendingEdges);
    }
    let bins = bin_edges.len() - 1;
    let last = bin_edges[bins];
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v < bin_edges[0] || v > last || v.is_nan() {
            continue;
        }
        let k = if v == last {
            bins - 1
        } else {
            // first edge strictly greater than v, minus one
            bin_edges.partition_point(|&e| e <= v) - 1
        };
        counts[k] += 1;
    }
    Ok(counts)
}

/// `n` equal-width bin edges spanning `[lo, hi]`.
pub fn equal_bins(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .collect()
}

/// Total variation distance between two histograms after normalizing each.
/// Returns 1 when exactly one histogram is empty and 0 when both are.
pub fn total_variation(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "histograms must share bins");
    let sa: usize = a.iter().sum();
    let sb: usize = b.iter().sum();
    match (sa, sb) {
        (0, 0) => return 0.0,
        (0, _) | (_, 0) => return 1.0,
        _ => {}
    }
    0.5 * a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 / sa as f64 - y as f64 / sb as f64).abs())
        .sum::<f64>()
}
