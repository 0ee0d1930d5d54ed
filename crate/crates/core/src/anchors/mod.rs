//! Anchor rows and columns for a target cell.
//!
//! Anchors form a fully observed block whose rows all observe the target's
//! column and whose columns are all observed in the target's row. The block
//! is found as a maximal biclique of the mask restricted to those rows and
//! columns, and its rows are then split into disjoint folds.

pub mod biclique;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

pub use biclique::{maximal_bicliques, Biclique};

use crate::error::{Error, Result};

/// Rows observed in column `j`.
pub fn neighborhood_rows(mask: &DMatrix<bool>, j: usize) -> Vec<usize> {
    assert!(j < mask.ncols(), "column {j} out of bounds");
    (0..mask.nrows()).filter(|&a| mask[(a, j)]).collect()
}

/// Columns observed in row `i`.
pub fn neighborhood_cols(mask: &DMatrix<bool>, i: usize) -> Vec<usize> {
    assert!(i < mask.nrows(), "row {i} out of bounds");
    (0..mask.ncols()).filter(|&b| mask[(i, b)]).collect()
}

/// Anchor columns plus `K` disjoint anchor row folds for one target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorPlan {
    pub target: (usize, usize),
    /// Ascending.
    pub anchor_cols: Vec<usize>,
    /// Each fold ascending; folds are pairwise disjoint.
    pub anchor_row_folds: Vec<Vec<usize>>,
}

impl AnchorPlan {
    pub fn k(&self) -> usize {
        self.anchor_row_folds.len()
    }

    /// All anchor rows, ascending.
    pub fn anchor_rows(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = self.anchor_row_folds.iter().flatten().copied().collect();
        rows.sort_unstable();
        rows
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        self.anchor_row_folds.iter().map(Vec::len).collect()
    }

    /// Checks every structural and observation invariant against `mask`.
    pub fn validate(&self, mask: &DMatrix<bool>) -> Result<()> {
        let (i, j) = self.target;
        let (m, n) = mask.shape();
        let violation = |s: String| Err(Error::PlanViolation(s));
        if i >= m || j >= n {
            return violation(format!("target ({i}, {j}) out of bounds"));
        }
        if self.anchor_cols.is_empty() {
            return violation("no anchor columns".into());
        }
        if self.anchor_row_folds.is_empty() {
            return violation("no anchor row folds".into());
        }
        let mut seen = vec![false; m];
        for (k, fold) in self.anchor_row_folds.iter().enumerate() {
            if fold.is_empty() {
                return violation(format!("fold {k} is empty"));
            }
            for &a in fold {
                if a >= m {
                    return violation(format!("anchor row {a} out of bounds"));
                }
                if a == i {
                    return violation("target row is an anchor row".into());
                }
                if std::mem::replace(&mut seen[a], true) {
                    return violation(format!("row {a} appears in two folds"));
                }
                if !mask[(a, j)] {
                    return violation(format!("anchor row {a} does not observe column {j}"));
                }
                for &b in &self.anchor_cols {
                    if !mask[(a, b)] {
                        return violation(format!("cell ({a}, {b}) of the anchor block is missing"));
                    }
                }
            }
        }
        for &b in &self.anchor_cols {
            if b >= n {
                return violation(format!("anchor column {b} out of bounds"));
            }
            if b == j {
                return violation("target column is an anchor column".into());
            }
            if !mask[(i, b)] {
                return violation(format!("row {i} does not observe anchor column {b}"));
            }
        }
        Ok(())
    }

    /// Debug dump with stable key order and ascending index lists.
    pub fn to_json(&self) -> String {
        let list = |v: &[usize]| {
            let items: Vec<String> = v.iter().map(usize::to_string).collect();
            format!("[{}]", items.join(","))
        };
        let folds: Vec<String> = self.anchor_row_folds.iter().map(|f| list(f)).collect();
        format!(
            "{{\"target\":[{},{}],\"anchor_cols\":{},\"anchor_row_folds\":[{}]}}",
            self.target.0,
            self.target.1,
            list(&self.anchor_cols),
            folds.join(",")
        )
    }
}

/// Finds anchor rows and columns for `(i, j)`.
///
/// The search runs on the mask restricted to `NR(j) \ {i}` rows and
/// `NC(i) \ {j}` columns and returns the biclique with the largest min side
/// (ties: larger area, then lexicographically smaller row set).
pub fn anchor_submatrix(mask: &DMatrix<bool>, i: usize, j: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let rows: Vec<usize> = neighborhood_rows(mask, j).into_iter().filter(|&a| a != i).collect();
    let cols: Vec<usize> = neighborhood_cols(mask, i).into_iter().filter(|&b| b != j).collect();
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::NoBiclique { row: i, col: j });
    }
    let restricted = DMatrix::from_fn(rows.len(), cols.len(), |r, c| mask[(rows[r], cols[c])]);
    let best = biclique::best_biclique(&restricted).ok_or(Error::NoBiclique { row: i, col: j })?;
    Ok((
        best.rows.iter().map(|&r| rows[r]).collect(),
        best.cols.iter().map(|&c| cols[c]).collect(),
    ))
}

/// Randomly splits `rows` into `k` disjoint folds whose sizes differ by at
/// most one. Each fold is returned ascending.
pub fn partition_rows<R: Rng + ?Sized>(rows: &[usize], k: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > rows.len() {
        return Err(Error::param(
            "k_folds",
            format!("need 1 <= K <= {}, got {k}", rows.len()),
        ));
    }
    let mut shuffled = rows.to_vec();
    if k > 1 {
        shuffled.shuffle(rng);
    }
    let base = rows.len() / k;
    let extra = rows.len() % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = shuffled[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}
