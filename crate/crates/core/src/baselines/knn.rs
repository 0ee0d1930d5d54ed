use nalgebra::DMatrix;
use rayon::prelude::*;

use super::BaselineOutput;
use crate::error::{Error, Result};
use crate::matrix::{CellStatus, MaskedMatrix};

/// Mean squared difference between every pair of rows over their commonly
/// observed columns; `None` without common support.
pub fn row_distances(data: &MaskedMatrix) -> Vec<Vec<Option<f64>>> {
    let (m, n) = data.shape();
    let mask = data.mask();
    let values = data.filled(0.0);
    (0..m)
        .into_par_iter()
        .map(|a| {
            (0..m)
                .map(|b| {
                    let mut sum = 0.0;
                    let mut count = 0usize;
                    for c in 0..n {
                        if mask[(a, c)] && mask[(b, c)] {
                            let d = values[(a, c)] - values[(b, c)];
                            sum += d * d;
                            count += 1;
                        }
                    }
                    (count > 0).then(|| sum / count as f64)
                })
                .collect()
        })
        .collect()
}

/// Averages column `j` over the `k` closest rows that observe it. Ties in
/// distance go to the lower row index.
pub fn knn_impute(data: &MaskedMatrix, k: usize) -> Result<BaselineOutput> {
    if k == 0 {
        return Err(Error::param("knn_k", "must be at least 1"));
    }
    let (m, n) = data.shape();
    let dist = row_distances(data);
    let mask = data.mask();
    let values = data.filled(f64::NAN);

    let rows: Vec<Vec<(f64, CellStatus)>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if mask[(i, j)] {
                        return (values[(i, j)], CellStatus::Observed);
                    }
                    let mut cands: Vec<(f64, usize)> = (0..m)
                        .filter(|&a| a != i && mask[(a, j)])
                        .filter_map(|a| dist[i][a].map(|d| (d, a)))
                        .collect();
                    if cands.is_empty() {
                        return (f64::NAN, CellStatus::NoNeighbors);
                    }
                    cands.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                    let take = k.min(cands.len());
                    let mean = cands[..take].iter().map(|&(_, a)| values[(a, j)]).sum::<f64>() / take as f64;
                    (mean, CellStatus::Estimated)
                })
                .collect()
        })
        .collect();

    let out_values = DMatrix::from_fn(m, n, |i, j| rows[i][j].0);
    let status = DMatrix::from_fn(m, n, |i, j| rows[i][j].1);
    Ok(BaselineOutput {
        values: out_values,
        status,
    })
}
