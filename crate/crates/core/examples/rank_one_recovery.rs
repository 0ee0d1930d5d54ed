//! Fills the holes of a small rank-one table and prints the per-cell intervals.

use nalgebra::DMatrix;
use snn::matrix::MaskedMatrix;
use snn::snn::{snn_complete, SnnConfig, Targets};

fn main() -> snn::error::Result<()> {
    let truth = DMatrix::from_fn(8, 6, |i, j| ((i + 1) * (j + 2)) as f64);
    let mask = DMatrix::from_fn(8, 6, |i, j| (i * 5 + j * 3) % 7 != 0);
    let data = MaskedMatrix::new(truth.clone(), mask)?;

    let done = snn_complete(&data, &Targets::AllMissing, &SnnConfig::default())?;
    for cell in &done.cells {
        let Some(est) = &cell.estimate else {
            println!("({}, {}) {}", cell.row, cell.col, cell.status);
            continue;
        };
        println!(
            "({}, {}) estimate {:.6} truth {} folds {}",
            cell.row,
            cell.col,
            est.value,
            truth[(cell.row, cell.col)],
            est.plan.k()
        );
    }
    Ok(())
}
