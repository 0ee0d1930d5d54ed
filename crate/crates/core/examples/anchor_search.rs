//! Anchor rows and columns for one missing cell, and the biclique search behind them.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snn::anchors::biclique::best_exact;
use snn::anchors::{anchor_submatrix, maximal_bicliques};

fn main() -> snn::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mask = DMatrix::from_fn(12, 10, |_, _| rng.random::<f64>() < 0.7);
    for row in mask.row_iter() {
        let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
        println!("{line}");
    }

    let target = (0..12)
        .flat_map(|i| (0..10).map(move |j| (i, j)))
        .find(|&(i, j)| !mask[(i, j)])
        .expect("at least one missing cell");
    let (rows, cols) = anchor_submatrix(&mask, target.0, target.1)?;
    println!("target {target:?}: anchor rows {rows:?}, anchor cols {cols:?}");

    let found = maximal_bicliques(&mask, 5);
    println!("first {} maximal bicliques:", found.len());
    for b in &found {
        println!("  rows {:?} cols {:?}", b.rows, b.cols);
    }
    if let Some(b) = best_exact(&mask) {
        println!("largest min side {} (rows {:?}, cols {:?})", b.min_side(), b.rows, b.cols);
    }
    Ok(())
}
