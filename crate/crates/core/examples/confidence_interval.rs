//! Monte Carlo coverage of the normal-approximation interval for one cell.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snn::matrix::MaskedMatrix;
use snn::simulators::{add_noise, gaussian_matrix};
use snn::snn::{snn_complete, KFolds, SnnConfig, Targets};
use snn::spectral::RankPolicy;

fn main() -> snn::error::Result<()> {
    let (rows, cols, r, sigma, reps) = (161, 41, 2, 0.2, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = gaussian_matrix(rows, r, &mut rng) * gaussian_matrix(cols, r, &mut rng).transpose();
    let mut mask = DMatrix::from_element(rows, cols, true);
    mask[(0, 0)] = false;
    let mut cfg = SnnConfig {
        rank_policy: RankPolicy::Fixed(r),
        k_folds: KFolds::Fixed(4),
        ..SnnConfig::default()
    };

    let mut covered = 0;
    for rep in 0..reps {
        let y = add_noise(&a, sigma, &mut rng)?;
        cfg.seed = rep;
        let done = snn_complete(&MaskedMatrix::new(y, mask.clone())?, &Targets::Cells(vec![(0, 0)]), &cfg)?;
        if let Some((lo, hi)) = done.cells[0].estimate.as_ref().and_then(|e| e.ci) {
            covered += usize::from(lo <= a[(0, 0)] && a[(0, 0)] <= hi);
        }
    }
    println!(
        "95% interval covered the truth in {covered}/{reps} replications ({:.3})",
        covered as f64 / reps as f64
    );
    Ok(())
}
