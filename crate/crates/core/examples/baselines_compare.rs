//! SNN against the three baseline completions on one MCAR instance. Dense
//! random holes keep the anchor blocks small here, so the smoothing baselines
//! can come out ahead.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snn::baselines::{default_lambda, knn_impute, soft_impute, usvt};
use snn::matrix::{evaluate, MaskedMatrix};
use snn::simulators::{add_noise, gaussian_matrix, mcar_mask, scale_to_range};
use snn::snn::{snn_complete, SnnConfig, Targets};

fn main() -> snn::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = scale_to_range(&(gaussian_matrix(60, 4, &mut rng) * gaussian_matrix(50, 4, &mut rng).transpose()), 1.0, 5.0);
    let y = add_noise(&a, 0.1, &mut rng)?;
    let mask = mcar_mask(60, 50, 0.6, &mut rng)?;
    let data = MaskedMatrix::new(y, mask.clone())?;
    let missing = mask.map(|b| !b);

    let snn = snn_complete(&data, &Targets::AllMissing, &SnnConfig::default())?;
    let lambda = default_lambda(&data)?;
    let fits = [
        ("snn", snn.values.clone(), snn.estimated_mask()),
        ("knn", knn_impute(&data, 5)?.values, missing.clone()),
        ("usvt", usvt(&data, 0.5)?.values, missing.clone()),
        ("softimpute", soft_impute(&data, lambda, 100, 1e-3)?.output.values, missing.clone()),
    ];
    for (name, values, estimated) in fits {
        let eval = estimated.zip_map(&missing, |e, m| e && m);
        let report = evaluate(&values, &a, &eval)?;
        println!("{name:>10}: rmse {:.4}, mae {:.4}, cells {}", report.rmse, report.mae, report.count);
    }
    Ok(())
}
