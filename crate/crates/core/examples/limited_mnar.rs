//! Cohort propensities that depend on the rating itself, then SNN on the revealed cells.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snn::matrix::{evaluate, MaskedMatrix};
use snn::simulators::{gen_core_factors, limited_mnar_propensity, sample_mask, CohortPropensitySpec, FactorPair};
use snn::snn::{snn_complete, SnnConfig, Targets};

fn main() -> snn::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = gen_core_factors(80, 20, 5, &mut rng)?;
    let v = gen_core_factors(80, 20, 5, &mut rng)?;
    let a = FactorPair::new(u, v)?.scaled(1.0, 5.0).a;

    let p = limited_mnar_propensity(&a, &CohortPropensitySpec::default())?;
    let mask = sample_mask(&p, &mut rng);
    let data = MaskedMatrix::new(a.clone(), mask.clone())?;
    println!("observed fraction {:.3}", data.observed_fraction());

    let done = snn_complete(&data, &Targets::AllMissing, &SnnConfig::default())?;
    let eval = done.estimated_mask().zip_map(&mask, |est, obs| est && !obs);
    let report = evaluate(&done.values, &a, &eval)?;
    println!("missing cells: rmse {:.4}, mae {:.4} over {} cells", report.rmse, report.mae, report.count);
    Ok(())
}
