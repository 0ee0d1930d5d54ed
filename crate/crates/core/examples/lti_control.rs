//! A linear recurrence driven by unit and intervention factors: simulate it,
//! then estimate the outcomes of the interventions each unit did not receive.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snn::lti::{build_system, simulate, InterventionSchedule, LrfSpec};
use snn::matrix::evaluate;
use snn::simulators::gaussian_matrix;
use snn::snn::{snn_complete, SnnConfig, Targets};
use snn::spectral::RankPolicy;

fn main() -> snn::error::Result<()> {
    let (units, interventions, periods) = (20, 2, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spec = LrfSpec {
        beta: DMatrix::from_row_slice(2, 2, &[1.2, -0.3, 0.5, 0.4]),
        rho_init: DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]),
    };
    let theta = gaussian_matrix(units, 2, &mut rng);
    let omega = gaussian_matrix(interventions, 2, &mut rng);
    let mut sys = build_system(&spec, &theta, &omega)?;
    let schedule = InterventionSchedule {
        assignments: (0..periods)
            .map(|t| (0..units).map(|_| if t < 8 { 0 } else { rng.random_range(0..interventions) }).collect())
            .collect(),
    };
    let sim = simulate(&mut sys, &schedule, periods, 0.0, &mut rng)?;
    for w in &sim.warnings {
        println!("warning: {w}");
    }

    let truth = DMatrix::from_fn(units, periods * interventions, |n, c| sim.delta[c % interventions][(n, c / interventions)]);
    let cfg = SnnConfig {
        rank_policy: RankPolicy::EnergyThreshold(1.0),
        ..SnnConfig::default()
    };
    let done = snn_complete(&sim.observed, &Targets::AllMissing, &cfg)?;
    let eval = done.estimated_mask().zip_map(sim.observed.mask(), |e, obs| e && !obs);
    let report = evaluate(&done.values, &truth, &eval)?;
    println!("counterfactual innovations: rmse {:.2e} over {} cells", report.rmse, report.count);
    println!("final cumulative outcomes: {:?}", sim.m_path.column(periods - 1).as_slice());
    Ok(())
}
