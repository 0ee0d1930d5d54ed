//! Rating histograms under three missingness mechanisms: what is true, what
//! gets revealed, and what SNN recovers.

use snn::harness::experiment::run_replications;
use snn::harness::{Estimator, ExperimentConfig, ExperimentKind};

fn main() -> snn::error::Result<()> {
    for kind in [
        ExperimentKind::TeaserMcar,
        ExperimentKind::TeaserLimitedMnar,
        ExperimentKind::TeaserGeneralMnar,
    ] {
        let mut cfg = ExperimentConfig::defaults(kind);
        cfg.estimators = vec![Estimator::Snn];
        let reps = run_replications(&cfg, 4, |_| Ok(()))?;
        let Some(h) = &reps[0].histograms else { continue };
        println!("{kind}");
        print!("{}", h.to_csv());
        print!("{}", h.distances_csv());
        println!();
    }
    Ok(())
}
