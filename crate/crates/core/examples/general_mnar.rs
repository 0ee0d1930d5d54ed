//! Ratings revealed only within each user's favorite genre.

use snn::harness::experiment::run_replications;
use snn::harness::{Estimator, ExperimentConfig, ExperimentKind, ResultTable};

fn main() -> snn::error::Result<()> {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::RecsysGeneral);
    cfg.repeats = 3;
    cfg.estimators = vec![Estimator::Snn, Estimator::Knn, Estimator::SoftImpute];
    let reps = run_replications(&cfg, 4, |rep| {
        println!("replication {} done", rep.index);
        Ok(())
    })?;
    print!("{}", ResultTable::from_replications(&cfg, &reps).to_csv());
    Ok(())
}
