//! File-producing entry points behind the command-line subcommands.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::config::{BaselineGrid, Estimator, ExperimentConfig, ExperimentKind};
use super::experiment::{
    generate_instance, replication_seed, run_estimator, run_replications, shared_draws, EstimatorRun,
    Instance, Replication, ResultTable,
};
use crate::error::{Error, Result};
use crate::io::{dense_csv_string, fmt_f64, read_masked_csv, write_bool_csv, write_dense_csv, write_masked_csv, write_text};
use crate::matrix::CellStatus;
use crate::snn::{Completion, SnnConfig};

/// Subdirectory of replication `index`.
pub fn replication_dir(root: &Path, index: usize) -> PathBuf {
    root.join(format!("rep_{index:03}"))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Infeasible(format!("thread pool: {e}")))
}

fn write_instance(dir: &Path, cfg: &ExperimentConfig, index: usize, inst: &Instance) -> Result<()> {
    write_dense_csv(&dir.join("A.csv"), &inst.truth, "NA")?;
    write_masked_csv(&dir.join("Y.csv"), &inst.data, "NA")?;
    write_bool_csv(&dir.join("D.csv"), inst.data.mask())?;
    if let Some(p) = &inst.propensity {
        write_dense_csv(&dir.join("P.csv"), p, "NA")?;
    }
    if let Some(u) = &inst.u {
        write_dense_csv(&dir.join("U.csv"), u, "NA")?;
    }
    if let Some(v) = &inst.v {
        write_dense_csv(&dir.join("V.csv"), v, "NA")?;
    }
    if let Some(run) = &inst.lti {
        let sim = &run.simulation;
        sim.write_delta_csv(&dir.join("delta.csv"))?;
        write_dense_csv(&dir.join("M.csv"), &sim.m_path, "NA")?;
        write_text(&dir.join("schedule.csv"), &run.schedule.to_csv_string())?;
    }
    let sidecar = format!(
        "{}replication = {index}\nreplication_seed = {}\n",
        cfg.describe(),
        replication_seed(cfg.master_seed, index)
    );
    write_text(&dir.join("spec.txt"), &sidecar)
}

/// Writes each replication's simulated matrices to `rep_NNN/`: `A.csv`
/// (signal), `Y.csv` (observed outcomes, `NA` elsewhere), `D.csv` (mask),
/// `P.csv` when propensities exist, factor files when present, and a
/// `spec.txt` sidecar.
pub fn cmd_simulate(cfg: &ExperimentConfig, jobs: usize) -> Result<()> {
    cfg.validate()?;
    let shared = shared_draws(cfg)?;
    pool(jobs)?.install(|| {
        use rayon::prelude::*;
        (0..cfg.repeats).into_par_iter().try_for_each(|index| {
            let inst = generate_instance(cfg, &shared, index)?;
            write_instance(&replication_dir(&cfg.output_dir, index), cfg, index, &inst)
        })
    })
}

/// Settings for [`cmd_complete`].
#[derive(Debug, Clone)]
pub struct CompleteOptions {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub estimator: Estimator,
    pub snn: SnnConfig,
    pub baselines: BaselineGrid,
    pub seed: u64,
    pub missing_token: String,
}

impl CompleteOptions {
    pub fn new(input: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, estimator: Estimator) -> Self {
        Self {
            input: input.into(),
            output_dir: output_dir.into(),
            estimator,
            snn: SnnConfig::default(),
            baselines: BaselineGrid::default(),
            seed: 0,
            missing_token: crate::io::DEFAULT_MISSING_TOKEN.to_string(),
        }
    }
}

pub fn status_csv_string(status: &DMatrix<CellStatus>) -> String {
    let mut out = String::new();
    for row in status.row_iter() {
        let cells: Vec<&str> = row.iter().map(|s| s.as_str()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One line per target cell, zero-based indices.
pub fn interval_csv_string(completion: &Completion) -> String {
    let mut out = String::from("i,j,status,estimate,lo,hi,variance,k,anchor_cols,fold_sizes\n");
    for cell in &completion.cells {
        match &cell.estimate {
            Some(e) => {
                let (lo, hi) = e.ci.map_or(("NA".into(), "NA".into()), |(l, h)| (fmt_f64(l), fmt_f64(h)));
                let sizes: Vec<String> = e.plan.fold_sizes().iter().map(|s| s.to_string()).collect();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    cell.row,
                    cell.col,
                    cell.status,
                    fmt_f64(e.value),
                    lo,
                    hi,
                    e.variance.map_or("NA".into(), fmt_f64),
                    e.plan.k(),
                    e.plan.anchor_cols.len(),
                    sizes.join(";")
                ));
            }
            None => out.push_str(&format!("{},{},{},NA,NA,NA,NA,0,0,\n", cell.row, cell.col, cell.status)),
        }
    }
    out
}

/// Completes the CSV at `opts.input` and writes `completed.csv` (`NA` where
/// no value could be formed), `status.csv`, and for SNN `intervals.csv`.
pub fn cmd_complete(opts: &CompleteOptions) -> Result<EstimatorRun> {
    let data = read_masked_csv(&opts.input, &opts.missing_token)?;
    let run = run_estimator(opts.estimator, &data, &opts.snn, &opts.baselines, opts.seed)?;
    let dir = &opts.output_dir;
    write_text(&dir.join("completed.csv"), &dense_csv_string(&run.values, &opts.missing_token))?;
    write_text(&dir.join("status.csv"), &status_csv_string(&run.status))?;
    if let Some(c) = &run.completion {
        write_text(&dir.join("intervals.csv"), &interval_csv_string(c))?;
    }
    let unestimated = run
        .status
        .iter()
        .filter(|s| !s.has_value())
        .count();
    if unestimated > 0 {
        log::warn!("{unestimated} cells left without an estimate; see status.csv");
    }
    Ok(run)
}

/// Table and replications of an experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub table: ResultTable,
    pub replications: Vec<Replication>,
}

fn write_replication(root: &Path, rep: &Replication) -> Result<()> {
    let dir = replication_dir(root, rep.index);
    write_text(&dir.join("metrics.csv"), &rep.metrics_csv())?;
    if let Some(h) = &rep.histograms {
        write_text(&dir.join("histograms.csv"), &h.to_csv())?;
        write_text(&dir.join("distances.csv"), &h.distances_csv())?;
    }
    Ok(())
}

/// Runs the replications concurrently, each writing `rep_NNN/metrics.csv`
/// (plus histogram files for teasers), then writes `results.csv`.
pub fn cmd_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let root = cfg.output_dir.clone();
    let replications = run_replications(cfg, jobs, |rep| write_replication(&root, rep))?;
    let table = ResultTable::from_replications(cfg, &replications);
    write_text(&root.join("results.csv"), &table.to_csv())?;
    Ok(ExperimentOutcome { table, replications })
}

/// What [`cmd_lti`] produced.
#[derive(Debug, Clone)]
pub struct LtiOutcome {
    pub instance: Instance,
    pub warnings: Vec<String>,
    /// Per estimator when evaluation was requested.
    pub evaluation: Option<Replication>,
}

/// Simulates one system and writes `delta.csv`, `M.csv`, `Y.csv` (the
/// unit × period·intervention observations), `D.csv`, `schedule.csv` and
/// `spec.txt`. With `evaluate`, the configured estimators fill in the
/// counterfactual cells after the control periods and `evaluation.csv`
/// reports their error.
pub fn cmd_lti(cfg: &ExperimentConfig, evaluate: bool) -> Result<LtiOutcome> {
    if cfg.experiment != ExperimentKind::LtiSequential {
        return Err(super::config::config_err("experiment", "the lti command needs experiment = \"lti_sequential\""));
    }
    cfg.validate()?;
    let shared = shared_draws(cfg)?;
    let instance = generate_instance(cfg, &shared, 0)?;
    write_instance(&cfg.output_dir, cfg, 0, &instance)?;
    let warnings = instance.lti.as_ref().map(|r| r.simulation.warnings.clone()).unwrap_or_default();
    let evaluation = if evaluate || cfg.lti.evaluate {
        let rep = super::experiment::run_replication(cfg, &shared, 0)?;
        write_text(&cfg.output_dir.join("evaluation.csv"), &rep.metrics_csv())?;
        Some(rep)
    } else {
        None
    };
    Ok(LtiOutcome {
        instance,
        warnings,
        evaluation,
    })
}
