//! Replicated experiments: instance generation, estimator runs and result
//! tables.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{BaselineGrid, Estimator, ExperimentConfig, ExperimentKind};
use crate::baselines::{default_lambda, knn_impute, soft_impute, usvt, LAMBDA_DIVISOR};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::lti::{build_system, simulate, InterventionSchedule, LrfSpec, LtiFactorSystem, Simulation};
use crate::matrix::{equal_bins, evaluate, histogram, total_variation, CellStatus, EvalReport, MaskedMatrix};
use crate::simulators::{
    add_noise, gaussian_matrix, gen_core_factors, general_mnar_mask, limited_mnar_propensity, mcar_mask,
    panel_adoption_mask, sample_mask, synthetic_panel, FactorPair,
};
use crate::snn::{snn_complete, Completion, SnnConfig, Targets};

/// Rating scale of the recommender experiments.
pub const RATING_RANGE: (f64, f64) = (1.0, 5.0);
/// Value range of the synthetic panel.
pub const PANEL_RANGE: (f64, f64) = (0.0, 100.0);
/// Histogram bins for the teaser plots.
pub const HISTOGRAM_BINS: usize = 8;

/// Seed of replication `index`.
pub fn replication_seed(master_seed: u64, index: usize) -> u64 {
    master_seed ^ index as u64
}

/// Generator for draws shared by all replications. It runs on a separate
/// ChaCha stream so it never overlaps a replication's stream.
pub fn shared_rng(master_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(1);
    rng
}

pub fn replication_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replication_seed(master_seed, index))
}

/// Draws that stay fixed across replications.
#[derive(Debug, Clone, Default)]
pub struct SharedDraws {
    pub u: Option<DMatrix<f64>>,
    pub v: Option<DMatrix<f64>>,
    pub a: Option<DMatrix<f64>>,
    /// Noisy full outcome matrix.
    pub y: Option<DMatrix<f64>>,
    pub propensity: Option<DMatrix<f64>>,
}

/// One replication's data.
#[derive(Debug, Clone)]
pub struct Instance {
    /// Noiseless signal.
    pub truth: DMatrix<f64>,
    /// Observed cells of the noisy outcome.
    pub data: MaskedMatrix,
    /// Cells scored against `truth`.
    pub eval_mask: DMatrix<bool>,
    pub propensity: Option<DMatrix<f64>>,
    pub u: Option<DMatrix<f64>>,
    pub v: Option<DMatrix<f64>>,
    pub lti: Option<LtiRun>,
}

/// The simulated system behind an `lti_sequential` instance.
#[derive(Debug, Clone)]
pub struct LtiRun {
    pub system: LtiFactorSystem,
    pub schedule: InterventionSchedule,
    pub simulation: Simulation,
}

pub fn shared_draws(cfg: &ExperimentConfig) -> Result<SharedDraws> {
    let mut rng = shared_rng(cfg.master_seed);
    let (lo, hi) = RATING_RANGE;
    let mut out = SharedDraws::default();
    match cfg.experiment {
        ExperimentKind::RecsysLimited
        | ExperimentKind::TeaserMcar
        | ExperimentKind::TeaserLimitedMnar
        | ExperimentKind::TeaserGeneralMnar => {
            let u = gen_core_factors(cfg.m, cfg.m_core, cfg.r, &mut rng)?;
            let v = gen_core_factors(cfg.n, cfg.n_core, cfg.r, &mut rng)?;
            let a = FactorPair::new(u.clone(), v.clone())?.scaled(lo, hi).a;
            let y = add_noise(&a, cfg.sigma, &mut rng)?;
            if matches!(cfg.experiment, ExperimentKind::RecsysLimited | ExperimentKind::TeaserLimitedMnar) {
                out.propensity = Some(limited_mnar_propensity(&a, &cfg.limited)?);
            }
            out.u = Some(u);
            out.v = Some(v);
            out.a = Some(a);
            out.y = Some(y);
        }
        ExperimentKind::RecsysGeneral => {
            out.v = Some(gen_core_factors(cfg.n, cfg.n_core, cfg.r, &mut rng)?);
        }
        ExperimentKind::PanelSynthetic => {
            let pair = synthetic_panel(cfg.m, cfg.n, cfg.r, PANEL_RANGE, &mut rng)?;
            let sigma = cfg.noise_fraction * (pair.a.max() - pair.a.min());
            out.y = Some(add_noise(&pair.a, sigma, &mut rng)?);
            out.u = Some(pair.u);
            out.v = Some(pair.v);
            out.a = Some(pair.a);
        }
        ExperimentKind::LtiSequential => {}
    }
    Ok(out)
}

/// Builds replication `index` under the experiment's re-randomization rule.
pub fn generate_instance(cfg: &ExperimentConfig, shared: &SharedDraws, index: usize) -> Result<Instance> {
    let mut rng = replication_rng(cfg.master_seed, index);
    let fixed = |m: &Option<DMatrix<f64>>| m.clone().expect("shared draw");
    let (truth, y, mask, propensity, u, v) = match cfg.experiment {
        ExperimentKind::RecsysLimited | ExperimentKind::TeaserLimitedMnar => {
            let p = fixed(&shared.propensity);
            let mask = sample_mask(&p, &mut rng);
            (fixed(&shared.a), fixed(&shared.y), mask, Some(p), shared.u.clone(), shared.v.clone())
        }
        ExperimentKind::TeaserMcar => {
            let mask = mcar_mask(cfg.m, cfg.n, cfg.mcar_observe, &mut rng)?;
            (fixed(&shared.a), fixed(&shared.y), mask, None, shared.u.clone(), shared.v.clone())
        }
        ExperimentKind::TeaserGeneralMnar => {
            let (u, v) = (fixed(&shared.u), fixed(&shared.v));
            let mask = general_mnar_mask(&u, &v, cfg.n_core);
            (fixed(&shared.a), fixed(&shared.y), mask, None, Some(u), Some(v))
        }
        ExperimentKind::RecsysGeneral => {
            let v = fixed(&shared.v);
            let u = gen_core_factors(cfg.m, cfg.m_core, cfg.r, &mut rng)?;
            let (lo, hi) = RATING_RANGE;
            let a = FactorPair::new(u.clone(), v.clone())?.scaled(lo, hi).a;
            let y = add_noise(&a, cfg.sigma, &mut rng)?;
            let mask = general_mnar_mask(&u, &v, cfg.n_core);
            (a, y, mask, None, Some(u), Some(v))
        }
        ExperimentKind::PanelSynthetic => {
            let y = fixed(&shared.y);
            let adoption = panel_adoption_mask(&y, &cfg.panel, &mut rng)?;
            (fixed(&shared.a), y, adoption.mask, None, shared.u.clone(), shared.v.clone())
        }
        ExperimentKind::LtiSequential => return lti_instance(cfg, &mut rng),
    };
    let eval_mask = mask.map(|o| !o);
    Ok(Instance {
        truth,
        data: MaskedMatrix::new(y, mask)?,
        eval_mask,
        propensity,
        u,
        v,
        lti: None,
    })
}

fn table(rows: &[Vec<f64>], field: &'static str) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::param(field, "ragged table"));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Simulates the configured system. Loadings missing from the config are
/// standard normal; without a schedule file every unit gets intervention 1
/// for the control periods and a uniform draw afterwards.
pub fn lti_run<R: Rng + ?Sized>(cfg: &ExperimentConfig, rng: &mut R) -> Result<LtiRun> {
    let l = &cfg.lti;
    let spec = LrfSpec {
        beta: table(&l.beta, "beta")?,
        rho_init: table(&l.rho_init, "rho_init")?,
    };
    let r = spec.factors();
    let theta = match &l.theta {
        Some(t) => table(t, "theta")?,
        None => gaussian_matrix(l.units, r, rng),
    };
    let omega = match &l.omega {
        Some(t) => table(t, "omega")?,
        None => gaussian_matrix(l.interventions, r, rng),
    };
    let mut system = build_system(&spec, &theta, &omega)?;
    let schedule = match &l.schedule {
        Some(path) => InterventionSchedule::read_csv(path)?,
        None => InterventionSchedule {
            assignments: (0..l.periods)
                .map(|t| {
                    (0..l.units)
                        .map(|_| if t < l.control_periods { 0 } else { rng.random_range(0..l.interventions) })
                        .collect()
                })
                .collect(),
        },
    };
    let start = system.clone();
    let simulation = simulate(&mut system, &schedule, l.periods, l.sigma, rng)?;
    Ok(LtiRun {
        system: start,
        schedule,
        simulation,
    })
}

fn lti_instance<R: Rng + ?Sized>(cfg: &ExperimentConfig, rng: &mut R) -> Result<Instance> {
    let run = lti_run(cfg, rng)?;
    let sim = &run.simulation;
    let interventions = sim.delta.len();
    let (units, periods) = sim.m_path.shape();
    let truth = DMatrix::from_fn(units, periods * interventions, |n, c| sim.delta[c % interventions][(n, c / interventions)]);
    let mask = sim.observed.mask();
    let control = cfg.lti.control_periods;
    let eval_mask = DMatrix::from_fn(units, periods * interventions, |n, c| {
        !mask[(n, c)] && c / interventions >= control
    });
    Ok(Instance {
        truth,
        data: sim.observed.clone(),
        eval_mask,
        propensity: None,
        u: None,
        v: None,
        lti: Some(run),
    })
}

/// Completed matrix from one estimator; cells without a value hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRun {
    pub values: DMatrix<f64>,
    pub status: DMatrix<CellStatus>,
    /// Chosen hyper-parameter, e.g. `k=5`.
    pub params: String,
    /// Kept for interval output.
    pub completion: Option<Completion>,
}

const HOLDOUT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Runs one estimator on all missing cells. Baseline lists with several
/// candidates are swept on a seeded holdout of the observed cells; the best
/// holdout RMSE wins, earlier candidates winning ties.
pub fn run_estimator(
    est: Estimator,
    data: &MaskedMatrix,
    snn: &SnnConfig,
    grid: &BaselineGrid,
    seed: u64,
) -> Result<EstimatorRun> {
    match est {
        Estimator::Snn => {
            let cfg = SnnConfig { seed, ..snn.clone() };
            let completion = snn_complete(data, &Targets::AllMissing, &cfg)?;
            Ok(EstimatorRun {
                values: completion.values.clone(),
                status: completion.status.clone(),
                params: format!("rank={}", cfg.rank_policy),
                completion: Some(completion),
            })
        }
        Estimator::Knn => {
            let fit = |d: &MaskedMatrix, k: &usize| knn_impute(d, *k).map(|o| (o.values, o.status));
            sweep(data, &grid.knn_k, grid, seed, fit, |k| format!("k={k}"))
        }
        Estimator::Usvt => {
            let fit = |d: &MaskedMatrix, eta: &f64| usvt(d, *eta).map(|o| (o.values, o.status));
            sweep(data, &grid.usvt_eta, grid, seed, fit, |e| format!("eta={e}"))
        }
        Estimator::SoftImpute => {
            let fit = |d: &MaskedMatrix, lambda: &Option<f64>| {
                let lambda = match lambda {
                    Some(l) => *l,
                    None => default_lambda(d)?,
                };
                soft_impute(d, lambda, grid.softimpute_max_iter, grid.softimpute_tol)
                    .map(|f| (f.output.values, f.output.status))
            };
            let candidates: Vec<Option<f64>> = match &grid.softimpute_lambda {
                Some(list) => list.iter().copied().map(Some).collect(),
                None => vec![None],
            };
            sweep(data, &candidates, grid, seed, fit, |l| match l {
                Some(l) => format!("lambda={l}"),
                None => format!("lambda=tau_max/{LAMBDA_DIVISOR}"),
            })
        }
    }
}

type Fit = (DMatrix<f64>, DMatrix<CellStatus>);

fn sweep<T>(
    data: &MaskedMatrix,
    candidates: &[T],
    grid: &BaselineGrid,
    seed: u64,
    fit: impl Fn(&MaskedMatrix, &T) -> Result<Fit>,
    label: impl Fn(&T) -> String,
) -> Result<EstimatorRun> {
    let first = candidates.first().ok_or_else(|| Error::param("candidates", "empty hyper-parameter list"))?;
    let mut best = first;
    if candidates.len() > 1 {
        let holdout = holdout_mask(data, grid.holdout_fraction, seed ^ HOLDOUT_SALT);
        let train = data.restrict(&holdout.map(|h| !h))?;
        let truth = data.filled(f64::NAN);
        let mut best_score = f64::INFINITY;
        for c in candidates {
            let Ok((values, status)) = fit(&train, c) else { continue };
            let scored = DMatrix::from_fn(data.nrows(), data.ncols(), |i, j| {
                holdout[(i, j)] && status[(i, j)] == CellStatus::Estimated && values[(i, j)].is_finite()
            });
            if let Ok(report) = evaluate(&values, &truth, &scored) {
                if report.rmse < best_score {
                    best_score = report.rmse;
                    best = c;
                }
            }
        }
    }
    let (values, status) = fit(data, best)?;
    Ok(EstimatorRun {
        values,
        status,
        params: label(best),
        completion: None,
    })
}

/// Marks `round(fraction · observed)` observed cells, chosen uniformly.
pub fn holdout_mask(data: &MaskedMatrix, fraction: f64, seed: u64) -> DMatrix<bool> {
    let mut cells: Vec<(usize, usize)> = data.observed().map(|(i, j, _)| (i, j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cells.shuffle(&mut rng);
    let take = (fraction * cells.len() as f64).round() as usize;
    let mut mask = DMatrix::from_element(data.nrows(), data.ncols(), false);
    for &c in &cells[..take] {
        mask[c] = true;
    }
    mask
}

/// Scores of one estimator on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorScore {
    pub estimator: Estimator,
    /// The error message when the estimator or its evaluation failed.
    pub outcome: std::result::Result<EvalReport, String>,
    pub params: String,
    /// Evaluation cells the estimator left without a value.
    pub unestimated: usize,
    /// Largest absolute error over the scored cells.
    pub max_abs_error: Option<f64>,
}

/// Histograms of the teaser experiments, all over the same bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histograms {
    pub edges: Vec<f64>,
    pub truth: Vec<usize>,
    pub revealed: Vec<usize>,
    /// Completed matrices per estimator: observed values plus estimates,
    /// clipped into the rating range.
    pub recovered: Vec<(Estimator, Vec<usize>)>,
}

impl Histograms {
    /// Total variation of each series against the truth.
    pub fn distances(&self) -> Vec<(String, f64)> {
        let mut out = vec![("revealed".to_string(), total_variation(&self.truth, &self.revealed))];
        for (e, h) in &self.recovered {
            out.push((e.to_string(), total_variation(&self.truth, h)));
        }
        out
    }

    pub fn tv(&self, est: Estimator) -> Option<f64> {
        self.recovered
            .iter()
            .find(|(e, _)| *e == est)
            .map(|(_, h)| total_variation(&self.truth, h))
    }

    pub fn revealed_tv(&self) -> f64 {
        total_variation(&self.truth, &self.revealed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,true,revealed");
        for (e, _) in &self.recovered {
            out.push(',');
            out.push_str(e.as_str());
        }
        out.push('\n');
        for b in 0..self.truth.len() {
            out.push_str(&format!(
                "{},{},{},{}",
                fmt_f64(self.edges[b]),
                fmt_f64(self.edges[b + 1]),
                self.truth[b],
                self.revealed[b]
            ));
            for (_, h) in &self.recovered {
                out.push_str(&format!(",{}", h[b]));
            }
            out.push('\n');
        }
        out
    }

    pub fn distances_csv(&self) -> String {
        let mut out = String::from("series,tv_to_true\n");
        for (name, tv) in self.distances() {
            out.push_str(&format!("{name},{}\n", fmt_f64(tv)));
        }
        out
    }
}

/// Everything one replication produced.
#[derive(Debug, Clone)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    pub instance: Instance,
    pub scores: Vec<EstimatorScore>,
    pub runs: Vec<(Estimator, Option<EstimatorRun>)>,
    pub histograms: Option<Histograms>,
}

impl Replication {
    pub fn score(&self, est: Estimator) -> Option<&EstimatorScore> {
        self.scores.iter().find(|s| s.estimator == est)
    }

    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("estimator,rmse,mae,count,unestimated,max_abs_error,params,error\n");
        for s in &self.scores {
            let max = s.max_abs_error.map_or("NA".to_string(), fmt_f64);
            match &s.outcome {
                Ok(r) => out.push_str(&format!(
                    "{},{},{},{},{},{},{},\n",
                    s.estimator,
                    fmt_f64(r.rmse),
                    fmt_f64(r.mae),
                    r.count,
                    s.unestimated,
                    max,
                    s.params
                )),
                Err(msg) => out.push_str(&format!(
                    "{},NA,NA,0,{},NA,{},\"{}\"\n",
                    s.estimator,
                    s.unestimated,
                    s.params,
                    msg.replace('"', "'")
                )),
            }
        }
        out
    }
}

/// Runs every configured estimator on one replication. Estimator seeds
/// depend only on the replication seed, so their order is irrelevant.
pub fn run_replication(cfg: &ExperimentConfig, shared: &SharedDraws, index: usize) -> Result<Replication> {
    let instance = generate_instance(cfg, shared, index)?;
    let seed = replication_seed(cfg.master_seed, index);
    let mut scores = Vec::new();
    let mut runs = Vec::new();
    for &est in &cfg.estimators {
        let run = run_estimator(est, &instance.data, &cfg.snn, &cfg.baselines, seed);
        let score = match &run {
            Ok(r) => score_run(est, r, &instance),
            Err(e) => EstimatorScore {
                estimator: est,
                outcome: Err(e.to_string()),
                params: String::new(),
                unestimated: instance.eval_mask.iter().filter(|&&m| m).count(),
                max_abs_error: None,
            },
        };
        if let Err(msg) = &score.outcome {
            log::warn!("replication {index}: {est} failed: {msg}");
        }
        scores.push(score);
        runs.push((est, run.ok()));
    }
    let histograms = cfg.experiment.is_teaser().then(|| teaser_histograms(&instance, &runs)).transpose()?;
    Ok(Replication {
        index,
        seed,
        instance,
        scores,
        runs,
        histograms,
    })
}

fn score_run(est: Estimator, run: &EstimatorRun, inst: &Instance) -> EstimatorScore {
    let scored = DMatrix::from_fn(inst.truth.nrows(), inst.truth.ncols(), |i, j| {
        inst.eval_mask[(i, j)] && run.status[(i, j)] == CellStatus::Estimated && run.values[(i, j)].is_finite()
    });
    let wanted = inst.eval_mask.iter().filter(|&&m| m).count();
    let got = scored.iter().filter(|&&m| m).count();
    let max_abs_error = scored
        .iter()
        .zip(run.values.iter().zip(inst.truth.iter()))
        .filter(|(&m, _)| m)
        .map(|(_, (p, t))| (p - t).abs())
        .reduce(f64::max);
    EstimatorScore {
        estimator: est,
        outcome: evaluate(&run.values, &inst.truth, &scored).map_err(|e| e.to_string()),
        params: run.params.clone(),
        unestimated: wanted - got,
        max_abs_error,
    }
}

fn teaser_histograms(inst: &Instance, runs: &[(Estimator, Option<EstimatorRun>)]) -> Result<Histograms> {
    let (lo, hi) = RATING_RANGE;
    let edges = equal_bins(lo, hi, HISTOGRAM_BINS);
    let truth: Vec<f64> = inst.truth.iter().copied().collect();
    let revealed: Vec<f64> = inst.data.observed().map(|(_, _, v)| v).collect();
    let mut recovered = Vec::new();
    for (est, run) in runs {
        let Some(run) = run else { continue };
        let values: Vec<f64> = run
            .values
            .iter()
            .zip(run.status.iter())
            .filter(|(v, s)| s.has_value() && v.is_finite())
            .map(|(v, _)| v.clamp(lo, hi))
            .collect();
        recovered.push((*est, histogram(&values, &edges)?));
    }
    Ok(Histograms {
        truth: histogram(&truth, &edges)?,
        revealed: histogram(&revealed, &edges)?,
        edges,
        recovered,
    })
}

/// Runs all replications on a pool of `jobs` threads. `each` sees every
/// finished replication on its worker thread.
pub fn run_replications<F>(cfg: &ExperimentConfig, jobs: usize, each: F) -> Result<Vec<Replication>>
where
    F: Fn(&Replication) -> Result<()> + Sync,
{
    let shared = shared_draws(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Infeasible(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..cfg.repeats)
            .into_par_iter()
            .map(|index| {
                let rep = run_replication(cfg, &shared, index)?;
                each(&rep)?;
                Ok(rep)
            })
            .collect()
    })
}

/// Aggregate scores of one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub estimator: Estimator,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub mae_mean: f64,
    pub mae_std: f64,
    /// Replications run.
    pub repeats: usize,
    /// Replications where the estimator failed; their scores are excluded.
    pub failures: usize,
    pub cells_mean: f64,
    pub unestimated_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl ResultTable {
    pub const HEADER: &'static str =
        "experiment,estimator,rmse_mean,rmse_std,mae_mean,mae_std,repeats,failures,cells_mean,unestimated_mean";

    pub fn from_replications(cfg: &ExperimentConfig, reps: &[Replication]) -> Self {
        let rows = cfg
            .estimators
            .iter()
            .map(|&est| {
                let scores: Vec<&EstimatorScore> = reps.iter().filter_map(|r| r.score(est)).collect();
                let ok: Vec<&EvalReport> = scores.iter().filter_map(|s| s.outcome.as_ref().ok()).collect();
                let rmse: Vec<f64> = ok.iter().map(|r| r.rmse).collect();
                let mae: Vec<f64> = ok.iter().map(|r| r.mae).collect();
                let cells: Vec<f64> = ok.iter().map(|r| r.count as f64).collect();
                let unest: Vec<f64> = scores.iter().map(|s| s.unestimated as f64).collect();
                let (rmse_mean, rmse_std) = mean_std(&rmse);
                let (mae_mean, mae_std) = mean_std(&mae);
                ResultRow {
                    experiment: cfg.experiment,
                    estimator: est,
                    rmse_mean,
                    rmse_std,
                    mae_mean,
                    mae_std,
                    repeats: reps.len(),
                    failures: scores.len() - ok.len(),
                    cells_mean: mean_std(&cells).0,
                    unestimated_mean: mean_std(&unest).0,
                }
            })
            .collect();
        Self { rows }
    }

    pub fn row(&self, est: Estimator) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.estimator == est)
    }

    /// CSV with a comment line on the deviation convention. Rows with
    /// failures carry the count in `failures` and average the rest.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "# std: sample standard deviation (n-1 denominator) over successful replications; 0 for one replication\n",
        );
        out.push_str(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.experiment,
                r.estimator,
                fmt_f64(r.rmse_mean),
                fmt_f64(r.rmse_std),
                fmt_f64(r.mae_mean),
                fmt_f64(r.mae_std),
                r.repeats,
                r.failures,
                fmt_f64(r.cells_mean),
                fmt_f64(r.unestimated_mean)
            ));
        }
        out
    }
}
