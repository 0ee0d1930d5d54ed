//! TOML experiment configuration.
//!
//! Every key is optional except `experiment`; unset keys take the defaults of
//! the chosen experiment. `--seed` and `--output` on the command line
//! override `master_seed` and `output_dir`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::simulators::{Cohorts, CohortPropensitySpec, PanelAdoptionSpec};
use crate::snn::{KFolds, SnnConfig};
use crate::spectral::RankPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TeaserMcar,
    TeaserLimitedMnar,
    TeaserGeneralMnar,
    RecsysLimited,
    RecsysGeneral,
    PanelSynthetic,
    LtiSequential,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::TeaserMcar,
        ExperimentKind::TeaserLimitedMnar,
        ExperimentKind::TeaserGeneralMnar,
        ExperimentKind::RecsysLimited,
        ExperimentKind::RecsysGeneral,
        ExperimentKind::PanelSynthetic,
        ExperimentKind::LtiSequential,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::TeaserMcar => "teaser_mcar",
            ExperimentKind::TeaserLimitedMnar => "teaser_limited_mnar",
            ExperimentKind::TeaserGeneralMnar => "teaser_general_mnar",
            ExperimentKind::RecsysLimited => "recsys_limited",
            ExperimentKind::RecsysGeneral => "recsys_general",
            ExperimentKind::PanelSynthetic => "panel_synthetic",
            ExperimentKind::LtiSequential => "lti_sequential",
        }
    }

    pub fn is_teaser(self) -> bool {
        matches!(
            self,
            ExperimentKind::TeaserMcar | ExperimentKind::TeaserLimitedMnar | ExperimentKind::TeaserGeneralMnar
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| config_err("experiment", format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Snn,
    Knn,
    Usvt,
    SoftImpute,
}

impl Estimator {
    pub const ALL: [Estimator; 4] = [Estimator::Snn, Estimator::Knn, Estimator::Usvt, Estimator::SoftImpute];

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Snn => "snn",
            Estimator::Knn => "knn",
            Estimator::Usvt => "usvt",
            Estimator::SoftImpute => "softimpute",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| config_err("estimators", format!("unknown estimator {s:?}; use snn, knn, usvt or softimpute")))
    }
}

pub(crate) fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Candidate hyper-parameters for the baselines. Lists with more than one
/// entry are swept on a holdout of the observed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineGrid {
    pub knn_k: Vec<usize>,
    pub usvt_eta: Vec<f64>,
    /// `None` uses `τ_max / 50` of the matrix being completed.
    pub softimpute_lambda: Option<Vec<f64>>,
    pub softimpute_max_iter: usize,
    pub softimpute_tol: f64,
    /// Share of observed cells held out when sweeping.
    pub holdout_fraction: f64,
}

impl Default for BaselineGrid {
    fn default() -> Self {
        Self {
            knn_k: vec![5],
            usvt_eta: vec![0.5],
            softimpute_lambda: None,
            softimpute_max_iter: 100,
            softimpute_tol: 1e-3,
            holdout_fraction: 0.2,
        }
    }
}

/// Linear-recurrence panel settings.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSettings {
    pub units: usize,
    pub interventions: usize,
    /// `R × G` recurrence coefficients.
    pub beta: Vec<Vec<f64>>,
    /// `R × G` initial values, newest first.
    pub rho_init: Vec<Vec<f64>>,
    /// `N × R` unit loadings; standard normal draws when unset.
    pub theta: Option<Vec<Vec<f64>>>,
    /// `I × R` intervention loadings; standard normal draws when unset.
    pub omega: Option<Vec<Vec<f64>>>,
    pub periods: usize,
    /// Leading periods in which every unit receives intervention 1.
    pub control_periods: usize,
    pub sigma: f64,
    /// One-based `T × N` assignment CSV; random after the control periods
    /// when unset.
    pub schedule: Option<PathBuf>,
    pub evaluate: bool,
}

impl Default for LtiSettings {
    fn default() -> Self {
        Self {
            units: 30,
            interventions: 2,
            beta: vec![vec![1.2, -0.3], vec![0.5, 0.4]],
            rho_init: vec![vec![1.0, 0.5], vec![-0.5, 1.0]],
            theta: None,
            omega: None,
            periods: 20,
            control_periods: 10,
            sigma: 0.0,
            schedule: None,
            evaluate: false,
        }
    }
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    pub repeats: usize,
    pub output_dir: PathBuf,
    pub estimators: Vec<Estimator>,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub m_core: usize,
    pub n_core: usize,
    /// Noise standard deviation added to the ratings.
    pub sigma: f64,
    /// Panel noise as a share of the signal's value range.
    pub noise_fraction: f64,
    /// Observation probability for the MCAR teaser.
    pub mcar_observe: f64,
    pub snn: SnnConfig,
    pub baselines: BaselineGrid,
    pub limited: CohortPropensitySpec,
    pub panel: PanelAdoptionSpec,
    pub lti: LtiSettings,
}

impl ExperimentConfig {
    /// Defaults for one experiment. `output_dir` is left empty.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let (m, n, r, m_core, n_core) = match kind {
            ExperimentKind::RecsysLimited => (80, 80, 5, 20, 20),
            ExperimentKind::RecsysGeneral => (80, 80, 5, 80, 30),
            ExperimentKind::TeaserMcar | ExperimentKind::TeaserLimitedMnar | ExperimentKind::TeaserGeneralMnar => {
                (80, 80, 5, 80, 30)
            }
            ExperimentKind::PanelSynthetic => (38, 31, 3, 38, 31),
            ExperimentKind::LtiSequential => (30, 40, 2, 30, 40),
        };
        let estimators = match kind {
            ExperimentKind::LtiSequential => vec![Estimator::Snn],
            k if k.is_teaser() => vec![Estimator::Snn, Estimator::Usvt, Estimator::SoftImpute],
            _ => vec![Estimator::Snn, Estimator::Knn, Estimator::Usvt, Estimator::SoftImpute],
        };
        let repeats = match kind {
            ExperimentKind::RecsysLimited | ExperimentKind::RecsysGeneral | ExperimentKind::PanelSynthetic => 10,
            _ => 1,
        };
        let mut snn = SnnConfig::default();
        match kind {
            ExperimentKind::PanelSynthetic => snn.rank_policy = RankPolicy::universal(),
            // noiseless by default, so every nonzero direction is signal
            ExperimentKind::LtiSequential => snn.rank_policy = RankPolicy::EnergyThreshold(1.0),
            _ => {}
        }
        Self {
            experiment: kind,
            master_seed: 0,
            repeats,
            output_dir: PathBuf::new(),
            estimators,
            m,
            n,
            r,
            m_core,
            n_core,
            sigma: 0.0,
            noise_fraction: 0.02,
            mcar_observe: 0.65,
            snn,
            baselines: BaselineGrid::default(),
            limited: if kind.is_teaser() {
                CohortPropensitySpec::default()
            } else {
                CohortPropensitySpec {
                    m_core,
                    n_core,
                    ..CohortPropensitySpec::default()
                }
            },
            panel: PanelAdoptionSpec::default(),
            lti: LtiSettings::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::parse(text, None)
    }

    /// Like [`Self::from_toml_str`], but an absent `experiment` key falls
    /// back to `fallback`.
    pub fn parse(text: &str, fallback: Option<ExperimentKind>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("config")
                .to_string();
            Error::Config { field, reason: msg }
        })?;
        raw.resolve(fallback)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with(path, None)
    }

    pub fn load_with(path: &Path, fallback: Option<ExperimentKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, fallback)
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_dir.as_os_str().is_empty() {
            return Err(config_err("output_dir", "required; set it in the config or pass --output"));
        }
        if self.repeats == 0 {
            return Err(config_err("repeats", "must be at least 1"));
        }
        if self.estimators.is_empty() {
            return Err(config_err("estimators", "must name at least one estimator"));
        }
        let mut seen = self.estimators.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.estimators.len() {
            return Err(config_err("estimators", "duplicate estimator"));
        }
        for (name, v) in [("dims.m", self.m), ("dims.n", self.n), ("dims.r", self.r)] {
            if v == 0 {
                return Err(config_err(name, "must be positive"));
            }
        }
        if self.m_core == 0 || self.m_core > self.m {
            return Err(config_err("dims.m_core", format!("must lie in 1..={}", self.m)));
        }
        if self.n_core == 0 || self.n_core > self.n {
            return Err(config_err("dims.n_core", format!("must lie in 1..={}", self.n)));
        }
        if self.experiment == ExperimentKind::PanelSynthetic && self.r > self.m.min(self.n) {
            return Err(config_err("dims.r", "exceeds the panel's smaller side"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(config_err("noise.sigma", "must be finite and nonnegative"));
        }
        if !(self.noise_fraction >= 0.0 && self.noise_fraction.is_finite()) {
            return Err(config_err("noise.fraction_of_range", "must be finite and nonnegative"));
        }
        if !(self.mcar_observe > 0.0 && self.mcar_observe <= 1.0) {
            return Err(config_err("teaser.mcar_observe", "must lie in (0, 1]"));
        }
        self.snn.validate().map_err(|e| prefixed("snn", e))?;
        let b = &self.baselines;
        if b.knn_k.is_empty() || b.knn_k.contains(&0) {
            return Err(config_err("baselines.knn_k", "need at least one value, all >= 1"));
        }
        if b.usvt_eta.is_empty() || b.usvt_eta.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(config_err("baselines.usvt_eta", "need at least one value, all in (0, 1]"));
        }
        if b.softimpute_lambda.as_ref().is_some_and(|l| l.is_empty() || l.iter().any(|&l| !(l >= 0.0))) {
            return Err(config_err("baselines.softimpute_lambda", "need at least one value, all >= 0"));
        }
        if b.softimpute_max_iter == 0 {
            return Err(config_err("baselines.softimpute_max_iter", "must be at least 1"));
        }
        if !(b.softimpute_tol > 0.0) {
            return Err(config_err("baselines.softimpute_tol", "must be positive"));
        }
        if !(b.holdout_fraction > 0.0 && b.holdout_fraction < 1.0) {
            return Err(config_err("baselines.holdout_fraction", "must lie in (0, 1)"));
        }
        if matches!(self.experiment, ExperimentKind::RecsysLimited | ExperimentKind::TeaserLimitedMnar) {
            if self.limited.m_core == 0 || self.limited.m_core > self.m {
                return Err(config_err("limited.m_core", format!("must lie in 1..={}", self.m)));
            }
            if self.limited.n_core == 0 || self.limited.n_core > self.n {
                return Err(config_err("limited.n_core", format!("must lie in 1..={}", self.n)));
            }
            self.limited.validate().map_err(|e| prefixed("limited", e))?;
        }
        if self.experiment == ExperimentKind::PanelSynthetic {
            let p = &self.panel;
            if p.pre_periods == 0 || p.pre_periods >= self.n {
                return Err(config_err("panel.pre_periods", format!("must lie in 1..{}", self.n)));
            }
            for (name, v) in [("panel.mild", p.mild), ("panel.moderate", p.moderate), ("panel.severe", p.severe)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(config_err(name, "must lie in [0, 1]"));
                }
            }
        }
        if self.experiment == ExperimentKind::LtiSequential {
            self.validate_lti()?;
        }
        Ok(())
    }

    fn validate_lti(&self) -> Result<()> {
        let l = &self.lti;
        if l.units == 0 {
            return Err(config_err("lti.units", "must be positive"));
        }
        if l.interventions == 0 {
            return Err(config_err("lti.interventions", "must be positive"));
        }
        if l.periods == 0 {
            return Err(config_err("lti.periods", "must be positive"));
        }
        if l.control_periods > l.periods {
            return Err(config_err("lti.control_periods", "cannot exceed lti.periods"));
        }
        if !(l.sigma >= 0.0 && l.sigma.is_finite()) {
            return Err(config_err("lti.sigma", "must be finite and nonnegative"));
        }
        let g = l.beta.first().map_or(0, Vec::len);
        if g == 0 || l.beta.iter().any(|row| row.len() != g) {
            return Err(config_err("lti.beta", "need a nonempty R x G table with equal row lengths"));
        }
        if l.rho_init.len() != l.beta.len() || l.rho_init.iter().any(|row| row.len() != g) {
            return Err(config_err("lti.rho_init", format!("must be {} x {g} like lti.beta", l.beta.len())));
        }
        let r = l.beta.len();
        for (name, table, rows) in [("lti.theta", &l.theta, l.units), ("lti.omega", &l.omega, l.interventions)] {
            if let Some(t) = table {
                if t.len() != rows || t.iter().any(|row| row.len() != r) {
                    return Err(config_err(name, format!("must be {rows} x {r}")));
                }
            }
        }
        Ok(())
    }

    /// Human-readable dump written next to simulated data.
    pub fn describe(&self) -> String {
        let names: Vec<&str> = self.estimators.iter().map(|e| e.as_str()).collect();
        let mut out = format!(
            "experiment = {}\nmaster_seed = {}\nrepeats = {}\nestimators = {}\nm = {}\nn = {}\nr = {}\nm_core = {}\nn_core = {}\nsigma = {}\nnoise_fraction = {}\nmcar_observe = {}\nsnn.rank_policy = {}\nsnn.k_folds = {:?}\n",
            self.experiment,
            self.master_seed,
            self.repeats,
            names.join(","),
            self.m,
            self.n,
            self.r,
            self.m_core,
            self.n_core,
            self.sigma,
            self.noise_fraction,
            self.mcar_observe,
            self.snn.rank_policy,
            self.snn.k_folds,
        );
        match self.experiment {
            ExperimentKind::RecsysLimited | ExperimentKind::TeaserLimitedMnar => {
                let l = &self.limited;
                out.push_str(&format!(
                    "limited.threshold = {}\nlimited.alpha = {:?}\nlimited.target = {:?}\n",
                    l.threshold, l.alpha, l.target
                ));
            }
            ExperimentKind::PanelSynthetic => out.push_str(&format!("panel = {:?}\n", self.panel)),
            ExperimentKind::LtiSequential => out.push_str(&format!("lti = {:?}\n", self.lti)),
            _ => {}
        }
        out
    }
}

fn prefixed(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => config_err(&format!("{section}.{name}"), reason),
        other => config_err(section, other.to_string()),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<String>,
    master_seed: Option<u64>,
    repeats: Option<usize>,
    output_dir: Option<PathBuf>,
    estimators: Option<Vec<String>>,
    #[serde(default)]
    dims: RawDims,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default)]
    teaser: RawTeaser,
    #[serde(default)]
    snn: RawSnn,
    #[serde(default)]
    baselines: RawBaselines,
    #[serde(default)]
    limited: RawLimited,
    #[serde(default)]
    panel: RawPanel,
    #[serde(default)]
    lti: RawLti,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDims {
    m: Option<usize>,
    n: Option<usize>,
    r: Option<usize>,
    m_core: Option<usize>,
    n_core: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    sigma: Option<f64>,
    fraction_of_range: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTeaser {
    mcar_observe: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawK {
    Count(usize),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSnn {
    rank_policy: Option<String>,
    k_folds: Option<RawK>,
    min_anchor_rows: Option<usize>,
    ci_level: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawLambda {
    List(Vec<f64>),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBaselines {
    knn_k: Option<Vec<usize>>,
    usvt_eta: Option<Vec<f64>>,
    softimpute_lambda: Option<RawLambda>,
    softimpute_max_iter: Option<usize>,
    softimpute_tol: Option<f64>,
    holdout_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCohorts {
    core: Option<f64>,
    user: Option<f64>,
    item: Option<f64>,
    standard: Option<f64>,
}

impl RawCohorts {
    fn apply(&self, base: &mut Cohorts<f64>) {
        if let Some(v) = self.core {
            base.core = v;
        }
        if let Some(v) = self.user {
            base.user = v;
        }
        if let Some(v) = self.item {
            base.item = v;
        }
        if let Some(v) = self.standard {
            base.standard = v;
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLimited {
    m_core: Option<usize>,
    n_core: Option<usize>,
    threshold: Option<f64>,
    #[serde(default)]
    alpha: RawCohorts,
    #[serde(default)]
    target: RawCohorts,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPanel {
    pre_periods: Option<usize>,
    mild: Option<f64>,
    moderate: Option<f64>,
    severe: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLti {
    units: Option<usize>,
    interventions: Option<usize>,
    beta: Option<Vec<Vec<f64>>>,
    rho_init: Option<Vec<Vec<f64>>>,
    theta: Option<Vec<Vec<f64>>>,
    omega: Option<Vec<Vec<f64>>>,
    periods: Option<usize>,
    control_periods: Option<usize>,
    sigma: Option<f64>,
    schedule: Option<PathBuf>,
    evaluate: Option<bool>,
}

impl RawConfig {
    fn resolve(self, fallback: Option<ExperimentKind>) -> Result<ExperimentConfig> {
        let kind: ExperimentKind = match (self.experiment.as_deref(), fallback) {
            (Some(name), _) => name.parse()?,
            (None, Some(kind)) => kind,
            (None, None) => return Err(config_err("experiment", "required")),
        };
        let mut cfg = ExperimentConfig::defaults(kind);
        if let Some(v) = self.master_seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.repeats {
            cfg.repeats = v;
        }
        if let Some(v) = self.output_dir {
            cfg.output_dir = v;
        }
        if let Some(list) = self.estimators {
            cfg.estimators = list.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }

        let d = self.dims;
        cfg.m = d.m.unwrap_or(cfg.m);
        cfg.n = d.n.unwrap_or(cfg.n);
        cfg.r = d.r.unwrap_or(cfg.r);
        // cores follow the matrix size when the matrix is resized without them
        cfg.m_core = d.m_core.unwrap_or(cfg.m_core.min(cfg.m));
        cfg.n_core = d.n_core.unwrap_or(cfg.n_core.min(cfg.n));
        if matches!(kind, ExperimentKind::RecsysGeneral | ExperimentKind::PanelSynthetic) && d.m_core.is_none() {
            cfg.m_core = cfg.m;
        }
        if kind == ExperimentKind::PanelSynthetic && d.n_core.is_none() {
            cfg.n_core = cfg.n;
        }

        cfg.sigma = self.noise.sigma.unwrap_or(cfg.sigma);
        cfg.noise_fraction = self.noise.fraction_of_range.unwrap_or(cfg.noise_fraction);
        cfg.mcar_observe = self.teaser.mcar_observe.unwrap_or(cfg.mcar_observe);

        let s = self.snn;
        if let Some(text) = s.rank_policy {
            cfg.snn.rank_policy = text.parse().map_err(|e: Error| config_err("snn.rank_policy", e.to_string()))?;
        }
        if let Some(k) = s.k_folds {
            cfg.snn.k_folds = match k {
                RawK::Count(k) => KFolds::Fixed(k),
                RawK::Word(w) if w == "auto" => KFolds::Auto,
                RawK::Word(w) => return Err(config_err("snn.k_folds", format!("expected a count or \"auto\", got {w:?}"))),
            };
        }
        cfg.snn.min_anchor_rows = s.min_anchor_rows.unwrap_or(cfg.snn.min_anchor_rows);
        cfg.snn.ci_level = s.ci_level.unwrap_or(cfg.snn.ci_level);

        let b = self.baselines;
        let grid = &mut cfg.baselines;
        grid.knn_k = b.knn_k.unwrap_or(grid.knn_k.clone());
        grid.usvt_eta = b.usvt_eta.unwrap_or(grid.usvt_eta.clone());
        match b.softimpute_lambda {
            None => {}
            Some(RawLambda::List(list)) => grid.softimpute_lambda = Some(list),
            Some(RawLambda::Word(w)) if w == "auto" => grid.softimpute_lambda = None,
            Some(RawLambda::Word(w)) => {
                return Err(config_err("baselines.softimpute_lambda", format!("expected a list or \"auto\", got {w:?}")))
            }
        }
        grid.softimpute_max_iter = b.softimpute_max_iter.unwrap_or(grid.softimpute_max_iter);
        grid.softimpute_tol = b.softimpute_tol.unwrap_or(grid.softimpute_tol);
        grid.holdout_fraction = b.holdout_fraction.unwrap_or(grid.holdout_fraction);

        // cohorts follow the factor cores except in the teasers, whose
        // ratings are built like the general setting
        if !kind.is_teaser() {
            cfg.limited.m_core = cfg.m_core;
            cfg.limited.n_core = cfg.n_core;
        }
        cfg.limited.m_core = self.limited.m_core.unwrap_or(cfg.limited.m_core);
        cfg.limited.n_core = self.limited.n_core.unwrap_or(cfg.limited.n_core);
        cfg.limited.threshold = self.limited.threshold.unwrap_or(cfg.limited.threshold);
        self.limited.alpha.apply(&mut cfg.limited.alpha);
        self.limited.target.apply(&mut cfg.limited.target);

        let p = self.panel;
        cfg.panel.pre_periods = p.pre_periods.unwrap_or(cfg.panel.pre_periods);
        cfg.panel.mild = p.mild.unwrap_or(cfg.panel.mild);
        cfg.panel.moderate = p.moderate.unwrap_or(cfg.panel.moderate);
        cfg.panel.severe = p.severe.unwrap_or(cfg.panel.severe);

        let l = self.lti;
        let lti = &mut cfg.lti;
        lti.units = l.units.unwrap_or(lti.units);
        lti.interventions = l.interventions.unwrap_or(lti.interventions);
        lti.beta = l.beta.unwrap_or(lti.beta.clone());
        lti.rho_init = l.rho_init.unwrap_or(lti.rho_init.clone());
        lti.theta = l.theta.or(lti.theta.take());
        lti.omega = l.omega.or(lti.omega.take());
        lti.periods = l.periods.unwrap_or(lti.periods);
        lti.control_periods = l.control_periods.unwrap_or(lti.control_periods);
        lti.sigma = l.sigma.unwrap_or(lti.sigma);
        lti.schedule = l.schedule.or(lti.schedule.take());
        lti.evaluate = l.evaluate.unwrap_or(lti.evaluate);
        if kind == ExperimentKind::LtiSequential {
            cfg.m = lti.units;
            cfg.n = lti.periods * lti.interventions;
            cfg.r = lti.beta.len();
            cfg.m_core = cfg.m;
            cfg.n_core = cfg.n;
        }
        Ok(cfg)
    }
}
