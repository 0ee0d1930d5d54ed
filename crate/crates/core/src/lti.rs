//! Spatio-temporal factor model as a linear dynamical system.
//!
//! Each latent time factor `ρ_r` follows a linear recurrence of order `G`,
//! written as a companion block. Unit-by-intervention innovations are
//! `Δ_(n,i)(t) = Σ_r θ_(n,r) ω_(i,r) ρ_r(t)`, and each unit accumulates the
//! innovation of the intervention it receives.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_text};
use crate::matrix::MaskedMatrix;

/// Spectral radius above which [`simulate`] warns about growth.
pub const UNSTABLE_RADIUS: f64 = 1.05;

/// Recurrence coefficients and initial values per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LrfSpec {
    /// `R × G`; row `r` holds `β_(r,1), …, β_(r,G)`.
    pub beta: DMatrix<f64>,
    /// `R × G`; row `r` holds `ρ_r(G−1), …, ρ_r(0)`, newest first.
    pub rho_init: DMatrix<f64>,
}

impl LrfSpec {
    pub fn factors(&self) -> usize {
        self.beta.nrows()
    }

    pub fn lags(&self) -> usize {
        self.beta.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.nrows() == 0 || self.beta.ncols() == 0 {
            return Err(Error::param("beta", "need at least one factor and one lag"));
        }
        if self.rho_init.shape() != self.beta.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.beta.shape(),
                actual: self.rho_init.shape(),
            });
        }
        if self.beta.iter().chain(self.rho_init.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

/// `G × G` companion matrix: first row `beta`, ones on the sub-diagonal.
pub fn companion_block(beta: &[f64]) -> Result<DMatrix<f64>> {
    let g = beta.len();
    if g == 0 {
        return Err(Error::param("beta", "empty coefficient list"));
    }
    let mut a = DMatrix::zeros(g, g);
    for (k, &b) in beta.iter().enumerate() {
        a[(0, k)] = b;
    }
    for k in 1..g {
        a[(k, k - 1)] = 1.0;
    }
    Ok(a)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    let dense = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    match dense.eigenvalues() {
        Ok(ev) => ev.iter().map(|z| z.re.hypot(z.im)).fold(0.0, f64::max),
        Err(_) => f64::NAN,
    }
}

/// System matrices and current state.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiFactorSystem {
    /// `RG × RG`, block-diagonal companion blocks.
    pub a: DMatrix<f64>,
    /// `NI × RG`; row `n·I + i` holds `θ_(n,r) ω_(i,r)` at column `r·G`.
    pub b: DMatrix<f64>,
    /// `N × R` unit loadings.
    pub theta: DMatrix<f64>,
    /// `I × R` intervention loadings.
    pub omega: DMatrix<f64>,
    /// State: per factor, `(ρ(t), …, ρ(t−G+1))`.
    pub x: DVector<f64>,
    /// Cumulative outcome per unit.
    pub m: DVector<f64>,
    pub lags: usize,
}

impl LtiFactorSystem {
    pub fn units(&self) -> usize {
        self.theta.nrows()
    }

    pub fn interventions(&self) -> usize {
        self.omega.nrows()
    }

    pub fn factors(&self) -> usize {
        self.theta.ncols()
    }

    /// Current `ρ_r(t)` for every factor.
    pub fn rho(&self) -> DVector<f64> {
        DVector::from_fn(self.factors(), |r, _| self.x[r * self.lags])
    }

    /// Full innovation vector `B X`, indexed `n·I + i`.
    pub fn innovations(&self) -> DVector<f64> {
        &self.b * &self.x
    }

    /// Spectral radius of each companion block.
    pub fn block_radii(&self) -> Vec<f64> {
        let g = self.lags;
        (0..self.factors())
            .map(|r| spectral_radius(&self.a.view((r * g, r * g), (g, g)).into_owned()))
            .collect()
    }

    /// Messages for blocks whose spectral radius exceeds [`UNSTABLE_RADIUS`].
    pub fn stability_warnings(&self) -> Vec<String> {
        self.block_radii()
            .into_iter()
            .enumerate()
            .filter(|(_, rad)| *rad > UNSTABLE_RADIUS)
            .map(|(r, rad)| format!("factor {r} recurrence has spectral radius {rad:.4} > {UNSTABLE_RADIUS}"))
            .collect()
    }
}

pub fn build_system(spec: &LrfSpec, theta: &DMatrix<f64>, omega: &DMatrix<f64>) -> Result<LtiFactorSystem> {
    spec.validate()?;
    let (r, g) = spec.beta.shape();
    if theta.ncols() != r {
        return Err(Error::ShapeMismatch {
            expected: (theta.nrows(), r),
            actual: theta.shape(),
        });
    }
    if omega.ncols() != r {
        return Err(Error::ShapeMismatch {
            expected: (omega.nrows(), r),
            actual: omega.shape(),
        });
    }
    let (n, i_count) = (theta.nrows(), omega.nrows());
    let mut a = DMatrix::zeros(r * g, r * g);
    let mut x = DVector::zeros(r * g);
    for f in 0..r {
        let beta: Vec<f64> = spec.beta.row(f).iter().copied().collect();
        a.view_mut((f * g, f * g), (g, g)).copy_from(&companion_block(&beta)?);
        for k in 0..g {
            x[f * g + k] = spec.rho_init[(f, k)];
        }
    }
    let mut b = DMatrix::zeros(n * i_count, r * g);
    for unit in 0..n {
        for i in 0..i_count {
            for f in 0..r {
                b[(unit * i_count + i, f * g)] = theta[(unit, f)] * omega[(i, f)];
            }
        }
    }
    Ok(LtiFactorSystem {
        a,
        b,
        theta: theta.clone(),
        omega: omega.clone(),
        x,
        m: DVector::zeros(n),
        lags: g,
    })
}

/// Advances the state one period: `X ← A X`.
pub fn step(sys: &mut LtiFactorSystem) -> &DVector<f64> {
    sys.x = &sys.a * &sys.x;
    &sys.x
}

/// `N × NI` matrix picking each unit's applied intervention.
pub fn selection_matrix(assignment: &[usize], interventions: usize) -> Result<DMatrix<f64>> {
    let n = assignment.len();
    let mut c = DMatrix::zeros(n, n * interventions);
    for (unit, &i) in assignment.iter().enumerate() {
        if i >= interventions {
            return Err(Error::param(
                "assignment",
                format!("unit {unit} has intervention {i}, only {interventions} exist"),
            ));
        }
        c[(unit, unit * interventions + i)] = 1.0;
    }
    Ok(c)
}

/// One step of the augmented system `[M; X] ← [[I, C B A], [0, A]] [M; X]`.
pub fn augmented_step(
    sys: &LtiFactorSystem,
    m: &DVector<f64>,
    x: &DVector<f64>,
    c: &DMatrix<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = sys.units();
    if m.len() != n || x.len() != sys.a.nrows() || c.shape() != (n, sys.b.nrows()) {
        return Err(Error::ShapeMismatch {
            expected: (n, sys.b.nrows()),
            actual: c.shape(),
        });
    }
    let x_next = &sys.a * x;
    let m_next = m + c * (&sys.b * &x_next);
    Ok((m_next, x_next))
}

/// Per-period intervention indices, `T × N`, zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterventionSchedule {
    pub assignments: Vec<Vec<usize>>,
}

impl InterventionSchedule {
    /// Same intervention for every unit and period.
    pub fn constant(periods: usize, units: usize, i: usize) -> Self {
        Self {
            assignments: vec![vec![i; units]; periods],
        }
    }

    pub fn periods(&self) -> usize {
        self.assignments.len()
    }

    pub fn validate(&self, units: usize, interventions: usize) -> Result<()> {
        for (t, row) in self.assignments.iter().enumerate() {
            if row.len() != units {
                return Err(Error::param(
                    "schedule",
                    format!("period {} lists {} units, expected {units}", t + 1, row.len()),
                ));
            }
            for (n, &i) in row.iter().enumerate() {
                if i >= interventions {
                    return Err(Error::param(
                        "schedule",
                        format!(
                            "cell (t={}, n={}) has intervention {}, valid range 1..={interventions}",
                            t + 1,
                            n + 1,
                            i + 1
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Parses `T` rows of `N` one-based indices.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut assignments = Vec::new();
        for (t, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .enumerate()
                .map(|(n, cell)| match cell.trim().parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(Error::Parse {
                        row: t,
                        col: n,
                        text: cell.to_string(),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            assignments.push(row);
        }
        Ok(Self { assignments })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    /// One-based CSV, one period per line.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for row in &self.assignments {
            let cells: Vec<String> = row.iter().map(|i| (i + 1).to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Output of [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    /// One `N × T` innovation slice per intervention.
    pub delta: Vec<DMatrix<f64>>,
    /// `N × T` cumulative outcomes.
    pub m_path: DMatrix<f64>,
    /// Rows are units; column `t·I + i` is period `t` under intervention `i`.
    pub observed: MaskedMatrix,
    pub warnings: Vec<String>,
}

impl Simulation {
    /// Innovation slices as stacked CSV blocks with header comments.
    pub fn delta_csv(&self) -> String {
        let mut out = String::new();
        for (i, slice) in self.delta.iter().enumerate() {
            out.push_str(&format!(
                "# intervention {} ({} units x {} periods)\n",
                i + 1,
                slice.nrows(),
                slice.ncols()
            ));
            for row in slice.row_iter() {
                let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn write_delta_csv(&self, path: &Path) -> Result<()> {
        write_text(path, &self.delta_csv())
    }
}

/// Runs `periods` steps. Each unit's outcome accumulates the noiseless
/// innovation of its assigned intervention; the observed matrix records
/// that innovation plus `N(0, sigma²)` noise.
pub fn simulate<R: Rng + ?Sized>(
    sys: &mut LtiFactorSystem,
    schedule: &InterventionSchedule,
    periods: usize,
    sigma: f64,
    rng: &mut R,
) -> Result<Simulation> {
    if periods == 0 {
        return Err(Error::param("periods", "horizon must be at least 1"));
    }
    if !(sigma >= 0.0) {
        return Err(Error::param("sigma", format!("must be nonnegative, got {sigma}")));
    }
    let (n, i_count) = (sys.units(), sys.interventions());
    if schedule.periods() < periods {
        return Err(Error::param(
            "schedule",
            format!("covers {} periods, {periods} requested", schedule.periods()),
        ));
    }
    schedule.validate(n, i_count)?;
    let warnings = sys.stability_warnings();
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut delta = vec![DMatrix::zeros(n, periods); i_count];
    let mut m_path = DMatrix::zeros(n, periods);
    let mut values = DMatrix::from_element(n, periods * i_count, f64::NAN);
    let mut mask = DMatrix::from_element(n, periods * i_count, false);
    for t in 0..periods {
        step(sys);
        let full = sys.innovations();
        for unit in 0..n {
            for i in 0..i_count {
                delta[i][(unit, t)] = full[unit * i_count + i];
            }
            let i = schedule.assignments[t][unit];
            let d = full[unit * i_count + i];
            sys.m[unit] += d;
            m_path[(unit, t)] = sys.m[unit];
            let noise: f64 = if sigma > 0.0 {
                sigma * Distribution::<f64>::sample(&StandardNormal, rng)
            } else {
                0.0
            };
            values[(unit, t * i_count + i)] = d + noise;
            mask[(unit, t * i_count + i)] = true;
        }
    }
    Ok(Simulation {
        delta,
        m_path,
        observed: MaskedMatrix::new(values, mask)?,
        warnings,
    })
}
