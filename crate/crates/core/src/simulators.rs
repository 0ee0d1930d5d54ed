//! Ground-truth signals and missingness mechanisms.
//!
//! Every generator takes an explicit RNG, so identical seeds give
//! bit-identical outputs.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};

/// Latent factors and the signal they generate.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    /// `m × r` row factors.
    pub u: DMatrix<f64>,
    /// `n × r` column factors.
    pub v: DMatrix<f64>,
    /// `U Vᵀ`, possibly rescaled.
    pub a: DMatrix<f64>,
    pub r: usize,
}

impl FactorPair {
    pub fn new(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        if u.ncols() != v.ncols() {
            return Err(Error::ShapeMismatch {
                expected: (v.nrows(), u.ncols()),
                actual: v.shape(),
            });
        }
        let a = &u * v.transpose();
        Ok(Self { r: u.ncols(), u, v, a })
    }

    /// Rescales `a` affinely onto `[lo, hi]`.
    pub fn scaled(mut self, lo: f64, hi: f64) -> Self {
        self.a = scale_to_range(&self.a, lo, hi);
        self
    }
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `rows × k` matrix whose rows are independent Dirichlet(1, …, 1) draws.
pub fn dirichlet_weights<R: Rng + ?Sized>(rows: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(rows, k);
    for i in 0..rows {
        if k == 1 {
            w[(i, 0)] = 1.0;
            continue;
        }
        let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        for (c, d) in draws.into_iter().enumerate() {
            w[(i, c)] = d / total;
        }
    }
    w
}

/// Core-factor construction: `m_core` Gaussian rows, the remaining rows
/// Dirichlet mixtures of them. Also returns the `(m − m_core) × m_core`
/// mixture weights.
pub fn gen_core_factors_with_weights<R: Rng + ?Sized>(
    m: usize,
    m_core: usize,
    r: usize,
    rng: &mut R,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if m_core == 0 || m_core > m {
        return Err(Error::param("m_core", format!("need 1 <= m_core <= {m}, got {m_core}")));
    }
    if r == 0 {
        return Err(Error::param("r", "rank must be at least 1"));
    }
    let core = gaussian_matrix(m_core, r, rng);
    let weights = dirichlet_weights(m - m_core, m_core, rng);
    let mixed = &weights * &core;
    let mut out = DMatrix::zeros(m, r);
    out.rows_mut(0, m_core).copy_from(&core);
    out.rows_mut(m_core, m - m_core).copy_from(&mixed);
    Ok((out, weights))
}

pub fn gen_core_factors<R: Rng + ?Sized>(m: usize, m_core: usize, r: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    gen_core_factors_with_weights(m, m_core, r, rng).map(|(f, _)| f)
}

/// Affine map sending `min(a)` to `lo` and `max(a)` to `hi`. A constant
/// matrix maps to the midpoint.
pub fn scale_to_range(a: &DMatrix<f64>, lo: f64, hi: f64) -> DMatrix<f64> {
    assert!(hi > lo, "empty range [{lo}, {hi}]");
    let min = a.min();
    let max = a.max();
    if !(max > min) {
        return a.map(|_| 0.5 * (lo + hi));
    }
    let slope = (hi - lo) / (max - min);
    a.map(|x| (lo + (x - min) * slope).clamp(lo, hi))
}

/// Independent Bernoulli(`p`) observation mask.
pub fn mcar_mask<R: Rng + ?Sized>(m: usize, n: usize, p: f64, rng: &mut R) -> Result<DMatrix<bool>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param("p", format!("observation probability must lie in (0, 1], got {p}")));
    }
    Ok(DMatrix::from_fn(m, n, |_, _| rng.random::<f64>() < p))
}

/// One value per cohort of the core/standard split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cohorts<T> {
    /// Core rows and core columns.
    pub core: T,
    /// Core rows and standard columns.
    pub user: T,
    /// Standard rows and core columns.
    pub item: T,
    /// Standard rows and standard columns.
    pub standard: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cohort {
    Core,
    User,
    Item,
    Standard,
}

impl Cohort {
    pub const ALL: [Cohort; 4] = [Cohort::Core, Cohort::User, Cohort::Item, Cohort::Standard];

    pub fn of(i: usize, j: usize, m_core: usize, n_core: usize) -> Cohort {
        match (i < m_core, j < n_core) {
            (true, true) => Cohort::Core,
            (true, false) => Cohort::User,
            (false, true) => Cohort::Item,
            (false, false) => Cohort::Standard,
        }
    }
}

impl<T: Copy> Cohorts<T> {
    pub fn get(&self, c: Cohort) -> T {
        match c {
            Cohort::Core => self.core,
            Cohort::User => self.user,
            Cohort::Item => self.item,
            Cohort::Standard => self.standard,
        }
    }
}

/// Rating-dependent propensities on a `[1, 5]` scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortPropensitySpec {
    pub m_core: usize,
    pub n_core: usize,
    pub threshold: f64,
    pub alpha: Cohorts<f64>,
    /// Target observed fraction per cohort.
    pub target: Cohorts<f64>,
}

impl Default for CohortPropensitySpec {
    fn default() -> Self {
        Self {
            m_core: 20,
            n_core: 20,
            threshold: 2.3,
            alpha: Cohorts {
                core: 0.7,
                user: 0.35,
                item: 0.35,
                standard: 0.1,
            },
            target: Cohorts {
                core: 0.9,
                user: 0.7,
                item: 0.7,
                standard: 0.05,
            },
        }
    }
}

impl CohortPropensitySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 1.0 && self.threshold < 5.0) {
            return Err(Error::param("threshold", format!("must lie in (1, 5), got {}", self.threshold)));
        }
        for c in Cohort::ALL {
            let a = self.alpha.get(c);
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::param("alpha", format!("{c:?} alpha {a} outside (0, 1]")));
            }
            let t = self.target.get(c);
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::param("target", format!("{c:?} fraction {t} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Bisection steps used to calibrate each cohort's scale.
pub const KAPPA_ITERATIONS: usize = 60;

/// Propensities `κ·α^(A−1)` below the threshold and `κ·α^(5−A)` above, with
/// one `κ` per cohort calibrated so the cohort mean of `min(κ·base, 1)` hits
/// the target fraction.
pub fn limited_mnar_propensity(a: &DMatrix<f64>, spec: &CohortPropensitySpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if a.iter().any(|&x| !(1.0..=5.0).contains(&x)) {
        return Err(Error::param("A", "entries must lie in [1, 5]"));
    }
    let (m, n) = a.shape();
    let cohort = |i, j| Cohort::of(i, j, spec.m_core, spec.n_core);
    let base = DMatrix::from_fn(m, n, |i, j| {
        let alpha = spec.alpha.get(cohort(i, j));
        let x = a[(i, j)];
        if x <= spec.threshold {
            alpha.powf(x - 1.0)
        } else {
            alpha.powf(5.0 - x)
        }
    });

    let mut p = DMatrix::zeros(m, n);
    for c in Cohort::ALL {
        let cells: Vec<(usize, usize)> = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| cohort(i, j) == c)
            .collect();
        if cells.is_empty() {
            continue;
        }
        let target = spec.target.get(c);
        let values: Vec<f64> = cells.iter().map(|&ij| base[ij]).collect();
        let kappa = calibrate_kappa(&values, target);
        let clipped = values.iter().filter(|&&b| kappa * b >= 1.0).count();
        if 2 * clipped > values.len() {
            return Err(Error::Infeasible(format!(
                "{c:?} cohort target {target} clips {clipped} of {} cells at 1",
                values.len()
            )));
        }
        for (&ij, b) in cells.iter().zip(values) {
            p[ij] = (kappa * b).min(1.0);
        }
    }
    Ok(p)
}

fn calibrate_kappa(base: &[f64], target: f64) -> f64 {
    let mean = |k: f64| base.iter().map(|b| (k * b).min(1.0)).sum::<f64>() / base.len() as f64;
    let min_base = base.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (0.0, 1.0 / min_base);
    for _ in 0..KAPPA_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mean(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Independent Bernoulli(`P[i, j]`) cells.
pub fn sample_mask<R: Rng + ?Sized>(p: &DMatrix<f64>, rng: &mut R) -> DMatrix<bool> {
    p.map(|pij| rng.random::<f64>() < pij)
}

/// Index of the largest entry of row `i`; ties go to the lowest index.
pub fn row_argmax(m: &DMatrix<f64>, i: usize) -> usize {
    let mut best = 0;
    for k in 1..m.ncols() {
        if m[(i, k)] > m[(i, best)] {
            best = k;
        }
    }
    best
}

/// Core columns are always observed; other columns are observed exactly by
/// rows whose favorite factor matches the column's dominant factor.
pub fn general_mnar_mask(u: &DMatrix<f64>, v: &DMatrix<f64>, n_core: usize) -> DMatrix<bool> {
    let user_genre: Vec<usize> = (0..u.nrows()).map(|i| row_argmax(u, i)).collect();
    let item_genre: Vec<usize> = (0..v.nrows()).map(|j| row_argmax(v, j)).collect();
    DMatrix::from_fn(u.nrows(), v.nrows(), |i, j| j < n_core || user_genre[i] == item_genre[j])
}

/// Adoption probabilities by the direction of a unit's change.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelAdoptionSpec {
    pub pre_periods: usize,
    pub mild: f64,
    pub moderate: f64,
    pub severe: f64,
}

impl Default for PanelAdoptionSpec {
    fn default() -> Self {
        Self {
            pre_periods: 18,
            mild: 0.1,
            moderate: 0.3,
            severe: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Mild,
    Moderate,
    Severe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelAdoption {
    pub mask: DMatrix<bool>,
    pub severity: Vec<Severity>,
    pub adopted: Vec<bool>,
}

/// Classifies units by `mean(post) − mean(pre)` against one standard
/// deviation (population) around the cross-unit mean, then drops the post
/// block of every adopting unit.
pub fn panel_adoption_mask<R: Rng + ?Sized>(
    y: &DMatrix<f64>,
    spec: &PanelAdoptionSpec,
    rng: &mut R,
) -> Result<PanelAdoption> {
    let (m, t) = y.shape();
    if spec.pre_periods == 0 || spec.pre_periods >= t {
        return Err(Error::param(
            "pre_periods",
            format!("need 1 <= pre_periods < {t}, got {}", spec.pre_periods),
        ));
    }
    for (name, p) in [("mild", spec.mild), ("moderate", spec.moderate), ("severe", spec.severe)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("adoption", format!("{name} probability {p} outside [0, 1]")));
        }
    }
    let pre = spec.pre_periods;
    let change: Vec<f64> = (0..m)
        .map(|i| {
            let row = y.row(i);
            let before = row.columns(0, pre).mean();
            let after = row.columns(pre, t - pre).mean();
            after - before
        })
        .collect();
    let mean = change.iter().sum::<f64>() / m as f64;
    let std = (change.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / m as f64).sqrt();
    let severity: Vec<Severity> = change
        .iter()
        .map(|&c| {
            if c >= mean + std {
                Severity::Mild
            } else if c <= mean - std {
                Severity::Severe
            } else {
                Severity::Moderate
            }
        })
        .collect();
    let adopted: Vec<bool> = severity
        .iter()
        .map(|s| {
            let p = match s {
                Severity::Mild => spec.mild,
                Severity::Moderate => spec.moderate,
                Severity::Severe => spec.severe,
            };
            rng.random::<f64>() < p
        })
        .collect();
    let mask = DMatrix::from_fn(m, t, |i, j| !(adopted[i] && j >= pre));
    Ok(PanelAdoption {
        mask,
        severity,
        adopted,
    })
}

/// Low-rank unit × period panel: Gaussian unit loadings against random-walk
/// period factors, rescaled to `[lo, hi]`.
pub fn synthetic_panel<R: Rng + ?Sized>(
    units: usize,
    periods: usize,
    r: usize,
    (lo, hi): (f64, f64),
    rng: &mut R,
) -> Result<FactorPair> {
    if r == 0 || units == 0 || periods == 0 {
        return Err(Error::param("panel", "dimensions and rank must be positive"));
    }
    let u = gaussian_matrix(units, r, rng);
    let steps = gaussian_matrix(periods, r, rng);
    let mut v = DMatrix::zeros(periods, r);
    for k in 0..r {
        let mut level = 0.0;
        for t in 0..periods {
            level += steps[(t, k)];
            v[(t, k)] = level;
        }
    }
    Ok(FactorPair::new(u, v)?.scaled(lo, hi))
}

/// `a` plus iid `N(0, sigma²)` noise.
pub fn add_noise<R: Rng + ?Sized>(a: &DMatrix<f64>, sigma: f64, rng: &mut R) -> Result<DMatrix<f64>> {
    if !(sigma >= 0.0) {
        return Err(Error::param("sigma", format!("must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(a.clone());
    }
    Ok(a.map(|x| {
        let z: f64 = StandardNormal.sample(rng);
        x + sigma * z
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::svd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn pure_gaussian_block_is_centered() {
        let f = gen_core_factors(100, 100, 10, &mut rng(1)).unwrap();
        let mean = f.mean();
        let bound = 5.0 / (1000f64).sqrt();
        assert!(mean.abs() < bound, "{mean}");
    }

    #[test]
    fn single_core_row_is_copied() {
        let f = gen_core_factors(6, 1, 3, &mut rng(2)).unwrap();
        for i in 1..6 {
            assert_eq!(f.row(i), f.row(0));
        }
    }

    #[test]
    fn mixtures_are_convex() {
        let (f, w) = gen_core_factors_with_weights(30, 8, 4, &mut rng(3)).unwrap();
        for i in 0..w.nrows() {
            assert!(w.row(i).iter().all(|&x| x >= 0.0));
            assert!((w.row(i).sum() - 1.0).abs() < 1e-12);
        }
        let rebuilt = &w * f.rows(0, 8);
        assert!((rebuilt - f.rows(8, 22)).amax() < 1e-12);
    }

    #[test]
    fn factor_bounds_rejected() {
        assert!(gen_core_factors(5, 0, 2, &mut rng(0)).is_err());
        assert!(gen_core_factors(5, 6, 2, &mut rng(0)).is_err());
        assert!(gen_core_factors(5, 2, 0, &mut rng(0)).is_err());
    }

    #[test]
    fn scaling() {
        let c = DMatrix::from_element(2, 2, 3.0);
        assert_eq!(scale_to_range(&c, 1.0, 5.0), DMatrix::from_element(2, 2, 3.0));
        let a = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        assert_eq!(scale_to_range(&a, 1.0, 5.0), DMatrix::from_row_slice(1, 2, &[1.0, 5.0]));
    }

    #[test]
    fn scaling_adds_at_most_one_rank() {
        let pair = FactorPair::new(gaussian_matrix(20, 3, &mut rng(4)), gaussian_matrix(15, 3, &mut rng(5)))
            .unwrap()
            .scaled(1.0, 5.0);
        let s = svd(&pair.a).unwrap();
        let tail = s.singular_values[4] / s.singular_values[0];
        assert!(tail < 1e-10, "{tail}");
        assert!(pair.a.min() >= 1.0 && pair.a.max() <= 5.0);
    }

    #[test]
    fn mcar_masks() {
        assert!(mcar_mask(3, 3, 1.0, &mut rng(0)).unwrap().iter().all(|&b| b));
        assert!(mcar_mask(3, 3, 0.0, &mut rng(0)).is_err());
        let m = mcar_mask(100, 100, 0.5, &mut rng(6)).unwrap();
        let frac = m.iter().filter(|&&b| b).count() as f64 / 1e4;
        assert!((frac - 0.5).abs() < 5.0 * (0.25f64 / 1e4).sqrt());
        assert_eq!(m, mcar_mask(100, 100, 0.5, &mut rng(6)).unwrap());
    }

    fn ratings(seed: u64) -> DMatrix<f64> {
        let mut r = rng(seed);
        let u = gen_core_factors(80, 20, 5, &mut r).unwrap();
        let v = gen_core_factors(80, 20, 5, &mut r).unwrap();
        FactorPair::new(u, v).unwrap().scaled(1.0, 5.0).a
    }

    #[test]
    fn unit_alpha_is_mcar_within_cohort() {
        let a = ratings(7);
        let ones = Cohorts {
            core: 1.0,
            user: 1.0,
            item: 1.0,
            standard: 1.0,
        };
        let spec = CohortPropensitySpec {
            alpha: ones,
            ..Default::default()
        };
        let p = limited_mnar_propensity(&a, &spec).unwrap();
        for i in 0..80 {
            for j in 0..80 {
                let c = Cohort::of(i, j, 20, 20);
                assert!((p[(i, j)] - spec.target.get(c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn propensity_is_u_shaped() {
        let mut a = DMatrix::from_element(4, 4, 1.0);
        let levels = [1.0, 5.0, 2.3, 2.31, 1.8, 4.0];
        for (k, &x) in levels.iter().enumerate() {
            a[(k / 4, k % 4)] = x;
        }
        let spec = CohortPropensitySpec {
            m_core: 4,
            n_core: 4,
            target: Cohorts {
                core: 0.3,
                user: 0.3,
                item: 0.3,
                standard: 0.3,
            },
            ..Default::default()
        };
        let p = limited_mnar_propensity(&a, &spec).unwrap();
        let at = |x: f64| p[a.iter().position(|&v| v == x).unwrap()];
        // decreasing on [1, t], increasing on (t, 5], lowest just above t
        assert_eq!(at(1.0), p.max());
        assert!((at(5.0) - p.max()).abs() < 1e-12);
        assert!(at(1.0) > at(1.8) && at(1.8) > at(2.3));
        assert!(at(2.31) < at(4.0) && at(4.0) < at(5.0));
        assert_eq!(at(2.31), p.min());
        assert!(p.min() > 0.0);
    }

    #[test]
    fn default_cohort_fractions_are_hit() {
        let a = ratings(8);
        let spec = CohortPropensitySpec::default();
        let p = limited_mnar_propensity(&a, &spec).unwrap();
        assert!(p.iter().all(|&x| x > 0.0 && x <= 1.0));
        let mut r = rng(9);
        let mut seen = [0usize; 4];
        let mut total = [0usize; 4];
        for _ in 0..10 {
            let d = sample_mask(&p, &mut r);
            for i in 0..80 {
                for j in 0..80 {
                    let k = Cohort::of(i, j, 20, 20) as usize;
                    total[k] += 1;
                    seen[k] += usize::from(d[(i, j)]);
                }
            }
        }
        for c in Cohort::ALL {
            let frac = seen[c as usize] as f64 / total[c as usize] as f64;
            assert!((frac - spec.target.get(c)).abs() <= 0.03, "{c:?}: {frac}");
        }
    }

    #[test]
    fn infeasible_targets_rejected() {
        let a = DMatrix::from_fn(10, 10, |i, j| 1.0 + ((i + j) % 5) as f64);
        let spec = CohortPropensitySpec {
            m_core: 10,
            n_core: 10,
            target: Cohorts {
                core: 0.95,
                user: 0.5,
                item: 0.5,
                standard: 0.5,
            },
            alpha: Cohorts {
                core: 0.1,
                user: 0.5,
                item: 0.5,
                standard: 0.5,
            },
            ..Default::default()
        };
        assert!(matches!(limited_mnar_propensity(&a, &spec), Err(Error::Infeasible(_))));
    }

    #[test]
    fn bernoulli_sampling() {
        let ones = DMatrix::from_element(3, 3, 1.0);
        assert!(sample_mask(&ones, &mut rng(0)).iter().all(|&b| b));
        assert!(sample_mask(&(ones * 0.0), &mut rng(0)).iter().all(|&b| !b));
        let p = DMatrix::from_fn(4, 5, |i, j| 0.1 + 0.04 * (i * 5 + j) as f64);
        let mut r = rng(10);
        let mut counts = DMatrix::<f64>::zeros(4, 5);
        for _ in 0..200 {
            counts += sample_mask(&p, &mut r).map(|b| if b { 1.0 } else { 0.0 });
        }
        for (c, &pij) in counts.iter().zip(p.iter()) {
            let sd = (pij * (1.0 - pij) / 200.0).sqrt();
            assert!((c / 200.0 - pij).abs() <= 5.0 * sd);
        }
    }

    #[test]
    fn general_mnar_cases() {
        let u = gaussian_matrix(6, 1, &mut rng(11));
        let v = gaussian_matrix(7, 1, &mut rng(12));
        assert!(general_mnar_mask(&u, &v, 2).iter().all(|&b| b));
        let u = gaussian_matrix(6, 3, &mut rng(13));
        let v = gaussian_matrix(7, 3, &mut rng(14));
        assert!(general_mnar_mask(&u, &v, 7).iter().all(|&b| b));
    }

    #[test]
    fn general_mnar_matches_loop_oracle() {
        let mut r = rng(15);
        let u = gaussian_matrix(20, 3, &mut r);
        let v = gaussian_matrix(20, 3, &mut r);
        let d = general_mnar_mask(&u, &v, 5);
        for i in 0..20 {
            for j in 0..20 {
                let fav = |m: &DMatrix<f64>, row: usize| {
                    let vals = [m[(row, 0)], m[(row, 1)], m[(row, 2)]];
                    let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    vals.iter().position(|&x| x == best).unwrap()
                };
                assert_eq!(d[(i, j)], j < 5 || fav(&u, i) == fav(&v, j));
            }
        }
        // positivity fails and one zero forces others: same-genre rows share patterns
        assert!(d.iter().any(|&b| !b));
    }

    #[test]
    fn adoption_extremes() {
        let y = gaussian_matrix(10, 8, &mut rng(16));
        let none = PanelAdoptionSpec {
            pre_periods: 5,
            mild: 0.0,
            moderate: 0.0,
            severe: 0.0,
        };
        assert!(panel_adoption_mask(&y, &none, &mut rng(0)).unwrap().mask.iter().all(|&b| b));
        let all = PanelAdoptionSpec {
            mild: 1.0,
            moderate: 1.0,
            severe: 1.0,
            ..none.clone()
        };
        let out = panel_adoption_mask(&y, &all, &mut rng(0)).unwrap();
        for i in 0..10 {
            for j in 0..8 {
                assert_eq!(out.mask[(i, j)], j < 5);
            }
        }
        let bad = PanelAdoptionSpec { pre_periods: 8, ..none };
        assert!(panel_adoption_mask(&y, &bad, &mut rng(0)).is_err());
    }

    #[test]
    fn planted_severity_classes() {
        let mut y = DMatrix::from_fn(12, 10, |i, j| 0.01 * ((i * 7 + j * 3) % 5) as f64);
        for j in 6..10 {
            y[(0, j)] += 10.0;
            y[(1, j)] -= 10.0;
        }
        let spec = PanelAdoptionSpec {
            pre_periods: 6,
            ..Default::default()
        };
        let out = panel_adoption_mask(&y, &spec, &mut rng(0)).unwrap();
        assert_eq!(out.severity[0], Severity::Mild);
        assert_eq!(out.severity[1], Severity::Severe);
        assert!(out.severity[2..].iter().all(|&s| s == Severity::Moderate));
    }

    #[test]
    fn noise() {
        let a = DMatrix::from_element(100, 100, 2.0);
        assert_eq!(add_noise(&a, 0.0, &mut rng(0)).unwrap(), a);
        let y = add_noise(&a, 0.5, &mut rng(17)).unwrap();
        let var = (&y - &a).iter().map(|e| e * e).sum::<f64>() / 1e4;
        // var of the sample variance is 2σ⁴/n
        let sd = (2.0 * 0.5f64.powi(4) / 1e4).sqrt();
        assert!((var - 0.25).abs() < 5.0 * sd, "{var}");
        assert_eq!(y, add_noise(&a, 0.5, &mut rng(17)).unwrap());
        assert!(add_noise(&a, -1.0, &mut rng(0)).is_err());
    }

    #[test]
    fn synthetic_panel_shape_and_range() {
        let p = synthetic_panel(38, 31, 3, (1.0, 5.0), &mut rng(18)).unwrap();
        assert_eq!(p.a.shape(), (38, 31));
        assert!(p.a.min() >= 1.0 && p.a.max() <= 5.0);
    }
}
