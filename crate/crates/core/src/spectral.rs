//! SVD kernel: factorization with a fixed sign convention, rank selection,
//! hard singular value thresholding and principal component regression.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero.
pub const RELATIVE_ZERO: f64 = 1e-12;

/// Default multiplier of the universal singular value cutoff.
pub const UNIVERSAL_MULTIPLIER: f64 = 2.02;

/// Thin SVD `M = Σ τ_ℓ u_ℓ v_ℓᵀ` with `τ` descending.
///
/// Each left vector has its largest-magnitude entry made nonnegative (first
/// index wins ties) and the matching right vector is flipped with it, so the
/// factorization is reproducible bit for bit.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    pub singular_values: DVector<f64>,
    /// `p × s` orthonormal columns.
    pub left_vectors: DMatrix<f64>,
    /// `q × s` orthonormal columns.
    pub right_vectors: DMatrix<f64>,
}

impl SvdFactorization {
    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    /// Number of singular values above `RELATIVE_ZERO · τ_1`.
    pub fn effective_rank(&self) -> usize {
        let top = self.singular_values.get(0).copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .take_while(|&&t| t > RELATIVE_ZERO * top)
            .count()
    }

    /// `Σ_{ℓ<rank} τ_ℓ u_ℓ v_ℓᵀ`.
    pub fn reconstruct(&self, rank: usize) -> DMatrix<f64> {
        let p = self.left_vectors.nrows();
        let q = self.right_vectors.nrows();
        let mut out = DMatrix::zeros(p, q);
        for l in 0..rank.min(self.len()) {
            let tau = self.singular_values[l];
            out.ger(tau, &self.left_vectors.column(l), &self.right_vectors.column(l), 1.0);
        }
        out
    }
}

/// How many singular directions to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankPolicy {
    Fixed(usize),
    /// Smallest rank capturing this fraction of `Σ τ²`.
    EnergyThreshold(f64),
    /// Keep `τ ≥ multiplier · σ̂ · √max(p, q)`.
    UniversalThreshold { multiplier: f64 },
}

impl RankPolicy {
    pub fn universal() -> Self {
        RankPolicy::UniversalThreshold {
            multiplier: UNIVERSAL_MULTIPLIER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RankPolicy::Fixed(0) => Err(Error::param("rank_policy", "fixed rank must be >= 1")),
            RankPolicy::EnergyThreshold(f) if !(f > 0.0 && f <= 1.0) => {
                Err(Error::param("rank_policy", "energy fraction must lie in (0, 1]"))
            }
            RankPolicy::UniversalThreshold { multiplier } if !(multiplier > 0.0) => {
                Err(Error::param("rank_policy", "universal multiplier must be positive"))
            }
            _ => Ok(()),
        }
    }
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy::EnergyThreshold(0.99)
    }
}

impl std::fmt::Display for RankPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankPolicy::Fixed(k) => write!(f, "fixed:{k}"),
            RankPolicy::EnergyThreshold(e) => write!(f, "energy:{e}"),
            RankPolicy::UniversalThreshold { multiplier } => write!(f, "universal:{multiplier}"),
        }
    }
}

impl std::str::FromStr for RankPolicy {
    type Err = Error;

    /// Parses `fixed:K`, `energy:F`, `universal` or `universal:C`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param("rank_policy", format!("cannot parse {s:?}"));
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let policy = match (kind, arg) {
            ("fixed", Some(a)) => RankPolicy::Fixed(a.parse().map_err(|_| bad())?),
            ("energy", Some(a)) => RankPolicy::EnergyThreshold(a.parse().map_err(|_| bad())?),
            ("universal", None) => RankPolicy::universal(),
            ("universal", Some(a)) => RankPolicy::UniversalThreshold {
                multiplier: a.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// Thin SVD of a finite matrix.
pub fn svd(m: &DMatrix<f64>) -> Result<SvdFactorization> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::param("matrix", "empty matrix"));
    }
    let dense = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let raw = dense
        .thin_svd()
        .map_err(|e| Error::param("matrix", format!("svd did not converge: {e:?}")))?;
    let (u, v, sv) = (raw.U(), raw.V(), raw.S().column_vector());
    let s = sv.nrows();

    let mut order: Vec<usize> = (0..s).collect();
    // stable sort keeps the backend's order among exact ties
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

    let mut values = DVector::zeros(s);
    let mut left = DMatrix::zeros(m.nrows(), s);
    let mut right = DMatrix::zeros(m.ncols(), s);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = sv[src].max(0.0);
        let mut uc = DVector::from_fn(m.nrows(), |i, _| u[(i, src)]);
        let mut vc = DVector::from_fn(m.ncols(), |j, _| v[(j, src)]);
        let mut pivot = 0;
        for k in 1..uc.len() {
            if uc[k].abs() > uc[pivot].abs() {
                pivot = k;
            }
        }
        if uc[pivot] < 0.0 {
            uc.neg_mut();
            vc.neg_mut();
        }
        left.set_column(dst, &uc);
        right.set_column(dst, &vc);
    }
    Ok(SvdFactorization {
        singular_values: values,
        left_vectors: left,
        right_vectors: right,
    })
}

/// Picks a rank `λ ≥ 1` for `fact`, the SVD of a `shape.0 × shape.1` matrix.
pub fn select_rank(
    fact: &SvdFactorization,
    policy: RankPolicy,
    shape: (usize, usize),
    noise_scale: Option<f64>,
) -> Result<usize> {
    policy.validate()?;
    let positive = fact.effective_rank();
    if positive == 0 {
        return Err(Error::ZeroSpectrum);
    }
    let tau = &fact.singular_values;
    let rank = match policy {
        RankPolicy::Fixed(k) => k.min(fact.len()),
        RankPolicy::EnergyThreshold(f) => {
            let energies: Vec<f64> = tau.iter().take(positive).map(|t| t * t).collect();
            let total: f64 = energies.iter().sum();
            let mut cum = 0.0;
            let mut chosen = positive;
            for (l, e) in energies.iter().enumerate() {
                cum += e;
                if cum >= f * total {
                    chosen = l + 1;
                    break;
                }
            }
            chosen
        }
        RankPolicy::UniversalThreshold { multiplier } => {
            let scale = (shape.0.max(shape.1) as f64).sqrt();
            let sigma = noise_scale.unwrap_or_else(|| median(tau.as_slice()) / scale);
            let cutoff = multiplier * sigma * scale;
            tau.iter()
                .take(positive)
                .take_while(|&&t| t >= cutoff)
                .count()
                .max(1)
        }
    };
    Ok(rank)
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Best rank-`rank` approximation of `m` in Frobenius norm.
pub fn hsvt(m: &DMatrix<f64>, rank: usize) -> Result<DMatrix<f64>> {
    let max = m.nrows().min(m.ncols());
    if rank == 0 || rank > max {
        return Err(Error::RankOutOfRange { rank, max });
    }
    Ok(svd(m)?.reconstruct(rank))
}

/// Principal component regression of `response` on the columns of `design`.
///
/// Returns `β̂ = Σ_{ℓ≤λ} τ_ℓ⁻¹ ⟨v_ℓ, response⟩ u_ℓ`, one weight per row of
/// `design`.
pub fn pcr(design: &DMatrix<f64>, response: &DVector<f64>, rank: usize) -> Result<DVector<f64>> {
    pcr_with(&svd(design)?, response, rank)
}

/// [`pcr`] on a precomputed factorization.
pub fn pcr_with(
    fact: &SvdFactorization,
    response: &DVector<f64>,
    rank: usize,
) -> Result<DVector<f64>> {
    check_positive_rank(fact, rank)?;
    if response.len() != fact.right_vectors.nrows() {
        return Err(Error::ShapeMismatch {
            expected: (fact.right_vectors.nrows(), 1),
            actual: (response.len(), 1),
        });
    }
    let mut beta = DVector::zeros(fact.left_vectors.nrows());
    for l in 0..rank {
        let coef = fact.right_vectors.column(l).dot(response) / fact.singular_values[l];
        beta.axpy(coef, &fact.left_vectors.column(l), 1.0);
    }
    Ok(beta)
}

/// The transposed regression: `α̂ = Σ_{ℓ≤λ} τ_ℓ⁻¹ ⟨u_ℓ, target⟩ v_ℓ`.
pub fn pcr_transposed_with(
    fact: &SvdFactorization,
    target: &DVector<f64>,
    rank: usize,
) -> Result<DVector<f64>> {
    check_positive_rank(fact, rank)?;
    if target.len() != fact.left_vectors.nrows() {
        return Err(Error::ShapeMismatch {
            expected: (fact.left_vectors.nrows(), 1),
            actual: (target.len(), 1),
        });
    }
    let mut alpha = DVector::zeros(fact.right_vectors.nrows());
    for l in 0..rank {
        let coef = fact.left_vectors.column(l).dot(target) / fact.singular_values[l];
        alpha.axpy(coef, &fact.right_vectors.column(l), 1.0);
    }
    Ok(alpha)
}

/// Orthogonal projection of `v` onto the span of the top-`rank` left vectors.
pub fn project_left(fact: &SvdFactorization, v: &DVector<f64>, rank: usize) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for l in 0..rank.min(fact.len()) {
        let u = fact.left_vectors.column(l);
        out.axpy(u.dot(v), &u, 1.0);
    }
    out
}

fn check_positive_rank(fact: &SvdFactorization, rank: usize) -> Result<()> {
    let positive = fact.effective_rank();
    if rank == 0 || rank > positive {
        return Err(Error::RankOutOfRange {
            rank,
            max: positive,
        });
    }
    Ok(())
}
