use nalgebra::DMatrix;

use super::BaselineOutput;
use crate::error::{Error, Result};
use crate::matrix::{CellStatus, MaskedMatrix};
use crate::spectral::svd;

/// Iterates and objective values of a SoftImpute run.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftImputeFit {
    pub output: BaselineOutput,
    pub iterations: usize,
    /// `½‖P_obs(Y − Z)‖² + λ‖Z‖_*` after each iteration.
    pub objective: Vec<f64>,
    pub converged: bool,
}

/// Divisor of the largest singular value in [`default_lambda`].
pub const LAMBDA_DIVISOR: f64 = 50.0;

/// `τ_max / 50` of the zero-filled observed matrix.
pub fn default_lambda(data: &MaskedMatrix) -> Result<f64> {
    let fact = svd(&data.filled(0.0))?;
    Ok(fact.singular_values.iter().copied().next().unwrap_or(0.0) / LAMBDA_DIVISOR)
}

/// Nuclear-norm regularized completion from a zero warm start.
///
/// Repeats `Z ← SVT_λ(P_obs(Y) + P_miss(Z))` until the relative Frobenius
/// change drops below `tol` or `max_iter` is reached.
pub fn soft_impute(data: &MaskedMatrix, lambda: f64, max_iter: usize, tol: f64) -> Result<SoftImputeFit> {
    if !(lambda >= 0.0) {
        return Err(Error::param("softimpute_lambda", "must be nonnegative"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("softimpute_tol", "must be positive"));
    }
    let (m, n) = data.shape();
    let mask = data.mask();
    let observed = data.filled(0.0);
    let mut z = DMatrix::zeros(m, n);
    let mut objective = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let filled = DMatrix::from_fn(m, n, |i, j| if mask[(i, j)] { observed[(i, j)] } else { z[(i, j)] });
        let fact = svd(&filled)?;
        let mut next = DMatrix::zeros(m, n);
        let mut nuclear = 0.0;
        for l in 0..fact.len() {
            let shrunk = fact.singular_values[l] - lambda;
            if shrunk <= 0.0 {
                break;
            }
            nuclear += shrunk;
            next.ger(shrunk, &fact.left_vectors.column(l), &fact.right_vectors.column(l), 1.0);
        }
        let fit: f64 = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&ij| mask[ij])
            .map(|ij| (observed[ij] - next[ij]).powi(2))
            .sum();
        objective.push(0.5 * fit + lambda * nuclear);

        let change = (&next - &z).norm();
        let size = z.norm();
        z = next;
        if change <= tol * size || change == 0.0 {
            converged = true;
            break;
        }
    }
    let status = mask.map(|o| if o { CellStatus::Observed } else { CellStatus::Estimated });
    Ok(SoftImputeFit {
        output: BaselineOutput { values: z, status },
        iterations,
        objective,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::evaluate;
    use crate::simulators::{gaussian_matrix, mcar_mask};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_shrinkage_on_full_data_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = gaussian_matrix(6, 5, &mut rng);
        let fit = soft_impute(&MaskedMatrix::fully_observed(a.clone()).unwrap(), 0.0, 10, 1e-9).unwrap();
        assert!((fit.output.values - a).amax() < 1e-10);
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = gaussian_matrix(25, 3, &mut rng) * gaussian_matrix(3, 20, &mut rng) + gaussian_matrix(25, 20, &mut rng) * 0.3;
        let mask = mcar_mask(25, 20, 0.6, &mut rng).unwrap();
        let fit = soft_impute(&MaskedMatrix::new(a, mask).unwrap(), 1.5, 200, 1e-10).unwrap();
        for w in fit.objective.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn rank_one_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = gaussian_matrix(30, 1, &mut rng) * gaussian_matrix(1, 30, &mut rng);
        let mask = mcar_mask(30, 30, 0.8, &mut rng).unwrap();
        let fit = soft_impute(&MaskedMatrix::new(a.clone(), mask.clone()).unwrap(), 1e-3, 20_000, 1e-12).unwrap();
        let rmse = evaluate(&fit.output.values, &a, &mask.map(|o| !o)).unwrap().rmse;
        assert!(rmse < 1e-3, "{rmse} after {} iterations", fit.iterations);
    }

    #[test]
    fn parameter_checks() {
        let data = MaskedMatrix::fully_observed(DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert!(soft_impute(&data, -1.0, 5, 1e-6).is_err());
        assert!(soft_impute(&data, 1.0, 5, 0.0).is_err());
    }
}
