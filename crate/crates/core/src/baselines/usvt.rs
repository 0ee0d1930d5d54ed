use super::BaselineOutput;
use crate::error::{Error, Result};
use crate::matrix::{CellStatus, MaskedMatrix};
use crate::spectral::svd;

/// Universal singular value thresholding.
///
/// Missing cells are zero-filled and observed ones scaled by `1/p̂`; singular
/// values below `eta·√(max(m, n)·p̂)·max|y|` are dropped and the
/// reconstruction is clipped to the observed value range.
pub fn usvt(data: &MaskedMatrix, eta: f64) -> Result<BaselineOutput> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param("usvt_eta", format!("must lie in (0, 1], got {eta}")));
    }
    let (lo, hi) = data.observed_range().ok_or(Error::EmptyEvaluation)?;
    let (m, n) = data.shape();
    let p_hat = data.observed_fraction();
    let scaled = data.filled(0.0) / p_hat;
    let scale = lo.abs().max(hi.abs());
    let threshold = eta * ((m.max(n) as f64) * p_hat).sqrt() * scale;
    let fact = svd(&scaled)?;
    let keep = fact.singular_values.iter().take_while(|&&t| t >= threshold).count();
    let values = fact.reconstruct(keep).map(|v| v.clamp(lo, hi));
    let status = data
        .mask()
        .map(|o| if o { CellStatus::Observed } else { CellStatus::Estimated });
    Ok(BaselineOutput { values, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::evaluate;
    use nalgebra::DMatrix;
    use crate::simulators::{gaussian_matrix, mcar_mask};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fully_observed_rank_one_is_reproduced() {
        let a = DMatrix::from_fn(6, 5, |r, c| ((r + 1) * (c + 2)) as f64);
        let out = usvt(&MaskedMatrix::fully_observed(a.clone()).unwrap(), 0.5).unwrap();
        assert!((out.values - a).amax() < 1e-8);
    }

    #[test]
    fn rank_two_mcar_sanity() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = gaussian_matrix(100, 2, &mut rng) * gaussian_matrix(2, 100, &mut rng);
            let mask = mcar_mask(100, 100, 0.9, &mut rng).unwrap();
            let data = MaskedMatrix::new(a.clone(), mask.clone()).unwrap();
            let out = usvt(&data, 0.5).unwrap();
            let missing = mask.map(|o| !o);
            let rmse = evaluate(&out.values, &a, &missing).unwrap().rmse;
            let range = a.max() - a.min();
            assert!(rmse < 0.1 * range, "seed {seed}: {rmse} vs {range}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let empty = MaskedMatrix::new(DMatrix::zeros(2, 2), DMatrix::from_element(2, 2, false)).unwrap();
        assert!(usvt(&empty, 0.5).is_err());
        let full = MaskedMatrix::fully_observed(DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert!(usvt(&full, 0.0).is_err());
    }
}
