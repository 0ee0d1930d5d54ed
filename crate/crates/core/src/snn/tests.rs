use super::*;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

fn low_rank(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let u = gaussian(rng, m, r);
    let v = gaussian(rng, n, r);
    (&u * v.transpose(), u, v)
}

fn masked_one(a: &DMatrix<f64>, i: usize, j: usize) -> MaskedMatrix {
    let mut mask = DMatrix::from_element(a.nrows(), a.ncols(), true);
    mask[(i, j)] = false;
    MaskedMatrix::new(a.clone(), mask).unwrap()
}

fn k1() -> SnnConfig {
    SnnConfig::default()
}

#[test]
fn rank_one_recovers_missing_corner() {
    let a = DMatrix::from_fn(5, 5, |r, c| ((r + 1) * (c + 1)) as f64);
    let data = masked_one(&a, 0, 0);
    let plan = plan_for_cell(&data, 0, 0, &k1()).unwrap();
    let est = snn_entry(&data, 0, 0, &plan, &k1()).unwrap();
    assert!((est.value - 1.0).abs() <= 1e-8, "{}", est.value);

    let done = snn_complete(&data, &Targets::AllMissing, &k1()).unwrap();
    assert!((done.values[(0, 0)] - 1.0).abs() <= 1e-8);
    assert_eq!(done.status[(0, 0)], CellStatus::Estimated);
    assert_eq!(done.count(CellStatus::Observed), 24);
}

#[test]
fn observed_target_is_reproduced() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (a, _, _) = low_rank(&mut rng, 10, 9, 2);
    let data = MaskedMatrix::fully_observed(a.clone()).unwrap();
    let done = snn_complete(&data, &Targets::Cells(vec![(4, 5)]), &k1()).unwrap();
    assert!((done.values[(4, 5)] - a[(4, 5)]).abs() < 1e-8);
}

#[test]
fn two_folds_match_pseudo_inverse_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (a, u, v) = low_rank(&mut rng, 8, 8, 2);
    let data = masked_one(&a, 2, 5);
    let cfg = SnnConfig {
        k_folds: KFolds::Fixed(2),
        rank_policy: RankPolicy::Fixed(2),
        ..k1()
    };
    let plan = plan_for_cell(&data, 2, 5, &cfg).unwrap();
    assert_eq!(plan.k(), 2);
    let est = snn_entry(&data, 2, 5, &plan, &cfg).unwrap();

    // S = L R with L = U[fold] and R = V[AC]ᵀ, so (Sᵀ)⁺ = L (LᵀL)⁻¹ (R Rᵀ)⁻¹ R
    let ac = &plan.anchor_cols;
    let r = DMatrix::from_fn(2, ac.len(), |l, c| v[(ac[c], l)]);
    let q = DVector::from_fn(ac.len(), |c, _| a[(2, ac[c])]);
    for (k, fold) in plan.anchor_row_folds.iter().enumerate() {
        let l = DMatrix::from_fn(fold.len(), 2, |row, c| u[(fold[row], c)]);
        let inner = (l.transpose() * &l).try_inverse().unwrap() * (&r * r.transpose()).try_inverse().unwrap();
        let beta = &l * inner * &r * &q;
        let x = DVector::from_fn(fold.len(), |row, _| a[(fold[row], 5)]);
        assert!((x.dot(&beta) - est.fold_values[k]).abs() < 1e-8);
        assert!((&beta - &est.fold_betas[k]).amax() < 1e-8);
    }
    assert!((est.value - a[(2, 5)]).abs() < 1e-8);
}

#[test]
fn value_is_mean_of_folds() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (a, _, _) = low_rank(&mut rng, 20, 12, 2);
    let noisy = &a + gaussian(&mut rng, 20, 12) * 0.1;
    let data = masked_one(&noisy, 0, 0);
    let cfg = SnnConfig {
        k_folds: KFolds::Fixed(3),
        rank_policy: RankPolicy::Fixed(2),
        ..k1()
    };
    let plan = plan_for_cell(&data, 0, 0, &cfg).unwrap();
    let est = snn_entry(&data, 0, 0, &plan, &cfg).unwrap();
    let mean = est.fold_values.iter().sum::<f64>() / 3.0;
    assert_eq!(est.value, mean);
    let (lo, hi) = est.ci.unwrap();
    assert!(lo <= est.value && est.value <= hi);
    assert!(est.variance.unwrap() >= 0.0);
}

#[test]
fn singleton_anchor_paths_agree() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 2.0, 6.0]);
    let data = masked_one(&a, 0, 0);
    let plan = plan_for_cell(&data, 0, 0, &k1()).unwrap();
    assert_eq!(plan.anchor_cols, vec![1]);
    let e = snn_entry(&data, 0, 0, &plan, &k1()).unwrap();
    let t = snn_entry_transposed(&data, 0, 0, &plan, &k1()).unwrap();
    assert!((e.value - 1.0).abs() < 1e-12);
    assert!((e.value - t.value).abs() < 1e-12);
}

#[test]
fn transposed_agrees_fold_wise() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for sigma in [0.0, 0.1] {
        for _ in 0..10 {
            let (a, _, _) = low_rank(&mut rng, 14, 11, 2);
            let y = &a + gaussian(&mut rng, 14, 11) * sigma;
            let data = masked_one(&y, 1, 2);
            let cfg = SnnConfig {
                k_folds: KFolds::Fixed(2),
                ..k1()
            };
            let plan = plan_for_cell(&data, 1, 2, &cfg).unwrap();
            let e = snn_entry(&data, 1, 2, &plan, &cfg).unwrap();
            let t = snn_entry_transposed(&data, 1, 2, &plan, &cfg).unwrap();
            for (x, y) in e.fold_values.iter().zip(&t.fold_values) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn fully_observed_without_targets_is_identity() {
    let a = DMatrix::from_fn(4, 3, |r, c| (r * 3 + c) as f64);
    let data = MaskedMatrix::fully_observed(a.clone()).unwrap();
    let done = snn_complete(&data, &Targets::AllMissing, &k1()).unwrap();
    assert_eq!(done.values, a);
    assert!(done.cells.is_empty());
}

#[test]
fn noiseless_interval_collapses() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (a, _, _) = low_rank(&mut rng, 12, 12, 2);
    let data = masked_one(&a, 3, 3);
    let plan = plan_for_cell(&data, 3, 3, &k1()).unwrap();
    let est = snn_entry(&data, 3, 3, &plan, &k1()).unwrap();
    let (lo, hi) = est.ci.unwrap();
    assert!(hi - lo < 1e-6, "{lo} {hi}");
    let again = confidence_interval(&est, &data, &k1()).unwrap();
    assert_eq!(again.bounds, est.ci);
}

#[test]
fn unestimable_cells_stay_empty() {
    // row 0 observes only column 0, which nobody else observes
    let mut mask = DMatrix::from_element(4, 4, true);
    for b in 1..4 {
        mask[(0, b)] = false;
    }
    for a in 1..4 {
        mask[(a, 0)] = false;
    }
    let data = MaskedMatrix::new(DMatrix::from_element(4, 4, 1.0), mask).unwrap();
    let done = snn_complete(&data, &Targets::AllMissing, &k1()).unwrap();
    assert_eq!(done.status[(0, 1)], CellStatus::NoAnchor);
    assert!(done.values[(0, 1)].is_nan());
    assert_eq!(done.status[(1, 0)], CellStatus::NoAnchor);
}

#[test]
fn insufficient_anchor_rows_are_flagged() {
    let a = DMatrix::from_fn(3, 3, |r, c| ((r + 1) * (c + 1)) as f64);
    let data = masked_one(&a, 0, 0);
    let cfg = SnnConfig {
        min_anchor_rows: 3,
        ..k1()
    };
    let done = snn_complete(&data, &Targets::AllMissing, &cfg).unwrap();
    assert_eq!(done.status[(0, 0)], CellStatus::InsufficientAnchors);
}

#[test]
fn per_row_noise_is_unimplemented() {
    let data = MaskedMatrix::fully_observed(DMatrix::from_element(2, 2, 1.0)).unwrap();
    let cfg = SnnConfig {
        noise_model: NoiseModel::PerRowPlugin,
        ..k1()
    };
    assert!(matches!(snn_complete(&data, &Targets::AllMissing, &cfg), Err(Error::Unimplemented(_))));
}

#[test]
fn config_validation() {
    assert!(SnnConfig { ci_level: 1.0, ..k1() }.validate().is_err());
    assert!(SnnConfig { min_anchor_rows: 0, ..k1() }.validate().is_err());
    assert!(SnnConfig { k_folds: KFolds::Fixed(0), ..k1() }.validate().is_err());
}

#[test]
fn auto_folds_respect_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let (a, _, _) = low_rank(&mut rng, 41, 40, 2);
    let data = masked_one(&a, 0, 0);
    let cfg = SnnConfig {
        k_folds: KFolds::Auto,
        rank_policy: RankPolicy::Fixed(2),
        min_anchor_rows: 10,
        ..k1()
    };
    let plan = plan_for_cell(&data, 0, 0, &cfg).unwrap();
    // 39 anchor cols, 40 rows: floor(39 / 4) = 9, lowered to 4 for 10-row folds
    assert_eq!(plan.k(), 4);
    assert!(plan.fold_sizes().iter().all(|&s| s >= 10));
}

#[test]
fn interval_width_scales_with_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let cfg = SnnConfig {
        rank_policy: RankPolicy::Fixed(2),
        ..k1()
    };
    let mut widths = [0.0, 0.0];
    for _ in 0..30 {
        let (a, _, _) = low_rank(&mut rng, 40, 40, 2);
        let e = gaussian(&mut rng, 40, 40);
        for (w, sigma) in widths.iter_mut().zip([0.1, 0.2]) {
            let data = masked_one(&(&a + &e * sigma), 0, 0);
            let plan = plan_for_cell(&data, 0, 0, &cfg).unwrap();
            let (lo, hi) = snn_entry(&data, 0, 0, &plan, &cfg).unwrap().ci.unwrap();
            *w += hi - lo;
        }
    }
    let ratio = widths[1] / widths[0];
    assert!((ratio - 2.0).abs() <= 0.5, "{ratio}");
}

#[test]
fn cell_seeds_are_distinct() {
    assert_ne!(cell_seed(7, 0, 1, 5), cell_seed(7, 1, 0, 5));
    assert_eq!(cell_seed(0, 2, 3, 5), 13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn completion_is_permutation_equivariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, _, _) = low_rank(&mut rng, 9, 8, 2);
        let mask = DMatrix::from_fn(9, 8, |_, _| rng.random::<f64>() < 0.8);
        let data = MaskedMatrix::new(a.clone(), mask.clone()).unwrap();
        let mut rp: Vec<usize> = (0..9).collect();
        let mut cp: Vec<usize> = (0..8).collect();
        use rand::seq::SliceRandom;
        rp.shuffle(&mut rng);
        cp.shuffle(&mut rng);
        let pa = DMatrix::from_fn(9, 8, |r, c| a[(rp[r], cp[c])]);
        let pm = DMatrix::from_fn(9, 8, |r, c| mask[(rp[r], cp[c])]);
        let pdata = MaskedMatrix::new(pa, pm).unwrap();
        let cfg = SnnConfig { rank_policy: RankPolicy::Fixed(2), min_anchor_rows: 2, ..k1() };
        let base = snn_complete(&data, &Targets::AllMissing, &cfg).unwrap();
        let perm = snn_complete(&pdata, &Targets::AllMissing, &cfg).unwrap();
        for r in 0..9 {
            for c in 0..8 {
                let (x, y) = (base.values[(rp[r], cp[c])], perm.values[(r, c)]);
                if base.status[(rp[r], cp[c])] == CellStatus::Estimated
                    && perm.status[(r, c)] == CellStatus::Estimated
                {
                    prop_assert!((x - y).abs() < 1e-6, "{} vs {}", x, y);
                }
                prop_assert_eq!(x.is_nan(), y.is_nan());
            }
        }
    }

    #[test]
    fn noiseless_identification(seed in any::<u64>(), rank in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, _, _) = low_rank(&mut rng, 15, 15, rank);
        let (i, j) = (rng.random_range(0..15), rng.random_range(0..15));
        let data = masked_one(&a, i, j);
        let done = snn_complete(&data, &Targets::AllMissing, &k1()).unwrap();
        prop_assert!((done.values[(i, j)] - a[(i, j)]).abs() < 1e-6);
    }
}
