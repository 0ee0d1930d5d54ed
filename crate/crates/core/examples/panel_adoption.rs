//! Units adopt a treatment depending on how their outcomes move; their
//! post-adoption controls are estimated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snn::baselines::knn_impute;
use snn::matrix::{evaluate, MaskedMatrix};
use snn::simulators::{panel_adoption_mask, synthetic_panel, PanelAdoptionSpec};
use snn::snn::{snn_complete, SnnConfig, Targets};
use snn::spectral::RankPolicy;

fn main() -> snn::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let panel = synthetic_panel(38, 31, 3, (0.0, 100.0), &mut rng)?;
    let adoption = panel_adoption_mask(&panel.a, &PanelAdoptionSpec::default(), &mut rng)?;
    let adopted = adoption.adopted.iter().filter(|&&a| a).count();
    println!("{adopted} of {} units adopted", adoption.adopted.len());

    let data = MaskedMatrix::new(panel.a.clone(), adoption.mask.clone())?;
    let cfg = SnnConfig {
        rank_policy: RankPolicy::universal(),
        ..SnnConfig::default()
    };
    let snn = snn_complete(&data, &Targets::AllMissing, &cfg)?;
    let knn = knn_impute(&data, 5)?;
    for (name, values, estimated) in [
        ("snn", &snn.values, snn.estimated_mask()),
        ("knn", &knn.values, knn.estimated_mask()),
    ] {
        let eval = estimated.zip_map(&adoption.mask, |e, obs| e && !obs);
        let report = evaluate(values, &panel.a, &eval)?;
        println!("{name}: rmse {:.3} over {} cells", report.rmse, report.count);
    }
    Ok(())
}
