//! Same data and seeds, trained once with the solved tag mask and once with
//! every tag kept.

use descluster::data::{generate_synthetic, impute_tags, SyntheticSpec};
use descluster::metrics::nmi;
use descluster::trainer::{train, MaskMode, TrainConfig};

fn main() -> descluster::Result<()> {
    let seeds = 6..9u64;
    for mode in [MaskMode::Solved, MaskMode::Identity] {
        let mut scores = Vec::new();
        for seed in seeds.clone() {
            let data = generate_synthetic(&SyntheticSpec { seed, ..SyntheticSpec::default() })?;
            let config = TrainConfig {
                k: 4,
                hidden: vec![64, 64],
                alpha: 1.0,
                learning_rate: 3e-3,
                max_outer_iters: 8,
                seed,
                mask_mode: mode,
                ..TrainConfig::default()
            };
            let out = train(&data.features.standardize()?, &impute_tags(&data.tags), &config)?;
            let kept = out.explanation.mask.iter().filter(|&&b| b).count();
            let score = nmi(&out.report.final_labels, &data.labels)?;
            println!("{mode:?} seed {seed}: NMI {score:.3}, explanation uses {kept} of 12 tags");
            scores.push(score);
        }
        println!("{mode:?} mean NMI {:.3}\n", scores.iter().sum::<f64>() / scores.len() as f64);
    }
    Ok(())
}
