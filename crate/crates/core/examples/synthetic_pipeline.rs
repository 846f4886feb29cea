//! Generate Gaussian blobs with partly missing tags, train the full
//! alternating loop and print recovery scores and the cluster descriptions.

use descluster::data::{generate_synthetic, impute_tags, SyntheticSpec};
use descluster::metrics::{clustering_accuracy, nmi};
use descluster::trainer::{train, TrainConfig};

fn main() -> descluster::Result<()> {
    let data = generate_synthetic(&SyntheticSpec { seed: 7, ..SyntheticSpec::default() })?;
    let features = data.features.standardize()?;
    let tags = impute_tags(&data.tags);

    let config = TrainConfig {
        k: 4,
        hidden: vec![64, 64],
        alpha: 1.0,
        learning_rate: 3e-3,
        max_outer_iters: 10,
        seed: 7,
        ..TrainConfig::default()
    };
    let outcome = train(&features, &tags, &config)?;
    let labels = &outcome.report.final_labels;

    println!("epochs run:  {}", outcome.report.epoch_losses.len());
    println!("convergence: {:?}", outcome.report.convergence);
    println!("NMI {:.3}  ACC {:.3}", nmi(labels, &data.labels)?, clustering_accuracy(labels, &data.labels)?);
    println!("beta* = {}", outcome.explanation.beta_star);
    for (c, d) in outcome.explanation.descriptors.iter().enumerate() {
        let names: Vec<&str> = d.iter().map(|&j| data.tags.tag_names()[j].as_str()).collect();
        println!("cluster {c}: {}", names.join(", "));
    }
    Ok(())
}
