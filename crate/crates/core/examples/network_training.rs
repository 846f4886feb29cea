//! The network on its own: forward pass, MI loss gradient, Adam steps, and a
//! checkpoint round trip.

use descluster::data::{generate_synthetic, SyntheticSpec};
use descluster::loss::mi_loss;
use descluster::metrics::nmi;
use descluster::net::{adam_step, AdamState, MlpModel};
use descluster::trainer::argmax_labels;

fn main() -> descluster::Result<()> {
    let spec = SyntheticSpec { k_true: 3, n_per_cluster: 60, d: 4, m: 1, informative_tags: 0, seed: 2, ..SyntheticSpec::default() };
    let data = generate_synthetic(&spec)?;
    let x = data.features.standardize()?;

    let mut model = MlpModel::init(4, &[32], 3, 2)?;
    let mut adam = AdamState::new(&model, 1e-2);
    println!("{} parameters", model.parameter_count());
    for step in 0..=200 {
        let (probs, cache) = model.forward(x.values().view())?;
        let loss = mi_loss(&probs);
        let grads = model.backward(&cache, &loss.grad)?;
        adam_step(&mut model, &grads, &mut adam)?;
        if step % 50 == 0 {
            let labels = argmax_labels(probs.view());
            println!("step {step:3}: loss {:+.4}  NMI {:.3}", loss.value, nmi(&labels, &data.labels)?);
        }
    }

    let path = std::env::temp_dir().join("descluster-example-model.json");
    model.save_checkpoint(&path)?;
    let restored = MlpModel::load_checkpoint(&path)?;
    println!("checkpoint round trip exact: {}", restored == model);
    std::fs::remove_file(path)?;
    Ok(())
}
