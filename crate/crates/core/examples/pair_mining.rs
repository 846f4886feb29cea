//! Self-generated pairs: instances with similar (masked) tags but different
//! predictions, and the KL loss that pulls them together.

use descluster::explain::apply_mask;
use descluster::loss::{mi_loss, overall_loss, pairwise_kl_loss};
use descluster::net::BatchProbabilities;
use descluster::pairing::{generate_pairs, pair_objective};
use ndarray::array;

fn main() -> descluster::Result<()> {
    let tags = array![[1.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 0.0]];
    let probs = BatchProbabilities::new(array![[0.9, 0.1], [0.2, 0.8], [0.3, 0.7], [0.6, 0.4]])?;

    // the last tag carries no cluster information; the mask drops it
    let masked = apply_mask(tags.view(), &[true, true, false])?;
    let gamma = 100.0;
    for i in 0..4 {
        let scores: Vec<String> = (0..4)
            .filter(|&j| j != i)
            .map(|j| format!("J({i},{j})={:.2}", pair_objective(masked.view(), &probs, gamma, i, j)))
            .collect();
        println!("{}", scores.join("  "));
    }
    let pairs = generate_pairs(masked.view(), &probs, gamma, 1);
    println!("pairs: {pairs:?}");

    println!("MI loss       {:.4}", mi_loss(&probs).value);
    println!("pairwise KL   {:.4}", pairwise_kl_loss(&probs, &pairs)?.value);
    println!("overall (l=1) {:.4}", overall_loss(&probs, &pairs, 1.0)?.value);
    Ok(())
}
