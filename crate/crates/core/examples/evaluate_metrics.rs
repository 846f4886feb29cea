//! Clustering and explanation metrics on a toy labelling.

use descluster::data::TagMatrix;
use descluster::metrics::{clustering_accuracy, inverse_tag_frequency, nmi, tag_coverage, MetricReport};

fn main() -> descluster::Result<()> {
    let truth = [0, 0, 0, 1, 1, 1, 2, 2, 2];
    let pred = [1, 1, 0, 0, 0, 0, 2, 2, 2];
    println!("NMI {:.4}", nmi(&pred, &truth)?);
    println!("ACC {:.4}", clustering_accuracy(&pred, &truth)?);

    // two tags per instance; the second is missing for one member of cluster 0
    let (y, n, u) = (Some(true), Some(false), None);
    let tags = TagMatrix::from_options(&[
        vec![y, n], vec![y, u], vec![n, y],
        vec![n, y], vec![y, y], vec![n, y],
        vec![n, n], vec![n, n], vec![y, n],
    ])?;
    let members = [2, 3, 4, 5];
    println!("TC of cluster 0 over tag 1: {:.3}", tag_coverage(&tags, &members, &[1])?);

    let descriptors = vec![vec![1], vec![0], vec![0, 1]];
    for c in 0..3 {
        println!("ITF of cluster {c}: {:.3}", inverse_tag_frequency(&descriptors, c)?);
    }
    let report = MetricReport::new()
        .with_clustering(&pred, &truth)?
        .with_explanation(&tags, &pred, &descriptors)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
