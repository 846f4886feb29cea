//! Describe a given clustering with tags: coverage matrix, beta search and
//! the resulting mask. Missing tags ("?") are mean-imputed first.

use descluster::data::{impute_tags, TagMatrix};
use descluster::explain::{compute_coverage, solve_with_beta_search, ExplanationReport};

fn main() -> descluster::Result<()> {
    let (y, n, u) = (Some(true), Some(false), None);
    let rows = vec![
        vec![y, y, n, n, y],
        vec![y, u, n, n, n],
        vec![y, y, n, u, y],
        vec![n, y, y, n, n],
        vec![n, n, y, y, y],
        vec![u, n, y, y, n],
    ];
    let assignment = [0, 0, 0, 1, 1, 1];
    let raw = TagMatrix::from_options(&rows)?;
    let names: Vec<String> = ["striped", "furry", "aquatic", "finned", "noisy"].map(String::from).to_vec();

    let q = compute_coverage(&impute_tags(&raw), &assignment, 2)?;
    println!("coverage:\n{:.2}", q.q());

    let alpha = 1.5;
    let result = solve_with_beta_search(&q, alpha)?;
    println!("beta* = {}, mask = {:?}", result.beta_star, result.mask);
    let report = ExplanationReport::new(&result, &q, &names, alpha);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
