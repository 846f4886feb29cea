//! Cluster graph from descriptor overlap, written as Graphviz DOT.

use descluster::ontology::{build_ontology, export_dot};

fn main() -> descluster::Result<()> {
    let to_strings = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let sets = vec![
        to_strings(&["furry", "four-legged", "tail"]),
        to_strings(&["furry", "four-legged", "stripes"]),
        to_strings(&["feathers", "wings", "tail"]),
        to_strings(&["fins", "aquatic"]),
    ];
    let names = to_strings(&["dog", "tiger", "parrot", "fish"]);
    for q in 1..=3 {
        let graph = build_ontology(&sets, q, &names)?;
        println!("q = {q}: {} edges {:?}", graph.edges.len(), graph.edges);
    }
    print!("{}", export_dot(&build_ontology(&sets, 2, &names)?));
    Ok(())
}
