//! Cluster ontology: clusters are nodes, and two clusters are linked when
//! their descriptor sets share at least `q` tags.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologyNode {
    pub cluster: usize,
    pub name: String,
    pub descriptors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologyGraph {
    pub nodes: Vec<OntologyNode>,
    /// Unordered pairs stored as `(low, high)`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub q_threshold: usize,
}

/// Links every pair of clusters whose descriptor sets intersect in at least
/// `q` tags. `descriptor_sets` holds tag names (or any stable identifiers).
pub fn build_ontology(
    descriptor_sets: &[Vec<String>],
    q: usize,
    names: &[String],
) -> Result<OntologyGraph> {
    if q == 0 {
        return Err(Error::InvalidConfig("ontology threshold q must be at least 1".into()));
    }
    if names.len() != descriptor_sets.len() {
        return Err(Error::Shape(format!(
            "{} names for {} clusters",
            names.len(),
            descriptor_sets.len()
        )));
    }
    let nodes = descriptor_sets
        .iter()
        .zip(names)
        .enumerate()
        .map(|(cluster, (d, name))| OntologyNode {
            cluster,
            name: name.clone(),
            descriptors: d.clone(),
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..descriptor_sets.len() {
        for j in i + 1..descriptor_sets.len() {
            let shared = descriptor_sets[i]
                .iter()
                .filter(|t| descriptor_sets[j].contains(t))
                .count();
            if shared >= q {
                edges.push((i, j));
            }
        }
    }
    Ok(OntologyGraph {
        nodes,
        edges,
        q_threshold: q,
    })
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz DOT rendering: one node statement per cluster, one undirected
/// edge per link.
pub fn export_dot(graph: &OntologyGraph) -> String {
    let mut out = String::from("graph ontology {\n");
    for n in &graph.nodes {
        let _ = writeln!(
            out,
            "  c{} [label={}, tooltip={}];",
            n.cluster,
            quote(&n.name),
            quote(&n.descriptors.join(", "))
        );
    }
    for &(a, b) in &graph.edges {
        let _ = writeln!(out, "  c{a} -- c{b};");
    }
    out.push_str("}\n");
    out
}

/// Most frequent class among the cluster's members, ties broken
/// lexicographically; `cluster-<index>` without class labels.
pub fn majority_name(
    assignment: &[usize],
    class_labels: Option<&[String]>,
    cluster: usize,
) -> Result<String> {
    let members: Vec<usize> = (0..assignment.len())
        .filter(|&i| assignment[i] == cluster)
        .collect();
    if members.is_empty() {
        return Err(Error::EmptyCluster(cluster));
    }
    let Some(labels) = class_labels else {
        return Ok(format!("cluster-{cluster}"));
    };
    if labels.len() != assignment.len() {
        return Err(Error::Shape(format!(
            "{} class labels for {} assignments",
            labels.len(),
            assignment.len()
        )));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for &i in &members {
        *counts.entry(labels[i].as_str()).or_default() += 1;
    }
    // BTreeMap iterates in lexicographic order, so the first maximum wins
    let (name, _) = counts
        .into_iter()
        .fold(("", 0), |best, (k, c)| if c > best.1 { (k, c) } else { best });
    Ok(name.to_owned())
}
