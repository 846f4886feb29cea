//! Pipeline commands behind the `descluster` binary. Each command reads its
//! inputs, runs the relevant modules and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::data::{
    generate_synthetic, impute_tags, load_assignments, load_features, load_labels, load_tags,
    write_labels, SyntheticSpec, TagMatrix,
};
use crate::error::{Error, Result};
use crate::explain::{compute_coverage, solve_with_beta_search, ExplanationReport};
use crate::metrics::{encode_labels, MetricReport};
use crate::ontology::{build_ontology, export_dot, majority_name, OntologyGraph};
use crate::trainer::{train, TrainConfig};

pub const MODEL_FILE: &str = "model.json";
pub const ASSIGNMENTS_FILE: &str = "assignments.txt";
pub const EXPLANATION_FILE: &str = "explanation.json";
pub const REPORT_FILE: &str = "train_report.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const ONTOLOGY_FILE: &str = "ontology.dot";

fn default_ontology_q() -> usize {
    3
}

fn default_true() -> bool {
    true
}

/// Contents of a training config file. Paths are resolved against the
/// config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub features_path: PathBuf,
    pub tags_path: PathBuf,
    #[serde(default)]
    pub labels_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default = "default_ontology_q")]
    pub ontology_q: usize,
    /// Z-score features before training.
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default)]
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("features_path", &self.features_path),
            ("tags_path", &self.tags_path),
            ("output_dir", &self.output_dir),
        ] {
            if p.as_os_str().is_empty() {
                return Err(Error::InvalidConfig(format!("{name} must not be empty")));
            }
        }
        if self.ontology_q == 0 {
            return Err(Error::InvalidConfig("ontology_q must be at least 1".into()));
        }
        self.train.validate()
    }

    fn resolve_against(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.features_path);
        fix(&mut self.tags_path);
        fix(&mut self.output_dir);
        if let Some(l) = self.labels_path.as_mut() {
            fix(l);
        }
    }
}

/// Sets `table[a][b]... = value` for a dotted key, parsing `value` as a TOML
/// value and falling back to a plain string.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("override '{assignment}' is not key=value")))?;
    let value: toml::Value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_owned()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::InvalidConfig(format!("'{p}' is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Parses a config document with `key=value` overrides applied on top.
pub fn parse_run_config(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let config: RunConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))?;
    Ok(config)
}

pub fn load_run_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Load {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    let mut config = parse_run_config(&text, overrides).map_err(|e| Error::Load {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    config.resolve_against(path.parent().unwrap_or(Path::new(".")));
    Ok(config)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Write {
        path: path.to_owned(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_owned(),
        source,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Load {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Load {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

fn ensure_rows(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Shape(format!(
            "{what} has {got} rows, expected {expected}"
        )));
    }
    Ok(())
}

fn cluster_names(assignment: &[usize], classes: Option<&[String]>, k: usize) -> Result<Vec<String>> {
    (0..k)
        .map(|c| match majority_name(assignment, classes, c) {
            Err(Error::EmptyCluster(_)) => Ok(format!("cluster-{c}")),
            other => other,
        })
        .collect()
}

fn descriptor_names(report: &ExplanationReport) -> Vec<Vec<String>> {
    report.clusters.iter().map(|c| c.descriptors.clone()).collect()
}

/// Paths of everything `cmd_train` wrote.
#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub model: PathBuf,
    pub assignments: PathBuf,
    pub explanation: PathBuf,
    pub report: PathBuf,
    pub metrics: Option<PathBuf>,
    pub ontology: PathBuf,
}

pub fn cmd_train(config: &RunConfig) -> Result<TrainArtifacts> {
    config.validate()?;
    let mut features = load_features(&config.features_path)?;
    let raw_tags = load_tags(&config.tags_path)?;
    ensure_rows("tag file", raw_tags.n(), features.n())?;
    let truth = match &config.labels_path {
        Some(p) => {
            let l = load_labels(p)?;
            ensure_rows("label file", l.len(), features.n())?;
            Some(l)
        }
        None => None,
    };
    if config.standardize {
        features = features.standardize()?;
    }
    let tags = impute_tags(&raw_tags);
    info!(
        "training on {} instances, {} features, {} tags (annotation ratio {:.3})",
        features.n(),
        features.d(),
        raw_tags.m(),
        raw_tags.annotation_ratio()
    );
    let outcome = train(&features, &tags, &config.train)?;

    let dir = &config.output_dir;
    create_dir(dir)?;
    let artifacts = TrainArtifacts {
        model: dir.join(MODEL_FILE),
        assignments: dir.join(ASSIGNMENTS_FILE),
        explanation: dir.join(EXPLANATION_FILE),
        report: dir.join(REPORT_FILE),
        metrics: truth.as_ref().map(|_| dir.join(METRICS_FILE)),
        ontology: dir.join(ONTOLOGY_FILE),
    };
    outcome.model.save_checkpoint(&artifacts.model)?;
    let labels = &outcome.report.final_labels;
    write_labels(&artifacts.assignments, labels)?;
    let explanation = ExplanationReport::new(
        &outcome.explanation,
        &outcome.coverage,
        raw_tags.tag_names(),
        config.train.alpha,
    );
    write_json(&artifacts.explanation, &explanation)?;
    write_json(&artifacts.report, &outcome.report)?;

    if let (Some(path), Some(truth)) = (&artifacts.metrics, &truth) {
        let report = MetricReport::new()
            .with_clustering(labels, &encode_labels(truth))?
            .with_explanation(&raw_tags, labels, &explanation.descriptor_sets())?;
        write_json(path, &report)?;
    }

    let names = cluster_names(labels, truth.as_deref(), config.train.k)?;
    let graph = build_ontology(&descriptor_names(&explanation), config.ontology_q, &names)?;
    write_text(&artifacts.ontology, &export_dot(&graph))?;
    Ok(artifacts)
}

/// Explains an externally supplied clustering.
pub fn cmd_explain(
    assignments_path: &Path,
    tags_path: &Path,
    alpha: f64,
    output: &Path,
) -> Result<ExplanationReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    let assignment = load_assignments(assignments_path)?;
    let raw = load_tags(tags_path)?;
    ensure_rows("assignment file", assignment.len(), raw.n())?;
    let k = assignment.iter().max().map_or(0, |m| m + 1);
    let q = compute_coverage(&impute_tags(&raw), &assignment, k)?;
    let result = solve_with_beta_search(&q, alpha)?;
    let report = ExplanationReport::new(&result, &q, raw.tag_names(), alpha);
    write_json(output, &report)?;
    Ok(report)
}

/// Metrics for whatever inputs are supplied: NMI/ACC need ground truth,
/// TC/ITF need an explanation and the raw tags.
pub fn cmd_evaluate(
    assignments_path: &Path,
    truth_path: Option<&Path>,
    explanation_path: Option<&Path>,
    tags_path: Option<&Path>,
    output: &Path,
) -> Result<MetricReport> {
    let assignment = load_assignments(assignments_path)?;
    let mut report = MetricReport::new();
    if let Some(p) = truth_path {
        let truth = load_labels(p)?;
        ensure_rows("truth file", truth.len(), assignment.len())?;
        report = report.with_clustering(&assignment, &encode_labels(&truth))?;
    }
    if let Some(p) = explanation_path {
        let explanation: ExplanationReport = read_json(p)?;
        let tags_path = tags_path.ok_or_else(|| {
            Error::InvalidConfig("tag coverage needs the tag file alongside the explanation".into())
        })?;
        let tags: TagMatrix = load_tags(tags_path)?;
        ensure_rows("tag file", tags.n(), assignment.len())?;
        if tags.m() != explanation.tag_names.len() {
            return Err(Error::Shape(format!(
                "explanation covers {} tags, tag file has {}",
                explanation.tag_names.len(),
                tags.m()
            )));
        }
        report = report.with_explanation(&tags, &assignment, &explanation.descriptor_sets())?;
    }
    if report.nmi.is_none() && report.tc.is_none() {
        return Err(Error::InvalidConfig(
            "nothing to evaluate: supply ground truth and/or an explanation".into(),
        ));
    }
    write_json(output, &report)?;
    Ok(report)
}

/// Writes the DOT ontology of an explanation. Cluster names come from the
/// majority ground-truth class when both assignments and classes are given.
pub fn cmd_ontology(
    explanation_path: &Path,
    q: usize,
    output: &Path,
    assignments_path: Option<&Path>,
    classes_path: Option<&Path>,
) -> Result<OntologyGraph> {
    let explanation: ExplanationReport = read_json(explanation_path)?;
    let k = explanation.clusters.len();
    let names = match (assignments_path, classes_path) {
        (Some(a), Some(c)) => {
            let assignment = load_assignments(a)?;
            let classes = load_labels(c)?;
            ensure_rows("class file", classes.len(), assignment.len())?;
            cluster_names(&assignment, Some(&classes), k)?
        }
        _ => (0..k).map(|c| format!("cluster-{c}")).collect(),
    };
    let graph = build_ontology(&descriptor_names(&explanation), q, &names)?;
    write_text(output, &export_dot(&graph))?;
    Ok(graph)
}

pub const SYNTH_FEATURES_FILE: &str = "features.csv";
pub const SYNTH_TAGS_FILE: &str = "tags.csv";
pub const SYNTH_TRUTH_FILE: &str = "truth.txt";

/// Writes a synthetic dataset (features, tags, ground truth) into `dir`.
pub fn cmd_synth(spec: &SyntheticSpec, dir: &Path) -> Result<[PathBuf; 3]> {
    let data = generate_synthetic(spec)?;
    create_dir(dir)?;
    let paths = [
        dir.join(SYNTH_FEATURES_FILE),
        dir.join(SYNTH_TAGS_FILE),
        dir.join(SYNTH_TRUTH_FILE),
    ];
    data.features.write_csv(&paths[0])?;
    data.tags.write_csv(&paths[1])?;
    write_labels(&paths[2], &data.labels)?;
    Ok(paths)
}
