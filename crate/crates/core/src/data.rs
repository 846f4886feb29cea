//! Feature and tag datasets: loading, validation, imputation and a seeded
//! synthetic generator.
//!
//! Features are dense real matrices. Tags are ternary: every entry is present,
//! absent or missing. Missing tags are filled with the column mean over the
//! observed entries of the whole dataset before anything downstream uses them.

use std::fs;
use std::path::Path;

use log::warn;
use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// N×D matrix of finite real features, one row per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::Shape("no instances".into()));
        }
        if values.ncols() == 0 {
            return Err(Error::Shape("no feature columns".into()));
        }
        if let Some(((r, c), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Shape(format!(
                "non-finite value {v} at row {r}, column {c}"
            )));
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    /// Per-column zero mean and unit (population) variance. Constant columns
    /// become all zeros.
    pub fn standardize(&self) -> Result<Self> {
        if self.n() < 2 {
            return Err(Error::Shape(
                "standardization needs at least two instances".into(),
            ));
        }
        let mut out = self.values.clone();
        for mut col in out.axis_iter_mut(Axis(1)) {
            let n = col.len() as f64;
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            if std <= 1e-12 * (1.0 + mean.abs()) {
                col.fill(0.0);
            } else {
                col.mapv_inplace(|v| (v - mean) / std);
            }
        }
        Ok(Self { values: out })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| write_err(path, e))?;
        let header: Vec<String> = (0..self.d()).map(|j| format!("f{j}")).collect();
        w.write_record(&header).map_err(|e| write_err(path, e))?;
        for row in self.values.rows() {
            let rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            w.write_record(&rec).map_err(|e| write_err(path, e))?;
        }
        w.flush().map_err(|e| write_err(path, e))?;
        Ok(())
    }
}

fn write_err(path: &Path, e: impl Into<std::io::Error>) -> Error {
    Error::Write {
        path: path.to_owned(),
        source: e.into(),
    }
}

/// Free-function form of [`FeatureMatrix::standardize`].
pub fn standardize_features(f: &FeatureMatrix) -> Result<FeatureMatrix> {
    f.standardize()
}

/// One tag observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TagState {
    Absent,
    Present,
    Missing,
}

impl TagState {
    pub fn is_observed(self) -> bool {
        self != TagState::Missing
    }

    /// 0/1 value for observed entries.
    pub fn value(self) -> Option<f64> {
        match self {
            TagState::Absent => Some(0.0),
            TagState::Present => Some(1.0),
            TagState::Missing => None,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            TagState::Absent => "0",
            TagState::Present => "1",
            TagState::Missing => "?",
        }
    }
}

/// N×M ternary tag annotations with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TagMatrix {
    entries: Array2<TagState>,
    tag_names: Vec<String>,
}

impl TagMatrix {
    pub fn new(entries: Array2<TagState>, tag_names: Vec<String>) -> Result<Self> {
        if tag_names.len() != entries.ncols() {
            return Err(Error::Shape(format!(
                "{} tag names for {} tag columns",
                tag_names.len(),
                entries.ncols()
            )));
        }
        if entries.nrows() == 0 {
            return Err(Error::Shape("no instances".into()));
        }
        Ok(Self { entries, tag_names })
    }

    /// Builds a tag matrix with names `tag0..tagM` from 0/1/missing cells.
    pub fn from_options(rows: &[Vec<Option<bool>>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Shape("ragged tag rows".into()));
        }
        let entries = Array2::from_shape_fn((n, m), |(i, j)| match rows[i][j] {
            Some(true) => TagState::Present,
            Some(false) => TagState::Absent,
            None => TagState::Missing,
        });
        Self::new(entries, (0..m).map(|j| format!("tag{j}")).collect())
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn m(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Array2<TagState> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> TagState {
        self.entries[[i, j]]
    }

    pub fn tag_names(&self) -> &[String] {
        &self.tag_names
    }

    /// Fraction of entries that are observed.
    pub fn annotation_ratio(&self) -> f64 {
        let observed = self.entries.iter().filter(|s| s.is_observed()).count();
        observed as f64 / self.entries.len() as f64
    }

    /// Keeps only the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> TagMatrix {
        TagMatrix {
            entries: self.entries.select(Axis(0), rows),
            tag_names: self.tag_names.clone(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| write_err(path, e))?;
        w.write_record(&self.tag_names).map_err(|e| write_err(path, e))?;
        for row in self.entries.rows() {
            let rec: Vec<&str> = row.iter().map(|s| s.symbol()).collect();
            w.write_record(&rec).map_err(|e| write_err(path, e))?;
        }
        w.flush().map_err(|e| write_err(path, e))?;
        Ok(())
    }
}

/// Tags with missing entries filled by the observed column mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputedTagMatrix {
    values: Array2<f64>,
    observed: Array2<bool>,
    column_means: Vec<f64>,
}

impl ImputedTagMatrix {
    /// Wraps an already-complete matrix of values in `[0, 1]`; every entry
    /// counts as observed.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Shape("tag values must lie in [0, 1]".into()));
        }
        let column_means = values
            .mean_axis(Axis(0))
            .map(|m| m.to_vec())
            .unwrap_or_default();
        let observed = Array2::from_elem(values.raw_dim(), true);
        Ok(Self {
            values,
            observed,
            column_means,
        })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn m(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn observed(&self) -> &Array2<bool> {
        &self.observed
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    /// Tag matrix holding only the observed positions of this one.
    pub fn observed_tags(&self) -> TagMatrix {
        let entries = Array2::from_shape_fn(self.values.raw_dim(), |(i, j)| {
            if !self.observed[[i, j]] {
                TagState::Missing
            } else if self.values[[i, j]] >= 0.5 {
                TagState::Present
            } else {
                TagState::Absent
            }
        });
        let names = (0..self.m()).map(|j| format!("tag{j}")).collect();
        TagMatrix {
            entries,
            tag_names: names,
        }
    }
}

/// Mean imputation over observed entries of each tag column. A column with no
/// observed entry imputes to zero.
pub fn impute_tags(tags: &TagMatrix) -> ImputedTagMatrix {
    let (n, m) = tags.entries.dim();
    let mut column_means = Vec::with_capacity(m);
    for (j, col) in tags.entries.axis_iter(Axis(1)).enumerate() {
        let (sum, count) = col
            .iter()
            .filter_map(|s| s.value())
            .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        if count == 0 {
            warn!("tag '{}' has no observed entries; imputing 0", tags.tag_names[j]);
            column_means.push(0.0);
        } else {
            column_means.push(sum / count as f64);
        }
    }
    let values = Array2::from_shape_fn((n, m), |(i, j)| {
        tags.entries[[i, j]].value().unwrap_or(column_means[j])
    });
    let observed = tags.entries.mapv(TagState::is_observed);
    ImputedTagMatrix {
        values,
        observed,
        column_means,
    }
}

fn load_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Load {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| load_err(path, e))?;
    let header = reader
        .headers()
        .map_err(|e| load_err(path, e))?
        .iter()
        .map(str::to_owned)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| load_err(path, e))?;
        if rec.len() != header.len() {
            return Err(load_err(
                path,
                format!(
                    "row {} has {} cells, header has {}",
                    r + 1,
                    rec.len(),
                    header.len()
                ),
            ));
        }
        rows.push(rec);
    }
    if rows.is_empty() {
        return Err(load_err(path, "no instances"));
    }
    Ok((header, rows))
}

/// Reads a header-prefixed numeric CSV. Row numbers in errors count data rows
/// from 1.
pub fn load_features(path: &Path) -> Result<FeatureMatrix> {
    let (header, rows) = read_csv(path)?;
    let (n, d) = (rows.len(), header.len());
    let mut values = Array2::zeros((n, d));
    for (r, rec) in rows.iter().enumerate() {
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                load_err(
                    path,
                    format!("row {} column '{}': '{cell}' is not a number", r + 1, header[c]),
                )
            })?;
            if !v.is_finite() {
                return Err(load_err(
                    path,
                    format!("row {} column '{}': non-finite value", r + 1, header[c]),
                ));
            }
            values[[r, c]] = v;
        }
    }
    FeatureMatrix::new(values).map_err(|e| load_err(path, e))
}

/// Reads a tag CSV whose cells are `0`, `1` or `?`.
pub fn load_tags(path: &Path) -> Result<TagMatrix> {
    let (header, rows) = read_csv(path)?;
    let (n, m) = (rows.len(), header.len());
    let mut entries = Array2::from_elem((n, m), TagState::Missing);
    for (r, rec) in rows.iter().enumerate() {
        for (c, cell) in rec.iter().enumerate() {
            entries[[r, c]] = match cell {
                "0" => TagState::Absent,
                "1" => TagState::Present,
                "?" => TagState::Missing,
                other => {
                    return Err(load_err(
                        path,
                        format!(
                            "row {} column '{}': '{other}' is not one of 0, 1, ?",
                            r + 1,
                            header[c]
                        ),
                    ))
                }
            };
        }
    }
    let tags = TagMatrix::new(entries, header).map_err(|e| load_err(path, e))?;
    if tags.annotation_ratio() == 0.0 {
        warn!("{}: every tag entry is missing", path.display());
    }
    Ok(tags)
}

/// Reads one label per non-empty line.
pub fn load_labels(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| load_err(path, e))?;
    let labels: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect();
    if labels.is_empty() {
        return Err(load_err(path, "no labels"));
    }
    Ok(labels)
}

/// Reads one non-negative integer cluster index per non-empty line.
pub fn load_assignments(path: &Path) -> Result<Vec<usize>> {
    load_labels(path)?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.parse::<usize>().map_err(|_| {
                load_err(path, format!("line {}: '{s}' is not a cluster index", i + 1))
            })
        })
        .collect()
}

pub fn write_labels<T: std::fmt::Display>(path: &Path, labels: &[T]) -> Result<()> {
    let mut text = String::new();
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| write_err(path, e))
}

/// Parameters of the Gaussian-blob generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub k_true: usize,
    pub n_per_cluster: usize,
    pub d: usize,
    pub m: usize,
    pub informative_tags: usize,
    pub tag_flip_noise: f64,
    pub cluster_spread: f64,
    pub annotation_ratio: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            k_true: 4,
            n_per_cluster: 200,
            d: 10,
            m: 12,
            informative_tags: 8,
            tag_flip_noise: 0.05,
            cluster_spread: 1.0,
            annotation_ratio: 0.5,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("k_true", self.k_true),
            ("n_per_cluster", self.n_per_cluster),
            ("d", self.d),
            ("m", self.m),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.informative_tags > self.m {
            return Err(Error::InvalidConfig(
                "informative_tags cannot exceed m".into(),
            ));
        }
        for (name, p) in [
            ("tag_flip_noise", self.tag_flip_noise),
            ("annotation_ratio", self.annotation_ratio),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.cluster_spread >= 0.0 && self.cluster_spread.is_finite()) {
            return Err(Error::InvalidConfig(
                "cluster_spread must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Cluster that informative tag `j` indicates. Informative tags are split
    /// into contiguous blocks, one block per cluster.
    pub fn tag_owner(&self, j: usize) -> Option<usize> {
        (j < self.informative_tags).then(|| j * self.k_true / self.informative_tags)
    }
}

/// Generated dataset plus its ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub features: FeatureMatrix,
    pub tags: TagMatrix,
    pub labels: Vec<usize>,
}

/// Side length of the box cluster centers are drawn from.
const CENTER_BOX: f64 = 10.0;

/// Draws isotropic Gaussian blobs with block-indicator tags. Instances are
/// ordered by cluster.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (k, d, m) = (spec.k_true, spec.d, spec.m);
    let n = k * spec.n_per_cluster;

    let centers = Array2::from_shape_fn((k, d), |_| rng.random_range(-CENTER_BOX..CENTER_BOX));
    let labels: Vec<usize> = (0..n).map(|i| i / spec.n_per_cluster).collect();

    let mut features = Array2::zeros((n, d));
    for (i, &c) in labels.iter().enumerate() {
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            features[[i, j]] = centers[[c, j]] + spec.cluster_spread * z;
        }
    }

    let mut entries = Array2::from_elem((n, m), TagState::Absent);
    for (i, &c) in labels.iter().enumerate() {
        for j in 0..m {
            let bit = match spec.tag_owner(j) {
                Some(owner) => (owner == c) ^ rng.random_bool(spec.tag_flip_noise),
                None => rng.random_bool(0.5),
            };
            entries[[i, j]] = if bit { TagState::Present } else { TagState::Absent };
        }
    }
    for e in entries.iter_mut() {
        if !rng.random_bool(spec.annotation_ratio) {
            *e = TagState::Missing;
        }
    }

    let names = (0..m)
        .map(|j| match spec.tag_owner(j) {
            Some(owner) => format!("c{owner}_t{j}"),
            None => format!("noise_t{j}"),
        })
        .collect();
    Ok(SyntheticData {
        features: FeatureMatrix::new(features)?,
        tags: TagMatrix::new(entries, names)?,
        labels,
    })
}

/// Shuffled copy of `0..n` drawn from `rng`.
pub(crate) fn permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write as _;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_small_feature_file() {
        let f = write_tmp("f0,f1\n1,2\n3,4\n5.5,-6\n");
        let fm = load_features(f.path()).unwrap();
        assert_eq!((fm.n(), fm.d()), (3, 2));
        assert_eq!(fm.values()[[2, 0]], 5.5);
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let f = write_tmp("f0,f1\n1,2\n3,abc\n");
        let msg = load_features(f.path()).unwrap_err().to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains("f1"), "{msg}");
    }

    #[test]
    fn header_only_file_has_no_instances() {
        let f = write_tmp("f0,f1\n");
        let msg = load_features(f.path()).unwrap_err().to_string();
        assert!(msg.contains("no instances"), "{msg}");
    }

    #[test]
    fn ragged_and_nan_rows_rejected() {
        let f = write_tmp("f0,f1\n1,2\n3\n");
        assert!(load_features(f.path()).is_err());
        let f = write_tmp("f0,f1\n1,NaN\n");
        assert!(load_features(f.path()).is_err());
        let f = write_tmp("f0,f1\n1,inf\n");
        assert!(load_features(f.path()).is_err());
    }

    #[test]
    fn tag_annotation_ratio() {
        let f = write_tmp("a,b,c\n1,0,?\n1,1,1\n");
        let t = load_tags(f.path()).unwrap();
        assert_eq!(t.tag_names(), ["a", "b", "c"]);
        assert!((t.annotation_ratio() - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(t.get(0, 2), TagState::Missing);
    }

    #[test]
    fn all_missing_tags_are_valid() {
        let f = write_tmp("a,b\n?,?\n?,?\n");
        let t = load_tags(f.path()).unwrap();
        assert_eq!(t.annotation_ratio(), 0.0);
    }

    #[test]
    fn tag_cell_outside_alphabet_rejected() {
        let f = write_tmp("a,b\n1,2\n");
        let msg = load_tags(f.path()).unwrap_err().to_string();
        assert!(msg.contains("'2'"), "{msg}");
    }

    #[test]
    fn imputation_uses_observed_column_mean() {
        let t = TagMatrix::from_options(&[
            vec![Some(true), Some(true), None],
            vec![Some(false), Some(false), None],
            vec![None, Some(true), None],
            vec![Some(true), Some(false), None],
        ])
        .unwrap();
        let imp = impute_tags(&t);
        assert!((imp.values()[[2, 0]] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(imp.values()[[0, 0]], 1.0);
        assert_eq!(imp.values().column(1).to_vec(), vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(imp.values().column(2).to_vec(), vec![0.0; 4]);
        assert_eq!(imp.column_means()[2], 0.0);
    }

    #[test]
    fn standardization_cases() {
        let f = FeatureMatrix::new(array![[0.0, 5.0], [2.0, 5.0]]).unwrap();
        let s = f.standardize().unwrap();
        assert_eq!(s.values(), &array![[-1.0, 0.0], [1.0, 0.0]]);

        let f = FeatureMatrix::new(array![[5.0], [5.0], [5.0]]).unwrap();
        assert_eq!(f.standardize().unwrap().values(), &array![[0.0], [0.0], [0.0]]);

        let f = FeatureMatrix::new(array![[1.0, -3.0], [2.5, 0.0], [7.0, 10.0]]).unwrap();
        let once = f.standardize().unwrap();
        let twice = once.standardize().unwrap();
        for (a, b) in once.values().iter().zip(twice.values()) {
            assert!((a - b).abs() < 1e-9);
        }

        let single = FeatureMatrix::new(array![[1.0]]).unwrap();
        assert!(single.standardize().is_err());
    }

    #[test]
    fn zero_noise_synthetic_is_exact() {
        let spec = SyntheticSpec {
            k_true: 2,
            n_per_cluster: 5,
            d: 3,
            m: 4,
            informative_tags: 2,
            tag_flip_noise: 0.0,
            cluster_spread: 0.0,
            annotation_ratio: 1.0,
            seed: 7,
        };
        let data = generate_synthetic(&spec).unwrap();
        assert_eq!(data.labels, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        for i in 0..10 {
            let c = data.labels[i];
            assert_eq!(data.features.row(i), data.features.row(c * 5));
            assert_eq!(data.tags.get(i, 0) == TagState::Present, c == 0);
            assert_eq!(data.tags.get(i, 1) == TagState::Present, c == 1);
        }
        assert_ne!(data.features.row(0), data.features.row(5));
        assert_eq!(data.tags.annotation_ratio(), 1.0);
    }

    #[test]
    fn synthetic_is_reproducible() {
        let spec = SyntheticSpec {
            seed: 42,
            ..SyntheticSpec::default()
        };
        assert_eq!(
            generate_synthetic(&spec).unwrap(),
            generate_synthetic(&spec).unwrap()
        );
        let other = SyntheticSpec { seed: 43, ..spec };
        assert_ne!(
            generate_synthetic(&other).unwrap().features,
            generate_synthetic(&SyntheticSpec::default()).unwrap().features
        );
    }

    #[test]
    fn missing_fraction_within_binomial_bound() {
        let spec = SyntheticSpec {
            annotation_ratio: 0.5,
            seed: 3,
            ..SyntheticSpec::default()
        };
        let data = generate_synthetic(&spec).unwrap();
        let total = (data.tags.n() * data.tags.m()) as f64;
        let missing = 1.0 - data.tags.annotation_ratio();
        let sigma = (0.5 * 0.5 / total).sqrt();
        assert!((missing - 0.5).abs() <= 3.0 * sigma, "missing {missing}");
    }

    #[test]
    fn synthetic_spec_validation() {
        let bad = SyntheticSpec {
            annotation_ratio: 1.5,
            ..SyntheticSpec::default()
        };
        assert!(generate_synthetic(&bad).is_err());
        let bad = SyntheticSpec {
            k_true: 0,
            ..SyntheticSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_writers_round_trip() {
        let data = generate_synthetic(&SyntheticSpec {
            n_per_cluster: 3,
            ..SyntheticSpec::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let fp = dir.path().join("features.csv");
        let tp = dir.path().join("tags.csv");
        data.features.write_csv(&fp).unwrap();
        data.tags.write_csv(&tp).unwrap();
        assert_eq!(load_features(&fp).unwrap(), data.features);
        assert_eq!(load_tags(&tp).unwrap(), data.tags);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn tag_matrix() -> impl Strategy<Value = TagMatrix> {
            (1usize..8, 1usize..6).prop_flat_map(|(n, m)| {
                proptest::collection::vec(
                    proptest::collection::vec(proptest::option::of(any::<bool>()), m),
                    n,
                )
                .prop_map(|rows| TagMatrix::from_options(&rows).unwrap())
            })
        }

        proptest! {
            #[test]
            fn imputed_values_in_unit_interval(t in tag_matrix()) {
                let imp = impute_tags(&t);
                prop_assert!(imp.values().iter().all(|v| (0.0..=1.0).contains(v)));
            }

            #[test]
            fn imputation_idempotent_on_observed_mask(t in tag_matrix()) {
                let imp = impute_tags(&t);
                let again = impute_tags(&imp.observed_tags());
                prop_assert_eq!(imp.values(), again.values());
                prop_assert_eq!(imp.observed(), again.observed());
            }
        }
    }
}
