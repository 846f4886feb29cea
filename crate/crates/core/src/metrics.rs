//! Explanation quality (tag coverage, inverse tag frequency) and clustering
//! quality (NMI, accuracy under the best cluster-to-class matching).

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{TagMatrix, TagState};
use crate::error::{Error, Result};

/// Mean over descriptor tags of the fraction of members observed with the
/// tag, among members where that tag is observed. A tag observed for no
/// member contributes 0.
pub fn tag_coverage(tags: &TagMatrix, members: &[usize], descriptors: &[usize]) -> Result<f64> {
    if descriptors.is_empty() {
        return Err(Error::Metric("tag coverage of an empty descriptor set".into()));
    }
    if members.is_empty() {
        return Err(Error::Metric("tag coverage of an empty cluster".into()));
    }
    let mut total = 0.0;
    for &d in descriptors {
        let (mut present, mut observed) = (0usize, 0usize);
        for &i in members {
            match tags.get(i, d) {
                TagState::Present => {
                    present += 1;
                    observed += 1;
                }
                TagState::Absent => observed += 1,
                TagState::Missing => {}
            }
        }
        if observed == 0 {
            warn!("tag {d} is missing for every member; counting coverage 0");
        } else {
            total += present as f64 / observed as f64;
        }
    }
    Ok(total / descriptors.len() as f64)
}

/// Mean over the cluster's descriptors of `log2(K / #clusters using it)`.
pub fn inverse_tag_frequency(descriptor_sets: &[Vec<usize>], cluster: usize) -> Result<f64> {
    let k = descriptor_sets.len();
    let own = descriptor_sets
        .get(cluster)
        .ok_or_else(|| Error::Metric(format!("cluster {cluster} out of range for {k}")))?;
    if own.is_empty() {
        return Err(Error::Metric(format!(
            "cluster {cluster} has an empty descriptor set"
        )));
    }
    let sum: f64 = own
        .iter()
        .map(|d| {
            let users = descriptor_sets.iter().filter(|s| s.contains(d)).count();
            (k as f64 / users as f64).log2()
        })
        .sum();
    Ok(sum / own.len() as f64)
}

fn check_lengths(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::Metric(format!(
            "{} predictions for {} ground-truth labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Metric("no labels to compare".into()));
    }
    Ok(())
}

/// Dense confusion counts with labels compacted to `0..n_pred` × `0..n_truth`.
fn contingency(pred: &[usize], truth: &[usize]) -> Vec<Vec<u64>> {
    let compact = |labels: &[usize]| {
        let ids: BTreeMap<usize, usize> = labels
            .iter()
            .copied()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, l)| (l, i))
            .collect();
        (labels.iter().map(|l| ids[l]).collect::<Vec<_>>(), ids.len())
    };
    let (p, np) = compact(pred);
    let (t, nt) = compact(truth);
    let mut table = vec![vec![0u64; nt]; np];
    for (a, b) in p.into_iter().zip(t) {
        table[a][b] += 1;
    }
    table
}

fn entropy(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with the geometric-mean normalization.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let table = contingency(pred, truth);
    let n = pred.len() as f64;
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..table[0].len())
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    let hp = entropy(rows.iter().copied(), n);
    let ht = entropy(cols.iter().copied(), n);
    if hp == 0.0 || ht == 0.0 {
        // a constant labelling only matches another constant labelling
        return Ok(if hp == ht { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials). Returns the column assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    const INF: i64 = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Fraction of instances agreeing under the best one-to-one mapping of
/// predicted clusters to ground-truth classes.
pub fn clustering_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let table = contingency(pred, truth);
    let size = table.len().max(table[0].len());
    let max = table.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost: Vec<Vec<i64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| max - table.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0) as i64)
                .collect()
        })
        .collect();
    let matched: u64 = min_cost_assignment(&cost)
        .iter()
        .enumerate()
        .map(|(i, &j)| table.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0))
        .sum();
    Ok(matched as f64 / pred.len() as f64)
}

/// Maps arbitrary string labels to dense indices in first-seen order.
pub fn encode_labels(labels: &[String]) -> Vec<usize> {
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l.as_str()).or_insert(next)
        })
        .collect()
}

pub const METRICS_SCHEMA_VERSION: u32 = 1;

/// Evaluation output. Fields are absent when their inputs were not supplied.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub schema_version: u32,
    /// Per cluster; `null` for clusters without members.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tc: Option<Vec<Option<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub itf: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nmi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub acc: Option<f64>,
}

impl MetricReport {
    pub fn new() -> Self {
        Self {
            schema_version: METRICS_SCHEMA_VERSION,
            ..Self::default()
        }
    }

    pub fn with_clustering(mut self, pred: &[usize], truth: &[usize]) -> Result<Self> {
        self.nmi = Some(nmi(pred, truth)?);
        self.acc = Some(clustering_accuracy(pred, truth)?);
        Ok(self)
    }

    /// TC per cluster over raw tags, and ITF per cluster over the descriptor
    /// sets.
    pub fn with_explanation(
        mut self,
        tags: &TagMatrix,
        assignment: &[usize],
        descriptor_sets: &[Vec<usize>],
    ) -> Result<Self> {
        if assignment.len() != tags.n() {
            return Err(Error::Metric(format!(
                "{} assignments for {} tagged instances",
                assignment.len(),
                tags.n()
            )));
        }
        let mut tc = Vec::with_capacity(descriptor_sets.len());
        let mut itf = Vec::with_capacity(descriptor_sets.len());
        for (c, d) in descriptor_sets.iter().enumerate() {
            let members: Vec<usize> = (0..assignment.len()).filter(|&i| assignment[i] == c).collect();
            tc.push(if members.is_empty() {
                None
            } else {
                Some(tag_coverage(tags, &members, d)?)
            });
            itf.push(inverse_tag_frequency(descriptor_sets, c)?);
        }
        self.tc = Some(tc);
        self.itf = Some(itf);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn tags(rows: &[Vec<Option<bool>>]) -> TagMatrix {
        TagMatrix::from_options(rows).unwrap()
    }

    #[test]
    fn full_coverage_is_one() {
        let t = tags(&[vec![Some(true), Some(true)], vec![Some(true), Some(true)]]);
        assert_eq!(tag_coverage(&t, &[0, 1], &[0, 1]).unwrap(), 1.0);
    }

    #[test]
    fn half_coverage() {
        let t = tags(&[vec![Some(true)], vec![Some(false)]]);
        assert_eq!(tag_coverage(&t, &[0, 1], &[0]).unwrap(), 0.5);
    }

    #[test]
    fn missing_entries_excluded_and_all_missing_counts_zero() {
        let t = tags(&[vec![Some(true), None], vec![None, None], vec![Some(true), None]]);
        assert_eq!(tag_coverage(&t, &[0, 1, 2], &[0]).unwrap(), 1.0);
        assert_eq!(tag_coverage(&t, &[0, 1, 2], &[1]).unwrap(), 0.0);
        assert_eq!(tag_coverage(&t, &[0, 1, 2], &[0, 1]).unwrap(), 0.5);
        assert!(tag_coverage(&t, &[0], &[]).is_err());
    }

    #[test]
    fn itf_cases() {
        let disjoint: Vec<Vec<usize>> = (0..5).map(|c| vec![2 * c, 2 * c + 1]).collect();
        for c in 0..5 {
            let v = inverse_tag_frequency(&disjoint, c).unwrap();
            assert!((v - 5f64.log2()).abs() < 1e-12);
            assert!((v - 2.32).abs() < 0.005);
        }
        let shared = vec![vec![0, 1], vec![0], vec![0, 2]];
        assert_eq!(inverse_tag_frequency(&shared, 1).unwrap(), 0.0);
        assert_eq!(inverse_tag_frequency(&[vec![3]], 0).unwrap(), 0.0);
        assert!(inverse_tag_frequency(&[vec![], vec![1]], 0).is_err());
    }

    #[test]
    fn nmi_cases() {
        let truth = [0, 0, 1, 1, 2, 2];
        assert!((nmi(&truth, &truth).unwrap() - 1.0).abs() < 1e-12);
        assert!((nmi(&[5, 5, 9, 9, 1, 1], &truth).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(nmi(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap(), 0.0);
        assert_eq!(nmi(&[3, 3], &[1, 1]).unwrap(), 1.0);
        assert!(nmi(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn nmi_hand_value() {
        // pred {0,0,1,1}, truth {0,1,1,1}: I = ln2 - 3/4 ln 3 + ... computed directly
        let pred = [0, 0, 1, 1];
        let truth = [0, 1, 1, 1];
        let n = 4.0f64;
        let cells = [(1.0, 2.0, 1.0), (1.0, 2.0, 3.0), (2.0, 2.0, 3.0)];
        let mi: f64 = cells.iter().map(|&(c, r, k)| c / n * (c * n / (r * k)).ln()).sum();
        let hp = 2f64.ln();
        let ht = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        let expected = mi / (hp * ht).sqrt();
        assert!((nmi(&pred, &truth).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn accuracy_cases() {
        let truth = [0, 0, 1, 1, 2, 2];
        assert_eq!(clustering_accuracy(&truth, &truth).unwrap(), 1.0);
        assert_eq!(clustering_accuracy(&[2, 2, 0, 0, 1, 1], &truth).unwrap(), 1.0);
        assert_eq!(clustering_accuracy(&[0; 6], &truth).unwrap(), 2.0 / 6.0);
        assert!(clustering_accuracy(&[0], &[]).is_err());
    }

    fn brute_force_accuracy(pred: &[usize], truth: &[usize], k: usize) -> f64 {
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(k - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, k - 1);
                    out.push(q);
                }
            }
            out
        }
        perms(k)
            .iter()
            .map(|perm| pred.iter().zip(truth).filter(|(&p, &t)| perm[p] == t).count())
            .max()
            .unwrap() as f64
            / pred.len() as f64
    }

    #[test]
    fn hungarian_matches_permutation_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let k = rng.random_range(1..=6);
            let n = rng.random_range(1..60);
            let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
            let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
            assert_eq!(
                clustering_accuracy(&pred, &truth).unwrap(),
                brute_force_accuracy(&pred, &truth, k)
            );
        }
    }

    #[test]
    fn report_omits_missing_sections() {
        let r = MetricReport::new().with_clustering(&[0, 1], &[1, 0]).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("tc").is_none());
        assert_eq!(json["nmi"], 1.0);
        assert_eq!(json["acc"], 1.0);
    }

    #[test]
    fn encode_labels_dense() {
        let l: Vec<String> = ["cat", "dog", "cat", "eel"].iter().map(|s| s.to_string()).collect();
        assert_eq!(encode_labels(&l), vec![0, 1, 0, 2]);
    }

    proptest! {
        #[test]
        fn metric_ranges_and_relabel_symmetry(
            pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..40),
            shift in 1usize..4,
        ) {
            let (pred, truth): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let relabeled: Vec<usize> = pred.iter().map(|p| (p + shift) % 4 + 10).collect();
            let a = nmi(&pred, &truth).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!((a - nmi(&relabeled, &truth).unwrap()).abs() < 1e-12);
            let acc = clustering_accuracy(&pred, &truth).unwrap();
            prop_assert!((0.0..=1.0).contains(&acc));
            prop_assert_eq!(acc, clustering_accuracy(&relabeled, &truth).unwrap());
        }

        #[test]
        fn single_label_accuracy_pigeonhole(truth in proptest::collection::vec(0usize..5, 1..50)) {
            let k = truth.iter().collect::<std::collections::BTreeSet<_>>().len();
            let acc = clustering_accuracy(&vec![0; truth.len()], &truth).unwrap();
            prop_assert!(acc >= 1.0 / k as f64 - 1e-12);
        }

        #[test]
        fn tc_and_itf_ranges(
            cells in proptest::collection::vec(proptest::option::of(any::<bool>()), 12),
            sets in proptest::collection::vec(proptest::collection::btree_set(0usize..4, 1..4), 1..5),
        ) {
            let rows: Vec<Vec<Option<bool>>> = cells.chunks(4).map(|c| c.to_vec()).collect();
            let t = tags(&rows);
            let sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
            let k = sets.len() as f64;
            for (c, d) in sets.iter().enumerate() {
                let tc = tag_coverage(&t, &[0, 1, 2], d).unwrap();
                prop_assert!((0.0..=1.0).contains(&tc));
                let itf = inverse_tag_frequency(&sets, c).unwrap();
                prop_assert!(itf >= 0.0 && itf <= k.log2() + 1e-12);
            }
        }
    }
}
