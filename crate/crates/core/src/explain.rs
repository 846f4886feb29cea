//! Cluster-level explanations.
//!
//! Given a clustering and (imputed) tags, the coverage matrix `Q` holds the
//! fraction of each cluster carrying each tag. The explanation is the smallest
//! binary allocation `W` (cluster × tag) such that every cluster's selected
//! coverage reaches `alpha` and no tag's coverage summed over the clusters
//! using it exceeds `beta`. `beta` is searched upward from 0 in unit steps and
//! the first feasible value is kept. Tags used anywhere in `W` form the mask
//! applied to tag space before pair mining.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::ImputedTagMatrix;
use crate::error::{Error, Result};
use crate::ilp::{self, Constraint, IlpProblem, FEASIBILITY_TOL};

/// K×M coverage matrix `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMatrix {
    q: Array2<f64>,
    cluster_sizes: Vec<usize>,
}

impl CoverageMatrix {
    /// Wraps a coverage matrix directly; entries must lie in `[0, 1]`.
    pub fn from_array(q: Array2<f64>) -> Result<Self> {
        if q.nrows() == 0 || q.ncols() == 0 {
            return Err(Error::Shape("coverage matrix must be non-empty".into()));
        }
        if q.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Shape("coverage entries must lie in [0, 1]".into()));
        }
        let cluster_sizes = vec![0; q.nrows()];
        Ok(Self { q, cluster_sizes })
    }

    pub fn q(&self) -> &Array2<f64> {
        &self.q
    }

    pub fn k(&self) -> usize {
        self.q.nrows()
    }

    pub fn m(&self) -> usize {
        self.q.ncols()
    }

    /// Member counts; zeros when built with [`CoverageMatrix::from_array`].
    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }
}

/// Mean imputed tag value per cluster.
pub fn compute_coverage(
    tags: &ImputedTagMatrix,
    assignment: &[usize],
    k: usize,
) -> Result<CoverageMatrix> {
    if assignment.len() != tags.n() {
        return Err(Error::Shape(format!(
            "{} labels for {} tagged instances",
            assignment.len(),
            tags.n()
        )));
    }
    if let Some(&bad) = assignment.iter().find(|&&c| c >= k) {
        return Err(Error::Shape(format!("label {bad} outside 0..{k}")));
    }
    let mut q = Array2::zeros((k, tags.m()));
    let mut sizes = vec![0usize; k];
    for (row, &c) in tags.values().rows().into_iter().zip(assignment) {
        sizes[c] += 1;
        let mut qrow = q.row_mut(c);
        qrow += &row;
    }
    for (c, &size) in sizes.iter().enumerate() {
        if size == 0 {
            return Err(Error::EmptyCluster(c));
        }
        q.row_mut(c).mapv_inplace(|v| (v / size as f64).clamp(0.0, 1.0));
    }
    Ok(CoverageMatrix {
        q,
        cluster_sizes: sizes,
    })
}

/// Variable `i * M + j` is `W[i][j]`. Rows `0..K` are coverage constraints,
/// rows `K..K+M` orthogonality constraints.
pub fn build_explanation_ilp(q: &CoverageMatrix, alpha: f64, beta: f64) -> IlpProblem {
    let (k, m) = (q.k(), q.m());
    let mut p = IlpProblem::new(vec![1.0; k * m]);
    for i in 0..k {
        let mut coef = vec![0.0; k * m];
        for j in 0..m {
            coef[i * m + j] = q.q[[i, j]];
        }
        p.add(Constraint::ge(coef, alpha));
    }
    for j in 0..m {
        let mut coef = vec![0.0; k * m];
        for i in 0..k {
            coef[i * m + j] = q.q[[i, j]];
        }
        p.add(Constraint::le(coef, beta));
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationResult {
    /// K×M allocation matrix.
    pub w: Array2<bool>,
    pub beta_star: u32,
    /// Selected tag indices per cluster, ascending.
    pub descriptors: Vec<Vec<usize>>,
    /// `mask[j]` is set iff some cluster uses tag `j`.
    pub mask: Vec<bool>,
}

impl ExplanationResult {
    fn from_allocation(w: Array2<bool>, beta_star: u32) -> Self {
        let descriptors = w
            .rows()
            .into_iter()
            .map(|r| r.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect())
            .collect();
        let mask = w.columns().into_iter().map(|c| c.iter().any(|&b| b)).collect();
        Self {
            w,
            beta_star,
            descriptors,
            mask,
        }
    }

    /// Number of selected (cluster, tag) pairs.
    pub fn selected_count(&self) -> usize {
        self.w.iter().filter(|&&b| b).count()
    }

    /// Selected coverage `sum_j W_ij Q_ij` per cluster.
    pub fn row_coverage(&self, q: &CoverageMatrix) -> Vec<f64> {
        (0..q.k())
            .map(|i| (0..q.m()).filter(|&j| self.w[[i, j]]).map(|j| q.q[[i, j]]).sum())
            .collect()
    }

    /// Summed coverage `sum_i W_ij Q_ij` per tag.
    pub fn column_usage(&self, q: &CoverageMatrix) -> Vec<f64> {
        (0..q.m())
            .map(|j| (0..q.k()).filter(|&i| self.w[[i, j]]).map(|i| q.q[[i, j]]).sum())
            .collect()
    }

    /// Re-checks every coverage and orthogonality constraint against `q`.
    pub fn satisfies(&self, q: &CoverageMatrix, alpha: f64) -> bool {
        self.w.dim() == q.q.dim()
            && self.row_coverage(q).iter().all(|&c| c >= alpha - FEASIBILITY_TOL)
            && self
                .column_usage(q)
                .iter()
                .all(|&u| u <= f64::from(self.beta_star) + FEASIBILITY_TOL)
    }
}

/// Optimal allocation at a fixed `beta`, or `None` when infeasible.
pub fn solve_at_beta(q: &CoverageMatrix, alpha: f64, beta: f64) -> Result<Option<Array2<bool>>> {
    let problem = build_explanation_ilp(q, alpha, beta);
    let sol = ilp::solve(&problem)?;
    if !sol.is_optimal() {
        return Ok(None);
    }
    let w = Array2::from_shape_vec((q.k(), q.m()), sol.assignment)
        .map_err(|e| Error::Shape(e.to_string()))?;
    Ok(Some(w))
}

/// Smallest integer `beta` in `0..=K` with a feasible allocation, and that
/// allocation.
pub fn solve_with_beta_search(q: &CoverageMatrix, alpha: f64) -> Result<ExplanationResult> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    for (i, row) in q.q.rows().into_iter().enumerate() {
        let max_coverage = row.sum();
        if max_coverage < alpha - FEASIBILITY_TOL {
            return Err(Error::StructurallyInfeasible {
                cluster: i,
                alpha,
                max_coverage,
            });
        }
    }
    // with every row satisfiable on its own, beta = K admits all-ones W
    let cap = q.k() as u32;
    for beta in 0..=cap {
        if let Some(w) = solve_at_beta(q, alpha, f64::from(beta))? {
            return Ok(ExplanationResult::from_allocation(w, beta));
        }
    }
    Err(Error::BetaSearchExhausted { cap })
}

/// Zeroes the tag columns whose mask bit is unset.
pub fn apply_mask(tags: ArrayView2<'_, f64>, mask: &[bool]) -> Result<Array2<f64>> {
    if mask.len() != tags.ncols() {
        return Err(Error::Shape(format!(
            "mask of {} bits for {} tag columns",
            mask.len(),
            tags.ncols()
        )));
    }
    let mut out = tags.to_owned();
    for (mut col, &keep) in out.columns_mut().into_iter().zip(mask) {
        if !keep {
            col.fill(0.0);
        }
    }
    Ok(out)
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// JSON form of an explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub schema_version: u32,
    pub alpha: f64,
    pub beta_star: u32,
    /// Total number of selected (cluster, tag) pairs.
    pub objective: usize,
    pub tag_names: Vec<String>,
    pub mask: Vec<bool>,
    pub clusters: Vec<ClusterExplanation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterExplanation {
    pub cluster: usize,
    pub size: usize,
    pub descriptor_indices: Vec<usize>,
    pub descriptors: Vec<String>,
    /// Selected coverage `sum_j W_ij Q_ij`.
    pub coverage: f64,
    /// `Q_ij` of each selected tag, aligned with `descriptors`.
    pub tag_coverage: Vec<f64>,
}

impl ExplanationReport {
    pub fn new(
        result: &ExplanationResult,
        q: &CoverageMatrix,
        tag_names: &[String],
        alpha: f64,
    ) -> Self {
        let coverage = result.row_coverage(q);
        let clusters = result
            .descriptors
            .iter()
            .enumerate()
            .map(|(i, d)| ClusterExplanation {
                cluster: i,
                size: q.cluster_sizes[i],
                descriptor_indices: d.clone(),
                descriptors: d.iter().map(|&j| tag_names[j].clone()).collect(),
                coverage: coverage[i],
                tag_coverage: d.iter().map(|&j| q.q[[i, j]]).collect(),
            })
            .collect();
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            alpha,
            beta_star: result.beta_star,
            objective: result.selected_count(),
            tag_names: tag_names.to_vec(),
            mask: result.mask.clone(),
            clusters,
        }
    }

    pub fn descriptor_sets(&self) -> Vec<Vec<usize>> {
        self.clusters
            .iter()
            .map(|c| c.descriptor_indices.clone())
            .collect()
    }
}
