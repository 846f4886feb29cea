//! Exact solver for small binary integer linear programs.
//!
//! Best-first branch-and-bound over LP relaxations. Branching picks the most
//! fractional variable (lowest index on ties); among equal bounds the 0-branch
//! is explored first. Everything is deterministic for a given problem.

mod simplex;
mod tighten;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use simplex::LpOutcome;

/// Default cap on the number of binary variables.
pub const DEFAULT_MAX_VARIABLES: usize = 100_000;
/// Relaxation values within this distance of 0 or 1 count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Nodes whose bound is not at least this much below the incumbent are pruned.
pub const PRUNE_TOL: f64 = 1e-9;
/// Constraint slack allowed when checking an integral assignment.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn ge(coefficients: Vec<f64>, rhs: f64) -> Self {
        Self {
            coefficients,
            sense: Sense::Ge,
            rhs,
        }
    }

    pub fn le(coefficients: Vec<f64>, rhs: f64) -> Self {
        Self {
            coefficients,
            sense: Sense::Le,
            rhs,
        }
    }

    pub fn eq(coefficients: Vec<f64>, rhs: f64) -> Self {
        Self {
            coefficients,
            sense: Sense::Eq,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    pub fn is_satisfied(&self, x: &[f64], tol: f64) -> bool {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// `minimize c·w` over binary `w` subject to linear constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpProblem {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl IlpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, c: Constraint) -> &mut Self {
        self.constraints.push(c);
        self
    }

    pub fn variable_count(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.variable_count();
        if v == 0 {
            return Err(Error::Shape("integer program has no variables".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Shape("non-finite objective coefficient".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != v {
                return Err(Error::Shape(format!(
                    "constraint {i} has {} coefficients for {v} variables",
                    c.coefficients.len()
                )));
            }
            if !c.rhs.is_finite() || c.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(Error::Shape(format!("constraint {i} is not finite")));
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, assignment: &[bool], tol: f64) -> bool {
        let x = as_f64(assignment);
        self.constraints.iter().all(|c| c.is_satisfied(&x, tol))
    }

    pub fn evaluate(&self, assignment: &[bool]) -> f64 {
        self.objective
            .iter()
            .zip(assignment)
            .filter(|(_, &w)| w)
            .map(|(c, _)| c)
            .sum()
    }

    /// CPLEX LP text rendering, for cross-checking with external solvers.
    pub fn to_lp_format(&self) -> String {
        fn terms(coeffs: &[f64]) -> String {
            let mut out = String::new();
            for (j, &a) in coeffs.iter().enumerate().filter(|(_, a)| **a != 0.0) {
                if out.is_empty() {
                    if a < 0.0 {
                        out.push_str("- ");
                    }
                } else {
                    out.push_str(if a < 0.0 { " - " } else { " + " });
                }
                let _ = write!(out, "{} w{j}", a.abs());
            }
            if out.is_empty() {
                out.push_str("0 w0");
            }
            out
        }
        let mut s = String::from("\\ binary program\nMinimize\n");
        let _ = writeln!(s, " obj: {}", terms(&self.objective));
        s.push_str("Subject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let op = match c.sense {
                Sense::Ge => ">=",
                Sense::Le => "<=",
                Sense::Eq => "=",
            };
            let _ = writeln!(s, " c{i}: {} {op} {}", terms(&c.coefficients), c.rhs);
        }
        s.push_str("Binary\n");
        for j in 0..self.variable_count() {
            let _ = writeln!(s, " w{j}");
        }
        s.push_str("End\n");
        s
    }
}

fn as_f64(a: &[bool]) -> Vec<f64> {
    a.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IlpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpSolution {
    pub status: IlpStatus,
    /// Empty when infeasible.
    pub assignment: Vec<bool>,
    /// `+inf` when infeasible.
    pub objective_value: f64,
    pub nodes_explored: usize,
}

impl IlpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == IlpStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_variables: usize,
    pub max_nodes: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_variables: DEFAULT_MAX_VARIABLES,
            max_nodes: 2_000_000,
        }
    }
}

/// LP relaxation of the binary program (every variable in `[0, 1]`).
pub fn solve_lp_relaxation(problem: &IlpProblem) -> Result<LpOutcome> {
    problem.validate()?;
    let v = problem.variable_count();
    simplex::solve_lp(problem, &vec![0.0; v], &vec![1.0; v])
}

pub fn solve(problem: &IlpProblem) -> Result<IlpSolution> {
    solve_with(problem, &SolverOptions::default())
}

struct Node {
    bound: f64,
    /// 0 for a 0-branch, 1 for a 1-branch.
    branch: u8,
    seq: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap pops the maximum, so "better" nodes compare greater.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.branch.cmp(&self.branch))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    problem: &'a IlpProblem,
    integral_costs: bool,
    incumbent: Option<(f64, Vec<bool>)>,
    heap: BinaryHeap<Node>,
    seq: u64,
    nodes: usize,
    max_nodes: usize,
}

enum Evaluated {
    Pruned,
    Open(Node),
}

impl Search<'_> {
    fn can_improve(&self, bound: f64) -> bool {
        match &self.incumbent {
            None => true,
            Some((best, _)) => {
                if self.integral_costs {
                    (bound - INTEGRALITY_TOL).ceil() < *best
                } else {
                    bound < best - PRUNE_TOL
                }
            }
        }
    }

    fn evaluate(&mut self, mut lower: Vec<f64>, mut upper: Vec<f64>, branch: u8) -> Result<Evaluated> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::Solver(format!(
                "branch-and-bound exceeded {} nodes",
                self.max_nodes
            )));
        }
        if !tighten::propagate(self.problem, &mut lower, &mut upper) {
            return Ok(Evaluated::Pruned);
        }
        let mut relaxation = self.problem.clone();
        for cut in tighten::cardinality_cuts(self.problem, &lower, &upper) {
            relaxation.add(cut);
        }
        let (values, bound) = match simplex::solve_lp(&relaxation, &lower, &upper)? {
            LpOutcome::Infeasible => return Ok(Evaluated::Pruned),
            LpOutcome::Optimal { values, objective } => (values, objective),
        };
        if !self.can_improve(bound) {
            return Ok(Evaluated::Pruned);
        }
        if values
            .iter()
            .all(|&v| v.min(1.0 - v).abs() <= INTEGRALITY_TOL)
        {
            let assignment: Vec<bool> = values.iter().map(|&v| v > 0.5).collect();
            if self.problem.is_feasible(&assignment, FEASIBILITY_TOL) {
                let obj = self.problem.evaluate(&assignment);
                if self.incumbent.as_ref().is_none_or(|(best, _)| obj < *best) {
                    self.incumbent = Some((obj, assignment));
                }
                return Ok(Evaluated::Pruned);
            }
            // rounding broke a constraint; keep branching on unfixed variables
            if lower.iter().zip(&upper).all(|(l, u)| l == u) {
                return Ok(Evaluated::Pruned);
            }
        }
        self.seq += 1;
        Ok(Evaluated::Open(Node {
            bound,
            branch,
            seq: self.seq,
            lower,
            upper,
            values,
        }))
    }

    fn push(&mut self, e: Evaluated) {
        if let Evaluated::Open(n) = e {
            self.heap.push(n);
        }
    }
}

/// Most fractional unfixed variable, lowest index on ties.
fn branching_variable(node: &Node) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in node.values.iter().enumerate() {
        if node.lower[j] == node.upper[j] {
            continue;
        }
        let frac = v.min(1.0 - v).max(0.0);
        if best.is_none_or(|(_, f)| frac > f) {
            best = Some((j, frac));
        }
    }
    best.map(|(j, _)| j)
}

pub fn solve_with(problem: &IlpProblem, options: &SolverOptions) -> Result<IlpSolution> {
    problem.validate()?;
    let v = problem.variable_count();
    if v > options.max_variables {
        return Err(Error::ProblemTooLarge {
            variables: v,
            cap: options.max_variables,
        });
    }
    let mut search = Search {
        problem,
        integral_costs: problem.objective.iter().all(|c| c.fract() == 0.0),
        incumbent: None,
        heap: BinaryHeap::new(),
        seq: 0,
        nodes: 0,
        max_nodes: options.max_nodes,
    };
    let root = search.evaluate(vec![0.0; v], vec![1.0; v], 0)?;
    search.push(root);

    while let Some(node) = search.heap.pop() {
        if !search.can_improve(node.bound) {
            continue;
        }
        let Some(j) = branching_variable(&node) else {
            continue;
        };
        let mut zero_upper = node.upper.clone();
        zero_upper[j] = 0.0;
        let zero = search.evaluate(node.lower.clone(), zero_upper, 0)?;
        let mut one_lower = node.lower;
        one_lower[j] = 1.0;
        let one = search.evaluate(one_lower, node.upper, 1)?;
        search.push(zero);
        search.push(one);
    }

    Ok(match search.incumbent {
        Some((objective_value, assignment)) => IlpSolution {
            status: IlpStatus::Optimal,
            assignment,
            objective_value,
            nodes_explored: search.nodes,
        },
        None => IlpSolution {
            status: IlpStatus::Infeasible,
            assignment: Vec::new(),
            objective_value: f64::INFINITY,
            nodes_explored: search.nodes,
        },
    })
}
