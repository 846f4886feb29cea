//! Dense bounded-variable primal simplex.
//!
//! Every row gets a slack (so all rows become equalities) and an artificial
//! column used only in phase one. Nonbasic variables always sit at one of
//! their finite bounds. Pricing is Dantzig's rule until a run of degenerate
//! pivots is seen, after which Bland's rule takes over for the rest of the
//! phase.

use super::{IlpProblem, Sense};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPTIMALITY_TOL: f64 = 1e-9;
const PHASE_ONE_TOL: f64 = 1e-7;
const DEGENERATE_STEP: f64 = 1e-12;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { values: Vec<f64>, objective: f64 },
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NonBasic {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic(usize),
    At(NonBasic),
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols`, always equal to `B^-1 A`.
    t: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    status: Vec<Status>,
    basis: Vec<usize>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

enum Step {
    Optimal,
    Pivoted { degenerate: bool },
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.cols + c]
    }

    fn recompute_reduced_costs(&mut self) {
        for j in 0..self.cols {
            let mut d = self.cost[j];
            for (r, &b) in self.basis.iter().enumerate() {
                let cb = self.cost[b];
                if cb != 0.0 {
                    d -= cb * self.at(r, j);
                }
            }
            self.reduced[j] = d;
        }
    }

    fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            let dir = match self.status[j] {
                Status::Basic(_) => continue,
                _ if self.hi[j] - self.lo[j] <= 0.0 => continue,
                Status::At(NonBasic::Lower) if self.reduced[j] < -OPTIMALITY_TOL => 1.0,
                Status::At(NonBasic::Upper) if self.reduced[j] > OPTIMALITY_TOL => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            let score = self.reduced[j].abs();
            if best.is_none_or(|(b, _)| score > self.reduced[b].abs()) {
                best = Some((j, dir));
            }
        }
        best
    }

    fn step(&mut self, bland: bool) -> Result<Step> {
        let Some((q, dir)) = self.choose_entering(bland) else {
            return Ok(Step::Optimal);
        };
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(Error::Solver(format!(
                "simplex exceeded {} iterations ({} rows, {} columns)",
                self.max_iterations, self.rows, self.cols
            )));
        }

        // ratio test over basic rows, then the entering variable's own span
        let mut limit = f64::INFINITY;
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..self.rows {
            let alpha = dir * self.at(r, q);
            let b = self.basis[r];
            let ratio = if alpha > PIVOT_TOL && self.lo[b].is_finite() {
                (self.x[b] - self.lo[b]).max(0.0) / alpha
            } else if alpha < -PIVOT_TOL && self.hi[b].is_finite() {
                (self.hi[b] - self.x[b]).max(0.0) / -alpha
            } else {
                continue;
            };
            let better = match leave {
                None => true,
                Some((lr, la)) => {
                    if ratio < limit - DEGENERATE_STEP {
                        true
                    } else if ratio <= limit + DEGENERATE_STEP {
                        if bland {
                            b < self.basis[lr]
                        } else {
                            alpha.abs() > la.abs()
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                limit = ratio;
                leave = Some((r, alpha));
            }
        }
        let span = self.hi[q] - self.lo[q];
        if span.is_finite() && span <= limit {
            // bound flip, basis unchanged
            for r in 0..self.rows {
                let b = self.basis[r];
                self.x[b] -= dir * span * self.at(r, q);
            }
            let (value, state) = if dir > 0.0 {
                (self.hi[q], NonBasic::Upper)
            } else {
                (self.lo[q], NonBasic::Lower)
            };
            self.x[q] = value;
            self.status[q] = Status::At(state);
            return Ok(Step::Pivoted { degenerate: false });
        }
        let Some((r, alpha)) = leave else {
            return Err(Error::Solver(format!(
                "relaxation unbounded along column {q}"
            )));
        };

        let t = limit;
        for i in 0..self.rows {
            let b = self.basis[i];
            self.x[b] -= dir * t * self.at(i, q);
        }
        self.x[q] += dir * t;
        let leaving = self.basis[r];
        let (value, state) = if alpha > 0.0 {
            (self.lo[leaving], NonBasic::Lower)
        } else {
            (self.hi[leaving], NonBasic::Upper)
        };
        self.x[leaving] = value;
        self.status[leaving] = Status::At(state);
        self.pivot(r, q);
        self.basis[r] = q;
        self.status[q] = Status::Basic(r);
        Ok(Step::Pivoted {
            degenerate: t <= DEGENERATE_STEP,
        })
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.at(r, q);
        {
            let row = &mut self.t[r * cols..(r + 1) * cols];
            for v in row.iter_mut() {
                *v /= p;
            }
        }
        let pivot_row: Vec<f64> = self.t[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, q);
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * cols..(i + 1) * cols];
            for (v, &pr) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            row[q] = 0.0;
        }
        let dq = self.reduced[q];
        if dq != 0.0 {
            for (d, &pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= dq * pr;
            }
            self.reduced[q] = 0.0;
        }
    }

    fn run_phase(&mut self) -> Result<()> {
        let mut bland = false;
        let mut degenerate_run = 0;
        loop {
            match self.step(bland)? {
                Step::Optimal => return Ok(()),
                Step::Pivoted { degenerate } => {
                    if degenerate {
                        degenerate_run += 1;
                        if degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND {
                            bland = true;
                        }
                    } else {
                        degenerate_run = 0;
                    }
                }
            }
        }
    }
}

/// Solves `min c·x` over the problem's constraints with `lower <= x <= upper`.
pub fn solve_lp(problem: &IlpProblem, lower: &[f64], upper: &[f64]) -> Result<LpOutcome> {
    let v = problem.variable_count();
    let m = problem.constraints().len();
    assert_eq!(lower.len(), v);
    assert_eq!(upper.len(), v);
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Ok(LpOutcome::Infeasible);
    }
    let cols = v + 2 * m;
    let slack = |i: usize| v + i;
    let art = |i: usize| v + m + i;

    let mut lo = vec![0.0; cols];
    let mut hi = vec![0.0; cols];
    lo[..v].copy_from_slice(lower);
    hi[..v].copy_from_slice(upper);
    let mut x = vec![0.0; cols];
    x[..v].copy_from_slice(lower);

    let mut t = vec![0.0; m * cols];
    let mut basis = Vec::with_capacity(m);
    let mut status = vec![Status::At(NonBasic::Lower); cols];
    let mut cost = vec![0.0; cols];

    for (i, c) in problem.constraints().iter().enumerate() {
        let (slo, shi) = match c.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        lo[slack(i)] = slo;
        hi[slack(i)] = shi;
        status[slack(i)] = if slo.is_finite() {
            Status::At(NonBasic::Lower)
        } else {
            Status::At(NonBasic::Upper)
        };

        let residual = c.rhs
            - c.coefficients
                .iter()
                .zip(lower)
                .map(|(a, x)| a * x)
                .sum::<f64>();
        let row = &mut t[i * cols..(i + 1) * cols];
        row[..v].copy_from_slice(&c.coefficients);
        row[slack(i)] = 1.0;

        if residual >= slo && residual <= shi {
            x[slack(i)] = residual;
            status[slack(i)] = Status::Basic(i);
            basis.push(slack(i));
            // artificial stays fixed at zero
        } else {
            let sign = if residual >= 0.0 { 1.0 } else { -1.0 };
            row[art(i)] = sign;
            if sign < 0.0 {
                for a in row.iter_mut() {
                    *a = -*a;
                }
            }
            hi[art(i)] = f64::INFINITY;
            x[art(i)] = residual.abs();
            cost[art(i)] = 1.0;
            status[art(i)] = Status::Basic(i);
            basis.push(art(i));
        }
    }

    let max_iterations = 10_000 + 50 * (cols + m);
    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        lo,
        hi,
        x,
        status,
        basis,
        cost,
        reduced: vec![0.0; cols],
        iterations: 0,
        max_iterations,
    };

    if tab.cost.iter().any(|&c| c != 0.0) {
        tab.recompute_reduced_costs();
        tab.run_phase()?;
        if tab.objective() > PHASE_ONE_TOL {
            return Ok(LpOutcome::Infeasible);
        }
    }
    for i in 0..m {
        let a = art(i);
        tab.hi[a] = 0.0;
        tab.x[a] = 0.0;
        tab.cost[a] = 0.0;
        if let Status::At(_) = tab.status[a] {
            tab.status[a] = Status::At(NonBasic::Lower);
        }
    }
    tab.cost[..v].copy_from_slice(problem.objective());
    tab.recompute_reduced_costs();
    tab.run_phase()?;

    let values: Vec<f64> = (0..v)
        .map(|j| tab.x[j].clamp(tab.lo[j], tab.hi[j]))
        .collect();
    let objective = problem
        .objective()
        .iter()
        .zip(&values)
        .map(|(c, x)| c * x)
        .sum();
    Ok(LpOutcome::Optimal { values, objective })
}
