//! Node tightening for binary programs: bound propagation and cardinality
//! cuts, both read off each row viewed as a knapsack over literals.

use super::{Constraint, IlpProblem, Sense, FEASIBILITY_TOL};

/// `sum weight * literal >= need` over unfixed variables, all weights
/// positive. A literal is `x_j`, or `1 - x_j` when `negated`.
struct Knapsack {
    terms: Vec<Literal>,
    need: f64,
}

#[derive(Clone, Copy)]
struct Literal {
    var: usize,
    weight: f64,
    negated: bool,
}

fn as_knapsack(coefficients: &[f64], rhs: f64, lower: &[f64], upper: &[f64]) -> Knapsack {
    let mut need = rhs;
    let mut terms = Vec::new();
    for (j, &a) in coefficients.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        if lower[j] == upper[j] {
            need -= a * lower[j];
        } else if a > 0.0 {
            terms.push(Literal { var: j, weight: a, negated: false });
        } else {
            // a x = a - a (1 - x)
            need -= a;
            terms.push(Literal { var: j, weight: -a, negated: true });
        }
    }
    Knapsack { terms, need }
}

/// Each constraint as one or two `>=` knapsacks under the current bounds.
fn knapsacks(c: &Constraint, lower: &[f64], upper: &[f64]) -> Vec<Knapsack> {
    let negated: Vec<f64> = c.coefficients.iter().map(|a| -a).collect();
    match c.sense {
        Sense::Ge => vec![as_knapsack(&c.coefficients, c.rhs, lower, upper)],
        Sense::Le => vec![as_knapsack(&negated, -c.rhs, lower, upper)],
        Sense::Eq => vec![
            as_knapsack(&c.coefficients, c.rhs, lower, upper),
            as_knapsack(&negated, -c.rhs, lower, upper),
        ],
    }
}

/// Fixes every literal some row cannot do without, until nothing changes.
/// Returns false when a row can no longer be satisfied.
pub(super) fn propagate(problem: &IlpProblem, lower: &mut [f64], upper: &mut [f64]) -> bool {
    loop {
        let mut changed = false;
        for c in problem.constraints() {
            for row in knapsacks(c, lower, upper) {
                let total: f64 = row.terms.iter().map(|t| t.weight).sum();
                if total < row.need - FEASIBILITY_TOL {
                    return false;
                }
                for t in &row.terms {
                    if lower[t.var] == upper[t.var] {
                        continue;
                    }
                    if total - t.weight < row.need - FEASIBILITY_TOL {
                        let value = if t.negated { 0.0 } else { 1.0 };
                        lower[t.var] = value;
                        upper[t.var] = value;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

/// For every row, the fewest literals that can reach its requirement gives
/// the valid inequality `sum literals >= that count`.
pub(super) fn cardinality_cuts(problem: &IlpProblem, lower: &[f64], upper: &[f64]) -> Vec<Constraint> {
    let v = problem.variable_count();
    let mut cuts = Vec::new();
    for c in problem.constraints() {
        for row in knapsacks(c, lower, upper) {
            if row.need <= FEASIBILITY_TOL || row.terms.len() < 2 {
                continue;
            }
            let mut weights: Vec<f64> = row.terms.iter().map(|t| t.weight).collect();
            weights.sort_by(|a, b| b.total_cmp(a));
            let mut sum = 0.0;
            let Some(count) = weights.iter().position(|w| {
                sum += w;
                sum >= row.need - FEASIBILITY_TOL
            }) else {
                continue;
            };
            let count = count + 1;
            let mut coefficients = vec![0.0; v];
            let mut rhs = count as f64;
            for t in &row.terms {
                if t.negated {
                    coefficients[t.var] = -1.0;
                    rhs -= 1.0;
                } else {
                    coefficients[t.var] = 1.0;
                }
            }
            cuts.push(Constraint::ge(coefficients, rhs));
        }
    }
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(rows: Vec<Constraint>, v: usize) -> IlpProblem {
        let mut p = IlpProblem::new(vec![1.0; v]);
        for r in rows {
            p.add(r);
        }
        p
    }

    #[test]
    fn propagation_forces_needed_literals() {
        // 0.6 x0 + 0.6 x1 + 0.3 x2 >= 1.1 needs both x0 and x1, not x2
        let p = problem(vec![Constraint::ge(vec![0.6, 0.6, 0.3], 1.1)], 3);
        let (mut lo, mut up) = (vec![0.0; 3], vec![1.0; 3]);
        assert!(propagate(&p, &mut lo, &mut up));
        assert_eq!((lo[0], lo[1]), (1.0, 1.0));
        assert_eq!((lo[2], up[2]), (0.0, 1.0));
    }

    #[test]
    fn propagation_handles_packing_and_detects_infeasibility() {
        // x0 fixed to 1 leaves no room for x1 under 0.7 x0 + 0.7 x1 <= 1
        let p = problem(vec![Constraint::le(vec![0.7, 0.7], 1.0)], 2);
        let (mut lo, mut up) = (vec![1.0, 0.0], vec![1.0, 1.0]);
        assert!(propagate(&p, &mut lo, &mut up));
        assert_eq!(up[1], 0.0);

        let q = problem(vec![Constraint::ge(vec![0.5, 0.5], 1.5)], 2);
        assert!(!propagate(&q, &mut vec![0.0; 2], &mut vec![1.0; 2]));
    }

    #[test]
    fn cardinality_cut_values() {
        // top weights 0.6 + 0.5 + 0.5 first reach 1.5: at least 3 literals
        let p = problem(vec![Constraint::ge(vec![0.6, 0.5, 0.5, 0.2], 1.5)], 4);
        let cuts = cardinality_cuts(&p, &[0.0; 4], &[1.0; 4]);
        assert_eq!(cuts, vec![Constraint::ge(vec![1.0; 4], 3.0)]);

        // packing row 0.5 (x0 + x1 + x2) <= 1 allows at most two
        let p = problem(vec![Constraint::le(vec![0.5; 3], 1.0)], 3);
        let cuts = cardinality_cuts(&p, &[0.0; 3], &[1.0; 3]);
        assert_eq!(cuts, vec![Constraint::ge(vec![-1.0; 3], -2.0)]);
    }

    #[test]
    fn cuts_never_remove_feasible_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let v = rng.random_range(2..7);
            let rows: Vec<Constraint> = (0..rng.random_range(1..4))
                .map(|_| {
                    let coeffs: Vec<f64> = (0..v).map(|_| f64::from(rng.random_range(-4i8..5)) / 4.0).collect();
                    let rhs = f64::from(rng.random_range(-4i8..5)) / 4.0;
                    match rng.random_range(0..3) {
                        0 => Constraint::ge(coeffs, rhs),
                        1 => Constraint::le(coeffs, rhs),
                        _ => Constraint::eq(coeffs, rhs),
                    }
                })
                .collect();
            let p = problem(rows, v);
            let lower: Vec<f64> = (0..v).map(|_| if rng.random_bool(0.2) { 1.0 } else { 0.0 }).collect();
            let upper: Vec<f64> = lower.iter().map(|&l| if l == 1.0 || rng.random_bool(0.8) { 1.0 } else { 0.0 }).collect();
            let cuts = cardinality_cuts(&p, &lower, &upper);
            let (mut lo, mut up) = (lower.clone(), upper.clone());
            let consistent = propagate(&p, &mut lo, &mut up);
            for bits in 0u32..(1 << v) {
                let x: Vec<f64> = (0..v).map(|j| f64::from(bits >> j & 1)).collect();
                let in_box = x.iter().enumerate().all(|(j, &xj)| lower[j] <= xj && xj <= upper[j]);
                if !in_box || !p.constraints().iter().all(|c| c.is_satisfied(&x, FEASIBILITY_TOL)) {
                    continue;
                }
                assert!(cuts.iter().all(|c| c.is_satisfied(&x, FEASIBILITY_TOL)));
                assert!(consistent);
                assert!(x.iter().enumerate().all(|(j, &xj)| lo[j] <= xj && xj <= up[j]));
            }
        }
    }
}
