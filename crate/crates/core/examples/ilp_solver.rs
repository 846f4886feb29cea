//! The binary integer program solver on a small set-cover problem: pick the
//! cheapest sets so every element is covered at least once.

use descluster::ilp::{solve, solve_lp_relaxation, Constraint, IlpProblem, LpOutcome};

fn main() -> descluster::Result<()> {
    // the five pair sets form an odd cycle, so the LP optimum is fractional
    let sets: [&[usize]; 6] = [&[0, 1], &[1, 2], &[2, 3], &[3, 4], &[4, 0], &[0, 1, 2, 3, 4, 5]];
    let costs = vec![1.0, 1.0, 1.0, 1.0, 1.0, 4.0];
    let mut problem = IlpProblem::new(costs);
    for element in 0..5 {
        let row = sets.iter().map(|s| if s.contains(&element) { 1.0 } else { 0.0 }).collect();
        problem.add(Constraint::ge(row, 1.0));
    }
    print!("{}", problem.to_lp_format());

    if let LpOutcome::Optimal { values, objective } = solve_lp_relaxation(&problem)? {
        println!("LP relaxation: {objective:.3} at {values:.2?}");
    }
    let solution = solve(&problem)?;
    let chosen: Vec<usize> = (0..sets.len()).filter(|&j| solution.assignment[j]).collect();
    println!(
        "integer optimum: {} using sets {chosen:?} ({} nodes)",
        solution.objective_value, solution.nodes_explored
    );
    Ok(())
}
