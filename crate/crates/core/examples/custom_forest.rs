//! A user-defined case from the plain-text config format: a three-terminal
//! tree on the unit square with a point inflow, scored against nothing and
//! checked for mass balance.
//!
//! cargo run --example custom_forest

use mdflow::assembly::write_state_csv;
use mdflow::harness::{solve_mesh, RunOptions};
use mdflow::model::parse_case_config;

const CONFIG: &str = "\
name = three_terminals

[grid]
lower = 0 0
upper = 1 1
cells = h h

[forest]
nodes 5 trees 1
node 0 dirichlet 1.0
node 1 interior
node 2 terminal 0.25 0.7
node 3 terminal 0.75 0.7
node 4 terminal 0.5 0.25
edge 0 1 2.0
edge 1 2 1.0
edge 1 3 1.0
edge 1 4 0.5

[coefficients]
kd = 1 1
source = none
transfer = 2 1.0 0.1 0.15
transfer = 3 1.0 0.1 0.15
transfer = 4 2.0 0.08 0.08

[reference]
kind = none
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = parse_case_config(CONFIG)?;
    let run = solve_mesh(&spec, 32, &RunOptions::default())?;
    let state = run.state.as_ref().ok_or("solver did not converge")?;
    println!("iterations {}, levels {}", run.report.iterations, run.report.levels);
    for (l, e) in run.problem.forest.edges().iter().enumerate() {
        println!("edge {} -> {}: qN = {:.6e}", e.tail, e.head, state.qn[l]);
    }
    if let Some(c) = run.check {
        println!("graph-Stokes residual {:.2e}, conservation residual {:.2e}", c.graph_stokes, c.local);
    }
    let csv = write_state_csv(&run.problem.grid, &run.problem.forest, &run.blocks, state);
    println!("state CSV: {} lines", csv.lines().count());
    Ok(())
}
