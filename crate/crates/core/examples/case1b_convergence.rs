//! Case 1B: transfer switching off abruptly at r1; otherwise as case 1A,
//! scored against the Bessel series solution.
//!
//! cargo run --release --example case1b_convergence -- 16 32 64 128

use mdflow::harness::{run_case, solver_csv, Column, RunOptions};
use mdflow::model::{case1, Case1Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let meshes: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let meshes = if meshes.is_empty() { vec![16, 32, 64] } else { meshes };
    let run = run_case(&case1(Case1Variant::B), &meshes, &RunOptions::default())?;
    print!("{}", run.table.to_csv());
    println!();
    print!("{}", solver_csv(&run.reports));
    for (label, col) in [("pD", Column::PressureD), ("qD", Column::FluxD), ("qS", Column::FluxS), ("qN", Column::FluxN)] {
        if let Some(r) = run.table.average_rate(col) {
            println!("average rate {label}: {r:.2}");
        }
    }
    for c in &run.checks {
        println!(
            "1/h = {}: graph-Stokes {:.2e} (rhs l1 {:.2e}), conservation {:.2e} (rhs {:.2e})",
            c.inv_h, c.graph_stokes, c.rhs_norm1, c.local, c.rhs_norm2
        );
    }
    Ok(())
}
