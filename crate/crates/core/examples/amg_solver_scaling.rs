//! Aggregation AMG + FGMRES on the Case 1A pressure system over a mesh
//! sequence: levels, complexities and iteration growth.
//!
//! cargo run --release --example amg_solver_scaling -- 16 32 64 128 256

use mdflow::assembly::{assemble_blocks, schur_tpfa};
use mdflow::model::{case1, Case1Variant};
use mdflow::solve::{solve_pressure, SolveReport, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let meshes: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let meshes = if meshes.is_empty() { vec![16, 32, 64, 128] } else { meshes };
    let spec = case1(Case1Variant::A);
    println!("{}", SolveReport::CSV_HEADER);
    let mut last: Option<usize> = None;
    for m in meshes {
        let blocks = assemble_blocks(&spec.discretize(m, 4)?)?;
        let (a, b) = schur_tpfa(&blocks)?;
        let (_, report) = solve_pressure(&a, &b, blocks.kernel, &SolverConfig::default())?;
        println!("{}", report.csv_row(&m.to_string()));
        if let Some(prev) = last {
            eprintln!("  iteration ratio {:.2}", report.iterations as f64 / prev as f64);
        }
        last = Some(report.iterations);
    }
    Ok(())
}
