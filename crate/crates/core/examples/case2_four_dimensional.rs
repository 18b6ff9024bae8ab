//! Case 2: two Y-shaped trees on the unit 4-cube, the fourth axis split into
//! an arterial and a venous cell layer. Errors are measured against a
//! finer numerical solution.
//!
//! cargo run --release --example case2_four_dimensional -- 8 16 32

use std::time::Instant;

use mdflow::harness::{run_case, solver_csv, Column, RunOptions};
use mdflow::model::case2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let meshes: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let meshes = if meshes.is_empty() { vec![4, 8, 16] } else { meshes };
    let mut spec = case2();
    // the built-in reference is 1/h = 64; keep it one level above the finest mesh for quick runs
    let finest = meshes.iter().copied().max().unwrap_or(16);
    if finest < 32 {
        spec.reference = mdflow::model::ReferenceKind::FineGrid { inv_h: 2 * finest };
    }
    let t = Instant::now();
    let run = run_case(&spec, &meshes, &RunOptions::default())?;
    print!("{}", run.table.to_csv());
    println!();
    print!("{}", solver_csv(&run.reports));
    for (label, col) in [("pD", Column::PressureD), ("qD", Column::FluxD), ("qT", Column::FluxT), ("qP", Column::FluxP), ("pN", Column::PressureN)] {
        if let Some(r) = run.table.average_rate(col) {
            println!("average rate {label}: {r:.2}");
        }
    }
    println!("elapsed {:.1} s", t.elapsed().as_secs_f64());
    Ok(())
}
