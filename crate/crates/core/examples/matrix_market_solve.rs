//! Export the Case 1A pressure system as Matrix Market, read it back and
//! solve it.
//!
//! cargo run --release --example matrix_market_solve -- 64

use mdflow::assembly::{assemble_blocks, read_matrix_market, read_vector, schur_tpfa, write_matrix_market, write_vector, Kernel};
use mdflow::model::{case1, Case1Variant};
use mdflow::solve::{solve_pressure, SolveReport, SolverConfig};
use mdflow::sparse::norm2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(32);
    let blocks = assemble_blocks(&case1(Case1Variant::A).discretize(m, 4)?)?;
    let (a, b) = schur_tpfa(&blocks)?;
    let dir = std::env::temp_dir().join("mdflow_matrix_market");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("A.mtx"), write_matrix_market(&a))?;
    std::fs::write(dir.join("b.txt"), write_vector(&b))?;

    let a2 = read_matrix_market(&std::fs::read_to_string(dir.join("A.mtx"))?)?;
    let b2 = read_vector(&std::fs::read_to_string(dir.join("b.txt"))?)?;
    assert_eq!(a2, a);
    let (x, report) = solve_pressure(&a2, &b2, Kernel::Trivial, &SolverConfig::default())?;
    let ax = a2.mul_vec(&x);
    let r: Vec<f64> = b2.iter().zip(&ax).map(|(u, v)| u - v).collect();
    println!("files in {}", dir.display());
    println!("{}\n{}", SolveReport::CSV_HEADER, report.csv_row(&m.to_string()));
    println!("relative residual {:.3e}", norm2(&r) / norm2(&b2));
    println!("same solve from the shell: mdflow solve --matrix {0}/A.mtx --rhs {0}/b.txt", dir.display());
    Ok(())
}
