//! Series solution of the radially symmetric single-terminal problem:
//! constants, interface checks and a pressure/flux profile.
//!
//! cargo run --example reference_profile -- 1b

use mdflow::model::{case1, Case1Variant, ReferenceKind};
use mdflow::reference::solve_constants;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let variant = match std::env::args().nth(1).as_deref() {
        Some("1b") => Case1Variant::B,
        _ => Case1Variant::A,
    };
    let ReferenceKind::Series(params) = case1(variant).reference else { unreachable!() };
    let sol = solve_constants(&params)?;
    println!("qN = {:.15e}, pN1 = {:.15e}", sol.qn, sol.pn1);
    println!("cI = {:.6e}, cJ = {:.6e}, cY = {:.6e}, c4 = {:.6e}", sol.c_i, sol.c_j, sol.c_y, sol.c4);
    println!("order nu = {:.6}, condition = {:.3e}", sol.nu, sol.condition);
    for (r, dp, dq) in sol.interface_jumps() {
        println!("r = {r}: pressure jump {dp:.1e}, flux jump {dq:.1e}");
    }
    println!("transfer balance + qN = {:.2e}", sol.transfer_balance() + sol.qn);
    print!("{}", sol.profile_csv(10, 0.5));
    Ok(())
}
