//! Finite-n hard-edge log derivative for (1-x²)^α against σ_JM(s)/s.
//!
//! cargo run --release --example tracy_widom -- [alpha] [n1] [n2]

use std::time::Instant;

use jacobi_piii::harness::tracy_widom_check;
use jacobi_piii::highprec::PrecisionContext;

fn main() -> jacobi_piii::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let alpha = args.first().copied().unwrap_or(0.5);
    let ns = [args.get(1).copied().unwrap_or(15.0) as usize, args.get(2).copied().unwrap_or(30.0) as usize];
    let grid = [0.5, 1.0, 2.0, 4.0];
    let ctx = PrecisionContext::from_bits(384);
    for n in ns {
        let t0 = Instant::now();
        let table = tracy_widom_check(alpha, n, &grid, &ctx)?;
        println!("n = {n} ({:.1?})", t0.elapsed());
        println!("     s        finite n      sigma/s         diff");
        for r in &table.rows {
            println!("{:6} {:14.8e} {:14.8e} {:12.4e}", r.s, r.finite_n, r.limit, r.diff);
        }
        println!("max |diff| = {:.4e}", table.max_abs_diff());
    }
    Ok(())
}
