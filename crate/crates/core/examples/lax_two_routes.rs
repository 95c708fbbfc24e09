//! σ from the Lax system against σ from the transformed σ_JM trajectory.
//!
//! cargo run --release --example lax_two_routes -- [alpha] [beta]

use jacobi_piii::highprec::PrecisionContext;
use jacobi_piii::piii::{integrate_lax, lax_seed_from_series, transform_at, PIIIParams, SigmaOptions, SigmaTrajectory};
use rug::Float;

fn main() -> jacobi_piii::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let alpha = args.first().copied().unwrap_or(0.5);
    let beta = args.get(1).copied().unwrap_or(0.25);
    let ctx = PrecisionContext::from_digits(30);
    let b = ctx.bits();
    let p = PIIIParams::new(&ctx.float(alpha), &ctx.float(beta), b)?;

    let seed = lax_seed_from_series(&p, &ctx.float(0.05), &ctx)?;
    let lax = integrate_lax(&p, &seed, &ctx.float(40), 1e-15, &ctx)?;
    let traj = SigmaTrajectory::solve(&p, 10.0, &SigmaOptions::default(), &ctx)?;
    println!("max |constraint| along the Lax run: {:.3e}", lax.max_constraint());
    for c in lax.crossings() {
        println!("y crosses level {} at s = {:.10}", c.level, c.s);
    }
    println!("\n     s          sigma (Lax)         |Lax - transform|");
    for s in [0.5, 1.0, 2.0, 5.0] {
        let x = ctx.float(s);
        let a = lax.sigma_at(&x)?;
        let t = transform_at(&traj, &x)?;
        println!("{s:6} {:22.15e} {:.3e}", a.to_f64(), Float::with_val(b, &a - &t.sigma).abs().to_f64());
    }
    if let Some(sign) = lax.large_s_sign() {
        println!("\nlarge-s branch: sign {sign}");
    }
    Ok(())
}
