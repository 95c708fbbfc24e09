//! Integrate σ_JM from the small-s expansion to large s and compare the fitted boundary
//! coefficients with their closed forms.
//!
//! cargo run --release --example sigma_boundary -- [alpha] [beta] [s_max] [digits]

use std::time::Instant;

use jacobi_piii::highprec::PrecisionContext;
use jacobi_piii::piii::{boundary_check, PIIIParams, SigmaOptions, SigmaTrajectory};
use rug::Float;

fn main() -> jacobi_piii::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let alpha = args.first().copied().unwrap_or(0.5);
    let beta = args.get(1).copied().unwrap_or(0.25);
    let s_max = args.get(2).copied().unwrap_or(1e5);
    let digits = args.get(3).copied().unwrap_or(30.0) as u32;

    let ctx = PrecisionContext::from_digits(digits);
    let p = PIIIParams::new(&Float::with_val(ctx.bits(), alpha), &Float::with_val(ctx.bits(), beta), ctx.bits())?;
    let t0 = Instant::now();
    let traj = SigmaTrajectory::solve(&p, s_max, &SigmaOptions::default(), &ctx)?;
    println!(
        "alpha = {alpha}, beta = {beta}: {} steps to s = {s_max:e} at up to {} bits in {:.1?}",
        traj.steps(),
        traj.work_bits(),
        t0.elapsed()
    );
    println!("max |residual| = {:.3e} (tol {:.1e})", traj.max_residual(), traj.tol());
    let b = boundary_check(&traj)?;
    println!("C(alpha, beta): fitted {:.10} predicted {:.10}", b.c_fit, b.c_pred);
    if let (Some(a), Some(ap), Some(c), Some(cp)) = (b.sqrt_fit, b.sqrt_pred, b.const_fit, b.const_pred) {
        println!("sqrt(s) coefficient: fitted {a:.12} predicted {ap:.12}");
        println!("constant term:       fitted {c:.12} predicted {cp:.12}");
    }
    Ok(())
}
