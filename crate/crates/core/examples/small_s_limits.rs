//! Small-s limits of the leading-coefficient and recurrence predictions against the closed Jacobi forms.
//!
//! cargo run --release --example small_s_limits -- [alpha] [beta]

use jacobi_piii::asympt::{leading_coeff_parts, recurrence_prediction, ScalingPoint};
use jacobi_piii::highprec::{pi, PrecisionContext};
use jacobi_piii::piii::{PIIIParams, SigmaOptions, SigmaTrajectory};
use jacobi_piii::weight::{log_szego_closed, HSpec, WeightSpec};
use rug::Float;

fn main() -> jacobi_piii::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let alpha = args.first().copied().unwrap_or(0.5);
    let beta = args.get(1).copied().unwrap_or(0.25);
    let ctx = PrecisionContext::from_digits(30);
    let b = ctx.bits();
    let kappa = alpha + beta;
    let p = PIIIParams::new(&ctx.float(alpha), &ctx.float(beta), b)?;
    let traj = SigmaTrajectory::solve(&p, 1e-2, &SigmaOptions::default(), &ctx)?;
    let v0 = ctx.float(0);

    println!("    s     n   scaled gamma / closed   (b2 - 1/4) / closed");
    for s in [1e-2, 1e-3] {
        for n in [16usize, 64] {
            let pt = ScalingPoint::from_s(n, &ctx.float(s))?;
            let spec = WeightSpec::new(alpha, beta, 1.0, &HSpec::default(), &ctx)?.with_t(pt.t.clone())?;
            let lp = leading_coeff_parts(&spec, &v0, &pt, &traj, &ctx)?;
            let d1 = log_szego_closed(&spec.alpha, &spec.kappa(), &v0, &ctx.float(1)).exp();
            let g = Float::with_val(b, &lp.value * pi(b).sqrt()) * d1 - 1u32;
            let g_want = -(4.0 * kappa * kappa - 1.0) / (8.0 * n as f64);
            let b2 = recurrence_prediction(&spec, &pt, &traj)?.to_f64() - 0.25;
            let b2_want = -(4.0 * kappa * kappa - 1.0) / (16.0 * (n * n) as f64);
            println!("{s:6} {n:4} {:22.12} {:22.12}", g.to_f64() / g_want, b2 / b2_want);
        }
    }
    Ok(())
}
