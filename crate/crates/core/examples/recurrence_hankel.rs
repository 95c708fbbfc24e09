//! Recurrence coefficients and Hankel determinants: classical closed forms and the direct determinant.
//!
//! cargo run --release --example recurrence_hankel

use jacobi_piii::highprec::PrecisionContext;
use jacobi_piii::orthopoly::{hankel_det_direct, hankel_log_det, moments, stieltjes_recurrence};
use jacobi_piii::weight::{HSpec, WeightSpec};
use rug::Float;

fn main() -> jacobi_piii::Result<()> {
    let ctx = PrecisionContext::from_bits(256);
    let b = ctx.bits();
    let n = 50;

    let cheb = stieltjes_recurrence(&WeightSpec::new(0.0, -0.5, 1.0, &HSpec::default(), &ctx)?, n, &ctx)?;
    let mut worst = Float::with_val(b, (&cheb.b2[0] - Float::with_val(b, 0.5)).abs());
    for b2 in &cheb.b2[1..n] {
        worst = worst.max(&Float::with_val(b, b2 - 0.25f64).abs());
    }
    println!("Chebyshev (beta = -1/2): max |b2_k - closed form| = {:.3e}", worst.to_f64());

    let leg = stieltjes_recurrence(&WeightSpec::new(0.0, 0.0, 1.0, &HSpec::default(), &ctx)?, n, &ctx)?;
    let mut worst = Float::with_val(b, 0);
    for k in 1..=n {
        let k2 = (k * k) as u32;
        let want = Float::with_val(b, k2) / Float::with_val(b, 4 * k2 - 1);
        worst = worst.max(&Float::with_val(b, &leg.b2[k - 1] - want).abs());
    }
    println!("Legendre: max |b2_(k-1) - k²/(4k²-1)| = {:.3e}", worst.to_f64());

    let spec = WeightSpec::new(0.5, 0.25, 1.5, &HSpec::default(), &ctx)?;
    let rec = stieltjes_recurrence(&spec, 10, &ctx)?;
    let mom = moments(&spec, 20, &ctx)?;
    println!("\nalpha = 0.5, beta = 0.25, t = 1.5");
    println!("  n              ln D_n   rel gap to direct det");
    for k in 1..=10 {
        let l = hankel_log_det(&rec, k)?.log_dn;
        let direct = hankel_det_direct(&mom, k, &ctx)?;
        let rel = (Float::with_val(b, l.exp_ref()) - &direct).abs() / &direct;
        println!("{k:3} {:19.12e}   {:.3e}", l.to_f64(), rel.to_f64());
    }
    Ok(())
}
