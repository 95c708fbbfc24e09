//! Gamma and Barnes G at arbitrary precision, with the functional equation as a check.
//!
//! cargo run --release --example special_functions -- [digits]

use jacobi_piii::highprec::{gamma, log_barnes_g, log_gamma, to_decimal, PrecisionContext};
use rug::Float;

fn main() -> jacobi_piii::Result<()> {
    let digits = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50u32);
    let ctx = PrecisionContext::from_digits(digits);
    let b = ctx.bits();
    let d = digits as usize;

    let g4 = log_barnes_g(&ctx.float(4), &ctx)?.exp();
    println!("G(4)     = {}", to_decimal(&g4, d));
    let g_half = log_barnes_g(&ctx.float(0.5), &ctx)?;
    println!("ln G(1/2) = {}", to_decimal(&g_half, d));
    println!("Gamma(1/2)^2 = {}", to_decimal(&Float::with_val(b, gamma(&ctx.float(0.5), b)?.square_ref()), d));

    println!("\n   z     ln G(z+1) - ln G(z) - ln Gamma(z)");
    for z in [0.3, 1.75, 4.5, 12.25] {
        let z = ctx.float(z);
        let zp = Float::with_val(b, &z + 1u32);
        let r = log_barnes_g(&zp, &ctx)? - log_barnes_g(&z, &ctx)? - log_gamma(&z, &ctx)?;
        println!("{:6} {:.3e}", z.to_f64(), r.to_f64());
    }
    Ok(())
}
