//! D_t(∞) for the perturbed Jacobi weight by the closed form and by direct quadrature.
//!
//! cargo run --release --example szego_constant -- [alpha] [beta] [c]   (h = exp(c x²))

use jacobi_piii::highprec::PrecisionContext;
use jacobi_piii::weight::{fourier_log_h, szego_constants, HSpec, WeightSpec};

fn main() -> jacobi_piii::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let alpha = args.first().copied().unwrap_or(0.5);
    let beta = args.get(1).copied().unwrap_or(0.25);
    let c = args.get(2).copied().unwrap_or(0.3);
    let ctx = PrecisionContext::from_digits(40);
    let h = HSpec::exp_x2(c);

    let w = WeightSpec::new(alpha, beta, 1.0, &h, &ctx)?;
    let v = fourier_log_h(&w, None, &ctx)?;
    println!("V_k of ln h(cos θ), K = {}", v.k_max());
    for (k, vk) in v.v.iter().enumerate().take(6) {
        println!("  V_{k} = {:.15e}", vk.to_f64());
    }

    println!("\n      t           ln D_t closed     closed - quadrature");
    for t in [1.0, 1.001, 1.1, 1.5, 3.0] {
        let sz = szego_constants(&w.with_t(ctx.float(t))?, &ctx)?;
        let d = sz.log_d_t_closed.clone() - &sz.log_d_t_integral;
        println!("{t:8} {:22.15e} {:12.3e}", sz.log_d_t_closed.to_f64(), d.to_f64());
    }
    Ok(())
}
