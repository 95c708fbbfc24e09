//! Exact ln D_n, γ_n/2ⁿ and b²_{n-1} against their double-scaling predictions.
//!
//! cargo run --release --example double_scaling_sweep -- [config.toml]
//!
//! Without a config the sweep is α = 0.5, β = 0.25, h = 1, s ∈ {0.5, 2}, n ∈ {16, 32, 64} at 512 bits.

use std::time::Instant;

use jacobi_piii::harness::{run_sweep, ExperimentConfig, SweepConfig};
use jacobi_piii::weight::HSpec;

fn main() -> jacobi_piii::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => {
            let mut c = ExperimentConfig::new(0.5, 0.25, HSpec::default());
            c.min_bits = Some(512);
            c.sweep = Some(SweepConfig {
                s_values: vec![0.5, 2.0],
                n_values: vec![16, 32, 64],
            });
            c
        }
    };
    let t0 = Instant::now();
    let report = run_sweep(&cfg)?;
    println!("alpha = {}, beta = {}, {} bits, {:.1?}", report.alpha, report.beta, report.bits, t0.elapsed());
    println!(
        "{:>6} {:>4} {:>12} {:>12} {:>14} {:>12}",
        "s", "n", "err ln D_n", "err γ/√(t-1)", "err b²", "n² err b²"
    );
    for r in &report.rows {
        println!(
            "{:>6} {:>4} {:>12.4e} {:>12.4e} {:>14.4e} {:>12.4e}",
            r.s.to_f64(),
            r.n,
            r.err_ln_dn.to_f64(),
            r.scaled_gamma_err(),
            r.err_b2.to_f64(),
            r.err_b2.to_f64() * (r.n * r.n) as f64
        );
    }
    Ok(())
}
