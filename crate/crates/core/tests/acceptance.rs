//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use jacobi_piii::asympt::{leading_coeff_parts, recurrence_prediction, ScalingPoint};
use jacobi_piii::harness::{run_sweep, tracy_widom_check, ExperimentConfig, SweepConfig};
use jacobi_piii::highprec::{log_barnes_g, log_gamma, pi, PrecisionContext};
use jacobi_piii::orthopoly::{hankel_det_direct, hankel_log_det, moments, stieltjes_recurrence};
use jacobi_piii::piii::{
    boundary_check, integrate_lax, lax_seed_from_series, sigma_form_residual, transform_at, PIIIParams,
    SigmaOptions, SigmaTrajectory,
};
use jacobi_piii::weight::{log_szego_closed, HSpec, WeightSpec};
use jacobi_piii::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn diff(a: &Float, b: &Float) -> Float {
    Float::with_val(a.prec().max(b.prec()), a - b).abs()
}

fn classical_closed_forms() -> Result<Outcome> {
    let ctx = PrecisionContext::from_bits(256);
    let b = ctx.bits();
    let n = 51;
    let cheb = stieltjes_recurrence(&WeightSpec::new(0.0, -0.5, 1.0, &HSpec::default(), &ctx)?, n, &ctx)?;
    let mut e1 = diff(&cheb.b2[0], &ctx.float(0.5));
    for k in 1..=50 {
        e1 = e1.max(&diff(&cheb.b2[k], &ctx.float(0.25)));
    }
    let leg = stieltjes_recurrence(&WeightSpec::new(0.0, 0.0, 1.0, &HSpec::default(), &ctx)?, 50, &ctx)?;
    let mut e2 = Float::with_val(b, 0);
    for k in 1..=50u32 {
        let want = Float::with_val(b, k * k) / Float::with_val(b, 4 * k * k - 1);
        e2 = e2.max(&diff(&leg.b2[k as usize - 1], &want));
    }
    outcome(
        e1 <= 1e-30 && e2 <= 1e-30,
        format!("Chebyshev max err {:.2e}, Legendre max err {:.2e}", e1.to_f64(), e2.to_f64()),
    )
}

fn determinant_oracle() -> Result<Outcome> {
    let ctx = PrecisionContext::from_bits(256);
    let spec = WeightSpec::new(0.5, 0.25, 1.5, &HSpec::default(), &ctx)?;
    let rec = stieltjes_recurrence(&spec, 10, &ctx)?;
    let mom = moments(&spec, 20, &ctx)?;
    let mut worst = Float::with_val(ctx.bits(), 0);
    for n in 1..=10 {
        let d = hankel_log_det(&rec, n)?.log_dn.exp();
        let direct = hankel_det_direct(&mom, n, &ctx)?;
        worst = worst.max(&(diff(&d, &direct) / &direct));
    }
    outcome(worst <= 1e-24, format!("max relative gap {:.2e} over n <= 10", worst.to_f64()))
}

fn sigma_residual_suite() -> Result<Outcome> {
    let ctx = PrecisionContext::from_digits(30);
    let opts = SigmaOptions {
        tol: Some(1e-22),
        ..SigmaOptions::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, b) in [(0.5, 0.25), (0.5, 0.0), (0.25, 0.5), (1.0, -0.5)] {
        let t0 = Instant::now();
        let p = PIIIParams::new(&ctx.float(a), &ctx.float(b), ctx.bits())?;
        let traj = SigmaTrajectory::solve(&p, 1e4, &opts, &ctx)?;
        // recompute the residual at every accepted step from the stored state
        let mut worst = 0f64;
        for st in traj.samples().iter().filter(|st| st.s >= 1e-2) {
            let pb = p.at_bits(st.s.prec())?;
            worst = worst.max(sigma_form_residual(st, &pb).to_f64().abs());
        }
        let dt = t0.elapsed();
        pass &= worst <= 1e-20 && dt < Duration::from_secs(120);
        parts.push(format!("({a}, {b}): {worst:.1e} in {dt:.0?}"));
    }
    outcome(pass, format!("max |residual| on [1e-2, 1e4]: {}", parts.join("; ")))
}

fn boundary_connection() -> Result<Outcome> {
    let ctx = PrecisionContext::from_digits(30);
    let (a, b) = (0.5, 0.25);
    let p = PIIIParams::new(&ctx.float(a), &ctx.float(b), ctx.bits())?;
    let traj = SigmaTrajectory::solve(&p, 1e5, &SigmaOptions::default(), &ctx)?;
    let bc = boundary_check(&traj)?;
    let c_want = 0.25 * (a * a + 2.0 * a * b);
    let (c_fit, sqrt_fit) = (bc.const_fit.unwrap_or(f64::NAN), bc.sqrt_fit.unwrap_or(f64::NAN));
    let rc = (c_fit / c_want - 1.0).abs();
    let rs = (sqrt_fit / (-a / 2.0) - 1.0).abs();
    outcome(
        rc <= 1e-3 && rs <= 1e-4,
        format!("constant {c_fit:.12} (rel {rc:.1e}), sqrt(s) coefficient {sqrt_fit:.12} (rel {rs:.1e})"),
    )
}

fn two_routes() -> Result<Outcome> {
    let ctx = PrecisionContext::from_digits(30);
    let p = PIIIParams::new(&ctx.float(0.5), &ctx.float(0.25), ctx.bits())?;
    let seed = lax_seed_from_series(&p, &ctx.float(0.05), &ctx)?;
    let lax = integrate_lax(&p, &seed, &ctx.float(5), 1e-17, &ctx)?;
    let traj = SigmaTrajectory::solve(&p, 2.0, &SigmaOptions::default(), &ctx)?;
    let mut worst = Float::with_val(ctx.bits(), 0);
    for s in [0.5, 1.0, 2.0, 5.0] {
        let x = ctx.float(s);
        worst = worst.max(&diff(&lax.sigma_at(&x)?, &transform_at(&traj, &x)?.sigma));
    }
    outcome(worst <= 1e-15, format!("max |sigma_Lax - sigma_transform| = {:.2e}", worst.to_f64()))
}

fn sweep_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(0.5, 0.25, HSpec::default());
    cfg.min_bits = Some(512);
    cfg.sweep = Some(SweepConfig {
        s_values: vec![0.5, 2.0],
        n_values: vec![16, 32, 64],
    });
    cfg
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0]) && v.iter().all(|x| x.is_finite())
}

fn fmt_series(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" > ")
}

fn double_scaling_sweep() -> Result<(Outcome, Outcome)> {
    let report = run_sweep(&sweep_config())?;
    let lndn: Vec<f64> = report.column(2.0).iter().map(|r| r.err_ln_dn.to_f64()).collect();
    let c6 = Outcome {
        pass: decreasing(&lndn) && lndn[2] * 2.0 <= lndn[0],
        detail: format!("s = 2: |ln D_n defect| {}", fmt_series(&lndn)),
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [0.5, 2.0] {
        let col = report.column(s);
        let g: Vec<f64> = col.iter().map(|r| r.scaled_gamma_err()).collect();
        let b2: Vec<f64> = col.iter().map(|r| r.err_b2.to_f64()).collect();
        pass &= decreasing(&g) && decreasing(&b2);
        if s == 0.5 {
            pass &= b2[2] < 1e-3;
        }
        parts.push(format!("s = {s}: gamma {}; b2 {}", fmt_series(&g), fmt_series(&b2)));
    }
    Ok((c6, Outcome { pass, detail: parts.join("; ") }))
}

fn small_s_limits() -> Result<Outcome> {
    let ctx = PrecisionContext::from_digits(30);
    let b = ctx.bits();
    let (a, be) = (0.5, 0.25);
    let kappa: f64 = a + be;
    let n = 32;
    let p = PIIIParams::new(&ctx.float(a), &ctx.float(be), b)?;
    let traj = SigmaTrajectory::solve(&p, 1e-3, &SigmaOptions::default(), &ctx)?;
    let pt = ScalingPoint::from_s(n, &ctx.float(1e-3))?;
    let spec = WeightSpec::new(a, be, 1.0, &HSpec::default(), &ctx)?.with_t(pt.t.clone())?;
    let v0 = ctx.float(0);
    let lp = leading_coeff_parts(&spec, &v0, &pt, &traj, &ctx)?;
    // remove the shared 1/(√π D_1(∞)) prefactor
    let d1 = log_szego_closed(&spec.alpha, &spec.kappa(), &v0, &ctx.float(1)).exp();
    let g = (Float::with_val(b, &lp.value * pi(b).sqrt()) * d1 - 1u32).to_f64();
    let g_want = -(4.0 * kappa * kappa - 1.0) / (8.0 * n as f64);
    let b2 = recurrence_prediction(&spec, &pt, &traj)?.to_f64() - 0.25;
    let b2_want = -(4.0 * kappa * kappa - 1.0) / (16.0 * (n * n) as f64);
    let (r1, r2) = ((g / g_want - 1.0).abs(), (b2 / b2_want - 1.0).abs());
    outcome(
        r1 <= 1e-4 && r2 <= 1e-4,
        format!("leading coefficient rel {r1:.1e}, recurrence rel {r2:.1e} at s = 1e-3, n = {n}"),
    )
}

fn tracy_widom() -> Result<Outcome> {
    let ctx = PrecisionContext::from_bits(384);
    let grid = [0.5, 1.0, 2.0, 4.0];
    let d15 = tracy_widom_check(0.5, 15, &grid, &ctx)?.max_abs_diff();
    let d30 = tracy_widom_check(0.5, 30, &grid, &ctx)?.max_abs_diff();
    outcome(
        d15.is_finite() && d30.is_finite() && d30 < d15,
        format!("max deviation n = 15: {d15:.3e}, n = 30: {d30:.3e}"),
    )
}

fn barnes_gamma() -> Result<Outcome> {
    let ctx = PrecisionContext::from_digits(30);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = Float::with_val(ctx.bits(), 0);
    for _ in 0..100 {
        let z = ctx.float(rng.gen_range(0.1..5.0));
        let z1 = Float::with_val(ctx.bits(), &z + 1u32);
        let r = log_barnes_g(&z1, &ctx)? - log_barnes_g(&z, &ctx)? - log_gamma(&z, &ctx)?;
        worst = worst.max(&r.abs());
    }
    let g4 = log_barnes_g(&ctx.float(4), &ctx)?.exp();
    let e4 = diff(&g4, &ctx.float(2));
    outcome(
        worst <= 1e-25 && e4 <= 1e-25,
        format!("max recurrence residual {:.1e}, |G(4) - 2| = {:.1e}", worst.to_f64(), e4.to_f64()),
    )
}

fn report(id: u32, title: &str, limit: Duration, elapsed: Duration, r: Result<Outcome>) -> bool {
    let (pass, detail) = match r {
        Ok(o) => {
            let in_time = elapsed <= limit;
            let note = if in_time { String::new() } else { format!(" (over the {limit:?} budget)") };
            (o.pass && in_time, format!("{}{note}", o.detail))
        }
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "{} criterion {id:>2} {title}: {detail} [{elapsed:.1?}]",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let r = f();
    (r, t0.elapsed())
}

fn main() {
    let secs = Duration::from_secs;
    let mut all = true;

    let (r, t) = timed(classical_closed_forms);
    all &= report(1, "classical closed forms", secs(10), t, r);
    let (r, t) = timed(determinant_oracle);
    all &= report(2, "determinant oracle", secs(30), t, r);
    let (r, t) = timed(sigma_residual_suite);
    all &= report(3, "sigma-form residual", secs(480), t, r);
    let (r, t) = timed(boundary_connection);
    all &= report(4, "boundary connection", secs(120), t, r);
    let (r, t) = timed(two_routes);
    all &= report(5, "Lax and transformation routes", secs(60), t, r);

    let (r, t) = timed(double_scaling_sweep);
    let (r6, r7) = match r {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => {
            let msg = e.to_string();
            (Err(e), Err(jacobi_piii::Error::InternalConsistency(msg)))
        }
    };
    all &= report(6, "ln D_n convergence", secs(300), t, r6);
    all &= report(7, "leading and recurrence coefficients", secs(300), t, r7);

    let (r, t) = timed(small_s_limits);
    all &= report(8, "small-s limits", secs(60), t, r);
    let (r, t) = timed(tracy_widom);
    all &= report(9, "hard-edge limit", secs(600), t, r);
    let (r, t) = timed(barnes_gamma);
    all &= report(10, "Barnes and Gamma", secs(5), t, r);

    if !all {
        std::process::exit(1);
    }
}
