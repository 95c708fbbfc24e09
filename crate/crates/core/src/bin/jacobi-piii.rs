use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use jacobi_piii::asympt::{leading_coeff_parts, ln_dn_prediction_with, recurrence_prediction, ScalingPoint, Thm1Prediction};
use jacobi_piii::harness::{
    compare_trajectory_file, emit_report, emit_trajectory, emit_tw_table, run_sweep, sweep_trajectory,
    tracy_widom_check, ExperimentConfig, ReportFormat,
};
use jacobi_piii::highprec::{serde_decimal, to_decimal, PrecisionContext};
use jacobi_piii::orthopoly::{hankel_log_det, moments, stieltjes_recurrence};
use jacobi_piii::piii::{boundary_check, PIIIParams, SigmaOptions, SigmaTrajectory};
use jacobi_piii::weight::fourier_log_h;
use jacobi_piii::Result;

#[derive(Parser)]
#[command(version, about = "Hankel determinants and Painleve III asymptotics for a perturbed Jacobi weight")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Moments mu_0..mu_{count-1} of the configured weight (CSV k, mu_k)
    Moments {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Squared norms, recurrence and leading coefficients (CSV k, h_k, b2_k, gamma_k)
    Recurrence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ln D_k for k = 1..=n (CSV n, log_Dn)
    Hankel {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate sigma_JM and write its accepted steps (CSV s, sigma, dsigma, d2sigma, residual)
    Sigma {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1e-3)]
        s_min: f64,
        #[arg(long, default_value_t = 1e5)]
        s_max: f64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        /// print fitted against predicted boundary coefficients
        #[arg(long)]
        check_boundary: bool,
    },
    /// Asymptotic predictions at one (n, s) as JSON, with the ln D_n parts
    Predict {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: f64,
        /// trajectory CSV: compared against when it exists, written otherwise
        #[arg(long)]
        traj: Option<PathBuf>,
    },
    /// Run the configured sweep and write the report (.csv or .json)
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// exit nonzero when a defect fails to shrink with n
        #[arg(long)]
        assert: bool,
    },
    /// Finite-n hard-edge log derivative against sigma_JM(s)/s (CSV s, finite_n, limit, diff)
    TracyWidom {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        s: Vec<f64>,
        #[arg(long, default_value_t = 384)]
        bits: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn csv_sink(out: &Option<PathBuf>) -> Result<csv::Writer<Box<dyn Write>>> {
    let w: Box<dyn Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(w))
}

fn digits(ctx: &PrecisionContext) -> usize {
    ctx.target_digits() as usize
}

fn load(config: &Path, n_max: usize) -> Result<(ExperimentConfig, PrecisionContext)> {
    let cfg = ExperimentConfig::load(config)?;
    let ctx = cfg.ctx_for(n_max);
    Ok((cfg, ctx))
}

#[derive(Serialize)]
struct PredictOut {
    alpha: f64,
    beta: f64,
    n: usize,
    #[serde(with = "serde_decimal")]
    s: rug::Float,
    #[serde(with = "serde_decimal")]
    t: rug::Float,
    ln_dn: Thm1Prediction,
    #[serde(with = "serde_decimal")]
    gamma_ratio: rug::Float,
    #[serde(with = "serde_decimal")]
    b2: rug::Float,
    #[serde(skip_serializing_if = "Option::is_none")]
    traj_max_abs_diff: Option<f64>,
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Moments { config, count, out } => {
            let (cfg, ctx) = load(&config, count)?;
            let m = moments(&cfg.weight_at_t(&ctx)?, count, &ctx)?;
            let mut w = csv_sink(&out)?;
            w.write_record(["k", "mu_k"])?;
            for (k, mu) in m.mu.iter().enumerate().take(count) {
                w.write_record([k.to_string(), to_decimal(mu, digits(&ctx))])?;
            }
            w.flush()?;
        }
        Cmd::Recurrence { config, n, out } => {
            let (cfg, ctx) = load(&config, n)?;
            let rec = stieltjes_recurrence(&cfg.weight_at_t(&ctx)?, n, &ctx)?;
            let d = digits(&ctx);
            let mut w = csv_sink(&out)?;
            w.write_record(["k", "h_k", "b2_k", "gamma_k"])?;
            for k in 0..=n {
                let b2 = rec.b2.get(k).map_or(String::new(), |b| to_decimal(b, d));
                w.write_record([k.to_string(), to_decimal(&rec.h[k], d), b2, to_decimal(&rec.gamma[k], d)])?;
            }
            w.flush()?;
        }
        Cmd::Hankel { config, n, out } => {
            let (cfg, ctx) = load(&config, n)?;
            let rec = stieltjes_recurrence(&cfg.weight_at_t(&ctx)?, n, &ctx)?;
            let mut w = csv_sink(&out)?;
            w.write_record(["n", "log_Dn"])?;
            for k in 1..=n {
                w.write_record([k.to_string(), to_decimal(&hankel_log_det(&rec, k)?.log_dn, digits(&ctx))])?;
            }
            w.flush()?;
        }
        Cmd::Sigma {
            alpha,
            beta,
            s_min,
            s_max,
            tol,
            digits,
            out,
            check_boundary,
        } => {
            let ctx = PrecisionContext::from_digits(digits);
            let p = PIIIParams::new(&ctx.float(alpha), &ctx.float(beta), ctx.bits())?;
            let opts = SigmaOptions {
                tol,
                ..SigmaOptions::default()
            };
            let traj = SigmaTrajectory::solve(&p, s_max, &opts, &ctx)?;
            eprintln!(
                "{} steps, max |residual| {:.3e} (tol {:.1e})",
                traj.steps(),
                traj.max_residual(),
                traj.tol()
            );
            if let Some(path) = &out {
                let rows = emit_trajectory(&traj, s_min, path)?;
                eprintln!("wrote {rows} rows to {}", path.display());
            }
            if check_boundary {
                let b = boundary_check(&traj)?;
                println!("small-s constant: fitted {:.12e} predicted {:.12e}", b.c_fit, b.c_pred);
                match (b.sqrt_fit, b.sqrt_pred, b.const_fit, b.const_pred) {
                    (Some(a), Some(ap), Some(c), Some(cp)) => {
                        println!("sqrt(s) coefficient: fitted {a:.12e} predicted {ap:.12e}");
                        println!("large-s constant: fitted {c:.12e} predicted {cp:.12e}");
                    }
                    _ => println!("large-s fit needs --s-max >= 1e5"),
                }
            }
        }
        Cmd::Predict { config, n, s, traj } => {
            let (cfg, ctx) = load(&config, n)?;
            let base = cfg.weight(&ctx.float(1), &ctx)?;
            let v = fourier_log_h(&base, None, &ctx)?;
            let tr = sweep_trajectory(&cfg, s, &ctx)?;
            let pt = ScalingPoint::from_s(n, &ctx.float(s))?;
            let spec = base.with_t(pt.t.clone())?;
            let ln_dn = ln_dn_prediction_with(&spec, &v, &pt, &tr, &ctx)?;
            let gamma_ratio = leading_coeff_parts(&spec, v.v0(), &pt, &tr, &ctx)?.value;
            let b2 = recurrence_prediction(&spec, &pt, &tr)?;
            let traj_max_abs_diff = match &traj {
                Some(p) if p.exists() => Some(compare_trajectory_file(&tr, p)?),
                Some(p) => {
                    emit_trajectory(&tr, 0.0, p)?;
                    None
                }
                None => None,
            };
            let out = PredictOut {
                alpha: cfg.alpha,
                beta: cfg.beta,
                n,
                s: pt.s.clone(),
                t: pt.t.clone(),
                ln_dn,
                gamma_ratio,
                b2,
                traj_max_abs_diff,
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Cmd::Verify { config, out, assert } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_sweep(&cfg)?;
            let mut targets: Vec<PathBuf> = out.into_iter().collect();
            if targets.is_empty() {
                targets.extend(cfg.outputs.csv.iter().cloned());
                targets.extend(cfg.outputs.json.iter().cloned());
            }
            for path in &targets {
                emit_report(&report, ReportFormat::from_path(path), path)?;
                eprintln!("wrote {}", path.display());
            }
            println!("{:>8} {:>5} {:>12} {:>12} {:>12}", "s", "n", "err ln D_n", "err gamma", "err b2");
            for r in &report.rows {
                println!(
                    "{:8} {:5} {:12.4e} {:12.4e} {:12.4e}",
                    r.s.to_f64(),
                    r.n,
                    r.err_ln_dn.to_f64(),
                    r.scaled_gamma_err(),
                    r.err_b2.to_f64()
                );
            }
            let breaches = report.breaches();
            for b in &breaches {
                eprintln!("breach: {b}");
            }
            if assert && !breaches.is_empty() {
                return Ok(ExitCode::from(2));
            }
        }
        Cmd::TracyWidom { alpha, n, s, bits, out } => {
            let ctx = PrecisionContext::from_bits(bits);
            let table = tracy_widom_check(alpha, n, &s, &ctx)?;
            match &out {
                Some(p) => emit_tw_table(&table, p)?,
                None => {
                    let mut w = csv::Writer::from_writer(std::io::stdout());
                    for r in &table.rows {
                        w.serialize(r)?;
                    }
                    w.flush()?;
                }
            }
            eprintln!("max |diff| = {:.4e}", table.max_abs_diff());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse().cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
