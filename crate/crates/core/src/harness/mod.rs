//! Sweeps comparing exact finite-n quantities with the double-scaling predictions.

mod config;
mod report;
mod tw;

pub use config::{ExperimentConfig, Outputs, SweepConfig};
pub use report::{compare_trajectory_file, emit_report, emit_trajectory, read_report, ReportFormat, CSV_HEADER};
pub use tw::{emit_tw_table, finite_n_log_derivative, tracy_widom_check, TwRow, TwTable};

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::asympt::{leading_coeff_parts, ln_dn_prediction_with, recurrence_prediction, ScalingPoint, Thm1Parts};
use crate::error::{Error, Result};
use crate::highprec::{serde_decimal, PrecisionContext};
use crate::orthopoly::{hankel_log_det, stieltjes_recurrence};
use crate::piii::{PIIIParams, SigmaOptions, SigmaTrajectory};
use crate::weight::{fourier_log_h, FourierLogH, HSpec, WeightSpec};

/// One (n, s) comparison. `err_*` are absolute differences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    #[serde(with = "serde_decimal")]
    pub t: Float,
    #[serde(with = "serde_decimal")]
    pub s: Float,
    #[serde(with = "serde_decimal")]
    pub exact_ln_dn: Float,
    #[serde(with = "serde_decimal")]
    pub pred_ln_dn: Float,
    #[serde(with = "serde_decimal")]
    pub err_ln_dn: Float,
    #[serde(with = "serde_decimal")]
    pub exact_gamma_ratio: Float,
    #[serde(with = "serde_decimal")]
    pub pred_gamma_ratio: Float,
    #[serde(with = "serde_decimal")]
    pub err_gamma_ratio: Float,
    #[serde(with = "serde_decimal")]
    pub exact_b2: Float,
    #[serde(with = "serde_decimal")]
    pub pred_b2: Float,
    #[serde(with = "serde_decimal")]
    pub err_b2: Float,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<Thm1Parts>,
}

impl ReportRow {
    /// |exact γ_n/2ⁿ - prediction| / √(t-1).
    pub fn scaled_gamma_err(&self) -> f64 {
        let b = self.t.prec();
        let tm1 = Float::with_val(b, &self.t - 1u32);
        (Float::with_val(b, &self.err_gamma_ratio / tm1.sqrt())).to_f64()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub alpha: f64,
    pub beta: f64,
    pub h: HSpec,
    pub bits: u32,
    pub digits: u32,
    pub rows: Vec<ReportRow>,
}

impl AsymptoticReport {
    /// Rows at the given s, ordered by n.
    pub fn column(&self, s: f64) -> Vec<&ReportRow> {
        let mut v: Vec<&ReportRow> = self.rows.iter().filter(|r| (r.s.to_f64() - s).abs() <= 1e-12 * s).collect();
        v.sort_by_key(|r| r.n);
        v
    }
}

/// A fixed-s column whose defect fails to shrink between consecutive n.
#[derive(Debug, Clone, PartialEq)]
pub struct Breach {
    pub quantity: &'static str,
    pub s: f64,
    pub n_from: usize,
    pub n_to: usize,
    pub from: f64,
    pub to: f64,
}

impl std::fmt::Display for Breach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} at s = {}: {:.4e} (n = {}) -> {:.4e} (n = {})",
            self.quantity, self.s, self.from, self.n_from, self.to, self.n_to
        )
    }
}

impl AsymptoticReport {
    /// Distinct s values in first-seen order.
    pub fn s_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::new();
        for r in &self.rows {
            let s = r.s.to_f64();
            if !v.iter().any(|x| (x - s).abs() <= 1e-12 * s) {
                v.push(s);
            }
        }
        v
    }

    /// Non-finite errors or defects that do not decrease with n within an s column.
    pub fn breaches(&self) -> Vec<Breach> {
        let mut out = Vec::new();
        for s in self.s_values() {
            let col = self.column(s);
            let series: [(&'static str, Vec<f64>); 3] = [
                ("ln D_n", col.iter().map(|r| r.err_ln_dn.to_f64()).collect()),
                ("gamma_n/2^n over sqrt(t-1)", col.iter().map(|r| r.scaled_gamma_err()).collect()),
                ("b2_(n-1)", col.iter().map(|r| r.err_b2.to_f64()).collect()),
            ];
            for (q, e) in series {
                for i in 0..e.len() {
                    let bad_next = i + 1 < e.len() && !(e[i + 1] < e[i]);
                    if !e[i].is_finite() || bad_next {
                        let j = (i + 1).min(e.len() - 1);
                        out.push(Breach {
                            quantity: q,
                            s,
                            n_from: col[i].n,
                            n_to: col[j].n,
                            from: e[i],
                            to: e[j],
                        });
                    }
                }
            }
        }
        out
    }
}

/// Exact side at one point: (ln D_n, γ_n/2ⁿ, b²_{n-1}).
pub fn exact_side(spec: &WeightSpec, n: usize, ctx: &PrecisionContext) -> Result<(Float, Float, Float)> {
    let b = ctx.bits();
    let rec = stieltjes_recurrence(spec, n, ctx)?;
    let ln_dn = hankel_log_det(&rec, n)?.log_dn;
    let gamma = Float::with_val(b, &rec.gamma[n]) >> n as i32;
    let b2 = rec.b2[n - 1].clone();
    let back = Float::with_val(b, &b2 * &rec.h[n - 1]);
    let defect = Float::with_val(b, &back - &rec.h[n]).abs() / &rec.h[n];
    if defect > ctx.tolerance() {
        return Err(Error::InternalConsistency(format!(
            "b²_(n-1) h_(n-1) differs from h_n by {:.3e}",
            defect.to_f64()
        )));
    }
    Ok((ln_dn, gamma, b2))
}

fn row(
    base: &WeightSpec,
    v: &FourierLogH,
    traj: &SigmaTrajectory,
    n: usize,
    s: f64,
    ctx: &PrecisionContext,
) -> Result<ReportRow> {
    let b = ctx.bits();
    let pt = ScalingPoint::from_s(n, &ctx.float(s))?;
    let spec = base.with_t(pt.t.clone())?;
    let (exact_ln_dn, exact_gamma_ratio, exact_b2) = exact_side(&spec, n, ctx)?;
    let p1 = ln_dn_prediction_with(&spec, v, &pt, traj, ctx)?;
    let p2 = leading_coeff_parts(&spec, v.v0(), &pt, traj, ctx)?.value;
    let p3 = recurrence_prediction(&spec, &pt, traj)?;
    let err = |a: &Float, c: &Float| Float::with_val(b, a - c).abs();
    Ok(ReportRow {
        n,
        t: pt.t.clone(),
        s: pt.s.clone(),
        err_ln_dn: err(&exact_ln_dn, &p1.ln_dn_pred),
        err_gamma_ratio: err(&exact_gamma_ratio, &p2),
        err_b2: err(&exact_b2, &p3),
        exact_ln_dn,
        pred_ln_dn: p1.ln_dn_pred,
        exact_gamma_ratio,
        pred_gamma_ratio: p2,
        exact_b2,
        pred_b2: p3,
        parts: Some(p1.parts),
    })
}

/// σ_JM trajectory covering s ∈ (0, s_max] of the double-scaling variable, i.e. τ up to s_max²/16.
pub fn sweep_trajectory(cfg: &ExperimentConfig, s_max: f64, ctx: &PrecisionContext) -> Result<SigmaTrajectory> {
    let b = ctx.bits();
    let params = PIIIParams::new(&ctx.float(cfg.alpha), &ctx.float(cfg.beta), b)?;
    let opts = SigmaOptions {
        tol: cfg.tol,
        ..SigmaOptions::default()
    };
    SigmaTrajectory::solve(&params, s_max * s_max / 16.0 * (1.0 + 1e-9), &opts, ctx)
}

/// Every (s, n) pair of the sweep; rows run in parallel and share one trajectory.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<AsymptoticReport> {
    cfg.validate()?;
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("the config has no [sweep] table".into()))?;
    let n_max = *sw.n_values.iter().max().unwrap();
    let ctx = cfg.ctx_for(n_max);
    let base = cfg.weight(&ctx.float(1), &ctx)?;
    let v = fourier_log_h(&base, None, &ctx)?;
    let s_max = sw.s_values.iter().cloned().fold(0.0, f64::max);
    let traj = sweep_trajectory(cfg, s_max, &ctx)?;
    let jobs: Vec<(usize, f64)> = sw
        .s_values
        .iter()
        .flat_map(|&s| sw.n_values.iter().map(move |&n| (n, s)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, s)| row(&base, &v, &traj, n, s, &ctx).map_err(|e| e.at(n, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AsymptoticReport {
        alpha: cfg.alpha,
        beta: cfg.beta,
        h: cfg.h.clone(),
        bits: ctx.bits(),
        digits: ctx.target_digits(),
        rows,
    })
}
