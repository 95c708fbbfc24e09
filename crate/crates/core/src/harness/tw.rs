//! Hard-edge check: -d/ds ln P_n(λ_max < 1 - s/(2n²)) for (1-x²)^α against σ_JM(s)/s at β = 0.

use std::path::Path;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::highprec::PrecisionContext;
use crate::orthopoly::{stieltjes_general, truncated_jacobi_measure};
use crate::piii::{PIIIParams, SigmaOptions, SigmaTrajectory};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwRow {
    pub s: f64,
    /// -d/ds ln P_n at finite n
    pub finite_n: f64,
    /// σ_JM(s)/s
    pub limit: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwTable {
    pub alpha: f64,
    pub n: usize,
    pub rows: Vec<TwRow>,
}

impl TwTable {
    pub fn max_abs_diff(&self) -> f64 {
        self.rows.iter().map(|r| r.diff.abs()).fold(0.0, f64::max)
    }
}

/// ln det of the n×n moment matrix of (1-x²)^α on [-1, c], refined until stable.
fn ln_dn_truncated(alpha: &Float, c: &Float, n: usize, ctx: &PrecisionContext) -> Result<Float> {
    let bits = ctx.bits();
    let tol = ctx.tolerance();
    let mut m = n + 16;
    let mut prev: Option<Float> = None;
    loop {
        let meas = truncated_jacobi_measure(alpha, c, m, bits)?;
        let (_, h) = stieltjes_general(&meas, n, bits)?;
        let mut l = Float::with_val(bits, 0);
        for hk in &h[..n] {
            l += Float::with_val(bits, hk.ln_ref());
        }
        if let Some(p) = &prev {
            if Float::with_val(bits, &l - p).abs() <= tol {
                return Ok(l);
            }
        }
        if m > 4096 {
            return Err(Error::PrecisionInsufficient(format!(
                "truncated-measure determinant unstable at {m} nodes per panel"
            )));
        }
        prev = Some(l);
        m *= 2;
    }
}

/// -d/ds ln D_n^{(c(s))}, c(s) = 1 - s/(2n²), by a five-point stencil of half-width 2h.
pub fn finite_n_log_derivative(alpha: f64, n: usize, s: f64, h: f64, ctx: &PrecisionContext) -> Result<f64> {
    let bits = ctx.bits();
    let a = ctx.float(alpha);
    let two_n2 = (2 * n * n) as u32;
    let f = |x: f64| -> Result<Float> {
        let c = Float::with_val(bits, 1) - Float::with_val(bits, ctx.float(x) / two_n2);
        ln_dn_truncated(&a, &c, n, ctx)
    };
    let (fm2, fm1, fp1, fp2) = (f(s - 2.0 * h)?, f(s - h)?, f(s + h)?, f(s + 2.0 * h)?);
    let mut d = Float::with_val(bits, &fm2 - &fp2);
    d += Float::with_val(bits, &fp1 - &fm1) * 8u32;
    d /= ctx.float(12.0 * h);
    Ok(-d.to_f64())
}

/// Finite-n logarithmic derivative against σ_JM(s)/s on `s_grid`.
pub fn tracy_widom_check(alpha: f64, n: usize, s_grid: &[f64], ctx: &PrecisionContext) -> Result<TwTable> {
    if s_grid.is_empty() || s_grid.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidParameter("s grid must be non-empty and positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut grid = s_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_gap = grid.windows(2).map(|w| w[1] - w[0]).fold(grid[0], f64::min);
    let h = min_gap / 50.0;
    let s_max = grid[grid.len() - 1];
    if s_max + 2.0 * h >= (2 * n * n) as f64 {
        return Err(Error::InvalidParameter(format!("s = {s_max} puts the cut outside (-1, 1)")));
    }
    let params = PIIIParams::new(&ctx.float(alpha), &ctx.float(0), ctx.bits())?;
    let traj = SigmaTrajectory::solve(&params, s_max * (1.0 + 1e-9), &SigmaOptions::default(), ctx)?;
    let rows = s_grid
        .iter()
        .map(|&s| {
            let finite_n = finite_n_log_derivative(alpha, n, s, h, ctx)?;
            let limit = traj.eval_f64(s)? / s;
            Ok(TwRow {
                s,
                finite_n,
                limit,
                diff: finite_n - limit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TwTable { alpha, n, rows })
}

pub fn emit_tw_table(table: &TwTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in &table.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_is_positive_and_small_near_zero() {
        let ctx = PrecisionContext::from_bits(256);
        let t = tracy_widom_check(0.5, 8, &[0.05, 1.0], &ctx).unwrap();
        for r in &t.rows {
            assert!(r.finite_n > 0.0 && r.limit > 0.0, "{r:?}");
        }
        assert!(t.rows[0].finite_n < t.rows[1].finite_n);
    }
}
