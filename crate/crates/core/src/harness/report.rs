use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AsymptoticReport, ReportRow};
use crate::error::{Error, Result};
use crate::highprec::{digits_for_bits, from_decimal, to_decimal};
use crate::piii::SigmaTrajectory;
use crate::weight::HSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

/// Fixed CSV header; the parts breakdown is JSON-only.
pub const CSV_HEADER: [&str; 12] = [
    "n",
    "t",
    "s",
    "exact_ln_dn",
    "pred_ln_dn",
    "err_ln_dn",
    "exact_gamma_ratio",
    "pred_gamma_ratio",
    "err_gamma_ratio",
    "exact_b2",
    "pred_b2",
    "err_b2",
];

#[derive(Serialize, Deserialize)]
struct CsvRow {
    n: usize,
    t: String,
    s: String,
    exact_ln_dn: String,
    pred_ln_dn: String,
    err_ln_dn: String,
    exact_gamma_ratio: String,
    pred_gamma_ratio: String,
    err_gamma_ratio: String,
    exact_b2: String,
    pred_b2: String,
    err_b2: String,
}

pub fn emit_report(report: &AsymptoticReport, format: ReportFormat, path: &Path) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let mut w = BufWriter::new(File::create(path)?);
            serde_json::to_writer_pretty(&mut w, report)?;
            w.write_all(b"\n")?;
        }
        ReportFormat::Csv => {
            let d = digits_for_bits(report.bits).min(report.digits as usize).max(17);
            let mut w = csv::Writer::from_path(path)?;
            for r in &report.rows {
                let f = |x: &rug::Float| to_decimal(x, d);
                w.serialize(CsvRow {
                    n: r.n,
                    t: f(&r.t),
                    s: f(&r.s),
                    exact_ln_dn: f(&r.exact_ln_dn),
                    pred_ln_dn: f(&r.pred_ln_dn),
                    err_ln_dn: f(&r.err_ln_dn),
                    exact_gamma_ratio: f(&r.exact_gamma_ratio),
                    pred_gamma_ratio: f(&r.pred_gamma_ratio),
                    err_gamma_ratio: f(&r.err_gamma_ratio),
                    exact_b2: f(&r.exact_b2),
                    pred_b2: f(&r.pred_b2),
                    err_b2: f(&r.err_b2),
                })?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Reads either format back. A CSV carries no header metadata, so α, β and h come back as NaN/default.
pub fn read_report(path: &Path, format: ReportFormat, bits: u32) -> Result<AsymptoticReport> {
    match format {
        ReportFormat::Json => Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?),
        ReportFormat::Csv => {
            let mut rd = csv::Reader::from_path(path)?;
            let head: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
            if head != CSV_HEADER {
                return Err(Error::Config(format!("unexpected CSV header {head:?}")));
            }
            let mut rows = Vec::new();
            for rec in rd.deserialize() {
                let c: CsvRow = rec?;
                let p = |s: &str| from_decimal(s, bits);
                rows.push(ReportRow {
                    n: c.n,
                    t: p(&c.t)?,
                    s: p(&c.s)?,
                    exact_ln_dn: p(&c.exact_ln_dn)?,
                    pred_ln_dn: p(&c.pred_ln_dn)?,
                    err_ln_dn: p(&c.err_ln_dn)?,
                    exact_gamma_ratio: p(&c.exact_gamma_ratio)?,
                    pred_gamma_ratio: p(&c.pred_gamma_ratio)?,
                    err_gamma_ratio: p(&c.err_gamma_ratio)?,
                    exact_b2: p(&c.exact_b2)?,
                    pred_b2: p(&c.pred_b2)?,
                    err_b2: p(&c.err_b2)?,
                    parts: None,
                });
            }
            Ok(AsymptoticReport {
                alpha: f64::NAN,
                beta: f64::NAN,
                h: HSpec::default(),
                bits,
                digits: digits_for_bits(bits) as u32,
                rows,
            })
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TrajRow {
    s: String,
    sigma: String,
    dsigma: String,
    d2sigma: String,
    residual: f64,
}

/// Accepted steps of σ_JM with s ≥ `s_min`: columns s, sigma, dsigma, d2sigma, residual.
pub fn emit_trajectory(traj: &SigmaTrajectory, s_min: f64, path: &Path) -> Result<usize> {
    let d = digits_for_bits(traj.samples().first().map_or(64, |p| p.s.prec())).max(17);
    let mut w = csv::Writer::from_path(path)?;
    let mut count = 0;
    for (st, r) in traj.samples().iter().zip(traj.residuals()) {
        if st.s < s_min {
            continue;
        }
        w.serialize(TrajRow {
            s: to_decimal(&st.s, d),
            sigma: to_decimal(&st.sigma, d),
            dsigma: to_decimal(&st.dsigma, d),
            d2sigma: to_decimal(&st.d2sigma, d),
            residual: *r,
        })?;
        count += 1;
    }
    w.flush()?;
    Ok(count)
}

/// Largest |σ(file) - σ(traj)| over the rows of a trajectory CSV that fall inside `traj`'s range.
pub fn compare_trajectory_file(traj: &SigmaTrajectory, path: &Path) -> Result<f64> {
    let bits = traj.samples().first().map_or(64, |p| p.s.prec());
    let (lo, hi) = traj.range();
    let mut rd = csv::Reader::from_path(path)?;
    let mut worst = 0f64;
    let mut used = 0usize;
    for rec in rd.deserialize() {
        let r: TrajRow = rec?;
        let s = from_decimal(&r.s, bits)?;
        if s.to_f64() < lo || s.to_f64() > hi {
            continue;
        }
        let sig = from_decimal(&r.sigma, bits)?;
        let here = traj.point(&s)?.sigma;
        worst = worst.max(rug::Float::with_val(bits, &sig - &here).abs().to_f64());
        used += 1;
    }
    if used == 0 {
        return Err(Error::Config(format!("{} has no rows inside [{lo:e}, {hi:e}]", path.display())));
    }
    Ok(worst)
}
