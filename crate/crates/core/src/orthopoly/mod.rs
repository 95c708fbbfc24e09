//! Finite-n side: quadrature, moments, recurrence coefficients, Hankel determinants.

mod discretize;
mod quadrature;

pub use discretize::{even_measure, truncated_jacobi_measure, DiscreteMeasure};
pub use quadrature::{gauss_jacobi_rule, jacobi_rule, QuadratureRule};

use rug::ops::SubFrom;
use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::highprec::PrecisionContext;
use crate::weight::WeightSpec;

#[derive(Debug, Clone)]
pub struct MomentTable {
    pub mu: Vec<Float>,
}

/// Squared norms, recurrence coefficients and leading coefficients up to degree `n_max`.
#[derive(Debug, Clone)]
pub struct RecurrenceTable {
    pub n_max: usize,
    /// h_0..=h_{n_max}
    pub h: Vec<Float>,
    /// b²_0..b²_{n_max-1}
    pub b2: Vec<Float>,
    /// γ_0..=γ_{n_max}
    pub gamma: Vec<Float>,
    /// size of the discretization that passed the stability check
    pub nodes_used: usize,
}

#[derive(Debug, Clone)]
pub struct HankelResult {
    pub n: usize,
    pub log_dn: Float,
}

fn max_rel_diff(a: &[Float], b: &[Float], bits: u32) -> Float {
    let mut m = Float::with_val(bits, 0);
    for (x, y) in a.iter().zip(b) {
        let d = Float::with_val(bits, x - y).abs() / Float::with_val(bits, x.abs_ref());
        if d > m {
            m = d;
        }
    }
    m
}

/// Even moments from the discretized weight; odd moments are exact zeros.
pub fn moments(spec: &WeightSpec, count: usize, ctx: &PrecisionContext) -> Result<MomentTable> {
    let bits = ctx.bits();
    let tol = ctx.tolerance();
    let mut m = discretize::initial_size(spec, count / 2 + 1);
    let mut prev: Option<Vec<Float>> = None;
    loop {
        let meas = even_measure(spec, m)?;
        let cur = even_moments(&meas, count, bits);
        if let Some(p) = &prev {
            let evens: Vec<Float> = cur.iter().step_by(2).cloned().collect();
            let pe: Vec<Float> = p.iter().step_by(2).cloned().collect();
            if max_rel_diff(&evens, &pe, bits) <= tol {
                return Ok(MomentTable { mu: cur });
            }
        }
        if m >= discretize::max_size(spec) {
            return Err(Error::PrecisionInsufficient(format!(
                "moments unstable at {m} nodes; raise the precision or node cap"
            )));
        }
        prev = Some(cur);
        m *= 2;
    }
}

fn even_moments(meas: &DiscreteMeasure, count: usize, bits: u32) -> Vec<Float> {
    let mut mu = vec![Float::with_val(bits, 0); count + 1];
    let mut tmp = Float::new(bits);
    for (x, w) in meas.nodes.iter().zip(&meas.weights) {
        let x2 = Float::with_val(bits, x.square_ref());
        let mut p = w.clone();
        for k in (0..=count).step_by(2) {
            mu[k] += &p;
            tmp.assign(&p * &x2);
            std::mem::swap(&mut p, &mut tmp);
        }
    }
    mu
}

/// Squared norms h_0..=h_n of the monic polynomials of an even discrete measure.
pub fn stieltjes_even(meas: &DiscreteMeasure, n: usize, bits: u32) -> Result<Vec<Float>> {
    debug_assert!(meas.symmetric);
    let len = meas.len();
    let mut prev = vec![Float::with_val(bits, 0); len];
    let mut cur = vec![Float::with_val(bits, 1); len];
    let mut h = Vec::with_capacity(n + 1);
    let mut h0 = Float::with_val(bits, 0);
    for w in &meas.weights {
        h0 += w;
    }
    h.push(h0);
    let mut b2_prev = Float::with_val(bits, 0);
    let mut tmp = Float::new(bits);
    for k in 0..n {
        let mut acc = Float::with_val(bits, 0);
        for i in 0..len {
            // prev <- x cur - b2_{k-1} prev
            prev[i] *= &b2_prev;
            tmp.assign(&meas.nodes[i] * &cur[i]);
            prev[i].sub_from(&tmp);
            tmp.assign(prev[i].square_ref());
            tmp *= &meas.weights[i];
            acc += &tmp;
        }
        std::mem::swap(&mut prev, &mut cur);
        if !(acc > 0) {
            return Err(Error::PrecisionInsufficient(format!("h_{} lost positivity", k + 1)));
        }
        b2_prev = Float::with_val(bits, &acc / &h[k]);
        h.push(acc);
    }
    Ok(h)
}

/// Diagonal terms a_k and squared norms h_k for a general discrete measure.
pub fn stieltjes_general(meas: &DiscreteMeasure, n: usize, bits: u32) -> Result<(Vec<Float>, Vec<Float>)> {
    let len = meas.len();
    let mut prev = vec![Float::with_val(bits, 0); len];
    let mut cur = vec![Float::with_val(bits, 1); len];
    let mut h = Vec::with_capacity(n + 1);
    let mut a = Vec::with_capacity(n);
    let mut h0 = Float::with_val(bits, 0);
    for w in &meas.weights {
        h0 += w;
    }
    h.push(h0);
    let mut b2_prev = Float::with_val(bits, 0);
    let mut tmp = Float::new(bits);
    for k in 0..n {
        let mut xs = Float::with_val(bits, 0);
        for i in 0..len {
            tmp.assign(cur[i].square_ref());
            tmp *= &meas.weights[i];
            tmp *= &meas.nodes[i];
            xs += &tmp;
        }
        let ak = Float::with_val(bits, &xs / &h[k]);
        let mut acc = Float::with_val(bits, 0);
        for i in 0..len {
            prev[i] *= &b2_prev;
            tmp.assign(&meas.nodes[i] - &ak);
            tmp *= &cur[i];
            prev[i].sub_from(&tmp);
            tmp.assign(prev[i].square_ref());
            tmp *= &meas.weights[i];
            acc += &tmp;
        }
        std::mem::swap(&mut prev, &mut cur);
        if !(acc > 0) {
            return Err(Error::PrecisionInsufficient(format!("h_{} lost positivity", k + 1)));
        }
        b2_prev = Float::with_val(bits, &acc / &h[k]);
        h.push(acc);
        a.push(ak);
    }
    Ok((a, h))
}

pub fn table_from_norms(h: Vec<Float>, nodes_used: usize) -> RecurrenceTable {
    let n_max = h.len() - 1;
    let bits = h[0].prec();
    let b2 = (0..n_max).map(|k| Float::with_val(bits, &h[k + 1] / &h[k])).collect();
    let gamma = h.iter().map(|x| Float::with_val(bits, x.recip_sqrt_ref())).collect();
    RecurrenceTable {
        n_max,
        h,
        b2,
        gamma,
        nodes_used,
    }
}

/// Stieltjes procedure on the discretized weight, refined until b²_k (k < n) and h_0 are stable.
pub fn stieltjes_recurrence(spec: &WeightSpec, n: usize, ctx: &PrecisionContext) -> Result<RecurrenceTable> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let bits = ctx.bits();
    let tol = ctx.tolerance();
    let mut m = discretize::initial_size(spec, n);
    let mut prev: Option<RecurrenceTable> = None;
    loop {
        let meas = even_measure(spec, m)?;
        let cur = table_from_norms(stieltjes_even(&meas, n, bits)?, meas.len());
        if let Some(p) = &prev {
            let d = max_rel_diff(&cur.b2, &p.b2, bits).max(&max_rel_diff(&cur.h[..1], &p.h[..1], bits));
            if d <= tol {
                return Ok(cur);
            }
            log::debug!("stieltjes n={n} m={m}: change {:.3e}", d.to_f64());
        }
        if m >= discretize::max_size(spec) {
            return Err(Error::PrecisionInsufficient(format!(
                "recurrence coefficients unstable at discretization size {m}"
            )));
        }
        prev = Some(cur);
        m *= 2;
    }
}

pub fn hankel_log_det(rec: &RecurrenceTable, n: usize) -> Result<HankelResult> {
    if n > rec.n_max {
        return Err(Error::InvalidParameter(format!("n = {n} exceeds table size {}", rec.n_max)));
    }
    let bits = rec.h[0].prec();
    let mut s = Float::with_val(bits, 0);
    for h in &rec.h[..n] {
        s += Float::with_val(bits, h.ln_ref());
    }
    Ok(HankelResult { n, log_dn: s })
}

/// det(μ_{j+k}) by partial-pivot elimination at 4x precision. Small-n oracle only.
pub fn hankel_det_direct(mom: &MomentTable, n: usize, ctx: &PrecisionContext) -> Result<Float> {
    if n == 0 {
        return Ok(ctx.float(1));
    }
    if n > 12 {
        return Err(Error::InvalidParameter(format!(
            "direct Hankel determinant limited to n <= 12 (got {n})"
        )));
    }
    if mom.mu.len() < 2 * n - 1 {
        return Err(Error::InvalidParameter(format!("need {} moments", 2 * n - 1)));
    }
    let wb = 4 * ctx.bits();
    let mut a: Vec<Vec<Float>> = (0..n)
        .map(|j| (0..n).map(|k| Float::with_val(wb, &mom.mu[j + k])).collect())
        .collect();
    let mut det = Float::with_val(wb, 1);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].clone().abs().partial_cmp(&a[j][col].clone().abs()).unwrap())
            .unwrap();
        if a[piv][col].is_zero() {
            return Ok(ctx.float(0));
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= &a[col][col];
        for r in col + 1..n {
            let f = Float::with_val(wb, &a[r][col] / &a[col][col]);
            for k in col..n {
                let t = Float::with_val(wb, &f * &a[col][k]);
                a[r][k] -= t;
            }
        }
    }
    Ok(Float::with_val(ctx.bits(), det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::HSpec;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 60).unwrap()
    }

    fn close(a: &Float, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol
    }

    #[test]
    fn moment_examples() {
        let c = ctx();
        let w = WeightSpec::new(0.0, 0.0, 2.0, &HSpec::default(), &c).unwrap();
        let m = moments(&w, 4, &c).unwrap();
        assert!(close(&m.mu[0], 2.0, 1e-15) && close(&m.mu[2], 2.0 / 3.0, 1e-15) && close(&m.mu[4], 0.4, 1e-15));
        assert!(m.mu[1].is_zero() && m.mu[3].is_zero());
        let w = WeightSpec::new(0.0, -0.5, 2.0, &HSpec::default(), &c).unwrap();
        let m = moments(&w, 2, &c).unwrap();
        let pi = std::f64::consts::PI;
        assert!(close(&m.mu[0], pi, 1e-14) && close(&m.mu[2], pi / 2.0, 1e-14));
        let w = WeightSpec::new(1.0, 0.0, 2.0, &HSpec::default(), &c).unwrap();
        let m = moments(&w, 0, &c).unwrap();
        let want = Float::with_val(256, 22) / 3u32;
        assert!(Float::with_val(256, &m.mu[0] - &want).abs().to_f64() < 1e-60);
    }

    #[test]
    fn classical_recurrences() {
        let c = ctx();
        let w = WeightSpec::new(0.0, -0.5, 2.0, &HSpec::default(), &c).unwrap();
        let r = stieltjes_recurrence(&w, 20, &c).unwrap();
        assert!(Float::with_val(256, &r.b2[0] - 0.5).abs().to_f64() < 1e-60);
        for b in &r.b2[1..] {
            assert!(Float::with_val(256, b - 0.25).abs().to_f64() < 1e-60);
        }
        let w = WeightSpec::new(0.0, 0.0, 2.0, &HSpec::default(), &c).unwrap();
        let r = stieltjes_recurrence(&w, 20, &c).unwrap();
        for k in 1..=20u32 {
            let want = Float::with_val(256, k * k) / (4 * k * k - 1);
            assert!(Float::with_val(256, &r.b2[k as usize - 1] - &want).abs().to_f64() < 1e-60);
        }
        let d1 = hankel_log_det(&r, 1).unwrap().log_dn;
        assert!(close(&d1, 2f64.ln(), 1e-15));
        let d2 = hankel_log_det(&r, 2).unwrap().log_dn;
        assert!(close(&d2, (4.0f64 / 3.0).ln(), 1e-15));
        assert!(hankel_log_det(&r, 21).is_err());
    }

    #[test]
    fn direct_determinant_small() {
        let c = ctx();
        let w = WeightSpec::new(0.0, 0.0, 2.0, &HSpec::default(), &c).unwrap();
        let m = moments(&w, 6, &c).unwrap();
        let d3 = hankel_det_direct(&m, 3, &c).unwrap();
        let want = Float::with_val(256, 32) / 135u32;
        assert!(Float::with_val(256, &d3 - &want).abs().to_f64() < 1e-60);
        assert!(close(&hankel_det_direct(&m, 1, &c).unwrap(), 2.0, 0.0));
        assert!(hankel_det_direct(&m, 13, &c).is_err());
    }

    #[test]
    fn recurrence_matches_minor_ratios() {
        let c = ctx();
        let w = WeightSpec::new(0.5, 0.25, 1.5, &HSpec::default(), &c).unwrap();
        let r = stieltjes_recurrence(&w, 11, &c).unwrap();
        let m = moments(&w, 24, &c).unwrap();
        let d: Vec<Float> = (0..=12).map(|k| hankel_det_direct(&m, k, &c).unwrap()).collect();
        for k in 0..=10 {
            let want = Float::with_val(256, &d[k] * &d[k + 2]) / Float::with_val(256, d[k + 1].square_ref());
            let rel = (Float::with_val(256, &r.b2[k] / &want) - 1u32).abs().to_f64();
            assert!(rel < 1e-40, "k={k} rel={rel:e}");
        }
        let ln6 = hankel_log_det(&r, 6).unwrap().log_dn;
        let rel = (Float::with_val(256, ln6.exp_ref()) / &d[6] - 1u32).abs().to_f64();
        assert!(rel < 1e-50);
    }

    #[test]
    fn graded_route_near_one() {
        // t close to 1: graded panels; compare against moments-free invariants
        let c = PrecisionContext::new(256, 40).unwrap();
        let t = Float::with_val(256, 1) + Float::with_val(256, 1e-7);
        let w = WeightSpec::from_floats(c.float(0.5), c.float(0.25), t, &HSpec::default(), &c).unwrap();
        let r = stieltjes_recurrence(&w, 16, &c).unwrap();
        assert!(r.h.iter().all(|h| *h > 0));
        // D_n(t) increases with t for α > 0
        let t2 = Float::with_val(256, 1) + Float::with_val(256, 1e-6);
        let r2 = stieltjes_recurrence(&w.with_t(t2).unwrap(), 16, &c).unwrap();
        assert!(hankel_log_det(&r2, 16).unwrap().log_dn > hankel_log_det(&r, 16).unwrap().log_dn);
        // t = 1 limit: Jacobi weight with exponent 3/4
        let w1 = w.with_t(c.float(1)).unwrap();
        let r1 = stieltjes_recurrence(&w1, 16, &c).unwrap();
        let d = Float::with_val(256, &r.b2[15] - &r1.b2[15]).abs().to_f64();
        assert!(d < 1e-3 && d > 0.0);
        for k in 1..=16u32 {
            // symmetric Jacobi: b²_{k-1} = k(k + 2κ)/((2k + 2κ + 1)(2k + 2κ - 1))
            let kp = 0.75;
            let k = k as f64;
            let want = k * (k + 2.0 * kp) / ((2.0 * k + 2.0 * kp + 1.0) * (2.0 * k + 2.0 * kp - 1.0));
            assert!(close(&r1.b2[k as usize - 1], want, 1e-15));
        }
    }

    #[test]
    fn scaling_covariance() {
        let c = PrecisionContext::new(256, 50).unwrap();
        let w1 = WeightSpec::new(0.5, 0.25, 1.5, &HSpec::default(), &c).unwrap();
        let w3 = WeightSpec::new(0.5, 0.25, 1.5, &HSpec::constant(3.0), &c).unwrap();
        let r1 = stieltjes_recurrence(&w1, 8, &c).unwrap();
        let r3 = stieltjes_recurrence(&w3, 8, &c).unwrap();
        let shift = Float::with_val(256, hankel_log_det(&r3, 8).unwrap().log_dn - hankel_log_det(&r1, 8).unwrap().log_dn);
        let want = Float::with_val(256, 3).ln() * 8u32;
        assert!(Float::with_val(256, &shift - &want).abs().to_f64() < 1e-45);
        for (a, b) in r1.b2.iter().zip(&r3.b2) {
            assert!(Float::with_val(256, a - b).abs().to_f64() < 1e-45);
        }
    }

    #[test]
    fn truncated_measure_mass() {
        // ∫_{-1}^{c} (1 - x^2)^{1/2} dx = (asin c + c sqrt(1 - c^2))/2 + π/4
        let bits = 256;
        let a = Float::with_val(bits, 0.5);
        let c = Float::with_val(bits, 1) - Float::with_val(bits, 1e-4);
        let meas = truncated_jacobi_measure(&a, &c, 40, bits).unwrap();
        let mass: Float = meas.weights.iter().fold(Float::with_val(bits, 0), |s, w| s + w);
        let cc = c.to_f64();
        let want = ((cc.asin() + cc * (1.0 - cc * cc).sqrt()) / 2.0) + std::f64::consts::FRAC_PI_4;
        assert!((mass.to_f64() - want).abs() < 1e-14);
        let (ak, h) = stieltjes_general(&meas, 5, bits).unwrap();
        assert_eq!(ak.len(), 5);
        assert!(h.iter().all(|x| *x > 0));
    }
}
