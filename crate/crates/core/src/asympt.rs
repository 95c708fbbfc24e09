//! Right-hand sides of the double-scaling expansions for ln D_n, γ_n and b²_{n-1}.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::highprec::{ln2, log_barnes_g, pi, serde_decimal, PrecisionContext};
use crate::piii::{q_derivs, SigmaTrajectory};
use crate::weight::{fourier_log_h, log_phi, log_szego_closed, scaling_s, solve_t, FourierLogH, WeightSpec};

/// A point on the double-scaling path, s = 4n ln φ(t).
#[derive(Debug, Clone)]
pub struct ScalingPoint {
    pub n: usize,
    pub t: Float,
    pub s: Float,
}

impl ScalingPoint {
    pub fn from_s(n: usize, s: &Float) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(*s > 0) {
            return Err(Error::InvalidParameter(format!(
                "s = {} must be positive; t = 1 goes through ln_dn_at_1",
                s.to_f64()
            )));
        }
        Ok(Self {
            n,
            t: solve_t(n, s),
            s: s.clone(),
        })
    }

    pub fn from_t(n: usize, t: &Float) -> Result<Self> {
        if n == 0 || !(*t > 1) {
            return Err(Error::InvalidParameter("need n >= 1 and t > 1".into()));
        }
        Ok(Self {
            n,
            t: t.clone(),
            s: scaling_s(n, t),
        })
    }

    /// t - 1 without cancellation: 2 sinh²(s/(8n)).
    pub fn t_minus_one(&self) -> Float {
        let b = self.s.prec();
        let h = Float::with_val(b, &self.s / (8 * self.n) as u32).sinh();
        h.square() * 2u32
    }
}

/// The terms of the ln D_n expansion, named after what they carry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thm1Parts {
    /// (n+α+β)V_0 + (1/2)Σ kV_k²
    #[serde(with = "serde_decimal")]
    pub v_part: Float,
    /// -α ln h(t) - β ln h(1)
    #[serde(with = "serde_decimal")]
    pub h_endpoint_part: Float,
    /// ((α+β)² - 1/4) ln(n/4)
    #[serde(with = "serde_decimal")]
    pub log_n_part: Float,
    /// -(n² + 2n(α+β) + 1) ln 2
    #[serde(with = "serde_decimal")]
    pub log2_part: Float,
    /// (n + α + β + 1/2) ln 2π
    #[serde(with = "serde_decimal")]
    pub log2pi_part: Float,
    /// 2 ln(G(1/2)/G(α+β+1))
    #[serde(with = "serde_decimal")]
    pub barnes_part: Float,
    /// -(α²/2) ln t
    #[serde(with = "serde_decimal")]
    pub alpha_logt_part: Float,
    /// (1/2)(n ln φ(t))²
    #[serde(with = "serde_decimal")]
    pub nlogphi_sq_part: Float,
    /// -4 ∫_0^s σ_JM(x²/16)/x dx
    #[serde(with = "serde_decimal")]
    pub sigma_integral_part: Float,
}

impl Thm1Parts {
    pub fn named(&self) -> [(&'static str, &Float); 9] {
        [
            ("v_part", &self.v_part),
            ("h_endpoint_part", &self.h_endpoint_part),
            ("log_n_part", &self.log_n_part),
            ("log2_part", &self.log2_part),
            ("log2pi_part", &self.log2pi_part),
            ("barnes_part", &self.barnes_part),
            ("alpha_logt_part", &self.alpha_logt_part),
            ("nlogphi_sq_part", &self.nlogphi_sq_part),
            ("sigma_integral_part", &self.sigma_integral_part),
        ]
    }

    /// Left-to-right sum in the order of `named`.
    pub fn sum(&self) -> Float {
        let b = self.v_part.prec();
        let mut acc = Float::with_val(b, 0);
        for (_, v) in self.named() {
            acc += v;
        }
        acc
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thm1Prediction {
    #[serde(with = "serde_decimal")]
    pub ln_dn_pred: Float,
    pub parts: Thm1Parts,
}

/// The four n- and κ-dependent terms shared by t = 1 and t > 1: (log_n, log2, log2pi, barnes).
fn common_terms(kappa: &Float, n: usize, ctx: &PrecisionContext) -> Result<[Float; 4]> {
    let b = ctx.bits();
    let k1 = Float::with_val(b, kappa + 1u32);
    if !(k1 > 0) {
        return Err(Error::Domain(format!("alpha + beta + 1 = {} must be positive", k1.to_f64())));
    }
    let nf = Float::with_val(b, n);
    let log_n = (Float::with_val(b, kappa.square_ref()) - 0.25f64) * Float::with_val(b, &nf / 4u32).ln();
    let mut c2 = Float::with_val(b, nf.square_ref());
    c2 += Float::with_val(b, &nf * kappa) * 2u32;
    c2 += 1u32;
    let log2 = -(c2 * ln2(b));
    let log2pi = (Float::with_val(b, &nf + kappa) + 0.5f64) * (pi(b) * 2u32).ln();
    let half = Float::with_val(b, 0.5);
    let barnes = (log_barnes_g(&half, ctx)? - log_barnes_g(&k1, ctx)?) * 2u32;
    Ok([log_n, log2, log2pi, barnes])
}

/// ln D_n at t = 1 for a weight (1-x²)^{α+β} h(x).
pub fn ln_dn_at_1(alpha_plus_beta: &Float, v: &FourierLogH, n: usize, ctx: &PrecisionContext) -> Result<Float> {
    let b = ctx.bits();
    let [log_n, log2, log2pi, barnes] = common_terms(alpha_plus_beta, n, ctx)?;
    let mut r = log2;
    r += log_n;
    r += log2pi;
    r += barnes;
    r += Float::with_val(b, alpha_plus_beta + n as u32) * v.v0();
    r -= Float::with_val(b, alpha_plus_beta * v.log_h_at_one());
    r += v.weighted_square_sum() / 2u32;
    Ok(r)
}

/// ln h(x) for x >= 1; half the working digits must survive the continuation.
fn log_h_at(spec: &WeightSpec, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let hv = spec.h.eval_continued(x, &ctx.tolerance().sqrt())?;
    if !(hv > 0) {
        return Err(Error::Continuation(format!("h({}) is not positive", x.to_f64())));
    }
    Ok(hv.ln())
}

fn check_coverage(traj: &SigmaTrajectory, s: &Float) -> Result<()> {
    let tau = s.to_f64().powi(2) / 16.0;
    let (_, hi) = traj.range();
    if tau > hi * (1.0 + 1e-12) {
        return Err(Error::Range {
            what: "s²/16",
            value: tau,
            lo: 0.0,
            hi,
        });
    }
    Ok(())
}

/// All displayed terms of the ln D_n expansion at `point`, using V_k of `spec`'s h.
pub fn ln_dn_prediction_with(
    spec: &WeightSpec,
    v: &FourierLogH,
    point: &ScalingPoint,
    traj: &SigmaTrajectory,
    ctx: &PrecisionContext,
) -> Result<Thm1Prediction> {
    let b = ctx.bits();
    check_coverage(traj, &point.s)?;
    let kappa = spec.kappa();
    let [log_n_part, log2_part, log2pi_part, barnes_part] = common_terms(&kappa, point.n, ctx)?;
    let mut v_part = Float::with_val(b, &kappa + point.n as u32) * v.v0();
    v_part += v.weighted_square_sum() / 2u32;
    let h_endpoint_part = if spec.h_is_unit() {
        Float::with_val(b, 0)
    } else {
        let lt = log_h_at(spec, &point.t, ctx)?;
        let l1 = log_h_at(spec, &Float::with_val(b, 1), ctx)?;
        -(Float::with_val(b, &spec.alpha * &lt) + Float::with_val(b, &spec.beta * &l1))
    };
    let alpha_logt_part = -(Float::with_val(b, spec.alpha.square_ref()) / 2u32 * Float::with_val(b, point.t.ln_ref()));
    let nl = log_phi(&point.t) * point.n as u32;
    let nlogphi_sq_part = nl.square() / 2u32;
    let sigma_integral_part = -(Float::with_val(b, traj.sigma_integral(&point.s)?) * 4u32);
    let parts = Thm1Parts {
        v_part,
        h_endpoint_part,
        log_n_part,
        log2_part,
        log2pi_part,
        barnes_part,
        alpha_logt_part,
        nlogphi_sq_part,
        sigma_integral_part,
    };
    Ok(Thm1Prediction {
        ln_dn_pred: parts.sum(),
        parts,
    })
}

pub fn ln_dn_prediction(
    spec: &WeightSpec,
    point: &ScalingPoint,
    traj: &SigmaTrajectory,
    ctx: &PrecisionContext,
) -> Result<Thm1Prediction> {
    let v = fourier_log_h(spec, None, ctx)?;
    ln_dn_prediction_with(spec, &v, point, traj, ctx)
}

/// q(s)/s and (q/s)'(s) from the trajectory.
fn q_terms(traj: &SigmaTrajectory, s: &Float, bits: u32) -> Result<(Float, Float)> {
    check_coverage(traj, s)?;
    let d = q_derivs(traj, s)?;
    let qs = Float::with_val(bits, &d.q / &d.s);
    Ok((qs, Float::with_val(bits, d.q_over_s_prime())))
}

/// γ_n/2ⁿ split as prefactor·(1 + correction).
#[derive(Debug, Clone)]
pub struct LeadingPrediction {
    /// 1/(√π D_t(∞))
    pub prefactor: Float,
    /// 2√2(α/2 + q/s)√(t-1)
    pub correction: Float,
    pub value: Float,
}

pub fn leading_coeff_parts(
    spec: &WeightSpec,
    v0: &Float,
    point: &ScalingPoint,
    traj: &SigmaTrajectory,
    ctx: &PrecisionContext,
) -> Result<LeadingPrediction> {
    let b = ctx.bits();
    let log_d = log_szego_closed(&spec.alpha, &spec.kappa(), v0, &point.t);
    let prefactor = Float::with_val(b, (-log_d).exp() / pi(b).sqrt());
    let (qs, _) = q_terms(traj, &point.s, b)?;
    let rt = point.t_minus_one().sqrt();
    let mut correction = Float::with_val(b, &spec.alpha / 2u32) + qs;
    correction *= rt;
    correction *= Float::with_val(b, 8u32).sqrt();
    let value = Float::with_val(b, &correction + 1u32) * &prefactor;
    Ok(LeadingPrediction {
        prefactor,
        correction,
        value,
    })
}

/// γ_n/2ⁿ ≈ (1 + 2√2(α/2 + q/s)√(t-1))/(√π D_t(∞)); the O(n⁻²) constant term is omitted.
pub fn leading_coeff_prediction(
    spec: &WeightSpec,
    point: &ScalingPoint,
    traj: &SigmaTrajectory,
    ctx: &PrecisionContext,
) -> Result<Float> {
    let v = fourier_log_h(spec, Some(0), ctx)?;
    Ok(leading_coeff_parts(spec, v.v0(), point, traj, ctx)?.value)
}

/// b²_{n-1} ≈ 1/4 - 8(q/s)'(s)(t-1).
pub fn recurrence_prediction(spec: &WeightSpec, point: &ScalingPoint, traj: &SigmaTrajectory) -> Result<Float> {
    let b = spec.bits();
    let (_, dqs) = q_terms(traj, &point.s, b)?;
    let mut r = dqs * point.t_minus_one() * 8u32;
    r = Float::with_val(b, 0.25) - r;
    Ok(r)
}
