use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::highprec::{gamma, is_positive_integer, recip_gamma};

/// Which small-s structure σ_JM has for these parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallSKind {
    /// α = 0: σ_JM(s) = s/4 exactly
    Linear,
    /// α a positive integer: C(α, β) = 0 and σ_JM is a power series in s
    PowerSeries,
    /// generic: double series in s and s^{1+α+β}
    Double,
    /// logarithmic or pole case at s = 0; only the large-s side is available
    Unsupported,
}

#[derive(Debug, Clone)]
pub struct PIIIParams {
    pub alpha: Float,
    pub beta: Float,
    pub kappa: Float,
    pub c0: Float,
    pub c1: Float,
    pub c2: Float,
    /// C(α, β); zero when 1/Γ(1-α) vanishes, NaN when unsupported
    pub c_ab: Float,
    /// C₀(α, β) = C(α, β) (α+β) / (α 4^{1+α+β}), finite also at α = 0
    pub c0_ab: Float,
    pub kind: SmallSKind,
    /// why the small-s expansion is unavailable
    pub pole: Option<String>,
}

impl PIIIParams {
    pub fn new(alpha: &Float, beta: &Float, bits: u32) -> Result<Self> {
        let alpha = Float::with_val(bits, alpha);
        let beta = Float::with_val(bits, beta);
        let kappa = Float::with_val(bits, &alpha + &beta);
        if !(beta > -1) || !(kappa > -1) {
            return Err(Error::InvalidParameter(format!(
                "need beta > -1 and alpha + beta > -1 (alpha = {}, beta = {})",
                alpha.to_f64(),
                beta.to_f64()
            )));
        }
        let c0 = Float::with_val(bits, beta.square_ref()) / 16u32;
        let c1 = -Float::with_val(bits, &beta * &kappa) / 2u32;
        let c2 = Float::with_val(bits, kappa.square_ref());

        let mut pole = None;
        let kind = if alpha.is_zero() {
            SmallSKind::Linear
        } else if kappa.is_zero() {
            pole = Some("alpha + beta = 0 with alpha != 0: sigma_JM has a logarithmic term at s = 0".to_string());
            SmallSKind::Unsupported
        } else if is_positive_integer(&kappa) {
            pole = Some(format!(
                "alpha + beta = {} is a positive integer: Gamma(1 - alpha - beta) has a pole",
                kappa.to_f64()
            ));
            SmallSKind::Unsupported
        } else if is_positive_integer(&alpha) {
            SmallSKind::PowerSeries
        } else {
            SmallSKind::Double
        };

        let (c_ab, c0_ab) = if kind == SmallSKind::Unsupported {
            let nan = Float::with_val(bits, rug::float::Special::Nan);
            (nan.clone(), nan)
        } else if kind == SmallSKind::Linear {
            (Float::with_val(bits, 0), Self::c0_formula(&alpha, &beta, &kappa, bits)?)
        } else {
            let c0_ab = Self::c0_formula(&alpha, &beta, &kappa, bits)?;
            let four = Float::with_val(bits, 4).pow(Float::with_val(bits, &kappa + 1u32));
            let c = Float::with_val(bits, &c0_ab * &alpha) / &kappa * four;
            (c, c0_ab)
        };
        Ok(Self {
            alpha,
            beta,
            kappa,
            c0,
            c1,
            c2,
            c_ab,
            c0_ab,
            kind,
            pole,
        })
    }

    /// Error unless the small-s expansion exists.
    pub fn require_small_s(&self) -> Result<()> {
        match &self.pole {
            Some(msg) => Err(Error::Unsupported(msg.clone())),
            None => Ok(()),
        }
    }

    /// Γ(1-κ)Γ(β+1) / (4^{1+κ} Γ(1-α) Γ(κ+2) Γ(κ+1)).
    fn c0_formula(alpha: &Float, beta: &Float, kappa: &Float, bits: u32) -> Result<Float> {
        if kappa.is_zero() {
            return Ok(Float::with_val(bits, 0));
        }
        let g1 = gamma(&Float::with_val(bits, 1 - kappa.clone()), bits)?;
        let g2 = gamma(&Float::with_val(bits, beta + 1u32), bits)?;
        let r = recip_gamma(&Float::with_val(bits, 1 - alpha.clone()), bits);
        let g3 = gamma(&Float::with_val(bits, kappa + 2u32), bits)?;
        let g4 = gamma(&Float::with_val(bits, kappa + 1u32), bits)?;
        let four = Float::with_val(bits, 4).pow(Float::with_val(bits, kappa + 1u32));
        Ok(g1 * g2 * r / (g3 * g4 * four))
    }

    pub fn bits(&self) -> u32 {
        self.alpha.prec()
    }

    /// Same parameters at another precision.
    pub fn at_bits(&self, bits: u32) -> Result<Self> {
        Self::new(&self.alpha, &self.beta, bits)
    }

    /// Coefficient of s in σ_JM: β/(4(α+β)), or 1/4 when α = 0.
    pub fn linear_coeff(&self) -> Float {
        let b = self.bits();
        if self.kind == SmallSKind::Linear {
            return Float::with_val(b, 0.25);
        }
        Float::with_val(b, &self.beta / &self.kappa) / 4u32
    }

    /// Coefficient of s^{1+κ}: C(α, β) 4^{-(1+κ)}.
    pub fn power_coeff(&self) -> Float {
        let b = self.bits();
        let four = Float::with_val(b, 4).pow(Float::with_val(b, &self.kappa + 1u32));
        Float::with_val(b, &self.c_ab / four)
    }

    /// Constant term of the large-s expansion: (α² + 2αβ)/4.
    pub fn large_s_constant(&self) -> Float {
        let b = self.bits();
        let t = Float::with_val(b, &self.beta * 2u32) + &self.alpha;
        Float::with_val(b, &self.alpha * t) / 4u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> Result<PIIIParams> {
        PIIIParams::new(&Float::with_val(128, a), &Float::with_val(128, b), 128)
    }

    #[test]
    fn constants() {
        let q = p(0.5, 0.25).unwrap();
        assert!((q.c0.to_f64() - 0.25f64.powi(2) / 16.0).abs() < 1e-30);
        assert!((q.c1.to_f64() + 0.5 * 0.25 * 0.75).abs() < 1e-30);
        assert!((q.c2.to_f64() - 0.5625).abs() < 1e-30);
        assert_eq!(q.kind, SmallSKind::Double);
    }

    #[test]
    fn beta_zero_reduces_to_tracy_widom_constant() {
        for a in [0.5, 1.5, 2.25] {
            let q = p(a, 0.0).unwrap();
            let want = 1.0 / (Float::with_val(128, a + 1.0).gamma().to_f64() * Float::with_val(128, a + 2.0).gamma().to_f64());
            assert!((q.c_ab.to_f64() / want - 1.0).abs() < 1e-14, "a={a}");
        }
    }

    #[test]
    fn poles_and_special_cases() {
        assert!(matches!(p(0.5, 0.5).unwrap().require_small_s(), Err(Error::Unsupported(_))));
        assert!(matches!(p(0.5, -0.5).unwrap().require_small_s(), Err(Error::Unsupported(_))));
        assert!(p(1.0, 0.0).unwrap().pole.unwrap().contains("positive integer"));
        assert!(p(0.0, -1.0).is_err());
        let q = p(1.0, -0.5).unwrap();
        assert_eq!(q.kind, SmallSKind::PowerSeries);
        assert!(q.c_ab.is_zero());
        assert_eq!(p(0.0, 0.3).unwrap().kind, SmallSKind::Linear);
        assert_eq!(p(0.0, 0.0).unwrap().kind, SmallSKind::Linear);
    }
}
