//! Precision context and the special functions used by the asymptotic formulas.
//!
//! Everything is returned as a logarithm where overflow is possible.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};

use crate::error::{Error, Result};

/// Binary precision plus the number of decimal digits the caller trusts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    bits: u32,
    target_digits: u32,
}

fn required_bits(digits: u32) -> u32 {
    (3.33 * digits as f64).ceil() as u32 + 32
}

impl PrecisionContext {
    pub fn new(bits: u32, target_digits: u32) -> Result<Self> {
        if target_digits == 0 {
            return Err(Error::InvalidParameter("target_digits must be positive".into()));
        }
        let need = required_bits(target_digits).max(64);
        if bits < need {
            return Err(Error::InvalidParameter(format!(
                "{bits} bits cannot carry {target_digits} digits (need at least {need})"
            )));
        }
        Ok(Self { bits, target_digits })
    }

    /// Smallest admissible precision for `digits` decimal digits.
    pub fn from_digits(digits: u32) -> Self {
        let digits = digits.max(1);
        Self {
            bits: required_bits(digits).max(64),
            target_digits: digits,
        }
    }

    /// Largest digit count that `bits` supports.
    pub fn from_bits(bits: u32) -> Self {
        let bits = bits.max(64);
        let digits = (((bits - 32) as f64) / 3.33).floor().max(1.0) as u32;
        Self {
            bits,
            target_digits: digits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn target_digits(&self) -> u32 {
        self.target_digits
    }

    /// Same trusted digits, more working bits.
    pub fn with_extra_bits(&self, extra: u32) -> Self {
        Self {
            bits: self.bits + extra,
            target_digits: self.target_digits,
        }
    }

    pub fn float<T>(&self, v: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.bits, v)
    }

    /// 10^(-target_digits).
    pub fn tolerance(&self) -> Float {
        pow10(self.bits, -(self.target_digits as i32))
    }
}

pub fn pow10(bits: u32, e: i32) -> Float {
    Float::with_val(bits, 10).pow(e)
}

/// Scientific notation with `digits` significant digits.
pub fn to_decimal(v: &Float, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), v)
}

/// Inverse of `to_decimal` at `bits`.
pub fn from_decimal(s: &str, bits: u32) -> Result<Float> {
    Float::parse(s.trim())
        .map(|p| Float::with_val(bits, p))
        .map_err(|e| Error::InvalidParameter(format!("cannot parse '{s}' as a number: {e}")))
}

/// Serde adapter writing a Float as a decimal string at the digits its precision carries.
pub mod serde_decimal {
    use rug::Float;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Float, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_decimal(v, super::digits_for_bits(v.prec()).max(17)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Float, D::Error> {
        let s = String::deserialize(d)?;
        let digits = s.trim_start_matches('-').split(['e', 'E']).next().unwrap_or("").len() as u32;
        let bits = ((digits as f64 * 3.33).ceil() as u32 + 32).max(64);
        super::from_decimal(&s, bits).map_err(serde::de::Error::custom)
    }
}

/// Decimal digits that `bits` carries.
pub fn digits_for_bits(bits: u32) -> usize {
    ((bits.max(64) - 32) as f64 / 3.33).floor() as usize
}

pub fn pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi)
}

pub fn ln2(bits: u32) -> Float {
    Float::with_val(bits, Constant::Log2)
}

pub fn euler_gamma(ctx: &PrecisionContext) -> Float {
    Float::with_val(ctx.bits, Constant::Euler)
}

pub fn log_gamma(z: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !z.is_finite() || *z <= 0 {
        return Err(Error::Domain(format!("log_gamma needs z > 0, got {}", z.to_f64())));
    }
    Ok(Float::with_val(ctx.bits, z).ln_gamma())
}

/// Γ(z) for real z off the poles.
pub fn gamma(z: &Float, bits: u32) -> Result<Float> {
    if is_nonpositive_integer(z) {
        return Err(Error::Unsupported(format!("Gamma pole at {}", z.to_f64())));
    }
    Ok(Float::with_val(bits, z).gamma())
}

/// 1/Γ(z), zero at the poles.
pub fn recip_gamma(z: &Float, bits: u32) -> Float {
    if is_nonpositive_integer(z) {
        return Float::with_val(bits, 0);
    }
    Float::with_val(bits, z).gamma().recip()
}

pub fn is_nonpositive_integer(z: &Float) -> bool {
    z.is_integer() && *z <= 0
}

pub fn is_positive_integer(z: &Float) -> bool {
    z.is_integer() && *z > 0
}

/// Bernoulli numbers B_0..=B_n (B_1 = +1/2; only even indices are used).
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut a: Vec<Rational> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(Rational::from((1, m as u64 + 1)));
        for j in (1..=m).rev() {
            let d = Rational::from(&a[j - 1] - &a[j]);
            a[j - 1] = d * j as u64;
        }
        out.push(a[0].clone());
    }
    out
}

/// Hurwitz zeta ζ(p, N) = Σ_{k≥N} k^{-p} for integer p ≥ 2 and large N, by Euler-Maclaurin at N.
fn hurwitz_zeta(p: u32, n: u64, bits: u32, bern: &[Rational]) -> Float {
    let nf = Float::with_val(bits, n);
    let np = Float::with_val(bits, (&nf).pow(p));
    let mut sum = Float::with_val(bits, &nf / (p as f64 - 1.0)) / &np;
    sum += Float::with_val(bits, np.recip_ref()) / 2u32;
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    let inv_n2 = Float::with_val(bits, &nf * &nf).recip();
    // rising factorial (p)_{2i-1} / (2i)! times N^{-p-2i+1}
    let mut pow = Float::with_val(bits, np.recip_ref()) / &nf;
    let mut rising = Float::with_val(bits, p);
    let mut fact = Float::with_val(bits, 2);
    let mut i = 1usize;
    while 2 * i < bern.len() {
        let b = Float::with_val(bits, &bern[2 * i]);
        let term = Float::with_val(bits, &b * &rising) / &fact * &pow;
        sum += &term;
        if term.clone().abs() < Float::with_val(bits, &eps * &sum).abs() {
            break;
        }
        let q = (p as u64) + 2 * i as u64 - 1;
        rising *= q;
        rising *= q + 1;
        fact *= (2 * i + 1) as u64;
        fact *= (2 * i + 2) as u64;
        pow *= &inv_n2;
        i += 1;
    }
    sum
}

/// ln G(z) for z > 0 from the Weierstrass product of G(1+z),
/// summing K factors and adding the tail Σ_{j≥3} (-1)^{j+1} z^j ζ(j-1, K+1)/j.
pub fn log_barnes_g(z: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !z.is_finite() || *z <= 0 {
        return Err(Error::Domain(format!("log_barnes_g needs z > 0, got {}", z.to_f64())));
    }
    let bits = ctx.bits + 64;
    let k_max = 1000u64.max(10 * ctx.target_digits as u64);
    Ok(Float::with_val(ctx.bits, barnes_product(z, bits, k_max)))
}

pub(crate) fn barnes_product(z: &Float, bits: u32, k_max: u64) -> Float {
    let zp = Float::with_val(bits, z - 1u32);
    let zp2 = Float::with_val(bits, zp.square_ref());
    let gamma_e = Float::with_val(bits, Constant::Euler);
    let two_pi = pi(bits) * 2u32;

    let mut sum = Float::with_val(bits, 0);
    for k in 1..=k_max {
        let x = Float::with_val(bits, &zp / k);
        let mut term = x.ln_1p() * k;
        term -= &zp;
        term += Float::with_val(bits, &zp2 / (2 * k));
        sum += term;
    }

    let bern = bernoulli_numbers(80);
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    let mut tail = Float::with_val(bits, 0);
    let mut zj = Float::with_val(bits, &zp2 * &zp);
    for j in 3u32..20_000 {
        let zeta = hurwitz_zeta(j - 1, k_max + 1, bits, &bern);
        let mut term = Float::with_val(bits, &zj * &zeta) / j;
        if j % 2 == 0 {
            term = -term;
        }
        tail += &term;
        if term.abs() <= eps {
            break;
        }
        zj *= &zp;
    }

    let mut res = Float::with_val(bits, two_pi.ln()) * &zp / 2u32;
    let inner = Float::with_val(bits, &gamma_e + 1u32) * &zp2 + &zp;
    res -= inner / 2u32;
    res += sum;
    res += tail;
    res
}

/// ln n! as an exact-integer oracle.
pub fn ln_factorial(n: u32, bits: u32) -> Float {
    let f = Integer::from(Integer::factorial(n));
    Float::with_val(bits, &f).ln()
}
