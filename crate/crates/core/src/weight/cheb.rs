use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Chebyshev series on [-1, 1].
#[derive(Debug, Clone)]
pub struct ChebSeries {
    coeffs: Vec<Float>,
    bits: u32,
}

const MAX_POINTS: usize = 4096;

impl ChebSeries {
    pub fn from_coeffs(coeffs: Vec<Float>, bits: u32) -> Self {
        let mut s = Self { coeffs, bits };
        s.trim_zeros();
        s
    }

    /// Interpolate `f` at Chebyshev-Lobatto points, doubling until the tail falls below `2^(8-bits)` relative.
    pub fn from_fn<F>(f: F, bits: u32) -> Result<Self>
    where
        F: Fn(&Float) -> Float,
    {
        let eps = Float::with_val(bits, Float::i_exp(1, 8 - bits as i32));
        let mut n = 16usize;
        loop {
            let c = interpolate(&f, n, bits);
            let scale = c.iter().map(|x| x.clone().abs()).fold(Float::with_val(bits, 0), |a, b| a.max(&b));
            let tail = c[3 * n / 4..]
                .iter()
                .map(|x| x.clone().abs())
                .fold(Float::with_val(bits, 0), |a, b| a.max(&b));
            if tail <= Float::with_val(bits, &eps * &scale) || scale == 0 {
                let mut s = Self { coeffs: c, bits };
                let cut = Float::with_val(bits, &eps * &scale) / 16u32;
                while s.coeffs.len() > 1 && s.coeffs.last().unwrap().clone().abs() <= cut {
                    s.coeffs.pop();
                }
                return Ok(s);
            }
            if n >= MAX_POINTS {
                return Err(Error::NonConvergence(format!(
                    "Chebyshev interpolation unresolved with {n} points (tail {:.3e})",
                    tail.to_f64()
                )));
            }
            n *= 2;
        }
    }

    fn trim_zeros(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(Float::with_val(self.bits, 0));
        }
    }

    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Zero the odd coefficients after checking they are negligible relative to `tol`.
    pub fn force_even(&mut self, tol: &Float) -> Result<()> {
        let scale = self.max_abs();
        for (k, c) in self.coeffs.iter_mut().enumerate() {
            if k % 2 == 1 {
                if c.clone().abs() > Float::with_val(self.bits, tol * &scale) {
                    return Err(Error::InvalidParameter(format!(
                        "h must be even: Chebyshev coefficient {k} = {:.3e}",
                        c.to_f64()
                    )));
                }
                *c = Float::with_val(self.bits, 0);
            }
        }
        self.trim_zeros();
        Ok(())
    }

    fn max_abs(&self) -> Float {
        self.coeffs
            .iter()
            .map(|x| x.clone().abs())
            .fold(Float::with_val(self.bits, 0), |a, b| a.max(&b))
    }

    /// Clenshaw evaluation; valid for any real x (a polynomial), no continuation check.
    pub fn eval(&self, x: &Float) -> Float {
        let bits = self.bits;
        let two_x = Float::with_val(bits, x * 2u32);
        let mut b1 = Float::with_val(bits, 0);
        let mut b2 = Float::with_val(bits, 0);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = Float::with_val(bits, &two_x * &b1) - &b2 + c;
            b2 = std::mem::replace(&mut b1, b0);
        }
        Float::with_val(bits, x * &b1) - &b2 + &self.coeffs[0]
    }

    /// Evaluate outside [-1, 1], failing when the neglected tail, amplified by T_k(x), exceeds `tol`.
    pub fn eval_continued(&self, x: &Float, tol: &Float) -> Result<Float> {
        let bits = self.bits;
        if x.clone().abs() <= 1 {
            return Ok(self.eval(x));
        }
        let ax = Float::with_val(bits, x.clone().abs());
        let phi = Float::with_val(bits, &ax + (Float::with_val(bits, ax.square_ref()) - 1u32).sqrt());
        let n = self.coeffs.len();
        let val = self.eval(x);
        // resolution floor of the interpolant, carried to order n
        let floor = Float::with_val(bits, Float::i_exp(1, 8 - bits as i32)) * self.max_abs();
        let mut est = Float::with_val(bits, &floor * Float::with_val(bits, (&phi).pow(n as u32)));
        for k in (3 * n / 4)..n {
            let t = Float::with_val(bits, (&phi).pow(k as u32)) * self.coeffs[k].clone().abs();
            est = est.max(&t);
        }
        let bound = Float::with_val(bits, tol * Float::with_val(bits, val.abs_ref()).max(&Float::with_val(bits, 1)));
        if est > bound {
            return Err(Error::Continuation(format!(
                "Chebyshev tail at x = {:.6} amplified to {:.3e}",
                x.to_f64(),
                est.to_f64()
            )));
        }
        Ok(val)
    }
}

fn interpolate<F: Fn(&Float) -> Float>(f: &F, n: usize, bits: u32) -> Vec<Float> {
    let pi = Float::with_val(bits, Constant::Pi);
    let cosines: Vec<Float> = (0..2 * n)
        .map(|m| (Float::with_val(bits, &pi * m as u32) / n as u32).cos())
        .collect();
    let vals: Vec<Float> = (0..=n).map(|j| f(&cosines[j])).collect();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut acc = Float::with_val(bits, 0);
        for (j, v) in vals.iter().enumerate() {
            let mut term = Float::with_val(bits, v * &cosines[(j * k) % (2 * n)]);
            if j == 0 || j == n {
                term /= 2u32;
            }
            acc += term;
        }
        acc *= 2u32;
        acc /= n as u32;
        if k == 0 || k == n {
            acc /= 2u32;
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_polynomial_exactly() {
        // x^4 = (3 T0 + 4 T2 + T4)/8
        let s = ChebSeries::from_fn(|x| Float::with_val(200, x.pow(4u32)), 200).unwrap();
        assert_eq!(s.degree(), 4);
        assert!((s.coeffs()[0].to_f64() - 0.375).abs() < 1e-50);
        assert!((s.coeffs()[2].to_f64() - 0.5).abs() < 1e-50);
        assert!((s.coeffs()[4].to_f64() - 0.125).abs() < 1e-50);
        let x = Float::with_val(200, 0.3);
        assert!((s.eval(&x).to_f64() - 0.0081).abs() < 1e-15);
    }

    #[test]
    fn entire_function_continues() {
        let s = ChebSeries::from_fn(|x| Float::with_val(200, x.square_ref()).exp(), 200).unwrap();
        let t = Float::with_val(200, 1.001);
        let tol = Float::with_val(200, 1e-40);
        let v = s.eval_continued(&t, &tol).unwrap();
        let want = Float::with_val(200, t.square_ref()).exp();
        assert!(Float::with_val(200, &v - &want).abs().to_f64() < 1e-45);
    }

    #[test]
    fn continuation_detects_divergence() {
        // 1/(1.2^2 - x^2) has poles at ±1.2
        let s = ChebSeries::from_fn(
            |x| Float::with_val(200, 1.44 - Float::with_val(200, x.square_ref())).recip(),
            200,
        )
        .unwrap();
        let tol = Float::with_val(200, 1e-30);
        assert!(s.eval_continued(&Float::with_val(200, 1.5), &tol).is_err());
        assert!(s.eval_continued(&Float::with_val(200, 1.000001), &tol).is_ok());
    }

    #[test]
    fn odd_rejected() {
        let mut s = ChebSeries::from_fn(|x| Float::with_val(100, x + 2u32), 100).unwrap();
        assert!(s.force_even(&Float::with_val(100, 1e-20)).is_err());
    }
}
