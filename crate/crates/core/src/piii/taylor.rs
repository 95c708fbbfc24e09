//! Taylor-series stepping for σ in the variable x = ln s.
//!
//! With θ = d/dx the third-order form reads
//! 2T₁T₃ = T₂² + 2T₁T₂ - T₁² + 8T₁³ - (4σ + s - c₂)T₁² - c₀s², Tₖ = θᵏσ, s = e^x,
//! and the coefficients of σ(x₀ + ε) follow from Cauchy products.

use rug::{Assign, Float};

use super::params::PIIIParams;
use crate::error::{Error, Result};

/// Coefficients σ_0..=σ_order of σ(x₀ + ε) given σ, θσ, θ²σ at x₀ (where s = s0).
pub(crate) fn expand(
    p: &PIIIParams,
    s0: &Float,
    sigma: &Float,
    t1: &Float,
    t2: &Float,
    order: usize,
) -> Result<Vec<Float>> {
    let bits = sigma.prec();
    if t1.is_zero() {
        return Err(Error::Singular {
            s: s0.to_f64(),
            reason: "sigma' vanishes; the third-order form is singular here".into(),
        });
    }
    let order = order.max(4);
    let z = Float::with_val(bits, 0);
    let mut sg = Vec::with_capacity(order + 1);
    sg.push(Float::with_val(bits, sigma));
    sg.push(Float::with_val(bits, t1));
    sg.push(Float::with_val(bits, t2) / 2u32);

    let mut s_k = Vec::with_capacity(order);
    let mut s2_k = Vec::with_capacity(order);
    let mut a = Float::with_val(bits, s0);
    let mut b = Float::with_val(bits, s0.square_ref());
    for k in 0..order {
        if k > 0 {
            a /= k as u32;
            b *= 2u32;
            b /= k as u32;
        }
        s_k.push(a.clone());
        s2_k.push(b.clone());
    }

    let mut t1c: Vec<Float> = Vec::with_capacity(order);
    let mut t2c: Vec<Float> = Vec::with_capacity(order);
    let mut t3c: Vec<Float> = Vec::with_capacity(order);
    let mut p2: Vec<Float> = Vec::with_capacity(order);
    let two_t10 = Float::with_val(bits, t1 * 2u32);
    let mut tmp = z.clone();
    let mut acc = z.clone();

    for k in 0..=(order - 3) {
        t1c.push(Float::with_val(bits, &sg[k + 1] * (k as u32 + 1)));
        t2c.push(Float::with_val(bits, &sg[k + 2] * ((k as u32 + 1) * (k as u32 + 2))));

        // T₁² at k
        acc.assign(0);
        for i in 0..=k {
            tmp.assign(&t1c[i] * &t1c[k - i]);
            acc += &tmp;
        }
        p2.push(acc.clone());

        let mut rhs = z.clone();
        // T₂²
        acc.assign(0);
        for i in 0..=k {
            tmp.assign(&t2c[i] * &t2c[k - i]);
            acc += &tmp;
        }
        rhs += &acc;
        // 2T₁T₂
        acc.assign(0);
        for i in 0..=k {
            tmp.assign(&t1c[i] * &t2c[k - i]);
            acc += &tmp;
        }
        acc *= 2u32;
        rhs += &acc;
        // (c₂ - 1)T₁²
        tmp.assign(&p.c2 - 1u32);
        tmp *= &p2[k];
        rhs += &tmp;
        // 8T₁³
        acc.assign(0);
        for i in 0..=k {
            tmp.assign(&p2[i] * &t1c[k - i]);
            acc += &tmp;
        }
        acc *= 8u32;
        rhs += &acc;
        // -4σT₁²
        acc.assign(0);
        for i in 0..=k {
            tmp.assign(&sg[i] * &p2[k - i]);
            acc += &tmp;
        }
        acc *= 4u32;
        rhs -= &acc;
        // -sT₁²
        acc.assign(0);
        for i in 0..=k {
            tmp.assign(&s_k[i] * &p2[k - i]);
            acc += &tmp;
        }
        rhs -= &acc;
        // -c₀s²
        tmp.assign(&p.c0 * &s2_k[k]);
        rhs -= &tmp;
        // 2 Σ_{i≥1} T₁,ᵢ T₃,ₖ₋ᵢ
        acc.assign(0);
        for i in 1..=k {
            tmp.assign(&t1c[i] * &t3c[k - i]);
            acc += &tmp;
        }
        acc *= 2u32;
        rhs -= &acc;
        rhs /= &two_t10;
        let denom = (k as u32 + 1) * (k as u32 + 2) * (k as u32 + 3);
        sg.push(Float::with_val(bits, &rhs / denom));
        t3c.push(rhs);
    }
    Ok(sg)
}

/// As `expand`, from the σ-form solved for σ'': (θ²σ - θσ)² = P(σ, θσ, s), with the branch fixed
/// by the current θ²σ - θσ. Regular where σ' vanishes; singular where σ'' does.
pub(crate) fn expand_second(
    p: &PIIIParams,
    s0: &Float,
    sigma: &Float,
    t1: &Float,
    t2: &Float,
    order: usize,
) -> Result<Vec<Float>> {
    let bits = sigma.prec();
    let d0 = Float::with_val(bits, t2 - t1);
    if d0.is_zero() {
        return Err(Error::Singular {
            s: s0.to_f64(),
            reason: "sigma'' vanishes; the second-order form is singular here".into(),
        });
    }
    let order = order.max(4);
    let mut sg = Vec::with_capacity(order + 1);
    sg.push(Float::with_val(bits, sigma));
    sg.push(Float::with_val(bits, t1));
    sg.push(Float::with_val(bits, t2) / 2u32);

    let mut s_k = Vec::with_capacity(order);
    let mut s2_k = Vec::with_capacity(order);
    let mut a = Float::with_val(bits, s0);
    let mut b = Float::with_val(bits, s0.square_ref());
    for k in 0..order {
        if k > 0 {
            a /= k as u32;
            b *= 2u32;
            b /= k as u32;
        }
        s_k.push(a.clone());
        s2_k.push(b.clone());
    }

    let mut t1c: Vec<Float> = Vec::with_capacity(order);
    let mut p2: Vec<Float> = Vec::with_capacity(order);
    let mut st1: Vec<Float> = Vec::with_capacity(order);
    let mut dc: Vec<Float> = vec![d0.clone()];
    let two_d0 = Float::with_val(bits, &d0 * 2u32);
    let mut tmp = Float::with_val(bits, 0);
    let mut acc = Float::with_val(bits, 0);
    let conv = |x: &[Float], y: &[Float], k: usize, acc: &mut Float, tmp: &mut Float| {
        acc.assign(0);
        for i in 0..=k {
            tmp.assign(&x[i] * &y[k - i]);
            *acc += &*tmp;
        }
    };

    for k in 0..=(order - 2) {
        t1c.push(Float::with_val(bits, &sg[k + 1] * (k as u32 + 1)));
        conv(&t1c, &t1c, k, &mut acc, &mut tmp);
        p2.push(acc.clone());
        conv(&sg, &t1c, k, &mut acc, &mut tmp);
        st1.push(acc.clone());
        if k == 0 {
            continue;
        }
        // P = -4σT₁² + 4T₁³ + sσT₁ - sT₁² + c₂T₁² + c₁sT₁ + c₀s²
        let mut pk = Float::with_val(bits, 0);
        conv(&sg, &p2, k, &mut acc, &mut tmp);
        acc *= 4u32;
        pk -= &acc;
        conv(&p2, &t1c, k, &mut acc, &mut tmp);
        acc *= 4u32;
        pk += &acc;
        conv(&s_k, &st1, k, &mut acc, &mut tmp);
        pk += &acc;
        conv(&s_k, &p2, k, &mut acc, &mut tmp);
        pk -= &acc;
        tmp.assign(&p.c2 * &p2[k]);
        pk += &tmp;
        conv(&s_k, &t1c, k, &mut acc, &mut tmp);
        acc *= &p.c1;
        pk += &acc;
        tmp.assign(&p.c0 * &s2_k[k]);
        pk += &tmp;
        acc.assign(0);
        for i in 1..k {
            tmp.assign(&dc[i] * &dc[k - i]);
            acc += &tmp;
        }
        pk -= &acc;
        pk /= &two_d0;
        let denom = (k as u32 + 1) * (k as u32 + 2);
        let next = Float::with_val(bits, &t1c[k] + &pk) / denom;
        dc.push(pk);
        sg.push(next);
    }
    Ok(sg)
}

/// Step length for which the last two terms fall below `tol`.
pub(crate) fn step_size(coeffs: &[Float], tol: &Float) -> Float {
    let bits = tol.prec();
    let n = coeffs.len() - 1;
    let mut h = Float::with_val(bits, rug::float::Special::Infinity);
    for k in [n - 1, n] {
        let c = Float::with_val(bits, coeffs[k].abs_ref());
        if c.is_zero() {
            continue;
        }
        let r = Float::with_val(bits, tol / &c);
        let hk = Float::with_val(bits, r.ln() / k as u32).exp();
        if hk < h {
            h = hk;
        }
    }
    if h.is_infinite() {
        h = Float::with_val(bits, 1);
    }
    h * 0.9f64
}

/// σ, θσ, θ²σ, θ³σ at x₀ + ε.
pub(crate) fn eval(coeffs: &[Float], eps: &Float) -> [Float; 4] {
    let bits = coeffs[0].prec();
    let n = coeffs.len() - 1;
    let mut out = [
        Float::with_val(bits, 0),
        Float::with_val(bits, 0),
        Float::with_val(bits, 0),
        Float::with_val(bits, 0),
    ];
    for (d, slot) in out.iter_mut().enumerate() {
        let mut acc = Float::with_val(bits, 0);
        for k in (d..=n).rev() {
            acc *= eps;
            let mut f = 1u64;
            for i in 0..d {
                f *= (k - i) as u64;
            }
            acc += Float::with_val(bits, &coeffs[k] * f);
        }
        *slot = acc;
    }
    out
}

/// ∫_0^ε σ dx.
pub(crate) fn integral(coeffs: &[Float], eps: &Float) -> Float {
    let bits = coeffs[0].prec();
    let mut acc = Float::with_val(bits, 0);
    for k in (0..coeffs.len()).rev() {
        acc *= eps;
        acc += Float::with_val(bits, &coeffs[k] / (k as u32 + 1));
    }
    acc * eps
}
