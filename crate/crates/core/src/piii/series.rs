//! Small-s expansion σ_JM(s) = Σ a_{jm} s^{j + m(1+κ)}.
//!
//! Coefficients come from the θ = s d/ds form of the σ-equation,
//! G[σ] = (θ²σ - θσ)² + 4(θσ)²(σ - θσ) - sθσ(σ - θσ) - c₂(θσ)² - c₁sθσ - c₀s² = 0,
//! solved lattice point by lattice point. In the double case a_{jm} is fixed by the coefficient of
//! G at (j, m+1); in the pure power case by the coefficient at (j+2, 0).

use rug::{Assign, Float};

use super::params::{PIIIParams, SmallSKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SeriesTerm {
    pub j: usize,
    pub m: usize,
    pub exponent: Float,
    pub coeff: Float,
}

/// σ, θσ, θ²σ, θ³σ at one point.
#[derive(Debug, Clone)]
pub struct ThetaValues {
    pub s: Float,
    pub sigma: Float,
    pub t1: Float,
    pub t2: Float,
    pub t3: Float,
}

#[derive(Debug, Clone)]
pub struct SmallSeries {
    params: PIIIParams,
    degree: usize,
    terms: Vec<SeriesTerm>,
}

struct Lattice {
    dm: usize,
    a: Vec<Float>,
    e: Vec<Float>,
    t: Vec<Float>,
    u: Vec<Float>,
    w: Vec<Float>,
    tt: Vec<Float>,
    tt_done: Vec<bool>,
}

impl Lattice {
    fn new(dj: usize, dm: usize, kappa: &Float, bits: u32) -> Self {
        let n = (dj + 1) * (dm + 1);
        let mut e = Vec::with_capacity(n);
        for j in 0..=dj {
            for m in 0..=dm {
                let mut x = Float::with_val(bits, kappa + 1u32);
                x *= m as u32;
                x += j as u32;
                e.push(x);
            }
        }
        let z = Float::with_val(bits, 0);
        Self {
            dm,
            a: vec![z.clone(); n],
            e,
            t: vec![z.clone(); n],
            u: vec![z.clone(); n],
            w: vec![z.clone(); n],
            tt: vec![z; n],
            tt_done: vec![false; n],
        }
    }

    fn idx(&self, j: usize, m: usize) -> usize {
        j * (self.dm + 1) + m
    }

    fn set(&mut self, j: usize, m: usize, v: Float) {
        let i = self.idx(j, m);
        let bits = v.prec();
        let e = &self.e[i];
        self.t[i] = Float::with_val(bits, &v * e);
        let e2 = Float::with_val(bits, e.square_ref()) - e;
        self.u[i] = Float::with_val(bits, &v * &e2);
        let one_m = Float::with_val(bits, 1 - e.clone());
        self.w[i] = Float::with_val(bits, &v * &one_m);
        self.a[i] = v;
    }

    /// (T*T) at (j, m), from entries already in place.
    fn compute_tt(&mut self, j: usize, m: usize) {
        let bits = self.a[0].prec();
        let mut s = Float::with_val(bits, 0);
        let mut tmp = Float::with_val(bits, 0);
        for aj in 0..=j {
            for am in 0..=m {
                if (aj == 0 && am == 0) || (aj == j && am == m) {
                    continue;
                }
                tmp.assign(&self.t[self.idx(aj, am)] * &self.t[self.idx(j - aj, m - am)]);
                s += &tmp;
            }
        }
        let i = self.idx(j, m);
        self.tt[i] = s;
        self.tt_done[i] = true;
    }

    /// Coefficient of G at (pj, pm). The (T*T) cache must cover every point strictly below.
    fn g_at(&self, pj: usize, pm: usize, p: &PIIIParams) -> Float {
        let bits = self.a[0].prec();
        let mut uu = Float::with_val(bits, 0);
        let mut tt = Float::with_val(bits, 0);
        let mut trip = Float::with_val(bits, 0);
        let mut tw = Float::with_val(bits, 0);
        let mut tmp = Float::with_val(bits, 0);
        for aj in 0..=pj {
            for am in 0..=pm {
                if (aj == 0 && am == 0) || (aj == pj && am == pm) {
                    continue;
                }
                let ia = self.idx(aj, am);
                let ib = self.idx(pj - aj, pm - am);
                tmp.assign(&self.u[ia] * &self.u[ib]);
                uu += &tmp;
                tmp.assign(&self.t[ia] * &self.t[ib]);
                tt += &tmp;
                // ia plays Q for the triple product
                if aj + am >= 2 {
                    debug_assert!(self.tt_done[ia]);
                    tmp.assign(&self.tt[ia] * &self.w[ib]);
                    trip += &tmp;
                }
            }
        }
        if pj >= 1 {
            let qj = pj - 1;
            for aj in 0..=qj {
                for am in 0..=pm {
                    if (aj == 0 && am == 0) || (aj == qj && am == pm) {
                        continue;
                    }
                    tmp.assign(&self.t[self.idx(aj, am)] * &self.w[self.idx(qj - aj, pm - am)]);
                    tw += &tmp;
                }
            }
        }
        let mut g = uu;
        g += Float::with_val(bits, &trip * 4u32);
        g -= &tw;
        g -= Float::with_val(bits, &tt * &p.c2);
        if pj >= 1 && !(pj == 1 && pm == 0) {
            g -= Float::with_val(bits, &self.t[self.idx(pj - 1, pm)] * &p.c1);
        }
        if pj == 2 && pm == 0 {
            g -= &p.c0;
        }
        g
    }
}

impl SmallSeries {
    /// All terms with j + m ≤ `degree`.
    pub fn new(params: &PIIIParams, degree: usize) -> Result<Self> {
        params.require_small_s()?;
        let bits = params.bits();
        let mut terms = Vec::new();
        match params.kind {
            SmallSKind::Unsupported => unreachable!(),
            SmallSKind::Linear => {
                terms.push(SeriesTerm {
                    j: 1,
                    m: 0,
                    exponent: Float::with_val(bits, 1),
                    coeff: Float::with_val(bits, 0.25),
                });
            }
            SmallSKind::PowerSeries => terms = Self::power(params, degree.max(2))?,
            SmallSKind::Double => terms = Self::double(params, degree.max(2))?,
        }
        terms.sort_by(|x, y| x.exponent.partial_cmp(&y.exponent).unwrap());
        Ok(Self {
            params: params.clone(),
            degree,
            terms,
        })
    }

    fn double(p: &PIIIParams, deg: usize) -> Result<Vec<SeriesTerm>> {
        let bits = p.bits();
        let mut lat = Lattice::new(deg, deg + 1, &p.kappa, bits);
        lat.set(1, 0, p.linear_coeff());
        lat.set(0, 1, p.power_coeff());
        for d in 2..=deg {
            for j in 0..=d {
                lat.compute_tt(j, d - j);
            }
            for j in 0..=d {
                let m = d - j;
                let r0 = lat.g_at(j, m + 1, p);
                lat.set(j, m, Float::with_val(bits, 1));
                let r1 = lat.g_at(j, m + 1, p);
                let k = r1 - &r0;
                if k.is_zero() {
                    return Err(Error::Singular {
                        s: 0.0,
                        reason: format!("resonant lattice point ({j}, {m}) in the small-s series"),
                    });
                }
                lat.set(j, m, -r0 / k);
            }
        }
        let mut out = Vec::new();
        for j in 0..=deg {
            for m in 0..=(deg - j) {
                let i = lat.idx(j, m);
                if !lat.a[i].is_zero() {
                    out.push(SeriesTerm {
                        j,
                        m,
                        exponent: lat.e[i].clone(),
                        coeff: lat.a[i].clone(),
                    });
                }
            }
        }
        Ok(out)
    }

    fn power(p: &PIIIParams, deg: usize) -> Result<Vec<SeriesTerm>> {
        let bits = p.bits();
        let mut lat = Lattice::new(deg + 2, 0, &p.kappa, bits);
        lat.set(1, 0, p.linear_coeff());
        let refresh = |lat: &mut Lattice, upto: usize| {
            for j in 2..=upto {
                lat.compute_tt(j, 0);
            }
        };
        // a_{20} solves a quadratic read off the (4, 0) coefficient
        let mut g = Vec::new();
        for d in [0i32, 1, -1] {
            lat.set(2, 0, Float::with_val(bits, d));
            refresh(&mut lat, 3);
            g.push(lat.g_at(4, 0, p));
        }
        let qa = Float::with_val(bits, &g[1] + &g[2]) / 2u32 - &g[0];
        let qb = Float::with_val(bits, &g[1] - &g[2]) / 2u32;
        if qa.is_zero() {
            return Err(Error::Singular {
                s: 0.0,
                reason: "degenerate quadratic for the s^2 coefficient".into(),
            });
        }
        lat.set(2, 0, -qb / qa);
        for j in 3..=deg {
            lat.set(j, 0, Float::with_val(bits, 0));
            refresh(&mut lat, j + 1);
            let r0 = lat.g_at(j + 2, 0, p);
            lat.set(j, 0, Float::with_val(bits, 1));
            refresh(&mut lat, j + 1);
            let r1 = lat.g_at(j + 2, 0, p);
            let k = r1 - &r0;
            if k.is_zero() {
                return Err(Error::Singular {
                    s: 0.0,
                    reason: format!("resonant power s^{j} in the small-s series"),
                });
            }
            lat.set(j, 0, -r0 / k);
        }
        Ok((1..=deg)
            .filter_map(|j| {
                let i = lat.idx(j, 0);
                (!lat.a[i].is_zero()).then(|| SeriesTerm {
                    j,
                    m: 0,
                    exponent: lat.e[i].clone(),
                    coeff: lat.a[i].clone(),
                })
            })
            .collect())
    }

    pub fn params(&self) -> &PIIIParams {
        &self.params
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[SeriesTerm] {
        &self.terms
    }

    pub fn bits(&self) -> u32 {
        self.params.bits()
    }

    /// σ and its θ-derivatives at s > 0.
    pub fn theta_values(&self, s: &Float) -> ThetaValues {
        let bits = self.bits();
        let ln_s = Float::with_val(bits, s.ln_ref());
        let mut out = [
            Float::with_val(bits, 0),
            Float::with_val(bits, 0),
            Float::with_val(bits, 0),
            Float::with_val(bits, 0),
        ];
        for t in &self.terms {
            let mut v = Float::with_val(bits, &t.exponent * &ln_s);
            v.exp_mut();
            v *= &t.coeff;
            for slot in out.iter_mut() {
                *slot += &v;
                v *= &t.exponent;
            }
        }
        let [sigma, t1, t2, t3] = out;
        ThetaValues {
            s: Float::with_val(bits, s),
            sigma,
            t1,
            t2,
            t3,
        }
    }

    /// ∫_0^s σ(t)/t dt.
    pub fn integral(&self, s: &Float) -> Float {
        let bits = self.bits();
        let ln_s = Float::with_val(bits, s.ln_ref());
        let mut acc = Float::with_val(bits, 0);
        for t in &self.terms {
            let mut v = Float::with_val(bits, &t.exponent * &ln_s);
            v.exp_mut();
            v *= &t.coeff;
            v /= &t.exponent;
            acc += v;
        }
        acc
    }

    /// Σ |a| s^e over the outermost shell j + m = degree, a proxy for the truncation error.
    pub fn tail_estimate(&self, s: &Float) -> Float {
        let bits = self.bits();
        let ln_s = Float::with_val(bits, s.ln_ref());
        let mut acc = Float::with_val(bits, 0);
        let top = self.terms.iter().map(|t| t.j + t.m).max().unwrap_or(0);
        if self.params.kind == SmallSKind::Linear {
            return acc;
        }
        for t in self.terms.iter().filter(|t| t.j + t.m + 1 >= top) {
            let mut v = Float::with_val(bits, &t.exponent * &ln_s);
            v.exp_mut();
            v *= t.coeff.clone().abs();
            acc += v;
        }
        acc
    }

    /// Largest s (≤ `cap`) where the tail estimate stays below `rel` times |σ(s)|.
    pub fn radius_for(&self, rel: &Float, cap: f64) -> Float {
        let bits = self.bits();
        if self.params.kind == SmallSKind::Linear {
            return Float::with_val(bits, cap);
        }
        let ok = |s: &Float| {
            let tail = self.tail_estimate(s);
            let sig = self.theta_values(s).sigma.abs();
            tail <= Float::with_val(bits, rel * &sig)
        };
        let mut hi = Float::with_val(bits, cap);
        if ok(&hi) {
            return hi;
        }
        let mut lo = Float::with_val(bits, cap);
        let mut guard = 0;
        while !ok(&lo) {
            lo /= 16u32;
            guard += 1;
            if guard > 400 {
                return lo;
            }
        }
        // bisection in log space
        for _ in 0..40 {
            let mid = Float::with_val(bits, &lo * &hi).sqrt();
            if ok(&mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Value of the σ-form F at s computed from the truncated series.
    pub fn residual(&self, s: &Float) -> Float {
        let v = self.theta_values(s);
        theta_residual(&self.params, &v.s, &v.sigma, &v.t1, &v.t2)
    }
}

/// F = G/s² from θ-derivatives.
pub(crate) fn theta_residual(p: &PIIIParams, s: &Float, sigma: &Float, t1: &Float, t2: &Float) -> Float {
    let bits = sigma.prec();
    let d = Float::with_val(bits, t2 - t1);
    let mut g = Float::with_val(bits, d.square_ref());
    let sm = Float::with_val(bits, sigma - t1);
    let f = Float::with_val(bits, t1 * 4u32) - s;
    g += Float::with_val(bits, t1 * &sm) * f;
    g -= Float::with_val(bits, t1.square_ref()) * &p.c2;
    g -= Float::with_val(bits, s * t1) * &p.c1;
    g -= Float::with_val(bits, s.square_ref()) * &p.c0;
    g / Float::with_val(bits, s.square_ref())
}

/// θ³σ from σ, θσ, θ²σ via the third-order equation.
pub(crate) fn theta3(p: &PIIIParams, s: &Float, sigma: &Float, t1: &Float, t2: &Float) -> Result<Float> {
    if t1.is_zero() {
        return Err(Error::Singular {
            s: s.to_f64(),
            reason: "sigma' vanishes; the third-order form is singular here".into(),
        });
    }
    let bits = sigma.prec();
    let t1sq = Float::with_val(bits, t1.square_ref());
    let mut r = Float::with_val(bits, t2.square_ref());
    r += Float::with_val(bits, t1 * t2) * 2u32;
    r -= &t1sq;
    r += Float::with_val(bits, &t1sq * t1) * 8u32;
    let mut f = Float::with_val(bits, sigma * 4u32) + s;
    f -= &p.c2;
    r -= f * &t1sq;
    r -= Float::with_val(bits, s.square_ref()) * &p.c0;
    Ok(r / Float::with_val(bits, t1 * 2u32))
}

/// Exponents of the first few terms, e.g. for display.
pub fn leading_exponents(series: &SmallSeries, count: usize) -> Vec<f64> {
    series.terms.iter().take(count).map(|t| t.exponent.to_f64()).collect()
}
