//! σ_JM trajectories: seeds, integration in x = ln s, dense output and derived quantities.

use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::fit::least_squares;
use super::params::{PIIIParams, SmallSKind};
use super::rk::{self, System, Tableau};
use super::series::{theta3, theta_residual, SmallSeries};
use super::taylor;
use crate::error::{Error, Result};
use crate::highprec::PrecisionContext;

/// Default upper limit for small-s seeding.
pub const S_SEED_MAX: f64 = 1e-3;
/// Default lower limit for the large-s expansion.
pub const S_FAR: f64 = 1e4;

/// Bits lost per unit of √s to the e^{2√s} mode.
const GROWTH_BITS: f64 = 2.0 / std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// high-order Taylor series in ln s
    #[default]
    Taylor,
    /// embedded Runge-Kutta-Fehlberg 7(8)
    Rk78,
}

#[derive(Debug, Clone)]
pub struct SigmaOptions {
    pub engine: Engine,
    /// residual tolerance; `None` means 10^(-digits/2)
    pub tol: Option<f64>,
    /// bits carried beyond the context precision
    pub guard_bits: u32,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self {
            engine: Engine::Taylor,
            tol: None,
            guard_bits: 64,
        }
    }
}

impl SigmaOptions {
    pub fn tol(&self, ctx: &PrecisionContext) -> f64 {
        self.tol.unwrap_or_else(|| 10f64.powf(-(ctx.target_digits() as f64) / 2.0))
    }

    pub fn rk78() -> Self {
        Self {
            engine: Engine::Rk78,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SigmaState {
    pub s: Float,
    pub sigma: Float,
    pub dsigma: Float,
    pub d2sigma: Float,
}

impl SigmaState {
    pub(crate) fn from_theta(s: &Float, sigma: &Float, t1: &Float, t2: &Float, bits: u32) -> Self {
        let s = Float::with_val(bits, s);
        let dsigma = Float::with_val(bits, t1 / &s);
        let d2sigma = Float::with_val(bits, t2 - t1) / Float::with_val(bits, s.square_ref());
        Self {
            sigma: Float::with_val(bits, sigma),
            s,
            dsigma,
            d2sigma,
        }
    }

    /// (σ, θσ, θ²σ) at `bits`.
    fn theta(&self, bits: u32) -> (Float, Float, Float) {
        let s = Float::with_val(bits, &self.s);
        let t1 = Float::with_val(bits, &s * &self.dsigma);
        let t2 = Float::with_val(bits, s.square_ref()) * &self.d2sigma + &t1;
        (Float::with_val(bits, &self.sigma), t1, t2)
    }

    pub fn at_bits(&self, bits: u32) -> Self {
        Self {
            s: Float::with_val(bits, &self.s),
            sigma: Float::with_val(bits, &self.sigma),
            dsigma: Float::with_val(bits, &self.dsigma),
            d2sigma: Float::with_val(bits, &self.d2sigma),
        }
    }
}

/// σ and three s-derivatives at one point.
#[derive(Debug, Clone)]
pub struct SigmaPoint {
    pub s: Float,
    pub sigma: Float,
    pub d1: Float,
    pub d2: Float,
    pub d3: Float,
}

impl SigmaPoint {
    pub(crate) fn from_theta(s: &Float, v: &[Float; 4], bits: u32) -> Self {
        let s = Float::with_val(bits, s);
        let s2 = Float::with_val(bits, s.square_ref());
        let s3 = Float::with_val(bits, &s2 * &s);
        let d1 = Float::with_val(bits, &v[1] / &s);
        let d2 = Float::with_val(bits, &v[2] - &v[1]) / &s2;
        let mut n3 = Float::with_val(bits, &v[3] - Float::with_val(bits, &v[2] * 3u32));
        n3 += Float::with_val(bits, &v[1] * 2u32);
        let d3 = n3 / s3;
        Self {
            sigma: Float::with_val(bits, &v[0]),
            s,
            d1,
            d2,
            d3,
        }
    }

    pub fn state(&self) -> SigmaState {
        SigmaState {
            s: self.s.clone(),
            sigma: self.sigma.clone(),
            dsigma: self.d1.clone(),
            d2sigma: self.d2.clone(),
        }
    }

    pub fn at_bits(&self, bits: u32) -> Self {
        Self {
            s: Float::with_val(bits, &self.s),
            sigma: Float::with_val(bits, &self.sigma),
            d1: Float::with_val(bits, &self.d1),
            d2: Float::with_val(bits, &self.d2),
            d3: Float::with_val(bits, &self.d3),
        }
    }
}

/// (sσ'')² + σ'(σ - sσ')(4σ' - 1) - c₂σ'² - c₁σ' - c₀.
pub fn sigma_form_residual(state: &SigmaState, params: &PIIIParams) -> Float {
    let bits = state.sigma.prec().max(params.bits());
    let s = Float::with_val(bits, &state.s);
    let d1 = Float::with_val(bits, &state.dsigma);
    let a = Float::with_val(bits, &s * &state.d2sigma);
    let mut r = Float::with_val(bits, a.square_ref());
    let m = Float::with_val(bits, &state.sigma - Float::with_val(bits, &s * &d1));
    let f = Float::with_val(bits, &d1 * 4u32) - 1u32;
    r += Float::with_val(bits, &d1 * &m) * f;
    r -= Float::with_val(bits, d1.square_ref()) * &params.c2;
    r -= Float::with_val(bits, &d1 * &params.c1);
    r -= &params.c0;
    r
}

#[derive(Debug, Clone)]
pub struct Seed {
    pub state: SigmaState,
    /// estimated size of the neglected terms in σ
    pub truncation: Float,
}

fn default_degree(bits: u32) -> usize {
    if bits <= 320 {
        24
    } else if bits <= 800 {
        32
    } else {
        40
    }
}

/// State at small s0 from the small-s expansion.
pub fn seed_small_s(params: &PIIIParams, s0: &Float, ctx: &PrecisionContext) -> Result<Seed> {
    if !(*s0 > 0) || *s0 > 1e-2 {
        return Err(Error::Range {
            what: "s0".into(),
            value: s0.to_f64(),
            lo: 0.0,
            hi: 1e-2,
        });
    }
    let bits = ctx.bits() + 32;
    let p = params.at_bits(bits)?;
    let ser = SmallSeries::new(&p, default_degree(bits))?;
    let s = Float::with_val(bits, s0);
    let v = ser.theta_values(&s);
    let out = ctx.bits();
    Ok(Seed {
        state: SigmaState::from_theta(&s, &v.sigma, &v.t1, &v.t2, out),
        truncation: Float::with_val(out, ser.tail_estimate(&s)),
    })
}

/// State at large s1 from s/4 - (α/2)√s + (α² + 2αβ)/4 - α(β² - 1/4)/(4√s).
pub fn seed_large_s(params: &PIIIParams, s1: &Float, ctx: &PrecisionContext) -> Result<Seed> {
    if !(*s1 > 0) {
        return Err(Error::Range {
            what: "s1".into(),
            value: s1.to_f64(),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let bits = ctx.bits();
    let s = Float::with_val(bits, s1);
    let a = Float::with_val(bits, &params.alpha);
    let rt = Float::with_val(bits, s.sqrt_ref());
    let d = Float::with_val(bits, params.beta.square_ref()) - 0.25f64;
    let e = Float::with_val(bits, &a * &d) / 4u32; // coefficient of -s^{-1/2}
    let mut sigma = Float::with_val(bits, &s / 4u32);
    sigma -= Float::with_val(bits, &a * &rt) / 2u32;
    sigma += Float::with_val(bits, params.large_s_constant());
    sigma -= Float::with_val(bits, &e / &rt);
    let s32 = Float::with_val(bits, &s * &rt);
    let s52 = Float::with_val(bits, &s32 * &s);
    let mut d1 = Float::with_val(bits, 0.25);
    d1 -= Float::with_val(bits, &a / &rt) / 4u32;
    d1 += Float::with_val(bits, &e / &s32) / 2u32;
    let mut d2 = Float::with_val(bits, &a / &s32) / 8u32;
    d2 -= Float::with_val(bits, &e / &s52) * 0.75f64;
    let scale = Float::with_val(bits, params.kappa.clone().abs() + 1u32).square();
    Ok(Seed {
        state: SigmaState {
            s: s.clone(),
            sigma,
            dsigma: d1,
            d2sigma: d2,
        },
        truncation: scale / s,
    })
}

#[derive(Debug, Clone)]
enum SegData {
    Taylor(Vec<Float>),
    /// σ, θσ, θ²σ, J at the segment start
    Rk(Vec<Float>),
}

#[derive(Debug, Clone)]
struct Segment {
    x0: Float,
    /// end point, exact rather than x0 + h
    x1: Float,
    h: Float,
    /// ∫σ dx accumulated up to x0
    j0: Float,
    data: SegData,
}

impl Segment {
    fn lo(&self) -> &Float {
        if self.h >= 0 {
            &self.x0
        } else {
            &self.x1
        }
    }

    fn hi(&self) -> &Float {
        if self.h >= 0 {
            &self.x1
        } else {
            &self.x0
        }
    }

    /// θ-values and accumulated integral at x.
    fn eval(&self, p: &PIIIParams, x: &Float) -> Result<([Float; 4], Float)> {
        match &self.data {
            SegData::Taylor(c) => {
                let bits = c[0].prec();
                let eps = Float::with_val(bits, x - &self.x0);
                let v = taylor::eval(c, &eps);
                let j = Float::with_val(bits, &self.j0 + taylor::integral(c, &eps));
                Ok((v, j))
            }
            SegData::Rk(y0) => {
                let bits = y0[0].prec();
                let eps = Float::with_val(bits, x - &self.x0);
                let sys = SigmaSystem { p };
                let y = if eps.is_zero() {
                    y0.clone()
                } else {
                    Tableau::new(bits).step(&sys, &Float::with_val(bits, &self.x0), y0, &eps)?.0
                };
                let s = Float::with_val(bits, x.exp_ref());
                let t3 = theta3(p, &s, &y[0], &y[1], &y[2])?;
                let j = Float::with_val(bits, &self.j0 + &y[3]);
                Ok(([y[0].clone(), y[1].clone(), y[2].clone(), t3], j))
            }
        }
    }
}

/// y = (σ, θσ, θ²σ, ∫σ dx) as a first-order system in x = ln s.
struct SigmaSystem<'a> {
    p: &'a PIIIParams,
}

impl System for SigmaSystem<'_> {
    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, x: &Float, y: &[Float]) -> Result<Vec<Float>> {
        let bits = y[0].prec();
        let s = Float::with_val(bits, x.exp_ref());
        let t3 = theta3(self.p, &s, &y[0], &y[1], &y[2])?;
        Ok(vec![y[1].clone(), y[2].clone(), t3, y[0].clone()])
    }
}

#[derive(Debug, Clone)]
pub struct SigmaTrajectory {
    params: PIIIParams,
    work: PIIIParams,
    out_bits: u32,
    tol: f64,
    engine: Engine,
    series: Option<SmallSeries>,
    /// series used for s ≤ series_max
    series_max: Float,
    s_lo: Float,
    s_hi: Float,
    segments: Vec<Segment>,
    samples: Vec<SigmaState>,
    residuals: Vec<f64>,
    /// the accumulated integral starts from s = 0
    anchored: bool,
    seed_truncation: f64,
}

struct RunOut {
    segments: Vec<Segment>,
    states: Vec<(Float, Float, Float, Float)>,
    residuals: Vec<f64>,
}

/// Bits needed at s when errors may grow like e^{2|√s_far - √s|}.
fn bits_at(base: u32, s: f64, s_far: f64) -> u32 {
    let g = (s_far.sqrt() - s.sqrt()).abs() * GROWTH_BITS;
    base + g.ceil() as u32 + 8
}

fn top_bits(base: u32, s_a: f64, s_b: f64) -> u32 {
    bits_at(base, s_a.min(s_b), s_a.max(s_b))
}

fn check_residual(res: &Float, tol: f64, s: &Float) -> Result<f64> {
    let r = res.to_f64().abs();
    if !(r <= tol) {
        return Err(Error::StepFloor { s: s.to_f64() });
    }
    Ok(r)
}

fn check_t1(prev: &Float, t1: &Float, s: &Float) -> Result<()> {
    if t1.is_zero() || (prev.is_sign_positive() != t1.is_sign_positive()) {
        return Err(Error::Singular {
            s: s.to_f64(),
            reason: "sigma' changes sign; continue on the Lax-system route".into(),
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_taylor(
    p: &PIIIParams,
    s_start: &Float,
    st: (Float, Float, Float),
    j_start: Float,
    s_end: &Float,
    base: u32,
    tol: f64,
) -> Result<RunOut> {
    let top = p.bits();
    let forward = s_end > s_start;
    let far = if forward { s_end.to_f64() } else { s_start.to_f64() };
    let x_end = Float::with_val(top, s_end.ln_ref());
    let mut x = Float::with_val(top, s_start.ln_ref());
    let mut s = Float::with_val(top, s_start);
    let (mut sigma, mut t1, mut t2) = st;
    let mut j = j_start;
    let mut out = RunOut {
        segments: Vec::new(),
        states: vec![(s.clone(), sigma.clone(), t1.clone(), t2.clone())],
        residuals: vec![theta_residual(p, &s, &sigma, &t1, &t2).to_f64().abs()],
    };
    loop {
        let rem = Float::with_val(top, &x_end - &x);
        if rem.is_zero() || (forward && rem < 0) || (!forward && rem > 0) {
            break;
        }
        let bits = bits_at(base, s.to_f64(), far).min(top);
        let sb = Float::with_val(bits, &s);
        sigma = Float::with_val(bits, &sigma);
        t1 = Float::with_val(bits, &t1);
        t2 = Float::with_val(bits, &t2);
        let order = ((bits as f64) * 0.35).ceil() as usize + 8;
        // near σ' = 0 the third-order form degenerates; use the second-order one there
        let d = Float::with_val(bits, &t2 - &t1);
        let coeffs = if Float::with_val(bits, t1.abs_ref()) >= Float::with_val(bits, d.abs_ref()) {
            taylor::expand(p, &sb, &sigma, &t1, &t2, order.max(24))?
        } else {
            taylor::expand_second(p, &sb, &sigma, &t1, &t2, order.max(24))?
        };
        let scale = Float::with_val(bits, sigma.abs_ref()).max(&Float::with_val(bits, t1.abs_ref()));
        let tol_step = scale * Float::with_val(bits, 2).pow(-(bits as i32));
        let mut h = taylor::step_size(&coeffs, &tol_step);
        let last = h >= Float::with_val(bits, rem.abs_ref());
        if last {
            h = Float::with_val(bits, &rem);
        } else if !forward {
            h = -h;
        }
        let step_floor = 1e-12;
        if Float::with_val(bits, h.abs_ref()) < step_floor {
            return Err(Error::StepFloor { s: s.to_f64() });
        }
        let v = taylor::eval(&coeffs, &h);
        let dj = taylor::integral(&coeffs, &h);
        let x_new = if last { x_end.clone() } else { Float::with_val(top, &x + &h) };
        let s_new = if last {
            Float::with_val(top, s_end)
        } else {
            Float::with_val(top, x_new.exp_ref())
        };
        let res = theta_residual(p, &s_new, &v[0], &v[1], &v[2]);
        let r = check_residual(&res, tol, &s_new)?;
        out.segments.push(Segment {
            x0: x.clone(),
            x1: x_new.clone(),
            h: Float::with_val(top, &h),
            j0: j.clone(),
            data: SegData::Taylor(coeffs),
        });
        j = Float::with_val(top, &j + &dj);
        let [a, b, c, _] = v;
        sigma = a;
        t1 = b;
        t2 = c;
        x = x_new;
        s = s_new;
        out.states.push((s.clone(), sigma.clone(), t1.clone(), t2.clone()));
        out.residuals.push(r);
    }
    Ok(out)
}

fn run_rk(p: &PIIIParams, s_start: &Float, st: (Float, Float, Float), j_start: Float, s_end: &Float, tol: f64) -> Result<RunOut> {
    let bits = p.bits();
    let x0 = Float::with_val(bits, s_start.ln_ref());
    let x1 = Float::with_val(bits, s_end.ln_ref());
    let y0 = vec![
        Float::with_val(bits, &st.0),
        Float::with_val(bits, &st.1),
        Float::with_val(bits, &st.2),
        Float::with_val(bits, 0),
    ];
    let sys = SigmaSystem { p };
    let mut states = vec![(Float::with_val(bits, s_start), st.0.clone(), st.1.clone(), st.2.clone())];
    let mut residuals = vec![theta_residual(p, s_start, &y0[0], &y0[1], &y0[2]).to_f64().abs()];
    let rk_tol = Float::with_val(bits, tol * 1e-3);
    let mut prev_t1 = y0[1].clone();
    let (steps, _) = rk::integrate(
        &sys,
        &x0,
        &y0,
        &x1,
        &rk_tol,
        &Float::with_val(bits, 1e-3),
        &Float::with_val(bits, 1e-12),
        |x, y| {
            let s = Float::with_val(bits, x.exp_ref());
            let res = theta_residual(p, &s, &y[0], &y[1], &y[2]);
            let r = check_residual(&res, tol, &s)?;
            check_t1(&prev_t1, &y[1], &s)?;
            prev_t1 = y[1].clone();
            states.push((s, y[0].clone(), y[1].clone(), y[2].clone()));
            residuals.push(r);
            Ok(())
        },
    )?;
    let ends: Vec<Float> = steps.iter().skip(1).map(|st| st.x.clone()).chain(std::iter::once(x1.clone())).collect();
    let segments = steps
        .into_iter()
        .zip(ends)
        .map(|(st, end)| {
            let j0 = Float::with_val(bits, &j_start);
            Segment {
                x0: st.x,
                x1: end,
                h: st.h,
                j0,
                data: SegData::Rk(st.y),
            }
        })
        .collect();
    Ok(RunOut {
        segments,
        states,
        residuals,
    })
}

impl SigmaTrajectory {
    /// Trajectory from the small-s expansion out to `s_max`, with the integral anchored at s = 0.
    pub fn solve(params: &PIIIParams, s_max: f64, opts: &SigmaOptions, ctx: &PrecisionContext) -> Result<Self> {
        if !(s_max > 0.0) {
            return Err(Error::Range {
                what: "s_max".into(),
                value: s_max,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let out_bits = ctx.bits();
        let tol = opts.tol(ctx);
        let base = out_bits + opts.guard_bits;
        let top = bits_at(base, 0.0, s_max);
        let work = params.at_bits(top)?;
        let params_out = params.at_bits(out_bits)?;
        if work.kind == SmallSKind::Linear {
            let ser = SmallSeries::new(&work, 1)?;
            let inf = Float::with_val(top, rug::float::Special::Infinity);
            return Ok(Self {
                params: params_out,
                work,
                out_bits,
                tol,
                engine: opts.engine,
                series: Some(ser),
                series_max: inf.clone(),
                s_lo: Float::with_val(top, 0),
                s_hi: inf,
                segments: Vec::new(),
                samples: Vec::new(),
                residuals: Vec::new(),
                anchored: true,
                seed_truncation: 0.0,
            });
        }
        let ser = SmallSeries::new(&work, default_degree(top))?;
        let rel = Float::with_val(top, 2).pow(-(top as i32));
        let mut s0 = ser.radius_for(&rel, S_SEED_MAX);
        let s_max_f = Float::with_val(top, s_max);
        if s0 > s_max_f {
            s0 = s_max_f.clone();
        }
        let v = ser.theta_values(&s0);
        let trunc = ser.tail_estimate(&s0).to_f64();
        let j0 = ser.integral(&s0);
        let run = match opts.engine {
            Engine::Taylor => run_taylor(&work, &s0, (v.sigma, v.t1, v.t2), j0, &s_max_f, base, tol)?,
            Engine::Rk78 => {
                let w = params.at_bits(base)?;
                run_rk(&w, &s0, (v.sigma, v.t1, v.t2), j0, &s_max_f, tol)?
            }
        };
        Ok(Self::assemble(params_out, work, out_bits, tol, opts.engine, Some((ser, s0)), run, true, trunc))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        params: PIIIParams,
        work: PIIIParams,
        out_bits: u32,
        tol: f64,
        engine: Engine,
        series: Option<(SmallSeries, Float)>,
        mut run: RunOut,
        anchored: bool,
        seed_truncation: f64,
    ) -> Self {
        let top = work.bits();
        let backward = run.states.len() > 1 && run.states[1].0 < run.states[0].0;
        if backward {
            run.segments.reverse();
            run.states.reverse();
            run.residuals.reverse();
        }
        let samples: Vec<SigmaState> = run
            .states
            .iter()
            .map(|(s, a, b, c)| SigmaState::from_theta(s, a, b, c, out_bits))
            .collect();
        let s_lo = Float::with_val(top, &run.states[0].0);
        let s_hi = Float::with_val(top, &run.states[run.states.len() - 1].0);
        let (series, series_max) = match series {
            Some((s, m)) => (Some(s), m),
            None => (None, Float::with_val(top, 0)),
        };
        Self {
            params,
            work,
            out_bits,
            tol,
            engine,
            series,
            series_max,
            s_lo,
            s_hi,
            segments: run.segments,
            samples,
            residuals: run.residuals,
            anchored,
            seed_truncation,
        }
    }

    pub fn params(&self) -> &PIIIParams {
        &self.params
    }

    pub fn samples(&self) -> &[SigmaState] {
        &self.samples
    }

    /// |σ-form residual| at each sample.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn seed_truncation(&self) -> f64 {
        self.seed_truncation
    }

    /// Highest working precision used.
    pub fn work_bits(&self) -> u32 {
        self.work.bits()
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    /// Range of s the trajectory can be evaluated on.
    pub fn range(&self) -> (f64, f64) {
        let lo = if self.series.is_some() { 0.0 } else { self.s_lo.to_f64() };
        (lo, self.s_hi.to_f64())
    }

    /// Where the small-s series hands over to the integrated segments.
    pub fn series_limit(&self) -> f64 {
        self.series_max.to_f64()
    }

    fn out_of_range(&self, s: &Float) -> Error {
        let (lo, hi) = self.range();
        Error::Range {
            what: "s".into(),
            value: s.to_f64(),
            lo,
            hi,
        }
    }

    fn locate(&self, x: &Float) -> Option<&Segment> {
        let i = self.segments.partition_point(|seg| seg.hi() < x);
        self.segments.get(i).filter(|seg| seg.lo() <= x)
    }

    /// θ-values and ∫_{·}^{s} σ/t dt at the data's native precision.
    fn raw(&self, s: &Float) -> Result<([Float; 4], Option<Float>)> {
        if !(*s > 0) {
            return Err(self.out_of_range(s));
        }
        if let Some(ser) = &self.series {
            if *s <= self.series_max {
                let v = ser.theta_values(&Float::with_val(ser.bits(), s));
                let j = ser.integral(&Float::with_val(ser.bits(), s));
                return Ok(([v.sigma, v.t1, v.t2, v.t3], Some(j)));
            }
        }
        if *s < self.s_lo || *s > self.s_hi {
            return Err(self.out_of_range(s));
        }
        let x = Float::with_val(self.work.bits(), s.ln_ref());
        let seg = self.locate(&x).ok_or_else(|| self.out_of_range(s))?;
        let (v, j) = seg.eval(&self.work, &x)?;
        Ok((v, self.anchored.then_some(j)))
    }

    /// σ and derivatives at the trajectory's internal precision (at least the output precision plus guard).
    pub fn point_full(&self, s: &Float) -> Result<SigmaPoint> {
        let (v, _) = self.raw(s)?;
        let bits = v[0].prec();
        Ok(SigmaPoint::from_theta(&Float::with_val(bits, s), &v, bits))
    }

    pub fn point(&self, s: &Float) -> Result<SigmaPoint> {
        Ok(self.point_full(s)?.at_bits(self.out_bits))
    }

    pub fn state(&self, s: &Float) -> Result<SigmaState> {
        Ok(self.point(s)?.state())
    }

    pub fn eval_f64(&self, s: f64) -> Result<f64> {
        Ok(self.point(&Float::with_val(self.out_bits, s))?.sigma.to_f64())
    }

    /// ∫_0^τ σ(t)/t dt.
    pub fn integral_to(&self, tau: &Float) -> Result<Float> {
        if tau.is_zero() {
            return Ok(Float::with_val(self.out_bits, 0));
        }
        let (_, j) = self.raw(tau)?;
        j.ok_or_else(|| Error::Unsupported("trajectory not seeded from s = 0; the integral has no anchor".into()))
    }

    /// ∫_0^S σ(s²/16)/s ds = (1/2)∫_0^{S²/16} σ(τ)/τ dτ.
    pub fn sigma_integral(&self, big_s: &Float) -> Result<Float> {
        let bits = self.work.bits();
        let tau = Float::with_val(bits, big_s.square_ref()) / 16u32;
        let j = self.integral_to(&tau)?;
        Ok(Float::with_val(self.out_bits, j / 2u32))
    }

    /// As `sigma_integral`, with the series used below `tau_switch` and the trajectory above.
    pub fn sigma_integral_switch(&self, big_s: &Float, tau_switch: &Float) -> Result<Float> {
        let bits = self.work.bits();
        let tau = Float::with_val(bits, big_s.square_ref()) / 16u32;
        let ser = self
            .series
            .as_ref()
            .ok_or_else(|| Error::Unsupported("no small-s series attached".into()))?;
        let sw = Float::with_val(bits, tau_switch).min(&tau);
        let low = ser.integral(&Float::with_val(ser.bits(), &sw));
        if sw == tau {
            return Ok(Float::with_val(self.out_bits, low / 2u32));
        }
        // the trajectory's own anchoring cancels in the difference
        let upper = self.integral_numeric(&tau)?;
        let lower = self.integral_numeric(&sw)?;
        Ok(Float::with_val(self.out_bits, (low + upper - lower) / 2u32))
    }

    /// Accumulated integral from the segments only (series region falls back to the series).
    fn integral_numeric(&self, tau: &Float) -> Result<Float> {
        if *tau < self.s_lo || self.segments.is_empty() {
            return self.integral_to(tau);
        }
        let x = Float::with_val(self.work.bits(), tau.ln_ref());
        let seg = self.locate(&x).ok_or_else(|| self.out_of_range(tau))?;
        Ok(seg.eval(&self.work, &x)?.1)
    }

    /// Samples at the requested points with their residuals.
    pub fn sample_at(&self, points: &[f64]) -> Result<Vec<(SigmaState, f64)>> {
        points
            .iter()
            .map(|&s| {
                let st = self.state(&Float::with_val(self.out_bits, s))?;
                let r = sigma_form_residual(&self.point_full(&Float::with_val(self.work.bits(), s))?.state(), &self.work);
                Ok((st, r.to_f64().abs()))
            })
            .collect()
    }
}

/// Integrate from an arbitrary seed towards `s_target` (either direction).
pub fn integrate_sigma(
    params: &PIIIParams,
    seed: &SigmaState,
    s_target: &Float,
    opts: &SigmaOptions,
    ctx: &PrecisionContext,
) -> Result<SigmaTrajectory> {
    let tol = opts.tol(ctx);
    let out_bits = ctx.bits();
    let base = out_bits.max(seed.sigma.prec()) + opts.guard_bits;
    let top = top_bits(base, seed.s.to_f64(), s_target.to_f64());
    let work = params.at_bits(top)?;
    let r0 = sigma_form_residual(seed, &work).to_f64().abs();
    if !(r0 <= tol) {
        return Err(Error::InvalidParameter(format!(
            "seed residual {r0:.3e} exceeds the tolerance {tol:.3e}"
        )));
    }
    if !(*s_target > 0) {
        return Err(Error::Range {
            what: "s_target".into(),
            value: s_target.to_f64(),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let st = seed.theta(top);
    let j = Float::with_val(top, 0);
    let run = match opts.engine {
        Engine::Taylor => run_taylor(&work, &seed.s, st, j, s_target, base, tol)?,
        Engine::Rk78 => run_rk(&work, &seed.s, st, j, s_target, tol)?,
    };
    Ok(SigmaTrajectory::assemble(
        params.at_bits(out_bits)?,
        work,
        out_bits,
        tol,
        opts.engine,
        None,
        run,
        false,
        0.0,
    ))
}

/// q and its first three derivatives at s, from σ_JM at τ = s²/16.
#[derive(Debug, Clone)]
pub struct QDerivs {
    pub s: Float,
    pub q: Float,
    pub q1: Float,
    pub q2: Float,
    pub q3: Float,
}

impl QDerivs {
    pub fn from_point(p: &PIIIParams, s: &Float, pt: &SigmaPoint) -> Self {
        let bits = pt.sigma.prec();
        let s = Float::with_val(bits, s);
        let s2 = Float::with_val(bits, s.square_ref());
        let tau = Float::with_val(bits, &s2 / 16u32);
        let mut q = Float::with_val(bits, &pt.sigma * 4u32) - &tau;
        q -= &p.c2;
        q += 0.25f64;
        let q1 = Float::with_val(bits, &s * &pt.d1) / 2u32 - Float::with_val(bits, &s / 8u32);
        let mut q2 = Float::with_val(bits, &pt.d1 / 2u32) + Float::with_val(bits, &s2 * &pt.d2) / 16u32;
        q2 -= 0.125f64;
        let s3 = Float::with_val(bits, &s2 * &s);
        let q3 = Float::with_val(bits, &s * &pt.d2) * 3u32 / 16u32 + Float::with_val(bits, &s3 * &pt.d3) / 128u32;
        Self { s, q, q1, q2, q3 }
    }

    /// (q/s)'.
    pub fn q_over_s_prime(&self) -> Float {
        let bits = self.q.prec();
        let n = Float::with_val(bits, &self.q1 * &self.s) - &self.q;
        n / Float::with_val(bits, self.s.square_ref())
    }

    /// u and u' from u = (β/4 - 1/8 - q'')/(2q' + s/4).
    pub fn u(&self, beta: &Float) -> Result<(Float, Float)> {
        let bits = self.q.prec();
        let num = Float::with_val(bits, beta / 4u32) - 0.125f64 - &self.q2;
        let den = Float::with_val(bits, &self.q1 * 2u32) + Float::with_val(bits, &self.s / 4u32);
        let tiny = Float::with_val(bits, 2).pow(-(bits as i32) / 2) * Float::with_val(bits, self.s.abs_ref());
        if Float::with_val(bits, den.abs_ref()) <= tiny {
            return Err(Error::Singular {
                s: self.s.to_f64(),
                reason: "2q' + s/4 vanishes".into(),
            });
        }
        let u = Float::with_val(bits, &num / &den);
        let dden = Float::with_val(bits, &self.q2 * 2u32) + 0.25f64;
        let mut du = -Float::with_val(bits, &self.q3 * &den);
        du -= Float::with_val(bits, &num * &dden);
        du /= Float::with_val(bits, den.square_ref());
        Ok((u, du))
    }
}

pub fn q_derivs(traj: &SigmaTrajectory, s: &Float) -> Result<QDerivs> {
    let bits = traj.work.bits();
    let tau = Float::with_val(bits, s.square_ref()) / 16u32;
    let pt = traj.point_full(&tau)?;
    let pb = pt.sigma.prec();
    let p = if pb == traj.work.bits() { traj.work.clone() } else { traj.work.at_bits(pb)? };
    Ok(QDerivs::from_point(&p, s, &pt))
}

/// q(s) and (q/s)'(s).
pub fn q_from_sigma(traj: &SigmaTrajectory, s: &Float) -> Result<(Float, Float)> {
    let d = q_derivs(traj, s)?;
    let b = traj.out_bits;
    Ok((Float::with_val(b, &d.q), Float::with_val(b, d.q_over_s_prime())))
}

/// u(s) and u'(s).
pub fn u_from_q(traj: &SigmaTrajectory, s: &Float) -> Result<(Float, Float)> {
    let d = q_derivs(traj, s)?;
    let (u, du) = d.u(&traj.work.beta)?;
    let b = traj.out_bits;
    Ok((Float::with_val(b, u), Float::with_val(b, du)))
}

/// Fitted against predicted boundary coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryCheck {
    pub c_pred: f64,
    pub c_fit: f64,
    pub sqrt_pred: Option<f64>,
    pub sqrt_fit: Option<f64>,
    pub const_pred: Option<f64>,
    pub const_fit: Option<f64>,
}

/// Exponents (relative to 1+κ) of the next few small-s corrections.
fn small_s_corrections(p: &PIIIParams, count: usize) -> Vec<f64> {
    let k = p.kappa.to_f64();
    let mut e = Vec::new();
    for j in 0..=5usize {
        for m in 0..=3usize {
            if j + m < 2 {
                continue;
            }
            if p.kind == SmallSKind::PowerSeries && m > 0 {
                continue;
            }
            let x = j as f64 + m as f64 * (1.0 + k) - (1.0 + k);
            if x > 1e-9 {
                e.push(x);
            }
        }
    }
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    e.truncate(count);
    e
}

pub fn boundary_check(traj: &SigmaTrajectory) -> Result<BoundaryCheck> {
    let bits = traj.out_bits + 64;
    let p = traj.work.at_bits(bits)?;
    let one_k = Float::with_val(bits, &p.kappa + 1u32);
    let a = p.linear_coeff();
    let ex = small_s_corrections(&p, 5);
    let (mut rows, mut rhs) = (Vec::new(), Vec::new());
    for i in 0..40 {
        let s = Float::with_val(bits, 10f64.powf(-3.0 + i as f64 / 39.0));
        let sig = Float::with_val(bits, &traj.point_full(&s)?.sigma);
        let base = Float::with_val(bits, &s / 4u32).pow(&one_k);
        rhs.push((sig - Float::with_val(bits, &a * &s)) / base);
        let mut r = vec![Float::with_val(bits, 1)];
        for e in &ex {
            r.push(Float::with_val(bits, s.clone().pow(*e)));
        }
        rows.push(r);
    }
    let c = least_squares(&rows, &rhs)?;
    let mut out = BoundaryCheck {
        c_pred: p.c_ab.to_f64(),
        c_fit: c[0].to_f64(),
        sqrt_pred: None,
        sqrt_fit: None,
        const_pred: None,
        const_fit: None,
    };
    if traj.range().1 >= 1e5 * (1.0 - 1e-12) {
        let (c_sqrt, c_const) = large_s_fit(traj, 1e4, 1e5, 4)?;
        out.sqrt_pred = Some(-p.alpha.to_f64() / 2.0);
        out.sqrt_fit = Some(c_sqrt);
        out.const_pred = Some(p.large_s_constant().to_f64());
        out.const_fit = Some(c_const);
    }
    Ok(out)
}

/// Fit σ - s/4 = A√s + B + Σ_{k=1..K} C_k s^{-k/2} on [lo, hi]; returns (A, B).
pub fn large_s_fit(traj: &SigmaTrajectory, lo: f64, hi: f64, k: usize) -> Result<(f64, f64)> {
    let bits = traj.out_bits + 64;
    let n = 12 * (k + 2);
    let (mut rows, mut rhs) = (Vec::new(), Vec::new());
    for i in 0..n {
        let s = Float::with_val(bits, lo * (hi / lo).powf(i as f64 / (n - 1) as f64));
        let sig = Float::with_val(bits, &traj.point_full(&s)?.sigma);
        rhs.push(sig - Float::with_val(bits, &s / 4u32));
        let rt = Float::with_val(bits, s.sqrt_ref());
        let mut r = vec![rt.clone(), Float::with_val(bits, 1)];
        let inv = Float::with_val(bits, 1) / &rt;
        let mut pw = inv.clone();
        for _ in 0..k {
            r.push(pw.clone());
            pw *= &inv;
        }
        rows.push(r);
    }
    let c = least_squares(&rows, &rhs)?;
    Ok((c[0].to_f64(), c[1].to_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(a: f64, b: f64, digits: u32) -> (PIIIParams, PrecisionContext) {
        let ctx = PrecisionContext::from_digits(digits);
        let p = PIIIParams::new(&Float::with_val(ctx.bits(), a), &Float::with_val(ctx.bits(), b), ctx.bits()).unwrap();
        (p, ctx)
    }

    #[test]
    fn residual_small_on_solution() {
        let (p, ctx) = setup(0.5, 0.25, 30);
        let tr = SigmaTrajectory::solve(&p, 20.0, &SigmaOptions::default(), &ctx).unwrap();
        assert!(tr.max_residual() < 1e-40, "{}", tr.max_residual());
        let st = tr.state(&Float::with_val(ctx.bits(), 1)).unwrap();
        assert!(sigma_form_residual(&st, &p).to_f64().abs() < 1e-25);
        let mut bad = st.clone();
        bad.sigma += 1e-3;
        let r = sigma_form_residual(&bad, &p).to_f64().abs();
        assert!(r > 1e-5 && r < 1e-2, "{r}");
    }

    #[test]
    fn taylor_and_rk_agree() {
        let (p, ctx) = setup(0.5, 0.25, 20);
        let t = SigmaTrajectory::solve(&p, 2.0, &SigmaOptions::default(), &ctx).unwrap();
        let opts = SigmaOptions {
            tol: Some(1e-22),
            ..SigmaOptions::rk78()
        };
        let r = SigmaTrajectory::solve(&p, 2.0, &opts, &ctx).unwrap();
        for s in [0.01, 0.3, 1.0, 2.0] {
            let x = Float::with_val(ctx.bits(), s);
            let a = t.point(&x).unwrap().sigma;
            let b = r.point(&x).unwrap().sigma;
            let d = Float::with_val(ctx.bits(), &a - &b).abs().to_f64();
            assert!(d < 1e-18, "s={s}: {a} vs {b}");
        }
        let i1 = t.sigma_integral(&Float::with_val(ctx.bits(), 4)).unwrap().to_f64();
        let i2 = r.sigma_integral(&Float::with_val(ctx.bits(), 4)).unwrap().to_f64();
        assert!((i1 - i2).abs() < 1e-15, "{i1} vs {i2}");
    }

    #[test]
    fn small_s_coefficient_recovered() {
        let (p, ctx) = setup(0.5, 0.25, 30);
        let tr = SigmaTrajectory::solve(&p, 0.02, &SigmaOptions::default(), &ctx).unwrap();
        let b = boundary_check(&tr).unwrap();
        assert!((b.c_fit / b.c_pred - 1.0).abs() < 1e-2, "{b:?}");
    }

    #[test]
    fn large_seed_formula() {
        let (p, ctx) = setup(1.0, 0.0, 20);
        let s = seed_large_s(&p, &Float::with_val(ctx.bits(), 1e4), &ctx).unwrap();
        assert!((s.state.sigma.to_f64() - (2500.0 - 50.0 + 0.25 + 0.000625)).abs() < 1e-9);
        assert!((s.state.dsigma.to_f64() - (0.25 - 1.0 / 400.0 - 0.25 / 8.0 * 1e-6)).abs() < 1e-12);
    }

    #[test]
    fn alpha_zero_is_linear() {
        let (p, ctx) = setup(0.0, 0.4, 20);
        let tr = SigmaTrajectory::solve(&p, 100.0, &SigmaOptions::default(), &ctx).unwrap();
        assert!((tr.eval_f64(37.0).unwrap() - 37.0 / 4.0).abs() < 1e-25);
        let i = tr.sigma_integral(&Float::with_val(ctx.bits(), 3)).unwrap().to_f64();
        assert!((i - 9.0 / 128.0).abs() < 1e-20);
    }

    #[test]
    fn q_identity() {
        let (p, ctx) = setup(0.5, 0.25, 30);
        let tr = SigmaTrajectory::solve(&p, 4.0, &SigmaOptions::default(), &ctx).unwrap();
        for s in [0.5, 2.0, 7.0] {
            let d = q_derivs(&tr, &Float::with_val(ctx.bits(), s)).unwrap();
            let (u, du) = d.u(&p.beta).unwrap();
            let lhs = d.q_over_s_prime();
            let rhs = Float::with_val(lhs.prec(), u.square_ref()) - du;
            assert!(Float::with_val(lhs.prec(), lhs - rhs).abs() < 1e-25, "s={s}");
        }
    }

    #[test]
    fn backward_run_retraces_forward() {
        let (p, ctx) = setup(0.5, 0.25, 30);
        let fwd = SigmaTrajectory::solve(&p, 40.0, &SigmaOptions::default(), &ctx).unwrap();
        let end = fwd.state(&Float::with_val(ctx.bits(), 40)).unwrap();
        let back = integrate_sigma(&p, &end, &Float::with_val(ctx.bits(), 10), &SigmaOptions::default(), &ctx).unwrap();
        for s in [10.0, 20.0, 35.0] {
            let a = fwd.eval_f64(s).unwrap();
            let b = back.eval_f64(s).unwrap();
            assert!((a - b).abs() < 1e-13 * a.abs(), "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn large_seed_matches_trajectory() {
        let (p, ctx) = setup(0.5, 0.25, 30);
        let tr = SigmaTrajectory::solve(&p, 1e4, &SigmaOptions::default(), &ctx).unwrap();
        let mut prev = f64::INFINITY;
        for s1 in [1e3, 1e4] {
            let x = Float::with_val(ctx.bits(), s1);
            let seed = seed_large_s(&p, &x, &ctx).unwrap();
            let d = Float::with_val(ctx.bits(), &seed.state.sigma - tr.point(&x).unwrap().sigma).abs().to_f64();
            assert!(d < seed.truncation.to_f64(), "s1={s1}: {d:e}");
            assert!(d < prev / 5.0);
            prev = d;
        }
    }

    #[test]
    fn integral_independent_of_switch() {
        let (p, ctx) = setup(0.5, 0.25, 30);
        let tr = SigmaTrajectory::solve(&p, 1.0, &SigmaOptions::default(), &ctx).unwrap();
        let big_s = Float::with_val(ctx.bits(), 4);
        let base = tr.sigma_integral(&big_s).unwrap();
        for sw in [1e-4, 1e-3, 1e-2] {
            let v = tr.sigma_integral_switch(&big_s, &Float::with_val(ctx.bits(), sw)).unwrap();
            let d = Float::with_val(ctx.bits(), &v - &base).abs().to_f64();
            assert!(d < tr.tol(), "switch {sw}: {d:e}");
        }
    }

    #[test]
    fn integral_matches_quadrature_in_s() {
        let (p, ctx) = setup(0.5, 0.25, 30);
        let tr = SigmaTrajectory::solve(&p, 1.0, &SigmaOptions::default(), &ctx).unwrap();
        // composite Simpson in s on [0, 4]; the integrand behaves like s near 0
        let n = 400;
        let h = 4.0 / n as f64;
        let f = |s: f64| if s == 0.0 { 0.0 } else { tr.eval_f64(s * s / 16.0).unwrap() / s };
        let mut acc = f(0.0) + f(4.0);
        for k in 1..n {
            acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        let simpson = acc * h / 3.0;
        let v = tr.sigma_integral(&Float::with_val(ctx.bits(), 4)).unwrap().to_f64();
        assert!((v - simpson).abs() < 1e-7, "{v} vs {simpson}");
    }
}
