//! The (y, b, v = su) system and its link to σ_JM.
//!
//! With B = b/y = v + (b - α)y - β + 1/2 the flow in x = ln s reads
//! dy/dx = -sy/2 + B(y² - 1)² - α(y² - 1)y - (β - 1/2)(y² - 1),
//! dv/dx = (s/2)(B + (b - α)y), db/dx = v(B + (b - α)y),
//! which avoids dividing by y. σ = (b - α/2)s - v².

use rug::Float;

use super::params::PIIIParams;
use super::rk::{self, RkStep, System, Tableau};
use super::series::SmallSeries;
use super::sigma::{q_derivs, QDerivs, SigmaPoint, SigmaTrajectory};
use crate::error::{Error, Result};
use crate::highprec::PrecisionContext;

#[derive(Debug, Clone)]
pub struct LaxState {
    pub s: Float,
    pub y: Float,
    pub b: Float,
    /// v = s u
    pub v: Float,
}

impl LaxState {
    /// σ = (b - α/2)s - v².
    pub fn sigma(&self, alpha: &Float) -> Float {
        let bits = self.y.prec();
        let mut r = Float::with_val(bits, &self.b - Float::with_val(bits, alpha / 2u32)) * &self.s;
        r -= Float::with_val(bits, self.v.square_ref());
        r
    }

    /// b - y(v + (b - α)y - β + 1/2), zero on the constraint surface.
    pub fn constraint(&self, p: &PIIIParams) -> Float {
        let bits = self.y.prec();
        let bb = big_b(p, &self.y, &self.b, &self.v, bits);
        Float::with_val(bits, &self.b - Float::with_val(bits, &self.y * &bb))
    }
}

fn big_b(p: &PIIIParams, y: &Float, b: &Float, v: &Float, bits: u32) -> Float {
    let mut r = Float::with_val(bits, b - &p.alpha) * y;
    r += v;
    r -= &p.beta;
    r += 0.5f64;
    r
}

/// Quantities of the Lax route obtained from σ_JM at τ = s²/16.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub s: Float,
    pub q: Float,
    pub u: Float,
    pub du: Float,
    pub v: Float,
    pub dv: Float,
    /// σ = q + su
    pub sigma: Float,
    pub b: Float,
}

pub fn transform(p: &PIIIParams, qd: &QDerivs) -> Result<Transformed> {
    let (u, du) = qd.u(&p.beta)?;
    let bits = u.prec();
    let s = Float::with_val(bits, &qd.s);
    let v = Float::with_val(bits, &s * &u);
    let dv = Float::with_val(bits, &s * &du) + &u;
    let sigma = Float::with_val(bits, &qd.q + &v);
    let mut b = Float::with_val(bits, &qd.q1 + &dv);
    b += Float::with_val(bits, &p.alpha / 2u32);
    Ok(Transformed {
        s,
        q: qd.q.clone(),
        u,
        du,
        v,
        dv,
        sigma,
        b,
    })
}

/// Transformation route evaluated on a σ_JM trajectory.
pub fn transform_at(traj: &SigmaTrajectory, s: &Float) -> Result<Transformed> {
    let qd = q_derivs(traj, s)?;
    let p = traj.params().at_bits(qd.q.prec())?;
    transform(&p, &qd)
}

/// The root of (b - α)y² + (v - β + 1/2)y - b = 0 that also fits v' = (b/y + (b - α)y)/2.
fn y_root(p: &PIIIParams, t: &Transformed) -> Result<Float> {
    let bits = t.b.prec();
    let a2 = Float::with_val(bits, &t.b - &p.alpha);
    let a1 = Float::with_val(bits, &t.v - &p.beta) + 0.5f64;
    let a0 = Float::with_val(bits, -&t.b);
    let cands: Vec<Float> = if a2.is_zero() {
        vec![Float::with_val(bits, &t.b / &a1)]
    } else {
        let disc = Float::with_val(bits, a1.square_ref()) - Float::with_val(bits, &a2 * &a0) * 4u32;
        if disc < 0 {
            return Err(Error::InternalConsistency(format!(
                "no real y at s = {}: negative discriminant",
                t.s.to_f64()
            )));
        }
        let r = disc.sqrt();
        let den = Float::with_val(bits, &a2 * 2u32);
        vec![
            Float::with_val(bits, &r - &a1) / &den,
            Float::with_val(bits, -(Float::with_val(bits, &a1 + &r))) / &den,
        ]
    };
    let fit = |y: &Float| {
        if y.is_zero() {
            return Float::with_val(bits, rug::float::Special::Infinity);
        }
        let mut r = Float::with_val(bits, &t.b / y) + Float::with_val(bits, &a2 * y);
        r /= 2u32;
        (r - &t.dv).abs()
    };
    cands
        .into_iter()
        .min_by(|a, b| fit(a).partial_cmp(&fit(b)).unwrap())
        .ok_or_else(|| Error::InternalConsistency("no y root".into()))
}

fn state_from(p: &PIIIParams, t: &Transformed) -> Result<LaxState> {
    let y = y_root(p, t)?;
    Ok(LaxState {
        s: t.s.clone(),
        y,
        b: t.b.clone(),
        v: t.v.clone(),
    })
}

/// Lax data at small s from the small-s expansion of σ_JM.
pub fn lax_seed_from_series(params: &PIIIParams, s: &Float, ctx: &PrecisionContext) -> Result<LaxState> {
    let bits = ctx.bits() + 64;
    let p = params.at_bits(bits)?;
    let ser = SmallSeries::new(&p, 32)?;
    let sb = Float::with_val(bits, s);
    let tau = Float::with_val(bits, sb.square_ref()) / 16u32;
    let v = ser.theta_values(&tau);
    let pt = SigmaPoint::from_theta(&tau, &[v.sigma, v.t1, v.t2, v.t3], bits);
    let qd = QDerivs::from_point(&p, &sb, &pt);
    let t = transform(&p, &qd)?;
    state_from(&p, &t)
}

/// Lax data at s from a σ_JM trajectory.
pub fn lax_seed_from_sigma(traj: &SigmaTrajectory, s: &Float) -> Result<LaxState> {
    let t = transform_at(traj, s)?;
    let p = traj.params().at_bits(t.b.prec())?;
    state_from(&p, &t)
}

/// Leading large-s data: y = ±(2β-1)/s, b = 4α(β-1/2)²/s², v = (β-1/2) + 4α(β-1/2)/s.
pub fn lax_seed_large_s(params: &PIIIParams, s: &Float, sign: i8, ctx: &PrecisionContext) -> LaxState {
    let bits = ctx.bits();
    let s = Float::with_val(bits, s);
    let g = Float::with_val(bits, &params.beta - 0.5f64);
    let y = Float::with_val(bits, &g * 2u32) / &s * i32::from(sign.signum());
    let b = Float::with_val(bits, g.square_ref()) * &params.alpha * 4u32 / Float::with_val(bits, s.square_ref());
    let v = Float::with_val(bits, &g * &params.alpha) * 4u32 / &s + &g;
    LaxState { s, y, b, v }
}

struct LaxSystem<'a> {
    p: &'a PIIIParams,
}

impl System for LaxSystem<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, x: &Float, st: &[Float]) -> Result<Vec<Float>> {
        let bits = st[0].prec();
        let s = Float::with_val(bits, x.exp_ref());
        let (y, v, b) = (&st[0], &st[1], &st[2]);
        let bb = big_b(self.p, y, b, v, bits);
        let bay = Float::with_val(bits, b - &self.p.alpha) * y;
        let e = Float::with_val(bits, &bb + &bay);
        let y2m = Float::with_val(bits, y.square_ref()) - 1u32;
        let mut dy = -Float::with_val(bits, &s * y) / 2u32;
        dy += Float::with_val(bits, y2m.square_ref()) * &bb;
        dy -= Float::with_val(bits, &y2m * y) * &self.p.alpha;
        dy -= Float::with_val(bits, &self.p.beta - 0.5f64) * &y2m;
        let dv = Float::with_val(bits, &s * &e) / 2u32;
        let db = Float::with_val(bits, v * &e);
        Ok(vec![dy, dv, db])
    }
}

/// Where y passed through one of 0, 1, -1.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub s: f64,
    pub level: i8,
}

#[derive(Debug, Clone)]
pub struct LaxTrajectory {
    params: PIIIParams,
    bits: u32,
    steps: Vec<RkStep>,
    x_end: Float,
    states: Vec<LaxState>,
    crossings: Vec<Crossing>,
    max_constraint: f64,
}

pub fn integrate_lax(
    params: &PIIIParams,
    seed: &LaxState,
    s_target: &Float,
    tol: f64,
    ctx: &PrecisionContext,
) -> Result<LaxTrajectory> {
    let bits = ctx.bits().max(seed.y.prec());
    let p = params.at_bits(bits)?;
    let c0 = seed.constraint(&p).to_f64().abs();
    if !(c0 <= tol) {
        return Err(Error::InvalidParameter(format!(
            "seed violates b = y(v + (b - alpha)y - beta + 1/2) by {c0:.3e}"
        )));
    }
    let x0 = Float::with_val(bits, seed.s.ln_ref());
    let x1 = Float::with_val(bits, s_target.ln_ref());
    let y0 = vec![
        Float::with_val(bits, &seed.y),
        Float::with_val(bits, &seed.v),
        Float::with_val(bits, &seed.b),
    ];
    let sys = LaxSystem { p: &p };
    let mut states = vec![LaxState {
        s: Float::with_val(bits, &seed.s),
        y: y0[0].clone(),
        b: y0[2].clone(),
        v: y0[1].clone(),
    }];
    let mut crossings = Vec::new();
    let mut max_constraint = c0;
    let levels: [(i8, f64); 3] = [(0, 0.0), (1, 1.0), (-1, -1.0)];
    let (steps, _) = rk::integrate(
        &sys,
        &x0,
        &y0,
        &x1,
        &Float::with_val(bits, tol * 1e-3),
        &Float::with_val(bits, 1e-3),
        &Float::with_val(bits, 1e-14),
        |x, st| {
            let s = Float::with_val(bits, x.exp_ref());
            let prev = &states[states.len() - 1].y;
            for (lvl, v) in levels {
                let a = Float::with_val(bits, prev - v);
                let b = Float::with_val(bits, &st[0] - v);
                if !a.is_zero() && (a.is_sign_positive() != b.is_sign_positive() || b.is_zero()) {
                    crossings.push(Crossing { s: s.to_f64(), level: lvl });
                }
            }
            let state = LaxState {
                s,
                y: st[0].clone(),
                b: st[2].clone(),
                v: st[1].clone(),
            };
            max_constraint = max_constraint.max(state.constraint(&p).to_f64().abs());
            states.push(state);
            Ok(())
        },
    )?;
    Ok(LaxTrajectory {
        params: p,
        bits,
        steps,
        x_end: x1,
        states,
        crossings,
        max_constraint,
    })
}

impl LaxTrajectory {
    pub fn states(&self) -> &[LaxState] {
        &self.states
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    /// Largest |b - yB| seen along the path.
    pub fn max_constraint(&self) -> f64 {
        self.max_constraint
    }

    pub fn state_at(&self, s: &Float) -> Result<LaxState> {
        let x = Float::with_val(self.bits, s.ln_ref());
        let forward = self.x_end >= self.steps.first().map(|st| st.x.clone()).unwrap_or_else(|| self.x_end.clone());
        let (lo, hi) = match (self.steps.first(), forward) {
            (Some(f), true) => (f.x.clone(), self.x_end.clone()),
            (Some(f), false) => (self.x_end.clone(), f.x.clone()),
            (None, _) => (self.x_end.clone(), self.x_end.clone()),
        };
        if x < lo || x > hi {
            return Err(Error::Range {
                what: "s",
                value: s.to_f64(),
                lo: lo.exp().to_f64(),
                hi: hi.exp().to_f64(),
            });
        }
        // the step whose start is the last one not past x
        let i = if forward {
            self.steps.partition_point(|st| st.x <= x).saturating_sub(1)
        } else {
            self.steps.partition_point(|st| st.x >= x).saturating_sub(1)
        };
        let st = &self.steps[i];
        let eps = Float::with_val(self.bits, &x - &st.x);
        let y = if eps.is_zero() {
            st.y.clone()
        } else {
            Tableau::new(self.bits).step(&LaxSystem { p: &self.params }, &st.x, &st.y, &eps)?.0
        };
        Ok(LaxState {
            s: Float::with_val(self.bits, s),
            y: y[0].clone(),
            b: y[2].clone(),
            v: y[1].clone(),
        })
    }

    pub fn sigma_at(&self, s: &Float) -> Result<Float> {
        Ok(self.state_at(s)?.sigma(&self.params.alpha))
    }

    /// Sign of s·y/(2β - 1) at the far end, the branch reached by continuation.
    pub fn large_s_sign(&self) -> Option<i8> {
        let last = self.states.last()?;
        let g = Float::with_val(self.bits, &self.params.beta * 2u32) - 1u32;
        if g.is_zero() {
            return None;
        }
        let r = Float::with_val(self.bits, &last.y * &last.s) / g;
        Some(if r > 0 { 1 } else { -1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piii::sigma::SigmaOptions;

    fn setup(a: f64, b: f64, digits: u32) -> (PIIIParams, PrecisionContext) {
        let ctx = PrecisionContext::from_digits(digits);
        let p = PIIIParams::new(&Float::with_val(ctx.bits(), a), &Float::with_val(ctx.bits(), b), ctx.bits()).unwrap();
        (p, ctx)
    }

    #[test]
    fn seed_lies_on_the_flow() {
        let (p, ctx) = setup(0.5, 0.25, 30);
        let b = ctx.bits() + 64;
        let s0 = Float::with_val(b, 0.01);
        let st = lax_seed_from_series(&p, &s0, &ctx).unwrap();
        assert!(st.constraint(&p).to_f64().abs() < 1e-30);
        assert!((st.y.to_f64() - 1.0).abs() < 0.01);
        // central difference in x of the seeded y, v, b against the vector field
        let h = Float::with_val(b, 1e-8);
        let sp = Float::with_val(b, &s0 * Float::with_val(b, h.exp_ref()));
        let sm = Float::with_val(b, &s0 / Float::with_val(b, h.exp_ref()));
        let a = lax_seed_from_series(&p, &sp, &ctx).unwrap();
        let c = lax_seed_from_series(&p, &sm, &ctx).unwrap();
        let pb = p.at_bits(b).unwrap();
        let f = LaxSystem { p: &pb }
            .rhs(&Float::with_val(b, s0.ln_ref()), &[st.y.clone(), st.v.clone(), st.b.clone()])
            .unwrap();
        for (k, (hi, lo)) in [(&a.y, &c.y), (&a.v, &c.v), (&a.b, &c.b)].into_iter().enumerate() {
            let fd = Float::with_val(b, hi - lo) / Float::with_val(b, &h * 2u32);
            let d = Float::with_val(b, &fd - &f[k]).abs().to_f64();
            assert!(d < 1e-12 * f[k].to_f64().abs().max(1e-3), "component {k}: {d:e}");
        }
    }

    #[test]
    fn routes_agree() {
        let (p, ctx) = setup(0.5, 0.25, 30);
        let tol = 1e-15;
        let seed = lax_seed_from_series(&p, &Float::with_val(ctx.bits(), 0.05), &ctx).unwrap();
        let lax = integrate_lax(&p, &seed, &Float::with_val(ctx.bits(), 5), tol, &ctx).unwrap();
        let traj = SigmaTrajectory::solve(&p, 2.0, &SigmaOptions::default(), &ctx).unwrap();
        for s in [0.5, 1.0, 2.0, 5.0] {
            let x = Float::with_val(ctx.bits(), s);
            let a = lax.sigma_at(&x).unwrap();
            let b = transform_at(&traj, &x).unwrap().sigma;
            let d = Float::with_val(ctx.bits(), &a - &b).abs().to_f64();
            assert!(d < tol * 1e2, "s={s}: {d:e}");
        }
        assert!(lax.max_constraint() < 1e-15, "{}", lax.max_constraint());
    }

    #[test]
    fn reaches_large_s_branch() {
        let (p, ctx) = setup(0.5, 0.25, 30);
        let seed = lax_seed_from_series(&p, &Float::with_val(ctx.bits(), 0.05), &ctx).unwrap();
        let s1 = 40.0;
        let lax = integrate_lax(&p, &seed, &Float::with_val(ctx.bits(), s1), 1e-20, &ctx).unwrap();
        let sign = lax.large_s_sign().unwrap();
        // defects against the leading large-s data shrink like 1/s²
        let defect = |sv: f64| {
            let st = lax.state_at(&Float::with_val(ctx.bits(), sv)).unwrap();
            let far = lax_seed_large_s(&p, &st.s, sign, &ctx);
            [
                Float::with_val(ctx.bits(), &st.y - &far.y).abs().to_f64(),
                Float::with_val(ctx.bits(), &st.v - &far.v).abs().to_f64(),
                Float::with_val(ctx.bits(), &st.b - &far.b).abs().to_f64(),
            ]
        };
        let (d20, d40) = (defect(20.0), defect(s1));
        for k in 0..3 {
            assert!(d40[k] < 5.0 / (s1 * s1), "{k}: {:e}", d40[k]);
            assert!(d40[k] < d20[k] / 3.0, "{k}: {:e} vs {:e}", d40[k], d20[k]);
        }
        assert!(lax.crossings().iter().all(|c| c.level == 0));
    }
}
