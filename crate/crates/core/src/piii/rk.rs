//! Runge-Kutta-Fehlberg 7(8) with adaptive steps, in arbitrary precision.

use rug::Float;

use crate::error::{Error, Result};

const C: [(i64, i64); 13] = [
    (0, 1),
    (2, 27),
    (1, 9),
    (1, 6),
    (5, 12),
    (1, 2),
    (5, 6),
    (1, 6),
    (2, 3),
    (1, 3),
    (1, 1),
    (0, 1),
    (1, 1),
];

const A: [&[(i64, i64)]; 13] = [
    &[],
    &[(2, 27)],
    &[(1, 36), (1, 12)],
    &[(1, 24), (0, 1), (1, 8)],
    &[(5, 12), (0, 1), (-25, 16), (25, 16)],
    &[(1, 20), (0, 1), (0, 1), (1, 4), (1, 5)],
    &[(-25, 108), (0, 1), (0, 1), (125, 108), (-65, 27), (125, 54)],
    &[(31, 300), (0, 1), (0, 1), (0, 1), (61, 225), (-2, 9), (13, 900)],
    &[(2, 1), (0, 1), (0, 1), (-53, 6), (704, 45), (-107, 9), (67, 90), (3, 1)],
    &[(-91, 108), (0, 1), (0, 1), (23, 108), (-976, 135), (311, 54), (-19, 60), (17, 6), (-1, 12)],
    &[(2383, 4100), (0, 1), (0, 1), (-341, 164), (4496, 1025), (-301, 82), (2133, 4100), (45, 82), (45, 164), (18, 41)],
    &[(3, 205), (0, 1), (0, 1), (0, 1), (0, 1), (-6, 41), (-3, 205), (-3, 41), (3, 41), (6, 41), (0, 1)],
    &[(-1777, 4100), (0, 1), (0, 1), (-341, 164), (4496, 1025), (-289, 82), (2193, 4100), (51, 82), (33, 164), (12, 41), (0, 1), (1, 1)],
];

/// Eighth-order weights (the seventh-order solution differs only in stages 0, 10, 11, 12).
const B8: [(i64, i64); 13] = [
    (0, 1),
    (0, 1),
    (0, 1),
    (0, 1),
    (0, 1),
    (34, 105),
    (9, 35),
    (9, 35),
    (9, 280),
    (9, 280),
    (0, 1),
    (41, 840),
    (41, 840),
];

const B7: [(i64, i64); 13] = [
    (41, 840),
    (0, 1),
    (0, 1),
    (0, 1),
    (0, 1),
    (34, 105),
    (9, 35),
    (9, 35),
    (9, 280),
    (9, 280),
    (41, 840),
    (0, 1),
    (0, 1),
];

fn rat(bits: u32, (n, d): (i64, i64)) -> Float {
    Float::with_val(bits, n) / Float::with_val(bits, d)
}

/// Right-hand side y' = f(x, y).
pub trait System {
    fn dim(&self) -> usize;
    fn rhs(&self, x: &Float, y: &[Float]) -> Result<Vec<Float>>;
}

#[derive(Debug, Clone)]
pub struct Tableau {
    c: Vec<Float>,
    a: Vec<Vec<Float>>,
    b8: Vec<Float>,
    b7: Vec<Float>,
}

impl Tableau {
    pub fn new(bits: u32) -> Self {
        Self {
            c: C.iter().map(|&r| rat(bits, r)).collect(),
            a: A.iter().map(|row| row.iter().map(|&r| rat(bits, r)).collect()).collect(),
            b8: B8.iter().map(|&r| rat(bits, r)).collect(),
            b7: B7.iter().map(|&r| rat(bits, r)).collect(),
        }
    }

    /// One step; returns the eighth-order solution and the 7-vs-8 difference.
    pub fn step<S: System>(&self, sys: &S, x: &Float, y: &[Float], h: &Float) -> Result<(Vec<Float>, Vec<Float>)> {
        let bits = x.prec();
        let n = y.len();
        let mut k: Vec<Vec<Float>> = Vec::with_capacity(13);
        for i in 0..13 {
            let xi = Float::with_val(bits, &self.c[i] * h) + x;
            let mut yi: Vec<Float> = y.to_vec();
            for (j, aij) in self.a[i].iter().enumerate() {
                if aij.is_zero() {
                    continue;
                }
                let f = Float::with_val(bits, aij * h);
                for (yv, kv) in yi.iter_mut().zip(&k[j]) {
                    *yv += Float::with_val(bits, &f * kv);
                }
            }
            k.push(sys.rhs(&xi, &yi)?);
        }
        let mut y8 = y.to_vec();
        let mut err = vec![Float::with_val(bits, 0); n];
        for i in 0..13 {
            let w8 = Float::with_val(bits, &self.b8[i] * h);
            let dw = Float::with_val(bits, &self.b8[i] - &self.b7[i]) * h;
            for d in 0..n {
                if !self.b8[i].is_zero() {
                    y8[d] += Float::with_val(bits, &w8 * &k[i][d]);
                }
                if !dw.is_zero() {
                    err[d] += Float::with_val(bits, &dw * &k[i][d]);
                }
            }
        }
        Ok((y8, err))
    }
}

#[derive(Debug, Clone)]
pub struct RkStep {
    pub x: Float,
    pub y: Vec<Float>,
    pub h: Float,
}

/// Integrate from (x0, y0) to x1 with mixed absolute/relative tolerance `tol`.
/// Returns the accepted steps (state at the start of each step and its length) and the end state.
pub fn integrate<S: System>(
    sys: &S,
    x0: &Float,
    y0: &[Float],
    x1: &Float,
    tol: &Float,
    h0: &Float,
    h_min: &Float,
    mut observe: impl FnMut(&Float, &[Float]) -> Result<()>,
) -> Result<(Vec<RkStep>, Vec<Float>)> {
    let bits = x0.prec();
    let tab = Tableau::new(bits);
    let dir = if x1 >= x0 { 1 } else { -1 };
    let mut x = x0.clone();
    let mut y = y0.to_vec();
    let mut h: Float = Float::with_val(bits, h0.abs_ref()) * dir;
    let mut steps = Vec::new();
    let mut rejects = 0usize;
    loop {
        let rem = Float::with_val(bits, x1 - &x);
        if rem.is_zero() || (dir > 0 && rem <= 0) || (dir < 0 && rem >= 0) {
            break;
        }
        let last = Float::with_val(bits, h.abs_ref()) >= Float::with_val(bits, rem.abs_ref());
        if last {
            h = rem.clone();
        }
        let (yn, err) = tab.step(sys, &x, &y, &h)?;
        let mut norm = Float::with_val(bits, 0);
        for (e, yv) in err.iter().zip(&yn) {
            let sc = Float::with_val(bits, yv.abs_ref()) * tol + tol;
            let r = Float::with_val(bits, e.abs_ref()) / sc;
            if r > norm {
                norm = r;
            }
        }
        if !norm.is_finite() {
            return Err(Error::NonConvergence(format!("non-finite state near x = {}", x.to_f64())));
        }
        let fac = if norm.is_zero() {
            4.0
        } else {
            (0.9 * norm.to_f64().powf(-1.0 / 8.0)).clamp(0.1, 4.0)
        };
        if norm <= 1 {
            steps.push(RkStep {
                x: x.clone(),
                y: y.clone(),
                h: h.clone(),
            });
            x = if last { x1.clone() } else { Float::with_val(bits, &x + &h) };
            y = yn;
            observe(&x, &y)?;
            rejects = 0;
        } else {
            rejects += 1;
            if rejects > 50 {
                return Err(Error::StepFloor { s: x.to_f64() });
            }
        }
        h *= fac;
        if Float::with_val(bits, h.abs_ref()) < *h_min {
            return Err(Error::StepFloor { s: x.to_f64() });
        }
    }
    Ok((steps, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exp;
    impl System for Exp {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _x: &Float, y: &[Float]) -> Result<Vec<Float>> {
            Ok(vec![y[0].clone()])
        }
    }

    struct Poly(u32);
    impl System for Poly {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, x: &Float, _y: &[Float]) -> Result<Vec<Float>> {
            Ok(vec![Float::with_val(x.prec(), rug::ops::Pow::pow(x, self.0))])
        }
    }

    #[test]
    fn tableau_rows_sum_to_nodes() {
        let t = Tableau::new(128);
        for i in 0..13 {
            let s: Float = t.a[i].iter().fold(Float::with_val(128, 0), |acc, v| acc + v);
            assert!(Float::with_val(128, &s - &t.c[i]).abs() < 1e-35, "row {i}");
        }
        let s8: Float = t.b8.iter().fold(Float::with_val(128, 0), |acc, v| acc + v);
        let s7: Float = t.b7.iter().fold(Float::with_val(128, 0), |acc, v| acc + v);
        assert!((s8 - 1u32).abs() < 1e-35);
        assert!((s7 - 1u32).abs() < 1e-35);
    }

    #[test]
    fn quadrature_exactness() {
        // the eighth-order weights integrate x^k exactly for k ≤ 7
        let t = Tableau::new(128);
        for k in 0..=7u32 {
            let (y, _) = t
                .step(&Poly(k), &Float::with_val(128, 0), &[Float::with_val(128, 0)], &Float::with_val(128, 1))
                .unwrap();
            let want = Float::with_val(128, 1) / (k + 1);
            assert!(Float::with_val(128, &y[0] - want).abs() < 1e-35, "k={k}");
        }
    }

    #[test]
    fn global_order_is_eight() {
        let t = Tableau::new(128);
        let run = |n: u32| {
            let h = Float::with_val(128, 1) / n;
            let mut x = Float::with_val(128, 0);
            let mut y = vec![Float::with_val(128, 1)];
            for _ in 0..n {
                y = t.step(&Exp, &x, &y, &h).unwrap().0;
                x += &h;
            }
            (y[0].clone() - Float::with_val(128, 1).exp()).abs().to_f64()
        };
        let (e1, e2) = (run(4), run(8));
        let order = (e1 / e2).log2();
        assert!(order > 7.5 && order < 9.0, "observed order {order}");
    }

    #[test]
    fn adaptive_exp() {
        let b = 160;
        let (_, y) = integrate(
            &Exp,
            &Float::with_val(b, 0),
            &[Float::with_val(b, 1)],
            &Float::with_val(b, 3),
            &Float::with_val(b, 1e-30),
            &Float::with_val(b, 0.1),
            &Float::with_val(b, 1e-20),
            |_, _| Ok(()),
        )
        .unwrap();
        let want = Float::with_val(b, 3).exp();
        assert!(((y[0].clone() - &want) / want).abs() < 1e-27);
    }
}
