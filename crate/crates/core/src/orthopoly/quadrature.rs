use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::highprec::{gamma, PrecisionContext};

/// Gauss rule for (1-x^2)^β on (-1, 1).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
    pub jacobi_exponent: Float,
}

pub fn gauss_jacobi_rule(beta: &Float, m: usize, ctx: &PrecisionContext) -> Result<QuadratureRule> {
    if !(*beta > -1) {
        return Err(Error::InvalidParameter(format!("beta = {} must exceed -1", beta.to_f64())));
    }
    let (nodes, weights) = jacobi_rule(beta, beta, m, ctx.bits())?;
    Ok(QuadratureRule {
        nodes,
        weights,
        jacobi_exponent: Float::with_val(ctx.bits(), beta),
    })
}

/// Gauss rule for (1-x)^a (1+x)^b by Golub-Welsch. Nodes ascending.
pub fn jacobi_rule(a: &Float, b: &Float, m: usize, bits: u32) -> Result<(Vec<Float>, Vec<Float>)> {
    if m == 0 {
        return Err(Error::InvalidParameter("rule needs at least one node".into()));
    }
    if !(*a > -1 && *b > -1) {
        return Err(Error::InvalidParameter("Jacobi exponents must exceed -1".into()));
    }
    let wb = bits + 32;
    let a = Float::with_val(wb, a);
    let b = Float::with_val(wb, b);
    let ab = Float::with_val(wb, &a + &b);

    let mut d = Vec::with_capacity(m);
    for k in 0..m {
        let v = if k == 0 {
            Float::with_val(wb, &b - &a) / (Float::with_val(wb, &ab + 2u32))
        } else {
            let t = Float::with_val(wb, &ab + (2 * k) as u32);
            let num = Float::with_val(wb, b.square_ref()) - Float::with_val(wb, a.square_ref());
            num / (Float::with_val(wb, &t + 2u32) * &t)
        };
        d.push(v);
    }
    let mut e = Vec::with_capacity(m);
    for k in 1..m {
        let v = if k == 1 {
            let t = Float::with_val(wb, &ab + 2u32);
            let num = Float::with_val(wb, &a + 1u32) * Float::with_val(wb, &b + 1u32) * 4u32;
            num / (Float::with_val(wb, t.square_ref()) * Float::with_val(wb, &ab + 3u32))
        } else {
            let kk = k as u32;
            let t = Float::with_val(wb, &ab + 2 * kk);
            let num = Float::with_val(wb, &a + kk)
                * Float::with_val(wb, &b + kk)
                * Float::with_val(wb, &ab + kk)
                * (4 * kk);
            let den = Float::with_val(wb, t.square_ref()) * Float::with_val(wb, &t + 1u32) * Float::with_val(wb, &t - 1u32);
            num / den
        };
        e.push(v.sqrt());
    }
    e.push(Float::with_val(wb, 0));

    let mu0 = {
        let two = Float::with_val(wb, 2).pow(&Float::with_val(wb, &ab + 1u32));
        let g = gamma(&Float::with_val(wb, &a + 1u32), wb)? * gamma(&Float::with_val(wb, &b + 1u32), wb)?;
        two * g / gamma(&Float::with_val(wb, &ab + 2u32), wb)?
    };

    let z = tridiagonal_ql(&mut d, &mut e, wb)?;
    let mut pairs: Vec<(Float, Float)> = d
        .into_iter()
        .zip(z)
        .map(|(x, z0)| {
            let w = Float::with_val(wb, z0.square_ref()) * &mu0;
            (Float::with_val(bits, x), Float::with_val(bits, w))
        })
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    if a == b {
        symmetrize(&mut pairs, bits);
    }
    Ok(pairs.into_iter().unzip())
}

fn symmetrize(p: &mut [(Float, Float)], bits: u32) {
    let m = p.len();
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = Float::with_val(bits, &p[j].0 - &p[i].0) / 2u32;
        let w = Float::with_val(bits, &p[j].1 + &p[i].1) / 2u32;
        p[i] = (-x.clone(), w.clone());
        p[j] = (x, w);
    }
    if m % 2 == 1 {
        p[m / 2].0 = Float::with_val(bits, 0);
    }
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix (diag `d`, off-diag `e`,
/// `e[m-1]` unused). Eigenvalues are left in `d`; returns the first component of each eigenvector.
fn tridiagonal_ql(d: &mut [Float], e: &mut [Float], bits: u32) -> Result<Vec<Float>> {
    let n = d.len();
    let mut z: Vec<Float> = (0..n).map(|i| Float::with_val(bits, if i == 0 { 1 } else { 0 })).collect();
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 2));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = Float::with_val(bits, d[m].abs_ref()) + Float::with_val(bits, d[m + 1].abs_ref());
                if Float::with_val(bits, e[m].abs_ref()) <= Float::with_val(bits, &eps * &dd) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::NonConvergence(format!(
                    "tridiagonal QL stalled at eigenvalue {l} of {n} (residual {:.3e})",
                    e[l].to_f64()
                )));
            }
            let mut g = Float::with_val(bits, &d[l + 1] - &d[l]) / Float::with_val(bits, &e[l] * 2u32);
            let mut r = Float::with_val(bits, g.hypot_ref(&Float::with_val(bits, 1)));
            let shift = if g >= 0 { Float::with_val(bits, &g + &r) } else { Float::with_val(bits, &g - &r) };
            g = Float::with_val(bits, &d[m] - &d[l]) + Float::with_val(bits, &e[l] / &shift);
            let mut s = Float::with_val(bits, 1);
            let mut c = Float::with_val(bits, 1);
            let mut p = Float::with_val(bits, 0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = Float::with_val(bits, &s * &e[i]);
                let b = Float::with_val(bits, &c * &e[i]);
                r = Float::with_val(bits, f.hypot_ref(&g));
                e[i + 1] = r.clone();
                if r.is_zero() {
                    d[i + 1] -= &p;
                    e[m] = Float::with_val(bits, 0);
                    deflated = true;
                    break;
                }
                s = Float::with_val(bits, &f / &r);
                c = Float::with_val(bits, &g / &r);
                g = Float::with_val(bits, &d[i + 1] - &p);
                r = Float::with_val(bits, &d[i] - &g) * &s + Float::with_val(bits, &c * &b) * 2u32;
                p = Float::with_val(bits, &s * &r);
                d[i + 1] = Float::with_val(bits, &g + &p);
                g = Float::with_val(bits, &c * &r) - &b;
                let fz = z[i + 1].clone();
                z[i + 1] = Float::with_val(bits, &s * &z[i]) + Float::with_val(bits, &c * &fz);
                z[i] = Float::with_val(bits, &c * &z[i]) - Float::with_val(bits, &s * &fz);
            }
            if deflated {
                continue;
            }
            d[l] -= &p;
            e[l] = g;
            e[m] = Float::with_val(bits, 0);
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highprec::pi;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 60).unwrap()
    }

    fn f(x: &Float) -> f64 {
        x.to_f64()
    }

    #[test]
    fn chebyshev_first_kind() {
        let c = ctx();
        let r = gauss_jacobi_rule(&c.float(-0.5), 5, &c).unwrap();
        let p = pi(256);
        for k in 1..=5u32 {
            let want = (Float::with_val(256, &p * (2 * k - 1)) / 10u32).cos();
            let got = &r.nodes[5 - k as usize];
            assert!(Float::with_val(256, got - &want).abs().to_f64() < 1e-70);
            let w = Float::with_val(256, &p / 5u32);
            assert!(Float::with_val(256, &r.weights[k as usize - 1] - &w).abs().to_f64() < 1e-70);
        }
    }

    #[test]
    fn legendre_three() {
        let c = ctx();
        let r = gauss_jacobi_rule(&c.float(0), 3, &c).unwrap();
        assert!((f(&r.nodes[2]) - 0.6f64.sqrt()).abs() < 1e-15);
        assert!(r.nodes[1].is_zero());
        assert!(Float::with_val(256, &r.weights[1] - Float::with_val(256, 8) / 9u32).abs().to_f64() < 1e-70);
        assert!(Float::with_val(256, &r.weights[0] - Float::with_val(256, 5) / 9u32).abs().to_f64() < 1e-70);
    }

    #[test]
    fn chebyshev_second_kind() {
        let c = ctx();
        let r = gauss_jacobi_rule(&c.float(0.5), 4, &c).unwrap();
        let p = pi(256);
        for k in 1..=4u32 {
            let th = Float::with_val(256, &p * k) / 5u32;
            let x = Float::with_val(256, th.cos_ref());
            let w = Float::with_val(256, th.sin_ref()).square() * &p / 5u32;
            let i = 4 - k as usize;
            assert!(Float::with_val(256, &r.nodes[i] - &x).abs().to_f64() < 1e-70);
            assert!(Float::with_val(256, &r.weights[i] - &w).abs().to_f64() < 1e-70);
        }
    }

    fn beta_moment(beta: &Float, j: u32, bits: u32) -> Float {
        // ∫ x^{2j} (1-x^2)^β dx = B(j+1/2, β+1)
        let a: Float = Float::with_val(bits, j) + 0.5;
        let b = Float::with_val(bits, beta + 1u32);
        let s = Float::with_val(bits, &a + &b);
        (Float::with_val(bits, a.ln_gamma_ref()) + Float::with_val(bits, b.ln_gamma_ref()) - s.ln_gamma()).exp()
    }

    #[test]
    fn exactness_against_beta_moments() {
        let c = ctx();
        for beta in [-0.75, 0.25, 1.5, 3.0] {
            let bf = c.float(beta);
            let r = gauss_jacobi_rule(&bf, 11, &c).unwrap();
            for j in 0..=10u32 {
                let mut q = Float::with_val(256, 0);
                for (x, w) in r.nodes.iter().zip(&r.weights) {
                    q += Float::with_val(256, x.pow(2 * j)) * w;
                }
                let want = beta_moment(&bf, j, 256);
                let rel = (q / &want - 1u32).abs().to_f64();
                assert!(rel < 1e-65, "beta={beta} j={j} rel={rel:e}");
            }
            assert!(r.weights.iter().all(|w| *w > 0));
            assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn asymmetric_rule_integrates_jacobi_weight() {
        // ∫_{-1}^1 (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)
        let (a, b) = (Float::with_val(256, 0.3), Float::with_val(256, -0.6));
        let (x, w) = jacobi_rule(&a, &b, 20, 256).unwrap();
        let s: Float = w.iter().fold(Float::with_val(256, 0), |acc, v| acc + v);
        let want = 2f64.powf(0.7) * libm_beta(1.3, 0.4);
        assert!((f(&s) - want).abs() < 1e-13);
        // first moment: ∫ x w = (b - a)/(a + b + 2) μ0
        let m1: Float = x.iter().zip(&w).fold(Float::with_val(256, 0), |acc, (x, w)| acc + Float::with_val(256, x * w));
        assert!((f(&m1) / f(&s) - (-0.9 / 1.7)).abs() < 1e-14);
    }

    fn libm_beta(a: f64, b: f64) -> f64 {
        let g = |x: f64| Float::with_val(128, x).gamma().to_f64();
        g(a) * g(b) / g(a + b)
    }
}
