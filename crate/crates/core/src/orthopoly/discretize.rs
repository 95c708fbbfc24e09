use rug::ops::Pow;
use rug::Float;

use super::quadrature::jacobi_rule;
use crate::error::Result;
use crate::weight::WeightSpec;

/// A discrete measure. When `symmetric`, `nodes` are the non-negative half and each weight is the
/// combined mass at ±x (a node at 0 carries its own mass once).
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
    pub symmetric: bool,
}

impl DiscreteMeasure {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Layout {
    /// one Gauss-Jacobi rule with the Jacobi factor absorbed
    Plain,
    /// geometrically graded panels toward x = 1 for t close to 1
    Graded,
}

pub(crate) fn layout(spec: &WeightSpec) -> Layout {
    let delta = Float::with_val(spec.bits(), &spec.t - 1u32);
    if spec.t == 1 || spec.alpha.is_zero() || delta >= 0.5 {
        Layout::Plain
    } else {
        Layout::Graded
    }
}

/// Starting size: total nodes for the plain rule, nodes per panel for the graded one.
pub(crate) fn initial_size(spec: &WeightSpec, n: usize) -> usize {
    match layout(spec) {
        Layout::Plain => 2 * n + 64,
        Layout::Graded => n + 32,
    }
}

pub(crate) fn max_size(spec: &WeightSpec) -> usize {
    match layout(spec) {
        Layout::Plain => 1 << 16,
        Layout::Graded => 1 << 12,
    }
}

/// Discretize the even weight with size parameter `m` (see `initial_size`).
pub fn even_measure(spec: &WeightSpec, m: usize) -> Result<DiscreteMeasure> {
    match layout(spec) {
        Layout::Plain => plain(spec, m),
        Layout::Graded => graded(spec, m),
    }
}

fn half_of_symmetric(nodes: Vec<Float>, weights: Vec<Float>) -> (Vec<Float>, Vec<Float>) {
    let mut hn = Vec::new();
    let mut hw = Vec::new();
    for (x, w) in nodes.into_iter().zip(weights) {
        if x.is_zero() {
            hn.push(x);
            hw.push(w);
        } else if x > 0 {
            hn.push(x);
            hw.push(w * 2u32);
        }
    }
    (hn, hw)
}

fn plain(spec: &WeightSpec, m: usize) -> Result<DiscreteMeasure> {
    let bits = spec.bits();
    let at_one = spec.t == 1;
    // at t = 1 the α factor joins the Jacobi part
    let expo = if at_one { spec.kappa() } else { spec.beta.clone() };
    let (x, w) = jacobi_rule(&expo, &expo, m, bits)?;
    let (x, w) = half_of_symmetric(x, w);
    let weights = x
        .iter()
        .zip(w)
        .map(|(x, w)| if at_one { w * spec.h.eval(x) } else { w * spec.outer_factor(x) })
        .collect();
    Ok(DiscreteMeasure {
        nodes: x,
        weights,
        symmetric: true,
    })
}

fn graded(spec: &WeightSpec, m: usize) -> Result<DiscreteMeasure> {
    let bits = spec.bits();
    let delta = Float::with_val(bits, &spec.t - 1u32);
    let zero = Float::with_val(bits, 0);
    let (lx, lw) = jacobi_rule(&zero, &zero, m, bits)?;
    let (ex, ew) = jacobi_rule(&spec.beta, &zero, m, bits)?;

    let mut nodes = Vec::new();
    let mut weights = Vec::new();

    // endpoint panel [1 - δ, 1] with (1 - x)^β absorbed
    let half_d = Float::with_val(bits, &delta / 2u32);
    let scale = Float::with_val(bits, (&half_d).pow(Float::with_val(bits, &spec.beta + 1u32)));
    for (u, wu) in ex.iter().zip(&ew) {
        let one_minus_x = Float::with_val(bits, 1 - u.clone()) * &half_d;
        let x = Float::with_val(bits, 1 - one_minus_x.clone());
        let one_plus = Float::with_val(bits, 2 - one_minus_x);
        let w = Float::with_val(bits, wu * &scale) * one_plus.pow(&spec.beta) * spec.outer_factor(&x);
        nodes.push(x);
        weights.push(w);
    }

    // panels [1 - 2^i δ, 1 - 2^{i-1} δ] down to about 1/2, then [0, last]
    let mut gap_r = delta.clone();
    loop {
        let gap_l = Float::with_val(bits, &gap_r * 2u32);
        let done = gap_l >= 0.5;
        let gap_l = if done { Float::with_val(bits, 1) } else { gap_l };
        legendre_panel(&lx, &lw, &gap_l, &gap_r, spec, &mut nodes, &mut weights);
        if done {
            break;
        }
        gap_r = gap_l;
    }
    // the half-line carries the mass of both halves
    for w in &mut weights {
        *w *= 2u32;
    }
    Ok(DiscreteMeasure {
        nodes,
        weights,
        symmetric: true,
    })
}

/// Panel [1 - gap_l, 1 - gap_r] for the full even weight; distances to 1 kept exact.
fn legendre_panel(
    lx: &[Float],
    lw: &[Float],
    gap_l: &Float,
    gap_r: &Float,
    spec: &WeightSpec,
    nodes: &mut Vec<Float>,
    weights: &mut Vec<Float>,
) {
    let bits = spec.bits();
    let half = Float::with_val(bits, gap_l - gap_r) / 2u32;
    for (u, wu) in lx.iter().zip(lw) {
        // 1 - x = gap_r + half (1 - u)
        let one_minus_x = Float::with_val(bits, 1 - u.clone()) * &half + gap_r;
        let x = Float::with_val(bits, 1 - one_minus_x.clone());
        let one_plus = Float::with_val(bits, 2 - one_minus_x.clone());
        let jac = Float::with_val(bits, &one_minus_x * &one_plus).pow(&spec.beta);
        let w = Float::with_val(bits, wu * &half) * jac * spec.outer_factor(&x);
        nodes.push(x);
        weights.push(w);
    }
}

/// (1 - x^2)^α restricted to [-1, c] with c < 1, graded toward c.
pub fn truncated_jacobi_measure(alpha: &Float, c: &Float, m: usize, bits: u32) -> Result<DiscreteMeasure> {
    let zero = Float::with_val(bits, 0);
    let eps = Float::with_val(bits, 1 - c.clone());
    let (lx, lw) = jacobi_rule(&zero, &zero, m, bits)?;
    let (jx, jw) = jacobi_rule(&zero, alpha, m, bits)?;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();

    // [-1, 0] with (1 + x)^α absorbed: x = (u - 1)/2
    let scale = Float::with_val(bits, 0.5).pow(Float::with_val(bits, alpha + 1u32));
    for (u, wu) in jx.iter().zip(&jw) {
        let x = Float::with_val(bits, u - 1u32) / 2u32;
        let one_minus = Float::with_val(bits, 1 - x.clone());
        nodes.push(x);
        weights.push(Float::with_val(bits, wu * &scale) * one_minus.pow(alpha));
    }

    // [0, c], panels [c - 2^i ε, c - 2^{i-1} ε] and [c - ε, c]
    let mut panels: Vec<(Float, Float)> = vec![(eps.clone(), Float::with_val(bits, 0))];
    let mut gap = eps.clone();
    loop {
        let next = Float::with_val(bits, &gap * 2u32);
        if next >= Float::with_val(bits, c / 2u32) {
            panels.push((c.clone(), gap));
            break;
        }
        panels.push((next.clone(), gap));
        gap = next;
    }
    for (gl, gr) in panels {
        let half = Float::with_val(bits, &gl - &gr) / 2u32;
        for (u, wu) in lx.iter().zip(&lw) {
            // c - x = gr + half (1 - u)
            let c_minus_x = Float::with_val(bits, 1 - u.clone()) * &half + &gr;
            let x = Float::with_val(bits, c - &c_minus_x);
            let one_minus = Float::with_val(bits, &c_minus_x + &eps);
            let one_plus = Float::with_val(bits, &x + 1u32);
            let w = Float::with_val(bits, wu * &half) * Float::with_val(bits, &one_minus * &one_plus).pow(alpha);
            nodes.push(x);
            weights.push(w);
        }
    }
    Ok(DiscreteMeasure {
        nodes,
        weights,
        symmetric: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highprec::PrecisionContext;
    use crate::weight::HSpec;

    fn moment(m: &DiscreteMeasure, k: u32, bits: u32) -> Float {
        let mut s = Float::with_val(bits, 0);
        for (x, w) in m.nodes.iter().zip(&m.weights) {
            s += Float::with_val(bits, x.pow(k)) * w;
        }
        s
    }

    #[test]
    fn graded_and_plain_layouts_agree() {
        let ctx = PrecisionContext::from_bits(256);
        let spec = WeightSpec::new(0.5, 0.25, 1.3, &HSpec::exp_x2(0.3), &ctx).unwrap();
        assert_eq!(layout(&spec), Layout::Graded);
        let g = graded(&spec, 80).unwrap();
        let p = plain(&spec, 400).unwrap();
        for k in [0, 2, 10] {
            let (a, b) = (moment(&g, k, 256), moment(&p, k, 256));
            let rel = Float::with_val(256, &a - &b).abs() / &b;
            assert!(rel < 1e-20, "moment {k}: {}", rel.to_f64());
        }
    }
}
