use rug::Float;

use crate::error::{Error, Result};

/// Least squares via the normal equations at the precision of the data.
pub fn least_squares(rows: &[Vec<Float>], rhs: &[Float]) -> Result<Vec<Float>> {
    let k = rows.first().map(|r| r.len()).unwrap_or(0);
    if k == 0 || rows.len() < k {
        return Err(Error::InvalidParameter("least squares needs at least as many rows as unknowns".into()));
    }
    let bits = rows[0][0].prec();
    let mut m = vec![vec![Float::with_val(bits, 0); k + 1]; k];
    for (r, b) in rows.iter().zip(rhs) {
        for i in 0..k {
            for j in 0..k {
                m[i][j] += Float::with_val(bits, &r[i] * &r[j]);
            }
            m[i][k] += Float::with_val(bits, &r[i] * b);
        }
    }
    solve_dense(m)
}

/// Gaussian elimination with partial pivoting on an augmented k×(k+1) matrix.
pub fn solve_dense(mut m: Vec<Vec<Float>>) -> Result<Vec<Float>> {
    let k = m.len();
    let bits = m[0][0].prec();
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&a, &b| m[a][c].clone().abs().partial_cmp(&m[b][c].clone().abs()).unwrap())
            .unwrap();
        if m[piv][c].is_zero() {
            return Err(Error::Singular {
                s: 0.0,
                reason: "singular normal equations".into(),
            });
        }
        m.swap(c, piv);
        for r in (c + 1)..k {
            let f = Float::with_val(bits, &m[r][c] / &m[c][c]);
            for j in c..=k {
                let d = Float::with_val(bits, &f * &m[c][j]);
                m[r][j] -= d;
            }
        }
    }
    let mut x = vec![Float::with_val(bits, 0); k];
    for r in (0..k).rev() {
        let mut acc = m[r][k].clone();
        for j in (r + 1)..k {
            acc -= Float::with_val(bits, &m[r][j] * &x[j]);
        }
        x[r] = acc / &m[r][r];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_model() {
        let b = 128;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 1..20 {
            let s = Float::with_val(b, i) / 3u32;
            let sq = Float::with_val(b, s.sqrt_ref());
            rows.push(vec![sq.clone(), Float::with_val(b, 1), Float::with_val(b, 1) / &sq]);
            rhs.push(Float::with_val(b, &sq * -0.5f64) + 0.3f64 + Float::with_val(b, 2) / &sq);
        }
        let c = least_squares(&rows, &rhs).unwrap();
        assert!((c[0].to_f64() + 0.5).abs() < 1e-30);
        assert!((c[1].to_f64() - 0.3).abs() < 1e-30);
        assert!((c[2].to_f64() - 2.0).abs() < 1e-30);
    }
}
