//! Dense univariate polynomials stored lowest degree first.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QesError, Result};
use crate::linalg;

/// Value, first and second derivative of `Σ c_j x^j`.
pub fn eval_derivs(coeffs: &[f64], x: f64) -> (f64, f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    let mut d2p = 0.0;
    for &c in coeffs.iter().rev() {
        d2p = d2p * x + 2.0 * dp;
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp, d2p)
}

pub fn eval_complex(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| c * j as f64)
        .collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Monic polynomial `Π (x - z_i)`; the empty product is `1`.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for &z in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); out.len() + 1];
        for (j, &c) in out.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= z * c;
        }
        out = next;
    }
    out
}

/// All complex roots of a real polynomial.
///
/// Eigenvalues of the companion matrix, each polished by a few Newton steps
/// on the original coefficients.
pub fn roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let degree = c.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(QesError::invalid("non-finite polynomial coefficient"));
    }
    let lead = c[degree];
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -c[i] / lead;
    }
    let approx = linalg::eigenvalues(&companion)?;
    let cc: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let dc = derivative(&cc);
    Ok(approx
        .into_iter()
        .map(|z0| polish_root(&cc, &dc, z0))
        .collect())
}

fn polish_root(c: &[Complex64], dc: &[Complex64], z0: Complex64) -> Complex64 {
    let mut z = z0;
    let mut best = eval_complex(c, z).norm();
    for _ in 0..8 {
        let d = eval_complex(dc, z);
        if d.norm() == 0.0 {
            break;
        }
        let candidate = z - eval_complex(c, z) / d;
        let value = eval_complex(c, candidate).norm();
        if !(value < best) {
            break;
        }
        best = value;
        z = candidate;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_cubic() {
        // 1 + 2x - x^2 + 3x^3 at x = 2
        let (p, dp, d2p) = eval_derivs(&[1.0, 2.0, -1.0, 3.0], 2.0);
        assert_eq!(p, 1.0 + 4.0 - 4.0 + 24.0);
        assert_eq!(dp, 2.0 - 4.0 + 36.0);
        assert_eq!(d2p, -2.0 + 36.0);
    }

    #[test]
    fn roots_of_known_quartic() {
        // (x-1)(x+2)(x^2+1) = x^4 + x^3 - x^2 + x - 2
        let mut r = roots(&[-2.0, 1.0, -1.0, 1.0, 1.0]).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        let expected = [
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
        ];
        for (a, b) in r.iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn from_roots_then_roots() {
        let z = [Complex64::new(0.5, 0.0), Complex64::new(-1.5, 0.0)];
        let p = from_roots(&z);
        assert_eq!(p.len(), 3);
        let real: Vec<f64> = p.iter().map(|c| c.re).collect();
        assert_eq!(real, vec![-0.75, 1.0, 1.0]);
    }
}
