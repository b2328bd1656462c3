//! Chebyshev expansions on `[0, π]` and their matrix-free application.
//!
//! A function `f` on `[0, π]` is expanded as `p(δ) = Σ_k c_k T_k(t)` with
//! `δ = (t + 1) π / 2`. Matrix arguments are evaluated by the three-term
//! recurrence against a block of vectors, or by Clenshaw summation when a
//! different vector is attached to each coefficient.

use std::f64::consts::PI;

use crate::sparse::Csr;
use crate::{CMatrix, Complex64};

/// Coefficients of the degree-`k` Chebyshev interpolant of `f` at the
/// `k + 1` Chebyshev–Gauss nodes.
pub fn chebyshev_fit(f: impl Fn(f64) -> f64, degree: usize) -> Vec<f64> {
    assert!(degree >= 1, "Chebyshev degree must be at least 1");
    let n = degree + 1;
    let angles: Vec<f64> = (0..n).map(|j| PI * (j as f64 + 0.5) / n as f64).collect();
    let samples: Vec<f64> = angles.iter().map(|&a| f((a.cos() + 1.0) * PI / 2.0)).collect();
    let mut coeffs: Vec<f64> = (0..n)
        .map(|k| {
            let dot: f64 = angles
                .iter()
                .zip(&samples)
                .map(|(&a, &fx)| fx * (k as f64 * a).cos())
                .sum();
            2.0 * dot / n as f64
        })
        .collect();
    coeffs[0] /= 2.0;
    coeffs
}

/// Evaluates `Σ_k c_k T_k(t)` at `δ ∈ [0, π]` by Clenshaw's recurrence.
pub fn chebyshev_eval(coeffs: &[f64], delta: f64) -> f64 {
    let t = 2.0 * delta / PI - 1.0;
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + t * b1 - b2
}

/// The shifted operator `X = (2/π)·scale·L − I` whose spectrum lies in
/// `[−1, 1]` whenever `scale·λ ∈ [0, π]` for every eigenvalue `λ` of `L`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ShiftedOperator<'a> {
    pub laplacian: &'a Csr<Complex64>,
    pub scale: f64,
}

impl ShiftedOperator<'_> {
    fn apply(&self, v: &CMatrix) -> CMatrix {
        let a = Complex64::new(2.0 * self.scale / PI, 0.0);
        let mut out = self.laplacian.mul_dense(v);
        out.zip_apply(v, |o, x| *o = a * *o - x);
        out
    }

    /// `[p_0(X) v, ..., p_R(X) v]`, sharing one recurrence across all
    /// polynomials. All coefficient vectors must have the same length.
    pub fn apply_polynomials(&self, polys: &[Vec<f64>], v: &CMatrix) -> Vec<CMatrix> {
        let degree = polys[0].len() - 1;
        let scale = |m: &CMatrix, c: f64| m * Complex64::new(c, 0.0);
        let mut outs: Vec<CMatrix> = polys.iter().map(|p| scale(v, p[0])).collect();
        if degree == 0 {
            return outs;
        }
        let mut prev = v.clone();
        let mut cur = self.apply(v);
        for (out, p) in outs.iter_mut().zip(polys) {
            *out += scale(&cur, p[1]);
        }
        for k in 2..=degree {
            let mut next = self.apply(&cur) * Complex64::new(2.0, 0.0);
            next -= &prev;
            for (out, p) in outs.iter_mut().zip(polys) {
                *out += scale(&next, p[k]);
            }
            prev = cur;
            cur = next;
        }
        outs
    }

    /// `Σ_i p_i(X) v_i` by Clenshaw summation with vector-valued
    /// coefficients `w_k = Σ_i c_{i,k} v_i`.
    pub fn sum_polynomials(&self, terms: &[(&[f64], &CMatrix)]) -> CMatrix {
        let degree = terms[0].0.len() - 1;
        let (rows, cols) = terms[0].1.shape();
        let weight = |k: usize| {
            let mut w = CMatrix::zeros(rows, cols);
            for (p, v) in terms {
                w += *v * Complex64::new(p[k], 0.0);
            }
            w
        };
        let mut b1 = CMatrix::zeros(rows, cols);
        let mut b2 = CMatrix::zeros(rows, cols);
        for k in (1..=degree).rev() {
            let mut b0 = self.apply(&b1) * Complex64::new(2.0, 0.0);
            b0 -= &b2;
            b0 += weight(k);
            b2 = b1;
            b1 = b0;
        }
        let mut out = self.apply(&b1);
        out -= &b2;
        out += weight(0);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_grid_error(coeffs: &[f64], f: impl Fn(f64) -> f64, points: usize) -> f64 {
        (0..points)
            .map(|i| {
                let d = PI * i as f64 / (points - 1) as f64;
                (chebyshev_eval(coeffs, d) - f(d)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_function() {
        let c = chebyshev_fit(|_| 1.0, 6);
        assert!((c[0] - 1.0).abs() < 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn affine_is_reproduced() {
        let c = chebyshev_fit(|d| d, 1);
        assert!(max_grid_error(&c, |d| d, 1001) < 1e-14);
        // δ = (t+1)π/2  =>  c = [π/2, π/2]
        assert!((c[0] - PI / 2.0).abs() < 1e-14 && (c[1] - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn cubic_is_reproduced_at_degree_three() {
        let f = |d: f64| 0.3 - d + 0.25 * d * d * d;
        let c = chebyshev_fit(f, 3);
        assert!(max_grid_error(&c, f, 1001) < 1e-12);
    }

    #[test]
    fn haar_low_pass_degree_eight() {
        let f = |d: f64| (d / 2.0).cos();
        let c = chebyshev_fit(f, 8);
        assert!(max_grid_error(&c, f, 1001) < 1e-6);
    }

    #[test]
    fn error_decreases_with_degree() {
        let f = |d: f64| (-(d - 1.0).powi(2)).exp();
        let errs: Vec<f64> = [4, 8, 16, 32]
            .into_iter()
            .map(|k| max_grid_error(&chebyshev_fit(f, k), f, 1001))
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn recurrence_and_clenshaw_agree_with_dense() {
        // diagonal operator: X acts entrywise, so p(X)v = p(λ_i) v_i
        let lams = [0.0, 0.4, 1.1, 2.0];
        let lap = Csr::from_triplets(
            4,
            4,
            lams.iter().enumerate().map(|(i, &l)| (i, i, Complex64::new(l, 0.0))).collect(),
        );
        let op = ShiftedOperator { laplacian: &lap, scale: 1.0 };
        let p = chebyshev_fit(|d| (d / 2.0).cos(), 10);
        let p2 = chebyshev_fit(|d| (d / 2.0).sin(), 10);
        let v = CMatrix::from_fn(4, 1, |i, _| Complex64::new(1.0 + i as f64, -0.5));
        let outs = op.apply_polynomials(&[p.clone(), p2.clone()], &v);
        let summed = op.sum_polynomials(&[(&p, &v), (&p2, &v)]);
        for i in 0..4 {
            let want = v[i] * chebyshev_eval(&p, lams[i]);
            let want2 = v[i] * chebyshev_eval(&p2, lams[i]);
            assert!((outs[0][i] - want).norm() < 1e-13);
            assert!((outs[1][i] - want2).norm() < 1e-13);
            assert!((summed[i] - want - want2).norm() < 1e-13);
        }
    }
}
