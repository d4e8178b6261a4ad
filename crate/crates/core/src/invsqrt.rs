//! Inverse square roots of positive definite matrices, computed two ways:
//! by eigendecomposition, and by quadrature of
//! `Λ^{-1/2} = (1/π) ∫₀^∞ λ^{-1/2} (λ + Λ)^{-1} dλ`.
//!
//! The integral is split at `λ = 1`. Substituting `λ = t²` on `[0, 1]` and
//! `λ = 1/u²` on `[1, ∞)` gives
//! `Λ^{-1/2} = (2/π) [∫₀¹ (t² + Λ)^{-1} dt + ∫₀¹ (1 + u²Λ)^{-1} du]`,
//! two integrals with analytic integrands on a closed interval, each
//! evaluated with Gauss–Legendre nodes.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{eigh, spectral_apply, CMatrix, C64};
use crate::math;

/// Name of the quadrature rule, as recorded in reports.
pub const SCHEME: &str = "gauss-legendre, split at 1, t = sqrt(λ) and u = 1/sqrt(λ)";

/// Smallest node count accepted by [`inv_sqrt_quad`].
pub const MIN_NODES: usize = 16;

/// `U D^{-1/2} U*` from the eigendecomposition `Λ = U D U*`.
pub fn inv_sqrt_eig(lambda: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = eigh(lambda)?;
    let min = vals.first().copied().unwrap_or(1.0);
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite(min));
    }
    Ok(spectral_apply(&vals, &vecs, |l| C64::new(1.0 / math::sqrt(l), 0.0)))
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = math::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(0.5 * (1.0 + x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Cholesky factorization attempt, used only to reject indefinite input.
fn is_positive_definite(a: &CMatrix) -> bool {
    let n = a.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let ljj = math::sqrt(d);
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    true
}

/// Quadrature approximation of `Λ^{-1/2}` using `nodes` points in total,
/// half on each piece of the split integral.
pub fn inv_sqrt_quad(lambda: &CMatrix, nodes: usize) -> Result<CMatrix> {
    if nodes < MIN_NODES {
        return Err(Error::OutOfRange(format!("{nodes} quadrature nodes, need at least {MIN_NODES}")));
    }
    if !lambda.is_square() || lambda.hermitian_defect() > 1e-12 * (1.0 + lambda.max_abs()) {
        return Err(Error::ShapeMismatch("inverse square root needs a hermitian matrix".into()));
    }
    if !is_positive_definite(lambda) {
        return Err(Error::NotPositiveDefinite(f64::NAN));
    }
    let k = lambda.rows();
    let id = CMatrix::identity(k);
    let (t, w) = gauss_legendre(nodes / 2);
    let mut acc = CMatrix::zeros(k, k);
    for (&ti, &wi) in t.iter().zip(&w) {
        let a = &id.scale_real(ti * ti) + lambda;
        acc += &a.inverse()?.scale_real(wi);
        let b = &id + &lambda.scale_real(ti * ti);
        acc += &b.inverse()?.scale_real(wi);
    }
    Ok(acc.scale_real(2.0 / PI))
}

/// `‖A - B‖ / ‖B‖`.
pub fn relative_error(approx: &CMatrix, exact: &CMatrix) -> f64 {
    (approx - exact).op_norm() / exact.op_norm()
}
