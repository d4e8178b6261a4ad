//! Small dense complex matrices.
//!
//! Fiber dimensions in this crate are tiny (a few dozen at most), so a
//! row-major `Vec` with cyclic Jacobi for Hermitian eigenproblems is both
//! accurate to roundoff and fast enough for per-grid-point sweeps.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::math;

pub type C64 = num_complex::Complex<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn column_vector(values: &[C64]) -> Self {
        Self::from_vec(values.len(), 1, values.to_vec())
    }

    pub fn scalar(z: C64) -> Self {
        Self::from_vec(1, 1, vec![z])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[C64]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * z).collect(),
        }
    }

    pub fn scale_real(&self, x: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * x).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|&z| math::cabs(z)).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Copy of the `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMatrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[CMatrix]) -> Self {
        if blocks.is_empty() {
            return Self::zeros(0, 0);
        }
        let cols = blocks[0].cols;
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack: column counts differ");
            data.extend_from_slice(&b.data);
        }
        Self { rows, cols, data }
    }

    /// `self ⊗ I_n`, i.e. `n` copies of `self` along the block diagonal.
    pub fn amplify(&self, n: usize) -> Self {
        let mut m = Self::zeros(self.rows * n, self.cols * n);
        for k in 0..n {
            m.set_block(k * self.rows, k * self.cols, self);
        }
        m
    }

    /// Block diagonal matrix with the given blocks.
    pub fn block_diag(blocks: &[CMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            m.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        m
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self^* rhs` without forming the adjoint.
    pub fn adjoint_mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, rhs.rows, "adjoint_mul: row counts differ");
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i].conj();
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec: length mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let a = self.scale_real(1.0 / scale);
        let gram = if self.cols <= self.rows {
            a.adjoint_mul(&a)
        } else {
            a.matmul(&a.adjoint())
        };
        let (vals, _) = eigh(&gram).expect("Gram matrix is Hermitian");
        let top = vals.last().copied().unwrap_or(0.0).max(0.0);
        scale * math::sqrt(top)
    }

    /// `max |self - other|` entrywise.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| math::cabs(a - b))
            .fold(0.0, f64::max)
    }

    /// Operator-norm distance to `other`.
    pub fn dist(&self, other: &CMatrix) -> f64 {
        (self - other).op_norm()
    }

    /// Deviation from hermiticity, `max |A - A^*|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max(math::cabs(self[(i, j)] - self[(j, i)].conj()));
            }
        }
        worst
    }

    /// `‖A^*A - I‖` in the operator norm.
    pub fn isometry_defect(&self) -> f64 {
        let g = self.adjoint_mul(self);
        (&g - &CMatrix::identity(self.cols)).op_norm()
    }

    /// Inverse by LU factorization with partial pivoting.
    pub fn inverse(&self) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "inverse of {}x{} matrix",
                self.rows,
                self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        let scale = self.max_abs();
        if scale == 0.0 {
            return Err(Error::Singular);
        }
        for col in 0..n {
            let (piv, pmag) = (col..n)
                .map(|r| (r, math::cabs(a[(r, col)])))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= scale * 1e-14 {
                return Err(Error::Singular);
            }
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(r, j)] -= f * ac;
                    inv[(r, j)] -= f * ic;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl core::ops::AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "add_assign: shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the unitary whose columns are
/// the matching eigenvectors. Only the Hermitian part of `a` is used.
pub fn eigh(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "eigh of {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut m = CMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);
    let total: f64 = m.frobenius();
    if total == 0.0 || n == 1 {
        let vals = (0..n).map(|i| m[(i, i)].re).collect();
        return Ok((vals, v));
    }
    let off_norm = |m: &CMatrix| {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        math::sqrt(off)
    };
    let skip = total * 1e-20;
    for _sweep in 0..60 {
        if off_norm(&m) <= total * 1e-17 {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = math::cabs(apq);
                if mag <= skip {
                    continue;
                }
                rotated = true;
                // Phase w rotates a_pq onto the positive real axis, then a
                // real Jacobi rotation (c, s) annihilates it.
                let w = apq / mag;
                let theta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + math::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;
                let wc = w.conj();
                // m <- G^* m G with G = [[c, s], [-s w̄, c w̄]] on (p, q).
                for r in 0..n {
                    let mp = m[(r, p)];
                    let mq = m[(r, q)];
                    m[(r, p)] = mp * c - mq * wc * s;
                    m[(r, q)] = mp * s + mq * wc * c;
                }
                for r in 0..n {
                    let mp = m[(p, r)];
                    let mq = m[(q, r)];
                    m[(p, r)] = mp * c - mq * w * s;
                    m[(q, r)] = mp * s + mq * w * c;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = vp * c - vq * wc * s;
                    v[(r, q)] = vp * s + vq * wc * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    if off_norm(&m) > total * 1e-12 {
        return Err(Error::NoConvergence);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let vals = order.iter().map(|&i| m[(i, i)].re).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((vals, vecs))
}

/// `f(A)` for Hermitian `A` through its eigendecomposition.
pub fn hermitian_function(a: &CMatrix, f: impl Fn(f64) -> C64) -> Result<CMatrix> {
    let (vals, vecs) = eigh(a)?;
    Ok(spectral_apply(&vals, &vecs, f))
}

/// `V diag(f(λ)) V^*`.
pub fn spectral_apply(vals: &[f64], vecs: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let n = vals.len();
    let fv: Vec<C64> = vals.iter().map(|&l| f(l)).collect();
    CMatrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| vecs[(i, k)] * fv[k] * vecs[(j, k)].conj()).sum()
    })
}

/// Orthonormal basis of the column space of `a` by Gram–Schmidt with column
/// pivoting. Columns whose residual falls below `tol` are dropped.
pub fn orthonormal_column_basis(a: &CMatrix, tol: f64) -> CMatrix {
    let rows = a.rows();
    let mut residual: Vec<Vec<C64>> = (0..a.cols()).map(|j| a.column(j)).collect();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let norm = |v: &[C64]| math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
    loop {
        let best = residual
            .iter()
            .enumerate()
            .map(|(j, v)| (j, norm(v)))
            .fold(None, |acc: Option<(usize, f64)>, cur| match acc {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            });
        let Some((j, mag)) = best else { break };
        if mag <= tol || basis.len() == rows {
            break;
        }
        let mut q: Vec<C64> = residual.swap_remove(j);
        // Second pass keeps the basis orthogonal to roundoff.
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(&q).map(|(&x, &y)| x.conj() * y).sum();
                for (qi, &bi) in q.iter_mut().zip(b) {
                    *qi -= proj * bi;
                }
            }
        }
        let qn = norm(&q);
        if qn <= tol {
            continue;
        }
        for z in q.iter_mut() {
            *z /= qn;
        }
        for r in residual.iter_mut() {
            let proj: C64 = q.iter().zip(r.iter()).map(|(&x, &y)| x.conj() * y).sum();
            for (ri, &qi) in r.iter_mut().zip(&q) {
                *ri -= proj * qi;
            }
        }
        basis.push(q);
    }
    let mut out = CMatrix::zeros(rows, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    math::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

/// `<u, v>`, conjugate-linear in `u`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(&a, &b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn op_norm_basic() {
        assert!((CMatrix::identity(2).op_norm() - 1.0).abs() < 1e-15);
        let shift = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!((shift.op_norm() - 1.0).abs() < 1e-15);
        let v = CMatrix::from_real(1, 2, &[3.0, 4.0]);
        assert!((v.op_norm() - 5.0).abs() < 1e-14);
        assert_eq!(CMatrix::zeros(3, 2).op_norm(), 0.0);
    }

    #[test]
    fn eigh_reconstructs_hermitian() {
        let a = CMatrix::from_vec(
            3,
            3,
            vec![
                c(2.0, 0.0),
                c(1.0, -1.0),
                c(0.0, 0.5),
                c(1.0, 1.0),
                c(-1.0, 0.0),
                c(0.3, 0.0),
                c(0.0, -0.5),
                c(0.3, 0.0),
                c(4.0, 0.0),
            ],
        );
        let (vals, vecs) = eigh(&a).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(vecs.isometry_defect() < 1e-13);
        let back = spectral_apply(&vals, &vecs, |l| c(l, 0.0));
        assert!(back.max_abs_diff(&a) < 1e-13);
    }

    #[test]
    fn inverse_roundtrip_and_singular() {
        let a = CMatrix::from_vec(2, 2, vec![c(0.0, 1.0), c(2.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)]);
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).max_abs_diff(&CMatrix::identity(2)) < 1e-14);
        let s = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(s.inverse(), Err(Error::Singular));
    }

    #[test]
    fn column_basis_of_projection() {
        let v = [c(0.6, 0.0), c(0.0, 0.8)];
        let p = CMatrix::from_fn(2, 2, |i, j| v[i] * v[j].conj());
        let b = orthonormal_column_basis(&p, 1e-10);
        assert_eq!(b.cols(), 1);
        assert!(b.isometry_defect() < 1e-14);
        assert!((&b * &b.adjoint()).max_abs_diff(&p) < 1e-14);
    }

    #[test]
    fn amplify_is_block_diagonal() {
        let a = CMatrix::from_real(1, 2, &[1.0, 2.0]);
        let b = a.amplify(2);
        assert_eq!(b.shape(), (2, 4));
        assert_eq!(b[(1, 3)], c(2.0, 0.0));
        assert_eq!(b[(0, 3)], ZERO);
    }
}
