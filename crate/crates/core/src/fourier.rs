//! Seeded random test data: complex matrices and finite Fourier-sum fields
//! with analytic derivatives.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::field::{C1Field, CotangentField, OperatorField};
use crate::linalg::{eigh, CMatrix, C64, I};
use crate::manifold::{ManifoldModel, ModelKind};
use crate::math;

/// Complex number with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_c64(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let a = random_matrix(rng, n, n);
    (&a + &a.adjoint()).scale_real(0.5)
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let h = random_hermitian(rng, n);
    eigh(&h).expect("jacobi converges on small hermitian matrices").1
}

/// Hermitian positive definite matrix with spectrum in `[1, cond]`, both ends attained
/// when `n ≥ 2`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, cond: f64) -> CMatrix {
    let log_c = math::ln(cond);
    let eig: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => 1.0,
            1 => cond,
            _ => math::exp(rng.gen_range(0.0..1.0) * log_c),
        })
        .collect();
    let u = random_unitary(rng, n);
    &(&u * &CMatrix::diag_real(&eig)) * &u.adjoint()
}

/// Orthogonal projection onto the span of `rank` random vectors in `C^d`.
pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> CMatrix {
    let u = random_unitary(rng, d);
    let v = u.block(0, 0, d, rank);
    &v * &v.adjoint()
}

/// `Σ_k c_k exp(i Σ_j 2π k_j x_j / L_j)` with matrix coefficients `c_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    rows: usize,
    cols: usize,
    extents: Vec<f64>,
    modes: Vec<(Vec<i32>, CMatrix)>,
}

impl FourierField {
    /// Random field with every wavevector of total degree `Σ|k_j| ≤ degree`.
    /// Coefficients decay like `1/(1 + |k|²)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, model: &ManifoldModel, rows: usize, cols: usize, degree: u32) -> Self {
        let modes = wavevectors(model.dim(), degree as i32)
            .into_iter()
            .map(|k| {
                let k2: i32 = k.iter().map(|v| v * v).sum();
                let c = random_matrix(rng, rows, cols).scale_real(1.0 / (1.0 + k2 as f64));
                (k, c)
            })
            .collect();
        Self {
            rows,
            cols,
            extents: model.extents().to_vec(),
            modes,
        }
    }

    /// A single mode `c · exp(i 2π k·x / L)`.
    pub fn mode(model: &ManifoldModel, k: &[i32], coeff: CMatrix) -> Self {
        Self {
            rows: coeff.rows(),
            cols: coeff.cols(),
            extents: model.extents().to_vec(),
            modes: vec![(k.to_vec(), coeff)],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Value and partial derivatives at the given coordinates.
    pub fn eval(&self, coords: &[f64]) -> (CMatrix, Vec<CMatrix>) {
        let n = coords.len();
        let mut value = CMatrix::zeros(self.rows, self.cols);
        let mut partials = vec![CMatrix::zeros(self.rows, self.cols); n];
        for (k, c) in &self.modes {
            let freq: Vec<f64> = (0..n)
                .map(|j| 2.0 * core::f64::consts::PI * k[j] as f64 / self.extents[j])
                .collect();
            let phase = math::cis(freq.iter().zip(coords).map(|(w, x)| w * x).sum());
            let term = c.scale(phase);
            for j in 0..n {
                if k[j] != 0 {
                    partials[j] += &term.scale(I * freq[j]);
                }
            }
            value += &term;
        }
        (value, partials)
    }

    /// Sample on the grid with analytic derivatives. On the box the field is
    /// multiplied by [`margin_envelope`] so that it vanishes in the margin.
    pub fn sample(&self, model: &ManifoldModel) -> C1Field {
        let n = model.dim();
        let mut values = Vec::with_capacity(model.n_points());
        let mut partials = Vec::with_capacity(model.n_points() * n);
        for p in 0..model.n_points() {
            let (v, d) = self.eval(&model.coords(p));
            values.push(v);
            partials.extend(d);
        }
        let field = C1Field {
            value: OperatorField::new(self.rows, self.cols, values).expect("modes share one shape"),
            deriv: CotangentField::new(self.rows, self.cols, n, partials),
        };
        match model.kind() {
            ModelKind::FlatTorus => field,
            ModelKind::EuclideanBox => field
                .mul_scalar(&margin_envelope(model))
                .expect("envelope is a scalar field on the same grid"),
        }
    }
}

fn wavevectors(dim: usize, degree: i32) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::new();
        for k in &out {
            let used: i32 = k.iter().map(|v: &i32| v.abs()).sum();
            for v in -(degree - used)..=(degree - used) {
                let mut kk = k.clone();
                kk.push(v);
                next.push(kk);
            }
        }
        out = next;
    }
    out
}

/// Smooth bump equal to one at the box center and vanishing on the two-cell
/// margin; identically one on the torus.
pub fn margin_envelope(model: &ManifoldModel) -> C1Field {
    let n = model.dim();
    if model.kind() == ModelKind::FlatTorus {
        return C1Field::constant(model, CMatrix::scalar(C64::new(1.0, 0.0)));
    }
    let mut values = Vec::with_capacity(model.n_points());
    let mut partials = Vec::with_capacity(model.n_points() * n);
    for p in 0..model.n_points() {
        let x = model.coords(p);
        let mut f = vec![0.0; n];
        let mut df = vec![0.0; n];
        for k in 0..n {
            let h = model.spacing()[k];
            let center = (model.grid_sizes()[k] - 1) as f64 * h / 2.0;
            let half = center - 1.5 * h;
            let s = (x[k] - center) / half;
            f[k] = unit_bump(s);
            df[k] = unit_bump_deriv(s) / half;
        }
        let total: f64 = f.iter().product();
        values.push(CMatrix::scalar(C64::new(total, 0.0)));
        for (k, dfk) in df.iter().enumerate() {
            let others: f64 = (0..n).filter(|&j| j != k).map(|j| f[j]).product();
            partials.push(CMatrix::scalar(C64::new(dfk * others, 0.0)));
        }
    }
    C1Field {
        value: OperatorField::new(1, 1, values).expect("scalar values"),
        deriv: CotangentField::new(1, 1, n, partials),
    }
}

/// `exp(1 - 1/(1 - s²))` on `|s| < 1`, zero elsewhere; equals one at `s = 0`.
fn unit_bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        math::exp(1.0 - 1.0 / (1.0 - s * s))
    }
}

fn unit_bump_deriv(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        unit_bump(s) * (-2.0 * s / (q * q))
    }
}
