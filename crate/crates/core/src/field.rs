//! Grid-sampled operator fields and their first-order jets.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::manifold::ManifoldModel;
use crate::math;

/// A `rows × cols` complex matrix at every grid point.
///
/// Scalar fields are `1 × 1` and vector fields (sections) are `d × 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorField {
    rows: usize,
    cols: usize,
    values: Vec<CMatrix>,
}

impl OperatorField {
    pub fn new(rows: usize, cols: usize, values: Vec<CMatrix>) -> Result<Self> {
        if let Some(m) = values.iter().find(|m| m.shape() != (rows, cols)) {
            return Err(Error::ShapeMismatch(format!(
                "field of shape {rows}x{cols} got a {}x{} value",
                m.rows(),
                m.cols()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(model: &ManifoldModel, rows: usize, cols: usize) -> Self {
        Self::constant(model, CMatrix::zeros(rows, cols))
    }

    pub fn constant(model: &ManifoldModel, value: CMatrix) -> Self {
        let (rows, cols) = value.shape();
        Self {
            rows,
            cols,
            values: alloc::vec![value; model.n_points()],
        }
    }

    /// Sample `f` at every grid point. Panics if `f` returns the wrong shape.
    pub fn from_fn(model: &ManifoldModel, rows: usize, cols: usize, mut f: impl FnMut(usize) -> CMatrix) -> Self {
        let values = (0..model.n_points())
            .map(|p| {
                let m = f(p);
                assert_eq!(m.shape(), (rows, cols), "sampled value has the wrong shape");
                m
            })
            .collect();
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, p: usize) -> &CMatrix {
        &self.values[p]
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [CMatrix] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<CMatrix> {
        self.values
    }

    pub fn map(&self, mut f: impl FnMut(&CMatrix) -> CMatrix) -> Result<Self> {
        let values: Vec<CMatrix> = self.values.iter().map(&mut f).collect();
        let (rows, cols) = values.first().map(CMatrix::shape).unwrap_or((self.rows, self.cols));
        Self::new(rows, cols, values)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            values: self.values.iter().map(CMatrix::adjoint).collect(),
        }
    }

    pub fn mul(&self, rhs: &OperatorField) -> Result<Self> {
        check_product(self.shape(), rhs.shape(), self.len(), rhs.len())?;
        Ok(Self {
            rows: self.rows,
            cols: rhs.cols,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn add(&self, rhs: &OperatorField) -> Result<Self> {
        check_same(self.shape(), rhs.shape(), self.len(), rhs.len())?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, rhs: &OperatorField) -> Result<Self> {
        check_same(self.shape(), rhs.shape(), self.len(), rhs.len())?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|a| a.scale(z)).collect(),
        }
    }

    /// `sup_x ‖f(x)‖`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(CMatrix::op_norm).fold(0.0, f64::max)
    }

    /// Largest entrywise difference over the grid.
    pub fn max_abs_diff(&self, other: &OperatorField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// The de Rham derivative of an operator field: `N` partials of shape
/// `rows × cols` at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentField {
    rows: usize,
    cols: usize,
    dim: usize,
    partials: Vec<CMatrix>,
}

impl CotangentField {
    /// `partials[p * dim + k]` is `∂_k f` at grid point `p`.
    pub fn new(rows: usize, cols: usize, dim: usize, partials: Vec<CMatrix>) -> Self {
        assert!(dim > 0 && partials.len().is_multiple_of(dim), "partials must come in groups of dim");
        debug_assert!(partials.iter().all(|m| m.shape() == (rows, cols)));
        Self {
            rows,
            cols,
            dim,
            partials,
        }
    }

    pub fn zeros(model: &ManifoldModel, rows: usize, cols: usize) -> Self {
        let dim = model.dim();
        Self::new(rows, cols, dim, alloc::vec![CMatrix::zeros(rows, cols); model.n_points() * dim])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.partials.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.partials.is_empty()
    }

    pub fn partial(&self, p: usize, k: usize) -> &CMatrix {
        &self.partials[p * self.dim + k]
    }

    pub fn partials_at(&self, p: usize) -> &[CMatrix] {
        &self.partials[p * self.dim..(p + 1) * self.dim]
    }

    /// The partials stacked into an `(N·rows) × cols` matrix, the map `H → H ⊗ T*_x M`.
    pub fn stacked(&self, p: usize) -> CMatrix {
        CMatrix::vstack(self.partials_at(p))
    }

    /// Fiber norm `‖(df)(x)‖`: operator norm of the stacked partials. For
    /// scalar and vector fields this is the ℓ² norm over axis components.
    pub fn norm_at(&self, p: usize) -> f64 {
        self.stacked(p).op_norm()
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.len()).map(|p| self.norm_at(p)).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            dim: self.dim,
            partials: self.partials.iter().map(CMatrix::adjoint).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &CotangentField) -> f64 {
        self.partials
            .iter()
            .zip(&other.partials)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    fn zip_with(&self, other: &CotangentField, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            dim: self.dim,
            partials: self.partials.iter().zip(&other.partials).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

/// Cotangent norm of `ct` at grid point `x`.
pub fn cotangent_norm(model: &ManifoldModel, ct: &CotangentField, x: &crate::manifold::GridPoint) -> f64 {
    ct.norm_at(model.flat_index(&x.index))
}

/// An operator field together with its derivative, i.e. an element of
/// `M_{rows×cols}(C¹₀(M))` as sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct C1Field {
    pub value: OperatorField,
    pub deriv: CotangentField,
}

impl C1Field {
    pub fn new(value: OperatorField, deriv: CotangentField) -> Result<Self> {
        if value.shape() != (deriv.rows, deriv.cols) || value.len() != deriv.len() {
            return Err(Error::ShapeMismatch(format!(
                "value {}x{} on {} points, derivative {}x{} on {} points",
                value.rows,
                value.cols,
                value.len(),
                deriv.rows,
                deriv.cols,
                deriv.len()
            )));
        }
        Ok(Self { value, deriv })
    }

    /// Pair samples with their finite-difference derivative.
    pub fn from_samples(model: &ManifoldModel, value: OperatorField) -> Self {
        let deriv = model.derham(&value);
        Self { value, deriv }
    }

    pub fn constant(model: &ManifoldModel, value: CMatrix) -> Self {
        let (rows, cols) = value.shape();
        Self {
            value: OperatorField::constant(model, value),
            deriv: CotangentField::zeros(model, rows, cols),
        }
    }

    pub fn zeros(model: &ManifoldModel, rows: usize, cols: usize) -> Self {
        Self::constant(model, CMatrix::zeros(rows, cols))
    }

    pub fn rows(&self) -> usize {
        self.value.rows
    }

    pub fn cols(&self) -> usize {
        self.value.cols
    }

    pub fn dim(&self) -> usize {
        self.deriv.dim
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn at(&self, p: usize) -> &CMatrix {
        self.value.at(p)
    }

    /// Pointwise product with the Leibniz rule `d(fg) = df·g + f·dg`.
    pub fn mul(&self, rhs: &C1Field) -> Result<Self> {
        let value = self.value.mul(&rhs.value)?;
        let n = self.dim();
        let mut partials = Vec::with_capacity(self.deriv.partials.len());
        for p in 0..self.len() {
            let (f, g) = (self.value.at(p), rhs.value.at(p));
            for k in 0..n {
                let mut d = self.deriv.partial(p, k) * g;
                d += &(f * rhs.deriv.partial(p, k));
                partials.push(d);
            }
        }
        let deriv = CotangentField::new(value.rows, value.cols, n, partials);
        Ok(Self { value, deriv })
    }

    /// Multiply by a scalar function `f` (a `1 × 1` field), the module action `s·f`.
    pub fn mul_scalar(&self, f: &C1Field) -> Result<Self> {
        if f.value.shape() != (1, 1) || f.len() != self.len() {
            return Err(Error::ShapeMismatch("module action needs a scalar field on the same grid".into()));
        }
        let n = self.dim();
        let mut values = Vec::with_capacity(self.len());
        let mut partials = Vec::with_capacity(self.deriv.partials.len());
        for p in 0..self.len() {
            let fv = f.value.at(p)[(0, 0)];
            let s = self.value.at(p);
            values.push(s.scale(fv));
            for k in 0..n {
                let mut d = self.deriv.partial(p, k).scale(fv);
                d += &s.scale(f.deriv.partial(p, k)[(0, 0)]);
                partials.push(d);
            }
        }
        Ok(Self {
            value: OperatorField::new(self.rows(), self.cols(), values)?,
            deriv: CotangentField::new(self.rows(), self.cols(), n, partials),
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            value: self.value.adjoint(),
            deriv: self.deriv.adjoint(),
        }
    }

    pub fn add(&self, rhs: &C1Field) -> Result<Self> {
        Ok(Self {
            value: self.value.add(&rhs.value)?,
            deriv: self.deriv.zip_with(&rhs.deriv, |a, b| a + b),
        })
    }

    pub fn sub(&self, rhs: &C1Field) -> Result<Self> {
        Ok(Self {
            value: self.value.sub(&rhs.value)?,
            deriv: self.deriv.zip_with(&rhs.deriv, |a, b| a - b),
        })
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            value: self.value.scale(z),
            deriv: CotangentField {
                partials: self.deriv.partials.iter().map(|a| a.scale(z)).collect(),
                ..self.deriv.clone()
            },
        }
    }

    /// Left and right multiplication by constant matrices, `v·f·w`.
    pub fn sandwich(&self, v: &CMatrix, w: &CMatrix) -> Self {
        let value = OperatorField {
            rows: v.rows(),
            cols: w.cols(),
            values: self.value.values.iter().map(|a| &(v * a) * w).collect(),
        };
        let deriv = CotangentField {
            rows: v.rows(),
            cols: w.cols(),
            dim: self.dim(),
            partials: self.deriv.partials.iter().map(|a| &(v * a) * w).collect(),
        };
        Self { value, deriv }
    }

    /// Block-diagonal direct sum `f ⊕ g`.
    pub fn direct_sum(&self, rhs: &C1Field) -> Self {
        let value = OperatorField {
            rows: self.rows() + rhs.rows(),
            cols: self.cols() + rhs.cols(),
            values: self
                .value
                .values
                .iter()
                .zip(&rhs.value.values)
                .map(|(a, b)| CMatrix::block_diag(&[a.clone(), b.clone()]))
                .collect(),
        };
        let deriv = CotangentField {
            rows: value.rows,
            cols: value.cols,
            dim: self.dim(),
            partials: self
                .deriv
                .partials
                .iter()
                .zip(&rhs.deriv.partials)
                .map(|(a, b)| CMatrix::block_diag(&[a.clone(), b.clone()]))
                .collect(),
        };
        Self { value, deriv }
    }

    /// `π(α)(x) = [[α(x), 0], [(dα)(x), α(x) ⊗ 1_N]]`.
    pub fn pi_block(&self, p: usize) -> CMatrix {
        let a = self.value.at(p);
        let (r, c) = a.shape();
        let n = self.dim();
        let mut m = CMatrix::zeros(r * (n + 1), c * (n + 1));
        m.set_block(0, 0, a);
        for k in 0..n {
            m.set_block(r * (k + 1), 0, self.deriv.partial(p, k));
            m.set_block(r * (k + 1), c * (k + 1), a);
        }
        m
    }

    /// `(‖f(x)‖² + ‖(df)(x)‖²)^{1/2}`.
    pub fn norm_1_at(&self, p: usize) -> f64 {
        math::hypot(self.value.at(p).op_norm(), self.deriv.norm_at(p))
    }

    /// `‖f‖₁ = sup_x (‖f(x)‖² + ‖(df)(x)‖²)^{1/2}`.
    pub fn norm_1(&self) -> f64 {
        (0..self.len()).map(|p| self.norm_1_at(p)).fold(0.0, f64::max)
    }

    /// `‖α‖₁ = sup_x ‖π(α)(x)‖`.
    pub fn alpha_norm_1(&self) -> f64 {
        (0..self.len()).map(|p| self.pi_block(p).op_norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference over values and partials.
    pub fn max_abs_diff(&self, other: &C1Field) -> f64 {
        self.value.max_abs_diff(&other.value).max(self.deriv.max_abs_diff(&other.deriv))
    }
}

fn check_product(a: (usize, usize), b: (usize, usize), la: usize, lb: usize) -> Result<()> {
    if a.1 != b.0 || la != lb {
        return Err(Error::ShapeMismatch(format!(
            "cannot multiply {}x{} by {}x{} fields ({la} vs {lb} points)",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

fn check_same(a: (usize, usize), b: (usize, usize), la: usize, lb: usize) -> Result<()> {
    if a != b || la != lb {
        return Err(Error::ShapeMismatch(format!(
            "fields of shape {}x{} and {}x{} ({la} vs {lb} points)",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}
