//! Flat model manifolds sampled on regular grids.
//!
//! Two geometries are supported: the flat torus `R^N / (L_1 Z × … × L_N Z)`
//! and a Euclidean box standing in for `R^N`, on which every field must
//! vanish in a two-cell margin. Both have constant identity metric in the
//! normal charts, so the chart constants are exactly one.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{CotangentField, OperatorField};
use crate::linalg::CMatrix;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    FlatTorus,
    EuclideanBox,
}

/// Width of the zero margin on the box, in grid cells.
pub const BOX_MARGIN: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldModel {
    kind: ModelKind,
    extents: Vec<f64>,
    grid: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: Vec<usize>,
    pub coords: Vec<f64>,
}

/// A normal chart `U_{x,r}` around a grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub center: usize,
    pub radius: f64,
    /// Flat indices of the grid points at geodesic distance `< radius`.
    pub domain: Vec<usize>,
    /// Normal coordinates `φ_x(y)` of each domain point, same order.
    pub coords: Vec<Vec<f64>>,
}

impl Chart {
    /// Operator norm of the metric matrix in this chart (identity for flat models).
    pub fn metric_norm(&self) -> f64 {
        1.0
    }

    pub fn inverse_metric_norm(&self) -> f64 {
        1.0
    }

    pub fn contains(&self, p: usize) -> bool {
        self.domain.binary_search(&p).is_ok()
    }
}

impl ManifoldModel {
    pub fn new(kind: ModelKind, dimension: usize, extents: &[f64], grid_sizes: &[usize]) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        if extents.len() != dimension || grid_sizes.len() != dimension {
            return Err(Error::InvalidModel(format!(
                "expected {dimension} extents and grid sizes, got {} and {}",
                extents.len(),
                grid_sizes.len()
            )));
        }
        if let Some(e) = extents.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidModel(format!("extent {e} is not positive")));
        }
        if let Some(g) = grid_sizes.iter().find(|&&g| g < 4) {
            return Err(Error::InvalidModel(format!("grid size {g} is below the minimum of 4")));
        }
        if kind == ModelKind::EuclideanBox && grid_sizes.iter().any(|&g| g < 2 * BOX_MARGIN + 1) {
            return Err(Error::InvalidModel("box grid leaves no interior inside the margin".into()));
        }
        let spacing = extents
            .iter()
            .zip(grid_sizes)
            .map(|(&e, &g)| e / g as f64)
            .collect();
        let mut strides = vec![1; dimension];
        for k in (0..dimension.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * grid_sizes[k + 1];
        }
        Ok(Self {
            kind,
            extents: extents.to_vec(),
            grid: grid_sizes.to_vec(),
            spacing,
            strides,
        })
    }

    pub fn torus(extents: &[f64], grid_sizes: &[usize]) -> Result<Self> {
        Self::new(ModelKind::FlatTorus, extents.len(), extents, grid_sizes)
    }

    pub fn euclidean_box(extents: &[f64], grid_sizes: &[usize]) -> Result<Self> {
        Self::new(ModelKind::EuclideanBox, extents.len(), extents, grid_sizes)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn grid_sizes(&self) -> &[usize] {
        &self.grid
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Largest grid spacing over the axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    pub fn n_points(&self) -> usize {
        self.grid.iter().product()
    }

    /// `min_k L_k / 2` on the torus; unbounded on the box.
    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            ModelKind::FlatTorus => self.extents.iter().copied().fold(f64::INFINITY, f64::min) / 2.0,
            ModelKind::EuclideanBox => f64::INFINITY,
        }
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.strides).map(|(&i, &s)| i * s).sum()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (i, stride) in idx.iter_mut().zip(&self.strides) {
            *i = flat / stride;
            flat %= stride;
        }
        idx
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.spacing)
            .map(|(&i, &h)| i as f64 * h)
            .collect()
    }

    pub fn point(&self, flat: usize) -> GridPoint {
        let index = self.multi_index(flat);
        let coords = index.iter().zip(&self.spacing).map(|(&i, &h)| i as f64 * h).collect();
        GridPoint { index, coords }
    }

    pub fn grid_point(&self, index: &[usize]) -> Result<GridPoint> {
        if index.len() != self.dim() || index.iter().zip(&self.grid).any(|(&i, &g)| i >= g) {
            return Err(Error::OutOfRange(format!("grid index {index:?} outside {:?}", self.grid)));
        }
        Ok(self.point(self.flat_index(index)))
    }

    /// Grid point nearest to the given coordinates (wrapped on the torus, clamped on the box).
    pub fn nearest_point(&self, coords: &[f64]) -> GridPoint {
        let index: Vec<usize> = coords
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let g = self.grid[k] as i64;
                let i = math::round(c / self.spacing[k]) as i64;
                match self.kind {
                    ModelKind::FlatTorus => i.rem_euclid(g) as usize,
                    ModelKind::EuclideanBox => i.clamp(0, g - 1) as usize,
                }
            })
            .collect();
        self.point(self.flat_index(&index))
    }

    /// Neighbor `step` cells along `axis`; `None` past the box edge.
    pub fn neighbor(&self, flat: usize, axis: usize, step: isize) -> Option<usize> {
        let g = self.grid[axis] as isize;
        let i = ((flat / self.strides[axis]) % self.grid[axis]) as isize;
        let j = i + step;
        let j = match self.kind {
            ModelKind::FlatTorus => j.rem_euclid(g),
            ModelKind::EuclideanBox => {
                if j < 0 || j >= g {
                    return None;
                }
                j
            }
        };
        Some((flat as isize + (j - i) * self.strides[axis] as isize) as usize)
    }

    /// Coordinate displacement `y - x`, lifted to `[-L/2, L/2)` on the torus.
    pub fn displacement(&self, x: usize, y: usize) -> Vec<f64> {
        let xi = self.multi_index(x);
        let yi = self.multi_index(y);
        (0..self.dim())
            .map(|k| {
                let raw = (yi[k] as f64 - xi[k] as f64) * self.spacing[k];
                match self.kind {
                    ModelKind::FlatTorus => math::wrap_centered(raw, self.extents[k]),
                    ModelKind::EuclideanBox => raw,
                }
            })
            .collect()
    }

    /// Geodesic distance between two grid points given by flat index.
    pub fn distance(&self, x: usize, y: usize) -> f64 {
        math::sqrt(self.displacement(x, y).iter().map(|d| d * d).sum())
    }

    pub fn geodesic_distance(&self, x: &GridPoint, y: &GridPoint) -> f64 {
        self.distance(self.flat_index(&x.index), self.flat_index(&y.index))
    }

    /// Whether a point lies in the region where fields may be nonzero
    /// (everything on the torus, the interior minus the margin on the box).
    pub fn in_support(&self, flat: usize) -> bool {
        match self.kind {
            ModelKind::FlatTorus => true,
            ModelKind::EuclideanBox => self
                .multi_index(flat)
                .iter()
                .zip(&self.grid)
                .all(|(&i, &g)| i >= BOX_MARGIN && i + BOX_MARGIN < g),
        }
    }

    /// Flat indices of all grid points within distance `< r` of `center`,
    /// in ascending order.
    pub fn ball(&self, center: usize, r: f64) -> Vec<usize> {
        let ci = self.multi_index(center);
        let reach: Vec<isize> = self
            .spacing
            .iter()
            .zip(&self.grid)
            .map(|(&h, &g)| (math::ceil(r / h) as isize).min(g as isize))
            .collect();
        let mut out = Vec::new();
        let mut offset = vec![0isize; self.dim()];
        for k in 0..self.dim() {
            offset[k] = -reach[k];
        }
        loop {
            let mut idx = vec![0usize; self.dim()];
            let mut valid = true;
            for k in 0..self.dim() {
                let j = ci[k] as isize + offset[k];
                let g = self.grid[k] as isize;
                idx[k] = match self.kind {
                    ModelKind::FlatTorus => j.rem_euclid(g) as usize,
                    ModelKind::EuclideanBox => {
                        if j < 0 || j >= g {
                            valid = false;
                            0
                        } else {
                            j as usize
                        }
                    }
                };
            }
            if valid {
                let p = self.flat_index(&idx);
                if self.distance(center, p) < r {
                    out.push(p);
                }
            }
            // odometer over the offset box
            let mut k = self.dim();
            loop {
                if k == 0 {
                    out.sort_unstable();
                    out.dedup();
                    return out;
                }
                k -= 1;
                if offset[k] < reach[k] {
                    offset[k] += 1;
                    break;
                }
                offset[k] = -reach[k];
            }
        }
    }

    /// Normal chart of radius `r` at `x`.
    pub fn normal_chart(&self, x: &GridPoint, r: f64) -> Result<Chart> {
        let center = self.flat_index(&x.index);
        self.chart_at(center, r)
    }

    pub fn chart_at(&self, center: usize, r: f64) -> Result<Chart> {
        if !(r > 0.0) || r >= self.injectivity_radius() {
            return Err(Error::OutOfRange(format!(
                "chart radius {r} must lie in (0, {})",
                self.injectivity_radius()
            )));
        }
        let domain = self.ball(center, r);
        let coords = domain.iter().map(|&p| self.displacement(center, p)).collect();
        Ok(Chart {
            center,
            radius: r,
            domain,
            coords,
        })
    }

    /// Second-order finite-difference de Rham derivative, entrywise for
    /// matrix fields: central differences, periodic on the torus and
    /// one-sided at the box edge.
    pub fn derham(&self, field: &OperatorField) -> CotangentField {
        let n = self.dim();
        let (rows, cols) = (field.rows(), field.cols());
        let mut partials = Vec::with_capacity(self.n_points() * n);
        for p in 0..self.n_points() {
            for k in 0..n {
                partials.push(self.partial_fd(field.values(), p, k));
            }
        }
        CotangentField::new(rows, cols, n, partials)
    }

    fn partial_fd(&self, values: &[CMatrix], p: usize, axis: usize) -> CMatrix {
        let h = self.spacing[axis];
        match (self.neighbor(p, axis, -1), self.neighbor(p, axis, 1)) {
            (Some(a), Some(b)) => (&values[b] - &values[a]).scale_real(0.5 / h),
            (None, Some(b)) => {
                let c = self.neighbor(p, axis, 2).expect("grid has at least 4 points per axis");
                let s = &(&values[b].scale_real(4.0) - &values[p].scale_real(3.0)) - &values[c];
                s.scale_real(0.5 / h)
            }
            (Some(a), None) => {
                let c = self.neighbor(p, axis, -2).expect("grid has at least 4 points per axis");
                let s = &(&values[p].scale_real(3.0) - &values[a].scale_real(4.0)) + &values[c];
                s.scale_real(0.5 / h)
            }
            (None, None) => unreachable!("axis with a single point"),
        }
    }

    /// Central differences on a partially defined field. A point gets a
    /// derivative only when it and both neighbors along every axis are defined.
    pub fn derham_partial(&self, values: &[Option<CMatrix>]) -> Vec<Option<Vec<CMatrix>>> {
        assert_eq!(values.len(), self.n_points(), "field must cover the grid");
        (0..self.n_points())
            .map(|p| {
                values[p].as_ref()?;
                (0..self.dim())
                    .map(|k| {
                        let a = self.neighbor(p, k, -1)?;
                        let b = self.neighbor(p, k, 1)?;
                        let (va, vb) = (values[a].as_ref()?, values[b].as_ref()?);
                        Some((vb - va).scale_real(0.5 / self.spacing[k]))
                    })
                    .collect()
            })
            .collect()
    }

    /// Largest entry of a field outside the support region. Zero on the torus.
    pub fn margin_leak(&self, field: &OperatorField) -> f64 {
        (0..self.n_points())
            .filter(|&p| !self.in_support(p))
            .map(|p| field.at(p).max_abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use core::f64::consts::PI;

    #[test]
    fn build_model_examples() {
        let m = ManifoldModel::new(ModelKind::FlatTorus, 1, &[2.0 * PI], &[64]).unwrap();
        assert!((m.spacing()[0] - 2.0 * PI / 64.0).abs() < 1e-15);
        assert!((m.injectivity_radius() - PI).abs() < 1e-15);
        let m2 = ManifoldModel::torus(&[2.0 * PI, 2.0 * PI], &[32, 32]).unwrap();
        assert!((m2.injectivity_radius() - PI).abs() < 1e-15);
        assert!(ManifoldModel::euclidean_box(&[4.0, 4.0], &[3, 3]).is_err());
        assert!(ManifoldModel::torus(&[-1.0], &[8]).is_err());
        assert!(ManifoldModel::new(ModelKind::FlatTorus, 2, &[1.0], &[8]).is_err());
    }

    #[test]
    fn distances() {
        let m = ManifoldModel::torus(&[2.0 * PI], &[400]).unwrap();
        // pi/2 is grid index 100
        assert!((m.distance(0, 100) - PI / 2.0).abs() < 1e-14);
        let h = m.spacing()[0];
        assert!((m.distance(1, 399) - 2.0 * h).abs() < 1e-14);
        let b = ManifoldModel::euclidean_box(&[10.0, 10.0], &[10, 10]).unwrap();
        let x = b.grid_point(&[0, 0]).unwrap();
        let y = b.grid_point(&[3, 4]).unwrap();
        assert!((b.geodesic_distance(&x, &y) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn wraparound_distance() {
        // d(0.1, 2π - 0.1) = 0.2 with grid points at those coordinates
        let l = 2.0 * PI;
        let n = 1000;
        let m = ManifoldModel::torus(&[l], &[n]).unwrap();
        let h = l / n as f64;
        let a = m.nearest_point(&[0.1]);
        let b = m.nearest_point(&[l - 0.1]);
        let exact = (a.coords[0] + l - b.coords[0]).abs();
        assert!((m.geodesic_distance(&a, &b) - exact).abs() < 1e-14);
        assert!((exact - 0.2).abs() <= h);
    }

    #[test]
    fn charts() {
        let m = ManifoldModel::torus(&[2.0 * PI], &[64]).unwrap();
        let x = m.point(0);
        let c = m.normal_chart(&x, PI / 4.0).unwrap();
        // points with |θ| < π/4: indices -7..=7
        assert_eq!(c.domain.len(), 15);
        assert!(c.contains(63) && c.contains(7) && !c.contains(8));
        assert!(m.normal_chart(&x, PI).is_err());
        let b = ManifoldModel::euclidean_box(&[1.0], &[10]).unwrap();
        let c = b.normal_chart(&b.point(0), 0.35).unwrap();
        assert_eq!(c.domain, vec![0, 1, 2, 3]);
    }

    #[test]
    fn derham_constant_is_zero_and_sine_converges() {
        let m = ManifoldModel::torus(&[2.0 * PI], &[256]).unwrap();
        let c = OperatorField::constant(&m, CMatrix::scalar(C64::new(2.0, -1.0)));
        let dc = m.derham(&c);
        assert!((0..m.n_points()).all(|p| dc.stacked(p).max_abs() < 1e-12));
        let f = OperatorField::from_fn(&m, 1, 1, |p| CMatrix::scalar(C64::new(math::sin(m.coords(p)[0]), 0.0)));
        let df = m.derham(&f);
        let h = m.spacing()[0];
        let err = (0..m.n_points())
            .map(|p| (df.partial(p, 0)[(0, 0)].re - math::cos(m.coords(p)[0])).abs())
            .fold(0.0, f64::max);
        assert!(err <= h * h, "err {err} vs h² {}", h * h);
    }

    #[test]
    fn box_one_sided_is_exact_for_quadratics() {
        let m = ManifoldModel::euclidean_box(&[1.0], &[10]).unwrap();
        let f = OperatorField::from_fn(&m, 1, 1, |p| {
            let x = m.coords(p)[0];
            CMatrix::scalar(C64::new(x * x, 0.0))
        });
        let df = m.derham(&f);
        for p in 0..10 {
            let x = m.coords(p)[0];
            assert!((df.partial(p, 0)[(0, 0)].re - 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn support_region_on_box() {
        let m = ManifoldModel::euclidean_box(&[1.0], &[10]).unwrap();
        let inside: Vec<usize> = (0..10).filter(|&p| m.in_support(p)).collect();
        assert_eq!(inside, vec![2, 3, 4, 5, 6, 7]);
    }
}
