//! Bounded partitions of unity with smooth square roots.
//!
//! Centers sit on a regular lattice of pitch at most `ε`. Each member is
//! `√χ_i = β_i / (Σ_j β_j²)^{1/2}` with `β_i(x) = ψ(d(x, y_i) / 2ε)` and
//! `ψ(t) = exp(-1/(1 - t²))`, so `supp √χ_i ⊆ B_{2ε}(y_i)` and `Σ χ_i = 1`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{C1Field, CotangentField, OperatorField};
use crate::linalg::{CMatrix, C64};
use crate::manifold::{GridPoint, ManifoldModel, ModelKind, BOX_MARGIN};
use crate::math;
use crate::report::CheckReport;

/// Bump profile `ψ(t) = exp(-1/(1 - t²))` for `|t| < 1`, zero otherwise.
pub fn bump_profile(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        math::exp(-1.0 / (1.0 - t * t))
    }
}

/// `ψ'(t) = ψ(t) · (-2t / (1 - t²)²)`.
pub fn bump_profile_deriv(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - t * t;
        bump_profile(t) * (-2.0 * t / (q * q))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOfUnity {
    pub epsilon: f64,
    /// Flat grid indices of the centers `y_i`.
    pub centers: Vec<usize>,
    /// `√χ_i` as scalar fields with analytic derivatives.
    pub sqrt_bumps: Vec<C1Field>,
    /// Largest number of members nonzero at one grid point.
    pub multiplicity: usize,
    /// `C_χ = sup_i ‖d√χ_i‖_∞` from the analytic derivatives.
    pub deriv_bound: f64,
    /// The same supremum measured with finite differences.
    pub deriv_bound_fd: f64,
}

impl PartitionOfUnity {
    pub fn len(&self) -> usize {
        self.sqrt_bumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sqrt_bumps.is_empty()
    }

    /// `√χ_i(x)`.
    pub fn sqrt_chi(&self, i: usize, p: usize) -> f64 {
        self.sqrt_bumps[i].value.at(p)[(0, 0)].re
    }

    /// `∂_k √χ_i(x)`.
    pub fn sqrt_chi_partial(&self, i: usize, p: usize, k: usize) -> f64 {
        self.sqrt_bumps[i].deriv.partial(p, k)[(0, 0)].re
    }

    /// Members with `√χ_i(x) > 0`.
    pub fn active(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.sqrt_chi(i, p) > 0.0)
    }

    pub fn center_points(&self, model: &ManifoldModel) -> Vec<GridPoint> {
        self.centers.iter().map(|&c| model.point(c)).collect()
    }

    /// `δ_χ = min_x max_j χ_j(x)` over the region where the partition sums to one.
    pub fn lower_bump_bound(&self, model: &ManifoldModel) -> f64 {
        (0..model.n_points())
            .filter(|&p| model.in_support(p))
            .map(|p| (0..self.len()).map(|i| self.sqrt_chi(i, p) * self.sqrt_chi(i, p)).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }

    /// `sup_i ‖dχ_i‖_∞` (derivative of `χ_i` itself, not of its square root).
    pub fn chi_deriv_bound(&self) -> f64 {
        self.sqrt_bumps
            .iter()
            .map(|s| {
                (0..s.len())
                    .map(|p| 2.0 * s.value.at(p)[(0, 0)].re.abs() * s.deriv.norm_at(p))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

fn check_epsilon(model: &ManifoldModel, eps: f64) -> Result<()> {
    let limit = model.injectivity_radius() / 2.0;
    if !(eps > 0.0 && eps.is_finite()) || eps > limit {
        return Err(Error::OutOfRange(format!("epsilon {eps} must lie in (0, {limit}]")));
    }
    Ok(())
}

/// Lattice centers whose `ε`-balls cover the torus, or the support region of the box.
pub fn ball_cover(model: &ManifoldModel, eps: f64) -> Result<Vec<GridPoint>> {
    check_epsilon(model, eps)?;
    let n = model.dim();
    let grid = model.grid_sizes();
    let mut counts: Vec<usize> = (0..n)
        .map(|k| match model.kind() {
            ModelKind::FlatTorus => math::ceil(model.extents()[k] / eps - 1e-9).max(1.0) as usize,
            ModelKind::EuclideanBox => {
                let width = (grid[k] - 1 - 2 * BOX_MARGIN) as f64 * model.spacing()[k];
                math::ceil(width / eps - 1e-9) as usize + 1
            }
        })
        .collect();
    loop {
        let axes: Vec<Vec<usize>> = (0..n).map(|k| axis_centers(model, k, counts[k])).collect();
        let centers = lattice(model, &axes);
        if covers(model, &centers, eps) {
            return Ok(centers.into_iter().map(|c| model.point(c)).collect());
        }
        if counts.iter().zip(grid).all(|(&c, &g)| c >= g) {
            return Err(Error::DegeneratePartition(format!("no lattice of balls of radius {eps} covers the grid")));
        }
        for (c, &g) in counts.iter_mut().zip(grid) {
            *c = (*c + 1).min(g);
        }
    }
}

fn axis_centers(model: &ManifoldModel, k: usize, count: usize) -> Vec<usize> {
    let g = model.grid_sizes()[k];
    let mut idx: Vec<usize> = match model.kind() {
        ModelKind::FlatTorus => (0..count)
            .map(|j| (math::round(j as f64 * g as f64 / count as f64) as usize) % g)
            .collect(),
        ModelKind::EuclideanBox => {
            let (lo, hi) = (BOX_MARGIN as f64, (g - 1 - BOX_MARGIN) as f64);
            if count <= 1 {
                vec![math::round((lo + hi) / 2.0) as usize]
            } else {
                (0..count)
                    .map(|j| math::round(lo + j as f64 * (hi - lo) / (count - 1) as f64) as usize)
                    .collect()
            }
        }
    };
    idx.dedup();
    idx
}

fn lattice(model: &ManifoldModel, axes: &[Vec<usize>]) -> Vec<usize> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out.iter().map(|idx| model.flat_index(idx)).collect()
}

fn covers(model: &ManifoldModel, centers: &[usize], eps: f64) -> bool {
    (0..model.n_points())
        .filter(|&p| model.in_support(p))
        .all(|p| centers.iter().any(|&c| model.distance(c, p) < eps))
}

/// Normalized bump family on the given centers.
pub fn build_partition(model: &ManifoldModel, centers: &[GridPoint], eps: f64) -> Result<PartitionOfUnity> {
    check_epsilon(model, eps)?;
    if centers.is_empty() {
        return Err(Error::DegeneratePartition("no centers".into()));
    }
    let flat: Vec<usize> = centers.iter().map(|c| model.flat_index(&c.index)).collect();
    let (n, np, m) = (model.dim(), model.n_points(), flat.len());
    let scale = 2.0 * eps;
    let mut values = vec![Vec::with_capacity(np); m];
    let mut partials = vec![Vec::with_capacity(np * n); m];
    let mut beta = vec![0.0; m];
    let mut dbeta = vec![vec![0.0; n]; m];
    for p in 0..np {
        let mut s2 = 0.0;
        let mut bdb = vec![0.0; n];
        for (i, &c) in flat.iter().enumerate() {
            let disp = model.displacement(c, p);
            let rho = math::sqrt(disp.iter().map(|d| d * d).sum()) / scale;
            beta[i] = bump_profile(rho);
            // dβ/dx_k = ψ'(ρ)·Δ_k/(|Δ|·2ε), written without the 0/0 at the center
            let q = 1.0 - rho * rho;
            for k in 0..n {
                dbeta[i][k] = if beta[i] > 0.0 {
                    -2.0 * beta[i] * disp[k] / (scale * scale * q * q)
                } else {
                    0.0
                };
                bdb[k] += beta[i] * dbeta[i][k];
            }
            s2 += beta[i] * beta[i];
        }
        if s2 <= 0.0 && model.in_support(p) {
            return Err(Error::DegeneratePartition(format!(
                "bumps vanish at grid point {:?}",
                model.multi_index(p)
            )));
        }
        let s = math::sqrt(s2);
        for i in 0..m {
            let (v, d): (f64, Vec<f64>) = if s2 > 0.0 {
                (
                    beta[i] / s,
                    (0..n).map(|k| dbeta[i][k] / s - beta[i] * bdb[k] / (s2 * s)).collect(),
                )
            } else {
                (0.0, vec![0.0; n])
            };
            values[i].push(CMatrix::scalar(C64::new(v, 0.0)));
            partials[i].extend(d.into_iter().map(|x| CMatrix::scalar(C64::new(x, 0.0))));
        }
    }
    let sqrt_bumps: Vec<C1Field> = values
        .into_iter()
        .zip(partials)
        .map(|(v, d)| C1Field {
            value: OperatorField::new(1, 1, v).expect("scalar values"),
            deriv: CotangentField::new(1, 1, n, d),
        })
        .collect();
    let multiplicity = (0..np)
        .map(|p| sqrt_bumps.iter().filter(|s| s.value.at(p)[(0, 0)].re > 0.0).count())
        .max()
        .unwrap_or(0);
    let deriv_bound = sqrt_bumps.iter().map(|s| s.deriv.sup_norm()).fold(0.0, f64::max);
    let deriv_bound_fd = sqrt_bumps
        .iter()
        .map(|s| model.derham(&s.value).sup_norm())
        .fold(0.0, f64::max);
    Ok(PartitionOfUnity {
        epsilon: eps,
        centers: flat,
        sqrt_bumps,
        multiplicity,
        deriv_bound,
        deriv_bound_fd,
    })
}

/// Tolerance for comparing finite-difference and analytic derivative
/// bounds of the bump family: `h²` times a bound on the third derivative.
pub fn fd_tolerance(model: &ManifoldModel, eps: f64) -> f64 {
    let h = model.max_spacing();
    let t = h / eps;
    50.0 * t * t / eps
}

/// Measures the defining properties of a bounded partition of unity.
pub fn verify_partition(model: &ManifoldModel, partition: &PartitionOfUnity) -> CheckReport {
    let mut report = CheckReport::new();
    let np = model.n_points();
    let mut sum_err: f64 = 0.0;
    let mut range_err: f64 = 0.0;
    let mut escape: f64 = 0.0;
    let mut multiplicity = 0;
    for p in 0..np {
        let mut sum = 0.0;
        let mut active = 0;
        for (i, &c) in partition.centers.iter().enumerate() {
            let v = partition.sqrt_chi(i, p);
            let chi = v * v;
            sum += chi;
            range_err = range_err.max(-chi).max(chi - 1.0);
            if v != 0.0 {
                active += 1;
                if model.distance(c, p) >= 2.0 * partition.epsilon {
                    escape = escape.max(v.abs());
                }
            }
        }
        multiplicity = multiplicity.max(active);
        if model.in_support(p) {
            sum_err = sum_err.max((sum - 1.0).abs());
        }
    }
    report
        .at_most("partition.sum", "Σ_i χ_i(x) = 1", sum_err, 1e-12, 0.0)
        .at_most("partition.support", "supp √χ_i ⊆ B_{2ε}(y_i)", escape, 0.0, 0.0)
        .at_most("partition.range", "χ_i(x) ∈ [0, 1]", range_err, 0.0, 1e-12)
        .at_most(
            "partition.multiplicity",
            "#{i : x ∈ supp χ_i} ≤ K",
            multiplicity as f64,
            partition.multiplicity as f64,
            0.0,
        )
        .at_most(
            "partition.deriv_bound",
            "C_χ = sup_i ‖d√χ_i‖_∞ < ∞ (finite differences vs analytic)",
            (partition.deriv_bound_fd - partition.deriv_bound).abs(),
            0.0,
            fd_tolerance(model, partition.epsilon),
        );
    report
}
