//! The image bundle of a projection-valued field `𝒫`.
//!
//! Around each chart center `x` the fibers `Im 𝒫(y)` are identified with
//! `Im 𝒫(x)` by `W_x(y) = 𝒫(y) ι Λ(y)^{-1/2}`, where `ι` is an orthonormal
//! basis of `Im 𝒫(x)` and `Λ(y) = ι* 𝒫(y) ι` is the Gram operator. On
//! overlaps the transitions are `τ_ij = W_i* W_j`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{C1Field, CotangentField, OperatorField};
use crate::fourier::{random_projection, random_unitary};
use crate::invsqrt::{inv_sqrt_eig, inv_sqrt_quad, relative_error};
use crate::linalg::{eigh, orthonormal_column_basis, CMatrix, I};
use crate::manifold::ManifoldModel;
use crate::math;
use crate::partition::PartitionOfUnity;
use crate::report::CheckReport;
use crate::stabilize::BundleSpec;

/// Identity tolerance for the linear-algebra checks of this module.
pub const LINALG_TOL: f64 = 1e-8;

/// A field of orthogonal projections of constant rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionField {
    pub field: C1Field,
    pub rank: usize,
    /// `D_P = sup_x ‖(d𝒫)(x)‖`.
    pub d_p: f64,
}

impl ProjectionField {
    /// Validates `𝒫² = 𝒫 = 𝒫*` to `tol` and constant rank.
    pub fn new(field: C1Field, tol: f64) -> Result<Self> {
        if !field.value.at(0).is_square() {
            return Err(Error::ShapeMismatch("projection field must be square".into()));
        }
        let mut rank = None;
        for p in 0..field.len() {
            let m = field.at(p);
            let defect = (m * m).max_abs_diff(m).max(m.hermitian_defect());
            if defect > tol {
                return Err(Error::InvalidModel(format!("not a projection at grid point {p}: defect {defect:e}")));
            }
            let r = math::round(m.trace().re) as usize;
            match rank {
                None => rank = Some(r),
                Some(r0) if r0 != r => {
                    return Err(Error::InvalidModel(format!("rank changes from {r0} to {r}")));
                }
                _ => {}
            }
        }
        let d_p = field.deriv.sup_norm();
        Ok(Self {
            field,
            rank: rank.unwrap_or(0),
            d_p,
        })
    }

    pub fn dim(&self) -> usize {
        self.field.rows()
    }

    pub fn at(&self, p: usize) -> &CMatrix {
        self.field.at(p)
    }

    pub fn constant(model: &ManifoldModel, p0: CMatrix) -> Result<Self> {
        Self::new(C1Field::constant(model, p0), LINALG_TOL)
    }

    /// `𝒫(x) = U(x) P₀ U(x)*` with `U(x) = Π_k exp(i (2π/L_k) x_k H_k)`.
    /// Each `H_k` must be hermitian with integer eigenvalues so that `𝒫` is periodic.
    pub fn rotating(model: &ManifoldModel, p0: &CMatrix, generators: &[CMatrix]) -> Result<Self> {
        let n = model.dim();
        if generators.len() != n {
            return Err(Error::ShapeMismatch(format!("need {n} generators, got {}", generators.len())));
        }
        let d = p0.rows();
        let mut eig = Vec::with_capacity(n);
        for h in generators {
            let (vals, vecs) = eigh(h)?;
            if vals.iter().any(|v| (v - math::round(*v)).abs() > 1e-9) {
                return Err(Error::InvalidModel("rotation generators need integer eigenvalues".into()));
            }
            eig.push((vals, vecs));
        }
        let freq: Vec<f64> = model.extents().iter().map(|l| 2.0 * core::f64::consts::PI / l).collect();
        let mut values = Vec::with_capacity(model.n_points());
        let mut partials = Vec::with_capacity(model.n_points() * n);
        for p in 0..model.n_points() {
            let x = model.coords(p);
            let factors: Vec<CMatrix> = (0..n)
                .map(|k| {
                    let (vals, vecs) = &eig[k];
                    crate::linalg::spectral_apply(vals, vecs, |l| math::cis(freq[k] * x[k] * l))
                })
                .collect();
            let product = |skip: Option<usize>| {
                let mut u = CMatrix::identity(d);
                for (k, f) in factors.iter().enumerate() {
                    u = &u * f;
                    if skip == Some(k) {
                        u = &u * &generators[k].scale(I * freq[k]);
                    }
                }
                u
            };
            let u = product(None);
            let value = &(&u * p0) * &u.adjoint();
            for k in 0..n {
                let du = product(Some(k));
                let a = &(&du * p0) * &u.adjoint();
                partials.push(&a + &a.adjoint());
            }
            values.push(value);
        }
        let field = C1Field::new(OperatorField::new(d, d, values)?, CotangentField::new(d, d, n, partials))?;
        Self::new(field, LINALG_TOL)
    }

    /// Rotating field with a random rank-`rank` projection in `C^d` and
    /// random generators with integer eigenvalues in `[-max_freq, max_freq]`.
    pub fn random_rotating<R: Rng + ?Sized>(
        rng: &mut R,
        model: &ManifoldModel,
        d: usize,
        rank: usize,
        max_freq: i32,
    ) -> Result<Self> {
        let p0 = random_projection(rng, d, rank);
        let generators: Vec<CMatrix> = (0..model.dim())
            .map(|_| {
                let v = random_unitary(rng, d);
                let f: Vec<f64> = (0..d).map(|_| rng.gen_range(-max_freq..=max_freq) as f64).collect();
                &(&v * &CMatrix::diag_real(&f)) * &v.adjoint()
            })
            .collect();
        Self::rotating(model, &p0, &generators)
    }

    /// Rank-one projection in `C²` turning at `omega` half-turns per period
    /// along the first axis, with `D_P = omega·π/L`.
    pub fn spinning_line(model: &ManifoldModel, omega: i32) -> Result<Self> {
        // ω·|+⟩⟨+| has integer eigenvalues 0 and ω
        let plus = CMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).scale_real(omega as f64);
        let p0 = CMatrix::diag_real(&[1.0, 0.0]);
        let mut generators = vec![plus];
        for _ in 1..model.dim() {
            generators.push(CMatrix::zeros(2, 2));
        }
        Self::rotating(model, &p0, &generators)
    }
}

/// `r = 0.9·min(s, 1/(4γ D_P))` with `γ = sup‖g_φ‖^{1/2} = 1` on flat models.
/// For a constant field, `min(s, 0.9·r_inj)`.
pub fn select_radius(model: &ManifoldModel, projection: &ProjectionField, s: f64) -> f64 {
    let gamma = 1.0;
    let r_inj = model.injectivity_radius();
    if projection.d_p <= 0.0 {
        return s.min(0.9 * r_inj);
    }
    let r = 0.9 * s.min(1.0 / (4.0 * gamma * projection.d_p));
    r.min(0.9 * r_inj)
}

/// `‖𝒫(y) - 𝒫(x)‖` against `d(x, y)` on one chart.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisproProfile {
    pub center: usize,
    pub rows: Vec<(f64, f64)>,
}

/// Measures `max_{y,z ∈ U_x} ‖𝒫(y) - 𝒫(z)‖ < 1/2` over the given chart
/// centers, and the mean-value estimate
/// `‖𝒫(y) - 𝒫(z)‖ ≤ ‖φ(y) - φ(z)‖·sup‖d𝒫‖·sup‖g‖^{1/2}`.
pub fn dispro_check(model: &ManifoldModel, projection: &ProjectionField, r: f64, centers: &[usize]) -> (CheckReport, DisproProfile) {
    let mut worst: f64 = 0.0;
    let mut mean_value: f64 = 0.0;
    let mut profile = DisproProfile::default();
    for (c_idx, &x) in centers.iter().enumerate() {
        let domain = model.ball(x, r);
        let coords: Vec<Vec<f64>> = domain.iter().map(|&y| model.displacement(x, y)).collect();
        let sup_dp = domain
            .iter()
            .map(|&y| projection.field.deriv.norm_at(y))
            .fold(0.0, f64::max);
        for a in 0..domain.len() {
            for b in a + 1..domain.len() {
                let dist = (projection.at(domain[a]) - projection.at(domain[b])).op_norm();
                worst = worst.max(dist);
                let chord = math::sqrt(coords[a].iter().zip(&coords[b]).map(|(u, v)| (u - v) * (u - v)).sum());
                if sup_dp > 0.0 {
                    mean_value = mean_value.max(dist / (chord * sup_dp));
                } else {
                    mean_value = mean_value.max(if dist > 0.0 { f64::INFINITY } else { 0.0 });
                }
            }
        }
        if c_idx == 0 {
            profile.center = x;
            profile.rows = domain
                .iter()
                .map(|&y| (model.distance(x, y), (projection.at(y) - projection.at(x)).op_norm()))
                .collect();
            profile.rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        }
    }
    let h = model.max_spacing();
    let mut report = CheckReport::new();
    report
        .below("image.chart_distance", "‖𝒫(y) - 𝒫(z)‖ < 1/2 on U_x", worst, 0.5)
        .at_most(
            "image.mean_value",
            "‖𝒫(y) - 𝒫(z)‖ ≤ ‖φ(y) - φ(z)‖·sup‖d𝒫‖·sup‖g‖^{1/2}",
            mean_value,
            1.0,
            fd_tolerance(h, projection.d_p),
        );
    (report, profile)
}

/// Allowance for finite-difference error and grid sampling of suprema:
/// `h²·max(1, D_P)³`.
pub fn fd_tolerance(h: f64, d_p: f64) -> f64 {
    let s = d_p.max(1.0);
    h * h * s * s * s
}

/// The unitary identification `W_x` on one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartFrame {
    pub center: usize,
    pub radius: f64,
    /// Orthonormal basis of `Im 𝒫(x)`, `d × k`.
    pub iota: CMatrix,
    /// Grid points of `U_x`, ascending.
    pub domain: Vec<usize>,
    /// `W_x(y)` indexed by grid point; present on a slightly enlarged ball.
    pub w: Vec<Option<CMatrix>>,
    /// Finite-difference partials of `W_x`, present on `U_x`.
    pub dw: Vec<Option<Vec<CMatrix>>>,
    pub report: CheckReport,
}

impl ChartFrame {
    pub fn contains(&self, p: usize) -> bool {
        self.domain.binary_search(&p).is_ok()
    }
}

/// Builds `W_x(y) = 𝒫(y) ι Λ(y)^{-1/2}` on `U_{x,r}` and checks that it is an
/// isometry onto `Im 𝒫(y)` with the derivative bounds of the construction.
/// `quad_nodes` adds a cross-check of `Λ^{-1/2}` by quadrature.
pub fn build_w(model: &ManifoldModel, projection: &ProjectionField, x: usize, r: f64, quad_nodes: Option<usize>) -> Result<ChartFrame> {
    let np = model.n_points();
    let k = projection.rank;
    let iota = orthonormal_column_basis(projection.at(x), 1e-8);
    if iota.cols() != k {
        return Err(Error::InvalidModel(format!(
            "image at the chart center has dimension {} instead of {k}",
            iota.cols()
        )));
    }
    let domain = model.ball(x, r);
    let h = model.max_spacing();
    let extended = model.ball(x, r + 1.01 * h);
    let mut w = vec![None; np];
    let mut inv_sqrt = vec![None; np];
    let mut lambda_inv_max: f64 = 0.0;
    let mut lambda_inv32_max: f64 = 0.0;
    let mut d_lambda_max: f64 = 0.0;
    let mut quad_err: f64 = 0.0;
    for &y in &extended {
        let py = projection.at(y);
        let lambda = iota.adjoint_mul(&(py * &iota));
        let (vals, _) = eigh(&lambda)?;
        let lmin = vals[0];
        if !(lmin > 0.0) {
            return Err(Error::NotPositiveDefinite(lmin));
        }
        let s = inv_sqrt_eig(&lambda)?;
        let in_chart = domain.binary_search(&y).is_ok();
        if in_chart {
            lambda_inv_max = lambda_inv_max.max(1.0 / lmin);
            lambda_inv32_max = lambda_inv32_max.max(math::pow(lmin, -1.5));
            let dl: Vec<CMatrix> = (0..model.dim())
                .map(|a| iota.adjoint_mul(&(projection.field.deriv.partial(y, a) * &iota)))
                .collect();
            d_lambda_max = d_lambda_max.max(CMatrix::vstack(&dl).op_norm());
            if let Some(nodes) = quad_nodes {
                quad_err = quad_err.max(relative_error(&inv_sqrt_quad(&lambda, nodes)?, &s));
            }
        }
        w[y] = Some(&(py * &iota) * &s);
        inv_sqrt[y] = Some(s);
    }
    let dw_all = model.derham_partial(&w);
    let dinv_all = model.derham_partial(&inv_sqrt);
    let mut dw = vec![None; np];
    let (mut iso, mut onto, mut dw_max, mut dw_adj_max, mut dinv_max): (f64, f64, f64, f64, f64) =
        (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut sup_dp: f64 = 0.0;
    for &y in &domain {
        let wy = w[y].as_ref().expect("extended ball contains the chart");
        iso = iso.max(wy.isometry_defect());
        onto = onto.max((wy * &wy.adjoint()).max_abs_diff(projection.at(y)));
        sup_dp = sup_dp.max(projection.field.deriv.norm_at(y));
        let partials = dw_all[y]
            .clone()
            .ok_or_else(|| Error::InvalidModel("chart neighbors fall outside the extended ball".into()))?;
        dw_max = dw_max.max(CMatrix::vstack(&partials).op_norm());
        let adj: Vec<CMatrix> = partials.iter().map(CMatrix::adjoint).collect();
        dw_adj_max = dw_adj_max.max(CMatrix::vstack(&adj).op_norm());
        if let Some(di) = &dinv_all[y] {
            dinv_max = dinv_max.max(CMatrix::vstack(di).op_norm());
        }
        dw[y] = Some(partials);
    }
    let tol = fd_tolerance(h, projection.d_p);
    let bound_w = 3.0 * core::f64::consts::SQRT_2 * sup_dp;
    let mut report = CheckReport::new();
    report
        .below("image.gram_inverse", "‖Λ(y)^{-1}‖ < 2", lambda_inv_max, 2.0)
        .at_most("image.w_isometry", "W_x(y)*W_x(y) = 1", iso, 0.0, LINALG_TOL)
        .at_most("image.w_onto", "W_x(y)W_x(y)* = 𝒫(y)", onto, 0.0, LINALG_TOL)
        .at_most("image.dw", "‖d(ιW_x)(y)‖ ≤ 3√2·sup‖d𝒫‖", dw_max, bound_w, tol)
        .at_most("image.dw_adjoint", "‖d(ιW_x)*(y)‖ ≤ 3√2·sup‖d𝒫‖", dw_adj_max, bound_w, tol)
        .at_most(
            "image.inv_sqrt_derivative",
            "sup‖d(Λ^{-1/2})‖ ≤ sup‖dΛ‖·sup‖Λ^{-3/2}‖",
            dinv_max,
            d_lambda_max * lambda_inv32_max,
            tol,
        );
    if quad_nodes.is_some() {
        report.at_most(
            "image.inv_sqrt_quadrature",
            "quadrature Λ^{-1/2} = eigendecomposition Λ^{-1/2}",
            quad_err,
            0.0,
            LINALG_TOL,
        );
    }
    Ok(ChartFrame {
        center: x,
        radius: r,
        iota,
        domain,
        w,
        dw,
        report,
    })
}

/// Bundle structure on `Im 𝒫` together with its chart frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBundle {
    pub bundle: BundleSpec,
    pub frames: Vec<ChartFrame>,
    pub report: CheckReport,
}

/// Frames on every partition center with radius `r`, transitions
/// `τ_ij = W_i* W_j`, and the bundle checks including `C_τ ≤ 6√2·D_P`.
pub fn image_bundle(
    model: &ManifoldModel,
    projection: &ProjectionField,
    r: f64,
    partition: &PartitionOfUnity,
    quad_nodes: Option<usize>,
) -> Result<ImageBundle> {
    if 2.0 * partition.epsilon > r {
        return Err(Error::Incompatible(format!(
            "partition supports of radius {} do not fit in charts of radius {r}",
            2.0 * partition.epsilon
        )));
    }
    let (mut report, _) = dispro_check(model, projection, r, &partition.centers);
    let mut frames = Vec::with_capacity(partition.len());
    let mut chart_checks = CheckReport::new();
    for &c in &partition.centers {
        let f = build_w(model, projection, c, r, quad_nodes)?;
        chart_checks.merge_worst(&f.report);
        frames.push(f);
    }
    report.merge(chart_checks);

    let m = frames.len();
    let k = projection.rank;
    let n = model.dim();
    let np = model.n_points();
    let domains: Vec<Vec<bool>> = frames
        .iter()
        .map(|f| {
            let mut mask = vec![false; np];
            for &p in &f.domain {
                mask[p] = true;
            }
            mask
        })
        .collect();
    let mut transitions = Vec::with_capacity(m * m);
    let mut chain: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let overlap: Vec<usize> = frames[i].domain.iter().copied().filter(|&p| domains[j][p]).collect();
            if overlap.is_empty() {
                transitions.push(None);
                continue;
            }
            let mut values = vec![CMatrix::zeros(k, k); np];
            let mut partials = vec![CMatrix::zeros(k, k); np * n];
            for &p in &overlap {
                let wi = frames[i].w[p].as_ref().expect("frame covers its chart");
                let wj = frames[j].w[p].as_ref().expect("frame covers its chart");
                let dwi = frames[i].dw[p].as_ref().expect("frame derivative covers its chart");
                let dwj = frames[j].dw[p].as_ref().expect("frame derivative covers its chart");
                values[p] = wi.adjoint_mul(wj);
                for a in 0..n {
                    let mut d = dwi[a].adjoint_mul(wj);
                    d += &wi.adjoint_mul(&dwj[a]);
                    partials[p * n + a] = d;
                }
                let dtau = CMatrix::vstack(&partials[p * n..(p + 1) * n]).op_norm();
                let adj_i: Vec<CMatrix> = dwi.iter().map(CMatrix::adjoint).collect();
                let rhs = CMatrix::vstack(&adj_i).op_norm() + CMatrix::vstack(dwj).op_norm();
                chain = chain.max(dtau - rhs);
            }
            transitions.push(Some(C1Field::new(
                OperatorField::new(k, k, values)?,
                CotangentField::new(k, k, n, partials),
            )?));
        }
    }
    let bundle = BundleSpec::from_parts(partition.centers.clone(), r, k, domains, transitions)?;
    report.merge(bundle.validate(LINALG_TOL));
    let tol = fd_tolerance(model.max_spacing(), projection.d_p);
    report
        .at_most(
            "image.transition_chain",
            "‖dτ_xy(z)‖ ≤ ‖d(ιW_x)*(z)‖ + ‖d(ιW_y)(z)‖",
            chain,
            0.0,
            LINALG_TOL,
        )
        .at_most(
            "image.c_tau",
            "C_τ ≤ 6√2·sup‖d𝒫‖",
            bundle.c_tau,
            6.0 * core::f64::consts::SQRT_2 * projection.d_p,
            tol,
        );
    Ok(ImageBundle {
        bundle,
        frames,
        report,
    })
}
