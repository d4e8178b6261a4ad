//! Stabilization of a Hilbert bundle: the embedding `Φ` of sections into
//! `C¹₀(M, H^m)`, its left inverse `Ψ`, and the projection `P = Φ∘Ψ`.
//!
//! Sections of a bundle are represented by compatible local data: one
//! `d × 1` field `s_i` per chart with `s_i = τ_ij s_j` on every overlap.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{C1Field, CotangentField, OperatorField};
use crate::fourier::{random_hermitian, FourierField};
use crate::linalg::{eigh, CMatrix, C64, I};
use crate::manifold::ManifoldModel;
use crate::math;
use crate::partition::PartitionOfUnity;
use crate::report::CheckReport;
use crate::stdmodule::Section;

/// Default tolerance for the algebraic identities of a bundle.
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// Cover, chart domains and unitary transition fields of a bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleSpec {
    pub centers: Vec<usize>,
    pub radius: f64,
    pub fiber_dim: usize,
    /// `domains[i][p]` is true when grid point `p` lies in `U_i`.
    pub domains: Vec<Vec<bool>>,
    /// `τ_ij` at index `i·m + j`, present when `U_i ∩ U_j` is nonempty.
    /// Only values on the overlap are meaningful.
    transitions: Vec<Option<C1Field>>,
    /// `C_τ = sup_{i,j} sup_{U_i ∩ U_j} ‖dτ_ij‖`.
    pub c_tau: f64,
}

/// Supplies transition fields for [`make_bundle`].
pub trait TransitionSource {
    fn fiber_dim(&self) -> usize;
    /// `τ_ij` sampled on the whole grid; only overlap values are used.
    fn transition(&self, i: usize, j: usize) -> Result<C1Field>;
}

/// Chart membership masks for balls of the given radius.
pub fn chart_domains(model: &ManifoldModel, centers: &[usize], radius: f64) -> Vec<Vec<bool>> {
    centers
        .iter()
        .map(|&c| {
            let mut mask = vec![false; model.n_points()];
            for p in model.ball(c, radius) {
                mask[p] = true;
            }
            mask
        })
        .collect()
}

impl BundleSpec {
    /// Assemble a bundle from transition fields. Validation is left to [`BundleSpec::validate`].
    pub fn from_parts(
        centers: Vec<usize>,
        radius: f64,
        fiber_dim: usize,
        domains: Vec<Vec<bool>>,
        transitions: Vec<Option<C1Field>>,
    ) -> Result<Self> {
        let m = centers.len();
        if domains.len() != m || transitions.len() != m * m {
            return Err(Error::ShapeMismatch(format!(
                "{m} charts need {m} domains and {} transitions",
                m * m
            )));
        }
        if let Some(t) = transitions.iter().flatten().find(|t| t.value.shape() != (fiber_dim, fiber_dim)) {
            return Err(Error::ShapeMismatch(format!(
                "transition of shape {}x{} in a bundle of rank {fiber_dim}",
                t.rows(),
                t.cols()
            )));
        }
        let mut b = Self {
            centers,
            radius,
            fiber_dim,
            domains,
            transitions,
            c_tau: 0.0,
        };
        b.c_tau = b.measure_c_tau();
        Ok(b)
    }

    pub fn m(&self) -> usize {
        self.centers.len()
    }

    pub fn in_chart(&self, i: usize, p: usize) -> bool {
        self.domains[i][p]
    }

    pub fn overlap(&self, i: usize, j: usize, p: usize) -> bool {
        self.domains[i][p] && self.domains[j][p]
    }

    pub fn transition(&self, i: usize, j: usize) -> Option<&C1Field> {
        self.transitions[i * self.m() + j].as_ref()
    }

    /// Charts containing `p`.
    pub fn charts_at(&self, p: usize) -> Vec<usize> {
        (0..self.m()).filter(|&i| self.domains[i][p]).collect()
    }

    fn measure_c_tau(&self) -> f64 {
        let m = self.m();
        let mut c: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                if let Some(t) = self.transition(i, j) {
                    for p in 0..t.len() {
                        if self.overlap(i, j, p) {
                            c = c.max(t.deriv.norm_at(p));
                        }
                    }
                }
            }
        }
        c
    }

    /// Unitarity, `τ_ii = 1`, `τ_ij = τ_ji*` and the cocycle identity on all
    /// overlaps, with the measured `C_τ`.
    pub fn validate(&self, tol: f64) -> CheckReport {
        let id = CMatrix::identity(self.fiber_dim);
        let np = self.domains.first().map_or(0, Vec::len);
        let (mut unit, mut diag, mut sym, mut cocycle): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        let mut missing = false;
        for p in 0..np {
            let charts = self.charts_at(p);
            for &i in &charts {
                for &j in &charts {
                    let Some(tij) = self.transition(i, j) else {
                        missing = true;
                        continue;
                    };
                    let t = tij.at(p);
                    unit = unit.max(t.isometry_defect());
                    if i == j {
                        diag = diag.max(t.max_abs_diff(&id));
                    }
                    if let Some(tji) = self.transition(j, i) {
                        sym = sym.max(t.max_abs_diff(&tji.at(p).adjoint()));
                    }
                    for &k in &charts {
                        if let (Some(tjk), Some(tik)) = (self.transition(j, k), self.transition(i, k)) {
                            cocycle = cocycle.max((t * tjk.at(p)).max_abs_diff(tik.at(p)));
                        }
                    }
                }
            }
        }
        let mut r = CheckReport::new();
        r.at_most("bundle.unitary", "‖τ_ij*τ_ij - 1‖ = 0", unit, 0.0, tol)
            .at_most("bundle.identity", "τ_ii = 1", diag, 0.0, tol)
            .at_most("bundle.symmetric", "τ_ij = τ_ji*", sym, 0.0, tol)
            .at_most("bundle.cocycle", "τ_ij·τ_jk = τ_ik", cocycle, 0.0, tol)
            .at_most(
                "bundle.complete",
                "τ_ij defined on every overlap",
                if missing { 1.0 } else { 0.0 },
                0.0,
                0.0,
            )
            .below("bundle.c_tau_finite", "C_τ = sup‖dτ_ij‖ < ∞", self.c_tau, f64::INFINITY);
        r
    }
}

/// Builds a bundle over the partition's cover with chart radius `2ε`,
/// rejecting transitions that are not unitary cocycles.
pub fn make_bundle(model: &ManifoldModel, partition: &PartitionOfUnity, source: &dyn TransitionSource) -> Result<BundleSpec> {
    let radius = 2.0 * partition.epsilon;
    if radius >= model.injectivity_radius() {
        return Err(Error::OutOfRange(format!(
            "chart radius 2ε = {radius} must be below the injectivity radius {}",
            model.injectivity_radius()
        )));
    }
    let m = partition.len();
    let domains = chart_domains(model, &partition.centers, radius);
    let mut transitions = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let meets = domains[i].iter().zip(&domains[j]).any(|(a, b)| *a && *b);
            transitions.push(if meets { Some(source.transition(i, j)?) } else { None });
        }
    }
    let bundle = BundleSpec::from_parts(partition.centers.clone(), radius, source.fiber_dim(), domains, transitions)?;
    let report = bundle.validate(ALGEBRAIC_TOL);
    if let Some(c) = report.failures().next() {
        return Err(Error::InvalidTransition(format!("{} reaches {:e}", c.name, c.measured)));
    }
    Ok(bundle)
}

/// Global gauge `u_i: M → U(d)`, one per chart, with transitions `τ_ij = u_i u_j*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gauge {
    pub unitaries: Vec<C1Field>,
}

impl Gauge {
    pub fn trivial(model: &ManifoldModel, m: usize, d: usize) -> Self {
        Self {
            unitaries: vec![C1Field::constant(model, CMatrix::identity(d)); m],
        }
    }

    /// `u_i(z) = exp(i θ_i(z) A_i)` with `θ_i` a random real trigonometric
    /// polynomial and `A_i` a random hermitian matrix of norm about `amplitude`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        model: &ManifoldModel,
        m: usize,
        d: usize,
        degree: u32,
        amplitude: f64,
    ) -> Result<Self> {
        let unitaries = (0..m)
            .map(|_| {
                let a = random_hermitian(rng, d);
                let norm = a.op_norm().max(1e-12);
                let theta = FourierField::random(rng, model, 1, 1, degree).sample(model);
                exp_i_theta(model, &a.scale_real(amplitude / norm), &theta)
            })
            .collect::<Result<_>>()?;
        Ok(Self { unitaries })
    }

    /// Compatible local data `s_i = u_i g` of a global trivialized section `g`.
    pub fn local_data(&self, g: &Section) -> Result<Vec<Section>> {
        self.unitaries
            .iter()
            .map(|u| Section::new(u.mul(g.field())?))
            .collect()
    }
}

impl TransitionSource for Gauge {
    fn fiber_dim(&self) -> usize {
        self.unitaries.first().map_or(0, C1Field::rows)
    }

    fn transition(&self, i: usize, j: usize) -> Result<C1Field> {
        self.unitaries[i].mul(&self.unitaries[j].adjoint())
    }
}

/// Arbitrary transition fields given directly, `i·m + j` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitTransitions {
    pub fiber_dim: usize,
    pub m: usize,
    pub fields: Vec<C1Field>,
}

impl TransitionSource for ExplicitTransitions {
    fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    fn transition(&self, i: usize, j: usize) -> Result<C1Field> {
        Ok(self.fields[i * self.m + j].clone())
    }
}

/// `exp(i θ(z) A)` for hermitian `A` and the real part of the scalar field
/// `θ`, with `d exp(iθA) = i dθ A exp(iθA)`.
pub fn exp_i_theta(model: &ManifoldModel, a: &CMatrix, theta: &C1Field) -> Result<C1Field> {
    let (vals, vecs) = eigh(a)?;
    let d = a.rows();
    let n = model.dim();
    let mut values = Vec::with_capacity(model.n_points());
    let mut partials = Vec::with_capacity(model.n_points() * n);
    for p in 0..model.n_points() {
        let th = theta.at(p)[(0, 0)].re;
        let phases: Vec<C64> = vals.iter().map(|&l| math::cis(th * l)).collect();
        let u = &(&vecs * &CMatrix::from_fn(d, d, |i, j| if i == j { phases[i] } else { C64::new(0.0, 0.0) }))
            * &vecs.adjoint();
        let iau = (a * &u).scale(I);
        for k in 0..n {
            partials.push(iau.scale_real(theta.deriv.partial(p, k)[(0, 0)].re));
        }
        values.push(u);
    }
    C1Field::new(OperatorField::new(d, d, values)?, CotangentField::new(d, d, n, partials))
}

fn block_of(t: &Section, i: usize, d: usize, p: usize) -> CMatrix {
    t.at(p).block(i * d, 0, d, 1)
}

fn block_partial(t: &Section, i: usize, d: usize, p: usize, k: usize) -> CMatrix {
    t.field().deriv.partial(p, k).block(i * d, 0, d, 1)
}

/// Largest overlap mismatch `‖s_i - τ_ij s_j‖` of local data.
pub fn compatibility_defect(bundle: &BundleSpec, local: &[Section]) -> f64 {
    let m = bundle.m();
    let mut defect: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let Some(t) = bundle.transition(i, j) else { continue };
            for p in 0..t.len() {
                if bundle.overlap(i, j, p) {
                    let ts = t.at(p) * local[j].at(p);
                    defect = defect.max(ts.max_abs_diff(local[i].at(p)));
                }
            }
        }
    }
    defect
}

/// `Φ(s) = Σ_i e_i · s_i √χ_i`.
pub fn phi_embed(model: &ManifoldModel, bundle: &BundleSpec, partition: &PartitionOfUnity, local: &[Section]) -> Result<Section> {
    let m = bundle.m();
    let d = bundle.fiber_dim;
    if local.len() != m || local.iter().any(|s| s.fiber_dim() != d) {
        return Err(Error::ShapeMismatch(format!("expected {m} local sections of rank {d}")));
    }
    let scale = 1.0 + local.iter().map(|s| s.field().value.sup_norm()).fold(0.0, f64::max);
    let defect = compatibility_defect(bundle, local);
    if defect > ALGEBRAIC_TOL * scale {
        return Err(Error::Incompatible(format!("local data disagree on overlaps by {defect:e}")));
    }
    let n = model.dim();
    let np = model.n_points();
    let mut values = Vec::with_capacity(np);
    let mut partials = Vec::with_capacity(np * n);
    for p in 0..np {
        let mut v = CMatrix::zeros(m * d, 1);
        let mut dv = vec![CMatrix::zeros(m * d, 1); n];
        for i in partition.active(p) {
            let w = partition.sqrt_chi(i, p);
            let s = local[i].at(p);
            v.set_block(i * d, 0, &s.scale_real(w));
            for (k, dvk) in dv.iter_mut().enumerate() {
                let mut b = local[i].field().deriv.partial(p, k).scale_real(w);
                b += &s.scale_real(partition.sqrt_chi_partial(i, p, k));
                dvk.set_block(i * d, 0, &b);
            }
        }
        values.push(v);
        partials.extend(dv);
    }
    Section::new(C1Field::new(
        OperatorField::new(m * d, 1, values)?,
        CotangentField::new(m * d, 1, n, partials),
    )?)
}

/// `Ψ(t)_j = Σ_i τ_ji t_i √χ_i` on `U_j`, zero off `U_j`.
pub fn psi_project(model: &ManifoldModel, bundle: &BundleSpec, partition: &PartitionOfUnity, t: &Section) -> Result<Vec<Section>> {
    let m = bundle.m();
    let d = bundle.fiber_dim;
    if t.fiber_dim() != m * d {
        return Err(Error::ShapeMismatch(format!("expected a section of rank {}", m * d)));
    }
    let n = model.dim();
    let np = model.n_points();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let mut values = Vec::with_capacity(np);
        let mut partials = Vec::with_capacity(np * n);
        for p in 0..np {
            let mut v = CMatrix::zeros(d, 1);
            let mut dv = vec![CMatrix::zeros(d, 1); n];
            if bundle.in_chart(j, p) {
                for i in partition.active(p) {
                    let tau = bundle
                        .transition(j, i)
                        .ok_or_else(|| Error::InvalidTransition(format!("τ_{j}{i} missing on an overlap")))?;
                    let w = partition.sqrt_chi(i, p);
                    let ti = block_of(t, i, d, p);
                    let tau_ti = tau.at(p) * &ti;
                    v += &tau_ti.scale_real(w);
                    for (k, dvk) in dv.iter_mut().enumerate() {
                        *dvk += &(tau.deriv.partial(p, k) * &ti).scale_real(w);
                        *dvk += &(tau.at(p) * &block_partial(t, i, d, p, k)).scale_real(w);
                        *dvk += &tau_ti.scale_real(partition.sqrt_chi_partial(i, p, k));
                    }
                }
            }
            values.push(v);
            partials.extend(dv);
        }
        out.push(Section::new(C1Field::new(
            OperatorField::new(d, 1, values)?,
            CotangentField::new(d, 1, n, partials),
        )?)?);
    }
    Ok(out)
}

/// The projection `P` on `C¹₀(M, H^m)` with its measured derivative bound.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizedProjection {
    /// `P_ij = τ_ij √(χ_i χ_j)`, an `md × md` field.
    pub field: C1Field,
    /// `D_P = sup_x ‖(dP)(x)‖`.
    pub d_p: f64,
    pub multiplicity: usize,
    pub c_tau: f64,
    pub c_chi: f64,
    /// `sup_{i,j} ‖d√(χ_i χ_j)‖`.
    pub c_chi_pairwise: f64,
    pub report: CheckReport,
}

/// Assembles `P`, checks that it is an orthogonal projection of rank `d`
/// everywhere, and compares `D_P` with `K^{3/2}(C_τ + C_χ)`.
pub fn build_projection(model: &ManifoldModel, bundle: &BundleSpec, partition: &PartitionOfUnity) -> Result<StabilizedProjection> {
    let m = bundle.m();
    if partition.centers != bundle.centers {
        return Err(Error::Incompatible("bundle and partition use different centers".into()));
    }
    let d = bundle.fiber_dim;
    let n = model.dim();
    let np = model.n_points();
    let mut values = Vec::with_capacity(np);
    let mut partials = Vec::with_capacity(np * n);
    let mut c_chi_pairwise: f64 = 0.0;
    for p in 0..np {
        let mut v = CMatrix::zeros(m * d, m * d);
        let mut dv = vec![CMatrix::zeros(m * d, m * d); n];
        let active: Vec<usize> = partition.active(p).collect();
        for &i in &active {
            for &j in &active {
                let tau = bundle
                    .transition(i, j)
                    .ok_or_else(|| Error::InvalidTransition(format!("τ_{i}{j} missing on an overlap")))?;
                let (wi, wj) = (partition.sqrt_chi(i, p), partition.sqrt_chi(j, p));
                let w = wi * wj;
                v.set_block(i * d, j * d, &tau.at(p).scale_real(w));
                let mut dw2 = 0.0;
                for (k, dvk) in dv.iter_mut().enumerate() {
                    let dw = partition.sqrt_chi_partial(i, p, k) * wj + wi * partition.sqrt_chi_partial(j, p, k);
                    dw2 += dw * dw;
                    let mut b = tau.deriv.partial(p, k).scale_real(w);
                    b += &tau.at(p).scale_real(dw);
                    dvk.set_block(i * d, j * d, &b);
                }
                c_chi_pairwise = c_chi_pairwise.max(math::sqrt(dw2));
            }
        }
        values.push(v);
        partials.extend(dv);
    }
    let field = C1Field::new(
        OperatorField::new(m * d, m * d, values)?,
        CotangentField::new(m * d, m * d, n, partials),
    )?;

    let (mut idem, mut herm, mut spec, mut rank_err): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut d_p: f64 = 0.0;
    for p in 0..np {
        let pm = field.at(p);
        idem = idem.max((pm * pm).max_abs_diff(pm));
        herm = herm.max(pm.hermitian_defect());
        let (vals, _) = eigh(pm)?;
        spec = spec.max(vals.iter().map(|&l| l.abs().min((l - 1.0).abs())).fold(0.0, f64::max));
        let rank = vals.iter().filter(|&&l| l > 0.5).count();
        rank_err = rank_err.max((rank as f64 - d as f64).abs());
        d_p = d_p.max(field.deriv.norm_at(p));
    }
    let k32 = math::pow(partition.multiplicity as f64, 1.5);
    let c_chi = partition.deriv_bound;
    let mut report = CheckReport::new();
    report
        .at_most("stabilize.idempotent", "P(x)² = P(x)", idem, 0.0, ALGEBRAIC_TOL)
        .at_most("stabilize.selfadjoint", "P(x)* = P(x)", herm, 0.0, ALGEBRAIC_TOL)
        .at_most("stabilize.spectrum", "spec P(x) ⊆ {0, 1}", spec, 0.0, 1e-8)
        .at_most("stabilize.rank", "rank P(x) = d", rank_err, 0.0, 0.0)
        .at_most(
            "stabilize.derivative_bound",
            "‖dP‖ ≤ K^{3/2}·(C_τ + C_χ), C_χ = sup_i‖d√χ_i‖",
            d_p,
            k32 * (bundle.c_tau + c_chi),
            1e-9,
        )
        .at_most(
            "stabilize.derivative_bound_pairwise",
            "‖dP‖ ≤ K^{3/2}·(C_τ + C_χ'), C_χ' = sup_{i,j}‖d√(χ_iχ_j)‖",
            d_p,
            k32 * (bundle.c_tau + c_chi_pairwise),
            1e-9,
        );
    Ok(StabilizedProjection {
        field,
        d_p,
        multiplicity: partition.multiplicity,
        c_tau: bundle.c_tau,
        c_chi,
        c_chi_pairwise,
        report,
    })
}

/// Round trips of the stabilization maps on one compatible family of local
/// data and one block section:
/// `Ψ∘Φ = 1`, `‖Φ(s)(x)‖ = ‖s(x)‖`, and `P t = Φ(Ψ(t))`.
pub fn stabilization_checks(
    model: &ManifoldModel,
    bundle: &BundleSpec,
    partition: &PartitionOfUnity,
    projection: &StabilizedProjection,
    local: &[Section],
    block: &Section,
) -> Result<CheckReport> {
    let phi = phi_embed(model, bundle, partition, local)?;
    let back = psi_project(model, bundle, partition, &phi)?;
    let mut roundtrip: f64 = 0.0;
    let mut norm_err: f64 = 0.0;
    let n = model.dim();
    for p in 0..model.n_points() {
        for j in 0..bundle.m() {
            if bundle.in_chart(j, p) {
                roundtrip = roundtrip.max(back[j].at(p).max_abs_diff(local[j].at(p)));
                for k in 0..n {
                    roundtrip = roundtrip.max(
                        back[j]
                            .field()
                            .deriv
                            .partial(p, k)
                            .max_abs_diff(local[j].field().deriv.partial(p, k)),
                    );
                }
            }
        }
        if let Some(&j) = bundle.charts_at(p).first() {
            norm_err = norm_err.max((phi.at(p).frobenius() - local[j].at(p).frobenius()).abs());
        }
    }
    let pt = Section::new(projection.field.mul(block.field())?)?;
    let phi_psi = phi_embed(model, bundle, partition, &psi_project(model, bundle, partition, block)?)?;
    let scale = 1.0 + block.field().value.sup_norm();
    let mut r = CheckReport::new();
    r.at_most("stabilize.psi_phi", "Ψ(Φ(s)) = s", roundtrip, 0.0, ALGEBRAIC_TOL)
        .at_most("stabilize.norm_identity", "‖Φ(s)(x)‖ = ‖s(x)‖", norm_err, 0.0, ALGEBRAIC_TOL)
        .at_most(
            "stabilize.p_is_phi_psi",
            "P·t = Φ(Ψ(t))",
            pt.max_abs_diff(&phi_psi),
            0.0,
            ALGEBRAIC_TOL * scale,
        );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{ball_cover, build_partition};
    use core::f64::consts::PI;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (ManifoldModel, PartitionOfUnity) {
        let m = ManifoldModel::torus(&[2.0 * PI], &[128]).unwrap();
        let eps = PI / 4.0;
        let p = build_partition(&m, &ball_cover(&m, eps).unwrap(), eps).unwrap();
        (m, p)
    }

    #[test]
    fn trivial_bundle() {
        let (m, p) = setup();
        let b = make_bundle(&m, &p, &Gauge::trivial(&m, p.len(), 2)).unwrap();
        assert_eq!(b.c_tau, 0.0);
        let proj = build_projection(&m, &b, &p).unwrap();
        assert!(proj.report.passed(), "{:?}", proj.report);
        let xi = [C64::new(1.0, 0.0), C64::new(0.0, 2.0)];
        let s = Section::constant(&m, &xi);
        let local = vec![s.clone(); p.len()];
        let phi = phi_embed(&m, &b, &p, &local).unwrap();
        for q in 0..m.n_points() {
            assert!((phi.at(q).frobenius() - 5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn twisted_bundle_round_trips() {
        let (m, p) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = Gauge::random(&mut rng, &m, p.len(), 3, 2, 1.5).unwrap();
        let b = make_bundle(&m, &p, &g).unwrap();
        assert!(b.c_tau > 0.0);
        let proj = build_projection(&m, &b, &p).unwrap();
        assert!(proj.report.passed(), "{:?}", proj.report);
        let s = Section::new(FourierField::random(&mut rng, &m, 3, 1, 2).sample(&m)).unwrap();
        let local = g.local_data(&s).unwrap();
        let t = Section::new(FourierField::random(&mut rng, &m, 3 * p.len(), 1, 1).sample(&m)).unwrap();
        let r = stabilization_checks(&m, &b, &p, &proj, &local, &t).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn rejects_non_unitary_and_incompatible() {
        let (m, p) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = p.len();
        let fields = (0..n * n)
            .map(|_| FourierField::random(&mut rng, &m, 2, 2, 1).sample(&m))
            .collect();
        let raw = ExplicitTransitions { fiber_dim: 2, m: n, fields };
        assert!(matches!(make_bundle(&m, &p, &raw), Err(Error::InvalidTransition(_))));

        let g = Gauge::random(&mut rng, &m, n, 2, 2, 1.0).unwrap();
        let b = make_bundle(&m, &p, &g).unwrap();
        let local = vec![Section::constant(&m, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]); n];
        assert!(matches!(phi_embed(&m, &b, &p, &local), Err(Error::Incompatible(_))));
    }

    #[test]
    fn single_block_projects_by_formula() {
        let (m, p) = setup();
        let b = make_bundle(&m, &p, &Gauge::trivial(&m, p.len(), 1)).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); p.len()];
        v[0] = C64::new(1.0, 0.0);
        let t = Section::constant(&m, &v);
        let s = psi_project(&m, &b, &p, &t).unwrap();
        for q in 0..m.n_points() {
            let expect = if b.in_chart(3, q) { p.sqrt_chi(0, q) } else { 0.0 };
            assert!((s[3].at(q)[(0, 0)].re - expect).abs() < 1e-15);
        }
    }
}
