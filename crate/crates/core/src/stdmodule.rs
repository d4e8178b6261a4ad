//! The standard module `C¹₀(M, H)`: sections, the hermitian form, and the
//! correspondence between operator fields and module morphisms.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{C1Field, CotangentField, OperatorField};
use crate::linalg::{eigh, CMatrix, C64};
use crate::manifold::ManifoldModel;
use crate::math;
use crate::report::CheckReport;

/// A `d × 1` field with its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Section(C1Field);

impl Section {
    pub fn new(field: C1Field) -> Result<Self> {
        if field.cols() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "a section has one column, got {}",
                field.cols()
            )));
        }
        Ok(Self(field))
    }

    /// Samples paired with their finite-difference derivative.
    pub fn from_values(model: &ManifoldModel, values: OperatorField) -> Result<Self> {
        Self::new(C1Field::from_samples(model, values))
    }

    /// The section `ξ` constant on the grid.
    pub fn constant(model: &ManifoldModel, xi: &[C64]) -> Self {
        Self(C1Field::constant(model, CMatrix::column_vector(xi)))
    }

    pub fn fiber_dim(&self) -> usize {
        self.0.rows()
    }

    pub fn field(&self) -> &C1Field {
        &self.0
    }

    pub fn into_field(self) -> C1Field {
        self.0
    }

    pub fn at(&self, p: usize) -> &CMatrix {
        self.0.at(p)
    }

    /// Module action `s·f` for a scalar field `f`.
    pub fn act(&self, f: &C1Field) -> Result<Self> {
        Ok(Self(self.0.mul_scalar(f)?))
    }

    pub fn add(&self, other: &Section) -> Result<Self> {
        Ok(Self(self.0.add(&other.0)?))
    }

    pub fn max_abs_diff(&self, other: &Section) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

/// `‖s‖₁ = sup_x (‖s(x)‖² + ‖(ds)(x)‖²)^{1/2}`.
pub fn section_norm_1(s: &Section) -> f64 {
    s.0.norm_1()
}

/// `⟨s, t⟩(x) = ⟨s(x), t(x)⟩_H`, conjugate-linear in `s`, with its derivative.
pub fn hermitian_form(s: &Section, t: &Section) -> Result<C1Field> {
    if s.fiber_dim() != t.fiber_dim() {
        return Err(Error::ShapeMismatch(format!(
            "fiber dimensions {} and {}",
            s.fiber_dim(),
            t.fiber_dim()
        )));
    }
    s.0.adjoint().mul(&t.0)
}

/// `Φ(α)(s)(x) = α(x)s(x)`, differentiated by the Leibniz rule.
pub fn apply_morphism(alpha: &C1Field, s: &Section) -> Result<Section> {
    Section::new(alpha.mul(&s.0)?)
}

/// A right `C¹₀(M)`-linear map between section modules, seen as a black box.
pub trait ModuleMorphism {
    fn apply(&self, s: &Section) -> Result<Section>;
}

impl<F: Fn(&Section) -> Result<Section>> ModuleMorphism for F {
    fn apply(&self, s: &Section) -> Result<Section> {
        self(s)
    }
}

/// The morphism `Φ(α)` of an operator field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMorphism(pub C1Field);

impl ModuleMorphism for FieldMorphism {
    fn apply(&self, s: &Section) -> Result<Section> {
        apply_morphism(&self.0, s)
    }
}

/// Result of [`recover_field`].
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredField {
    pub alpha: C1Field,
    /// Lower estimate of `‖β‖_cb` from probe sections.
    pub morphism_norm: f64,
    pub report: CheckReport,
}

/// Indicator of the support region with zero declared derivative. This is
/// the cutoff used to localize probe sections: one on the torus, one inside
/// the margin on the box.
fn cutoff(model: &ManifoldModel) -> C1Field {
    let values = OperatorField::from_fn(model, 1, 1, |p| {
        CMatrix::scalar(C64::new(if model.in_support(p) { 1.0 } else { 0.0 }, 0.0))
    });
    C1Field {
        value: values,
        deriv: CotangentField::zeros(model, 1, 1),
    }
}

fn basis_section(model: &ManifoldModel, cut: &C1Field, xi: &[C64]) -> Result<Section> {
    Section::constant(model, xi).act(cut)
}

/// Recover `α = Φ⁻¹(β)` by evaluating `β` on localized constant sections
/// `ξ·σ`, then check that `β` is a module map, that `Φ(α)` reproduces `β`,
/// and that `‖α‖₁ ≤ 2‖β‖`.
pub fn recover_field(model: &ManifoldModel, beta: &dyn ModuleMorphism, d_in: usize) -> Result<RecoveredField> {
    let cut = cutoff(model);
    let n = model.dim();
    let np = model.n_points();
    let mut images = Vec::with_capacity(d_in);
    for j in 0..d_in {
        let mut xi = alloc::vec![C64::new(0.0, 0.0); d_in];
        xi[j] = C64::new(1.0, 0.0);
        images.push(beta.apply(&basis_section(model, &cut, &xi)?)?);
    }
    let d_out = images.first().map(Section::fiber_dim).unwrap_or(0);
    let mut values = Vec::with_capacity(np);
    let mut partials = Vec::with_capacity(np * n);
    for p in 0..np {
        let mut a = CMatrix::zeros(d_out, d_in);
        for (j, img) in images.iter().enumerate() {
            a.set_column(j, &img.at(p).column(0));
        }
        values.push(a);
        for k in 0..n {
            let mut da = CMatrix::zeros(d_out, d_in);
            for (j, img) in images.iter().enumerate() {
                da.set_column(j, &img.field().deriv.partial(p, k).column(0));
            }
            partials.push(da);
        }
    }
    let alpha = C1Field::new(
        OperatorField::new(d_out, d_in, values)?,
        CotangentField::new(d_out, d_in, n, partials),
    )?;

    // module-map probe: β(s·f) against β(s)·f
    let s = probe_section(model, &cut, d_in)?;
    let f = probe_scalar(model);
    let lhs = beta.apply(&s.act(&f)?)?;
    let rhs = beta.apply(&s)?.act(&f)?;
    let scale = 1.0 + section_norm_1(&lhs);
    let defect = lhs.max_abs_diff(&rhs);
    if defect > 1e-9 * scale {
        return Err(Error::NotModuleMap(format!("β(s·f) - β(s)·f reaches {defect:e}")));
    }
    let roundtrip = apply_morphism(&alpha, &s)?.max_abs_diff(&beta.apply(&s)?);

    // norm estimate: unit constant probes, including the top right singular
    // vector of [α; dα] at the point where it is largest
    let mut probes: Vec<Vec<C64>> = (0..d_in)
        .map(|j| (0..d_in).map(|i| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    if let Some(v) = top_jet_direction(&alpha) {
        probes.push(v);
    }
    let mut morphism_norm: f64 = 0.0;
    for xi in &probes {
        let s = basis_section(model, &cut, xi)?;
        let ns = section_norm_1(&s);
        if ns > 0.0 {
            morphism_norm = morphism_norm.max(section_norm_1(&beta.apply(&s)?) / ns);
        }
    }

    let alpha_norm = alpha.alpha_norm_1();
    let mut report = CheckReport::new();
    report
        .at_most(
            "stdmodule.module_map",
            "β(s·f) = β(s)·f",
            defect,
            0.0,
            1e-9 * scale,
        )
        .at_most(
            "stdmodule.roundtrip",
            "Φ(Φ⁻¹(β)) = β on probe sections",
            roundtrip,
            0.0,
            1e-10 * scale,
        )
        .at_most(
            "stdmodule.inverse_bound",
            "‖Φ⁻¹(β)‖₁ ≤ 2·‖β‖_cb",
            alpha_norm,
            2.0 * morphism_norm,
            1e-12 * (1.0 + alpha_norm),
        );
    Ok(RecoveredField {
        alpha,
        morphism_norm,
        report,
    })
}

fn top_jet_direction(alpha: &C1Field) -> Option<Vec<C64>> {
    let (mut best, mut best_p) = (0.0, None);
    for p in 0..alpha.len() {
        let jet = CMatrix::vstack(&[alpha.at(p).clone(), alpha.deriv.stacked(p)]);
        let norm = jet.op_norm();
        if norm > best {
            best = norm;
            best_p = Some(jet);
        }
    }
    let jet = best_p?;
    let (_, vecs) = eigh(&jet.adjoint_mul(&jet)).ok()?;
    Some(vecs.column(vecs.cols() - 1))
}

fn probe_section(model: &ManifoldModel, cut: &C1Field, d: usize) -> Result<Section> {
    let l = model.extents()[0];
    let n = model.dim();
    let np = model.n_points();
    let w = 2.0 * core::f64::consts::PI / l;
    let mut values = Vec::with_capacity(np);
    let mut partials = Vec::with_capacity(np * n);
    for p in 0..np {
        let x = model.coords(p)[0];
        let mut v = CMatrix::zeros(d, 1);
        let mut dv = CMatrix::zeros(d, 1);
        for i in 0..d {
            let k = (i + 1) as f64;
            v[(i, 0)] = C64::new(1.0 + 0.5 * math::cos(k * w * x), 0.25 * k);
            dv[(i, 0)] = C64::new(-0.5 * k * w * math::sin(k * w * x), 0.0);
        }
        values.push(v);
        partials.push(dv);
        for _ in 1..n {
            partials.push(CMatrix::zeros(d, 1));
        }
    }
    let s = Section::new(C1Field::new(
        OperatorField::new(d, 1, values)?,
        CotangentField::new(d, 1, n, partials),
    )?)?;
    s.act(cut)
}

fn probe_scalar(model: &ManifoldModel) -> C1Field {
    let w = 2.0 * core::f64::consts::PI / model.extents()[0];
    let n = model.dim();
    let value = OperatorField::from_fn(model, 1, 1, |p| {
        let x = model.coords(p)[0];
        CMatrix::scalar(math::cis(w * x).scale(2.0) + C64::new(0.5, 0.0))
    });
    let mut partials = Vec::with_capacity(model.n_points() * n);
    for p in 0..model.n_points() {
        let x = model.coords(p)[0];
        partials.push(CMatrix::scalar(math::cis(w * x) * C64::new(0.0, 2.0 * w)));
        for _ in 1..n {
            partials.push(CMatrix::scalar(C64::new(0.0, 0.0)));
        }
    }
    C1Field {
        value,
        deriv: CotangentField::new(1, 1, n, partials),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierField;
    use core::f64::consts::PI;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circle() -> ManifoldModel {
        ManifoldModel::torus(&[2.0 * PI], &[128]).unwrap()
    }

    #[test]
    fn section_norms() {
        let m = circle();
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert!((section_norm_1(&Section::constant(&m, &[one, zero])) - 1.0).abs() < 1e-14);
        let e = FourierField::mode(&m, &[1], CMatrix::column_vector(&[one, zero])).sample(&m);
        assert!((section_norm_1(&Section::new(e).unwrap()) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(section_norm_1(&Section::constant(&m, &[zero])), 0.0);
        assert!(Section::new(C1Field::zeros(&m, 2, 2)).is_err());
    }

    #[test]
    fn hermitian_form_is_sesquilinear() {
        let m = circle();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = Section::new(FourierField::random(&mut rng, &m, 3, 1, 2).sample(&m)).unwrap();
        let t = Section::new(FourierField::random(&mut rng, &m, 3, 1, 2).sample(&m)).unwrap();
        let st = hermitian_form(&s, &t).unwrap();
        let ts = hermitian_form(&t, &s).unwrap();
        assert!(st.max_abs_diff(&ts.adjoint()) < 1e-13);
        let ss = hermitian_form(&s, &s).unwrap();
        assert!((0..m.n_points()).all(|p| ss.at(p)[(0, 0)].re >= 0.0 && ss.at(p)[(0, 0)].im.abs() < 1e-13));
        let f = probe_scalar(&m);
        let lhs = hermitian_form(&s, &t.act(&f).unwrap()).unwrap();
        let rhs = st.mul(&f).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn recovers_field_from_its_morphism() {
        let m = circle();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = FourierField::random(&mut rng, &m, 2, 3, 3).sample(&m);
        let rec = recover_field(&m, &FieldMorphism(a.clone()), 3).unwrap();
        assert!(rec.alpha.max_abs_diff(&a) < 1e-10);
        assert!(rec.report.passed(), "{:?}", rec.report);
    }

    #[test]
    fn identity_morphism_recovers_identity() {
        let m = circle();
        let id = |s: &Section| Ok(s.clone());
        let rec = recover_field(&m, &id, 2).unwrap();
        assert!(rec.alpha.max_abs_diff(&C1Field::constant(&m, CMatrix::identity(2))) < 1e-15);
    }

    #[test]
    fn rejects_non_module_map() {
        let m = circle();
        // s ↦ s·|s|² is not C¹₀(M)-linear
        let cubic = |s: &Section| {
            let n2 = hermitian_form(s, s)?;
            s.act(&n2)
        };
        assert!(matches!(recover_field(&m, &cubic, 2), Err(Error::NotModuleMap(_))));
    }

    #[test]
    fn box_recovery_on_support() {
        let m = ManifoldModel::euclidean_box(&[3.0], &[64]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = FourierField::random(&mut rng, &m, 2, 2, 2).sample(&m);
        let rec = recover_field(&m, &FieldMorphism(a.clone()), 2).unwrap();
        assert!(rec.alpha.max_abs_diff(&a) < 1e-12);
        assert!(rec.report.passed());
    }
}
