//! Round trips between bundles and modules: a projection field's module is
//! unitarily equivalent to the stabilized module of its image bundle, and
//! bundle morphisms correspond one-to-one to module morphisms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{C1Field, CotangentField, OperatorField};
use crate::fourier::FourierField;
use crate::imagebundle::{ImageBundle, ProjectionField, LINALG_TOL};
use crate::linalg::{CMatrix, C64};
use crate::manifold::ManifoldModel;
use crate::partition::PartitionOfUnity;
use crate::report::CheckReport;
use crate::stabilize::{build_projection, psi_project, BundleSpec, Gauge};
use crate::stdmodule::{hermitian_form, Section};

/// `A(x) = Σ_i e_i · W_i(x)* 𝒫(x) √χ_i(x)`, checked to satisfy `A*A = 𝒫`
/// and `AA* = P_stab` at every grid point.
pub fn surjectivity_roundtrip(
    model: &ManifoldModel,
    projection: &ProjectionField,
    image: &ImageBundle,
    partition: &PartitionOfUnity,
) -> Result<CheckReport> {
    let stab = build_projection(model, &image.bundle, partition)?;
    let m = image.frames.len();
    let k = projection.rank;
    let d = projection.dim();
    let n = model.dim();
    let probe: Vec<C64> = (0..d).map(|i| C64::new(1.0 + i as f64, 0.5 * i as f64 - 1.0)).collect();
    let (mut ata, mut aat, mut norm_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut a_norm_1: f64 = 0.0;
    for p in 0..model.n_points() {
        let pp = projection.at(p);
        let mut a = CMatrix::zeros(m * k, d);
        let mut da = vec![CMatrix::zeros(m * k, d); n];
        for i in partition.active(p) {
            let frame = &image.frames[i];
            let w = frame.w[p]
                .as_ref()
                .ok_or_else(|| Error::Incompatible(format!("partition member {i} reaches outside its chart")))?;
            let dw = frame.dw[p].as_ref().expect("frame derivative covers its chart");
            let s = partition.sqrt_chi(i, p);
            let wp = w.adjoint_mul(pp);
            a.set_block(i * k, 0, &wp.scale_real(s));
            for (c, dac) in da.iter_mut().enumerate() {
                let mut b = dw[c].adjoint_mul(pp).scale_real(s);
                b += &w.adjoint_mul(projection.field.deriv.partial(p, c)).scale_real(s);
                b += &wp.scale_real(partition.sqrt_chi_partial(i, p, c));
                dac.set_block(i * k, 0, &b);
            }
        }
        ata = ata.max(a.adjoint_mul(&a).max_abs_diff(pp));
        aat = aat.max((&a * &a.adjoint()).max_abs_diff(stab.field.at(p)));
        let lhs = crate::linalg::vec_norm(&a.mul_vec(&probe));
        let rhs = crate::linalg::vec_norm(&pp.mul_vec(&probe));
        norm_err = norm_err.max((lhs - rhs).abs());
        let jet = CMatrix::vstack(&[a.clone(), CMatrix::vstack(&da)]);
        a_norm_1 = a_norm_1.max(jet.op_norm());
    }
    let mut r = CheckReport::new();
    r.at_most("equivalence.a_star_a", "A(x)*A(x) = 𝒫(x)", ata, 0.0, LINALG_TOL)
        .at_most("equivalence.a_a_star", "A(x)A(x)* = P_stab(x)", aat, 0.0, LINALG_TOL)
        .at_most("equivalence.isometric", "‖A(x)ξ‖ = ‖𝒫(x)ξ‖", norm_err, 0.0, LINALG_TOL)
        .below("equivalence.a_norm_finite", "‖A‖₁ < ∞", a_norm_1, f64::INFINITY);
    Ok(r)
}

/// A bundle morphism in chart coordinates: `α_ij` maps the source fiber in
/// chart `j` to the target fiber in chart `i`, on `U_i ∩ U_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleMorphism {
    pub m: usize,
    pub rows: usize,
    pub cols: usize,
    /// `α_ij` at `i·m + j`; values meaningful only on the overlap.
    pub fields: Vec<Option<C1Field>>,
}

impl BundleMorphism {
    /// `α_ij = v_i a u_j*` for a global field `a` between gauge-trivialized bundles.
    pub fn from_gauges(source: &Gauge, target: &Gauge, a: &C1Field, domains: &[Vec<bool>]) -> Result<Self> {
        let m = domains.len();
        let mut fields = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let meets = domains[i].iter().zip(&domains[j]).any(|(x, y)| *x && *y);
                fields.push(if meets {
                    Some(target.unitaries[i].mul(a)?.mul(&source.unitaries[j].adjoint())?)
                } else {
                    None
                });
            }
        }
        Ok(Self {
            m,
            rows: a.rows(),
            cols: a.cols(),
            fields,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&C1Field> {
        self.fields[i * self.m + j].as_ref()
    }

    /// `(α*)_ij = (α_ji)*`.
    pub fn adjoint(&self) -> Self {
        let m = self.m;
        let fields = (0..m * m)
            .map(|idx| self.get(idx % m, idx / m).map(C1Field::adjoint))
            .collect();
        Self {
            m,
            rows: self.cols,
            cols: self.rows,
            fields,
        }
    }

    /// `(β∘α)_ij(x) = β_ik(x) α_kj(x)` for any chart `k` containing `x`.
    pub fn compose(beta: &BundleMorphism, alpha: &BundleMorphism, domains: &[Vec<bool>]) -> Result<Self> {
        if beta.cols != alpha.rows || beta.m != alpha.m {
            return Err(Error::ShapeMismatch("morphisms do not compose".into()));
        }
        let m = alpha.m;
        let np = domains.first().map_or(0, Vec::len);
        let mut fields = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let Some(aij) = alpha.get(i, j) else {
                    fields.push(None);
                    continue;
                };
                let n = aij.dim();
                let mut values = vec![CMatrix::zeros(beta.rows, alpha.cols); np];
                let mut partials = vec![CMatrix::zeros(beta.rows, alpha.cols); np * n];
                for p in 0..np {
                    if !(domains[i][p] && domains[j][p]) {
                        continue;
                    }
                    let k = (0..m).find(|&k| domains[k][p]).expect("point lies in chart i");
                    let b = beta.get(i, k).expect("overlap of i and k is nonempty");
                    let a = alpha.get(k, j).expect("overlap of k and j is nonempty");
                    values[p] = b.at(p) * a.at(p);
                    for c in 0..n {
                        let mut dv = b.deriv.partial(p, c) * a.at(p);
                        dv += &(b.at(p) * a.deriv.partial(p, c));
                        partials[p * n + c] = dv;
                    }
                }
                fields.push(Some(C1Field::new(
                    OperatorField::new(beta.rows, alpha.cols, values)?,
                    CotangentField::new(beta.rows, alpha.cols, n, partials),
                )?));
            }
        }
        Ok(Self {
            m,
            rows: beta.rows,
            cols: alpha.cols,
            fields,
        })
    }

    /// Largest defect of `α_ij = σ_ik α_kl τ_lj` over quadruple overlaps.
    pub fn compatibility_defect(&self, source: &BundleSpec, target: &BundleSpec) -> f64 {
        let np = source.domains.first().map_or(0, Vec::len);
        let mut defect: f64 = 0.0;
        for p in 0..np {
            let charts = source.charts_at(p);
            for &i in &charts {
                for &j in &charts {
                    let Some(aij) = self.get(i, j) else { continue };
                    for &k in &charts {
                        for &l in &charts {
                            let (Some(s), Some(a), Some(t)) = (target.transition(i, k), self.get(k, l), source.transition(l, j))
                            else {
                                continue;
                            };
                            let rhs = &(s.at(p) * a.at(p)) * t.at(p);
                            defect = defect.max(rhs.max_abs_diff(aij.at(p)));
                        }
                    }
                }
            }
        }
        defect
    }
}

/// `Γ(α)`: the block field `e_j ξ ↦ Σ_i e_i α_ij(x) ξ √(χ_i χ_j)(x)`.
pub fn gamma(model: &ManifoldModel, partition: &PartitionOfUnity, alpha: &BundleMorphism) -> Result<C1Field> {
    let m = alpha.m;
    let (r, c) = (alpha.rows, alpha.cols);
    let n = model.dim();
    let np = model.n_points();
    let mut values = Vec::with_capacity(np);
    let mut partials = Vec::with_capacity(np * n);
    for p in 0..np {
        let mut v = CMatrix::zeros(m * r, m * c);
        let mut dv = vec![CMatrix::zeros(m * r, m * c); n];
        let active: Vec<usize> = partition.active(p).collect();
        for &i in &active {
            for &j in &active {
                let a = alpha
                    .get(i, j)
                    .ok_or_else(|| Error::Incompatible(format!("α_{i}{j} missing on an overlap")))?;
                let (wi, wj) = (partition.sqrt_chi(i, p), partition.sqrt_chi(j, p));
                v.set_block(i * r, j * c, &a.at(p).scale_real(wi * wj));
                for (k, dvk) in dv.iter_mut().enumerate() {
                    let dw = partition.sqrt_chi_partial(i, p, k) * wj + wi * partition.sqrt_chi_partial(j, p, k);
                    let mut b = a.deriv.partial(p, k).scale_real(wi * wj);
                    b += &a.at(p).scale_real(dw);
                    dvk.set_block(i * r, j * c, &b);
                }
            }
        }
        values.push(v);
        partials.extend(dv);
    }
    C1Field::new(
        OperatorField::new(m * r, m * c, values)?,
        CotangentField::new(m * r, m * c, n, partials),
    )
}

/// Overlap fields recovered from a module morphism, with the diagonal jets
/// `α_jj` needed for the norm estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// `α_jj(x)` and its derivative where `j = argmax χ_j(x)`: `(j, value, partials)`.
    pub diagonal: Vec<(usize, CMatrix, Vec<CMatrix>)>,
    /// Largest `‖α_il(x) - σ_ij α_jj τ_jl(x)‖` against the given data.
    pub error: f64,
    /// Fraction of grid points where some `χ_j ≥ δ_χ`.
    pub coverage: f64,
}

/// Probe `Γ(α)` with the sections `ξ_{x_j} = ξ √χ_j` in chart `j`, whose
/// stabilized images are `P_A(e_j ξ)`, and read back `α_jj` from
/// `Ψ_B(Γ(α) P_A e_j ξ)_j = α_jj ξ √χ_j`.
pub fn reconstruct(
    model: &ManifoldModel,
    partition: &PartitionOfUnity,
    source: &BundleSpec,
    target: &BundleSpec,
    gamma_field: &C1Field,
    alpha: &BundleMorphism,
) -> Result<Reconstruction> {
    let m = partition.len();
    let (da, db) = (source.fiber_dim, target.fiber_dim);
    let n = model.dim();
    let np = model.n_points();
    let pa = build_projection(model, source, partition)?;
    let delta = partition.lower_bump_bound(model);
    // images[j][c] = local data of α(ξ_{x_j}) for ξ = e_c
    let mut images: Vec<Vec<Vec<Section>>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut per_basis = Vec::with_capacity(da);
        for c in 0..da {
            let mut e = vec![C64::new(0.0, 0.0); m * da];
            e[j * da + c] = C64::new(1.0, 0.0);
            let probe = Section::new(pa.field.mul(&C1Field::constant(model, CMatrix::column_vector(&e)))?)?;
            let out = Section::new(gamma_field.mul(probe.field())?)?;
            per_basis.push(psi_project(model, target, partition, &out)?);
        }
        images.push(per_basis);
    }
    let mut diagonal = Vec::with_capacity(np);
    let mut error: f64 = 0.0;
    let mut covered = 0usize;
    for p in 0..np {
        let (j, chi) = (0..m)
            .map(|j| (j, partition.sqrt_chi(j, p) * partition.sqrt_chi(j, p)))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if chi >= delta {
            covered += 1;
        }
        let s = partition.sqrt_chi(j, p);
        if s <= 0.0 {
            return Err(Error::DegeneratePartition(format!("no partition member is positive at grid point {p}")));
        }
        let mut a = CMatrix::zeros(db, da);
        let mut d = vec![CMatrix::zeros(db, da); n];
        for (c, per_basis) in images[j].iter().enumerate() {
            let local = &per_basis[j];
            let v = local.at(p);
            a.set_column(c, &v.scale_real(1.0 / s).column(0));
            for (k, dk) in d.iter_mut().enumerate() {
                let dv = local.field().deriv.partial(p, k);
                let q = &dv.scale_real(1.0 / s) - &v.scale_real(partition.sqrt_chi_partial(j, p, k) / (s * s));
                dk.set_column(c, &q.column(0));
            }
        }
        for i in source.charts_at(p) {
            for l in source.charts_at(p) {
                let (Some(sig), Some(tau), Some(given)) = (target.transition(i, j), source.transition(j, l), alpha.get(i, l))
                else {
                    continue;
                };
                if !target.in_chart(j, p) {
                    continue;
                }
                let rec = &(sig.at(p) * &a) * tau.at(p);
                error = error.max(rec.max_abs_diff(given.at(p)));
            }
        }
        diagonal.push((j, a, d));
    }
    Ok(Reconstruction {
        diagonal,
        error,
        coverage: covered as f64 / np as f64,
    })
}

/// Bundles, morphisms and partition for the full-faithfulness round trip.
pub struct FaithfulnessInput<'a> {
    pub partition: &'a PartitionOfUnity,
    pub source: &'a BundleSpec,
    pub target: &'a BundleSpec,
    pub alpha: &'a BundleMorphism,
    /// A third bundle and a morphism `β` from the target into it, for functoriality.
    pub next: Option<(&'a BundleSpec, &'a BundleMorphism)>,
}

/// Runs the faithfulness round trip: adjoint compatibility and
/// functoriality of `Γ` on random sections, reconstruction of the overlap
/// fields from `Γ(α)`, and `‖π(α_jj)‖ ≤ 2‖Γ(α)‖‖P‖C_{δ,χ}`.
pub fn faithfulness_roundtrip<R: Rng + ?Sized>(
    rng: &mut R,
    model: &ManifoldModel,
    input: &FaithfulnessInput<'_>,
    probes: usize,
) -> Result<CheckReport> {
    let FaithfulnessInput {
        partition,
        source,
        target,
        alpha,
        next,
    } = *input;
    let scale = 1.0 + alpha.fields.iter().flatten().map(|f| f.value.sup_norm()).fold(0.0, f64::max);
    let defect = alpha.compatibility_defect(source, target);
    if defect > LINALG_TOL * scale {
        return Err(Error::Incompatible(format!("overlap fields violate the cocycles by {defect:e}")));
    }
    let m = partition.len();
    let g = gamma(model, partition, alpha)?;
    let g_adj = gamma(model, partition, &alpha.adjoint())?;
    let (da, db) = (alpha.cols, alpha.rows);

    let mut adjoint_err: f64 = 0.0;
    let mut functor_err: f64 = 0.0;
    let composed = match next {
        Some((_, beta)) => {
            let ba = BundleMorphism::compose(beta, alpha, &source.domains)?;
            Some((gamma(model, partition, beta)?, gamma(model, partition, &ba)?))
        }
        None => None,
    };
    for _ in 0..probes {
        let s = Section::new(FourierField::random(rng, model, m * da, 1, 1).sample(model))?;
        let t = Section::new(FourierField::random(rng, model, m * db, 1, 1).sample(model))?;
        let gs = Section::new(g.mul(s.field())?)?;
        let gt = Section::new(g_adj.mul(t.field())?)?;
        let lhs = hermitian_form(&gs, &t)?;
        let rhs = hermitian_form(&s, &gt)?;
        adjoint_err = adjoint_err.max(lhs.max_abs_diff(&rhs));
        if let Some((gb, gba)) = &composed {
            let two_step = gb.mul(gs.field())?;
            let one_step = gba.mul(s.field())?;
            functor_err = functor_err.max(two_step.max_abs_diff(&one_step));
        }
    }

    let rec = reconstruct(model, partition, source, target, &g, alpha)?;
    let delta = partition.lower_bump_bound(model);
    let c_chi = partition.chi_deriv_bound();
    let c_delta_chi = (1.0 + c_chi / delta) / delta;
    let pa = build_projection(model, source, partition)?;
    let p_norm = pa.field.alpha_norm_1();
    // ‖Γ(α)‖_cb ≥ ‖Γ(α)‖₁ / 2 for multiplication operators
    let gamma_norm = g.alpha_norm_1() / 2.0;
    let n = model.dim();
    let mut pi_max: f64 = 0.0;
    for (_, a, d) in &rec.diagonal {
        let (r, c) = a.shape();
        let mut pi = CMatrix::zeros(r * (n + 1), c * (n + 1));
        pi.set_block(0, 0, a);
        for (k, dk) in d.iter().enumerate() {
            pi.set_block(r * (k + 1), 0, dk);
            pi.set_block(r * (k + 1), c * (k + 1), a);
        }
        pi_max = pi_max.max(pi.op_norm());
    }

    let mut report = CheckReport::new();
    report
        .below("equivalence.gamma_norm_finite", "‖π(Γ(α))‖ < ∞", g.alpha_norm_1(), f64::INFINITY)
        .at_most(
            "equivalence.gamma_adjoint",
            "⟨Γ(α)s, t⟩ = ⟨s, Γ(α*)t⟩",
            adjoint_err,
            0.0,
            LINALG_TOL,
        )
        .at_most(
            "equivalence.reconstruction",
            "σ_ij·α_jj·τ_jl recovered from Γ(α) equals α_il",
            rec.error,
            0.0,
            LINALG_TOL,
        )
        .at_least(
            "equivalence.coverage",
            "every grid point has some χ_j ≥ δ_χ",
            rec.coverage,
            1.0,
            0.0,
        )
        .at_most(
            "equivalence.diagonal_bound",
            "‖π(α_jj)(y)‖ ≤ 2·‖Γ(α)‖·‖P‖·C_{δ,χ}",
            pi_max,
            2.0 * gamma_norm * p_norm * c_delta_chi,
            1e-9,
        );
    if composed.is_some() {
        report.at_most(
            "equivalence.functorial",
            "Γ(β∘α) = Γ(β)·Γ(α)",
            functor_err,
            0.0,
            LINALG_TOL,
        );
    }
    Ok(report)
}

/// Outcome of [`injectivity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct Injectivity {
    /// `(chart j, basis index)` of a probe separating the two morphisms.
    pub witness: Option<(usize, usize)>,
    pub difference: f64,
    pub report: CheckReport,
}

/// Looks for a probe section `P_A(e_j ξ)` on which `Γ(α)` and `Γ(β)` differ.
pub fn injectivity_check(
    model: &ManifoldModel,
    partition: &PartitionOfUnity,
    source: &BundleSpec,
    gamma_alpha: &C1Field,
    gamma_beta: &C1Field,
) -> Result<Injectivity> {
    let m = partition.len();
    let da = source.fiber_dim;
    let pa = build_projection(model, source, partition)?;
    let mut best = (None, 0.0f64);
    for j in 0..m {
        for c in 0..da {
            let mut e = vec![C64::new(0.0, 0.0); m * da];
            e[j * da + c] = C64::new(1.0, 0.0);
            let probe = pa.field.mul(&C1Field::constant(model, CMatrix::column_vector(&e)))?;
            let diff = gamma_alpha.mul(&probe)?.value.max_abs_diff(&gamma_beta.mul(&probe)?.value);
            if diff > best.1 {
                best = (Some((j, c)), diff);
            }
        }
    }
    let threshold = LINALG_TOL;
    let witness = if best.1 > threshold { best.0 } else { None };
    let mut report = CheckReport::new();
    let fields_differ = gamma_alpha.value.max_abs_diff(&gamma_beta.value) > threshold;
    if fields_differ {
        report.at_least(
            "equivalence.injectivity",
            "Γ(α) ≠ Γ(β) is witnessed by a probe section",
            best.1,
            threshold,
            0.0,
        );
    } else {
        report.at_most(
            "equivalence.injectivity_equal",
            "Γ(α) = Γ(β) on every probe section",
            best.1,
            threshold,
            0.0,
        );
    }
    Ok(Injectivity {
        witness,
        difference: best.1,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagebundle::{image_bundle, select_radius};
    use crate::partition::{ball_cover, build_partition};
    use crate::stabilize::make_bundle;
    use core::f64::consts::PI;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circle() -> ManifoldModel {
        ManifoldModel::torus(&[2.0 * PI], &[128]).unwrap()
    }

    #[test]
    fn surjectivity_for_constant_and_rotating_fields() {
        let m = circle();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for f in [
            ProjectionField::constant(&m, CMatrix::diag_real(&[1.0, 0.0, 1.0])).unwrap(),
            ProjectionField::random_rotating(&mut rng, &m, 3, 2, 1).unwrap(),
        ] {
            let r = select_radius(&m, &f, 1.0);
            let eps = r / 2.0;
            let part = build_partition(&m, &ball_cover(&m, eps).unwrap(), eps).unwrap();
            let ib = image_bundle(&m, &f, r, &part, None).unwrap();
            let rep = surjectivity_roundtrip(&m, &f, &ib, &part).unwrap();
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn faithfulness_with_gauge_bundles() {
        let m = circle();
        let eps = PI / 4.0;
        let part = build_partition(&m, &ball_cover(&m, eps).unwrap(), eps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ga = Gauge::random(&mut rng, &m, part.len(), 2, 1, 1.0).unwrap();
        let gb = Gauge::random(&mut rng, &m, part.len(), 3, 1, 1.0).unwrap();
        let gc = Gauge::random(&mut rng, &m, part.len(), 2, 1, 1.0).unwrap();
        let (a_b, b_b, c_b) = (
            make_bundle(&m, &part, &ga).unwrap(),
            make_bundle(&m, &part, &gb).unwrap(),
            make_bundle(&m, &part, &gc).unwrap(),
        );
        let a = FourierField::random(&mut rng, &m, 3, 2, 1).sample(&m);
        let b = FourierField::random(&mut rng, &m, 2, 3, 1).sample(&m);
        let alpha = BundleMorphism::from_gauges(&ga, &gb, &a, &a_b.domains).unwrap();
        let beta = BundleMorphism::from_gauges(&gb, &gc, &b, &a_b.domains).unwrap();
        let input = FaithfulnessInput {
            partition: &part,
            source: &a_b,
            target: &b_b,
            alpha: &alpha,
            next: Some((&c_b, &beta)),
        };
        let rep = faithfulness_roundtrip(&mut rng, &m, &input, 5).unwrap();
        assert!(rep.passed(), "{rep:#?}");
    }

    #[test]
    fn identity_morphism_reconstructs_transitions() {
        let m = circle();
        let eps = PI / 4.0;
        let part = build_partition(&m, &ball_cover(&m, eps).unwrap(), eps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Gauge::random(&mut rng, &m, part.len(), 2, 1, 1.0).unwrap();
        let b = make_bundle(&m, &part, &g).unwrap();
        let id = BundleMorphism::from_gauges(&g, &g, &C1Field::constant(&m, CMatrix::identity(2)), &b.domains).unwrap();
        for i in 0..part.len() {
            for j in 0..part.len() {
                if let (Some(a), Some(t)) = (id.get(i, j), b.transition(i, j)) {
                    for p in 0..m.n_points() {
                        if b.overlap(i, j, p) {
                            assert!(a.at(p).max_abs_diff(t.at(p)) < 1e-14);
                        }
                    }
                }
            }
        }
        let gm = gamma(&m, &part, &id).unwrap();
        let rec = reconstruct(&m, &part, &b, &b, &gm, &id).unwrap();
        assert!(rec.error < 1e-10);
        assert_eq!(rec.coverage, 1.0);
    }

    #[test]
    fn injectivity_cases() {
        let m = circle();
        let eps = PI / 4.0;
        let part = build_partition(&m, &ball_cover(&m, eps).unwrap(), eps).unwrap();
        let g = Gauge::trivial(&m, part.len(), 2);
        let b = make_bundle(&m, &part, &g).unwrap();
        let one = BundleMorphism::from_gauges(&g, &g, &C1Field::constant(&m, CMatrix::identity(2)), &b.domains).unwrap();
        let two = BundleMorphism::from_gauges(
            &g,
            &g,
            &C1Field::constant(&m, CMatrix::identity(2).scale_real(2.0)),
            &b.domains,
        )
        .unwrap();
        let (g1, g2) = (gamma(&m, &part, &one).unwrap(), gamma(&m, &part, &two).unwrap());
        let inj = injectivity_check(&m, &part, &b, &g1, &g2).unwrap();
        assert!(inj.witness.is_some() && inj.report.passed());
        let same = injectivity_check(&m, &part, &b, &g1, &g1).unwrap();
        assert!(same.witness.is_none() && same.report.passed());
    }
}
