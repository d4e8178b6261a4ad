//! Norms on `M_n(C¹₀(M))` and the inequalities that make it an operator
//! `*`-algebra, each as a measured check.

use alloc::format;

use rand::Rng;

use crate::field::C1Field;
use crate::fourier::FourierField;
use crate::linalg::CMatrix;
use crate::manifold::ManifoldModel;
use crate::math;
use crate::report::CheckReport;

/// Ratios are skipped where the denominator falls below this.
pub const RATIO_FLOOR: f64 = 1e-9;

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    m.op_norm()
}

/// `‖f‖₁ = sup_x (‖f(x)‖² + ‖(df)(x)‖²)^{1/2}`.
pub fn field_norm_1(f: &C1Field) -> f64 {
    f.norm_1()
}

/// `‖α‖₁ = sup_x ‖π(α)(x)‖`.
pub fn alpha_norm_1(alpha: &C1Field) -> f64 {
    alpha.alpha_norm_1()
}

/// Two-sided estimate `½(‖α(x)‖ + ‖dα(x)‖) ≤ ‖π(α)(x)‖ ≤ ‖α(x)‖ + ‖dα(x)‖` at every point,
/// reported as the worst ratio against each side.
pub fn sandwich_check(alpha: &C1Field) -> CheckReport {
    let mut upper: f64 = 0.0;
    let mut lower: f64 = 0.0;
    for p in 0..alpha.len() {
        let a = alpha.at(p).op_norm();
        let b = alpha.deriv.norm_at(p);
        let pi = alpha.pi_block(p).op_norm();
        if a + b > RATIO_FLOOR {
            upper = upper.max(pi / (a + b));
            lower = lower.max(0.5 * (a + b) / pi);
        }
    }
    let mut r = CheckReport::new();
    r.at_most(
        "opspace.sandwich_upper",
        "‖π(α)(x)‖ ≤ ‖α(x)‖ + ‖(dα)(x)‖",
        upper,
        1.0,
        1e-12,
    )
    .at_most(
        "opspace.sandwich_lower",
        "½(‖α(x)‖ + ‖(dα)(x)‖) ≤ ‖π(α)(x)‖",
        lower,
        1.0,
        1e-12,
    );
    r
}

/// `max_x ‖d(α*)(x)‖ / ‖dα(x)‖` over points where the denominator exceeds [`RATIO_FLOOR`].
pub fn adjoint_derivative_ratio(alpha: &C1Field) -> f64 {
    let adj = alpha.deriv.adjoint();
    (0..alpha.len())
        .filter_map(|p| {
            let d = alpha.deriv.norm_at(p);
            (d > RATIO_FLOOR).then(|| adj.norm_at(p) / d)
        })
        .fold(0.0, f64::max)
}

/// `‖d(α*)(x)‖ ≤ √N ‖dα(x)‖`.
pub fn adjoint_derivative_check(alpha: &C1Field, tolerance: f64) -> CheckReport {
    let mut r = CheckReport::new();
    r.at_most(
        "opspace.adjoint_derivative",
        "‖d(α*)(x)‖ ≤ √N·‖(dα)(x)‖",
        adjoint_derivative_ratio(alpha),
        math::sqrt(alpha.dim() as f64),
        tolerance,
    );
    r
}

/// Largest entry of `π(αβ)(x) - π(α)(x)π(β)(x)` over the grid.
pub fn pi_multiplicativity_error(alpha: &C1Field, beta: &C1Field) -> crate::Result<f64> {
    let ab = alpha.mul(beta)?;
    Ok((0..alpha.len())
        .map(|p| ab.pi_block(p).max_abs_diff(&(&alpha.pi_block(p) * &beta.pi_block(p))))
        .fold(0.0, f64::max))
}

/// `‖fg‖₁ ≤ √5·‖f‖₁‖g‖₁` together with `π(fg) = π(f)π(g)`.
pub fn product_norm_check(f: &C1Field, g: &C1Field) -> crate::Result<CheckReport> {
    let fg = f.mul(g)?;
    let (nf, ng, nfg) = (f.norm_1(), g.norm_1(), fg.norm_1());
    let mut r = CheckReport::new();
    r.at_most(
        "opspace.product_norm",
        "‖fg‖₁ ≤ √5·‖f‖₁·‖g‖₁",
        nfg,
        math::sqrt(5.0) * nf * ng,
        1e-12 * nf * ng,
    )
    .at_most(
        "opspace.pi_multiplicative",
        "π(fg)(x) = π(f)(x)·π(g)(x)",
        pi_multiplicativity_error(f, g)?,
        0.0,
        1e-12 * (1.0 + nf * ng),
    );
    Ok(r)
}

/// Maps on `C¹₀(M)` whose matrix amplifications are estimated by [`cb_amplify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplifiedMap {
    Identity,
    /// `F ↦ F*` on `M_n(C¹₀(M))`, bounded by `√N`.
    Involution,
    /// `(F, G) ↦ FG`, bounded by `√5`.
    Multiplication,
}

impl AmplifiedMap {
    pub fn bound(self, dim: usize) -> f64 {
        match self {
            AmplifiedMap::Identity => 1.0,
            AmplifiedMap::Involution => math::sqrt(dim as f64),
            AmplifiedMap::Multiplication => math::sqrt(5.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AmplifiedMap::Identity => "identity",
            AmplifiedMap::Involution => "involution",
            AmplifiedMap::Multiplication => "multiplication",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Amplification {
    pub map: AmplifiedMap,
    pub level: usize,
    pub samples: usize,
    /// Largest ratio found, a lower estimate of the `n`-th amplified norm.
    pub measured: f64,
    pub bound: f64,
}

impl Amplification {
    pub fn report(&self, tolerance: f64) -> CheckReport {
        let mut r = CheckReport::new();
        r.at_most(
            &format!("opspace.cb_{}_level{}", self.map.name(), self.level),
            match self.map {
                AmplifiedMap::Identity => "‖id_n‖ = 1",
                AmplifiedMap::Involution => "‖F*‖₁ ≤ √N·‖F‖₁ on M_n(C¹₀(M))",
                AmplifiedMap::Multiplication => "‖FG‖₁ ≤ √5·‖F‖₁·‖G‖₁ on M_n(C¹₀(M))",
            },
            self.measured,
            self.bound,
            tolerance,
        );
        r
    }
}

/// Lower estimate of the norm of the `level`-th amplification of `map`,
/// maximized over `samples` random `level × level` Fourier fields.
pub fn cb_amplify<R: Rng + ?Sized>(
    rng: &mut R,
    model: &ManifoldModel,
    map: AmplifiedMap,
    level: usize,
    samples: usize,
    degree: u32,
) -> Amplification {
    let mut measured: f64 = 0.0;
    for _ in 0..samples {
        let f = FourierField::random(rng, model, level, level, degree).sample(model);
        let nf = f.norm_1();
        if nf <= RATIO_FLOOR {
            continue;
        }
        let ratio = match map {
            AmplifiedMap::Identity => f.norm_1() / nf,
            AmplifiedMap::Involution => f.adjoint().norm_1() / nf,
            AmplifiedMap::Multiplication => {
                let g = FourierField::random(rng, model, level, level, degree).sample(model);
                let ng = g.norm_1();
                if ng <= RATIO_FLOOR {
                    continue;
                }
                f.mul(&g).expect("square fields of one size").norm_1() / (nf * ng)
            }
        };
        measured = measured.max(ratio);
    }
    Amplification {
        map,
        level,
        samples,
        measured,
        bound: map.bound(model.dim()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{CotangentField, OperatorField};
    use crate::linalg::{C64, I};
    use core::f64::consts::PI;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exp_i(model: &ManifoldModel) -> C1Field {
        let value = OperatorField::from_fn(model, 1, 1, |p| CMatrix::scalar(math::cis(model.coords(p)[0])));
        let partials = (0..model.n_points())
            .map(|p| CMatrix::scalar(I * math::cis(model.coords(p)[0])))
            .collect();
        C1Field::new(value, CotangentField::new(1, 1, 1, partials)).unwrap()
    }

    #[test]
    fn op_norm_examples() {
        assert_eq!(op_norm(&CMatrix::identity(2)), 1.0);
        let shift = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!((op_norm(&shift) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn norms_of_simple_fields() {
        let m = ManifoldModel::torus(&[2.0 * PI], &[256]).unwrap();
        let c = C1Field::constant(&m, CMatrix::scalar(C64::new(3.0, 4.0)));
        assert!((field_norm_1(&c) - 5.0).abs() < 1e-12);
        assert!((field_norm_1(&exp_i(&m)) - 2f64.sqrt()).abs() < 1e-12);
        assert!((alpha_norm_1(&C1Field::constant(&m, CMatrix::identity(3))) - 1.0).abs() < 1e-12);
        assert_eq!(alpha_norm_1(&C1Field::zeros(&m, 2, 2)), 0.0);
    }

    #[test]
    fn exponential_product_attains_sqrt5() {
        let m = ManifoldModel::torus(&[2.0 * PI], &[256]).unwrap();
        let f = exp_i(&m);
        let r = product_norm_check(&f, &f).unwrap();
        assert!(r.passed());
        let fg = f.mul(&f).unwrap();
        assert!((fg.norm_1() - 5f64.sqrt()).abs() < 1e-12);
        assert!((f.norm_1() * f.norm_1() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_adjoint_ratio_is_one() {
        let m = ManifoldModel::torus(&[2.0 * PI], &[64]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = FourierField::random(&mut rng, &m, 3, 3, 3).sample(&m);
        assert!((adjoint_derivative_ratio(&f) - 1.0).abs() < 1e-12);
        let h = f.add(&f.adjoint()).unwrap();
        let m2 = ManifoldModel::torus(&[1.0, 1.0], &[16, 16]).unwrap();
        let g = FourierField::random(&mut rng, &m2, 3, 3, 2).sample(&m2);
        let gh = g.add(&g.adjoint()).unwrap();
        assert!((adjoint_derivative_ratio(&gh) - 1.0).abs() < 1e-12);
        assert!(adjoint_derivative_check(&h, 1e-9).passed());
    }

    #[test]
    fn constant_unitary_sandwich_is_tight_on_the_right() {
        let m = ManifoldModel::torus(&[2.0 * PI], &[16]).unwrap();
        let u = CMatrix::from_fn(2, 2, |i, j| if i != j { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) });
        let f = C1Field::constant(&m, u);
        let r = sandwich_check(&f);
        assert!(r.passed());
        assert!((r.get("opspace.sandwich_upper").unwrap().measured - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_amplification_is_one() {
        let m = ManifoldModel::torus(&[2.0 * PI], &[32]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = cb_amplify(&mut rng, &m, AmplifiedMap::Identity, 3, 4, 2);
        assert!((a.measured - 1.0).abs() < 1e-12);
        let b = cb_amplify(&mut rng, &m, AmplifiedMap::Involution, 2, 10, 2);
        assert!(b.report(1e-9).passed());
    }
}
