use std::f64::consts::PI;

use hilbund_core::fourier::{random_matrix, random_unitary, FourierField};
use hilbund_core::opspace::{adjoint_derivative_ratio, pi_multiplicativity_error, sandwich_check};
use hilbund_core::partition::{ball_cover, build_partition};
use hilbund_core::stabilize::{build_projection, make_bundle, Gauge};
use hilbund_core::stdmodule::{apply_morphism, section_norm_1, Section};
use hilbund_core::{C1Field, CMatrix, ManifoldModel, C64};
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circle() -> ManifoldModel {
    ManifoldModel::torus(&[2.0 * PI], &[48]).unwrap()
}

fn square() -> ManifoldModel {
    ManifoldModel::torus(&[2.0 * PI, 2.0 * PI], &[16, 16]).unwrap()
}

fn field(seed: u64, model: &ManifoldModel, r: usize, c: usize) -> C1Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FourierField::random(&mut rng, model, r, c, 2).sample(model)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn op_norm_is_a_norm(seed in any::<u64>(), r in 1usize..6, c in 1usize..6, s in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, r, c);
        let b = random_matrix(&mut rng, r, c);
        let (na, nb) = (a.op_norm(), b.op_norm());
        prop_assert!((&a + &b).op_norm() <= na + nb + 1e-12);
        prop_assert!((a.scale_real(s).op_norm() - s.abs() * na).abs() <= 1e-12 * (1.0 + na));
        prop_assert!((a.adjoint().op_norm() - na).abs() <= 1e-12 * (1.0 + na));
        prop_assert!(a.max_abs() <= na + 1e-12 && na <= a.frobenius() + 1e-12);
    }

    #[test]
    fn unitary_invariance(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n, n);
        let (u, v) = (random_unitary(&mut rng, n), random_unitary(&mut rng, n));
        let moved = &(&u * &a) * &v;
        prop_assert!((moved.op_norm() - a.op_norm()).abs() < 1e-10);
    }

    #[test]
    fn jet_norm_axioms(seed in any::<u64>(), s in -2.0f64..2.0) {
        let m = circle();
        let f = field(seed, &m, 2, 3);
        let g = field(seed ^ 0x9e37, &m, 2, 3);
        let (nf, ng) = (f.norm_1(), g.norm_1());
        prop_assert!(f.add(&g).unwrap().norm_1() <= nf + ng + 1e-12);
        prop_assert!((f.scale(C64::new(s, 0.0)).norm_1() - s.abs() * nf).abs() <= 1e-12 * (1.0 + nf));
        let na = f.alpha_norm_1();
        prop_assert!(nf / 2f64.sqrt() <= na + 1e-12 && na <= 2f64.sqrt() * nf + 1e-12);
        prop_assert!(C1Field::zeros(&m, 2, 3).norm_1() == 0.0);
    }

    #[test]
    fn direct_sum_norm_is_the_max(seed in any::<u64>()) {
        let m = circle();
        let f = field(seed, &m, 2, 2);
        let g = field(seed.wrapping_add(1), &m, 1, 3);
        let sum = f.direct_sum(&g);
        for p in 0..m.n_points() {
            let expect = f.at(p).op_norm().max(g.at(p).op_norm());
            prop_assert!((sum.at(p).op_norm() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn derham_is_linear(seed in any::<u64>(), s in -2.0f64..2.0) {
        let m = square();
        let f = field(seed, &m, 2, 2);
        let g = field(seed.wrapping_mul(3), &m, 2, 2);
        let combo = f.value.add(&g.value.scale(C64::new(s, 0.5))).unwrap();
        let lhs = m.derham(&combo);
        let (df, dg) = (m.derham(&f.value), m.derham(&g.value));
        for p in 0..m.n_points() {
            for k in 0..2 {
                let rhs = df.partial(p, k) + &dg.partial(p, k).scale(C64::new(s, 0.5));
                prop_assert!(lhs.partial(p, k).max_abs_diff(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn leibniz_and_pi_multiplicativity(seed in any::<u64>()) {
        let m = square();
        let f = field(seed, &m, 2, 3);
        let g = field(seed ^ 0xabcd, &m, 3, 2);
        let fg = f.mul(&g).unwrap();
        for p in 0..m.n_points() {
            for k in 0..2 {
                let expect = &(f.deriv.partial(p, k) * g.at(p)) + &(f.at(p) * g.deriv.partial(p, k));
                prop_assert!(fg.deriv.partial(p, k).max_abs_diff(&expect) < 1e-12);
            }
        }
        prop_assert!(pi_multiplicativity_error(&f, &g).unwrap() < 1e-12);
    }

    #[test]
    fn adjoint_derivative_and_sandwich(seed in any::<u64>()) {
        let m = square();
        let f = field(seed, &m, 3, 3);
        prop_assert!(adjoint_derivative_ratio(&f) <= 2f64.sqrt() + 1e-9);
        prop_assert!(sandwich_check(&f).passed());
    }

    #[test]
    fn multiplication_operators_are_contractive(seed in any::<u64>()) {
        let m = circle();
        let a = field(seed, &m, 2, 2);
        let s = Section::new(field(seed ^ 7, &m, 2, 1)).unwrap();
        let image = apply_morphism(&a, &s).unwrap();
        prop_assert!(section_norm_1(&image) <= a.alpha_norm_1() * section_norm_1(&s) * (1.0 + 1e-12));
    }

    #[test]
    fn stabilized_projection_is_a_projection(seed in any::<u64>(), d in 1usize..3) {
        let m = ManifoldModel::torus(&[2.0 * PI], &[96]).unwrap();
        let eps = PI / 4.0;
        let part = build_partition(&m, &ball_cover(&m, eps).unwrap(), eps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gauge = Gauge::random(&mut rng, &m, part.len(), d, 1, 1.0).unwrap();
        let bundle = make_bundle(&m, &part, &gauge).unwrap();
        let proj = build_projection(&m, &bundle, &part).unwrap();
        for p in 0..m.n_points() {
            let q = proj.field.at(p);
            prop_assert!((q * q).max_abs_diff(q) < 1e-10);
            prop_assert!(q.hermitian_defect() < 1e-10);
            prop_assert!((q.trace().re - d as f64).abs() < 1e-10);
        }
    }
}

#[test]
fn identity_jet_norm() {
    let m = circle();
    let one = C1Field::constant(&m, CMatrix::identity(3));
    assert!((one.norm_1() - 1.0).abs() < 1e-15);
    assert!((one.alpha_norm_1() - 1.0).abs() < 1e-15);
}
