//! Check suites. Each suite builds its own data from the scenario and
//! returns one entry per check name.

use std::time::Instant;

use hilbund_core::equivalence::{
    faithfulness_roundtrip, gamma, injectivity_check, surjectivity_roundtrip, BundleMorphism, FaithfulnessInput,
};
use hilbund_core::fourier::{random_spd, FourierField};
use hilbund_core::imagebundle::{dispro_check, image_bundle, select_radius, ProjectionField};
use hilbund_core::invsqrt::{inv_sqrt_eig, inv_sqrt_quad, relative_error};
use hilbund_core::opspace::{
    adjoint_derivative_check, cb_amplify, pi_multiplicativity_error, product_norm_check, sandwich_check, AmplifiedMap,
};
use hilbund_core::partition::{ball_cover, build_partition, verify_partition, PartitionOfUnity};
use hilbund_core::stabilize::{build_projection, make_bundle, stabilization_checks, Gauge, ALGEBRAIC_TOL};
use hilbund_core::stdmodule::{apply_morphism, recover_field, section_norm_1, FieldMorphism, Section};
use hilbund_core::{C1Field, CMatrix, Check, CheckReport, ManifoldModel, Result as CoreResult};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{BundleGenerator, ProjectionGenerator, ScenarioConfig, Suite};

/// Relative errors below this are treated as equal when checking that
/// quadrature improves with more nodes.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Node counts in the quadrature convergence table.
pub const NODE_SCHEDULE: [usize; 5] = [16, 32, 64, 128, 200];

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRow {
    pub matrix: usize,
    pub dim: usize,
    pub condition: f64,
    pub nodes: usize,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisproRow {
    pub center: usize,
    pub distance: f64,
    pub deviation: f64,
}

/// Plot data collected while running.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tables {
    pub quadrature: Vec<QuadratureRow>,
    pub dispro: Vec<DisproRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub suite: Suite,
    pub checks: CheckReport,
    pub wall_time: f64,
}

/// Runs one suite. Errors from the library become a failed
/// `<suite>.completed` check instead of aborting the scenario.
pub fn run_suite(config: &ScenarioConfig, model: &ManifoldModel, suite: Suite, tables: &mut Tables) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.unwrap_or(0));
    rng.set_stream(suite.index());
    let start = Instant::now();
    let mut checks = CheckReport::new();
    let outcome = match suite {
        Suite::Partition => partition_suite(config, model, &mut checks),
        Suite::Opspace => opspace_suite(config, model, &mut rng, &mut checks),
        Suite::Stdmodule => stdmodule_suite(config, model, &mut rng, &mut checks),
        Suite::Stabilize => stabilize_suite(config, model, &mut rng, &mut checks),
        Suite::InverseSqrt => inverse_sqrt_suite(config, &mut rng, &mut checks, tables),
        Suite::ImageBundle => image_suite(config, model, &mut rng, &mut checks, tables),
        Suite::Equivalence => equivalence_suite(config, model, &mut rng, &mut checks),
    };
    if let Err(e) = outcome {
        checks.push(Check::unevaluated(
            &format!("{}.completed", suite.name()),
            &format!("suite runs to completion ({e})"),
            0.0,
            0.0,
        ));
    }
    for c in &mut checks.checks {
        if let Some(&tol) = config.tolerances.get(&c.name) {
            *c = Check::new(&c.name, &c.anchor, c.relation, c.measured, c.bound, tol);
        }
    }
    SuiteResult {
        suite,
        checks,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

fn partition_for(model: &ManifoldModel, eps: f64) -> CoreResult<PartitionOfUnity> {
    build_partition(model, &ball_cover(model, eps)?, eps)
}

fn partition_suite(config: &ScenarioConfig, model: &ManifoldModel, out: &mut CheckReport) -> CoreResult<()> {
    let part = partition_for(model, config.epsilon(model))?;
    out.merge_worst(&verify_partition(model, &part));
    Ok(())
}

fn random_field(rng: &mut ChaCha8Rng, model: &ManifoldModel, rows: usize, cols: usize, degree: u32) -> C1Field {
    FourierField::random(rng, model, rows, cols, degree).sample(model)
}

fn opspace_suite(
    config: &ScenarioConfig,
    model: &ManifoldModel,
    rng: &mut ChaCha8Rng,
    out: &mut CheckReport,
) -> CoreResult<()> {
    let c = &config.corpus;
    let fields: Vec<C1Field> = (0..c.count)
        .map(|_| random_field(rng, model, c.fiber_dim, c.fiber_dim, c.degree))
        .collect();
    let mut pi_err: f64 = 0.0;
    for (i, a) in fields.iter().enumerate() {
        out.merge_worst(&adjoint_derivative_check(a, 1e-6));
        out.merge_worst(&sandwich_check(a));
        pi_err = pi_err.max(pi_multiplicativity_error(a, &fields[(i + 1) % fields.len()])?);
    }
    if !fields.is_empty() {
        out.at_most(
            "opspace.pi_multiplicative_corpus",
            "π(αβ)(x) = π(α)(x)·π(β)(x) entrywise",
            pi_err,
            0.0,
            1e-10,
        );
    }
    for _ in 0..c.count {
        let f = random_field(rng, model, 1, 1, c.degree);
        let f = C1Field::constant(model, CMatrix::identity(c.fiber_dim)).mul_scalar(&f)?;
        let g = random_field(rng, model, c.fiber_dim, c.fiber_dim, c.degree);
        out.merge_worst(&product_norm_check(&f, &g)?);
    }
    for map in [AmplifiedMap::Identity, AmplifiedMap::Involution, AmplifiedMap::Multiplication] {
        let amp = cb_amplify(rng, model, map, c.amplification_level, c.count, c.degree);
        out.merge_worst(&amp.report(1e-9));
    }
    Ok(())
}

fn stdmodule_suite(
    config: &ScenarioConfig,
    model: &ManifoldModel,
    rng: &mut ChaCha8Rng,
    out: &mut CheckReport,
) -> CoreResult<()> {
    let c = &config.corpus;
    let mut ratio: f64 = 0.0;
    for _ in 0..c.count {
        let alpha = random_field(rng, model, c.fiber_dim, c.fiber_dim, c.degree);
        out.merge_worst(&recover_field(model, &FieldMorphism(alpha.clone()), c.fiber_dim)?.report);
        let s = Section::new(random_field(rng, model, c.fiber_dim, 1, c.degree))?;
        let image = apply_morphism(&alpha, &s)?;
        ratio = ratio.max(section_norm_1(&image) / (alpha.alpha_norm_1() * section_norm_1(&s)));
    }
    out.at_most(
        "stdmodule.morphism_bound",
        "‖Φ(α)(s)‖₁ ≤ ‖α‖₁·‖s‖₁",
        ratio,
        1.0,
        1e-12,
    );
    Ok(())
}

fn gauge_for(config: &ScenarioConfig, model: &ManifoldModel, rng: &mut ChaCha8Rng, m: usize, d: usize) -> CoreResult<Gauge> {
    let b = &config.bundle;
    match b.generator {
        BundleGenerator::Trivial => Ok(Gauge::trivial(model, m, d)),
        BundleGenerator::Gauge => Gauge::random(rng, model, m, d, b.degree, b.amplitude),
    }
}

fn stabilize_suite(
    config: &ScenarioConfig,
    model: &ManifoldModel,
    rng: &mut ChaCha8Rng,
    out: &mut CheckReport,
) -> CoreResult<()> {
    let d = config.bundle.fiber_dim;
    let part = partition_for(model, config.epsilon(model))?;
    let gauge = gauge_for(config, model, rng, part.len(), d)?;
    let bundle = make_bundle(model, &part, &gauge)?;
    out.merge_worst(&bundle.validate(ALGEBRAIC_TOL));
    let proj = build_projection(model, &bundle, &part)?;
    out.merge_worst(&proj.report);
    let g = Section::new(random_field(rng, model, d, 1, config.bundle.degree))?;
    let local = gauge.local_data(&g)?;
    let block = Section::new(random_field(rng, model, part.len() * d, 1, config.bundle.degree))?;
    out.merge_worst(&stabilization_checks(model, &bundle, &part, &proj, &local, &block)?);
    Ok(())
}

fn inverse_sqrt_suite(
    config: &ScenarioConfig,
    rng: &mut ChaCha8Rng,
    out: &mut CheckReport,
    tables: &mut Tables,
) -> CoreResult<()> {
    let q = &config.quadrature;
    let mut schedule = NODE_SCHEDULE.to_vec();
    if !schedule.contains(&q.nodes) {
        schedule.push(q.nodes);
        schedule.sort_unstable();
    }
    let (mut at_nodes, mut regress): (f64, f64) = (0.0, f64::NEG_INFINITY);
    for i in 0..q.matrices {
        let dim = rng.gen_range(1..=q.max_dim);
        let condition = if i == 0 {
            q.condition
        } else {
            q.condition.powf(rng.gen::<f64>())
        };
        let a = random_spd(rng, dim, condition);
        let exact = inv_sqrt_eig(&a)?;
        let mut prev: Option<f64> = None;
        for &nodes in &schedule {
            let e = relative_error(&inv_sqrt_quad(&a, nodes)?, &exact);
            tables.quadrature.push(QuadratureRow {
                matrix: i,
                dim,
                condition,
                nodes,
                rel_error: e,
            });
            if nodes == q.nodes {
                at_nodes = at_nodes.max(e);
            }
            if let Some(p) = prev {
                regress = regress.max(e.max(ROUNDOFF_FLOOR) - p.max(ROUNDOFF_FLOOR));
            }
            prev = Some(e);
        }
    }
    let scalar = inv_sqrt_quad(&CMatrix::identity(1), q.nodes)?;
    out.below(
        "invsqrt.rel_error",
        "‖Λ^{-1/2}_quad - Λ^{-1/2}_eig‖ / ‖Λ^{-1/2}_eig‖ < 10⁻⁶",
        at_nodes,
        1e-6,
    )
    .at_most(
        "invsqrt.monotone",
        "quadrature error does not grow with the node count",
        regress.max(0.0),
        0.0,
        0.0,
    )
    .at_most(
        "invsqrt.scalar_identity",
        "(1/π)∫₀^∞ λ^{-1/2}(λ + 1)^{-1} dλ = 1",
        (scalar[(0, 0)].re - 1.0).abs(),
        0.0,
        1e-8,
    );
    Ok(())
}

fn projection_for(config: &ScenarioConfig, model: &ManifoldModel, rng: &mut ChaCha8Rng) -> CoreResult<ProjectionField> {
    let p = &config.projection;
    match p.generator {
        ProjectionGenerator::Constant => {
            let diag: Vec<f64> = (0..p.fiber_dim).map(|i| if i < p.rank { 1.0 } else { 0.0 }).collect();
            ProjectionField::constant(model, CMatrix::diag_real(&diag))
        }
        ProjectionGenerator::Rotating => ProjectionField::random_rotating(rng, model, p.fiber_dim, p.rank, p.max_freq),
        ProjectionGenerator::SpinningLine => ProjectionField::spinning_line(model, p.omega),
    }
}

/// Projection field, chart radius and the partition with `ε = r/2`.
fn image_setup(
    config: &ScenarioConfig,
    model: &ManifoldModel,
    rng: &mut ChaCha8Rng,
) -> CoreResult<(ProjectionField, f64, PartitionOfUnity)> {
    let f = projection_for(config, model, rng)?;
    let r = select_radius(model, &f, config.projection.radius_cap) * config.projection.radius_scale;
    let part = partition_for(model, r / 2.0)?;
    Ok((f, r, part))
}

fn image_suite(
    config: &ScenarioConfig,
    model: &ManifoldModel,
    rng: &mut ChaCha8Rng,
    out: &mut CheckReport,
    tables: &mut Tables,
) -> CoreResult<()> {
    let (f, r, part) = image_setup(config, model, rng)?;
    let (dispro, profile) = dispro_check(model, &f, r, &part.centers);
    out.merge_worst(&dispro);
    tables.dispro.extend(profile.rows.iter().map(|&(distance, deviation)| DisproRow {
        center: profile.center,
        distance,
        deviation,
    }));
    let ib = image_bundle(model, &f, r, &part, Some(config.quadrature.nodes))?;
    out.merge_worst(&ib.report);
    Ok(())
}

fn equivalence_suite(
    config: &ScenarioConfig,
    model: &ManifoldModel,
    rng: &mut ChaCha8Rng,
    out: &mut CheckReport,
) -> CoreResult<()> {
    let (f, r, img_part) = image_setup(config, model, rng)?;
    let ib = image_bundle(model, &f, r, &img_part, None)?;
    out.merge_worst(&surjectivity_roundtrip(model, &f, &ib, &img_part)?);

    let b = &config.bundle;
    let d = b.fiber_dim;
    let part = partition_for(model, config.epsilon(model))?;
    let m = part.len();
    let ga = Gauge::random(rng, model, m, d, b.degree, b.amplitude)?;
    let gb = Gauge::random(rng, model, m, d + 1, b.degree, b.amplitude)?;
    let gc = Gauge::random(rng, model, m, d, b.degree, b.amplitude)?;
    let (bundle_a, bundle_b, bundle_c) = (
        make_bundle(model, &part, &ga)?,
        make_bundle(model, &part, &gb)?,
        make_bundle(model, &part, &gc)?,
    );
    let a = random_field(rng, model, d + 1, d, b.degree);
    let bb = random_field(rng, model, d, d + 1, b.degree);
    let alpha = BundleMorphism::from_gauges(&ga, &gb, &a, &bundle_a.domains)?;
    let beta = BundleMorphism::from_gauges(&gb, &gc, &bb, &bundle_a.domains)?;
    let input = FaithfulnessInput {
        partition: &part,
        source: &bundle_a,
        target: &bundle_b,
        alpha: &alpha,
        next: Some((&bundle_c, &beta)),
    };
    out.merge_worst(&faithfulness_roundtrip(rng, model, &input, config.corpus.count)?);

    // a second morphism that differs from α only where the first bump lives
    let bump = part.sqrt_bumps[0].mul(&part.sqrt_bumps[0])?;
    let e = C1Field::constant(model, CMatrix::identity(d + 1).block(0, 0, d + 1, d));
    let a2 = a.add(&e.mul_scalar(&bump)?)?;
    let alpha2 = BundleMorphism::from_gauges(&ga, &gb, &a2, &bundle_a.domains)?;
    let (g1, g2) = (gamma(model, &part, &alpha)?, gamma(model, &part, &alpha2)?);
    out.merge_worst(&injectivity_check(model, &part, &bundle_a, &g1, &g2)?.report);
    out.merge_worst(&injectivity_check(model, &part, &bundle_a, &g1, &g1)?.report);
    Ok(())
}
