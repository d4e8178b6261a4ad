//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use hilbund::config::{Overrides, ScenarioConfig};
use hilbund_core::equivalence::{faithfulness_roundtrip, surjectivity_roundtrip, BundleMorphism, FaithfulnessInput};
use hilbund_core::fourier::{random_spd, FourierField};
use hilbund_core::imagebundle::{dispro_check, image_bundle, select_radius, ProjectionField};
use hilbund_core::invsqrt::{inv_sqrt_eig, inv_sqrt_quad, relative_error};
use hilbund_core::opspace::{adjoint_derivative_ratio, pi_multiplicativity_error};
use hilbund_core::partition::{ball_cover, build_partition, PartitionOfUnity};
use hilbund_core::stabilize::{build_projection, make_bundle, stabilization_checks, Gauge};
use hilbund_core::stdmodule::{apply_morphism, recover_field, section_norm_1, FieldMorphism, Section};
use hilbund_core::{C1Field, CMatrix, CheckReport, ManifoldModel, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn circle(n: usize) -> ManifoldModel {
    ManifoldModel::torus(&[2.0 * PI], &[n]).unwrap()
}

fn partition(model: &ManifoldModel, eps: f64) -> PartitionOfUnity {
    build_partition(model, &ball_cover(model, eps).unwrap(), eps).unwrap()
}

fn require(report: &CheckReport, names: &[&str]) -> Result<(), String> {
    for n in names {
        match report.get(n) {
            Some(c) if c.passed => {}
            Some(c) => return Err(format!("{n}: {} vs {} ({})", c.measured, c.bound, c.anchor)),
            None => return Err(format!("{n} missing")),
        }
    }
    Ok(())
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t < limit {
        Ok(())
    } else {
        Err(format!("took {t:?}, limit {limit:?}"))
    }
}

fn corpus() -> (ManifoldModel, Vec<C1Field>) {
    let model = ManifoldModel::torus(&[2.0 * PI, 2.0 * PI], &[64, 64]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fields = (0..100)
        .map(|_| FourierField::random(&mut rng, &model, 4, 4, 3).sample(&model))
        .collect();
    (model, fields)
}

fn adjoint_derivative(fields: &[C1Field], start: Instant) -> Result<String, String> {
    let worst = fields.iter().map(adjoint_derivative_ratio).fold(0.0, f64::max);
    within(Duration::from_secs(10), start)?;
    if worst <= SQRT_2 + 1e-6 {
        Ok(format!("max ratio {worst:.6} ≤ √2"))
    } else {
        Err(format!("max ratio {worst} > √2"))
    }
}

fn pi_multiplicative(fields: &[C1Field]) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for (i, a) in fields.iter().enumerate() {
        let b = &fields[(i + 1) % fields.len()];
        worst = worst.max(pi_multiplicativity_error(a, b).map_err(|e| e.to_string())?);
    }
    if worst < 1e-10 {
        Ok(format!("max entry error {worst:.2e}"))
    } else {
        Err(format!("max entry error {worst:e}"))
    }
}

fn product_norm() -> Result<String, String> {
    let model = circle(256);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = FourierField::random(&mut rng, &model, 1, 1, 3).sample(&model);
        let g = FourierField::random(&mut rng, &model, 3, 3, 3).sample(&model);
        let fg = g.mul_scalar(&f).map_err(|e| e.to_string())?;
        worst = worst.max(fg.norm_1() / (f.norm_1() * g.norm_1()));
    }
    if worst > 5f64.sqrt() + 1e-12 {
        return Err(format!("ratio {worst} > √5"));
    }
    let e = FourierField::mode(&model, &[1], CMatrix::scalar(C64::new(1.0, 0.0))).sample(&model);
    let ee = e.mul(&e).map_err(|err| err.to_string())?;
    let (lhs, rhs) = (ee.norm_1(), e.norm_1() * e.norm_1());
    if (lhs - 5f64.sqrt()).abs() > 1e-6 || (rhs - 2.0).abs() > 1e-6 {
        return Err(format!("e^{{iθ}} pair gives {lhs} and {rhs}"));
    }
    Ok(format!("max ratio {worst:.4} ≤ √5; e^{{iθ}}: ‖fg‖₁ = {lhs:.6}, ‖f‖₁‖g‖₁ = {rhs:.6}"))
}

fn morphism_correspondence() -> Result<String, String> {
    let model = circle(128);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut roundtrip: f64 = 0.0;
    for _ in 0..20 {
        let a = FourierField::random(&mut rng, &model, 3, 2, 2).sample(&model);
        let rec = recover_field(&model, &FieldMorphism(a.clone()), 2).map_err(|e| e.to_string())?;
        roundtrip = roundtrip
            .max(rec.alpha.value.max_abs_diff(&a.value))
            .max(rec.alpha.deriv.max_abs_diff(&a.deriv));
    }
    let mut ratio: f64 = 0.0;
    for _ in 0..100 {
        let a = FourierField::random(&mut rng, &model, 3, 2, 2).sample(&model);
        let s = Section::new(FourierField::random(&mut rng, &model, 2, 1, 2).sample(&model)).unwrap();
        let image = apply_morphism(&a, &s).map_err(|e| e.to_string())?;
        ratio = ratio.max(section_norm_1(&image) / (a.alpha_norm_1() * section_norm_1(&s)));
    }
    if roundtrip > 1e-10 {
        return Err(format!("Φ⁻¹∘Φ error {roundtrip:e}"));
    }
    if ratio > 1.0 + 1e-12 {
        return Err(format!("‖Φ(α)(s)‖₁ / (‖α‖₁‖s‖₁) = {ratio}"));
    }
    Ok(format!("Φ⁻¹∘Φ error {roundtrip:.2e}; max norm ratio {ratio:.4}"))
}

fn stabilization(start: Instant) -> Result<String, String> {
    let model = circle(256);
    let part = partition(&model, PI / 4.0);
    if part.len() != 8 {
        return Err(format!("partition has {} members", part.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_dp: f64 = 0.0;
    for _ in 0..10 {
        let d = rng.gen_range(1..=3);
        let gauge = Gauge::random(&mut rng, &model, part.len(), d, 1, 1.0).map_err(|e| e.to_string())?;
        let bundle = make_bundle(&model, &part, &gauge).map_err(|e| e.to_string())?;
        let proj = build_projection(&model, &bundle, &part).map_err(|e| e.to_string())?;
        require(
            &proj.report,
            &["stabilize.idempotent", "stabilize.selfadjoint", "stabilize.spectrum", "stabilize.derivative_bound"],
        )?;
        for name in ["stabilize.idempotent", "stabilize.selfadjoint"] {
            let c = proj.report.get(name).unwrap();
            if c.measured > 1e-10 {
                return Err(format!("{name} = {:e}", c.measured));
            }
        }
        if proj.report.get("stabilize.spectrum").unwrap().measured > 1e-8 {
            return Err("spectrum off {0, 1}".into());
        }
        let g = Section::new(FourierField::random(&mut rng, &model, d, 1, 2).sample(&model)).unwrap();
        let local = gauge.local_data(&g).map_err(|e| e.to_string())?;
        let block = Section::new(FourierField::random(&mut rng, &model, part.len() * d, 1, 1).sample(&model)).unwrap();
        let rt = stabilization_checks(&model, &bundle, &part, &proj, &local, &block).map_err(|e| e.to_string())?;
        require(&rt, &["stabilize.psi_phi"])?;
        if rt.get("stabilize.psi_phi").unwrap().measured > 1e-10 {
            return Err("Ψ∘Φ ≠ id".into());
        }
        let c = proj.report.get("stabilize.derivative_bound").unwrap();
        worst_dp = worst_dp.max(c.measured / c.bound);
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("10 bundles; max D_P / K^{{3/2}}(C_τ + C_χ) = {worst_dp:.3}"))
}

fn inverse_sqrt() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let k = rng.gen_range(1..=8);
        let cond = if i % 5 == 0 { 1e3 } else { 1e3f64.powf(rng.gen::<f64>()) };
        let a = random_spd(&mut rng, k, cond);
        let exact = inv_sqrt_eig(&a).map_err(|e| e.to_string())?;
        // the eig route itself: X Λ X = I
        let check = &(&exact * &a) * &exact;
        if check.max_abs_diff(&CMatrix::identity(k)) > 1e-10 {
            return Err("eigendecomposition inverse square root is off".into());
        }
        let mut prev = f64::INFINITY;
        for nodes in [16, 32, 64, 128, 256] {
            let e = relative_error(&inv_sqrt_quad(&a, nodes).map_err(|e| e.to_string())?, &exact);
            if e.max(1e-12) > prev.max(1e-12) {
                return Err(format!("error grew to {e:e} at {nodes} nodes"));
            }
            prev = e;
        }
        let e200 = relative_error(&inv_sqrt_quad(&a, 200).map_err(|e| e.to_string())?, &exact);
        worst = worst.max(e200);
    }
    let one = inv_sqrt_quad(&CMatrix::identity(1), 200).map_err(|e| e.to_string())?[(0, 0)].re;
    if worst >= 1e-6 || (one - 1.0).abs() > 1e-8 {
        return Err(format!("rel error {worst:e}, scalar identity {one}"));
    }
    Ok(format!("max rel error at 200 nodes {worst:.2e}; scalar integral {one:.12}"))
}

fn image_bundles(start: Instant) -> Result<String, String> {
    let model = circle(256);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut charts = 0;
    for i in 0..10 {
        let rank = 1 + i % 2;
        let f = ProjectionField::random_rotating(&mut rng, &model, 3, rank, 1).map_err(|e| e.to_string())?;
        let r = select_radius(&model, &f, 1.0);
        let part = partition(&model, r / 2.0);
        let ib = image_bundle(&model, &f, r, &part, None).map_err(|e| e.to_string())?;
        require(
            &ib.report,
            &[
                "image.chart_distance",
                "image.gram_inverse",
                "image.w_isometry",
                "image.w_onto",
                "image.dw",
                "image.c_tau",
                "bundle.cocycle",
            ],
        )
        .map_err(|e| format!("field {i} (rank {rank}): {e}"))?;
        charts += ib.frames.len();
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("10 fields, {charts} charts, all frame and transition bounds hold"))
}

fn negative_control() -> Result<String, String> {
    let model = circle(256);
    let f = ProjectionField::spinning_line(&model, 4).map_err(|e| e.to_string())?;
    let r = 10.0 * select_radius(&model, &f, 1.0);
    let part = partition(&model, r / 2.0);
    let (report, _) = dispro_check(&model, &f, r, &part.centers);
    let c = report.get("image.chart_distance").ok_or("chart distance check missing")?;
    if c.passed {
        Err(format!("no violation at r = {r}: max deviation {}", c.measured))
    } else {
        Ok(format!("r = {r:.4}: max ‖𝒫(y) - 𝒫(z)‖ = {:.4} ≥ 1/2", c.measured))
    }
}

fn round_trips(start: Instant) -> Result<String, String> {
    let model = circle(256);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = ProjectionField::random_rotating(&mut rng, &model, 3, 2, 1).map_err(|e| e.to_string())?;
    let r = select_radius(&model, &f, 1.0);
    let img_part = partition(&model, r / 2.0);
    let ib = image_bundle(&model, &f, r, &img_part, None).map_err(|e| e.to_string())?;
    let surj = surjectivity_roundtrip(&model, &f, &ib, &img_part).map_err(|e| e.to_string())?;
    require(&surj, &["equivalence.a_star_a", "equivalence.a_a_star"])?;

    let part = partition(&model, PI / 4.0);
    let m = part.len();
    let ga = Gauge::random(&mut rng, &model, m, 2, 1, 1.0).map_err(|e| e.to_string())?;
    let gb = Gauge::random(&mut rng, &model, m, 3, 1, 1.0).map_err(|e| e.to_string())?;
    let gc = Gauge::random(&mut rng, &model, m, 2, 1, 1.0).map_err(|e| e.to_string())?;
    let ba = make_bundle(&model, &part, &ga).map_err(|e| e.to_string())?;
    let bb = make_bundle(&model, &part, &gb).map_err(|e| e.to_string())?;
    let bc = make_bundle(&model, &part, &gc).map_err(|e| e.to_string())?;
    let a = FourierField::random(&mut rng, &model, 3, 2, 2).sample(&model);
    let b = FourierField::random(&mut rng, &model, 2, 3, 2).sample(&model);
    let alpha = BundleMorphism::from_gauges(&ga, &gb, &a, &ba.domains).map_err(|e| e.to_string())?;
    let beta = BundleMorphism::from_gauges(&gb, &gc, &b, &ba.domains).map_err(|e| e.to_string())?;
    let input = FaithfulnessInput {
        partition: &part,
        source: &ba,
        target: &bb,
        alpha: &alpha,
        next: Some((&bc, &beta)),
    };
    let faith = faithfulness_roundtrip(&mut rng, &model, &input, 50).map_err(|e| e.to_string())?;
    require(
        &faith,
        &[
            "equivalence.reconstruction",
            "equivalence.coverage",
            "equivalence.gamma_adjoint",
            "equivalence.functorial",
        ],
    )?;
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "A*A = 𝒫 to {:.1e}, AA* = P_stab to {:.1e}, reconstruction to {:.1e}, functoriality to {:.1e}",
        surj.get("equivalence.a_star_a").unwrap().measured,
        surj.get("equivalence.a_a_star").unwrap().measured,
        faith.get("equivalence.reconstruction").unwrap().measured,
        faith.get("equivalence.functorial").unwrap().measured,
    ))
}

fn determinism() -> Result<String, String> {
    let text = include_str!("../scenarios/gauge_bundle.toml");
    let run = || {
        let config = ScenarioConfig::from_toml(text).map_err(|e| e.to_string())?;
        hilbund::run_config(config, &Overrides::default(), false)
            .map_err(|e| e.to_string())?
            .report
            .to_json()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    if a == b {
        Ok(format!("two runs give identical {}-byte reports", a.len()))
    } else {
        Err("reports differ".into())
    }
}

fn record(outcomes: &mut Vec<Outcome>, n: usize, name: &str, result: Result<String, String>) {
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    println!("{} {n:>2} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    outcomes.push(Outcome { passed, detail });
}

#[test]
fn acceptance() {
    let mut out = Vec::new();
    let start = Instant::now();
    let (_, fields) = corpus();
    record(&mut out, 1, "adjoint derivative ≤ √N", adjoint_derivative(&fields, start));
    record(&mut out, 2, "π multiplicative", pi_multiplicative(&fields));
    drop(fields);
    record(&mut out, 3, "product norm ≤ √5", product_norm());
    record(&mut out, 4, "morphism correspondence", morphism_correspondence());
    record(&mut out, 5, "stabilization", stabilization(Instant::now()));
    record(&mut out, 6, "inverse square root quadrature", inverse_sqrt());
    record(&mut out, 7, "image bundle", image_bundles(Instant::now()));
    record(&mut out, 8, "negative control", negative_control());
    record(&mut out, 9, "bundle/module round trips", round_trips(Instant::now()));
    record(&mut out, 10, "determinism", determinism());
    let failed: Vec<&str> = out.iter().filter(|o| !o.passed).map(|o| o.detail.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
