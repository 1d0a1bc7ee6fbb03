//! Acceptance gate. Each test prints one `criterion N: PASS|FAIL` line to the
//! uncaptured stderr and then asserts.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hopfdec::commands::{convergence_sequence, random_pairs};
use hopfdec::config::ConvergenceFamily;
use hopfdec::dec::{
    build_cone_mesh, build_sphere3_mesh, coboundary, cup, integrate_top, solve_primitive_with,
    Cochain, PrimitiveOptions, SimplicialComplex,
};
use hopfdec::heisenberg::{
    cc_distance, frame_at, group_mul, lift_curve, metric_comparison_check, push_forward, CcBudget,
    HeisPoint,
};
use hopfdec::hopf::{
    convergence_experiment, gauge_independence_check, homotopy_sweep, hopf_with, pullback,
    radial_sweep, FormSpec, HopfOptions, HopfReport, SampledMap,
};
use hopfdec::maps::{
    figure_eight_on_circle, radial_extension, rank_profile, rotation_homotopy, sphere_dilation,
    BuiltinMap, DEFAULT_RANK_TOL,
};

fn report(n: u32, pass: bool, detail: &str) {
    let line = format!(
        "criterion {n}: {} | {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    // bypass the harness capture so the line always shows
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn level3() -> Arc<SimplicialComplex> {
    static MESH: OnceLock<Arc<SimplicialComplex>> = OnceLock::new();
    MESH.get_or_init(|| Arc::new(build_sphere3_mesh(3).unwrap()))
        .clone()
}

fn hopf_map() -> SampledMap {
    SampledMap::from_builtin(level3(), BuiltinMap::hopf()).unwrap()
}

fn hopf_level3_report() -> &'static HopfReport {
    static REPORT: OnceLock<HopfReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        hopf_with(
            &hopf_map(),
            &FormSpec::S2AreaExtended,
            &HopfOptions::default(),
        )
        .unwrap()
    })
}

#[test]
fn criterion_01_hopf_fibration() {
    let start = Instant::now();
    let r = hopf_level3_report();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = (r.value - 1.0).abs() <= 0.05 && r.oracle_value == Some(1) && elapsed <= 300.0;
    report(
        1,
        pass,
        &format!(
            "HI = {:.6}, linking oracle {:?}, closedness {:.3e}, {elapsed:.2} s",
            r.value, r.oracle_value, r.closedness_residual
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_constant_map() {
    let alpha = FormSpec::S2AreaExtended;
    let mut worst: f64 = 0.0;
    for value in [
        vec![0.0, 0.0, 1.0],
        vec![0.6, 0.0, -0.8],
        vec![0.0, 1.0, 0.0],
    ] {
        let f = SampledMap::from_builtin(level3(), BuiltinMap::constant(value, 4)).unwrap();
        let r = hopf_with(&f, &alpha, &HopfOptions::default()).unwrap();
        worst = worst.max(r.value.abs());
    }
    let pass = worst <= 1e-10;
    report(
        2,
        pass,
        &format!("max |HI| over three constant maps = {worst:.3e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_gauge_independence() {
    let shift = gauge_independence_check(&hopf_map(), &FormSpec::S2AreaExtended, 10, 2024).unwrap();
    let pass = shift <= 1e-8;
    report(
        3,
        pass,
        &format!("max shift over 10 random gauges = {shift:.3e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_homotopy_invariance() {
    let alpha = FormSpec::S2AreaExtended;
    let opts = HopfOptions::default();
    let f = hopf_map();
    let rotation = homotopy_sweep(rotation_homotopy(&f, 9).unwrap(), &alpha, &opts).unwrap();
    // a homotopy through non-isometries of the target, which moves the pullback
    let dilation: Vec<(f64, SampledMap)> = (0..9)
        .map(|i| {
            let t = i as f64 / 8.0;
            (t, sphere_dilation(&f, 1.0 + t).unwrap())
        })
        .collect();
    let dilation = homotopy_sweep(dilation, &alpha, &opts).unwrap();
    let pass = rotation.max_deviation <= 0.05 && dilation.max_deviation <= 0.05;
    report(
        4,
        pass,
        &format!(
            "rotation sweep max deviation {:.3e}, dilation sweep max deviation {:.3e}",
            rotation.max_deviation, dilation.max_deviation
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_radial_constancy() {
    let base = level3();
    let cone = build_cone_mesh(base.clone(), 4).unwrap();
    let f0 = SampledMap::from_builtin(base, BuiltinMap::hopf()).unwrap();
    let f = radial_extension(&f0, &cone).unwrap();
    let sweep = radial_sweep(
        &f,
        &cone,
        &[0.25, 0.5, 0.75],
        &FormSpec::S2AreaExtended,
        &HopfOptions::default(),
    )
    .unwrap();
    let reference = hopf_level3_report().value;
    let off = sweep
        .rows
        .iter()
        .map(|r| (r.report.value - reference).abs())
        .fold(0.0, f64::max);
    let values: Vec<String> = sweep
        .rows
        .iter()
        .map(|r| format!("{:.6}", r.report.value))
        .collect();
    let pass = sweep.spread <= 0.05 && off <= 0.05;
    report(
        5,
        pass,
        &format!(
            "ring values [{}], spread {:.3e}, max offset from sphere value {off:.3e}",
            values.join(", "),
            sweep.spread
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_convergence_table() {
    let g = hopf_map();
    let alpha = FormSpec::S2AreaExtended;
    let opts = HopfOptions::default();
    let table = |family| {
        let seq = convergence_sequence(&g, family, 8).unwrap();
        convergence_experiment(&seq, &g, &alpha, 2.0, &opts).unwrap()
    };
    let rotation = table(ConvergenceFamily::Rotation);
    let last = rotation.rows.last().unwrap();
    let pass =
        rotation.is_monotone(1e-10) && last.pullback_difference < 0.02 && last.hi_difference < 0.02;
    // companion sequence whose pullbacks actually move; reported, not gated
    let dilation = table(ConvergenceFamily::Dilation);
    let d = dilation.rows.last().unwrap();
    report(
        6,
        pass,
        &format!(
            "R_1/k: monotone {}, k=8 pullback diff {:.3e}, HI diff {:.3e}; \
             D_1+1/k (not gated): monotone {}, k=8 pullback diff {:.4}, HI diff {:.4}, bound ratio {:.3}",
            rotation.is_monotone(1e-10),
            last.pullback_difference,
            last.hi_difference,
            dilation.is_monotone(0.0),
            d.pullback_difference,
            d.hi_difference,
            d.bound_ratio.unwrap_or(f64::NAN)
        ),
    );
    assert!(pass);
}

fn integer_cochain(m: &Arc<SimplicialComplex>, degree: usize, seed: u64) -> Cochain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..m.count(degree))
        .map(|_| rng.gen_range(-50..=50) as f64)
        .collect();
    Cochain::from_values(m.clone(), degree, values).unwrap()
}

#[test]
fn criterion_07_dec_algebra() {
    let m = Arc::new(build_sphere3_mesh(2).unwrap());
    let mut dd: f64 = 0.0;
    let mut stokes: f64 = 0.0;
    for (seed, k) in (0..2).enumerate() {
        let c = integer_cochain(&m, k, seed as u64);
        dd = dd.max(coboundary(&coboundary(&c).unwrap()).unwrap().max_abs());
    }
    for seed in 0..5 {
        let c = integer_cochain(&m, 2, 10 + seed);
        stokes = stokes.max(integrate_top(&coboundary(&c).unwrap()).unwrap().abs());
    }
    let mut leibniz: f64 = 0.0;
    let mut parts: f64 = 0.0;
    for seed in 0..5u64 {
        for p in 0..=2usize {
            let q = 2 - p;
            let a = Cochain::random(m.clone(), p, 100 + seed).unwrap();
            let b = Cochain::random(m.clone(), q, 200 + seed).unwrap();
            let (da, db) = (coboundary(&a).unwrap(), coboundary(&b).unwrap());
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let lhs = coboundary(&cup(&a, &b).unwrap()).unwrap();
            let rhs = cup(&da, &b)
                .unwrap()
                .add_scaled(&cup(&a, &db).unwrap(), sign)
                .unwrap();
            leibniz = leibniz.max(lhs.add_scaled(&rhs, -1.0).unwrap().max_abs());
            // integral of da u b + (-1)^p a u db over a closed complex vanishes
            let i1 = integrate_top(&cup(&da, &b).unwrap()).unwrap();
            let i2 = integrate_top(&cup(&a, &db).unwrap()).unwrap();
            parts = parts.max((i1 + sign * i2).abs());
        }
    }
    let pass = dd == 0.0 && stokes == 0.0 && leibniz <= 1e-12 && parts <= 1e-10;
    report(
        7,
        pass,
        &format!(
            "dd = {dd:e}, Stokes sum = {stokes:e} (integer cochains), Leibniz {leibniz:.3e}, by parts {parts:.3e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_primitive_estimate() {
    let alpha = FormSpec::S2AreaExtended;
    let opts = PrimitiveOptions {
        closedness_budget: None,
        ..PrimitiveOptions::default()
    };
    let ratios: Vec<f64> = (1..=3)
        .map(|level| {
            let m = Arc::new(build_sphere3_mesh(level).unwrap());
            let f = SampledMap::from_builtin(m, BuiltinMap::hopf()).unwrap();
            let eta = pullback(&f, &alpha).unwrap();
            let omega = solve_primitive_with(&eta, &opts).unwrap().omega;
            omega.metric_norm() / eta.metric_norm()
        })
        .collect();
    let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
    let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
    let pass = hi / lo <= 2.0;
    report(
        8,
        pass,
        &format!(
            "|omega|/|eta| at levels 1-3 = {ratios:.4?}, spread {:.3}x",
            hi / lo
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_heisenberg_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut point = || {
        HeisPoint::new(
            (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            rng.gen_range(-3.0..3.0),
        )
        .unwrap()
    };
    let mut assoc: f64 = 0.0;
    let mut invariance: f64 = 0.0;
    for _ in 0..200 {
        let (a, b, c) = (point(), point(), point());
        let l = group_mul(&group_mul(&a, &b).unwrap(), &c).unwrap();
        let r = group_mul(&a, &group_mul(&b, &c).unwrap()).unwrap();
        for (x, y) in l.coords().iter().zip(r.coords()) {
            assoc = assoc.max((x - y).abs());
        }
        let moved = frame_at(&group_mul(&a, &b).unwrap());
        for (v, w) in frame_at(&b).iter().zip(&moved) {
            let pushed = push_forward(&a, v).unwrap();
            for (x, y) in pushed.components.iter().zip(&w.components) {
                invariance = invariance.max((x - y).abs());
            }
        }
    }

    let n = 10_000;
    let circle: Vec<Vec<f64>> = (0..=n)
        .map(|i| {
            let s = TAU * i as f64 / n as f64;
            vec![s.cos(), s.sin()]
        })
        .collect();
    let lift = lift_curve(&circle, 0.0).unwrap();
    let circle_error = (lift.vertical_gap() + 4.0 * PI).abs();
    let contact = lift.contact_residual();

    let budget = CcBudget::default();
    let planar = cc_distance(
        &HeisPoint::identity(1),
        &HeisPoint::h1(1.0, 0.0, 0.0),
        &budget,
    )
    .unwrap()
    .distance_upper;
    let batches = |size: usize| -> Vec<_> {
        (0..2)
            .map(|b| {
                metric_comparison_check(&random_pairs(size, 1.0, b), (-1.0, 1.0), &budget).unwrap()
            })
            .collect()
    };
    let variation = |c: &[hopfdec::heisenberg::MetricComparison]| {
        ((c[1].c_lower - c[0].c_lower) / c[0].c_lower)
            .abs()
            .max(((c[1].c_upper - c[0].c_upper) / c[0].c_upper).abs())
    };
    let large = batches(400);
    let batches = batches(100);
    let finite = batches
        .iter()
        .all(|c| c.c_lower.is_finite() && c.c_upper.is_finite());
    let large_variation = variation(&large);
    let variation = variation(&batches);

    let pass = assoc <= 1e-12
        && invariance == 0.0
        && contact <= 1e-9
        && circle_error <= 1e-6
        && (planar - 1.0).abs() <= 0.01
        && finite
        && variation <= 0.2;
    report(
        9,
        pass,
        &format!(
            "assoc {assoc:.1e}, frame invariance {invariance:e}, lift contact {contact:.1e}, \
             circle dt error {circle_error:.2e}, planar d_cc {planar:.6}, \
             SReq constants ({:.3}, {:.3}) vs ({:.3}, {:.3}), variation {:.1}% \
             (400-pair batches, not gated: {:.1}%)",
            batches[0].c_lower,
            batches[0].c_upper,
            batches[1].c_lower,
            batches[1].c_upper,
            100.0 * variation,
            100.0 * large_variation
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_rank_machinery() {
    let profile = rank_profile(&hopf_map(), DEFAULT_RANK_TOL);
    let hopf_fraction = profile.fraction_at_most(2);
    let affine = SampledMap::from_values(level3(), 3, hopf_map().values().to_vec()).unwrap();
    let affine_fraction = rank_profile(&affine, DEFAULT_RANK_TOL).fraction_at_most(2);

    let loop_map = figure_eight_on_circle(256, 16).unwrap();
    let loop_profile = rank_profile(&loop_map, DEFAULT_RANK_TOL);
    let loop_ok = loop_profile.ranks.iter().all(|r| r.is_some_and(|r| r <= 1));

    let control = SampledMap::from_builtin(level3(), BuiltinMap::full_rank_control(1)).unwrap();
    let gate = hopf_with(&control, &FormSpec::S2AreaExtended, &HopfOptions::default());
    let rejected = matches!(gate, Err(ref e) if e.exit_code() == 2);

    let pass = hopf_fraction >= 0.99 && loop_ok && rejected;
    report(
        10,
        pass,
        &format!(
            "Hopf rank <= 2 on {:.2}% of volume (affine differentials: {:.2}%), \
             figure eight rank <= 1 on all {} segments: {loop_ok}, control rejected: {rejected}",
            100.0 * hopf_fraction,
            100.0 * affine_fraction,
            loop_profile.ranks.len()
        ),
    );
    assert!(pass);
}
