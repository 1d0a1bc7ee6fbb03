use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use hopfdec::config::ExperimentConfig;
use hopfdec::dec::{
    build_sphere2_mesh, build_sphere3_mesh, coboundary, cup, cup_with, integrate_top,
    solve_primitive_with, Cochain, CupProduct, PrimitiveOptions, SimplicialComplex,
};
use hopfdec::heisenberg::{
    cc_distance, contact_form, frame_at, group_inv, group_mul, lift_curve, push_forward, CcBudget,
    HeisPoint,
};
use hopfdec::hopf::{hopf_with, linking_oracle, FormSpec, HopfOptions, SampledMap};
use hopfdec::maps::{rank_profile, BuiltinMap};

fn s3(level: usize) -> Arc<SimplicialComplex> {
    static MESHES: OnceLock<Vec<Arc<SimplicialComplex>>> = OnceLock::new();
    MESHES.get_or_init(|| {
        (0..=2)
            .map(|l| Arc::new(build_sphere3_mesh(l).unwrap()))
            .collect()
    })[level]
        .clone()
}

fn point(n: usize) -> impl Strategy<Value = HeisPoint> {
    (prop::collection::vec(-5.0..5.0f64, 2 * n), -5.0..5.0f64)
        .prop_map(|(z, t)| HeisPoint::new(z, t).unwrap())
}

fn triple() -> impl Strategy<Value = (HeisPoint, HeisPoint, HeisPoint)> {
    (1..=3usize).prop_flat_map(|n| (point(n), point(n), point(n)))
}

fn unit3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter("not too short", |v| {
            v.iter().map(|c| c * c).sum::<f64>() > 0.01
        })
        .prop_map(|v| {
            let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            v.map(|c| c / n)
        })
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_is_associative_with_inverses((a, b, c) in triple()) {
        let l = group_mul(&group_mul(&a, &b).unwrap(), &c).unwrap();
        let r = group_mul(&a, &group_mul(&b, &c).unwrap()).unwrap();
        prop_assert!(close(&l.coords(), &r.coords(), 1e-12));
        let e = group_mul(&group_inv(&a), &a).unwrap();
        prop_assert!(e.coords().iter().all(|x| x.abs() <= 1e-12));
    }

    #[test]
    fn frame_is_left_invariant_and_horizontal((g, p, _) in triple()) {
        let moved = frame_at(&group_mul(&g, &p).unwrap());
        for (v, w) in frame_at(&p).iter().zip(&moved).take(2 * p.n()) {
            let pushed = push_forward(&g, v).unwrap();
            prop_assert!(close(&pushed.components, &w.components, 1e-12));
            prop_assert!(contact_form(&pushed.base, &pushed).unwrap().abs() <= 1e-11);
        }
    }

    #[test]
    fn lifted_polylines_are_horizontal(
        base in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 4), 2..40),
        t0 in -3.0..3.0f64,
    ) {
        let c = lift_curve(&base, t0).unwrap();
        prop_assert!(c.contact_residual() <= 1e-9);
        prop_assert_eq!(c.t0(), t0);
    }

    #[test]
    fn coboundary_squares_to_zero(k in 0..2usize, seed in any::<u64>()) {
        let c = Cochain::random(s3(1), k, seed).unwrap();
        prop_assert!(coboundary(&coboundary(&c).unwrap()).unwrap().max_abs() <= 1e-14);
    }

    #[test]
    fn leibniz_and_integration_by_parts(p in 0..=2usize, seed in any::<u64>(), symmetric in any::<bool>()) {
        let m = s3(1);
        let q = 2 - p;
        let variant = if symmetric { CupProduct::Symmetrized } else { CupProduct::AlexanderWhitney };
        let a = Cochain::random(m.clone(), p, seed).unwrap();
        let b = Cochain::random(m.clone(), q, seed.wrapping_add(1)).unwrap();
        let (da, db) = (coboundary(&a).unwrap(), coboundary(&b).unwrap());
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let i1 = integrate_top(&cup_with(&da, &b, variant).unwrap()).unwrap();
        let i2 = integrate_top(&cup_with(&a, &db, variant).unwrap()).unwrap();
        prop_assert!((i1 + sign * i2).abs() <= 1e-10);
        if !symmetric {
            let lhs = coboundary(&cup(&a, &b).unwrap()).unwrap();
            let rhs = cup(&da, &b).unwrap().add_scaled(&cup(&a, &db).unwrap(), sign).unwrap();
            prop_assert!(lhs.add_scaled(&rhs, -1.0).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn primitive_of_exact_form_recovers_it(seed in any::<u64>()) {
        let m = s3(1);
        let eta = coboundary(&Cochain::random(m, 1, seed).unwrap()).unwrap();
        let p = solve_primitive_with(&eta, &PrimitiveOptions::default()).unwrap();
        let back = coboundary(&p.omega).unwrap();
        prop_assert!(back.add_scaled(&eta, -1.0).unwrap().norm() <= 1e-8 * (1.0 + eta.norm()));
    }

    #[test]
    fn gauge_shifts_leave_the_invariant_alone(seed in any::<u64>()) {
        let f = SampledMap::from_builtin(s3(2), BuiltinMap::hopf()).unwrap();
        let opts = HopfOptions { closedness_budget: None, gauge_trials: 2, seed, oracle: false, ..HopfOptions::default() };
        let r = hopf_with(&f, &FormSpec::S2AreaExtended, &opts).unwrap();
        prop_assert!(r.gauge_check <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn target_rotations_preserve_the_invariant(angle in -3.2..3.2f64) {
        let opts = HopfOptions { closedness_budget: None, gauge_trials: 0, oracle: false, ..HopfOptions::default() };
        let alpha = FormSpec::S2AreaExtended;
        let base = hopf_with(&SampledMap::from_builtin(s3(2), BuiltinMap::hopf()).unwrap(), &alpha, &opts).unwrap();
        let f = SampledMap::from_builtin(s3(2), BuiltinMap::hopf_rotated(angle)).unwrap();
        let r = hopf_with(&f, &alpha, &opts).unwrap();
        prop_assert!((r.value - base.value).abs() <= 1e-9);
    }

    #[test]
    fn hopf_differentials_have_rank_two(angle in -3.2..3.2f64) {
        let f = SampledMap::from_builtin(s3(2), BuiltinMap::hopf_rotated(angle)).unwrap();
        prop_assert_eq!(rank_profile(&f, 0.05).max_rank(), 2);
    }

    #[test]
    fn distinct_hopf_fibers_link_once(a in unit3(), b in unit3()) {
        let gap: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        prop_assume!(gap > 0.05);
        prop_assert_eq!(linking_oracle(a, b).unwrap(), 1);
    }

    #[test]
    fn distance_estimates_are_ordered(p in point(1), q in point(1)) {
        let budget = CcBudget { restarts: 2, ..CcBudget::default() };
        let r = cc_distance(&p, &q, &budget).unwrap();
        prop_assert!(r.certified_lower() <= r.distance_upper + 1e-9);
        prop_assert!(r.lower_bound <= p.euclidean_distance(&q) + 1e-12);
    }

    #[test]
    fn configs_round_trip(level in 0..5usize, seed in any::<u64>(), budget in 0.001..1.0f64, p in 1.5..4.0f64) {
        let mut c = ExperimentConfig { mesh_level: level, seed, p_exponent: p, ..ExperimentConfig::default() };
        c.tolerances.closedness_budget = Some(budget);
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(back.hash(), c.hash());
        prop_assert_eq!(back, c);
    }

    #[test]
    fn two_sphere_area_form_integrates_to_one_on_rotated_meshes(angle in -3.2..3.2f64) {
        let m = build_sphere2_mesh(3).unwrap();
        let (s, c) = angle.sin_cos();
        let coords: Vec<f64> = (0..m.vertex_count())
            .flat_map(|v| {
                let p = m.vertex(v);
                [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]]
            })
            .collect();
        let rotated = Arc::new(m.with_coordinates(3, coords).unwrap());
        let id = SampledMap::from_builtin(rotated, BuiltinMap::Inclusion { dim: 3 }).unwrap();
        let eta = hopfdec::hopf::pullback(&id, &FormSpec::S2AreaExtended).unwrap();
        prop_assert!((integrate_top(&eta).unwrap() - 1.0).abs() <= 0.02);
    }
}
