mod common;

use proptest::prelude::*;
use torsmink::geometry::{
    clean_support_vector, hausdorff_distance, minkowski_combine, wulff_shape, ConvexPolygon, DiscreteMeasure,
    SupportVector, UnitVector, Vec2,
};
use torsmink::solver::{functional_fp, objective_and_gradient, SolveConfig};
use torsmink::torsion::{torsion_data, DEFAULT_MESH_H};
use torsmink::verify::{CheckReport, Relation};
use torsmink::Error;

fn angles_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..std::f64::consts::TAU, 3..10)
}

fn polygon_strategy() -> impl Strategy<Value = ConvexPolygon> {
    (any::<u64>(), 3usize..12).prop_map(|(seed, count)| ConvexPolygon::random(seed, count))
}

fn directions(count: usize) -> impl Iterator<Item = UnitVector> {
    (0..count).map(move |k| UnitVector::from_angle(std::f64::consts::TAU * (k as f64 + 0.37) / count as f64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn measure_is_valid_exactly_when_wulff_shape_is_bounded(angles in angles_strategy()) {
        let normals: Vec<UnitVector> = angles.iter().map(|&a| UnitVector::from_angle(a)).collect();
        let measure = DiscreteMeasure::from_angles(&angles, &vec![1.0; angles.len()]);
        let bounded = wulff_shape(&normals, &SupportVector::new(vec![1.0; normals.len()]).unwrap());
        match measure {
            Ok(_) => prop_assert!(bounded.is_ok()),
            Err(Error::HemisphereViolation { .. }) => prop_assert!(matches!(bounded, Err(Error::Unbounded))),
            // Near-coincident angles merge and may leave fewer than three atoms.
            Err(Error::TooFewNormals(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn wulff_and_clean_round_trip(
        seed in any::<u64>(),
        count in 4usize..10,
        y in prop::collection::vec(0.5..1.5f64, 10),
    ) {
        let base = ConvexPolygon::random(seed, count);
        let normals: Vec<UnitVector> = base.facets().iter().map(|f| f.normal).collect();
        let y = SupportVector::new(y[..normals.len()].to_vec()).unwrap();
        let body = wulff_shape(&normals, &y).unwrap();
        let clean = clean_support_vector(&body, &normals);
        for (c, v) in clean.values().iter().zip(y.values()) {
            prop_assert!(*c <= v + 1e-12);
        }
        let again = wulff_shape(&normals, &clean).unwrap();
        prop_assert!(hausdorff_distance(&again, &body).distance < 1e-9);
        let twice = clean_support_vector(&again, &normals);
        for (a, b) in twice.values().iter().zip(clean.values()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn hausdorff_is_a_metric(a in polygon_strategy(), b in polygon_strategy(), c in polygon_strategy()) {
        let d = |x: &ConvexPolygon, y: &ConvexPolygon| hausdorff_distance(x, y).distance;
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        // Exact distance dominates any sampled support gap.
        for u in directions(97) {
            prop_assert!((a.support(u) - b.support(u)).abs() <= d(&a, &b) + 1e-12);
        }
    }

    #[test]
    fn minkowski_support_is_linear(
        a in polygon_strategy(),
        b in polygon_strategy(),
        s in 0.0..3.0f64,
        t in 0.01..3.0f64,
    ) {
        let sum = minkowski_combine(s, &a, t, &b);
        for u in directions(61) {
            let expected = s * a.support(u) + t * b.support(u);
            prop_assert!((sum.support(u) - expected).abs() < 1e-9 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn support_translates_and_scales(p in polygon_strategy(), x in -2.0..2.0f64, y in -2.0..2.0f64, m in 0.1..5.0f64) {
        let shift = Vec2::new(x, y);
        for u in directions(17) {
            prop_assert!((p.translated(shift).support(u) - p.support(u) - u.dot(shift)).abs() < 1e-12);
            prop_assert!((p.scaled(m).support(u) - m * p.support(u)).abs() < 1e-12 * (1.0 + m));
        }
    }

    #[test]
    fn functional_is_homogeneous(p in polygon_strategy(), m in 0.1..5.0f64, exponent in 1.1..6.0f64) {
        let measure = common::lopsided_measure();
        let base = functional_fp(&measure, &p, exponent);
        prop_assert!(base > 0.0 && base.is_finite());
        let scaled = functional_fp(&measure, &p.scaled(m), exponent);
        prop_assert!((scaled / base - m.powf(exponent)).abs() < 1e-10 * m.powf(exponent));
    }

    #[test]
    fn reports_verify_themselves(
        measured in prop_oneof![Just(f64::NAN), -10.0..10.0f64],
        bound in -10.0..10.0f64,
        tolerance in 0.0..1.0f64,
        which in 0usize..3,
    ) {
        let relation = [Relation::AtMost, Relation::AtLeast, Relation::Within][which];
        let r = CheckReport::new("property", relation, measured, bound, tolerance, serde_json::Value::Null);
        prop_assert_eq!(r.recheck(), r.passed);
        // Round trip through JSON and judge again.
        let v = serde_json::to_value(&r).unwrap();
        let reread = |key: &str| v[key].as_f64().unwrap_or(f64::NAN);
        prop_assert_eq!(relation.holds(reread("measured"), reread("bound"), reread("tolerance")), r.passed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn objective_is_scale_invariant(y in prop::collection::vec(0.7..1.4f64, 5), m in prop_oneof![Just(0.3), Just(3.0)]) {
        let measure = common::lopsided_measure();
        let cfg = SolveConfig::new(2.0);
        let g = objective_and_gradient(&measure, &SupportVector::new(y.clone()).unwrap(), &cfg).unwrap().value;
        let scaled: Vec<f64> = y.iter().map(|v| v * m).collect();
        let gs = objective_and_gradient(&measure, &SupportVector::new(scaled).unwrap(), &cfg).unwrap().value;
        prop_assert!((gs - g).abs() <= 1e-6 * g, "{} vs {}", gs, g);
    }

    #[test]
    fn torsion_data_invariants(p in polygon_strategy()) {
        let d = torsion_data(&p, DEFAULT_MESH_H).unwrap();
        prop_assert!(d.rigidity > 0.0);
        prop_assert!(d.facet_measures.iter().all(|m| *m >= 0.0));
        prop_assert!(d.support_identity_gap < 1e-2);
        prop_assert!(d.divergence_identity_gap < 1e-2);
    }
}
