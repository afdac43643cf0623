use frontal_core::curves::{self, DirectionField, FieldKind, Termination};
use frontal_core::generators::{GeneratorKind, GeneratorSpec};
use frontal_core::{Domain, FrontalSurface};
use nalgebra::Vector2;
use proptest::prelude::*;

fn saddle() -> FrontalSurface {
    GeneratorSpec::new(GeneratorKind::FalseSingularity, Domain::square(0.5))
        .with("immersion", "graph")
        .with("phi", "u*v")
        .with("m1", "u^3")
        .with("m2", "v")
        .build()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn asymptotic_traces_stay_asymptotic(u in -0.4..0.4f64, v in -0.4..0.4f64, second in any::<bool>()) {
        let s = saddle();
        let (a, b) = curves::asymptotic_fields(&s, (0.0, 0.0)).unwrap();
        let field = if second { b } else { a };
        let c = curves::trace_flow(&field, (u, v), 0.005, 100, &field.chart);
        prop_assert!(curves::g_asymptotic_residual(&s, &c).unwrap() <= 1e-6);
        prop_assert!(c.vertices.iter().all(|&(_, u, v)| field.chart.contains(u, v)));
    }

    #[test]
    fn traces_are_reproducible(u in -0.4..0.4f64, v in -0.4..0.4f64) {
        let s = saddle();
        let (a, _) = curves::asymptotic_fields(&s, (0.0, 0.0)).unwrap();
        let x = curves::trace_flow(&a, (u, v), 0.01, 50, &a.chart);
        let y = curves::trace_flow(&a, (u, v), 0.01, 50, &a.chart);
        prop_assert_eq!(x.vertices, y.vertices);
    }

    #[test]
    fn time_is_uniform(h in 1e-3..5e-2f64, n in 1usize..40) {
        let d = Domain::square(100.0);
        let f = DirectionField::custom("unit", d, |_, _| Ok(Vector2::new(1.0, 0.0)));
        let c = curves::trace_flow(&f, (0.0, 0.0), h, n, &d);
        prop_assert_eq!(c.vertices.len(), n + 1);
        prop_assert_eq!(c.termination, Termination::StepsExhausted);
        for (i, &(t, _, _)) in c.vertices.iter().enumerate() {
            prop_assert!((t - i as f64 * h).abs() < 1e-12);
        }
    }
}

#[test]
fn fields_are_independent_on_sampled_points() {
    let s = saddle();
    let (a, b) = curves::asymptotic_fields(&s, (0.0, 0.0)).unwrap();
    let points = a.chart.shrink_about((0.0, 0.0), 0.9).grid(10, 10);
    let d = curves::min_independence(&s, &a, &b, &points).unwrap().unwrap();
    assert!(d > 1e-10);
}

#[test]
fn field_kinds_round_trip_through_names() {
    for k in [FieldKind::Asymptotic1, FieldKind::Asymptotic2, FieldKind::CurvatureLine1, FieldKind::CurvatureLine2] {
        assert_eq!(FieldKind::parse(k.as_str()), Some(k));
    }
    assert_eq!(FieldKind::parse("geodesic"), None);
}
