use frontal_core::checks;
use frontal_core::generators::{GeneratorKind, GeneratorSpec};
use frontal_core::{invariant_frame, Domain, FrontalSurface};
use nalgebra::Matrix2;
use proptest::prelude::*;
use std::sync::OnceLock;

fn surfaces() -> &'static [FrontalSurface] {
    static S: OnceLock<Vec<FrontalSurface>> = OnceLock::new();
    S.get_or_init(|| {
        let d = Domain::square(0.5);
        vec![
            GeneratorSpec::new(GeneratorKind::Rank1Front, d).with("lambda", "v*(2 + sin(u))").build().unwrap(),
            GeneratorSpec::new(GeneratorKind::Rank0Front, d).with("h", "(u^3 + v^3)/6").build().unwrap(),
            GeneratorSpec::new(GeneratorKind::ExtendableKWave, d)
                .with("c", "-1")
                .with("h1", "u^3/6")
                .with("h2", "u^3/6")
                .build()
                .unwrap(),
        ]
    })
}

proptest! {
    #[test]
    fn decomposition_and_symmetry(i in 0usize..3, u in -0.5..0.5f64, v in -0.5..0.5f64) {
        let f = invariant_frame(&surfaces()[i], u, v).unwrap();
        let (x, n) = checks::decomposition(std::slice::from_ref(&f));
        prop_assert!(x <= 1e-9 && n <= 1e-8);
        prop_assert!(checks::symmetry(&f) <= 1e-9);
    }

    #[test]
    fn invariants_transform_under_change_of_basis(
        i in 0usize..3, u in -0.5..0.5f64, v in -0.5..0.5f64,
        m in proptest::array::uniform4(-1.0..1.0f64),
    ) {
        let t = Matrix2::new(m[0], m[1], m[2], m[3]);
        prop_assume!(t.determinant().abs() > 0.1);
        let f = invariant_frame(&surfaces()[i], u, v).unwrap();
        let lambda = (f.lambda_m * t.try_inverse().unwrap().transpose()).determinant();
        let k = (f.mu * t.try_inverse().unwrap().transpose()).determinant();
        let scale = t.determinant().recip();
        prop_assert!((lambda - scale * f.lambda).abs() <= 1e-9 * (1.0 + f.lambda.abs()));
        prop_assert!((k - scale * f.k_omega).abs() <= 1e-9 * (1.0 + f.k_omega.abs()));
    }
}
