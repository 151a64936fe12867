use gsg_core::cone::{Cone, Sign};
use gsg_core::lowdisc::{dot, norm};
use proptest::prelude::*;

fn cones() -> impl Strategy<Value = Cone> {
    prop_oneof![
        (2usize..5).prop_map(|d| Cone::LorentzForward { d }),
        (2usize..5).prop_map(|d| Cone::LorentzBackward { d }),
        (0.1f64..1.4).prop_map(|h| Cone::Round { axis: vec![1.0, 1.0, 0.0], half_angle: h }),
        Just(Cone::Polyhedral { generators: vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]] }),
        Just(Cone::HalfSpace { normal: vec![0.0, 1.0, -1.0] }),
        Just(Cone::Ray { direction: vec![3.0, -4.0] }),
        Just(Cone::Spectral { n: 2, d: 2, sign: Sign::Minus }),
    ]
}

fn point_for(cone: &Cone) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, cone.dim())
}

fn with_point() -> impl Strategy<Value = (Cone, Vec<f64>)> {
    cones().prop_flat_map(|c| {
        let p = point_for(&c);
        (Just(c), p)
    })
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_idempotent_and_inside((cone, p) in with_point()) {
        let q = cone.project(&p).unwrap();
        prop_assert!(cone.contains(&q).unwrap() || cone.distance(&q).unwrap() < 1e-7);
        let qq = cone.project(&q).unwrap();
        prop_assert!(norm(&sub(&q, &qq)) <= 1e-7 * (1.0 + norm(&q)));
        let d = cone.distance(&p).unwrap();
        prop_assert!((d - norm(&sub(&p, &q))).abs() <= 1e-7 * (1.0 + d));
    }

    #[test]
    fn projection_residual_is_normal((cone, p) in with_point()) {
        // p − P(p) is orthogonal to P(p) and lies in the polar cone −K*
        let q = cone.project(&p).unwrap();
        let r = sub(&p, &q);
        prop_assert!(dot(&r, &q).abs() <= 1e-6 * (1.0 + norm(&p).powi(2)));
        let minus_r: Vec<f64> = r.iter().map(|x| -x).collect();
        prop_assert!(cone.dual_contains(&minus_r).unwrap() || cone.dual().distance(&minus_r).unwrap() < 1e-6);
    }

    #[test]
    fn members_have_zero_distance((cone, p) in with_point()) {
        let inside = cone.contains(&p).unwrap();
        let d = cone.distance(&p).unwrap();
        if inside {
            prop_assert!(d < 1e-9 * (1.0 + norm(&p)));
        } else {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn dual_pairs_nonnegatively((cone, p) in with_point(), y in prop::collection::vec(-5.0f64..5.0, 4)) {
        let y = &y[..cone.dim().min(4)];
        prop_assume!(y.len() == cone.dim());
        let q = cone.project(&p).unwrap();
        if cone.dual_contains(y).unwrap() {
            prop_assert!(dot(&q, y) >= -1e-7 * (1.0 + norm(&q) * norm(y)));
        }
    }

    #[test]
    fn scaling_preserves_membership((cone, p) in with_point(), t in 0.01f64..100.0) {
        let scaled: Vec<f64> = p.iter().map(|x| x * t).collect();
        prop_assert_eq!(cone.contains(&p).unwrap(), cone.contains(&scaled).unwrap());
    }
}

#[test]
fn lorentz_dual_is_itself() {
    for d in 2..6 {
        assert_eq!(Cone::LorentzForward { d }.dual(), Cone::LorentzForward { d });
    }
}
