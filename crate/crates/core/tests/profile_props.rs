use gsg_core::profile::{concave_conjugate, convex_conjugate, FunctionProfile};
use gsg_core::sequence::{defining_sequence, indicator_eval, ln_factorial, lemma1_check, LogSequence, Role};
use proptest::prelude::*;

fn alphas() -> impl Strategy<Value = FunctionProfile> {
    prop_oneof![
        Just(FunctionProfile::quadratic()),
        Just(FunctionProfile::exp_minus_one()),
        Just(FunctionProfile::entropy()),
        (1.2f64..4.0).prop_map(FunctionProfile::power),
    ]
}

fn betas() -> impl Strategy<Value = FunctionProfile> {
    prop_oneof![
        Just(FunctionProfile::log_growth()),
        Just(FunctionProfile::linear()),
        (0.1f64..1.0).prop_map(FunctionProfile::power),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convex_conjugate_is_nonnegative_and_young(alpha in alphas(), r in 1e-3f64..50.0, s in 1e-3f64..10.0) {
        let a = convex_conjugate(&alpha, r).unwrap().to_f64();
        prop_assert!(a >= 0.0);
        // Young: r s ≤ α(s) + α_*(r)
        prop_assert!(r * s <= alpha.eval(s) + a + 1e-9 * (1.0 + r * s));
    }

    #[test]
    fn convex_conjugate_is_superadditive(alpha in alphas(), r in 1e-2f64..30.0) {
        let one = convex_conjugate(&alpha, r).unwrap().to_f64();
        let two = convex_conjugate(&alpha, 2.0 * r).unwrap().to_f64();
        prop_assert!(2.0 * one <= two * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn concave_conjugate_is_nonpositive(beta in betas(), t in 1e-2f64..20.0, s in 1e-3f64..1e3) {
        let b = concave_conjugate(&beta, t).unwrap().to_f64();
        prop_assert!(b <= 1e-12);
        prop_assert!(b <= s * t - beta.eval(s) + 1e-9 * (1.0 + s * t));
    }

    #[test]
    fn power_conjugate_closed_form(gamma in 1.1f64..5.0, r in 1e-2f64..20.0) {
        let got = convex_conjugate(&FunctionProfile::power(gamma), r).unwrap().to_f64();
        let want = (gamma - 1.0) * (r / gamma).powf(gamma / (gamma - 1.0));
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1e-12), "{got} vs {want}");
    }

    #[test]
    fn saddle_identity_holds_for_powers(gamma in 1.2f64..4.0, k in 1usize..30) {
        let c = lemma1_check(&FunctionProfile::power(gamma), k).unwrap();
        prop_assert!(c.difference <= 1e-8 * (1.0 + c.ln_lhs.abs()), "{c:?}");
    }

    #[test]
    fn indicator_is_nondecreasing(p in 0.3f64..2.0, s in 1e-2f64..1e3, h in 1.0f64..10.0) {
        let seq = LogSequence::factorial_power(120, p);
        let lo = indicator_eval(&seq, s).unwrap();
        let hi = indicator_eval(&seq, h * s).unwrap();
        prop_assert!(hi.ln_value >= lo.ln_value - 1e-12);
    }
}

#[test]
fn defining_sequences_are_log_convex() {
    for alpha in [FunctionProfile::quadratic(), FunctionProfile::exp_minus_one(), FunctionProfile::entropy()] {
        let a = defining_sequence(&alpha, Role::AFromAlpha, 60).unwrap();
        for k in 1..60 {
            let mid = 2.0 * a.ln(k);
            assert_le(mid, a.ln(k - 1) + a.ln(k + 1) + 1e-9 * (1.0 + mid.abs()));
        }
    }
}

#[test]
fn factorial_sequence_matches_log_sum() {
    for k in [0usize, 1, 5, 20, 170, 500] {
        let want: f64 = (2..=k).map(|j| (j as f64).ln()).sum();
        assert!((ln_factorial(k) - want).abs() <= 1e-10 * (1.0 + want), "k = {k}");
    }
}

fn assert_le(a: f64, b: f64) {
    assert!(a <= b, "{a} > {b}");
}
