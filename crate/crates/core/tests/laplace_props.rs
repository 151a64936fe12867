use gsg_core::cone::Cone;
use gsg_core::laplace::{
    bound23_check, convolution_bound_check, laplace_transform, laplace_transform_with, Convention, DeltaTerm, Density,
    Functional, Transform, TubePoint,
};
use gsg_core::profile::FunctionProfile;
use gsg_core::space::{cauchy_riemann_residual, check_membership_entire_with, Entire, SpaceSpec, TestFunction, TubeGrid};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn exp_density(rate: f64) -> Functional {
    Functional::density(Density::Exponential { rate }, Cone::Ray { direction: vec![1.0] })
}

struct Pointwise<'a>(&'a dyn Entire, &'a dyn Entire);

impl Entire for Pointwise<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, z: &[C]) -> C {
        self.0.eval(z) * self.1.eval(z)
    }
    fn ln_abs(&self, z: &[C]) -> f64 {
        self.0.ln_abs(z) + self.1.ln_abs(z)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exponential_density_closed_form(rate in 0.3f64..4.0, x in -30.0f64..30.0, y in 0.05f64..5.0) {
        let v = laplace_transform(&exp_density(rate), &TubePoint::scalar(x, y)).unwrap();
        let want = 1.0 / (rate - C::i() * C::new(x, y));
        prop_assert!((v - want).norm() <= 1e-8 * want.norm());
    }

    #[test]
    fn transform_is_holomorphic(rate in 0.5f64..3.0, x in -5.0f64..5.0, y in 0.2f64..3.0) {
        let t = Transform { u: exp_density(rate), convention: Convention::Math };
        let r = cauchy_riemann_residual(&t, &[C::new(x, y)], 1e-4);
        prop_assert!(r <= 1e-6, "residual {r}");
    }

    #[test]
    fn physics_convention_reflects(x in -4.0f64..4.0, y in -3.0f64..-0.1, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        let u = Functional::delta_series(1, vec![
            DeltaTerm { index: vec![1], re: c1, im: 0.0 },
            DeltaTerm { index: vec![2], re: 0.0, im: c2 },
        ]);
        let z = C::new(x, y);
        let math = laplace_transform_with(&u, &TubePoint::scalar(-x, -y), Convention::Math).unwrap();
        let phys = laplace_transform_with(&u, &TubePoint::scalar(x, y), Convention::Physics).unwrap();
        prop_assert!((math - phys).norm() <= 1e-12 * (1.0 + math.norm()));
        // v(z) = Σ c_κ z^κ
        let poly = c1 * -z + C::new(0.0, c2) * z * z;
        prop_assert!((phys - poly).norm() <= 1e-12 * (1.0 + poly.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn growth_bound_gives_convolution_bound(rate in 0.5f64..3.0) {
        let u = exp_density(rate);
        let alpha = FunctionProfile::quadratic();
        let beta = FunctionProfile::power(0.5);
        let vp = Cone::Ray { direction: vec![1.0] };
        let b = bound23_check(|z| laplace_transform(&u, z).unwrap(), &alpha, &beta, &vp, 1.0, 100, 5).unwrap();
        prop_assume!(b.passed());
        let grid: Vec<f64> = (0..6).map(|i| -2.0 + 0.8 * i as f64).collect();
        let c = convolution_bound_check(&u, &TestFunction::gaussian(1, 1.0), &beta, 1.0, &grid).unwrap();
        prop_assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn products_stay_in_the_space(c1 in 0.5f64..2.0, c2 in 0.5f64..2.0) {
        let grid = TubeGrid { p_radii: 24, q_radii: 12, ..TubeGrid::default() };
        let spec = SpaceSpec::full(FunctionProfile::quadratic(), FunctionProfile::quadratic(), 1);
        let g = TestFunction::gaussian(1, c1);
        let h = TestFunction::gaussian(1, c2);
        let rg = check_membership_entire_with(&g, &spec, &grid).unwrap();
        let rh = check_membership_entire_with(&h, &spec, &grid).unwrap();
        let prod = Pointwise(&g, &h);
        let rp = check_membership_entire_with(&prod, &spec, &grid).unwrap();
        prop_assert!(rg.passed() && rh.passed() && rp.passed());
        // α(2s) = 4α(s): halving B for the q-weight covers the product of two members
        let (bg, bh, bp) = (rg.constants["B"], rh.constants["B"], rp.constants["B"]);
        prop_assert!(bp <= 2.0 * bg.max(bh), "B: {bg}, {bh} -> {bp}");
        prop_assert!(rp.constants["C"] <= rg.constants["C"] * rh.constants["C"] * 4.0 + 1e-12);
    }
}
