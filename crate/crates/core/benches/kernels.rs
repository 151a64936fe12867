// Parallel vs sequential timings of the data-parallel kernels.
// Run with `cargo bench -p gsg-core`; `--no-default-features` builds the
// sequential fallback only, in which case both variants take the same path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gsg_core::cone::Cone;
use gsg_core::laplace::{bound23_check, laplace_transform, Density, Functional};
use gsg_core::par;
use gsg_core::profile::{involution_check, FunctionProfile};
use gsg_core::sequence::lemma3_sandwich;
use gsg_core::space::{check_membership_entire_with, SpaceSpec, TestFunction, TubeGrid};
use gsg_core::wick::{spectral_fft_demo, LatticeSpec, TwoPointModel, WickCoefficients};

fn both<R>(c: &mut Criterion, name: &str, f: impl Fn() -> R) {
    let mut g = c.benchmark_group(name);
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("mode", "parallel"), |b| b.iter(|| black_box(f())));
    g.bench_function(BenchmarkId::new("mode", "sequential"), |b| b.iter(|| black_box(par::sequential(&f))));
    g.finish();
}

fn profiles(c: &mut Criterion) {
    let alpha = FunctionProfile::exp_minus_one();
    both(c, "involution", || involution_check(&alpha, None, 1e-6).unwrap());
    let beta = FunctionProfile::power(0.5);
    both(c, "sandwich", || lemma3_sandwich(&beta, 0.1, None).unwrap());
}

fn spaces(c: &mut Criterion) {
    let g = TestFunction::gaussian(1, 1.0);
    let spec = SpaceSpec::full(FunctionProfile::quadratic(), FunctionProfile::quadratic(), 1);
    let grid = TubeGrid::default();
    both(c, "membership", || check_membership_entire_with(&g, &spec, &grid).unwrap());
}

fn laplace(c: &mut Criterion) {
    let u = Functional::density(Density::Exponential { rate: 1.0 }, Cone::Ray { direction: vec![1.0] });
    let vp = Cone::Ray { direction: vec![1.0] };
    let (alpha, beta) = (FunctionProfile::quadratic(), FunctionProfile::power(0.5));
    both(c, "bound23", || {
        bound23_check(|z| laplace_transform(&u, z).unwrap(), &alpha, &beta, &vp, 1.0, 200, 3).unwrap()
    });
}

fn wick(c: &mut Criterion) {
    let model = TwoPointModel::rational(1.0, 1);
    let d = WickCoefficients::inverse_factorial(40);
    let lattice = LatticeSpec { sizes: vec![256], ..LatticeSpec::default() };
    both(c, "spectral_256", || spectral_fft_demo(&model, &d, 2, &lattice).unwrap());
}

criterion_group!(benches, profiles, spaces, laplace, wick);
criterion_main!(benches);
