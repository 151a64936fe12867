//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use gsg_core::cone::{Cone, Sign};
use gsg_core::laplace::{
    bound23_check, convolution_bound_check, laplace_transform, Density, Functional, TubePoint,
};
use gsg_core::profile::{check_nonquasianalytic, convex_conjugate, involution_check, involution_grid, FunctionProfile, NqaStatus};
use gsg_core::report::BoundReport;
use gsg_core::sequence::lemma1_check;
use gsg_core::sequence::lemma3_sandwich;
use gsg_core::space::{
    cone_decompose, Decomposed, DecomposeOptions, Entire, Part, TestFunction, TubeGrid,
};
use gsg_core::wick::{
    check_coefficient_conditions, contractions_with_degrees, series_sum, spectral_fft_demo,
    theorem10_indicator_check, wick_pairing_sum, LatticeSpec, TwoPointModel, WickCoefficients,
};
use num_complex::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn passed(r: &BoundReport) -> Result<(), String> {
    ensure(r.passed(), || format!("{} reported {:?}: {:?}", r.check, r.status, r.witness))
}

/// Golden-section maximum of `f` over `[lo, hi]`.
fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) >= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi))
}

fn catalog() -> Vec<(&'static str, FunctionProfile)> {
    vec![
        ("s^2", FunctionProfile::quadratic()),
        ("e^s-1", FunctionProfile::exp_minus_one()),
        ("s ln(1+s)", FunctionProfile::entropy()),
    ]
}

fn raw(name: &str, s: f64) -> f64 {
    match name {
        "s^2" => s * s,
        "e^s-1" => s.exp_m1(),
        _ => s * s.ln_1p(),
    }
}

// 1
fn saddle() -> Outcome {
    let mut t = Duration::ZERO;
    let mut worst: f64 = 0.0;
    for (name, alpha) in catalog() {
        for k in 0..=40usize {
            let start = Instant::now();
            let c = lemma1_check(&alpha, k).map_err(|e| e.to_string())?;
            t += start.elapsed();
            // oracle: ln sup_r r^k e^{-α_*(r)} with α_* by a nested search in ln s
            let conj = |r: f64| golden(|t| r * t.exp() - raw(name, t.exp()), -30.0, 5.0);
            let oracle = if k == 0 { 0.0 } else { golden(|u| k as f64 * u - conj(u.exp()), -10.0, 8.0) };
            for v in [c.ln_lhs, c.ln_rhs] {
                let rel = (v - oracle).exp_m1().abs();
                worst = worst.max(rel);
                ensure(rel <= 1e-6, || format!("{name} k={k}: {v} vs oracle {oracle}"))?;
            }
            ensure(c.difference.exp_m1() <= 1e-6, || format!("{name} k={k}: sides differ by {}", c.difference))?;
        }
    }
    ensure(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    Ok(format!("max rel {worst:.1e}, {t:.2?} in the checks"))
}

// 2
fn involution() -> Outcome {
    let mut worst: f64 = 0.0;
    for (name, alpha) in catalog() {
        let grid = involution_grid(&alpha);
        ensure(grid.len() == 512, || format!("{name}: grid has {} points", grid.len()))?;
        let r = involution_check(&alpha, Some(&grid), 1e-6).map_err(|e| e.to_string())?;
        passed(&r)?;
        worst = worst.max(r.constants["max_rel_error"]);
        for &s in &grid {
            let one = convex_conjugate(&alpha, s).map_err(|e| e.to_string())?.to_f64();
            let two = convex_conjugate(&alpha, 2.0 * s).map_err(|e| e.to_string())?.to_f64();
            ensure(2.0 * one <= two * (1.0 + 1e-12) + 1e-300, || format!("{name}: 2a*({s}) = {} > a*(2s) = {two}", 2.0 * one))?;
        }
    }
    Ok(format!("max rel {worst:.1e}"))
}

// 3
fn sandwich() -> Outcome {
    let r = lemma3_sandwich(&FunctionProfile::power(0.5), 0.1, None).map_err(|e| e.to_string())?;
    passed(&r)?;
    let ratio = r.constants["stability_ratio"];
    ensure(ratio < 1.1, || format!("ratio {ratio}"))?;
    Ok(format!("C' = {:.4}, doubling ratio {ratio:.4}", r.constants["c_prime"]))
}

// 4
fn nonquasianalytic() -> Outcome {
    let half = check_nonquasianalytic(&FunctionProfile::power(0.5));
    let nine = check_nonquasianalytic(&FunctionProfile::power(0.9));
    let lin = check_nonquasianalytic(&FunctionProfile::linear());
    let (a, b) = (half.integral.to_f64(), nine.integral.to_f64());
    ensure(half.status == NqaStatus::Finite && (a - 2.0).abs() <= 1e-6, || format!("sqrt: {half:?}"))?;
    ensure(nine.status == NqaStatus::Finite && (b - 10.0).abs() <= 1e-4, || format!("s^0.9: {nine:?}"))?;
    ensure(lin.status == NqaStatus::Divergent, || format!("s: {lin:?}"))?;
    Ok(format!("{a:.9}, {b:.6}, divergent"))
}

/// Tallies every perfect matching of the legs with no leg paired at its own vertex.
fn brute_force(k: &[u32]) -> HashMap<Vec<u32>, u64> {
    let n = k.len();
    let legs: Vec<usize> = k.iter().enumerate().flat_map(|(v, &c)| std::iter::repeat_n(v, c as usize)).collect();
    let slot = |a: usize, b: usize| -> usize {
        let (j, m) = (a.min(b), a.max(b));
        (0..j).map(|i| n - 1 - i).sum::<usize>() + (m - j - 1)
    };
    fn rec(
        legs: &[usize],
        used: &mut Vec<bool>,
        counts: &mut Vec<u32>,
        out: &mut HashMap<Vec<u32>, u64>,
        slot: &dyn Fn(usize, usize) -> usize,
    ) {
        let Some(i) = used.iter().position(|u| !u) else {
            *out.entry(counts.clone()).or_default() += 1;
            return;
        };
        used[i] = true;
        for j in i + 1..legs.len() {
            if !used[j] && legs[j] != legs[i] {
                used[j] = true;
                counts[slot(legs[i], legs[j])] += 1;
                rec(legs, used, counts, out, slot);
                counts[slot(legs[i], legs[j])] -= 1;
                used[j] = false;
            }
        }
        used[i] = false;
    }
    let mut out = HashMap::new();
    rec(&legs, &mut vec![false; legs.len()], &mut vec![0; n * n.saturating_sub(1) / 2], &mut out, &slot);
    out
}

// 5
fn wick_oracle() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for n in 1..=3usize {
        let w: Vec<Vec<C>> = (0..n)
            .map(|j| (0..n).map(|m| if j == m { C::new(0.0, 0.0) } else { C::new((j + m + 1) as f64, (j * m) as f64 - 1.0) }).collect())
            .collect();
        let mut k = vec![0u32; n];
        loop {
            let oracle = brute_force(&k);
            let ours: HashMap<Vec<u32>, u64> =
                contractions_with_degrees(&k).into_iter().map(|m| (m.entries.clone(), m.factor() as u64)).collect();
            ensure(ours == oracle, || format!("k = {k:?}: {ours:?} vs {oracle:?}"))?;
            let slots: Vec<(usize, usize)> = (0..n).flat_map(|j| (j + 1..n).map(move |m| (j, m))).collect();
            let expect: C = oracle
                .iter()
                .map(|(e, &c)| c as f64 * slots.iter().zip(e).map(|(&(a, b), &p)| w[a][b].powu(p)).product::<C>())
                .sum();
            let got = wick_pairing_sum(&k, &w).map_err(|e| e.to_string())?.value;
            ensure(got == expect, || format!("k = {k:?}: sum {got} vs {expect}"))?;
            cases += 1;
            let Some(i) = k.iter().position(|&x| x < 4) else { break };
            k[i] += 1;
            k[..i].iter_mut().for_each(|x| *x = 0);
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("{cases} degree vectors, {t:.2?}"))
}

// 6
fn exponential() -> Outcome {
    let d = WickCoefficients::inverse_factorial(64);
    let mut worst: f64 = 0.0;
    for i in 0..24 {
        for &r in &[0.5, 1.0, 2.5, 4.0, 5.0] {
            let w = C::from_polar(r, std::f64::consts::TAU * i as f64 / 24.0);
            let pair = vec![vec![C::new(0.0, 0.0), w], vec![w, C::new(0.0, 0.0)]];
            let v = series_sum(&d, &pair, 30).map_err(|e| e.to_string())?.value;
            let rel = (v - w.exp()).norm() / w.exp().norm();
            worst = worst.max(rel);
            ensure(rel <= 1e-10, || format!("w = {w}: {v} vs {}", w.exp()))?;
        }
    }
    Ok(format!("max rel {worst:.1e}"))
}

// 7
fn coefficients() -> Outcome {
    let f = check_coefficient_conditions(&WickCoefficients::inverse_factorial(200)).map_err(|e| e.to_string())?;
    passed(&f)?;
    let (c, h) = (f.constants["C"], f.constants["H"]);
    ensure(c == 1.0 && h == 2.0, || format!("1/k!: (C, H) = ({c}, {h})"))?;
    let one = WickCoefficients::inverse_factorial_power(0.0, 200).map_err(|e| e.to_string())?;
    let r = check_coefficient_conditions(&one).map_err(|e| e.to_string())?;
    let note = r.witness.as_ref().map(|w| w.note.clone()).unwrap_or_default();
    ensure(r.failed() && note.contains("increases"), || format!("d_k = 1: {:?} {note}", r.status))?;
    let s = WickCoefficients::inverse_factorial_power(0.6, 200).map_err(|e| e.to_string())?;
    passed(&check_coefficient_conditions(&s).map_err(|e| e.to_string())?)?;
    Ok(format!("(C, H) = ({c}, {h}); d_k = 1 trend witness at k = {}", r.witness.map_or(0.0, |w| w.point[0])))
}

fn gauss(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Trailing sums of the two blocks lie in the closed backward cone.
fn spectral_oracle(p: &[f64]) -> bool {
    let back = |q0: f64, q1: f64| q0 <= -q1.abs();
    back(p[2], p[3]) && back(p[0] + p[2], p[1] + p[3])
}

// 8
fn cones() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let fwd = Cone::LorentzForward { d: 3 };
    let dual = fwd.dual();
    for _ in 0..10_000 {
        let p = gauss(&mut rng, 3);
        let a = fwd.contains(&p).map_err(|e| e.to_string())?;
        let b = dual.contains(&p).map_err(|e| e.to_string())?;
        let c = fwd.dual_contains(&p).map_err(|e| e.to_string())?;
        ensure(a == b && b == c, || format!("self-duality differs at {p:?}"))?;
    }
    let d1 = Cone::Ray { direction: vec![1.0] }.distance(&[-3.0]).map_err(|e| e.to_string())?;
    ensure(d1 == 3.0, || format!("half-line distance {d1}"))?;
    let d2 = Cone::LorentzForward { d: 2 }.distance(&[0.0, 1.0]).map_err(|e| e.to_string())?;
    ensure((d2 - 0.5f64.sqrt()).abs() <= 1e-9, || format!("light-cone distance {d2}"))?;
    let k2 = Cone::Spectral { n: 2, d: 2, sign: Sign::Minus };
    let mut inside = 0;
    for i in 0..10_000 {
        // half the samples are pushed towards the backward cone
        let mut p = gauss(&mut rng, 4);
        if i % 2 == 0 {
            p[0] -= 2.5;
            p[2] -= 2.5;
        }
        let ours = k2.contains(&p).map_err(|e| e.to_string())?;
        ensure(ours == spectral_oracle(&p), || format!("K_2- membership differs at {p:?}"))?;
        inside += ours as usize;
    }
    Ok(format!("delta_U = {d1}, {d2:.12}; {inside}/10000 spectral members"))
}

// 9
fn laplace() -> Outcome {
    let u = Functional::density(Density::Exponential { rate: 1.0 }, Cone::Ray { direction: vec![1.0] });
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rng.random_range(-50.0..50.0);
        let y = 10f64.powf(rng.random_range(-1.0..1.0));
        let v = laplace_transform(&u, &TubePoint::scalar(x, y)).map_err(|e| e.to_string())?;
        let z = C::new(x, y);
        let exact = 1.0 / (1.0 - C::i() * z);
        let rel = (v - exact).norm() / exact.norm();
        worst = worst.max(rel);
        ensure(rel <= 1e-8, || format!("z = {z}: {v} vs {exact}"))?;
    }
    let vp = Cone::Ray { direction: vec![1.0] };
    let b = bound23_check(
        |z| laplace_transform(&u, z).unwrap_or(C::new(f64::NAN, f64::NAN)),
        &FunctionProfile::quadratic(),
        &FunctionProfile::power(0.5),
        &vp,
        1.0,
        400,
        3,
    )
    .map_err(|e| e.to_string())?;
    passed(&b)?;
    let grid: Vec<f64> = (0..12).map(|i| -3.0 + 0.75 * i as f64).collect();
    let c = convolution_bound_check(&u, &TestFunction::gaussian(1, 1.0), &FunctionProfile::power(0.5), 1.0, &grid)
        .map_err(|e| e.to_string())?;
    passed(&c)?;
    let spread = c.constants["y_spread"];
    ensure(spread < 1e-8, || format!("contour spread {spread}"))?;
    Ok(format!("max rel {worst:.1e}, C = {:.3}, doubling {:.3}, spread {spread:.1e}", b.constants["C"], b.constants["doubling_ratio"]))
}

// 10
fn decomposition() -> Outcome {
    let g = TestFunction::gaussian(1, 1.0);
    let e0 = TestFunction::gaussian(1, 1.0);
    let k1 = Cone::Ray { direction: vec![1.0] };
    let k2 = Cone::Ray { direction: vec![-1.0] };
    let opts = DecomposeOptions {
        alpha: FunctionProfile::quadratic(),
        beta: FunctionProfile::quadratic(),
        separation_samples: 64,
        seed: 10,
        grid: TubeGrid { seed: 10, ..TubeGrid::default() },
    };
    let (e, report) = cone_decompose(&g, &k1, &k2, &e0, &opts).map_err(|e| e.to_string())?;
    let g1 = Decomposed { g: &g, e: &e, part: Part::First };
    let g2 = Decomposed { g: &g, e: &e, part: Part::Second };
    let mut rng = StdRng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let z = [C::new(rng.random_range(-6.0..6.0), rng.random_range(-2.0..2.0))];
        let (a, b, whole) = (g1.eval(&z), g2.eval(&z), g.eval(&z));
        let rel = (a + b - whole).norm() / whole.norm();
        worst = worst.max(rel);
        ensure(rel <= 1e-12, || format!("z = {}: g1 + g2 = {} vs g = {whole}", z[0], a + b))?;
    }
    passed(&report)?;
    Ok(format!("max rel {worst:.1e}, theta = {:.4}", report.constants["theta"]))
}

// 11
fn indicators() -> Outcome {
    let r = theorem10_indicator_check(
        &WickCoefficients::inverse_factorial(40),
        &TwoPointModel::mock_massless_2d(),
        &FunctionProfile::quadratic(),
        &FunctionProfile::power(0.5),
        &[1.0, 10.0],
        &[0.5, 0.1],
    )
    .map_err(|e| e.to_string())?;
    passed(&r)?;
    let fitted = r.constants.keys().filter(|k| k.contains("_C(")).count();
    ensure(fitted == 8, || format!("{fitted} fitted constants"))?;
    Ok(format!("{fitted} constants, max {:.3e}", r.constants.values().copied().fold(0.0, f64::max)))
}

// 12
fn spectral() -> Outcome {
    let model = TwoPointModel::rational(1.0, 1);
    let lattice = LatticeSpec { n_max: 10, ..LatticeSpec::default() };
    let mut lines = Vec::new();
    for (name, d) in [("free field", WickCoefficients::free_field()), ("1/k!", WickCoefficients::inverse_factorial(40))] {
        let (rows, r) = spectral_fft_demo(&model, &d, 2, &lattice).map_err(|e| e.to_string())?;
        let sizes: Vec<usize> = rows.iter().map(|r| r.size).collect();
        ensure(sizes == [256, 512, 1024], || format!("{name}: sizes {sizes:?}"))?;
        let fr: Vec<f64> = rows.iter().map(|r| r.outside_fraction).collect();
        ensure(fr.windows(2).all(|w| w[1] < w[0]), || format!("{name}: fractions {fr:?}"))?;
        passed(&r)?;
        lines.push(format!("{name} {:.2e} > {:.2e} > {:.2e}", fr[0], fr[1], fr[2]));
    }
    Ok(lines.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("saddle identity", saddle),
        ("conjugate involution", involution),
        ("sandwich", sandwich),
        ("nonquasianalyticity", nonquasianalytic),
        ("wick oracle", wick_oracle),
        ("exponential identity", exponential),
        ("coefficient conditions", coefficients),
        ("cone suite", cones),
        ("laplace example", laplace),
        ("decomposition", decomposition),
        ("indicator check", indicators),
        ("spectral fft demo", spectral),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        match f() {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{:.2?}]", i + 1, start.elapsed()),
            Err(msg) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {msg} [{:.2?}]", i + 1, start.elapsed());
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
