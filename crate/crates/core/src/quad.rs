//! Adaptive quadrature: Simpson for smooth real integrands and a global
//! Gauss–Kronrod (7/15) rule for complex ones, plus half-line and whole-line
//! drivers that grow the integration range until the contributions die out.

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).norm())
}

/// Globally adaptive Gauss–Kronrod on `[a, b]`.
pub fn gauss_kronrod<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult {
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total: Complex64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) || pieces.len() >= max_intervals {
            return QuadResult {
                value: total,
                error: err,
                intervals: pieces.len(),
                converged: err <= abs_tol.max(rel_tol * total.norm()),
            };
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval cannot be split further in floating point.
            pieces.push((lo, hi, gk15(&f, lo, hi).0, 0.0));
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Real convenience wrapper over [`gauss_kronrod`].
pub fn gauss_kronrod_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64, bool) {
    let r = gauss_kronrod(|x| Complex64::new(f(x), 0.0), a, b, abs_tol, rel_tol, 4000);
    (r.value.re, r.error, r.converged)
}

/// Integral over `[a, inf)` of an integrand that eventually decays.
///
/// The range is covered by segments of doubling length; the sweep stops once
/// two consecutive segments contribute less than the tolerance.
pub fn half_line<F: Fn(f64) -> Complex64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> QuadResult {
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut intervals = 0;
    let mut lo = a;
    let mut len = 1.0;
    let mut quiet = 0;
    let mut converged = true;
    for _ in 0..80 {
        let r = gauss_kronrod(&f, lo, lo + len, abs_tol * 0.1, rel_tol * 0.1, 2000);
        total += r.value;
        err += r.error;
        intervals += r.intervals;
        converged &= r.converged;
        if r.value.norm() <= abs_tol.max(rel_tol * total.norm()) * 0.01 {
            quiet += 1;
            if quiet >= 2 {
                return QuadResult { value: total, error: err, intervals, converged };
            }
        } else {
            quiet = 0;
        }
        lo += len;
        len *= 2.0;
    }
    QuadResult { value: total, error: err, intervals, converged: false }
}

/// Integral over the whole real line.
pub fn whole_line<F: Fn(f64) -> Complex64>(f: F, abs_tol: f64, rel_tol: f64) -> QuadResult {
    let right = half_line(&f, 0.0, abs_tol * 0.5, rel_tol);
    let left = half_line(|x| f(-x), 0.0, abs_tol * 0.5, rel_tol);
    QuadResult {
        value: right.value + left.value,
        error: right.error + left.error,
        intervals: right.intervals + left.intervals,
        converged: right.converged && left.converged,
    }
}

/// Adaptive Simpson on `[a, b]`; returns `(value, converged)`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> (f64, bool) {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        ok: &mut bool,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 {
            *ok = false;
            return left + right + delta / 15.0;
        }
        if delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut ok = true;
    let v = rec(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut ok);
    (v, ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_and_oscillatory() {
        let r = gauss_kronrod(|x| Complex64::new(x * x, 0.0), 0.0, 3.0, 1e-14, 1e-14, 100);
        assert!((r.value.re - 9.0).abs() < 1e-12);
        // int_0^pi e^{ix} dx = 2i
        let r = gauss_kronrod(|x| Complex64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, 1e-14, 1e-14, 100);
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn half_line_laplace() {
        // int_0^inf e^{-p} e^{ipz} dp = 1/(1 - iz)
        let z = Complex64::new(2.0, 0.3);
        let r = half_line(|p| (-p + Complex64::i() * p * z).exp(), 0.0, 1e-14, 1e-12);
        let exact = 1.0 / (1.0 - Complex64::i() * z);
        assert!(r.converged);
        assert!((r.value - exact).norm() / exact.norm() < 1e-10);
    }

    #[test]
    fn whole_line_gaussian() {
        let r = whole_line(|x| Complex64::new((-x * x).exp(), 0.0), 1e-14, 1e-13);
        assert!((r.value.re - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn simpson_sqrt() {
        let (v, ok) = adaptive_simpson(|x| x.sqrt(), 0.0, 1.0, 1e-10, 50);
        assert!(ok);
        assert!((v - 2.0 / 3.0).abs() < 1e-8);
    }
}
