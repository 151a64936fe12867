//! One-dimensional sup/inf search over the half-axis `s > 0`.
//!
//! Every objective handed to these routines is unimodal in `ln s` (concave in
//! `s` or in `ln s`). The bracket grows by a factor of 10 from `s = 1` and is
//! then narrowed by golden-section search in log coordinates.

use crate::extended::ExtendedValue;

/// Divergence is declared once the maximiser is still moving right past this point.
pub const S_MAX: f64 = 1e12;
/// Below this point the supremum is taken to be the limit at `0+`.
pub const S_MIN: f64 = 1e-12;
/// Golden-section stops at this relative width in `ln s`.
pub const LOG_WIDTH_TOL: f64 = 1e-12;

const EXPANSION: f64 = std::f64::consts::LN_10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Where a supremum was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attained {
    Interior,
    /// The objective was still increasing as `s -> 0+`.
    AtZero,
    /// The objective was still increasing beyond [`S_MAX`].
    Divergent,
}

#[derive(Debug, Clone, Copy)]
pub struct SupResult {
    pub value: ExtendedValue,
    /// Maximiser in `s` (the last probe for divergent searches).
    pub arg: f64,
    pub attained: Attained,
    pub evaluations: usize,
}

fn clean(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x
    }
}

/// Golden-section maximisation of `g` on `[a, b]`. Returns `(t, g(t))`.
pub fn golden_max<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, tol: f64) -> (f64, f64, usize) {
    let mut evals = 2;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = clean(g(c));
    let mut gd = clean(g(d));
    while (b - a) > tol * a.abs().max(b.abs()).max(1.0) {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = clean(g(c));
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = clean(g(d));
        }
        evals += 1;
        if evals > 10_000 {
            break;
        }
    }
    if gc >= gd {
        (c, gc, evals)
    } else {
        (d, gd, evals)
    }
}

/// `sup_{s>0} f(s)` for `f` unimodal in `ln s`.
///
/// `limit_at_zero` is the value of `lim_{s->0+} f(s)` when the caller knows it
/// in closed form; it is used if the search runs into [`S_MIN`].
pub fn sup_positive<F: Fn(f64) -> f64>(f: F, limit_at_zero: Option<f64>) -> SupResult {
    let g = |t: f64| clean(f(t.exp()));
    let mut evals = 0usize;
    let mut t = 0.0;
    let mut gt = g(t);
    let up = g(t + EXPANSION);
    evals += 2;

    let (lo, hi) = if up > gt {
        t += EXPANSION;
        gt = up;
        loop {
            let next = g(t + EXPANSION);
            evals += 1;
            if next > gt {
                t += EXPANSION;
                gt = next;
                if t.exp() > S_MAX {
                    return SupResult {
                        value: ExtendedValue::PosInf,
                        arg: t.exp(),
                        attained: Attained::Divergent,
                        evaluations: evals,
                    };
                }
            } else {
                break;
            }
        }
        (t - EXPANSION, t + EXPANSION)
    } else {
        let down = g(t - EXPANSION);
        evals += 1;
        if down > gt {
            t -= EXPANSION;
            gt = down;
            loop {
                if (t - EXPANSION).exp() < S_MIN {
                    let tail = gt.max(limit_at_zero.map(clean).unwrap_or(f64::NEG_INFINITY));
                    return SupResult {
                        value: ExtendedValue::from_f64(tail).unwrap_or(ExtendedValue::NegInf),
                        arg: 0.0,
                        attained: Attained::AtZero,
                        evaluations: evals,
                    };
                }
                let next = g(t - EXPANSION);
                evals += 1;
                if next > gt {
                    t -= EXPANSION;
                    gt = next;
                } else {
                    break;
                }
            }
        }
        (t - EXPANSION, t + EXPANSION)
    };

    let (targ, val, n) = golden_max(g, lo, hi, LOG_WIDTH_TOL);
    evals += n;
    let (arg, val) = if val >= gt { (targ.exp(), val) } else { (t.exp(), gt) };
    SupResult {
        value: ExtendedValue::from_f64(val).unwrap_or(ExtendedValue::NegInf),
        arg,
        attained: Attained::Interior,
        evaluations: evals,
    }
}

/// `inf_{s>0} f(s)` for `f` unimodal (valley-shaped) in `ln s`.
pub fn inf_positive<F: Fn(f64) -> f64>(f: F, limit_at_zero: Option<f64>) -> SupResult {
    let r = sup_positive(|s| -f(s), limit_at_zero.map(|v| -v));
    SupResult {
        value: -r.value,
        ..r
    }
}

/// `n` log-spaced points on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "invalid log grid");
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Default profile grid: 512 log-spaced points on `[1e-3, 1e6]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-3, 1e6, 512)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_maximum() {
        // sup 2s - s^2 = 1 at s = 1
        let r = sup_positive(|s| 2.0 * s - s * s, Some(0.0));
        assert_eq!(r.attained, Attained::Interior);
        assert!((r.value.to_f64() - 1.0).abs() < 1e-14);
        assert!((r.arg - 1.0).abs() < 1e-6);
    }

    #[test]
    fn maximum_far_from_start() {
        let r = sup_positive(|s| 1e6 * s - s * s, Some(0.0));
        assert!((r.value.to_f64() / 2.5e11 - 1.0).abs() < 1e-12);
        let r = sup_positive(|s| 1e-6 * s - s * s, Some(0.0));
        assert!((r.value.to_f64() / 2.5e-13 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn boundary_cases() {
        let r = sup_positive(|s| -0.5 * s, Some(0.0));
        assert_eq!(r.attained, Attained::AtZero);
        assert_eq!(r.value, ExtendedValue::Finite(0.0));
        let r = sup_positive(|s| s, None);
        assert_eq!(r.value, ExtendedValue::PosInf);
        assert_eq!(r.attained, Attained::Divergent);
        let r = inf_positive(|s| s - s.sqrt(), Some(0.0));
        assert!((r.value.to_f64() + 0.25).abs() < 1e-14);
    }

    #[test]
    fn grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 512);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[511], 1e6);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
