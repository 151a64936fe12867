//! Defining sequences `a_k`, `b_l` of a profile pair, their indicator
//! functions, and the sequence-level inequalities. Everything is kept in the
//! log domain: `b_l` for `β = √s` overflows an `f64` near `l = 85`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{GsgError, Result};
use crate::extended::ExtendedValue;
use crate::par;
use crate::profile::{FunctionProfile, ProfileKind};
use crate::report::{BoundReport, Witness};
use crate::search::{default_grid, inf_positive, log_grid, sup_positive, Attained};

pub const DEFAULT_K_MAX: usize = 200;
const K_MAX_LIMIT: usize = 1600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// `a_k = sup_r r^k e^{-α_*(r)}`.
    AFromAlpha,
    /// `b_l = sup_s s^l e^{-β(s)}`.
    BFromBeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    FromProfile,
    ClosedForm,
    User,
}

/// `ln a_k` for `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSequence {
    values: Vec<ExtendedValue>,
    source: Source,
}

impl LogSequence {
    pub fn new(values: Vec<ExtendedValue>, source: Source) -> Result<Self> {
        if values.is_empty() {
            return Err(GsgError::Domain("sequence must have at least one entry".into()));
        }
        if values.iter().any(|v| *v == ExtendedValue::NegInf) {
            return Err(GsgError::Domain("ln a_k = -inf is not allowed".into()));
        }
        Ok(Self { values, source })
    }

    /// User sequence from finite logarithms.
    pub fn from_ln(values: Vec<f64>) -> Result<Self> {
        let vals = values
            .into_iter()
            .map(|v| {
                ExtendedValue::from_f64(v).ok_or_else(|| GsgError::Domain("NaN in sequence".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vals, Source::User)
    }

    pub fn from_fn(k_max: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::from_ln((0..=k_max).map(f).collect())
    }

    /// `a_k = k!`.
    pub fn factorial(k_max: usize) -> Self {
        Self::from_fn(k_max, ln_factorial).expect("finite")
    }

    /// `a_k = (k!)^p`.
    pub fn factorial_power(k_max: usize, p: f64) -> Self {
        Self::from_fn(k_max, |k| p * ln_factorial(k)).expect("finite")
    }

    pub fn ones(k_max: usize) -> Self {
        Self::from_fn(k_max, |_| 0.0).expect("finite")
    }

    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn values(&self) -> &[ExtendedValue] {
        &self.values
    }

    /// `ln a_k` as a float (`+inf` allowed).
    pub fn ln(&self, k: usize) -> f64 {
        self.values[k].to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// CSV table with header `k,ln_a`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,ln_a\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{k},{}", csv_number(v.to_f64()));
        }
        out
    }
}

fn csv_number(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:e}")
    }
}

pub fn ln_factorial(k: usize) -> f64 {
    if k <= 1 {
        return 0.0;
    }
    statrs::function::gamma::ln_gamma(k as f64 + 1.0)
}

// ---------------------------------------------------------------------------
// Construction from profiles

/// `ln a_k` or `ln b_l` in closed form, when the catalog admits one.
pub fn closed_form_entry(profile: &FunctionProfile, role: Role, k: usize) -> Option<f64> {
    if k == 0 {
        return Some(0.0);
    }
    let k = k as f64;
    match (role, profile.kind()) {
        (Role::AFromAlpha, ProfileKind::Linear) => Some(0.0),
        (Role::AFromAlpha, ProfileKind::Quadratic) => Some(0.5 * k * ((2.0 * k).ln() - 1.0)),
        (Role::AFromAlpha, ProfileKind::Power { gamma }) if *gamma > 1.0 => {
            // α_*(r) = c r^q with q = γ/(γ-1), c = (γ-1) γ^{-q}
            let g = *gamma;
            let q = g / (g - 1.0);
            let c = (g - 1.0) * g.powf(-q);
            Some(k / q * ((k / (c * q)).ln() - 1.0))
        }
        (Role::AFromAlpha, ProfileKind::Power { gamma }) if *gamma == 1.0 => Some(0.0),
        (Role::AFromAlpha, ProfileKind::Strip { width }) => Some(k * ((k / width).ln() - 1.0)),
        (Role::BFromBeta, ProfileKind::Power { gamma }) => Some(k / gamma * ((k / gamma).ln() - 1.0)),
        (Role::BFromBeta, ProfileKind::Quadratic) => Some(0.5 * k * ((0.5 * k).ln() - 1.0)),
        (Role::BFromBeta, ProfileKind::Linear) => Some(k * (k.ln() - 1.0)),
        _ => None,
    }
}

/// `ln a_k` or `ln b_l` by nested numerical search.
pub fn searched_entry(profile: &FunctionProfile, role: Role, k: usize) -> Result<f64> {
    let kf = k as f64;
    let limit0 = (k == 0).then_some(0.0);
    let r = match role {
        Role::BFromBeta => sup_positive(|s| kf * s.ln() - profile.eval(s), limit0),
        Role::AFromAlpha => sup_positive(
            |r| {
                let conj = sup_positive(|s| r * s - profile.eval(s), Some(0.0)).value;
                match conj {
                    ExtendedValue::Finite(c) => kf * r.ln() - c,
                    ExtendedValue::PosInf => f64::NEG_INFINITY,
                    ExtendedValue::NegInf => f64::INFINITY,
                }
            },
            limit0,
        ),
    };
    if r.attained == Attained::Divergent {
        let what = match role {
            Role::AFromAlpha => "a_k",
            Role::BFromBeta => "b_l",
        };
        return Err(GsgError::DivergentSequence { what, index: k });
    }
    Ok(if k == 0 { r.value.to_f64().max(0.0) } else { r.value.to_f64() })
}

/// Builds `ln a_k` (or `ln b_l`) for `k = 0..=k_max`.
pub fn defining_sequence(profile: &FunctionProfile, role: Role, k_max: usize) -> Result<LogSequence> {
    match role {
        Role::AFromAlpha => profile.require_alpha()?,
        Role::BFromBeta => profile.require_beta()?,
    }
    if closed_form_entry(profile, role, 1).is_some() {
        let vals = (0..=k_max)
            .map(|k| ExtendedValue::Finite(closed_form_entry(profile, role, k).expect("closed form")))
            .collect();
        return LogSequence::new(vals, Source::ClosedForm);
    }
    defining_sequence_by_search(profile, role, k_max)
}

/// Same as [`defining_sequence`] but never uses closed forms.
pub fn defining_sequence_by_search(profile: &FunctionProfile, role: Role, k_max: usize) -> Result<LogSequence> {
    let vals = par::map_range(k_max + 1, |k| searched_entry(profile, role, k));
    let vals = vals.into_iter().map(|v| v.map(ExtendedValue::Finite)).collect::<Result<Vec<_>>>()?;
    LogSequence::new(vals, Source::FromProfile)
}

// ---------------------------------------------------------------------------
// Saddle identity

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleCheck {
    pub k: usize,
    /// `ln sup_r r^k e^{-α_*(r)}`.
    pub ln_lhs: f64,
    /// `ln (k/e)^k inf_s s^{-k} e^{α(s)}`.
    pub ln_rhs: f64,
    pub difference: f64,
}

/// Both sides of the saddle identity, computed independently.
pub fn lemma1_check(alpha: &FunctionProfile, k: usize) -> Result<SaddleCheck> {
    alpha.require_alpha()?;
    if k == 0 {
        return Ok(SaddleCheck { k, ln_lhs: 0.0, ln_rhs: 0.0, difference: 0.0 });
    }
    let ln_lhs = searched_entry(alpha, Role::AFromAlpha, k)?;
    let kf = k as f64;
    let inner = inf_positive(|s| alpha.eval(s) - kf * s.ln(), None);
    let ln_rhs = kf * (kf.ln() - 1.0) + inner.value.to_f64();
    Ok(SaddleCheck { k, ln_lhs, ln_rhs, difference: (ln_lhs - ln_rhs).abs() })
}

// ---------------------------------------------------------------------------
// Indicator functions

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicatorValue {
    pub s: f64,
    /// `ln b(s) = max_l (l ln s − ln b_l)`.
    pub ln_value: f64,
    pub argmax: usize,
    /// The maximum sat on the last stored index.
    pub truncated: bool,
}

pub fn indicator_eval(seq: &LogSequence, s: f64) -> Result<IndicatorValue> {
    if !(s >= 0.0) {
        return Err(GsgError::Domain(format!("indicator needs s >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(IndicatorValue { s, ln_value: -seq.ln(0), argmax: 0, truncated: seq.k_max() == 0 });
    }
    let ls = s.ln();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (l, v) in seq.values.iter().enumerate() {
        let term = l as f64 * ls - v.to_f64();
        if term > best.1 {
            best = (l, term);
        }
    }
    Ok(IndicatorValue { s, ln_value: best.1, argmax: best.0, truncated: best.0 == seq.k_max() })
}

/// An indicator function with values cached on a grid.
#[derive(Debug, Clone)]
pub struct IndicatorFunction {
    seq: LogSequence,
    cache: Vec<IndicatorValue>,
}

impl IndicatorFunction {
    pub fn new(seq: LogSequence, grid: &[f64]) -> Result<Self> {
        let cache = par::map(grid, |&s| indicator_eval(&seq, s)).into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self { seq, cache })
    }

    pub fn sequence(&self) -> &LogSequence {
        &self.seq
    }

    pub fn trace(&self) -> &[IndicatorValue] {
        &self.cache
    }

    pub fn eval(&self, s: f64) -> Result<IndicatorValue> {
        indicator_eval(&self.seq, s)
    }

    pub fn any_truncated(&self) -> bool {
        self.cache.iter().any(|v| v.truncated)
    }

    /// CSV table with header `s,ln_b`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,ln_b\n");
        for v in &self.cache {
            let _ = writeln!(out, "{:e},{}", v.s, csv_number(v.ln_value));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Sandwich bounds

struct SandwichFit {
    ln_c: f64,
    argmax_s: f64,
    left_violation: Option<(f64, f64)>,
    truncated: bool,
}

fn sandwich_on(beta: &FunctionProfile, seq: &LogSequence, eps: f64, grid: &[f64]) -> Result<SandwichFit> {
    let rows = par::map(grid, |&s| -> Result<(f64, f64, bool, f64)> {
        let b = beta.eval(s);
        let here = indicator_eval(seq, s)?;
        let there = indicator_eval(seq, (1.0 + eps) * s)?;
        Ok((here.ln_value - b, b - there.ln_value, here.truncated || there.truncated, s))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut fit = SandwichFit { ln_c: 0.0, argmax_s: 0.0, left_violation: None, truncated: false };
    for (excess, gap, trunc, s) in rows {
        let tol = 1e-12 * (1.0 + beta.eval(s).abs());
        if excess > tol && fit.left_violation.is_none() {
            fit.left_violation = Some((s, excess));
        }
        if gap > fit.ln_c {
            fit.ln_c = gap;
            fit.argmax_s = s;
        }
        fit.truncated |= trunc;
    }
    Ok(fit)
}

/// Checks `ln b(s) ≤ β(s) ≤ ln C' + ln b((1+ε)s)` on `grid` (default 512
/// log points) and on the doubled grid over the same range.
pub fn lemma3_sandwich(beta: &FunctionProfile, eps: f64, grid: Option<&[f64]>) -> Result<BoundReport> {
    if !(eps > 0.0) {
        return Err(GsgError::Domain(format!("epsilon must be > 0, got {eps}")));
    }
    let coarse: Vec<f64> = grid.map(<[f64]>::to_vec).unwrap_or_else(default_grid);
    if coarse.len() < 2 || coarse.iter().any(|&s| !(s > 0.0)) {
        return Err(GsgError::Domain("sandwich grid must hold at least two positive points".into()));
    }
    let fine = log_grid(coarse[0], coarse[coarse.len() - 1], 2 * coarse.len());
    let check = "lemma3_sandwich";
    let mut k_max = DEFAULT_K_MAX;
    loop {
        let seq = defining_sequence(beta, Role::BFromBeta, k_max)?;
        let a = sandwich_on(beta, &seq, eps, &coarse)?;
        let b = sandwich_on(beta, &seq, eps, &fine)?;
        if a.truncated || b.truncated {
            if k_max * 2 <= K_MAX_LIMIT {
                k_max *= 2;
                continue;
            }
            return Ok(BoundReport::undetermined(check, format!("indicator truncated at k_max = {k_max}"))
                .budget("grid", coarse.len() as u64)
                .budget("k_max", k_max as u64));
        }
        if let Some((s, excess)) = a.left_violation.or(b.left_violation) {
            return Ok(BoundReport::fail(check, Witness::new(vec![s], excess, "ln b(s) exceeds beta(s)"))
                .budget("k_max", k_max as u64));
        }
        let ratio = (b.ln_c - a.ln_c).exp();
        let mut report = if ratio < 1.1 {
            BoundReport::pass(check)
        } else {
            BoundReport::fail(
                check,
                Witness::new(vec![b.argmax_s], ratio, "fitted constant not stable under grid doubling"),
            )
        };
        report = report
            .constant("ln_c_prime", a.ln_c)
            .constant("c_prime", a.ln_c.exp())
            .constant("c_prime_refined", b.ln_c.exp())
            .constant("stability_ratio", ratio)
            .constant("epsilon", eps)
            .budget("grid", coarse.len() as u64)
            .budget("grid_refined", fine.len() as u64)
            .budget("k_max", k_max as u64)
            .detail("argmax_s", a.argmax_s);
        if beta.attributes().interpolated {
            report = report.warn("sampled profile: attributes validated on samples only");
        }
        return Ok(report);
    }
}

// ---------------------------------------------------------------------------
// Pair constants

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum PairFit {
    Holds { c: f64, h: f64, argmax: (usize, usize) },
    Fails { k: usize, l: usize, excess: f64 },
}

impl PairFit {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Holds { .. })
    }
}

/// Lattice `2^{j/40}` for `j = 0..=400`.
fn h_lattice() -> impl Iterator<Item = f64> {
    (0..=400).map(|j| 2f64.powf(j as f64 / 40.0))
}

/// Finds the smallest lattice `h` with `excess(k,l) ≤ ln C + (k+l) ln h` for
/// all pairs `k + l ≤ k_max`, where `C` is attained away from the truncation
/// edge: the maximum over all pairs must not exceed the maximum over pairs
/// with `k + l ≤ k_max / 2`. Otherwise the fitted `C` would keep growing
/// with `k_max`.
pub fn fit_pair_constants<F>(k_max: usize, excess: F) -> PairFit
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let pairs: Vec<(usize, usize)> =
        (0..=k_max).flat_map(|k| (0..=k_max - k).map(move |l| (k, l))).collect();
    let ex: Vec<f64> = par::map(&pairs, |&(k, l)| excess(k, l));
    if let Some(i) = ex.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
        let (k, l) = pairs[i];
        return PairFit::Fails { k, l, excess: f64::INFINITY };
    }
    let half = k_max / 2;
    let mut last = (0usize, 0usize, f64::NEG_INFINITY);
    for h in h_lattice() {
        let lh = h.ln();
        let (mut all, mut all_at) = (f64::NEG_INFINITY, 0usize);
        let mut inner = f64::NEG_INFINITY;
        for (i, (&(k, l), &e)) in pairs.iter().zip(&ex).enumerate() {
            let v = e - (k + l) as f64 * lh;
            if v > all {
                all = v;
                all_at = i;
            }
            if k + l <= half && v > inner {
                inner = v;
            }
        }
        if all <= inner + 1e-9 * (1.0 + inner.abs()) {
            return PairFit::Holds { c: round_sig(all.exp(), 12), h, argmax: pairs[all_at] };
        }
        last = (pairs[all_at].0, pairs[all_at].1, all);
    }
    PairFit::Fails { k: last.0, l: last.1, excess: last.2 }
}

/// Rounds to `digits` significant digits; fitted constants carry no more.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// Fits `a_{k+l} ≤ C h^{k+l} a_k a_l`.
pub fn check_regularity(seq: &LogSequence) -> Result<PairFit> {
    if !seq.is_finite() {
        return Err(GsgError::Domain("regularity needs a finite sequence".into()));
    }
    Ok(fit_pair_constants(seq.k_max(), |k, l| seq.ln(k + l) - seq.ln(k) - seq.ln(l)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_agree_with_search() {
        for (p, role) in [
            (FunctionProfile::quadratic(), Role::AFromAlpha),
            (FunctionProfile::linear(), Role::AFromAlpha),
            (FunctionProfile::power(3.0), Role::AFromAlpha),
            (FunctionProfile::strip(2.0), Role::AFromAlpha),
            (FunctionProfile::power(0.5), Role::BFromBeta),
            (FunctionProfile::linear(), Role::BFromBeta),
        ] {
            for k in [0usize, 1, 2, 7, 30] {
                let c = closed_form_entry(&p, role, k).unwrap();
                let s = searched_entry(&p, role, k).unwrap();
                assert!((c - s).abs() <= 1e-8 * (1.0 + c.abs()), "{p} {role:?} k={k}: {c} vs {s}");
            }
        }
    }

    #[test]
    fn sqrt_b_closed_form() {
        let b = defining_sequence(&FunctionProfile::power(0.5), Role::BFromBeta, 100).unwrap();
        for l in 1..=100usize {
            let want = 2.0 * l as f64 * ((2.0 * l as f64).ln() - 1.0);
            assert!((b.ln(l) - want).abs() < 1e-9 * want.abs().max(1.0));
        }
        assert_eq!(b.source(), Source::ClosedForm);
    }

    #[test]
    fn divergent_role_misuse() {
        let err = defining_sequence(&FunctionProfile::log_growth(), Role::BFromBeta, 5).unwrap_err();
        assert!(matches!(err, GsgError::DivergentSequence { what: "b_l", .. }));
    }

    #[test]
    fn indicator_examples() {
        let f = LogSequence::factorial(20);
        let v = indicator_eval(&f, 1.0).unwrap();
        assert_eq!((v.ln_value, v.argmax), (0.0, 0));
        let v = indicator_eval(&f, 0.0).unwrap();
        assert_eq!(v.ln_value, 0.0);
        assert!(indicator_eval(&f, -1.0).is_err());
        let v = indicator_eval(&LogSequence::ones(10), 2.0).unwrap();
        assert!(v.truncated);
    }

    #[test]
    fn regularity_examples() {
        assert_eq!(
            check_regularity(&LogSequence::ones(60)).unwrap(),
            PairFit::Holds { c: 1.0, h: 1.0, argmax: (0, 0) }
        );
        match check_regularity(&LogSequence::factorial(200)).unwrap() {
            PairFit::Holds { c, h, .. } => assert_eq!((c, h), (1.0, 2.0)),
            other => panic!("{other:?}"),
        }
        let k2k = LogSequence::from_fn(120, |k| if k == 0 { 0.0 } else { 2.0 * k as f64 * (k as f64).ln() }).unwrap();
        assert!(check_regularity(&k2k).unwrap().holds());
        let bad = LogSequence::from_fn(60, |k| (k * k) as f64).unwrap();
        assert!(!check_regularity(&bad).unwrap().holds());
    }

    #[test]
    fn csv_shapes() {
        let csv = LogSequence::ones(2).to_csv();
        assert_eq!(csv, "k,ln_a\n0,0e0\n1,0e0\n2,0e0\n");
        let ind = IndicatorFunction::new(LogSequence::factorial(5), &[1.0, 2.0]).unwrap();
        assert!(ind.to_csv().starts_with("s,ln_b\n1e0,"));
    }
}
