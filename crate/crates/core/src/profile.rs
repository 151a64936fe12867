//! Indicator-scale functions `α`, `β` and their calculus: monotone convex
//! conjugates, concave conjugates, the doubling and nonquasianalyticity
//! conditions, and the order relation `α1 ≺ α`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GsgError, Result};
use crate::extended::ExtendedValue;
use crate::quad::adaptive_simpson;
use crate::report::{BoundReport, Witness};
use crate::search::{default_grid, golden_max, inf_positive, log_grid, sup_positive, Attained};

/// Closed-form catalog entries plus tabulated profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `s^γ`, `γ > 0`.
    Power { gamma: f64 },
    /// `s²`.
    Quadratic,
    /// `e^s − 1`.
    ExpMinusOne,
    /// `s`.
    Linear,
    /// `s·ln(1+s)`.
    Entropy,
    /// `ln(1+s)`.
    LogGrowth,
    /// `0` on `[0, width]`, `+∞` beyond: the barrier describing analyticity in a strip.
    Strip { width: f64 },
    /// Piecewise-linear interpolation of samples `(s_i, v_i)`.
    Sampled { s: Vec<f64>, v: Vec<f64> },
}

impl ProfileKind {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Power { .. } => "power",
            Self::Quadratic => "quadratic",
            Self::ExpMinusOne => "exp-minus-one",
            Self::Linear => "linear",
            Self::Entropy => "entropy",
            Self::LogGrowth => "log-growth",
            Self::Strip { .. } => "strip",
            Self::Sampled { .. } => "sampled",
        }
    }

    fn raw(&self, s: f64) -> f64 {
        match self {
            Self::Power { gamma } => s.powf(*gamma),
            Self::Quadratic => s * s,
            Self::ExpMinusOne => s.exp_m1(),
            Self::Linear => s,
            Self::Entropy => s * s.ln_1p(),
            Self::LogGrowth => s.ln_1p(),
            Self::Strip { width } => {
                if s <= *width {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Sampled { s: xs, v } => interpolate(xs, v, s),
        }
    }

    /// Attribute flags known from the closed form. Sampled profiles report
    /// what their samples show.
    fn declared(&self) -> Option<Attributes> {
        let a = |convex, concave| Attributes {
            convex,
            concave,
            convex_in_log: true,
            increasing: true,
            nonneg: true,
            differentiable: true,
            interpolated: false,
        };
        Some(match self {
            Self::Power { gamma } => a(*gamma >= 1.0, *gamma <= 1.0),
            Self::Quadratic | Self::ExpMinusOne | Self::Entropy => a(true, false),
            Self::Linear => a(true, true),
            Self::LogGrowth => a(false, true),
            Self::Strip { .. } => Attributes { differentiable: false, ..a(true, false) },
            Self::Sampled { .. } => return None,
        })
    }
}

fn interpolate(xs: &[f64], v: &[f64], s: f64) -> f64 {
    let n = xs.len();
    if s <= xs[0] {
        return v[0];
    }
    let j = xs.partition_point(|&x| x < s);
    let (i0, i1) = if j >= n { (n - 2, n - 1) } else { (j - 1, j) };
    let slope = (v[i1] - v[i0]) / (xs[i1] - xs[i0]);
    v[i0] + slope * (s - xs[i0])
}

/// Shape attributes of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attributes {
    pub convex: bool,
    pub concave: bool,
    pub convex_in_log: bool,
    pub increasing: bool,
    pub nonneg: bool,
    pub differentiable: bool,
    /// Set for sampled profiles: attributes hold on the samples only.
    pub interpolated: bool,
}

/// A nonnegative nondecreasing function on `s ≥ 0`, normalised so that its
/// value at the origin is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionProfile {
    kind: ProfileKind,
    offset: f64,
    attrs: Attributes,
}

impl FunctionProfile {
    pub fn new(kind: ProfileKind) -> Result<Self> {
        match &kind {
            ProfileKind::Power { gamma } if !(gamma.is_finite() && *gamma > 0.0) => {
                return Err(GsgError::InvalidProfile(format!("power exponent must be > 0, got {gamma}")));
            }
            ProfileKind::Strip { width } if !(width.is_finite() && *width > 0.0) => {
                return Err(GsgError::InvalidProfile(format!("strip width must be > 0, got {width}")));
            }
            ProfileKind::Sampled { s, v } => {
                if s.len() != v.len() || s.len() < 2 {
                    return Err(GsgError::InvalidProfile(
                        "sampled profile needs at least two (s, v) pairs of equal length".into(),
                    ));
                }
                if s[0] < 0.0 || s.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(GsgError::InvalidProfile("sample abscissae must be strictly increasing and >= 0".into()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(GsgError::InvalidProfile("sample values must be finite".into()));
                }
            }
            _ => {}
        }
        let offset = kind.raw(0.0);
        let mut profile = Self { kind, offset, attrs: Attributes::default_flags() };
        let measured = profile.measure_attributes();
        match profile.kind.declared() {
            Some(declared) => {
                declared.consistent_with(&measured).map_err(|flag| {
                    GsgError::InvalidProfile(format!(
                        "{} profile fails the sampled {flag} test",
                        profile.kind.tag()
                    ))
                })?;
                profile.attrs = declared;
            }
            None => profile.attrs = Attributes { interpolated: true, ..measured },
        }
        if !profile.attrs.nonneg || !profile.attrs.increasing {
            return Err(GsgError::InvalidProfile(format!(
                "{} profile must be nonnegative and nondecreasing",
                profile.kind.tag()
            )));
        }
        Ok(profile)
    }

    pub fn power(gamma: f64) -> Self {
        Self::new(ProfileKind::Power { gamma }).expect("valid power profile")
    }
    pub fn quadratic() -> Self {
        Self::new(ProfileKind::Quadratic).expect("catalog")
    }
    pub fn exp_minus_one() -> Self {
        Self::new(ProfileKind::ExpMinusOne).expect("catalog")
    }
    pub fn linear() -> Self {
        Self::new(ProfileKind::Linear).expect("catalog")
    }
    pub fn entropy() -> Self {
        Self::new(ProfileKind::Entropy).expect("catalog")
    }
    pub fn log_growth() -> Self {
        Self::new(ProfileKind::LogGrowth).expect("catalog")
    }
    pub fn strip(width: f64) -> Self {
        Self::new(ProfileKind::Strip { width }).expect("valid strip")
    }
    pub fn sampled(s: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::new(ProfileKind::Sampled { s, v })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn attributes(&self) -> Attributes {
        self.attrs
    }

    /// Value at `s ≥ 0` after normalisation.
    pub fn eval(&self, s: f64) -> f64 {
        self.kind.raw(s.max(0.0)) - self.offset
    }

    /// Fails unless the profile may serve as `α`: convex and increasing.
    pub fn require_alpha(&self) -> Result<()> {
        if self.attrs.convex && self.attrs.increasing {
            Ok(())
        } else {
            Err(GsgError::InvalidProfile(format!("{} profile is not convex", self.kind.tag())))
        }
    }

    /// Fails unless the profile may serve as `β`: increasing and convex in `ln s`.
    pub fn require_beta(&self) -> Result<()> {
        if self.attrs.convex_in_log && self.attrs.increasing {
            Ok(())
        } else {
            Err(GsgError::InvalidProfile(format!("{} profile is not convex in ln s", self.kind.tag())))
        }
    }

    fn measure_attributes(&self) -> Attributes {
        let mut grid = vec![0.0];
        match &self.kind {
            ProfileKind::Sampled { s, .. } => grid.extend(s.iter().copied().filter(|&x| x > 0.0)),
            _ => grid.extend(log_grid(1e-3, 1e3, 97)),
        }
        grid.dedup();
        let vals: Vec<f64> = grid.iter().map(|&s| self.eval(s)).collect();
        let finite: Vec<(f64, f64)> = grid
            .iter()
            .zip(&vals)
            .filter(|(_, v)| v.is_finite())
            .map(|(&s, &v)| (s, v))
            .collect();
        let scale = finite.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
        let nonneg = vals.iter().all(|&v| v >= -1e-12 * scale);
        let increasing = vals.windows(2).all(|w| w[1] >= w[0] - 1e-12 * scale);
        let slopes = |log: bool| -> Vec<f64> {
            finite
                .windows(2)
                .filter(|w| !log || w[0].0 > 0.0)
                .map(|w| {
                    let dx = if log { w[1].0.ln() - w[0].0.ln() } else { w[1].0 - w[0].0 };
                    (w[1].1 - w[0].1) / dx
                })
                .collect()
        };
        let monotone = |sl: &[f64], up: bool| {
            let m = sl.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let tol = 1e-7 * m + 1e-12;
            sl.windows(2).all(|w| if up { w[1] >= w[0] - tol } else { w[1] <= w[0] + tol })
        };
        let lin = slopes(false);
        let lg = slopes(true);
        Attributes {
            convex: monotone(&lin, true),
            concave: monotone(&lin, false),
            convex_in_log: monotone(&lg, true),
            increasing,
            nonneg,
            differentiable: !matches!(self.kind, ProfileKind::Sampled { .. } | ProfileKind::Strip { .. }),
            interpolated: matches!(self.kind, ProfileKind::Sampled { .. }),
        }
    }
}

impl Attributes {
    fn default_flags() -> Self {
        Self {
            convex: false,
            concave: false,
            convex_in_log: false,
            increasing: false,
            nonneg: false,
            differentiable: false,
            interpolated: false,
        }
    }

    /// Every declared flag must be confirmed by the measured one.
    fn consistent_with(&self, measured: &Attributes) -> std::result::Result<(), &'static str> {
        let pairs = [
            (self.convex, measured.convex, "convexity"),
            (self.concave, measured.concave, "concavity"),
            (self.convex_in_log, measured.convex_in_log, "log-convexity"),
            (self.increasing, measured.increasing, "monotonicity"),
            (self.nonneg, measured.nonneg, "nonnegativity"),
        ];
        for (declared, seen, name) in pairs {
            if declared && !seen {
                return Err(name);
            }
        }
        Ok(())
    }
}

impl fmt::Display for FunctionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ProfileKind::Power { gamma } => write!(f, "s^{gamma}"),
            ProfileKind::Quadratic => f.write_str("s^2"),
            ProfileKind::ExpMinusOne => f.write_str("e^s-1"),
            ProfileKind::Linear => f.write_str("s"),
            ProfileKind::Entropy => f.write_str("s*ln(1+s)"),
            ProfileKind::LogGrowth => f.write_str("ln(1+s)"),
            ProfileKind::Strip { width } => write!(f, "strip({width})"),
            ProfileKind::Sampled { s, .. } => write!(f, "sampled[{}]", s.len()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<Vec<f64>>,
}

impl Serialize for FunctionProfile {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut raw = RawProfile { kind: self.kind.tag().into(), params: BTreeMap::new(), s: None, v: None };
        match &self.kind {
            ProfileKind::Power { gamma } => {
                raw.params.insert("gamma".into(), *gamma);
            }
            ProfileKind::Strip { width } => {
                raw.params.insert("width".into(), *width);
            }
            ProfileKind::Sampled { s, v } => {
                raw.s = Some(s.clone());
                raw.v = Some(v.clone());
            }
            _ => {}
        }
        raw.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FunctionProfile {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawProfile::deserialize(de)?;
        let param = |name: &str| {
            raw.params
                .get(name)
                .copied()
                .ok_or_else(|| D::Error::custom(format!("profile {:?} requires params.{name}", raw.kind)))
        };
        let kind = match raw.kind.as_str() {
            "power" => ProfileKind::Power { gamma: param("gamma")? },
            "quadratic" => ProfileKind::Quadratic,
            "exp-minus-one" => ProfileKind::ExpMinusOne,
            "linear" => ProfileKind::Linear,
            "entropy" => ProfileKind::Entropy,
            "log-growth" => ProfileKind::LogGrowth,
            "strip" => ProfileKind::Strip { width: param("width")? },
            "sampled" => ProfileKind::Sampled {
                s: raw.s.clone().ok_or_else(|| D::Error::custom("sampled profile requires s"))?,
                v: raw.v.clone().ok_or_else(|| D::Error::custom("sampled profile requires v"))?,
            },
            other => return Err(D::Error::custom(format!("unknown profile kind {other:?}"))),
        };
        FunctionProfile::new(kind).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Conjugates

/// `sup_{s>0} (r s − f(s))` for an arbitrary convex nondecreasing `f` with `f(0) = 0`.
pub fn monotone_conjugate_fn<F: Fn(f64) -> f64>(f: F, r: f64) -> ExtendedValue {
    sup_positive(|s| r * s - f(s), Some(0.0)).value
}

/// `α_*(r) = sup_{s>0} (r s − α(s))`.
pub fn convex_conjugate(alpha: &FunctionProfile, r: f64) -> Result<ExtendedValue> {
    alpha.require_alpha()?;
    if !(r >= 0.0) {
        return Err(GsgError::Domain(format!("convex conjugate needs r >= 0, got {r}")));
    }
    Ok(monotone_conjugate_fn(|s| alpha.eval(s), r))
}

/// `β^*(t) = inf_{s>0} (s t − β(s))`.
pub fn concave_conjugate(beta: &FunctionProfile, t: f64) -> Result<ExtendedValue> {
    if !(t > 0.0) {
        return Err(GsgError::Domain(format!("concave conjugate needs t > 0, got {t}")));
    }
    Ok(inf_positive(|s| s * t - beta.eval(s), Some(0.0)).value)
}

// ---------------------------------------------------------------------------
// Growth conditions

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Doubling {
    Accepted { h: f64 },
    Rejected { witness_s: f64 },
}

/// Candidate doubling constants `2^{j/8}`.
pub fn doubling_lattice(h_max: f64) -> Vec<f64> {
    (1..).map(|j| 2f64.powf(j as f64 / 8.0)).take_while(|&h| h <= h_max * (1.0 + 1e-12)).collect()
}

/// Smallest lattice `h ∈ (1, h_max]` with `2β(s) ≤ β(hs)` on the default grid.
pub fn check_doubling(beta: &FunctionProfile, h_max: f64) -> Doubling {
    check_doubling_on(beta, h_max, &default_grid())
}

pub fn check_doubling_on(beta: &FunctionProfile, h_max: f64, grid: &[f64]) -> Doubling {
    let holds = |h: f64, s: f64| {
        let lhs = 2.0 * beta.eval(s);
        let rhs = beta.eval(h * s);
        lhs <= rhs + 1e-12 * rhs.abs() + 1e-14
    };
    for h in doubling_lattice(h_max) {
        if grid.iter().all(|&s| holds(h, s)) {
            return Doubling::Accepted { h };
        }
    }
    let h = doubling_lattice(h_max).last().copied().unwrap_or(h_max);
    let witness_s = grid.iter().rev().copied().find(|&s| !holds(h, s)).unwrap_or(grid[grid.len() - 1]);
    Doubling::Rejected { witness_s }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NqaStatus {
    Finite,
    Divergent,
    Undetermined,
}

/// Outcome of the nonquasianalyticity test `∫_1^∞ β(s)/s² ds < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nonquasianalyticity {
    pub status: NqaStatus,
    pub integral: ExtendedValue,
    /// Last quadrature cut-off `S` and tail estimate beyond it.
    pub cutoff: f64,
    pub tail: f64,
    /// Local log-log slope of `β` at the cut-off.
    pub slope: f64,
}

impl Nonquasianalyticity {
    /// `(true, value)`, `(false, +∞)`, or `None` when undetermined.
    pub fn verdict(&self) -> Option<(bool, ExtendedValue)> {
        match self.status {
            NqaStatus::Finite => Some((true, self.integral)),
            NqaStatus::Divergent => Some((false, ExtendedValue::PosInf)),
            NqaStatus::Undetermined => None,
        }
    }
}

/// In `u = ln s` the integral is `∫_0^∞ β(e^u) e^{-u} du`. It is integrated
/// to increasing cut-offs `U`; beyond `S = e^U` the tail is closed with the
/// power-law envelope given by the local log-log slope `ρ` of `β`,
/// `β(S)/(S(1−ρ))`. A slope `ρ ≥ 1` with `β(s)/s` nondecreasing on the tail
/// is a divergence certificate (`β(s)/s² ≥ c/s`).
pub fn check_nonquasianalytic(beta: &FunctionProfile) -> Nonquasianalyticity {
    let h = |u: f64| beta.eval(u.exp()) * (-u).exp();
    let mut acc = 0.0;
    let mut done_to = 0.0;
    let mut prev_total: Option<f64> = None;
    let mut last = Nonquasianalyticity {
        status: NqaStatus::Undetermined,
        integral: ExtendedValue::PosInf,
        cutoff: 1.0,
        tail: f64::INFINITY,
        slope: f64::NAN,
    };
    for &cut in &[10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0] {
        let (piece, ok) = adaptive_simpson(h, done_to, cut, 1e-13, 48);
        if !ok || !piece.is_finite() {
            break;
        }
        acc += piece;
        done_to = cut;
        let s = cut.exp();
        let b_hi = beta.eval(s);
        let b_lo = beta.eval((cut - 1.0).exp());
        let b_lo2 = beta.eval((cut - 2.0).exp());
        if !b_hi.is_finite() {
            return Nonquasianalyticity { status: NqaStatus::Divergent, integral: ExtendedValue::PosInf, cutoff: s, tail: f64::INFINITY, slope: f64::INFINITY };
        }
        if b_hi <= 0.0 {
            // β vanishes up to S; nothing to estimate yet.
            continue;
        }
        let rho = b_hi.ln() - b_lo.max(f64::MIN_POSITIVE).ln();
        let ratio_up = |a: f64, sa: f64, b: f64, sb: f64| b / sb >= a / sa * (1.0 - 1e-12);
        let e = std::f64::consts::E;
        if rho >= 1.0 - 1e-9 && ratio_up(b_lo2, s / (e * e), b_lo, s / e) && ratio_up(b_lo, s / e, b_hi, s) {
            return Nonquasianalyticity { status: NqaStatus::Divergent, integral: ExtendedValue::PosInf, cutoff: s, tail: f64::INFINITY, slope: rho };
        }
        let tail = if rho < 1.0 { b_hi / (s * (1.0 - rho)) } else { f64::INFINITY };
        let total = acc + tail;
        last = Nonquasianalyticity { status: NqaStatus::Undetermined, integral: ExtendedValue::from(total.min(f64::MAX)), cutoff: s, tail, slope: rho };
        if let Some(p) = prev_total {
            if (total - p).abs() <= 1e-10 * total.abs().max(1e-300) && tail <= 1e-3 * total.abs().max(1e-300) {
                last.status = NqaStatus::Finite;
                return last;
            }
        }
        prev_total = Some(total);
    }
    last
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Fitted {
    Holds { c: f64, h: f64, argmax_s: f64 },
    Fails { witness_s: f64, excess: f64 },
}

impl Fitted {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Holds { .. })
    }
}

/// Maximum of `diff` over `grid`, refined by golden-section search in `ln s`
/// around the best node. `None` when the maximum sits on the right edge with
/// the difference still rising, i.e. the supremum is not attained.
fn grid_sup<F: Fn(f64) -> f64 + Sync>(diff: F, grid: &[f64]) -> std::result::Result<(f64, f64), (f64, f64)> {
    let vals: Vec<f64> = crate::par::map(grid, |&s| diff(s));
    let (i, v) = crate::par::argmax(&vals).expect("non-empty grid");
    let n = grid.len();
    if i == n - 1 && vals[n - 1] > vals[n - 2] + 1e-12 * vals[n - 1].abs().max(1.0) {
        return Err((grid[n - 1], v));
    }
    if !v.is_finite() {
        return Err((grid[i], v));
    }
    if i == 0 || i == n - 1 {
        return Ok((grid[i], v));
    }
    let (t, gv, _) = golden_max(|t| diff(t.exp()), grid[i - 1].ln(), grid[i + 1].ln(), 1e-12);
    if gv > v {
        Ok((t.exp(), gv))
    } else {
        Ok((grid[i], v))
    }
}

/// Lattice for the additive constant of `α1(s) ≤ C + α(Hs)`: `0` and powers of two.
fn c_lattice(c: f64) -> f64 {
    if c <= 1e-12 {
        return 0.0;
    }
    let mut x = 1.0;
    while x < c * (1.0 - 1e-12) {
        x *= 2.0;
    }
    x
}

/// Searches `H = 2^{j/8}, j = 0..80` for constants with `α1(s) ≤ C + α(Hs)`.
pub fn check_precedes(alpha1: &FunctionProfile, alpha: &FunctionProfile) -> Fitted {
    let grid = default_grid();
    let mut witness = (grid[grid.len() - 1], f64::INFINITY);
    for j in 0..=80 {
        let h = 2f64.powf(j as f64 / 8.0);
        match grid_sup(|s| alpha1.eval(s) - alpha.eval(h * s), &grid) {
            Ok((s, c)) => return Fitted::Holds { c: c_lattice(c), h, argmax_s: s },
            Err(w) => witness = w,
        }
    }
    Fitted::Fails { witness_s: witness.0, excess: witness.1 }
}

/// Fits `C_ε` in `β(s) + ln s ≤ C_ε + β((1+ε)s)`.
pub fn lemma2_margin(beta: &FunctionProfile, eps: f64) -> Result<Fitted> {
    if !(eps > 0.0) {
        return Err(GsgError::Domain(format!("epsilon must be > 0, got {eps}")));
    }
    let grid = default_grid();
    Ok(match grid_sup(|s| beta.eval(s) + s.ln() - beta.eval((1.0 + eps) * s), &grid) {
        Ok((s, c)) => Fitted::Holds { c, h: 1.0 + eps, argmax_s: s },
        Err((s, v)) => Fitted::Fails { witness_s: s, excess: v },
    })
}

/// Smallest grid point beyond which `β(s) ≥ c ln s` holds on a log grid up to `1e200`.
pub fn log_dominance_threshold(beta: &FunctionProfile, c: f64) -> Option<f64> {
    let grid = log_grid(1.0 + 1e-9, 1e200, 2000);
    let ok: Vec<bool> = grid.iter().map(|&s| beta.eval(s) >= c * s.ln()).collect();
    if !ok[ok.len() - 1] {
        return None;
    }
    let first_bad_from_end = ok.iter().rposition(|&b| !b);
    Some(match first_bad_from_end {
        None => grid[0],
        Some(i) => grid[i + 1],
    })
}

/// True when the sup search for `α_*(r)` ran into the divergence limit.
pub fn conjugate_diverges(alpha: &FunctionProfile, r: f64) -> bool {
    sup_positive(|s| r * s - alpha.eval(s), Some(0.0)).attained == Attained::Divergent
}

// ---------------------------------------------------------------------------
// Involution

/// 512 log-spaced points on `[1e-3, s_hi]`, with `s_hi ≤ 1e6` chosen so that
/// the slopes `α(2s)/s` stay below `1e10` and the inner searches stay in range.
pub fn involution_grid(alpha: &FunctionProfile) -> Vec<f64> {
    let steep = |s: f64| alpha.eval(2.0 * s) / s > 1e10;
    let mut hi = 1e6;
    if steep(hi) {
        let mut lo = 1e-3;
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if steep(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi = lo;
    }
    log_grid(1e-3, hi, 512)
}

/// Checks `(α_*)_* = α` to relative `tol` and `2α_*(s) ≤ α_*(2s)` at every grid point.
pub fn involution_check(alpha: &FunctionProfile, grid: Option<&[f64]>, tol: f64) -> Result<BoundReport> {
    alpha.require_alpha()?;
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = involution_grid(alpha);
            &owned
        }
    };
    let conj = |r: f64| monotone_conjugate_fn(|s| alpha.eval(s), r).to_f64();
    let rows: Vec<(f64, bool)> = crate::par::map(grid, |&s| {
        let back = sup_positive(|r| r * s - conj(r), Some(0.0)).value.to_f64();
        let a = alpha.eval(s);
        let rel = (back - a).abs() / a.abs().max(1e-300);
        let (c1, c2) = (conj(s), conj(2.0 * s));
        (rel, 2.0 * c1 <= c2 + 1e-12 * c2.abs())
    });
    let (i, worst) = rows
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, r)| if r.0 > acc.1 { (i, r.0) } else { acc });
    let name = "conjugate_involution";
    if let Some(j) = rows.iter().position(|r| !r.1) {
        return Ok(BoundReport::fail(name, Witness::new(vec![grid[j]], conj(grid[j]), "2 alpha_*(s) > alpha_*(2s)"))
            .budget("grid", grid.len() as u64));
    }
    let report = if worst <= tol {
        BoundReport::pass(name)
    } else {
        BoundReport::fail(name, Witness::new(vec![grid[i]], worst, "(alpha_*)_* differs from alpha"))
    };
    Ok(report
        .constant("max_rel_error", worst)
        .constant("s_max", grid[grid.len() - 1])
        .budget("grid", grid.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn involution_catalog() {
        for a in [FunctionProfile::quadratic(), FunctionProfile::exp_minus_one(), FunctionProfile::entropy()] {
            let r = involution_check(&a, None, 1e-6).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn convex_conjugate_examples() {
        let q = FunctionProfile::quadratic();
        assert!(rel(convex_conjugate(&q, 2.0).unwrap().to_f64(), 1.0) < 1e-9);
        let l = FunctionProfile::linear();
        assert_eq!(convex_conjugate(&l, 0.5).unwrap(), ExtendedValue::Finite(0.0));
        assert_eq!(convex_conjugate(&l, 2.0).unwrap(), ExtendedValue::PosInf);
        assert!(convex_conjugate(&q, -1.0).is_err());
        assert!(convex_conjugate(&FunctionProfile::power(0.5), 1.0).is_err());
    }

    #[test]
    fn exp_conjugate_matches_grid_oracle() {
        // Oracle: brute-force sup of r s - (e^s - 1) on a dense grid, then a
        // local parabola through the best three nodes.
        let r = std::f64::consts::E;
        let n = 200_001;
        let (lo, hi) = (0.0, 5.0);
        let h = (hi - lo) / (n - 1) as f64;
        let f = |s: f64| r * s - s.exp_m1();
        let (mut bi, mut bv) = (0, f64::NEG_INFINITY);
        for i in 0..n {
            let v = f(lo + h * i as f64);
            if v > bv {
                bi = i;
                bv = v;
            }
        }
        let (a, b, c) = (f(lo + h * (bi - 1) as f64), bv, f(lo + h * (bi + 1) as f64));
        let oracle = b + (a - c).powi(2) / (8.0 * (2.0 * b - a - c));
        let got = convex_conjugate(&FunctionProfile::exp_minus_one(), r).unwrap().to_f64();
        assert!(rel(got, oracle) < 1e-8, "{got} vs {oracle}");
        // closed form r ln r - r + 1 = 1 at r = e
        assert!(rel(got, 1.0) < 1e-9);
    }

    #[test]
    fn concave_conjugate_examples() {
        let sq = FunctionProfile::power(0.5);
        assert!(rel(concave_conjugate(&sq, 0.5).unwrap().to_f64(), -0.5) < 1e-9);
        let p23 = FunctionProfile::power(2.0 / 3.0);
        assert!(rel(concave_conjugate(&p23, 1.0).unwrap().to_f64(), -4.0 / 27.0) < 1e-9);
        assert!(concave_conjugate(&sq, 0.0).is_err());
    }

    #[test]
    fn concave_conjugate_grid_oracle() {
        // Oracle: dense log grid of 0.3 s - s^0.9, refined by a local parabola in ln s.
        let f = |s: f64| 0.3 * s - s.powf(0.9);
        let n = 400_001;
        let (a, b) = (-5.0f64, 15.0f64);
        let h = (b - a) / (n - 1) as f64;
        let (mut bi, mut bv) = (0usize, f64::INFINITY);
        for i in 0..n {
            let v = f((a + h * i as f64).exp());
            if v < bv {
                bi = i;
                bv = v;
            }
        }
        let t = |i: usize| (a + h * i as f64).exp();
        let (l, m, r) = (f(t(bi - 1)), bv, f(t(bi + 1)));
        let oracle = m - (l - r).powi(2) / (8.0 * (l + r - 2.0 * m));
        let got = concave_conjugate(&FunctionProfile::power(0.9), 0.3).unwrap().to_f64();
        assert!(rel(got, oracle) < 1e-9, "{got} vs {oracle}");
    }

    #[test]
    fn doubling_examples() {
        assert_eq!(check_doubling(&FunctionProfile::power(0.5), 16.0), Doubling::Accepted { h: 4.0 });
        match check_doubling(&FunctionProfile::power(2.0 / 3.0), 16.0) {
            Doubling::Accepted { h } => assert!(rel(h, 2f64.powf(1.5)) < 1e-12),
            other => panic!("{other:?}"),
        }
        match check_doubling(&FunctionProfile::log_growth(), 16.0) {
            Doubling::Rejected { witness_s } => assert!(witness_s > 16.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nonquasianalyticity_examples() {
        let r = check_nonquasianalytic(&FunctionProfile::power(0.5));
        assert_eq!(r.status, NqaStatus::Finite);
        assert!((r.integral.to_f64() - 2.0).abs() < 1e-6);
        let r = check_nonquasianalytic(&FunctionProfile::power(0.9));
        assert_eq!(r.status, NqaStatus::Finite);
        assert!((r.integral.to_f64() - 10.0).abs() < 1e-4);
        assert_eq!(check_nonquasianalytic(&FunctionProfile::linear()).verdict(), Some((false, ExtendedValue::PosInf)));
        assert_eq!(check_nonquasianalytic(&FunctionProfile::entropy()).status, NqaStatus::Divergent);
        let r = check_nonquasianalytic(&FunctionProfile::log_growth());
        // int_1^inf ln(1+s)/s^2 ds = 2 ln 2
        assert_eq!(r.status, NqaStatus::Finite);
        assert!((r.integral.to_f64() - 2.0 * 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn precedence_examples() {
        let sq = FunctionProfile::power(0.5);
        let lin = FunctionProfile::linear();
        match check_precedes(&sq, &lin) {
            Fitted::Holds { c, h, argmax_s } => {
                assert_eq!((c, h), (1.0, 1.0));
                assert!((argmax_s - 0.25).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        assert!(!check_precedes(&lin, &sq).holds());
        match check_precedes(&sq, &sq) {
            Fitted::Holds { c, h, .. } => assert_eq!((c, h), (0.0, 1.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lemma2_examples() {
        // Oracle: sup of sqrt(s) + ln s - sqrt(2s) from the stationarity condition
        // (1 - sqrt 2)/(2 sqrt s) + 1/s = 0, i.e. sqrt s = 2/(sqrt 2 - 1).
        let root = 2.0 / (2f64.sqrt() - 1.0);
        let s = root * root;
        let oracle = s.sqrt() + s.ln() - (2.0 * s).sqrt();
        match lemma2_margin(&FunctionProfile::power(0.5), 1.0).unwrap() {
            Fitted::Holds { c, .. } => assert!(rel(c, oracle) < 1e-9, "{c} vs {oracle}"),
            other => panic!("{other:?}"),
        }
        assert!(lemma2_margin(&FunctionProfile::power(0.9), 0.1).unwrap().holds());
        match lemma2_margin(&FunctionProfile::log_growth(), 0.5).unwrap() {
            Fitted::Fails { witness_s, .. } => assert!(witness_s >= 1e5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sampled_profiles() {
        let s: Vec<f64> = (0..50).map(|i| i as f64 * 0.5).collect();
        let v: Vec<f64> = s.iter().map(|x| x * x).collect();
        let p = FunctionProfile::sampled(s, v).unwrap();
        assert!(p.attributes().convex && p.attributes().interpolated);
        assert!((p.eval(1.25) - 1.625).abs() < 1e-12);
        assert!(FunctionProfile::sampled(vec![0.0, 1.0, 0.5], vec![0.0, 1.0, 2.0]).is_err());
        assert!(FunctionProfile::sampled(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn json_forms() {
        let p: FunctionProfile = serde_json::from_str(r#"{"kind":"power","params":{"gamma":0.5}}"#).unwrap();
        assert_eq!(p, FunctionProfile::power(0.5));
        let txt = serde_json::to_string(&FunctionProfile::strip(1.0)).unwrap();
        assert_eq!(txt, r#"{"kind":"strip","params":{"width":1.0}}"#);
        let p: FunctionProfile = serde_json::from_str(r#"{"kind":"sampled","s":[0,1,2],"v":[0,1,4]}"#).unwrap();
        assert!(matches!(p.kind(), ProfileKind::Sampled { .. }));
        assert!(serde_json::from_str::<FunctionProfile>(r#"{"kind":"power"}"#).is_err());
        assert!(serde_json::from_str::<FunctionProfile>(r#"{"kind":"power","params":{"gamma":-1}}"#).is_err());
    }

    #[test]
    fn eq15_threshold() {
        let t = log_dominance_threshold(&FunctionProfile::power(0.5), 100.0).unwrap();
        assert!(t > 1e6 && t < 1e8);
        assert!(FunctionProfile::power(0.5).eval(t) >= 100.0 * t.ln());
    }
}
