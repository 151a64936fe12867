//! Scenario files: named profiles, cones, coefficients, models and test
//! functions, plus an ordered list of checks. Running a scenario writes a
//! JSON report bundle, CSV tables and a separate metadata file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::cone::{angular_separation, is_compact_subcone, Cone};
use crate::error::{GsgError, Result};
use crate::laplace::{
    self, bound23_check, boundary_value_convergence, convolution_bound_check, laplace_transform_with, theorem9_gamma_check,
    Convention, Functional, Gamma, TubePoint,
};
use crate::par;
use crate::profile::{
    check_doubling, check_nonquasianalytic, convex_conjugate, involution_check, Doubling, FunctionProfile, NqaStatus,
};
use crate::report::{BoundReport, Status, Witness};
use crate::search::log_grid;
use crate::sequence::{check_regularity, defining_sequence, lemma1_check, lemma3_sandwich, IndicatorFunction, PairFit, Role};
use crate::space::{check_membership_entire, cone_decompose, theorem1_crosscheck, DecomposeOptions, SpaceSpec, TestFunction, TubeGrid};
use crate::wick::{
    check_coefficient_conditions, check_model_invariants, majorant_bound_check, spectral_csv, spectral_fft_demo,
    theorem10_indicator_check, LatticeSpec, TwoPointModel, WickCoefficients,
};

pub const SCHEMA_VERSION: &str = "gsg-scenario/1";
pub const OUTPUT_DIR_ENV: &str = "GSG_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "gsg-out";

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub convention: Convention,
    #[serde(default)]
    pub profiles: BTreeMap<String, FunctionProfile>,
    #[serde(default)]
    pub cones: BTreeMap<String, Cone>,
    #[serde(default)]
    pub coefficients: BTreeMap<String, WickCoefficients>,
    #[serde(default)]
    pub models: BTreeMap<String, TwoPointModel>,
    #[serde(default)]
    pub test_functions: BTreeMap<String, TestFunction>,
    #[serde(default)]
    pub functionals: BTreeMap<String, Functional>,
    #[serde(default)]
    pub checks: Vec<CheckEntry>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub csv: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, csv: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(flatten)]
    pub check: Check,
}

fn k40() -> usize {
    40
}
fn tol6() -> f64 {
    1e-6
}
fn samples_default() -> usize {
    2000
}
fn h_max_default() -> f64 {
    16.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// Both sides of the saddle identity for `k = 0..=k_max`.
    #[serde(alias = "lemma1")]
    Saddle {
        alpha: String,
        #[serde(default = "k40")]
        k_max: usize,
        #[serde(default = "tol6")]
        tol: f64,
    },
    Involution {
        alpha: String,
        #[serde(default = "tol6")]
        tol: f64,
    },
    Conjugate {
        alpha: String,
        r: Vec<f64>,
    },
    Sandwich {
        beta: String,
        eps: f64,
    },
    Doubling {
        beta: String,
        #[serde(default = "h_max_default")]
        h_max: f64,
    },
    Nonquasianalytic {
        beta: String,
        #[serde(default)]
        expect_finite: Option<bool>,
        #[serde(default)]
        expect_value: Option<f64>,
        #[serde(default = "tol6")]
        tol: f64,
    },
    Sequence {
        profile: String,
        role: Role,
        #[serde(default = "k40")]
        k_max: usize,
    },
    Indicator {
        profile: String,
        role: Role,
        #[serde(default = "k40")]
        k_max: usize,
        s_min: f64,
        s_max: f64,
        #[serde(default = "points_default")]
        points: usize,
    },
    ConeContains {
        cone: String,
        points: Vec<Vec<f64>>,
    },
    ConeDistance {
        cone: String,
        point: Vec<f64>,
        #[serde(default)]
        expected: Option<f64>,
        #[serde(default = "tol9")]
        tol: f64,
    },
    Separation {
        k1: String,
        k2: String,
        #[serde(default = "samples_default")]
        samples: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    CompactSubcone {
        sub: String,
        outer: String,
        #[serde(default = "samples_default")]
        samples: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    Membership {
        function: String,
        alpha: String,
        beta: String,
        #[serde(default)]
        cone: Option<String>,
    },
    Crosscheck {
        function: String,
        alpha: String,
        beta: String,
    },
    Decompose {
        function: String,
        k1: String,
        k2: String,
        e0: String,
        alpha: String,
        beta: String,
        #[serde(default = "samples_default")]
        samples: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    Coefficients {
        coefficients: String,
    },
    ModelInvariants {
        model: String,
        #[serde(default = "samples_default")]
        samples: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    Majorant {
        model: String,
        v_prime: String,
        #[serde(default = "samples_default")]
        samples: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    Indicators {
        coefficients: String,
        model: String,
        alpha: String,
        beta: String,
        l: Vec<f64>,
        eps: Vec<f64>,
    },
    Spectral {
        model: String,
        coefficients: String,
        #[serde(default = "two")]
        n: usize,
        #[serde(default)]
        lattice: Option<LatticeSpec>,
    },
    Transform {
        functional: String,
        points: Vec<TubePoint>,
    },
    Bound23 {
        functional: String,
        alpha: String,
        beta: String,
        v_prime: String,
        eps: f64,
        #[serde(default = "samples_default")]
        samples: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    Convolution {
        functional: String,
        function: String,
        beta: String,
        eps: f64,
        p: Vec<f64>,
    },
    GammaConjugate {
        gamma: Gamma,
        beta: String,
        eps: Vec<f64>,
    },
    BoundaryValues {
        functional: String,
        function: String,
        v_prime: String,
        y: Vec<f64>,
    },
}

fn points_default() -> usize {
    200
}
fn tol9() -> f64 {
    1e-9
}
fn two() -> usize {
    2
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Saddle { .. } => "saddle",
            Self::Involution { .. } => "involution",
            Self::Conjugate { .. } => "conjugate",
            Self::Sandwich { .. } => "sandwich",
            Self::Doubling { .. } => "doubling",
            Self::Nonquasianalytic { .. } => "nonquasianalytic",
            Self::Sequence { .. } => "sequence",
            Self::Indicator { .. } => "indicator",
            Self::ConeContains { .. } => "cone_contains",
            Self::ConeDistance { .. } => "cone_distance",
            Self::Separation { .. } => "separation",
            Self::CompactSubcone { .. } => "compact_subcone",
            Self::Membership { .. } => "membership",
            Self::Crosscheck { .. } => "crosscheck",
            Self::Decompose { .. } => "decompose",
            Self::Coefficients { .. } => "coefficients",
            Self::ModelInvariants { .. } => "model_invariants",
            Self::Majorant { .. } => "majorant",
            Self::Indicators { .. } => "indicators",
            Self::Spectral { .. } => "spectral",
            Self::Transform { .. } => "transform",
            Self::Bound23 { .. } => "bound23",
            Self::Convolution { .. } => "convolution",
            Self::GammaConjugate { .. } => "gamma_conjugate",
            Self::BoundaryValues { .. } => "boundary_values",
        }
    }

    /// Every `(table, name)` reference made by the check.
    fn references(&self) -> Vec<(&'static str, &str)> {
        use Check::*;
        let p = "profile";
        let c = "cone";
        let f = "test function";
        let u = "functional";
        match self {
            Saddle { alpha, .. } | Involution { alpha, .. } | Conjugate { alpha, .. } => vec![(p, alpha)],
            Sandwich { beta, .. } | Doubling { beta, .. } | Nonquasianalytic { beta, .. } | GammaConjugate { beta, .. } => {
                vec![(p, beta)]
            }
            Sequence { profile, .. } | Indicator { profile, .. } => vec![(p, profile)],
            ConeContains { cone, .. } | ConeDistance { cone, .. } => vec![(c, cone)],
            Separation { k1, k2, .. } => vec![(c, k1), (c, k2)],
            CompactSubcone { sub, outer, .. } => vec![(c, sub), (c, outer)],
            Membership { function, alpha, beta, cone } => {
                let mut v = vec![(f, function.as_str()), (p, alpha), (p, beta)];
                if let Some(k) = cone {
                    v.push((c, k));
                }
                v
            }
            Crosscheck { function, alpha, beta } => vec![(f, function), (p, alpha), (p, beta)],
            Decompose { function, k1, k2, e0, alpha, beta, .. } => {
                vec![(f, function), (c, k1), (c, k2), (f, e0), (p, alpha), (p, beta)]
            }
            Coefficients { coefficients } => vec![("coefficients", coefficients)],
            ModelInvariants { model, .. } => vec![("model", model)],
            Majorant { model, v_prime, .. } => vec![("model", model), (c, v_prime)],
            Indicators { coefficients, model, alpha, beta, .. } => {
                vec![("coefficients", coefficients), ("model", model), (p, alpha), (p, beta)]
            }
            Spectral { model, coefficients, .. } => vec![("model", model), ("coefficients", coefficients)],
            Transform { functional, .. } => vec![(u, functional)],
            Bound23 { functional, alpha, beta, v_prime, .. } => vec![(u, functional), (p, alpha), (p, beta), (c, v_prime)],
            Convolution { functional, function, beta, .. } => vec![(u, functional), (f, function), (p, beta)],
            BoundaryValues { functional, function, v_prime, .. } => vec![(u, functional), (f, function), (c, v_prime)],
        }
    }
}

/// A finished check: its report and the CSV tables it produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub check: String,
    pub report: BoundReport,
    pub tables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub undetermined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bundle {
    pub schema: String,
    pub name: Option<String>,
    pub seed: u64,
    pub convention: Convention,
    pub checks: Vec<CheckOutcome>,
    pub summary: Summary,
}

impl Bundle {
    /// 0 iff no check failed.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.summary.fail > 0)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub bundle: Bundle,
    pub out_dir: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.bundle.exit_code()
    }
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario> {
    let raw: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| GsgError::Scenario(format!("{origin}: line {} column {}: {e}", e.line(), e.column())))?;
    match raw.get("schema").and_then(|v| v.as_str()) {
        Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(GsgError::Scenario(format!(
                "{origin}: unsupported schema {other:?}, expected {SCHEMA_VERSION:?}"
            )))
        }
        None => return Err(GsgError::Scenario(format!("{origin}: missing string field \"schema\""))),
    }
    let sc: Scenario = serde_json::from_str(text)
        .map_err(|e| GsgError::Scenario(format!("{origin}: line {} column {}: {e}", e.line(), e.column())))?;
    sc.validate()?;
    Ok(sc)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    parse_scenario(&text, &path.display().to_string())
}

/// `--out`, then the scenario's `output.dir`, then `GSG_OUTPUT_DIR`, then `gsg-out`.
pub fn resolve_output_dir(cli: Option<&Path>, scenario: &Scenario) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(p) = &scenario.output.dir {
        return p.clone();
    }
    default_output_dir()
}

pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

impl Scenario {
    pub fn empty() -> Self {
        serde_json::from_value(serde_json::json!({ "schema": SCHEMA_VERSION })).expect("empty scenario")
    }

    fn lookup<'a, T>(&self, table: &'a BTreeMap<String, T>, kind: &'static str, name: &str) -> Result<&'a T> {
        table.get(name).ok_or_else(|| GsgError::UnresolvedReference { kind, name: name.to_owned() })
    }

    fn profile(&self, name: &str) -> Result<&FunctionProfile> {
        self.lookup(&self.profiles, "profile", name)
    }
    fn cone(&self, name: &str) -> Result<&Cone> {
        self.lookup(&self.cones, "cone", name)
    }
    fn function(&self, name: &str) -> Result<&TestFunction> {
        self.lookup(&self.test_functions, "test function", name)
    }
    fn functional(&self, name: &str) -> Result<&Functional> {
        self.lookup(&self.functionals, "functional", name)
    }
    fn coeffs(&self, name: &str) -> Result<&WickCoefficients> {
        self.lookup(&self.coefficients, "coefficients", name)
    }
    fn model(&self, name: &str) -> Result<&TwoPointModel> {
        self.lookup(&self.models, "model", name)
    }

    /// Resolves every reference and validates every named object.
    pub fn validate(&self) -> Result<()> {
        for c in self.cones.values() {
            c.validate()?;
        }
        for m in self.models.values() {
            m.validate()?;
        }
        for g in self.test_functions.values() {
            g.validate()?;
        }
        for u in self.functionals.values() {
            u.validate()?;
        }
        let mut ids = std::collections::BTreeSet::new();
        for (i, entry) in self.checks.iter().enumerate() {
            for (kind, name) in entry.check.references() {
                let found = match kind {
                    "profile" => self.profiles.contains_key(name),
                    "cone" => self.cones.contains_key(name),
                    "test function" => self.test_functions.contains_key(name),
                    "functional" => self.functionals.contains_key(name),
                    "coefficients" => self.coefficients.contains_key(name),
                    _ => self.models.contains_key(name),
                };
                if !found {
                    return Err(GsgError::UnresolvedReference { kind, name: name.to_owned() });
                }
            }
            if !ids.insert(check_id(i, entry)) {
                return Err(GsgError::Scenario(format!("duplicate check id {:?}", check_id(i, entry))));
            }
        }
        Ok(())
    }
}

fn check_id(i: usize, entry: &CheckEntry) -> String {
    entry.id.clone().unwrap_or_else(|| format!("{:02}-{}", i + 1, entry.check.name()))
}

/// Loads, runs and writes one scenario; see [`resolve_output_dir`] for `out`.
pub fn run_scenario(path: &Path, out: Option<&Path>) -> Result<RunOutcome> {
    let sc = load_scenario(path)?;
    let dir = resolve_output_dir(out, &sc);
    let bundle = run(&sc, &dir, Some(path))?;
    Ok(RunOutcome { bundle, out_dir: dir })
}

/// Runs the checks in order and writes `report.json`, `metadata.json` and the CSV tables.
pub fn run(sc: &Scenario, dir: &Path, source: Option<&Path>) -> Result<Bundle> {
    sc.validate()?;
    fs::create_dir_all(dir)?;
    let mut outcomes = Vec::with_capacity(sc.checks.len());
    for (i, entry) in sc.checks.iter().enumerate() {
        let id = check_id(i, entry);
        let (report, tables) = execute(sc, &entry.check)?;
        let mut names = Vec::new();
        if sc.output.csv {
            for (suffix, body) in tables {
                let name = if suffix.is_empty() { format!("{id}.csv") } else { format!("{id}-{suffix}.csv") };
                fs::write(dir.join(&name), body)?;
                names.push(name);
            }
        }
        outcomes.push(CheckOutcome { id, check: entry.check.name().to_owned(), report, tables: names });
    }
    let count = |s: Status| outcomes.iter().filter(|o| o.report.status == s).count();
    let summary = Summary { pass: count(Status::Pass), fail: count(Status::Fail), undetermined: count(Status::Undetermined) };
    let bundle = Bundle {
        schema: SCHEMA_VERSION.to_owned(),
        name: sc.name.clone(),
        seed: sc.seed,
        convention: sc.convention,
        checks: outcomes,
        summary,
    };
    let mut text = serde_json::to_string_pretty(&bundle)?;
    text.push('\n');
    fs::write(dir.join("report.json"), text)?;
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "created_unix": created,
        "version": env!("CARGO_PKG_VERSION"),
        "parallel": par::is_parallel(),
        "scenario": source.map(|p| p.display().to_string()),
    });
    fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(bundle)
}

type Tables = Vec<(String, String)>;

fn csv_table<S: Serialize>(rows: &[S]) -> Result<String> {
    let io = |e: csv::Error| GsgError::Io(std::io::Error::other(e.to_string()));
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| GsgError::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| GsgError::Io(std::io::Error::other(e.to_string())))
}

fn info(check: &str, n: usize) -> BoundReport {
    BoundReport::pass(check).budget("points", n as u64)
}

/// Runs one check against the scenario's named objects.
pub fn execute(sc: &Scenario, check: &Check) -> Result<(BoundReport, Tables)> {
    let seed_of = |s: &Option<u64>| s.unwrap_or(sc.seed);
    let mut tables: Tables = Vec::new();
    let report = match check {
        Check::Saddle { alpha, k_max, tol } => {
            let a = sc.profile(alpha)?;
            let rows: Vec<Result<_>> = par::map_range(k_max + 1, |k| lemma1_check(a, k));
            let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
            tables.push((String::new(), csv_table(&rows)?));
            let (k, worst) = rows.iter().fold((0, 0.0f64), |acc, r| if r.difference > acc.1 { (r.k, r.difference) } else { acc });
            let r = if worst <= *tol {
                BoundReport::pass("saddle")
            } else {
                BoundReport::fail("saddle", Witness::new(vec![k as f64], worst, "sides of the saddle identity differ"))
            };
            r.constant("max_ln_difference", worst).budget("k_max", *k_max as u64)
        }
        Check::Involution { alpha, tol } => involution_check(sc.profile(alpha)?, None, *tol)?,
        Check::Conjugate { alpha, r } => {
            let a = sc.profile(alpha)?;
            #[derive(Serialize)]
            struct Row {
                r: f64,
                value: f64,
            }
            let rows = r
                .iter()
                .map(|&x| Ok(Row { r: x, value: convex_conjugate(a, x)?.to_f64() }))
                .collect::<Result<Vec<_>>>()?;
            tables.push((String::new(), csv_table(&rows)?));
            info("conjugate", rows.len())
                .constant("max", rows.iter().map(|w| w.value).fold(f64::NEG_INFINITY, f64::max))
                .detail("values", rows.iter().map(|w| w.value).collect::<Vec<_>>())
        }
        Check::Sandwich { beta, eps } => lemma3_sandwich(sc.profile(beta)?, *eps, None)?,
        Check::Doubling { beta, h_max } => match check_doubling(sc.profile(beta)?, *h_max) {
            Doubling::Accepted { h } => BoundReport::pass("doubling").constant("H", h).budget("grid", 512),
            Doubling::Rejected { witness_s } => {
                BoundReport::fail("doubling", Witness::new(vec![witness_s], 0.0, "2 beta(s) > beta(H s) for every lattice H"))
            }
        },
        Check::Nonquasianalytic { beta, expect_finite, expect_value, tol } => {
            let r = check_nonquasianalytic(sc.profile(beta)?);
            let base = |st: Status| {
                let mut rep = BoundReport::new("nonquasianalytic", st)
                    .constant("cutoff", r.cutoff)
                    .constant("tail", r.tail)
                    .constant("slope", r.slope)
                    .detail("classification", r.status)
                    .budget("cutoff", r.cutoff as u64);
                if let Some(v) = r.integral.finite() {
                    rep = rep.constant("integral", v);
                }
                rep
            };
            let finite = match r.status {
                NqaStatus::Finite => Some(true),
                NqaStatus::Divergent => Some(false),
                NqaStatus::Undetermined => None,
            };
            match (finite, expect_finite) {
                (None, _) => base(Status::Undetermined).warn("classification undetermined"),
                (Some(got), Some(want)) if got != *want => base(Status::Fail).with_witness(Witness::new(
                    vec![r.cutoff],
                    r.integral.to_f64(),
                    format!("classified finite = {got}, expected {want}"),
                )),
                (Some(true), _) => match expect_value {
                    Some(v) if (r.integral.to_f64() - v).abs() > *tol => base(Status::Fail).with_witness(Witness::new(
                        vec![r.cutoff],
                        r.integral.to_f64(),
                        format!("integral differs from {v} by more than {tol}"),
                    )),
                    _ => base(Status::Pass),
                },
                _ => base(Status::Pass),
            }
        }
        Check::Sequence { profile, role, k_max } => {
            let seq = defining_sequence(sc.profile(profile)?, *role, *k_max)?;
            tables.push((String::new(), seq.to_csv()));
            match check_regularity(&seq)? {
                PairFit::Holds { c, h, .. } => {
                    BoundReport::pass("sequence").constant("C", c).constant("H", h).budget("k_max", *k_max as u64)
                }
                PairFit::Fails { k, l, excess } => BoundReport::fail(
                    "sequence",
                    Witness::new(vec![k as f64, l as f64], excess, "a_{k+l} exceeds C H^{k+l} a_k a_l"),
                ),
            }
        }
        Check::Indicator { profile, role, k_max, s_min, s_max, points } => {
            if !(*s_min > 0.0 && s_max > s_min && *points >= 2) {
                return Err(GsgError::Domain("indicator grid needs 0 < s_min < s_max and points >= 2".into()));
            }
            let seq = defining_sequence(sc.profile(profile)?, *role, *k_max)?;
            let ind = IndicatorFunction::new(seq, &log_grid(*s_min, *s_max, *points))?;
            tables.push((String::new(), ind.to_csv()));
            let mut rep = info("indicator", *points).constant("k_max", *k_max as f64);
            if ind.any_truncated() {
                rep = rep.warn("indicator truncated by k_max on part of the grid");
            }
            rep
        }
        Check::ConeContains { cone, points } => {
            let k = sc.cone(cone)?;
            let flags = points.iter().map(|p| k.contains(p)).collect::<Result<Vec<_>>>()?;
            info("cone_contains", points.len())
                .constant("inside", flags.iter().filter(|&&f| f).count() as f64)
                .detail("contains", flags)
        }
        Check::ConeDistance { cone, point, expected, tol } => {
            let d = sc.cone(cone)?.distance(point)?;
            match expected {
                Some(e) if (d - e).abs() > *tol => {
                    BoundReport::fail("cone_distance", Witness::new(point.clone(), d, format!("expected {e}")))
                }
                _ => info("cone_distance", 1).constant("distance", d),
            }
        }
        Check::Separation { k1, k2, samples, seed } => {
            let s = angular_separation(sc.cone(k1)?, sc.cone(k2)?, *samples, seed_of(seed))?;
            let rep = if s.theta > 0.0 {
                BoundReport::pass("separation")
            } else {
                BoundReport::fail("separation", Witness::new(s.worst_direction.clone(), 0.0, "cones touch"))
            };
            rep.constant("theta", s.theta).budget("samples", s.samples as u64).budget("seed", seed_of(seed))
        }
        Check::CompactSubcone { sub, outer, samples, seed } => {
            let s = is_compact_subcone(sc.cone(sub)?, sc.cone(outer)?, *samples, seed_of(seed))?;
            let rep = if s.compact {
                BoundReport::pass("compact_subcone")
            } else {
                BoundReport::fail(
                    "compact_subcone",
                    Witness::new(s.witness.clone().unwrap_or_default(), s.min_margin, "direction on or outside the boundary"),
                )
            };
            rep.constant("min_margin", s.min_margin).budget("samples", s.samples as u64).budget("seed", seed_of(seed))
        }
        Check::Membership { function, alpha, beta, cone } => {
            let g = sc.function(function)?;
            let spec = SpaceSpec {
                alpha: sc.profile(alpha)?.clone(),
                beta: sc.profile(beta)?.clone(),
                cone: match cone {
                    Some(c) => sc.cone(c)?.clone(),
                    None => Cone::FullSpace { dim: crate::space::Entire::dim(g) },
                },
            };
            check_membership_entire(g, &spec)?
        }
        Check::Crosscheck { function, alpha, beta } => {
            let g = sc.function(function)?;
            let spec = SpaceSpec::full(sc.profile(alpha)?.clone(), sc.profile(beta)?.clone(), crate::space::Entire::dim(g));
            theorem1_crosscheck(g, &spec)?
        }
        Check::Decompose { function, k1, k2, e0, alpha, beta, samples, seed } => {
            let opts = DecomposeOptions {
                alpha: sc.profile(alpha)?.clone(),
                beta: sc.profile(beta)?.clone(),
                separation_samples: *samples,
                seed: seed_of(seed),
                grid: TubeGrid { seed: seed_of(seed), ..TubeGrid::default() },
            };
            let (_, rep) = cone_decompose(sc.function(function)?, sc.cone(k1)?, sc.cone(k2)?, sc.function(e0)?, &opts)?;
            rep.budget("seed", seed_of(seed))
        }
        Check::Coefficients { coefficients } => check_coefficient_conditions(sc.coeffs(coefficients)?)?,
        Check::ModelInvariants { model, samples, seed } => {
            check_model_invariants(sc.model(model)?, *samples, seed_of(seed))?.budget("seed", seed_of(seed))
        }
        Check::Majorant { model, v_prime, samples, seed } => {
            majorant_bound_check(sc.model(model)?, sc.cone(v_prime)?, *samples, seed_of(seed))?.budget("seed", seed_of(seed))
        }
        Check::Indicators { coefficients, model, alpha, beta, l, eps } => theorem10_indicator_check(
            sc.coeffs(coefficients)?,
            sc.model(model)?,
            sc.profile(alpha)?,
            sc.profile(beta)?,
            l,
            eps,
        )?,
        Check::Spectral { model, coefficients, n, lattice } => {
            let lat = lattice.clone().unwrap_or_default();
            let (rows, rep) = spectral_fft_demo(sc.model(model)?, sc.coeffs(coefficients)?, *n, &lat)?;
            tables.push((String::new(), spectral_csv(&rows)?));
            rep
        }
        Check::Transform { functional, points } => {
            let u = sc.functional(functional)?;
            #[derive(Serialize)]
            struct Row {
                x: String,
                y: String,
                re: f64,
                im: f64,
            }
            let vals = points
                .iter()
                .map(|z| laplace_transform_with(u, z, sc.convention))
                .collect::<Result<Vec<C>>>()?;
            let join = |v: &[f64]| v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
            let rows: Vec<Row> =
                points.iter().zip(&vals).map(|(z, v)| Row { x: join(&z.x), y: join(&z.y), re: v.re, im: v.im }).collect();
            tables.push((String::new(), csv_table(&rows)?));
            info("transform", points.len())
                .constant("max_abs", vals.iter().map(|v| v.norm()).fold(0.0, f64::max))
                .detail("values", vals.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>())
        }
        Check::Bound23 { functional, alpha, beta, v_prime, eps, samples, seed } => {
            let u = sc.functional(functional)?;
            let conv = sc.convention;
            bound23_check(
                |z| laplace_transform_with(u, z, conv).unwrap_or(C::new(f64::NAN, f64::NAN)),
                sc.profile(alpha)?,
                sc.profile(beta)?,
                sc.cone(v_prime)?,
                *eps,
                *samples,
                seed_of(seed),
            )?
            .budget("seed", seed_of(seed))
        }
        Check::Convolution { functional, function, beta, eps, p } => {
            convolution_bound_check(sc.functional(functional)?, sc.function(function)?, sc.profile(beta)?, *eps, p)?
        }
        Check::GammaConjugate { gamma, beta, eps } => theorem9_gamma_check(gamma, sc.profile(beta)?, eps)?,
        Check::BoundaryValues { functional, function, v_prime, y } => {
            let t = laplace::Transform { u: sc.functional(functional)?.clone(), convention: sc.convention };
            boundary_value_convergence(
                |z| crate::space::Entire::eval(&t, &[z]),
                sc.function(function)?,
                sc.cone(v_prime)?,
                y,
            )?
        }
    };
    Ok((report, tables))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(checks: serde_json::Value) -> Scenario {
        let v = serde_json::json!({
            "schema": SCHEMA_VERSION,
            "profiles": {
                "sq": {"kind": "quadratic"},
                "exp": {"kind": "exp-minus-one"},
                "root": {"kind": "power", "params": {"gamma": 0.5}},
                "lin": {"kind": "linear"}
            },
            "checks": checks
        });
        parse_scenario(&v.to_string(), "test").unwrap()
    }

    #[test]
    fn lemma1_scenario_passes() {
        let sc = scenario(serde_json::json!([
            {"check": "saddle", "alpha": "sq"},
            {"check": "lemma1", "alpha": "exp", "id": "exp"}
        ]));
        let dir = tempfile::tempdir().unwrap();
        let b = run(&sc, dir.path(), None).unwrap();
        assert_eq!(b.exit_code(), 0);
        assert_eq!(b.summary.pass, 2);
        assert!(dir.path().join("exp.csv").exists());
        assert!(dir.path().join("metadata.json").exists());
    }

    #[test]
    fn unresolved_reference_is_named() {
        let v = serde_json::json!({"schema": SCHEMA_VERSION, "checks": [{"check": "sandwich", "beta": "nope", "eps": 0.1}]});
        match parse_scenario(&v.to_string(), "t") {
            Err(GsgError::UnresolvedReference { name, .. }) => assert_eq!(name, "nope"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors() {
        assert!(parse_scenario(r#"{"checks": []}"#, "t").is_err());
        assert!(parse_scenario(r#"{"schema": "gsg-scenario/0"}"#, "t").is_err());
        let e = parse_scenario("{\"schema\": \"gsg-scenario/1\",\n \"checks\": [{\"check\": \"bogus\"}]}", "t").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn empty_and_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let b = run(&Scenario::empty(), dir.path(), None).unwrap();
        assert_eq!(b.exit_code(), 0);
        assert!(b.checks.is_empty());
        let sc = scenario(serde_json::json!([{"check": "sandwich", "beta": "root", "eps": 0.1}, {"check": "doubling", "beta": "root"}]));
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        run(&sc, d1.path(), None).unwrap();
        run(&sc, d2.path(), None).unwrap();
        let r1 = fs::read(d1.path().join("report.json")).unwrap();
        let r2 = fs::read(d2.path().join("report.json")).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn failing_check_sets_exit_code() {
        let sc = scenario(serde_json::json!([{"check": "nonquasianalytic", "beta": "lin", "expect_finite": true}]));
        let dir = tempfile::tempdir().unwrap();
        let b = run(&sc, dir.path(), None).unwrap();
        assert_eq!(b.exit_code(), 1);
        assert!(b.checks[0].report.witness.is_some());
    }
}
