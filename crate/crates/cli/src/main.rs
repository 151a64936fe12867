use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use gsg_core::cone::{Cone, Sign};
use gsg_core::laplace::{self, Convention, Density, Functional, Gamma, TubePoint};
use gsg_core::profile::{self, FunctionProfile};
use gsg_core::report::BoundReport;
use gsg_core::scenario::{self, OUTPUT_DIR_ENV};
use gsg_core::search::log_grid;
use gsg_core::sequence::{self, IndicatorFunction, Role};
use gsg_core::space::{self, SpaceSpec, TestFunction};
use gsg_core::wick::{self, CoefficientRule, LatticeSpec, TwoPointModel, WickCoefficients};

const SCHEMA: &str = include_str!("../../../schema/scenario.schema.json");

#[derive(Parser)]
#[command(name = "gsg", version, about = "Indicator-scale calculus, cone geometry and growth-bound checks")]
struct Cli {
    /// Write the table produced by the command to this CSV file instead of printing JSON.
    /// Relative paths are placed under $GSG_OUTPUT_DIR when it is set.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Profiles and their conjugates.
    Profile {
        #[command(subcommand)]
        op: ProfileOp,
    },
    /// Defining sequences and indicator functions.
    Sequence {
        #[command(subcommand)]
        op: SequenceOp,
    },
    /// Cone membership, projection and duals.
    Cone {
        #[command(subcommand)]
        op: ConeOp,
    },
    /// Test-function spaces.
    Space {
        #[command(subcommand)]
        op: SpaceOp,
    },
    /// Wick-power coefficients, pairings and two-point models.
    Wick {
        #[command(subcommand)]
        op: WickOp,
    },
    /// Laplace transforms of cone-carried functionals.
    Laplace {
        #[command(subcommand)]
        op: LaplaceOp,
    },
    /// Run a scenario file and write its report bundle.
    Run {
        scenario: PathBuf,
        /// Output directory (default: scenario `output.dir`, then $GSG_OUTPUT_DIR, then ./gsg-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the JSON schema of scenario files.
    Schema,
}

#[derive(Args, Clone)]
struct ProfileArgs {
    /// power | quadratic | exp-minus-one | linear | entropy | log-growth | strip, or a JSON profile.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    width: Option<f64>,
}

impl ProfileArgs {
    fn build(&self) -> Result<FunctionProfile> {
        if self.kind.trim_start().starts_with('{') {
            return Ok(serde_json::from_str(&self.kind)?);
        }
        let mut params = serde_json::Map::new();
        if let Some(g) = self.gamma {
            params.insert("gamma".into(), json!(g));
        }
        if let Some(w) = self.width {
            params.insert("width".into(), json!(w));
        }
        Ok(serde_json::from_value(json!({ "kind": self.kind, "params": params }))?)
    }
}

/// `kind`, `kind:param` (power, strip) or a JSON profile.
fn parse_profile(s: &str) -> Result<FunctionProfile> {
    if s.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(s)?);
    }
    let (kind, param) = match s.split_once(':') {
        Some((k, p)) => (k, Some(p.parse::<f64>().with_context(|| format!("bad profile parameter in {s:?}"))?)),
        None => (s, None),
    };
    let params = match (kind, param) {
        ("power", Some(g)) => json!({ "gamma": g }),
        ("strip", Some(w)) => json!({ "width": w }),
        (_, None) => json!({}),
        _ => bail!("profile {kind:?} takes no parameter"),
    };
    Ok(serde_json::from_value(json!({ "kind": kind, "params": params }))?)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("{t:?}: {e}"))).collect()
}

#[derive(Subcommand)]
enum ProfileOp {
    /// α_*(r) = sup_s (r s − α(s)).
    Conjugate {
        #[command(flatten)]
        p: ProfileArgs,
        #[arg(long)]
        r: f64,
    },
    /// β^*(t) = inf_s (s t − β(s)).
    Concave {
        #[command(flatten)]
        p: ProfileArgs,
        #[arg(long)]
        t: f64,
    },
    Eval {
        #[command(flatten)]
        p: ProfileArgs,
        #[arg(long)]
        s: f64,
    },
    /// Smallest doubling constant H with 2β(s) ≤ β(Hs).
    Doubling {
        #[command(flatten)]
        p: ProfileArgs,
        #[arg(long, default_value_t = 16.0)]
        h_max: f64,
    },
    /// Classifies ∫ β(s)/s² ds.
    Nqa {
        #[command(flatten)]
        p: ProfileArgs,
    },
    /// (α_*)_* = α and 2α_*(s) ≤ α_*(2s) on a log grid.
    Involution {
        #[command(flatten)]
        p: ProfileArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    A,
    B,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::A => Role::AFromAlpha,
            RoleArg::B => Role::BFromBeta,
        }
    }
}

#[derive(Subcommand)]
enum SequenceOp {
    /// ln a_k (role a, from α) or ln b_l (role b, from β); CSV columns `k,ln_a`.
    Defining {
        #[command(flatten)]
        p: ProfileArgs,
        #[arg(long, value_enum)]
        role: RoleArg,
        #[arg(long, default_value_t = 40)]
        k_max: usize,
    },
    /// Indicator ln b(s) = max_l (l ln s − ln b_l); CSV columns `s,ln_b`.
    Indicator {
        #[command(flatten)]
        p: ProfileArgs,
        #[arg(long, value_enum)]
        role: RoleArg,
        #[arg(long, default_value_t = 40)]
        k_max: usize,
        #[arg(long, default_value_t = 1e-2)]
        s_min: f64,
        #[arg(long, default_value_t = 1e4)]
        s_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Both sides of the saddle identity at order k.
    Saddle {
        #[command(flatten)]
        p: ProfileArgs,
        #[arg(long)]
        k: usize,
    },
    /// Sandwich of the indicator of β between exponentials of β.
    Sandwich {
        #[command(flatten)]
        p: ProfileArgs,
        #[arg(long)]
        eps: f64,
    },
    /// Fits a_{k+l} ≤ C H^{k+l} a_k a_l.
    Regularity {
        #[command(flatten)]
        p: ProfileArgs,
        #[arg(long, value_enum)]
        role: RoleArg,
        #[arg(long, default_value_t = 40)]
        k_max: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    LorentzForward,
    LorentzBackward,
    Spectral,
    SpectralDual,
    Ray,
    HalfSpace,
    Round,
    Polyhedral,
    FullSpace,
    Origin,
}

#[derive(Args)]
struct ConeArgs {
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    /// A JSON cone, instead of --variant.
    #[arg(long)]
    json: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value = "minus")]
    sign: String,
    /// Direction, normal or axis (comma separated).
    #[arg(long)]
    vector: Option<String>,
    #[arg(long)]
    half_angle: Option<f64>,
    /// Generators separated by `;`, coordinates by `,`.
    #[arg(long)]
    generators: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
}

impl ConeArgs {
    fn build(&self) -> Result<Cone> {
        if let Some(j) = &self.json {
            return Ok(serde_json::from_str(j)?);
        }
        let need = |v: Option<usize>, name: &str| v.ok_or_else(|| anyhow!("--{name} is required for this variant"));
        let vector = || -> Result<Vec<f64>> { parse_list(self.vector.as_deref().ok_or_else(|| anyhow!("--vector is required"))?) };
        let sign = match self.sign.as_str() {
            "minus" => Sign::Minus,
            "plus" => Sign::Plus,
            other => bail!("--sign must be minus or plus, got {other:?}"),
        };
        let cone = match self.variant.ok_or_else(|| anyhow!("give --variant or --json"))? {
            Variant::LorentzForward => Cone::LorentzForward { d: need(self.d, "d")? },
            Variant::LorentzBackward => Cone::LorentzBackward { d: need(self.d, "d")? },
            Variant::Spectral => Cone::Spectral { n: need(self.n, "n")?, d: need(self.d, "d")?, sign },
            Variant::SpectralDual => Cone::SpectralDual { n: need(self.n, "n")?, d: need(self.d, "d")?, sign },
            Variant::Ray => Cone::Ray { direction: vector()? },
            Variant::HalfSpace => Cone::HalfSpace { normal: vector()? },
            Variant::Round => Cone::Round {
                axis: vector()?,
                half_angle: self.half_angle.ok_or_else(|| anyhow!("--half-angle is required"))?,
            },
            Variant::Polyhedral => Cone::Polyhedral {
                generators: self
                    .generators
                    .as_deref()
                    .ok_or_else(|| anyhow!("--generators is required"))?
                    .split(';')
                    .map(parse_list)
                    .collect::<Result<_>>()?,
            },
            Variant::FullSpace => Cone::FullSpace { dim: need(self.dim, "dim")? },
            Variant::Origin => Cone::Origin { dim: need(self.dim, "dim")? },
        };
        cone.validate()?;
        Ok(cone)
    }
}

#[derive(Subcommand)]
enum ConeOp {
    Contains {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    Project {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Euclidean distance δ_U(p).
    Distance {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    Margin {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    Dual {
        #[command(flatten)]
        cone: ConeArgs,
    },
    /// Sampled angular separation θ of two JSON cones.
    Separation {
        #[arg(long)]
        k1: String,
        #[arg(long)]
        k2: String,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Whether the JSON cone `sub` is a compact subcone of `outer`.
    Subcone {
        #[arg(long)]
        sub: String,
        #[arg(long)]
        outer: String,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn json_cone(text: &str) -> Result<Cone> {
    let cone: Cone = serde_json::from_str(text)?;
    cone.validate()?;
    Ok(cone)
}

#[derive(Args)]
struct SpaceArgs {
    /// JSON test function, e.g. '{"kind":"gaussian","dim":1,"c":1}'.
    #[arg(long)]
    function: String,
    /// Profile α as `kind`, `kind:param` or JSON.
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    beta: String,
}

impl SpaceArgs {
    fn build(&self) -> Result<(TestFunction, SpaceSpec)> {
        let g: TestFunction = serde_json::from_str(&self.function)?;
        g.validate()?;
        let dim = space::Entire::dim(&g);
        Ok((g, SpaceSpec::full(parse_profile(&self.alpha)?, parse_profile(&self.beta)?, dim)))
    }
}

#[derive(Subcommand)]
enum SpaceOp {
    /// Fits (A, B, C) for membership in the space over the full cone.
    Membership {
        #[command(flatten)]
        s: SpaceArgs,
    },
    /// Norm at fixed (A, B).
    Norm {
        #[command(flatten)]
        s: SpaceArgs,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
    /// Entire-side membership against the derivative-side bounds.
    Crosscheck {
        #[command(flatten)]
        s: SpaceArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CoeffKind {
    InverseFactorial,
    GeometricDamped,
    Table,
}

#[derive(Args)]
struct CoeffArgs {
    #[arg(long, value_enum, default_value = "inverse-factorial")]
    kind: CoeffKind,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
    /// Table values d_0, d_1, ... (comma separated).
    #[arg(long)]
    values: Option<String>,
    #[arg(long, default_value_t = 200)]
    k_max: usize,
}

impl CoeffArgs {
    fn build(&self) -> Result<WickCoefficients> {
        let rule = match self.kind {
            CoeffKind::InverseFactorial => CoefficientRule::InverseFactorialPower { sigma: self.sigma },
            CoeffKind::GeometricDamped => CoefficientRule::GeometricDamped { ratio: self.ratio, sigma: self.sigma },
            CoeffKind::Table => CoefficientRule::Table {
                values: parse_list(self.values.as_deref().ok_or_else(|| anyhow!("--values is required"))?)?,
            },
        };
        Ok(WickCoefficients::new(rule, self.k_max)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    MockMassless,
    Rational,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "mock-massless")]
    model: ModelArg,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1)]
    m: u32,
}

impl ModelArgs {
    fn build(&self) -> TwoPointModel {
        match self.model {
            ModelArg::MockMassless => TwoPointModel::mock_massless_2d(),
            ModelArg::Rational => TwoPointModel::rational(self.c, self.m),
        }
    }
}

#[derive(Subcommand)]
enum WickOp {
    /// Coefficient conditions: pair constants (C, H) and the trend of d_k k!^{1/2} ratios.
    Coeffs {
        #[command(flatten)]
        c: CoeffArgs,
    },
    /// Σ over contraction matrices with row sums k, all pair values equal to w.
    Pairing {
        #[arg(long)]
        k: String,
        #[arg(long, allow_hyphen_values = true)]
        w_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        w_im: f64,
    },
    /// Two-point series Σ d_k² k! w^k.
    Series {
        #[command(flatten)]
        c: CoeffArgs,
        #[arg(long, allow_hyphen_values = true)]
        w_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        w_im: f64,
        #[arg(long, default_value_t = 30)]
        n_max: u32,
    },
    /// Majorant fit of the two-point model on a tube cone.
    Majorant {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.5)]
        half_angle: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Indicator bounds for every (L, ε).
    Indicators {
        #[command(flatten)]
        c: CoeffArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "quadratic")]
        alpha: String,
        #[arg(long, default_value = "power:0.5")]
        beta: String,
        #[arg(long, default_value = "1,10")]
        l: String,
        #[arg(long, default_value = "0.5,0.1")]
        eps: String,
    },
    /// Spectral mass outside the cone across lattice sizes; CSV columns `size,box_length,outside_fraction`.
    Spectral {
        #[command(flatten)]
        c: CoeffArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value = "256,512,1024")]
        sizes: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionalArg {
    Delta,
    DeltaPrime,
    /// e^{-p} on the half-line.
    Exp,
}

#[derive(Args)]
struct FunctionalArgs {
    #[arg(long, value_enum, default_value = "exp")]
    functional: FunctionalArg,
    /// A JSON functional, instead of --functional.
    #[arg(long)]
    functional_json: Option<String>,
    #[arg(long)]
    physics: bool,
}

impl FunctionalArgs {
    fn build(&self) -> Result<Functional> {
        if let Some(j) = &self.functional_json {
            let u: Functional = serde_json::from_str(j)?;
            u.validate()?;
            return Ok(u);
        }
        Ok(match self.functional {
            FunctionalArg::Delta => Functional::delta(1),
            FunctionalArg::DeltaPrime => Functional::derivative(vec![1]),
            FunctionalArg::Exp => Functional::density(Density::Exponential { rate: 1.0 }, Cone::Ray { direction: vec![1.0] }),
        })
    }

    fn convention(&self) -> Convention {
        if self.physics {
            Convention::Physics
        } else {
            Convention::Math
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GammaArg {
    LogInverse,
    InversePower,
    Constant,
}

#[derive(Subcommand)]
enum LaplaceOp {
    /// v(z) at the given tube points; CSV columns `x,y,re,im`.
    Transform {
        #[command(flatten)]
        u: FunctionalArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Fits C in |v(z)| ≤ C exp{α_*(ε|z|) − β^*(|y|/ε)}.
    Bound {
        #[command(flatten)]
        u: FunctionalArgs,
        #[arg(long, default_value = "quadratic")]
        alpha: String,
        #[arg(long, default_value = "power:0.5")]
        beta: String,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Convolution with a Gaussian through the contour identity.
    Convolution {
        #[command(flatten)]
        u: FunctionalArgs,
        #[arg(long, default_value = "power:0.5")]
        beta: String,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Fits (−γ)^*(s) ≤ C' + β(εs).
    Gamma {
        #[arg(long, value_enum)]
        gamma: GammaArg,
        #[arg(long, default_value_t = 1.0)]
        value: f64,
        #[arg(long, default_value = "power:0.5")]
        beta: String,
        #[arg(long, default_value = "1")]
        eps: String,
    },
    /// Exponential norm of e^{i(p+iq)z}.
    ExpNorm {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value = "quadratic")]
        alpha: String,
        #[arg(long, default_value = "power:0.5")]
        beta: String,
    },
}

enum Output {
    Json(Value),
    Report(BoundReport),
    Table { json: Value, csv: String },
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn profile_op(op: &ProfileOp) -> Result<Output> {
    Ok(match op {
        ProfileOp::Conjugate { p, r } => Output::Json(json!(profile::convex_conjugate(&p.build()?, *r)?)),
        ProfileOp::Concave { p, t } => Output::Json(json!(profile::concave_conjugate(&p.build()?, *t)?)),
        ProfileOp::Eval { p, s } => Output::Json(json!(p.build()?.eval(*s))),
        ProfileOp::Doubling { p, h_max } => Output::Json(to_json(&profile::check_doubling(&p.build()?, *h_max))?),
        ProfileOp::Nqa { p } => Output::Json(to_json(&profile::check_nonquasianalytic(&p.build()?))?),
        ProfileOp::Involution { p } => Output::Report(profile::involution_check(&p.build()?, None, 1e-6)?),
    })
}

fn sequence_op(op: &SequenceOp) -> Result<Output> {
    Ok(match op {
        SequenceOp::Defining { p, role, k_max } => {
            let seq = sequence::defining_sequence(&p.build()?, (*role).into(), *k_max)?;
            let vals: Vec<f64> = seq.values().iter().map(|v| v.to_f64()).collect();
            Output::Table { json: json!({ "ln": vals, "source": seq.source() }), csv: seq.to_csv() }
        }
        SequenceOp::Indicator { p, role, k_max, s_min, s_max, points } => {
            let seq = sequence::defining_sequence(&p.build()?, (*role).into(), *k_max)?;
            let ind = IndicatorFunction::new(seq, &log_grid(*s_min, *s_max, *points))?;
            Output::Table { json: to_json(&ind.trace())?, csv: ind.to_csv() }
        }
        SequenceOp::Saddle { p, k } => Output::Json(to_json(&sequence::lemma1_check(&p.build()?, *k)?)?),
        SequenceOp::Sandwich { p, eps } => Output::Report(sequence::lemma3_sandwich(&p.build()?, *eps, None)?),
        SequenceOp::Regularity { p, role, k_max } => {
            let seq = sequence::defining_sequence(&p.build()?, (*role).into(), *k_max)?;
            Output::Json(to_json(&sequence::check_regularity(&seq)?)?)
        }
    })
}

fn cone_op(op: &ConeOp) -> Result<Output> {
    Ok(match op {
        ConeOp::Contains { cone, point } => Output::Json(json!(cone.build()?.contains(&parse_list(point)?)?)),
        ConeOp::Project { cone, point } => Output::Json(json!(cone.build()?.project(&parse_list(point)?)?)),
        ConeOp::Distance { cone, point } => Output::Json(json!(cone.build()?.distance(&parse_list(point)?)?)),
        ConeOp::Margin { cone, point } => Output::Json(json!(cone.build()?.margin(&parse_list(point)?)?)),
        ConeOp::Dual { cone } => Output::Json(to_json(&cone.build()?.dual())?),
        ConeOp::Separation { k1, k2, samples, seed } => {
            Output::Json(to_json(&gsg_core::cone::angular_separation(&json_cone(k1)?, &json_cone(k2)?, *samples, *seed)?)?)
        }
        ConeOp::Subcone { sub, outer, samples, seed } => {
            Output::Json(to_json(&gsg_core::cone::is_compact_subcone(&json_cone(sub)?, &json_cone(outer)?, *samples, *seed)?)?)
        }
    })
}

fn space_op(op: &SpaceOp) -> Result<Output> {
    Ok(match op {
        SpaceOp::Membership { s } => {
            let (g, spec) = s.build()?;
            Output::Report(space::check_membership_entire(&g, &spec)?)
        }
        SpaceOp::Norm { s, a, b } => {
            let (g, spec) = s.build()?;
            Output::Report(space::estimate_norm(&g, &spec, *a, *b)?)
        }
        SpaceOp::Crosscheck { s } => {
            let (g, spec) = s.build()?;
            Output::Report(space::theorem1_crosscheck(&g, &spec)?)
        }
    })
}

fn wick_op(op: &WickOp) -> Result<Output> {
    Ok(match op {
        WickOp::Coeffs { c } => Output::Report(wick::check_coefficient_conditions(&c.build()?)?),
        WickOp::Pairing { k, w_re, w_im } => {
            let k: Vec<u32> = parse_list(k)?.into_iter().map(|x| x as u32).collect();
            let n = k.len();
            let w = vec![vec![Complex64::new(*w_re, *w_im); n]; n];
            let s = wick::wick_pairing_sum(&k, &w)?;
            Output::Json(json!({ "re": s.value.re, "im": s.value.im, "contractions": s.contractions }))
        }
        WickOp::Series { c, w_re, w_im, n_max } => {
            let w = Complex64::new(*w_re, *w_im);
            let pair = vec![vec![Complex64::new(0.0, 0.0), w], vec![w, Complex64::new(0.0, 0.0)]];
            let s = wick::series_sum(&c.build()?, &pair, *n_max)?;
            Output::Json(json!({
                "re": s.value.re, "im": s.value.im, "tail_bound": s.tail_bound, "terms": s.terms, "warnings": s.warnings
            }))
        }
        WickOp::Majorant { model, half_angle, samples, seed } => {
            let cone = wick::tube_cone(1, *half_angle)?;
            Output::Report(wick::majorant_bound_check(&model.build(), &cone, *samples, *seed)?)
        }
        WickOp::Indicators { c, model, alpha, beta, l, eps } => Output::Report(wick::theorem10_indicator_check(
            &c.build()?,
            &model.build(),
            &parse_profile(alpha)?,
            &parse_profile(beta)?,
            &parse_list(l)?,
            &parse_list(eps)?,
        )?),
        WickOp::Spectral { c, model, n, sizes } => {
            let lattice =
                LatticeSpec { sizes: parse_list(sizes)?.into_iter().map(|x| x as usize).collect(), ..LatticeSpec::default() };
            let (rows, report) = wick::spectral_fft_demo(&model.build(), &c.build()?, *n, &lattice)?;
            Output::Table { json: json!({ "rows": rows, "report": report }), csv: wick::spectral_csv(&rows)? }
        }
    })
}

fn laplace_op(op: &LaplaceOp) -> Result<Output> {
    Ok(match op {
        LaplaceOp::Transform { u, x, y } => {
            let f = u.build()?;
            let (xs, ys) = (parse_list(x)?, parse_list(y)?);
            if xs.len() != ys.len() {
                bail!("--x and --y need the same number of values");
            }
            let mut rows = Vec::new();
            let mut csv = String::from("x,y,re,im\n");
            for (&a, &b) in xs.iter().zip(&ys) {
                let v = laplace::laplace_transform_with(&f, &TubePoint::scalar(a, b), u.convention())?;
                csv.push_str(&format!("{a:e},{b:e},{:e},{:e}\n", v.re, v.im));
                rows.push(json!({ "x": a, "y": b, "re": v.re, "im": v.im }));
            }
            Output::Table { json: Value::Array(rows), csv }
        }
        LaplaceOp::Bound { u, alpha, beta, eps, samples, seed } => {
            let f = u.build()?;
            let conv = u.convention();
            let vp = match conv {
                Convention::Math => f.tube_base(),
                Convention::Physics => negated(&f.carrier)?.dual(),
            };
            Output::Report(laplace::bound23_check(
                |z| laplace::laplace_transform_with(&f, z, conv).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
                &parse_profile(alpha)?,
                &parse_profile(beta)?,
                &vp,
                *eps,
                *samples,
                *seed,
            )?)
        }
        LaplaceOp::Convolution { u, beta, eps, c } => {
            let grid: Vec<f64> = (0..21).map(|i| -5.0 + 0.5 * i as f64).collect();
            Output::Report(laplace::convolution_bound_check(
                &u.build()?,
                &TestFunction::gaussian(1, *c),
                &parse_profile(beta)?,
                *eps,
                &grid,
            )?)
        }
        LaplaceOp::Gamma { gamma, value, beta, eps } => {
            let g = match gamma {
                GammaArg::LogInverse => Gamma::LogInverse,
                GammaArg::InversePower => Gamma::InversePower { exponent: *value },
                GammaArg::Constant => Gamma::Constant { value: *value },
            };
            Output::Report(laplace::theorem9_gamma_check(&g, &parse_profile(beta)?, &parse_list(eps)?)?)
        }
        LaplaceOp::ExpNorm { x, y, a, b, alpha, beta } => Output::Json(to_json(&laplace::exp_norm(
            &Cone::Ray { direction: vec![1.0] },
            *a,
            *b,
            &TubePoint::scalar(*x, *y),
            &parse_profile(alpha)?,
            &parse_profile(beta)?,
        )?)?),
    })
}

/// The carrier reflected through the origin, for one-dimensional cones.
fn negated(k: &Cone) -> Result<Cone> {
    Ok(match k {
        Cone::Ray { direction } => Cone::Ray { direction: direction.iter().map(|t| -t).collect() },
        Cone::Origin { .. } | Cone::FullSpace { .. } => k.clone(),
        other => bail!("physics convention bound needs a ray, origin or full carrier, got {other:?}"),
    })
}

fn csv_target(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            return PathBuf::from(dir).join(path);
        }
    }
    path.to_path_buf()
}

fn emit(out: Output, csv: Option<&Path>) -> Result<i32> {
    let (json, table, failed) = match out {
        Output::Json(v) => (v, None, false),
        Output::Report(r) => (to_json(&r)?, None, r.failed()),
        Output::Table { json, csv } => {
            let failed = json.get("report").and_then(|r| r.get("status")).and_then(|s| s.as_str()) == Some("fail");
            (json, Some(csv), failed)
        }
    };
    match (csv, table) {
        (Some(path), Some(body)) => {
            let target = csv_target(path);
            if let Some(parent) = target.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&target, body).with_context(|| format!("writing {}", target.display()))?;
        }
        (Some(_), None) => bail!("this command produces no table for --csv"),
        (None, _) => println!("{}", serde_json::to_string_pretty(&json)?),
    }
    Ok(i32::from(failed))
}

fn run(cli: Cli) -> Result<i32> {
    let csv = cli.csv.as_deref();
    let out = match &cli.command {
        Command::Profile { op } => profile_op(op)?,
        Command::Sequence { op } => sequence_op(op)?,
        Command::Cone { op } => cone_op(op)?,
        Command::Space { op } => space_op(op)?,
        Command::Wick { op } => wick_op(op)?,
        Command::Laplace { op } => laplace_op(op)?,
        Command::Run { scenario: path, out } => {
            let outcome = scenario::run_scenario(path, out.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&outcome.bundle)?);
            eprintln!("report bundle written to {}", outcome.out_dir.display());
            return Ok(outcome.exit_code());
        }
        Command::Schema => {
            print!("{SCHEMA}");
            return Ok(0);
        }
    };
    emit(out, csv)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
