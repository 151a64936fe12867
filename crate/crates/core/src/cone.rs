//! Closed convex cones in `R^N`: membership, Euclidean projection and
//! distance, duals, the spectral cone of trailing partial sums, angular
//! separation and compact-subcone tests.
//!
//! Distances and dual pairings are Euclidean throughout.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GsgError, Result};
use crate::lowdisc::{dot, norm, sphere_points};
use crate::par;

pub const NORM_CONVENTION: &str = "euclidean";
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const MARGIN_THRESHOLD: f64 = 1e-9;
const MEMBER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// Trailing sums in the closed backward light cone.
    Minus,
    /// Trailing sums in the closed forward light cone.
    Plus,
}

/// Vectors are Minkowski vectors `(p_0, p_1, ..., p_{d-1})`; the forward
/// cone is `p_0 ≥ |(p_1, ..., p_{d-1})|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Cone {
    LorentzForward { d: usize },
    LorentzBackward { d: usize },
    /// `{p : angle(p, axis) ≤ half_angle}`, `0 < half_angle < π/2`.
    Round { axis: Vec<f64>, half_angle: f64 },
    /// Conic hull of the generators.
    Polyhedral { generators: Vec<Vec<f64>> },
    /// `{p : n_i · p ≥ 0 for all i}`.
    PolyhedralNormals { normals: Vec<Vec<f64>> },
    /// `{p : n · p ≥ 0}`.
    HalfSpace { normal: Vec<f64> },
    Ray { direction: Vec<f64> },
    Product { factors: Vec<Cone> },
    /// `n` blocks of length `d`; every trailing sum `p_m + ... + p_n` lies in
    /// the closed backward (`minus`) or forward (`plus`) light cone.
    Spectral { n: usize, d: usize, sign: Sign },
    /// Dual of the spectral cone: `y_1` and every `y_m − y_{m−1}` in the light cone.
    SpectralDual { n: usize, d: usize, sign: Sign },
    DualOf { inner: Box<Cone> },
    Origin { dim: usize },
    FullSpace { dim: usize },
}

/// A linear map `p ↦ Σ c_j p_{block j}` from `R^{n d}` to `R^d`.
#[derive(Debug, Clone)]
struct BlockMap {
    terms: Vec<(usize, f64)>,
}

impl BlockMap {
    fn apply(&self, p: &[f64], d: usize) -> Vec<f64> {
        let mut out = vec![0.0; d];
        for &(j, c) in &self.terms {
            for i in 0..d {
                out[i] += c * p[j * d + i];
            }
        }
        out
    }

    fn gram(&self) -> f64 {
        self.terms.iter().map(|t| t.1 * t.1).sum()
    }

    fn add_adjoint(&self, v: &[f64], scale: f64, out: &mut [f64], d: usize) {
        for &(j, c) in &self.terms {
            for i in 0..d {
                out[j * d + i] += scale * c * v[i];
            }
        }
    }
}

fn spectral_maps(n: usize, dual: bool) -> Vec<BlockMap> {
    (0..n)
        .map(|m| {
            if dual {
                if m == 0 {
                    BlockMap { terms: vec![(0, 1.0)] }
                } else {
                    BlockMap { terms: vec![(m, 1.0), (m - 1, -1.0)] }
                }
            } else {
                BlockMap { terms: (m..n).map(|j| (j, 1.0)).collect() }
            }
        })
        .collect()
}

fn lorentz_contains(p: &[f64]) -> bool {
    let x = norm(&p[1..]);
    p[0] >= x - MEMBER_TOL * (p[0].abs() + x)
}

fn lorentz_project(p: &[f64]) -> Vec<f64> {
    let t = p[0];
    let x = norm(&p[1..]);
    if x <= t {
        return p.to_vec();
    }
    if x <= -t {
        return vec![0.0; p.len()];
    }
    let a = 0.5 * (t + x);
    let mut out = vec![a; 1];
    out.extend(p[1..].iter().map(|xi| a * xi / x));
    out
}

/// Signed distance from `p` to the boundary of the forward cone (negative outside).
fn lorentz_margin(p: &[f64]) -> f64 {
    let x = norm(&p[1..]);
    if p.len() == 1 {
        return p[0];
    }
    (p[0] - x) / std::f64::consts::SQRT_2
}

fn neg(p: &[f64]) -> Vec<f64> {
    p.iter().map(|x| -x).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

/// Non-negative least squares `min |G λ − p|`, `λ ≥ 0` (Lawson–Hanson);
/// returns `G λ`.
pub fn nnls_project(generators: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    let m = generators.len();
    let dim = p.len();
    let combine = |lam: &[f64]| {
        let mut out = vec![0.0; dim];
        for (g, l) in generators.iter().zip(lam) {
            for i in 0..dim {
                out[i] += l * g[i];
            }
        }
        out
    };
    let solve_on = |set: &[usize]| -> Vec<f64> {
        let k = set.len();
        let gmat = DMatrix::from_fn(dim, k, |i, j| generators[set[j]][i]);
        let pv = DVector::from_column_slice(p);
        let mut ata = gmat.transpose() * &gmat;
        let atb = gmat.transpose() * pv;
        let sol = ata.clone().lu().solve(&atb).unwrap_or_else(|| {
            let ridge = 1e-14 * ata.trace().max(1e-300);
            for i in 0..k {
                ata[(i, i)] += ridge;
            }
            ata.lu().solve(&atb).unwrap_or_else(|| DVector::zeros(k))
        });
        sol.iter().copied().collect()
    };
    let scale = norm(p).max(generators.iter().map(|g| norm(g)).fold(0.0, f64::max)).max(1e-300);
    let tol = 1e-13 * scale * scale;
    let mut lam = vec![0.0; m];
    let mut passive = vec![false; m];
    for _ in 0..(3 * m + 10) {
        let r = sub(p, &combine(&lam));
        let w: Vec<f64> = generators.iter().map(|g| dot(g, &r)).collect();
        let cand = (0..m).filter(|&j| !passive[j] && w[j] > tol).max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = cand else { break };
        passive[j] = true;
        loop {
            let set: Vec<usize> = (0..m).filter(|&i| passive[i]).collect();
            let z = solve_on(&set);
            if z.iter().all(|&v| v > 0.0) {
                for l in lam.iter_mut() {
                    *l = 0.0;
                }
                for (&i, &v) in set.iter().zip(&z) {
                    lam[i] = v;
                }
                break;
            }
            let mut alpha = 1.0f64;
            for (&i, &v) in set.iter().zip(&z) {
                if v <= 0.0 {
                    let den = lam[i] - v;
                    if den > 0.0 {
                        alpha = alpha.min(lam[i] / den);
                    }
                }
            }
            for (&i, &v) in set.iter().zip(&z) {
                lam[i] += alpha * (v - lam[i]);
                if lam[i] <= 1e-15 * scale {
                    lam[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&b| b) {
                break;
            }
        }
    }
    combine(&lam)
}

/// Dykstra's alternating projections onto `{p : A_m p ∈ C}`.
fn dykstra(p: &[f64], d: usize, maps: &[BlockMap], project_c: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let k = maps.len();
    let mut x = p.to_vec();
    let mut incr = vec![vec![0.0; p.len()]; k];
    let scale = norm(p).max(1e-300);
    for _ in 0..20_000 {
        let before = x.clone();
        for (m, map) in maps.iter().enumerate() {
            let y: Vec<f64> = x.iter().zip(&incr[m]).map(|(a, b)| a + b).collect();
            let ay = map.apply(&y, d);
            let pc = project_c(&ay);
            let resid = sub(&ay, &pc);
            let mut z = y.clone();
            map.add_adjoint(&resid, -1.0 / map.gram(), &mut z, d);
            incr[m] = sub(&y, &z);
            x = z;
        }
        if norm(&sub(&x, &before)) <= 1e-15 * scale {
            break;
        }
    }
    x
}

fn round_parts(axis: &[f64], p: &[f64]) -> (f64, Vec<f64>) {
    let a = unit(axis);
    let t = dot(&a, p);
    let x: Vec<f64> = p.iter().zip(&a).map(|(pi, ai)| pi - t * ai).collect();
    (t, x)
}

impl Cone {
    pub fn dim(&self) -> usize {
        match self {
            Self::LorentzForward { d } | Self::LorentzBackward { d } => *d,
            Self::Round { axis, .. } => axis.len(),
            Self::Polyhedral { generators } => generators.first().map_or(0, Vec::len),
            Self::PolyhedralNormals { normals } => normals.first().map_or(0, Vec::len),
            Self::HalfSpace { normal } => normal.len(),
            Self::Ray { direction } => direction.len(),
            Self::Product { factors } => factors.iter().map(Cone::dim).sum(),
            Self::Spectral { n, d, .. } | Self::SpectralDual { n, d, .. } => n * d,
            Self::DualOf { inner } => inner.dim(),
            Self::Origin { dim } | Self::FullSpace { dim } => *dim,
        }
    }

    /// Structural checks on the parameters.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(GsgError::Domain(m.to_owned()));
        let same_dim = |vs: &[Vec<f64>]| vs.iter().all(|v| v.len() == vs[0].len());
        match self {
            Self::LorentzForward { d } | Self::LorentzBackward { d } if *d == 0 => bad("light cone needs d >= 1"),
            Self::Round { axis, half_angle } => {
                if axis.is_empty() || norm(axis) == 0.0 {
                    bad("round cone needs a nonzero axis")
                } else if !(*half_angle > 0.0 && *half_angle < std::f64::consts::FRAC_PI_2) {
                    bad("round cone half-angle must lie in (0, pi/2)")
                } else {
                    Ok(())
                }
            }
            Self::Polyhedral { generators: vs } | Self::PolyhedralNormals { normals: vs } => {
                if vs.is_empty() || vs[0].is_empty() || !same_dim(vs) {
                    bad("polyhedral cone needs equal-length nonempty vectors")
                } else if vs.iter().any(|v| norm(v) == 0.0) {
                    bad("polyhedral cone vectors must be nonzero")
                } else {
                    Ok(())
                }
            }
            Self::HalfSpace { normal: v } | Self::Ray { direction: v } if v.is_empty() || norm(v) == 0.0 => {
                bad("direction must be nonzero")
            }
            Self::Product { factors } => {
                if factors.is_empty() {
                    return bad("product needs at least one factor");
                }
                factors.iter().try_for_each(Cone::validate)
            }
            Self::Spectral { n, d, .. } | Self::SpectralDual { n, d, .. } if *n == 0 || *d == 0 => {
                bad("spectral cone needs n, d >= 1")
            }
            Self::DualOf { inner } => inner.validate(),
            _ => Ok(()),
        }
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(GsgError::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        Ok(())
    }

    /// The dual cone `{y : y·p ≥ 0 for all p ∈ K}` as an explicit cone.
    pub fn dual(&self) -> Cone {
        match self {
            Self::LorentzForward { d } => Self::LorentzForward { d: *d },
            Self::LorentzBackward { d } => Self::LorentzBackward { d: *d },
            Self::Round { axis, half_angle } => {
                Self::Round { axis: axis.clone(), half_angle: std::f64::consts::FRAC_PI_2 - half_angle }
            }
            Self::Polyhedral { generators } => Self::PolyhedralNormals { normals: generators.clone() },
            Self::PolyhedralNormals { normals } => Self::Polyhedral { generators: normals.clone() },
            Self::HalfSpace { normal } => Self::Ray { direction: normal.clone() },
            Self::Ray { direction } => Self::HalfSpace { normal: direction.clone() },
            Self::Product { factors } => Self::Product { factors: factors.iter().map(Cone::dual).collect() },
            Self::Spectral { n, d, sign } => Self::SpectralDual { n: *n, d: *d, sign: *sign },
            Self::SpectralDual { n, d, sign } => Self::Spectral { n: *n, d: *d, sign: *sign },
            Self::DualOf { inner } => (**inner).clone(),
            Self::Origin { dim } => Self::FullSpace { dim: *dim },
            Self::FullSpace { dim } => Self::Origin { dim: *dim },
        }
    }

    pub fn contains(&self, p: &[f64]) -> Result<bool> {
        self.check_dim(p)?;
        Ok(self.contains_unchecked(p))
    }

    fn contains_unchecked(&self, p: &[f64]) -> bool {
        let scale = norm(p);
        match self {
            Self::LorentzForward { .. } => lorentz_contains(p),
            Self::LorentzBackward { .. } => lorentz_contains(&neg(p)),
            Self::Round { axis, half_angle } => {
                let (t, x) = round_parts(axis, p);
                norm(&x) <= t * half_angle.tan() + MEMBER_TOL * scale
            }
            Self::Polyhedral { generators } => {
                norm(&sub(p, &nnls_project(generators, p))) <= 1e-10 * scale
            }
            Self::PolyhedralNormals { normals } => {
                normals.iter().all(|n| dot(n, p) >= -MEMBER_TOL * scale * norm(n))
            }
            Self::HalfSpace { normal } => dot(normal, p) >= -MEMBER_TOL * scale * norm(normal),
            Self::Ray { direction } => {
                let u = unit(direction);
                let t = dot(&u, p);
                t >= -MEMBER_TOL * scale && norm(&p.iter().zip(&u).map(|(a, b)| a - t * b).collect::<Vec<_>>()) <= 1e-10 * scale
            }
            Self::Product { factors } => {
                let mut off = 0;
                factors.iter().all(|f| {
                    let k = f.dim();
                    let ok = f.contains_unchecked(&p[off..off + k]);
                    off += k;
                    ok
                })
            }
            Self::Spectral { n, d, sign } | Self::SpectralDual { n, d, sign } => {
                let dual = matches!(self, Self::SpectralDual { .. });
                spectral_maps(*n, dual).iter().all(|m| {
                    let q = m.apply(p, *d);
                    match sign {
                        Sign::Minus => lorentz_contains(&neg(&q)),
                        Sign::Plus => lorentz_contains(&q),
                    }
                })
            }
            Self::DualOf { inner } => inner.dual().contains_unchecked(p),
            Self::Origin { .. } => scale == 0.0,
            Self::FullSpace { .. } => true,
        }
    }

    /// Membership of `y` in the dual cone.
    pub fn dual_contains(&self, y: &[f64]) -> Result<bool> {
        self.check_dim(y)?;
        Ok(self.dual().contains_unchecked(y))
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(p)?;
        Ok(self.project_unchecked(p))
    }

    fn project_unchecked(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Self::LorentzForward { .. } => lorentz_project(p),
            Self::LorentzBackward { .. } => neg(&lorentz_project(&neg(p))),
            Self::Round { axis, half_angle } => {
                let a = unit(axis);
                let (t, x) = round_parts(axis, p);
                let r = norm(&x);
                let c = half_angle.tan();
                if r <= c * t {
                    p.to_vec()
                } else if c * r <= -t || r == 0.0 {
                    vec![0.0; p.len()]
                } else {
                    let (sn, cs) = half_angle.sin_cos();
                    let u: Vec<f64> = a.iter().zip(&x).map(|(ai, xi)| cs * ai + sn * xi / r).collect();
                    let s = dot(&u, p);
                    u.iter().map(|ui| s * ui).collect()
                }
            }
            Self::Polyhedral { generators } => nnls_project(generators, p),
            Self::PolyhedralNormals { normals } => {
                let q = nnls_project(normals, &neg(p));
                p.iter().zip(&q).map(|(a, b)| a + b).collect()
            }
            Self::HalfSpace { normal } => {
                let s = dot(normal, p);
                if s >= 0.0 {
                    p.to_vec()
                } else {
                    let nn = dot(normal, normal);
                    p.iter().zip(normal).map(|(pi, ni)| pi - s / nn * ni).collect()
                }
            }
            Self::Ray { direction } => {
                let u = unit(direction);
                let t = dot(&u, p).max(0.0);
                u.iter().map(|x| t * x).collect()
            }
            Self::Product { factors } => {
                let mut out = Vec::with_capacity(p.len());
                let mut off = 0;
                for f in factors {
                    let k = f.dim();
                    out.extend(f.project_unchecked(&p[off..off + k]));
                    off += k;
                }
                out
            }
            Self::Spectral { n, d, sign } | Self::SpectralDual { n, d, sign } => {
                if self.contains_unchecked(p) {
                    return p.to_vec();
                }
                let maps = spectral_maps(*n, matches!(self, Self::SpectralDual { .. }));
                let s = *sign;
                dykstra(p, *d, &maps, |q| match s {
                    Sign::Minus => neg(&lorentz_project(&neg(q))),
                    Sign::Plus => lorentz_project(q),
                })
            }
            Self::DualOf { inner } => inner.dual().project_unchecked(p),
            Self::Origin { .. } => vec![0.0; p.len()],
            Self::FullSpace { .. } => p.to_vec(),
        }
    }

    /// `δ_K(p) = |p − Π_K(p)|`.
    pub fn distance(&self, p: &[f64]) -> Result<f64> {
        let q = self.project(p)?;
        Ok(norm(&sub(p, &q)))
    }

    /// Signed distance from `p` to the complement of the interior: positive
    /// inside the interior, zero on the boundary, negative outside.
    pub fn margin(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p)?;
        Ok(self.margin_unchecked(p))
    }

    fn margin_unchecked(&self, p: &[f64]) -> f64 {
        let outside = |c: &Cone| -> Option<f64> {
            (!c.contains_unchecked(p)).then(|| -norm(&sub(p, &c.project_unchecked(p))))
        };
        match self {
            Self::LorentzForward { .. } => lorentz_margin(p),
            Self::LorentzBackward { .. } => lorentz_margin(&neg(p)),
            Self::Round { axis, half_angle } => {
                if let Some(m) = outside(self) {
                    return m;
                }
                let (t, x) = round_parts(axis, p);
                let phi = norm(&x).atan2(t);
                let gap = half_angle - phi;
                if gap >= std::f64::consts::FRAC_PI_2 {
                    norm(p)
                } else {
                    norm(p) * gap.sin()
                }
            }
            Self::PolyhedralNormals { normals } => {
                normals.iter().map(|n| dot(n, p) / norm(n)).fold(f64::INFINITY, f64::min)
            }
            Self::HalfSpace { normal } => dot(normal, p) / norm(normal),
            Self::Ray { direction } => {
                if direction.len() == 1 {
                    dot(&unit(direction), p)
                } else {
                    outside(self).unwrap_or(0.0)
                }
            }
            Self::Polyhedral { generators } => {
                if let Some(m) = outside(self) {
                    return m;
                }
                // inf over unit dual vectors of y·p, on sampled dual directions
                let dual = Cone::PolyhedralNormals { normals: generators.clone() };
                let dirs = cone_directions(&dual, 2000, 11);
                dirs.iter().map(|y| dot(y, p)).fold(f64::INFINITY, f64::min).max(0.0)
            }
            Self::Product { factors } => {
                let mut off = 0;
                let mut m = f64::INFINITY;
                for f in factors {
                    let k = f.dim();
                    m = m.min(f.margin_unchecked(&p[off..off + k]));
                    off += k;
                }
                m
            }
            Self::Spectral { n, d, sign } | Self::SpectralDual { n, d, sign } => {
                let dual = matches!(self, Self::SpectralDual { .. });
                spectral_maps(*n, dual)
                    .iter()
                    .map(|map| {
                        let q = map.apply(p, *d);
                        let q = if *sign == Sign::Minus { neg(&q) } else { q };
                        lorentz_margin(&q) / map.gram().sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            Self::DualOf { inner } => inner.dual().margin_unchecked(p),
            Self::Origin { .. } => outside(self).unwrap_or(0.0),
            Self::FullSpace { .. } => f64::INFINITY,
        }
    }
}

/// Unit vectors of `K`, obtained by projecting quasi-uniform sphere points
/// onto the cone. Extreme rays of polyhedral cones are always included.
pub fn cone_directions(cone: &Cone, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = cone.dim();
    let mut out: Vec<Vec<f64>> = match cone {
        Cone::Polyhedral { generators } => generators.iter().map(|g| unit(g)).collect(),
        Cone::Ray { direction } => vec![unit(direction)],
        _ => Vec::new(),
    };
    let pts = sphere_points(dim, count, seed);
    let proj = par::map(&pts, |u| cone.project_unchecked(u));
    for q in proj {
        let n = norm(&q);
        if n > 1e-9 {
            out.push(q.iter().map(|x| x / n).collect());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Separation {
    /// Sampled lower bound: `|p − η| ≥ θ|p|` and `|p − η| ≥ θ|η|` for `p ∈ K1`, `η ∈ K2`.
    pub theta: f64,
    pub samples: usize,
    pub worst_direction: Vec<f64>,
    pub norm: &'static str,
}

/// Angular separation of two cones. For a unit `u ∈ K1`,
/// `inf_{η∈K2} |u − η| = δ_{K2}(u)`, so `θ` is the smallest distance from a
/// unit vector of either cone to the other cone.
pub fn angular_separation(k1: &Cone, k2: &Cone, samples: usize, seed: u64) -> Result<Separation> {
    if k1.dim() != k2.dim() {
        return Err(GsgError::DimensionMismatch { expected: k1.dim(), got: k2.dim() });
    }
    let mut dirs: Vec<(Vec<f64>, bool)> = cone_directions(k1, samples, seed).into_iter().map(|u| (u, true)).collect();
    dirs.extend(cone_directions(k2, samples, seed.wrapping_add(1)).into_iter().map(|u| (u, false)));
    if dirs.is_empty() {
        return Err(GsgError::Domain("angular separation needs nonzero cones".into()));
    }
    let dists = par::map(&dirs, |(u, first)| {
        let other = if *first { k2 } else { k1 };
        norm(&sub(u, &other.project_unchecked(u)))
    });
    let (i, _) = dists
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    Ok(Separation {
        theta: dists[i].min(1.0),
        samples: dirs.len(),
        worst_direction: dirs[i].0.clone(),
        norm: NORM_CONVENTION,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubconeCheck {
    pub compact: bool,
    pub min_margin: f64,
    pub samples: usize,
    pub witness: Option<Vec<f64>>,
    pub norm: &'static str,
}

/// Whether every unit direction of `sub` lies in the interior of `outer`,
/// with margin above [`MARGIN_THRESHOLD`].
pub fn is_compact_subcone(sub: &Cone, outer: &Cone, samples: usize, seed: u64) -> Result<SubconeCheck> {
    if sub.dim() != outer.dim() {
        return Err(GsgError::DimensionMismatch { expected: outer.dim(), got: sub.dim() });
    }
    let dirs = cone_directions(sub, samples, seed);
    let margins = par::map(&dirs, |u| outer.margin_unchecked(u));
    let (i, m) = margins
        .iter()
        .enumerate()
        .fold((usize::MAX, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let compact = !dirs.is_empty() && m > MARGIN_THRESHOLD;
    Ok(SubconeCheck {
        compact,
        min_margin: m,
        samples: dirs.len(),
        witness: (!compact && i != usize::MAX).then(|| dirs[i].clone()),
        norm: NORM_CONVENTION,
    })
}

/// A cone is acute when its dual has interior points. Returns such a point
/// with its margin, if one is found among sampled dual directions.
pub fn acute_witness(cone: &Cone, samples: usize, seed: u64) -> Option<(Vec<f64>, f64)> {
    let dual = cone.dual();
    let dirs = cone_directions(&dual, samples, seed);
    let margins = par::map(&dirs, |y| dual.margin_unchecked(y));
    let (i, m) = par::argmax(&margins)?;
    (m > MARGIN_THRESHOLD).then(|| (dirs[i].clone(), m))
}

pub fn is_acute(cone: &Cone, samples: usize, seed: u64) -> bool {
    acute_witness(cone, samples, seed).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    const F2: Cone = Cone::LorentzForward { d: 2 };

    #[test]
    fn membership_examples() {
        assert!(F2.contains(&[1.0, 0.0]).unwrap());
        assert!(F2.contains(&[1.0, 1.0]).unwrap());
        assert!(!F2.contains(&[0.0, 1.0]).unwrap());
        let k = Cone::Spectral { n: 2, d: 2, sign: Sign::Minus };
        assert!(k.contains(&[-2.0, 0.0, -1.0, 0.5]).unwrap());
        assert!(!k.contains(&[2.0, 0.0, -1.0, 0.5]).unwrap());
        assert!(matches!(F2.contains(&[1.0]), Err(GsgError::DimensionMismatch { .. })));
    }

    #[test]
    fn distance_examples() {
        let half_line = Cone::Ray { direction: vec![1.0] };
        assert_eq!(half_line.distance(&[-3.0]).unwrap(), 3.0);
        assert_eq!(F2.distance(&[-1.0, 0.0]).unwrap(), 1.0);
        assert!((F2.distance(&[0.0, 1.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn duals() {
        assert!(F2.dual_contains(&[1.0, 0.5]).unwrap());
        assert!(Cone::Origin { dim: 3 }.dual_contains(&[-1.0, 5.0, 2.0]).unwrap());
        let quadrant = Cone::Polyhedral { generators: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        assert!(quadrant.dual_contains(&[0.5, 2.0]).unwrap());
        assert!(!quadrant.dual_contains(&[-0.5, 2.0]).unwrap());
    }

    #[test]
    fn nnls_projection() {
        let quadrant = Cone::Polyhedral { generators: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        assert_eq!(quadrant.project(&[-1.0, 2.0]).unwrap(), vec![0.0, 2.0]);
        let wedge = Cone::Polyhedral { generators: vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![2.0, 0.0]] };
        let q = wedge.project(&[0.0, 2.0]).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-12 && (q[1] - 1.0).abs() < 1e-12);
        let halfplane = Cone::PolyhedralNormals { normals: vec![vec![1.0, 0.0]] };
        assert_eq!(halfplane.project(&[-2.0, 3.0]).unwrap(), vec![0.0, 3.0]);
    }

    #[test]
    fn spectral_projection_lands_in_cone() {
        let k = Cone::Spectral { n: 3, d: 2, sign: Sign::Minus };
        let p = [1.0, 0.3, -0.2, 0.8, 0.5, -1.0];
        let q = k.project(&p).unwrap();
        assert!(k.contains(&q).unwrap() || k.margin(&q).unwrap() > -1e-9);
        // optimality: p - q lies in the polar cone and is orthogonal to q
        let r = sub(&p, &q);
        assert!(dot(&r, &q).abs() < 1e-8);
        assert!(k.dual_contains(&neg(&r)).unwrap() || k.dual().margin(&neg(&r)).unwrap() > -1e-7);
    }

    #[test]
    fn separation_examples() {
        let e1 = Cone::Ray { direction: vec![1.0, 0.0] };
        let m1 = Cone::Ray { direction: vec![-1.0, 0.0] };
        let e2 = Cone::Ray { direction: vec![0.0, 1.0] };
        assert_eq!(angular_separation(&e1, &m1, 100, 1).unwrap().theta, 1.0);
        assert_eq!(angular_separation(&e1, &e2, 100, 1).unwrap().theta, 1.0);
        assert_eq!(angular_separation(&F2, &F2, 100, 1).unwrap().theta, 0.0);
    }

    #[test]
    fn subcone_examples() {
        let right = Cone::HalfSpace { normal: vec![1.0, 0.0] };
        let e1 = Cone::Ray { direction: vec![1.0, 0.0] };
        assert!(is_compact_subcone(&e1, &right, 200, 1).unwrap().compact);
        let f3 = Cone::LorentzForward { d: 3 };
        assert!(!is_compact_subcone(&f3, &f3, 2000, 1).unwrap().compact);
        let narrow = Cone::Round { axis: vec![1.0, 0.0, 0.0], half_angle: 0.9 * std::f64::consts::FRAC_PI_4 };
        let r = is_compact_subcone(&narrow, &f3, 2000, 1).unwrap();
        assert!(r.compact, "{r:?}");
    }

    #[test]
    fn acuteness() {
        assert!(is_acute(&F2, 500, 3));
        assert!(is_acute(&Cone::Spectral { n: 2, d: 2, sign: Sign::Minus }, 2000, 3));
        assert!(!is_acute(&Cone::FullSpace { dim: 2 }, 500, 3));
        assert!(!is_acute(&Cone::HalfSpace { normal: vec![1.0, 0.0] }, 500, 3));
    }

    #[test]
    fn json_roundtrip() {
        let c = Cone::Product {
            factors: vec![
                Cone::DualOf { inner: Box::new(Cone::Spectral { n: 2, d: 2, sign: Sign::Minus }) },
                Cone::LorentzForward { d: 2 },
            ],
        };
        let txt = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<Cone>(&txt).unwrap(), c);
        let f: Cone = serde_json::from_str(r#"{"type":"lorentz-forward","d":4}"#).unwrap();
        assert_eq!(f.dim(), 4);
    }
}
