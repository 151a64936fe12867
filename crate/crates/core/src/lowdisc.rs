//! Deterministic low-discrepancy sampling (Halton), used for every sampled
//! certificate so that reports are reproducible from a seed.

use statrs::function::erf::erf_inv;

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton points in `(0, 1)^dim`. The seed shifts the start index.
#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1 && dim <= PRIMES.len(), "Halton dimension out of range");
        Self { dim, index: 1 + seed.wrapping_mul(104_729) % (1 << 40) }
    }

    pub fn point(&self, k: u64) -> Vec<f64> {
        (0..self.dim).map(|j| radical_inverse(self.index + k, PRIMES[j])).collect()
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;
    fn next(&mut self) -> Option<Vec<f64>> {
        let p = self.point(0);
        self.index += 1;
        Some(p)
    }
}

fn to_normal(u: f64) -> f64 {
    let u = u.clamp(1e-15, 1.0 - 1e-15);
    std::f64::consts::SQRT_2 * erf_inv(2.0 * u - 1.0)
}

/// Quasi-random standard normal vectors.
pub fn normal_vectors(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    Halton::new(dim, seed)
        .take(count)
        .map(|u| u.into_iter().map(to_normal).collect())
        .collect()
}

/// Quasi-uniform points on the unit sphere `S^{dim-1}`.
pub fn sphere_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    normal_vectors(dim, count * 2, seed)
        .into_iter()
        .filter_map(|v| {
            let n = norm(&v);
            (n > 1e-9).then(|| v.iter().map(|x| x / n).collect())
        })
        .take(count)
        .collect()
}

/// Quasi-uniform points in the box `[-half, half]^dim`.
pub fn box_points(dim: usize, count: usize, half: f64, seed: u64) -> Vec<Vec<f64>> {
    Halton::new(dim, seed)
        .take(count)
        .map(|u| u.into_iter().map(|x| (2.0 * x - 1.0) * half).collect())
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
