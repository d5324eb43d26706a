//! Seeded random streams and the samplers that draw from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{inner, vec_norm};
use super::state::PureQubit;

/// A ChaCha8 stream addressed by `(seed, stream)`.
///
/// Two generators built from the same pair yield identical sequences on every
/// platform. Parallel workers take disjoint stream ids under one seed.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.random_range(lo..=hi)
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Standard complex Gaussian (unit variance split across both parts).
    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.normal() * s, self.normal() * s)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Uniform direction on the unit sphere (Archimedes: `z` uniform on `[-1, 1]`).
pub fn sample_sphere_direction(rng: &mut SeededRng) -> [f64; 3] {
    let z = rng.uniform_range(-1.0, 1.0);
    let phi = rng.uniform_range(0.0, 2.0 * PI);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Haar-random pure qubit: spin-up along a uniform Bloch direction.
pub fn sample_haar_qubit(rng: &mut SeededRng) -> PureQubit {
    PureQubit::from_bloch(sample_sphere_direction(rng)).expect("unit direction")
}

/// `n` nearly uniform points on the unit sphere (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Extends `fixed` (assumed orthonormal) to `total` orthonormal vectors with
/// Haar-random additions, by Gram-Schmidt on complex Gaussian draws.
pub fn random_orthonormal_completion(
    fixed: &[Vec<Complex64>],
    dim: usize,
    total: usize,
    rng: &mut SeededRng,
) -> Vec<Vec<Complex64>> {
    assert!(total <= dim);
    let mut basis: Vec<Vec<Complex64>> = fixed.to_vec();
    while basis.len() < total {
        let mut v: Vec<Complex64> = (0..dim).map(|_| rng.complex_normal()).collect();
        // two passes keep the result orthogonal to machine precision
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = vec_norm(&v);
        if n < 1e-6 {
            continue;
        }
        basis.push(v.into_iter().map(|x| x / n).collect());
    }
    basis
}
