//! Seeded noise for the simulations.
//!
//! The stream is fully specified so other implementations can reproduce it:
//! ChaCha with 8 rounds, keyed by `seed_from_u64(seed)` (the `rand_core`
//! PCG32 key expansion); uniforms are `(next_u64 >> 11) · 2⁻⁵³`; normals use
//! the Box–Muller transform on pairs of uniforms, `u1` replaced by `1 − u1` so
//! the logarithm never sees zero, returning the cosine draw first and caching
//! the sine draw for the next call.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Matrix;

#[derive(Debug, Clone)]
pub struct Noise {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Noise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    pub fn standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal(&mut self, sigma: f64) -> f64 {
        sigma * self.standard()
    }

    pub fn normal_vec(&mut self, n: usize, sigma: f64) -> Vec<f64> {
        (0..n).map(|_| self.normal(sigma)).collect()
    }

    /// Matrix of independent standard normals, filled row by row.
    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| self.standard()).collect();
        Matrix::from_row_slice(rows, cols, &data)
    }
}
