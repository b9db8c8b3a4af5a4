//! Random scenarios shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use orthokalman::scenarios::{random_orthogonal, Noise};
use orthokalman::{Covariance, CovarianceKind, Evolution, Kalman, Matrix, Observation, StepInput};

/// `Q₁ diag(s) Q₂ᵀ` with singular values log-uniform in `[0.1, 10]`, so the
/// condition number is at most 100.
pub fn conditioned(noise: &mut Noise, rows: usize, cols: usize) -> Matrix {
    let q1 = random_orthogonal(noise, rows);
    let q2 = random_orthogonal(noise, cols);
    let mut d = Matrix::zeros(rows, cols);
    for i in 0..rows.min(cols) {
        d[(i, i)] = 10f64.powf(2.0 * noise.uniform() - 1.0);
    }
    q1.matmul(&d).unwrap().matmul(&q2.transpose()).unwrap()
}

/// Covariance with standard deviations in `[0.3, 3]` along random axes
/// (or along the coordinate axes when `diagonal`), in the requested kind.
pub struct CovarianceDraw {
    pub q: Matrix,
    pub sigma: Vec<f64>,
}

impl CovarianceDraw {
    pub fn new(noise: &mut Noise, n: usize, diagonal: bool) -> Self {
        let q = if diagonal {
            Matrix::identity(n)
        } else {
            random_orthogonal(noise, n)
        };
        let sigma = (0..n).map(|_| 0.3 * 10f64.powf(noise.uniform())).collect();
        Self { q, sigma }
    }

    /// `C = Q diag(σ²) Qᵀ` expressed in `kind`. An inverse factor gets a
    /// random left orthogonal factor, which leaves `WᵀW` unchanged.
    pub fn express(&self, kind: CovarianceKind, noise: &mut Noise) -> Covariance {
        let n = self.sigma.len();
        let scaled = |p: f64| {
            let d =
                Matrix::from_diagonal(&self.sigma.iter().map(|s| s.powf(p)).collect::<Vec<_>>());
            let m = self
                .q
                .matmul(&d)
                .unwrap()
                .matmul(&self.q.transpose())
                .unwrap();
            symmetrize(&m)
        };
        match kind {
            CovarianceKind::Explicit => Covariance::explicit(scaled(2.0)).unwrap(),
            CovarianceKind::Inverse => Covariance::inverse(scaled(-2.0)).unwrap(),
            CovarianceKind::InverseFactor => {
                let inv =
                    Matrix::from_diagonal(&self.sigma.iter().map(|s| 1.0 / s).collect::<Vec<_>>());
                let w = random_orthogonal(noise, n)
                    .matmul(&inv)
                    .unwrap()
                    .matmul(&self.q.transpose())
                    .unwrap();
                Covariance::inverse_factor(w).unwrap()
            }
            CovarianceKind::DiagonalWeights => {
                assert_eq!(
                    self.q,
                    Matrix::identity(n),
                    "weights need a diagonal covariance"
                );
                Covariance::diagonal_weights(self.sigma.iter().map(|s| 1.0 / s).collect()).unwrap()
            }
        }
    }
}

fn symmetrize(m: &Matrix) -> Matrix {
    let t = m.transpose();
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = 0.5 * (m[(i, j)] + t[(i, j)]);
        }
    }
    out
}

pub const KINDS: [CovarianceKind; 4] = [
    CovarianceKind::Explicit,
    CovarianceKind::InverseFactor,
    CovarianceKind::Inverse,
    CovarianceKind::DiagonalWeights,
];

/// How covariances of a random scenario are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CovarianceMode {
    /// Full covariances in a random non-diagonal kind per draw.
    Mixed,
    /// Diagonal covariances, all in the given kind.
    Diagonal(CovarianceKind),
}

/// A random scenario whose every prefix has a unique solution.
///
/// State dimensions vary in `1..=5` and there are `1..=40` steps. Each
/// evolution either has a square random `H`, a tall random `H` (the state
/// shrinks or stays the same), or the default `[I | 0]` with fewer equations
/// than state components. Steps whose state is pinned by `H` may skip their
/// observation or be observed by a flat `G`; otherwise `G` has full column
/// rank.
pub fn random_scenario(seed: u64, mode: CovarianceMode) -> Vec<StepInput> {
    let mut noise = Noise::new(seed);
    // Covariances are drawn from their own stream so the structure of a
    // scenario does not depend on the covariance kinds.
    let mut cov_noise = Noise::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut kind_noise = Noise::new(seed.wrapping_add(17));
    let mut cov = |n: usize, cov_noise: &mut Noise| match mode {
        CovarianceMode::Diagonal(kind) => {
            let d = CovarianceDraw::new(cov_noise, n, true);
            d.express(kind, &mut kind_noise)
        }
        CovarianceMode::Mixed => {
            let d = CovarianceDraw::new(cov_noise, n, false);
            let kind = KINDS[(kind_noise.uniform() * 3.0) as usize];
            d.express(kind, &mut kind_noise)
        }
    };
    let pick = |noise: &mut Noise, lo: usize, hi: usize| {
        lo + (noise.uniform() * (hi - lo + 1) as f64) as usize
    };

    let k = pick(&mut noise, 1, 40);
    let mut steps = Vec::with_capacity(k);
    let mut prev = 0;
    for i in 0..k {
        let n = pick(&mut noise, 1, 5);
        let mut pinned = false;
        let evolution = (i > 0).then(|| {
            let choice = noise.uniform();
            let (rows, h) = if choice < 0.5 {
                pinned = true;
                (n, Some(conditioned(&mut noise, n, n)))
            } else if choice < 0.75 {
                pinned = true;
                let rows = pick(&mut noise, n, n + 2);
                (rows, Some(conditioned(&mut noise, rows, n)))
            } else {
                (pick(&mut noise, 1, n), None)
            };
            let f = conditioned(&mut noise, rows, prev);
            let c = noise.normal_vec(rows, 1.0);
            Evolution::new(n, h, f, c, cov(rows, &mut cov_noise))
        });
        let m = if pinned {
            pick(&mut noise, 0, n + 1)
        } else {
            pick(&mut noise, n, n + 2)
        };
        let observation = (m > 0).then(|| {
            let g = conditioned(&mut noise, m, n);
            let o = noise.normal_vec(m, 2.0);
            Observation::new(g, o, cov(m, &mut cov_noise))
        });
        steps.push(StepInput {
            dim: None,
            evolution,
            observation,
        });
        prev = n;
    }
    steps
}

/// Engine run over all steps: filtered estimates after each step, then the
/// smoothed estimates.
pub fn engine_run(steps: &[StepInput]) -> (Vec<orthokalman::Estimate>, Vec<orthokalman::Estimate>) {
    let mut kf = Kalman::new();
    let mut filtered = Vec::with_capacity(steps.len());
    for s in steps {
        kf.apply(s).unwrap();
        filtered.push(kf.estimate_latest().unwrap());
    }
    kf.smooth().unwrap();
    let smoothed = (0..steps.len()).map(|i| kf.estimate(i).unwrap()).collect();
    (filtered, smoothed)
}

pub fn rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    orthokalman::linalg::norm(&d) / orthokalman::linalg::norm(b).max(f64::MIN_POSITIVE)
}

pub fn rel_mat(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}
