use std::time::Instant;

use crate::covariance::Covariance;
use crate::error::Result;
use crate::kalman::Kalman;
use crate::linalg::{triangularize, Matrix};
use crate::model::{Evolution, Observation};

use super::Noise;

/// Random orthogonal `n x n` matrix: the orthogonal factor of a QR
/// factorization of a matrix of standard normals.
pub fn random_orthogonal(noise: &mut Noise, n: usize) -> Matrix {
    let a = noise.normal_matrix(n, n);
    let t =
        triangularize(a, vec![Matrix::identity(n)], vec![0.0; n]).expect("square Gaussian block");
    // The companion carries Qᵀ·I.
    t.companions.into_iter().next().unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerfConfig {
    pub dim: usize,
    pub steps: usize,
    /// Steps retained behind the latest one; `None` keeps everything.
    pub window: Option<usize>,
    /// Steps per timing group.
    pub group: usize,
    pub seed: u64,
    /// Smooth the whole run at the end (only meaningful without a window).
    pub smooth: bool,
}

impl PerfConfig {
    pub fn new(dim: usize, steps: usize, window: Option<usize>) -> Self {
        Self {
            dim,
            steps,
            window,
            group: 1000,
            seed: 0,
            smooth: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfReport {
    pub config: PerfConfig,
    /// Mean seconds per step of each consecutive group of steps.
    pub group_means: Vec<f64>,
    pub max_retained: usize,
    pub smooth_seconds: Option<f64>,
}

impl PerfReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,first_step,last_step,mean_seconds_per_step\n");
        let g = self.config.group;
        for (i, m) in self.group_means.iter().enumerate() {
            let last = ((i + 1) * g).min(self.config.steps) - 1;
            out.push_str(&format!("{i},{},{last},{m:.6e}\n", i * g));
        }
        out
    }
}

/// Filters `steps` steps of a system with random orthogonal `F` and `G`,
/// identity covariances, `c = 0` and Gaussian observations, timing the engine
/// calls (evolve, observe, latest estimate and forget) of each step.
pub fn perftest(config: PerfConfig) -> Result<PerfReport> {
    assert!(config.dim >= 1 && config.group >= 1);
    let n = config.dim;
    let mut noise = Noise::new(config.seed);
    let identity = Covariance::identity(n);
    let mut kf = Kalman::new();
    let mut times = Vec::with_capacity(config.steps);
    let mut max_retained = 0;

    for k in 0..config.steps {
        let g = random_orthogonal(&mut noise, n);
        let o = noise.normal_vec(n, 1.0);
        let obs = Observation::new(g, o, identity.clone());
        let evo = (k > 0).then(|| {
            let f = random_orthogonal(&mut noise, n);
            Evolution::new(n, None, f, vec![0.0; n], identity.clone())
        });

        let start = Instant::now();
        if let Some(e) = &evo {
            kf.evolve(e)?;
        }
        kf.observe(Some(&obs))?;
        std::hint::black_box(kf.estimate_latest()?);
        if let Some(w) = config.window {
            if k >= w && w > 0 {
                kf.forget(k - w)?;
            }
        }
        times.push(start.elapsed().as_secs_f64());
        max_retained = max_retained.max(kf.retained_steps());
    }

    let smooth_seconds = if config.smooth {
        let start = Instant::now();
        kf.smooth()?;
        Some(start.elapsed().as_secs_f64())
    } else {
        None
    };

    let group_means = times
        .chunks(config.group)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    Ok(PerfReport {
        config,
        group_means,
        max_retained,
        smooth_seconds,
    })
}
