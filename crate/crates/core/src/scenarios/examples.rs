//! Generators for the bundled examples.
//!
//! Every generator simulates a ground-truth trajectory and observations from
//! a [`Noise`] stream seeded with `seed`. Draw order is part of the format:
//! each generator documents what it draws and when.

use std::f64::consts::PI;

use crate::covariance::Covariance;
use crate::linalg::Matrix;
use crate::model::{Evolution, Observation, StepInput};

use super::{Command, Noise, Scenario};

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn rotation_matrix(alpha: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[alpha.cos(), -alpha.sin(), alpha.sin(), alpha.cos()])
}

/// A 2-D state rotating by `2π/16` per step, observed through `obs_rows`
/// rows whose first two form the identity.
///
/// Draws: the extra rows of `G` (row by row), then for every step `i ≥ 1`
/// the two evolution noises, then the observation noises of all steps.
pub fn gen_rotation(seed: u64, obs_rows: usize) -> Scenario {
    rotation(seed, obs_rows, false)
}

/// The rotation example with exact dynamics and (nearly) exact observations,
/// `C = (10⁻¹²)² I`.
pub fn gen_rotation_noiseless(seed: u64, obs_rows: usize) -> Scenario {
    rotation(seed, obs_rows, true)
}

fn rotation(seed: u64, obs_rows: usize, noiseless: bool) -> Scenario {
    assert!((1..=6).contains(&obs_rows), "obs_rows must be in 1..=6");
    let steps = 16;
    let mut noise = Noise::new(seed);
    let f = rotation_matrix(2.0 * PI / 16.0);
    let (k_sigma, c_sigma) = (0.001, if noiseless { 1e-12 } else { 0.1 });

    let mut g = Matrix::zeros(obs_rows, 2);
    for i in 0..obs_rows {
        if i < 2 {
            g[(i, i)] = 1.0;
        } else {
            g[(i, 0)] = noise.standard();
            g[(i, 1)] = noise.standard();
        }
    }

    let mut truth = vec![vec![1.0, 0.0]];
    for i in 1..steps {
        let eps = noise.normal_vec(2, k_sigma);
        let next = f.mul_vec(&truth[i - 1]).unwrap();
        truth.push(if noiseless { next } else { add(&next, &eps) });
    }

    let k = Covariance::isotropic(2, k_sigma).unwrap();
    let c = Covariance::isotropic(obs_rows, c_sigma).unwrap();
    let mut inputs = Vec::with_capacity(steps);
    for (i, u) in truth.iter().enumerate() {
        let delta = noise.normal_vec(obs_rows, c_sigma);
        let o = add(&g.mul_vec(u).unwrap(), &delta);
        let obs = Observation::new(g.clone(), o, c.clone());
        inputs.push(if i == 0 {
            StepInput::first(obs)
        } else {
            let e = Evolution::new(2, None, f.clone(), vec![0.0; 2], k.clone());
            StepInput::next(e, Some(obs))
        });
    }

    Scenario {
        name: if noiseless {
            "rotation-noiseless".into()
        } else {
            "rotation".into()
        },
        seed,
        steps: inputs,
        commands: vec![
            Command::PredictTo(steps - 1),
            Command::Rollback(1),
            Command::FilterAll,
            Command::Smooth,
        ],
        ground_truth: Some(truth),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceMode {
    /// `uᵢ = uᵢ₋₁ + εᵢ`, `εᵢ ~ N(0, 1)`.
    RandomWalk,
    /// `uᵢ = uᵢ₋₁ + 0.2`; the filter still assumes a random walk.
    Slope,
}

/// A scalar tracked over steps `0..=100` with observation standard deviation
/// 10, or 0.25 at step 50 when `precise_at_50` is set.
///
/// Draws: in random-walk mode one evolution noise per step `i ≥ 1`, then one
/// observation noise per step.
pub fn gen_variance(seed: u64, mode: VarianceMode, precise_at_50: bool) -> Scenario {
    let steps = 101;
    let mut noise = Noise::new(seed);
    let mut truth = vec![vec![0.0]];
    for i in 1..steps {
        let step = match mode {
            VarianceMode::RandomWalk => noise.standard(),
            VarianceMode::Slope => 0.2,
        };
        truth.push(vec![truth[i - 1][0] + step]);
    }
    let mut inputs = Vec::with_capacity(steps);
    for (i, u) in truth.iter().enumerate() {
        let sigma = if precise_at_50 && i == 50 { 0.25 } else { 10.0 };
        let o = vec![u[0] + noise.normal(sigma)];
        let obs = Observation::new(
            Matrix::identity(1),
            o,
            Covariance::diagonal_weights(vec![1.0 / sigma]).unwrap(),
        );
        inputs.push(if i == 0 {
            StepInput::first(obs)
        } else {
            let e = Evolution::new(
                1,
                None,
                Matrix::identity(1),
                vec![0.0],
                Covariance::identity(1),
            );
            StepInput::next(e, Some(obs))
        });
    }
    let name = match mode {
        VarianceMode::RandomWalk => "variance-random-walk",
        VarianceMode::Slope => "variance-slope",
    };
    Scenario {
        name: name.into(),
        seed,
        steps: inputs,
        commands: vec![Command::FilterAll, Command::Smooth],
        ground_truth: Some(truth),
    }
}

/// Seven steps tracking the constant 1; a second parameter with value 2 is
/// added at step 2 and the first one is dropped at step 4 with `H = [0; 1]`.
///
/// Both noises have standard deviation 0.1. The truth is constant; draws are
/// the observation noises, step by step and row by row.
pub fn gen_add_remove(seed: u64) -> Scenario {
    let dims = [1usize, 1, 2, 2, 1, 1, 1];
    let mut noise = Noise::new(seed);
    let sigma = 0.1;
    let truth: Vec<Vec<f64>> = dims
        .iter()
        .enumerate()
        .map(|(i, &n)| match (n, i < 2) {
            (1, true) => vec![1.0],
            (1, false) => vec![2.0],
            _ => vec![1.0, 2.0],
        })
        .collect();

    let mut inputs = Vec::with_capacity(dims.len());
    for (i, &n) in dims.iter().enumerate() {
        let o = add(&truth[i], &noise.normal_vec(n, sigma));
        let obs = Observation::new(
            Matrix::identity(n),
            o,
            Covariance::isotropic(n, sigma).unwrap(),
        );
        if i == 0 {
            inputs.push(StepInput::first(obs));
            continue;
        }
        let prev = dims[i - 1];
        let h = (n < prev).then(|| Matrix::from_rows(&[[0.0], [1.0]]).unwrap());
        let e = Evolution::new(
            n,
            h,
            Matrix::identity(prev),
            vec![0.0; prev],
            Covariance::isotropic(prev, sigma).unwrap(),
        );
        inputs.push(StepInput::next(e, Some(obs)));
    }

    Scenario {
        name: "add-remove".into(),
        seed,
        steps: inputs,
        commands: vec![Command::FilterAll, Command::Smooth],
        ground_truth: Some(truth),
    }
}

/// Projectile evolution matrix with time step `dt` and drag `b`.
pub fn projectile_matrix(dt: f64, b: f64) -> Matrix {
    Matrix::from_rows(&[
        [1.0, 0.0, dt, 0.0],
        [0.0, 1.0, 0.0, dt],
        [0.0, 0.0, 1.0 - b, 0.0],
        [0.0, 0.0, 0.0, 1.0 - b],
    ])
    .unwrap()
}

pub const PROJECTILE_STEPS: usize = 1200;
pub const PROJECTILE_OBSERVED: std::ops::RangeInclusive<usize> = 400..=600;
pub const PROJECTILE_OBS_VARIANCE: f64 = 500.0;

/// A projectile with drag and gravity launched from the origin with velocity
/// `(300, 600)`, simulated for 1200 steps of 0.1 s. Displacements are
/// observed in steps 400 to 600 with noise variance 500.
///
/// The simulated flight is exact; the filter allows a small process noise
/// (standard deviation 10⁻³) and starts with no knowledge of the launch state.
/// Draws: two observation noises per observed step.
pub fn gen_projectile(seed: u64) -> Scenario {
    let (dt, b) = (0.1, 1e-4);
    let f = projectile_matrix(dt, b);
    let c = vec![0.0, 0.0, 0.0, -9.8 * dt];
    let g = Matrix::from_rows(&[[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]).unwrap();
    let obs_cov =
        Covariance::explicit(Matrix::from_diagonal(&[PROJECTILE_OBS_VARIANCE; 2])).unwrap();
    let k = Covariance::isotropic(4, 1e-3).unwrap();
    let mut noise = Noise::new(seed);

    let mut truth = vec![vec![0.0, 0.0, 300.0, 600.0]];
    for i in 1..PROJECTILE_STEPS {
        truth.push(add(&f.mul_vec(&truth[i - 1]).unwrap(), &c));
    }
    let mut inputs = vec![StepInput::first_unobserved(4)];
    for (i, u) in truth.iter().enumerate().skip(1) {
        let obs = PROJECTILE_OBSERVED.contains(&i).then(|| {
            let o = add(
                &g.mul_vec(u).unwrap(),
                &noise.normal_vec(2, PROJECTILE_OBS_VARIANCE.sqrt()),
            );
            Observation::new(g.clone(), o, obs_cov.clone())
        });
        let e = Evolution::new(4, None, f.clone(), c.clone(), k.clone());
        inputs.push(StepInput::next(e, obs));
    }
    Scenario {
        name: "projectile".into(),
        seed,
        steps: inputs,
        commands: vec![Command::FilterAll, Command::Smooth],
        ground_truth: Some(truth),
    }
}

pub const CLOCK_OFFSET_SIGMA: f64 = 1.0;
pub const CLOCK_DRIFT_SIGMA: f64 = 0.01;
pub const CLOCK_ARRIVAL_SIGMA: f64 = 0.05;

/// Propagation delay from the beacon to receiver `j`.
pub fn clock_delay(j: usize) -> f64 {
    0.1 * (j + 1) as f64
}

/// Relative offsets of `n_clocks` clocks from `packets` beacon packets.
///
/// The state of step `i` is `(f_i1, …, f_im, τ_i)`: the clock offsets and the
/// departure time of packet `i` (`τ_i = i`). Offsets start `N(0, 1)` and drift
/// by `N(0, 0.01²)` per packet; arrival times carry `N(0, 0.05²)` noise. With
/// `pseudo`, step 0 gets an extra observation `f_01 = 0` that removes the
/// shared-shift ambiguity.
///
/// Draws: initial offsets, then per step the drifts (steps `i ≥ 1`) and the
/// arrival noises.
pub fn gen_clock_offsets(seed: u64, n_clocks: usize, packets: usize, pseudo: bool) -> Scenario {
    assert!(n_clocks >= 1 && packets >= 1);
    let m = n_clocks;
    let mut noise = Noise::new(seed);
    let mut offsets = noise.normal_vec(m, CLOCK_OFFSET_SIGMA);

    let mut g = Matrix::zeros(m, m + 1);
    for j in 0..m {
        g[(j, j)] = 1.0;
        g[(j, m)] = 1.0;
    }
    let mut g0 = g.clone();
    if pseudo {
        let mut row = vec![0.0; m + 1];
        row[0] = 1.0;
        g0 = Matrix::vstack(&g0, &Matrix::from_row_slice(1, m + 1, &row)).unwrap();
    }
    let mut h = Matrix::zeros(m, m + 1);
    for j in 0..m {
        h[(j, j)] = 1.0;
    }
    let weights = |rows: usize| Covariance::isotropic(rows, CLOCK_ARRIVAL_SIGMA).unwrap();

    let mut truth = Vec::with_capacity(packets);
    let mut inputs = Vec::with_capacity(packets);
    for i in 0..packets {
        if i > 0 {
            for f in offsets.iter_mut() {
                *f += noise.normal(CLOCK_DRIFT_SIGMA);
            }
        }
        let tau = i as f64;
        let mut state = offsets.clone();
        state.push(tau);
        // Observed arrival time minus the known delay: t_ij − d_j = f_ij + τ_i + δ_ij.
        let mut o: Vec<f64> = (0..m)
            .map(|j| {
                (tau + clock_delay(j) + offsets[j] + noise.normal(CLOCK_ARRIVAL_SIGMA))
                    - clock_delay(j)
            })
            .collect();
        if i == 0 {
            let obs = if pseudo {
                o.push(0.0);
                Observation::new(g0.clone(), o, weights(m + 1))
            } else {
                Observation::new(g.clone(), o, weights(m))
            };
            inputs.push(StepInput::first(obs));
        } else {
            let e = Evolution::new(
                m + 1,
                Some(h.clone()),
                h.clone(),
                vec![0.0; m],
                Covariance::isotropic(m, CLOCK_DRIFT_SIGMA).unwrap(),
            );
            inputs.push(StepInput::next(
                e,
                Some(Observation::new(g.clone(), o, weights(m))),
            ));
        }
        truth.push(state);
    }
    Scenario {
        name: "clock-offsets".into(),
        seed,
        steps: inputs,
        commands: vec![Command::FilterAll, Command::Smooth],
        ground_truth: Some(truth),
    }
}
