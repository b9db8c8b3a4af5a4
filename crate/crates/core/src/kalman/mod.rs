//! Incremental Kalman filter and smoother.
//!
//! The engine keeps the block upper-bidiagonal `R` factor of the weighted
//! least-squares system
//!
//! ```text
//!   [ W₀G₀              ]        [ W₀o₀ ]
//!   [ -V₁F₁  V₁H₁       ]  u  ≈  [ V₁c₁ ]
//!   [        W₁G₁       ]        [ W₁o₁ ]
//!   [        -V₂F₂ V₂H₂ ]        [ V₂c₂ ]
//!   [              ...  ]        [ ...  ]
//! ```
//!
//! one block row at a time. Each evolve seals the block row of the previous
//! step (its diagonal block, its superdiagonal block and its slice of the
//! transformed right-hand side); the current step stays pending until the
//! next evolve. Orthogonal transformations are applied and discarded.
//!
//! A block whose stacked rows are fewer than its columns is flat and is kept
//! as is. Flatness is decided by row counts only; numerical rank is never
//! inspected. Steps that depend on a flat diagonal block are reported as NaN.

mod estimate;
mod smooth;

use std::collections::VecDeque;

pub use estimate::Estimate;

use crate::error::{Error, Result};
use crate::linalg::{solve_upper_triangular, triangularize, Matrix};
use crate::model::{Evolution, Observation, StepInput};

/// A sealed block row.
#[derive(Debug, Clone)]
struct SealedStep {
    index: usize,
    dim: usize,
    /// `R_{i,i}`, square upper triangular or flat.
    r_diag: Matrix,
    /// `R_{i,i+1}`.
    r_sup: Matrix,
    y: Vec<f64>,
    /// Pre-observation block `R̄_{i,i}` and its right-hand side, for rollback.
    bar_r: Matrix,
    bar_y: Vec<f64>,
    /// Smoothed estimate and the generation it was computed in.
    smoothed: Option<(u64, Estimate)>,
}

#[derive(Debug, Clone)]
struct PendingStep {
    index: usize,
    dim: usize,
    bar_r: Matrix,
    bar_y: Vec<f64>,
    /// `R̃_{k,k}` and `ỹ_k` once observed (possibly with no observation).
    observed: Option<(Matrix, Vec<f64>)>,
}

/// Filter/smoother state.
///
/// All mutating operations take `&mut self`; a `Kalman` can be moved
/// between threads and shared read-only once smoothed.
#[derive(Debug, Clone, Default)]
pub struct Kalman {
    sealed: VecDeque<SealedStep>,
    pending: Option<PendingStep>,
    /// Bumped by every operation that changes the factorization.
    generation: u64,
}

impl Kalman {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of the earliest retained step.
    pub fn earliest(&self) -> Result<usize> {
        let pending = self.pending.as_ref().ok_or(Error::NoSteps)?;
        Ok(self.sealed.front().map_or(pending.index, |s| s.index))
    }

    /// Index of the current (latest) step.
    pub fn latest(&self) -> Result<usize> {
        Ok(self.pending.as_ref().ok_or(Error::NoSteps)?.index)
    }

    /// Number of retained steps, sealed rows plus the current step.
    pub fn retained_steps(&self) -> usize {
        self.sealed.len() + usize::from(self.pending.is_some())
    }

    /// Dimension of the current state.
    pub fn state_dim(&self) -> Result<usize> {
        Ok(self.pending.as_ref().ok_or(Error::NoSteps)?.dim)
    }

    /// Whether the current step has been observed (with or without data).
    pub fn is_observed(&self) -> bool {
        self.pending.as_ref().is_some_and(|p| p.observed.is_some())
    }

    /// Adds the evolution equation that starts a new step.
    pub fn evolve(&mut self, evolution: &Evolution) -> Result<()> {
        let pending = self.pending.as_ref().ok_or(Error::EvolveBeforeObserve)?;
        let Some((r_tilde, y_tilde)) = pending.observed.as_ref() else {
            return Err(Error::NotObserved(pending.index));
        };
        let n_prev = pending.dim;
        let n_new = evolution.dim;
        let f = &evolution.f;
        let ell = f.rows();
        if n_new == 0 {
            return Err(Error::Contract(
                "new state dimension must be positive".into(),
            ));
        }
        if ell == 0 {
            return Err(Error::Contract(
                "evolution needs at least one equation".into(),
            ));
        }
        if f.cols() != n_prev {
            return Err(Error::DimensionMismatch {
                context: "F columns vs previous state dimension".into(),
                expected: n_prev,
                found: f.cols(),
            });
        }
        if evolution.c.len() != ell {
            return Err(Error::DimensionMismatch {
                context: "control vector length vs rows of F".into(),
                expected: ell,
                found: evolution.c.len(),
            });
        }
        if evolution.k.dim() != ell {
            return Err(Error::DimensionMismatch {
                context: "evolution covariance dimension vs rows of F".into(),
                expected: ell,
                found: evolution.k.dim(),
            });
        }
        if !f.is_finite() || evolution.c.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("evolution equation"));
        }
        let default_h;
        let h = match &evolution.h {
            Some(h) => {
                if h.shape() != (ell, n_new) {
                    return Err(Error::DimensionMismatch {
                        context: format!("H shape {}x{} vs {ell}x{n_new}", h.rows(), h.cols()),
                        expected: ell * n_new,
                        found: h.rows() * h.cols(),
                    });
                }
                if !h.is_finite() {
                    return Err(Error::NonFinite("H"));
                }
                h
            }
            None => {
                if ell > n_new {
                    return Err(Error::MissingEvolutionMatrix { rows: ell, n_new });
                }
                default_h = Matrix::identity(ell).pad_columns(n_new);
                &default_h
            }
        };

        let k = &evolution.k;
        let vf = k.weigh_matrix(f)?.neg();
        let vh = k.weigh_matrix(h)?;
        let vc = k.weigh_vector(&evolution.c)?;

        let stack = Matrix::vstack(r_tilde, &vf)?;
        let companion = Matrix::vstack(&Matrix::zeros(r_tilde.rows(), n_new), &vh)?;
        let mut rhs = y_tilde.clone();
        rhs.extend_from_slice(&vc);

        let rows = stack.rows();
        let (r_diag, r_sup, y, bar_r, bar_y) = if rows >= n_prev {
            let t = triangularize(stack, vec![companion], rhs)?;
            let comp = &t.companions[0];
            (
                t.r_top,
                comp.row_block(0..n_prev),
                t.rhs[..n_prev].to_vec(),
                comp.row_block(n_prev..rows),
                t.rhs[n_prev..].to_vec(),
            )
        } else {
            (stack, companion, rhs, Matrix::zeros(0, n_new), Vec::new())
        };

        let prev = self.pending.take().expect("checked above");
        self.sealed.push_back(SealedStep {
            index: prev.index,
            dim: prev.dim,
            r_diag,
            r_sup,
            y,
            bar_r: prev.bar_r,
            bar_y: prev.bar_y,
            smoothed: None,
        });
        self.pending = Some(PendingStep {
            index: prev.index + 1,
            dim: n_new,
            bar_r,
            bar_y,
            observed: None,
        });
        self.generation += 1;
        Ok(())
    }

    /// Adds the observation equation of the current step, or declares that
    /// the step has no observation when `observation` is `None`.
    ///
    /// The first step begins here; its dimension is the column count of `G`.
    pub fn observe(&mut self, observation: Option<&Observation>) -> Result<()> {
        if let Some(obs) = observation {
            validate_observation(obs)?;
        }
        let pending = match self.pending.as_mut() {
            Some(p) => p,
            None => {
                let obs = observation.ok_or_else(|| {
                    Error::Contract(
                        "the first step needs an observation to fix its dimension; use begin_unobserved"
                            .into(),
                    )
                })?;
                self.pending.insert(PendingStep {
                    index: 0,
                    dim: obs.g.cols(),
                    bar_r: Matrix::zeros(0, obs.g.cols()),
                    bar_y: Vec::new(),
                    observed: None,
                })
            }
        };
        if pending.observed.is_some() {
            return Err(Error::AlreadyObserved(pending.index));
        }
        let (mut stack, mut rhs) = (pending.bar_r.clone(), pending.bar_y.clone());
        if let Some(obs) = observation {
            if obs.g.cols() != pending.dim {
                return Err(Error::DimensionMismatch {
                    context: "G columns vs state dimension".into(),
                    expected: pending.dim,
                    found: obs.g.cols(),
                });
            }
            stack = Matrix::vstack(&stack, &obs.c.weigh_matrix(&obs.g)?)?;
            rhs.extend(obs.c.weigh_vector(&obs.o)?);
        }
        pending.observed = Some(reduce_diagonal(stack, rhs, pending.dim)?);
        self.generation += 1;
        Ok(())
    }

    /// Starts step 0 with dimension `dim` and no observation of it.
    pub fn begin_unobserved(&mut self, dim: usize) -> Result<()> {
        if let Some(p) = &self.pending {
            return Err(Error::AlreadyObserved(p.index));
        }
        if dim == 0 {
            return Err(Error::Contract("state dimension must be positive".into()));
        }
        self.pending = Some(PendingStep {
            index: 0,
            dim,
            bar_r: Matrix::zeros(0, dim),
            bar_y: Vec::new(),
            observed: Some((Matrix::zeros(0, dim), Vec::new())),
        });
        self.generation += 1;
        Ok(())
    }

    /// Feeds one step: evolves (or begins step 0) and then observes.
    pub fn apply(&mut self, input: &StepInput) -> Result<()> {
        self.apply_with(input, true)
    }

    /// Like [`apply`](Self::apply), optionally withholding the observation.
    /// Step 0 always keeps its observation since nothing else fixes it.
    pub fn apply_with(&mut self, input: &StepInput, with_observation: bool) -> Result<()> {
        match (&input.evolution, &self.pending) {
            (Some(e), _) => self.evolve(e)?,
            (None, Some(_)) => {
                return Err(Error::Contract(
                    "steps after the first need an evolution".into(),
                ))
            }
            (None, None) => {
                if input.observation.is_none() {
                    let dim = input.dim.ok_or_else(|| {
                        Error::Contract("unobserved first step needs its dimension".into())
                    })?;
                    return self.begin_unobserved(dim);
                }
                return self.observe(input.observation.as_ref());
            }
        }
        let obs = if with_observation {
            input.observation.as_ref()
        } else {
            None
        };
        self.observe(obs)
    }

    /// Estimate of the current step: filtered once observed, otherwise the
    /// prediction from the evolution equations alone.
    pub fn estimate_latest(&self) -> Result<Estimate> {
        let p = self.pending.as_ref().ok_or(Error::NoSteps)?;
        match &p.observed {
            Some((r, y)) => Ok(back_substitute(r, y, p.dim)),
            None => {
                let (r, y) = reduce_diagonal(p.bar_r.clone(), p.bar_y.clone(), p.dim)?;
                Ok(back_substitute(&r, &y, p.dim))
            }
        }
    }

    /// Estimate of step `index`. Earlier steps need a preceding
    /// [`smooth`](Self::smooth) with no factorization change since.
    pub fn estimate(&self, index: usize) -> Result<Estimate> {
        let latest = self.latest()?;
        if index == latest {
            return self.estimate_latest();
        }
        if index > latest {
            return Err(Error::FutureStep {
                requested: index,
                latest,
            });
        }
        let step = self.sealed_step(index)?;
        match &step.smoothed {
            Some((generation, e)) if *generation == self.generation => Ok(e.clone()),
            _ => Err(Error::NotSmoothed(index)),
        }
    }

    /// Discards all steps with index `<= index`.
    pub fn forget(&mut self, index: usize) -> Result<()> {
        let latest = self.latest()?;
        if index >= latest {
            return Err(Error::ForgetPending(index));
        }
        if index < self.earliest()? {
            return Err(Error::StepForgotten(index));
        }
        while self.sealed.front().is_some_and(|s| s.index <= index) {
            self.sealed.pop_front();
        }
        Ok(())
    }

    /// Returns to the state right after the evolution of step `index`,
    /// before its observation. Later steps are discarded.
    pub fn rollback(&mut self, index: usize) -> Result<()> {
        let latest = self.latest()?;
        if index > latest {
            return Err(Error::FutureStep {
                requested: index,
                latest,
            });
        }
        if index < self.earliest()? {
            return Err(Error::StepForgotten(index));
        }
        if index < latest {
            let mut step = self.sealed.pop_back().expect("index within retained range");
            while step.index > index {
                step = self.sealed.pop_back().expect("index within retained range");
            }
            self.pending = Some(PendingStep {
                index: step.index,
                dim: step.dim,
                bar_r: step.bar_r,
                bar_y: step.bar_y,
                observed: None,
            });
        } else if let Some(p) = self.pending.as_mut() {
            p.observed = None;
        }
        self.generation += 1;
        Ok(())
    }

    fn sealed_step(&self, index: usize) -> Result<&SealedStep> {
        let first = self.earliest()?;
        if index < first {
            return Err(Error::StepForgotten(index));
        }
        let step = &self.sealed[index - first];
        debug_assert_eq!(step.index, index);
        Ok(step)
    }
}

impl Matrix {
    /// `[self | 0]` with `cols` columns in total.
    fn pad_columns(&self, cols: usize) -> Matrix {
        let mut out = Matrix::zeros(self.rows(), cols);
        for i in 0..self.rows() {
            out.row_mut(i)[..self.cols()].copy_from_slice(self.row(i));
        }
        out
    }
}

fn validate_observation(obs: &Observation) -> Result<()> {
    let m = obs.g.rows();
    if m == 0 || obs.g.cols() == 0 {
        return Err(Error::Contract(
            "observation matrix must be nonempty".into(),
        ));
    }
    if obs.o.len() != m {
        return Err(Error::DimensionMismatch {
            context: "observation vector length vs rows of G".into(),
            expected: m,
            found: obs.o.len(),
        });
    }
    if obs.c.dim() != m {
        return Err(Error::DimensionMismatch {
            context: "observation covariance dimension vs rows of G".into(),
            expected: m,
            found: obs.c.dim(),
        });
    }
    if obs.o.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("observation vector"));
    }
    if !obs.g.is_finite() {
        return Err(Error::NonFinite("G"));
    }
    Ok(())
}

/// Triangularizes a diagonal block when it has at least `dim` rows and keeps
/// it as is when it is flat.
fn reduce_diagonal(stack: Matrix, rhs: Vec<f64>, dim: usize) -> Result<(Matrix, Vec<f64>)> {
    if stack.rows() < dim {
        return Ok((stack, rhs));
    }
    let t = triangularize(stack, Vec::new(), rhs)?;
    Ok((t.r_top, t.rhs[..dim].to_vec()))
}

/// Solves a square diagonal block; flat or singular blocks yield NaN.
fn back_substitute(r: &Matrix, y: &[f64], dim: usize) -> Estimate {
    if r.rows() != dim {
        return Estimate::unobservable(dim);
    }
    match solve_upper_triangular(r, y) {
        Ok(state) if state.iter().all(|x| x.is_finite()) => Estimate {
            state,
            cov_factor: r.clone(),
        },
        _ => Estimate::unobservable(dim),
    }
}
