//! Scenario files, the bundled example generators, the scenario runner and the
//! performance harness.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "name": "demo",
//!   "seed": 1,
//!   "steps": [
//!     {"observe": {"G": [[1.0]], "o": [0.3], "C": {"type": "w", "data": [10.0]}}},
//!     {"evolve": {"n": 1, "F": [[1.0]], "c": [0.0], "K": {"type": "C", "data": [[1.0]]}},
//!      "observe": {"G": [[1.0]], "o": [0.1], "C": {"type": "w", "data": [10.0]}}}
//!   ],
//!   "commands": ["filter_all", "smooth"]
//! }
//! ```
//!
//! Commands are `"filter_all"`, `"smooth"`, `{"forget": i}`,
//! `{"rollback": i}` and `{"predict_to": i}`.

mod examples;
mod noise;
mod perf;
mod run;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::StepInput;

pub use examples::{
    clock_delay, gen_add_remove, gen_clock_offsets, gen_projectile, gen_rotation,
    gen_rotation_noiseless, gen_variance, projectile_matrix, VarianceMode, CLOCK_ARRIVAL_SIGMA,
    CLOCK_DRIFT_SIGMA, CLOCK_OFFSET_SIGMA, PROJECTILE_OBSERVED, PROJECTILE_OBS_VARIANCE,
    PROJECTILE_STEPS,
};
pub use noise::Noise;
pub use perf::{perftest, random_orthogonal, PerfConfig, PerfReport};
pub use run::{oracle_check, run, OracleReport, RunResult, StepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Filter every step not yet processed, with its observation.
    FilterAll,
    /// Smooth all retained steps.
    Smooth,
    Forget(usize),
    Rollback(usize),
    /// Advance through step `i` without using observations after step 0.
    PredictTo(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub steps: Vec<StepInput>,
    #[serde(default)]
    pub commands: Vec<Command>,
    /// Simulated true state of every step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<Vec<f64>>>,
}

impl Scenario {
    /// Checks the structural invariants that do not need the engine.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Scenario(m));
        for (i, s) in self.steps.iter().enumerate() {
            match (i, &s.evolution) {
                (0, Some(_)) => return fail("step 0 cannot have an evolution".into()),
                (0, None) if s.observation.is_none() && s.dim.is_none() => {
                    return fail("step 0 needs an observation or a dimension".into())
                }
                (i, None) if i > 0 => return fail(format!("step {i} has no evolution")),
                _ => {}
            }
        }
        for c in &self.commands {
            let idx = match c {
                Command::Forget(i) | Command::Rollback(i) | Command::PredictTo(i) => *i,
                _ => continue,
            };
            if idx >= self.steps.len() {
                return fail(format!(
                    "command {c:?} refers to step {idx}, but there are {} steps",
                    self.steps.len()
                ));
            }
        }
        if let Some(truth) = &self.ground_truth {
            if truth.len() != self.steps.len() {
                return fail(format!(
                    "ground truth has {} steps, scenario has {}",
                    truth.len(),
                    self.steps.len()
                ));
            }
            for (i, (t, s)) in truth.iter().zip(&self.steps).enumerate() {
                if let Some(n) = s.state_dim() {
                    if n != t.len() {
                        return fail(format!(
                            "ground truth of step {i} has {} components, state has {n}",
                            t.len()
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios contain only finite numbers")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Same scenario with a different command list.
    pub fn with_commands(mut self, commands: Vec<Command>) -> Self {
        self.commands = commands;
        self
    }
}
