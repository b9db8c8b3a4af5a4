use std::fmt::Write as _;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::kalman::{Estimate, Kalman};
use crate::oracle;

use super::{Command, Scenario};

/// Everything recorded for one step during a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepResult {
    pub index: usize,
    pub truth: Option<Vec<f64>>,
    /// Estimate from observations up to and including this step.
    pub filtered: Option<Estimate>,
    /// Estimate produced while predicting, without this step's observation.
    pub predicted: Option<Estimate>,
    pub smoothed: Option<Estimate>,
    /// Wall time of the last evolve/observe/estimate of this step.
    pub seconds: f64,
}

impl StepResult {
    fn dim(&self) -> Option<usize> {
        [&self.filtered, &self.smoothed, &self.predicted]
            .into_iter()
            .flatten()
            .map(|e| e.dim())
            .next()
            .or_else(|| self.truth.as_ref().map(|t| t.len()))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunResult {
    pub name: String,
    /// One entry per step touched by the commands, in step order.
    pub steps: Vec<StepResult>,
}

fn fmt_value(out: &mut String, v: Option<f64>) {
    match v {
        Some(x) if x.is_nan() => out.push_str("NaN"),
        Some(x) => write!(out, "{x:.16e}").unwrap(),
        None => {}
    }
}

impl RunResult {
    /// CSV table, one row per step and state component. Values that were not
    /// produced are left empty; unobservable estimates are written as `NaN`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("step,component,truth,filtered,filtered_sigma,smoothed,smoothed_sigma\n");
        for s in &self.steps {
            let Some(n) = s.dim() else { continue };
            let fs = s.filtered.as_ref().map(|e| e.std_devs());
            let ss = s.smoothed.as_ref().map(|e| e.std_devs());
            for j in 0..n {
                write!(out, "{},{}", s.index, j).unwrap();
                let cols = [
                    s.truth.as_ref().and_then(|t| t.get(j).copied()),
                    s.filtered.as_ref().map(|e| e.state[j]),
                    fs.as_ref().map(|v| v[j]),
                    s.smoothed.as_ref().map(|e| e.state[j]),
                    ss.as_ref().map(|v| v[j]),
                ];
                for c in cols {
                    out.push(',');
                    fmt_value(&mut out, c);
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn filtered_states(&self) -> Vec<Option<Vec<f64>>> {
        self.steps
            .iter()
            .map(|s| s.filtered.as_ref().map(|e| e.state.clone()))
            .collect()
    }
}

struct Runner<'a> {
    scenario: &'a Scenario,
    kf: Kalman,
    next: usize,
    awaiting: Option<usize>,
    result: RunResult,
}

impl<'a> Runner<'a> {
    fn slot(&mut self, i: usize) -> &mut StepResult {
        while self.result.steps.len() <= i {
            let index = self.result.steps.len();
            let truth = self
                .scenario
                .ground_truth
                .as_ref()
                .and_then(|t| t.get(index).cloned());
            self.result.steps.push(StepResult {
                index,
                truth,
                ..Default::default()
            });
        }
        &mut self.result.steps[i]
    }

    /// Processes step `i`, with or without its observation.
    fn feed(&mut self, i: usize, with_observation: bool) -> Result<()> {
        let input = &self.scenario.steps[i];
        let start = Instant::now();
        if self.awaiting == Some(i) {
            let obs = if with_observation {
                input.observation.as_ref()
            } else {
                None
            };
            self.kf.observe(obs)?;
            self.awaiting = None;
        } else {
            self.kf.apply_with(input, with_observation || i == 0)?;
        }
        let estimate = self.kf.estimate_latest()?;
        let seconds = start.elapsed().as_secs_f64();
        let slot = self.slot(i);
        slot.seconds = seconds;
        if with_observation || i == 0 {
            slot.filtered = Some(estimate);
        } else {
            slot.predicted = Some(estimate);
        }
        Ok(())
    }

    fn command(&mut self, c: Command) -> Result<()> {
        let n = self.scenario.steps.len();
        match c {
            Command::FilterAll => {
                if let Some(i) = self.awaiting {
                    self.feed(i, true).map_err(|e| e.at_step(i))?;
                }
                for i in self.next..n {
                    self.feed(i, true).map_err(|e| e.at_step(i))?;
                    self.next = i + 1;
                }
            }
            Command::PredictTo(target) => {
                if let Some(i) = self.awaiting.filter(|&i| i <= target) {
                    self.feed(i, false).map_err(|e| e.at_step(i))?;
                }
                if target + 1 < self.next {
                    return Err(Error::Scenario(format!(
                        "cannot predict to step {target}: step {} was already processed",
                        self.next - 1
                    ))
                    .at_step(target));
                }
                for i in self.next..=target {
                    self.feed(i, false).map_err(|e| e.at_step(i))?;
                    self.next = i + 1;
                }
            }
            Command::Smooth => {
                self.kf.smooth()?;
                let (first, last) = (self.kf.earliest()?, self.kf.latest()?);
                for i in first..=last {
                    let est = self.kf.estimate(i).map_err(|e| e.at_step(i))?;
                    self.slot(i).smoothed = Some(est);
                }
            }
            Command::Forget(i) => self.kf.forget(i).map_err(|e| e.at_step(i))?,
            Command::Rollback(i) => {
                self.kf.rollback(i).map_err(|e| e.at_step(i))?;
                self.awaiting = Some(i);
                self.next = i + 1;
                for s in self.result.steps.iter_mut().skip(i) {
                    s.filtered = None;
                    s.smoothed = None;
                }
            }
        }
        Ok(())
    }
}

/// Executes the scenario's commands, in order, against a fresh filter.
///
/// Engine errors are reported with the step they occurred at.
pub fn run(scenario: &Scenario) -> Result<RunResult> {
    scenario.validate()?;
    let mut runner = Runner {
        scenario,
        kf: Kalman::new(),
        next: 0,
        awaiting: None,
        result: RunResult {
            name: scenario.name.clone(),
            steps: Vec::new(),
        },
    };
    for &c in &scenario.commands {
        runner.command(c)?;
    }
    Ok(runner.result)
}

/// Largest discrepancies between the engine and the dense oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub steps: usize,
    /// Max over steps of `‖û − u*‖ / ‖u*‖` for smoothed estimates.
    pub smoothed_state: f64,
    /// Same for the covariance blocks, in the Frobenius norm.
    pub smoothed_covariance: f64,
    /// Filtered estimate of the last step against the oracle.
    pub filtered_latest: f64,
    /// Condition number of the weighted coefficient matrix; discrepancies of
    /// order `condition · ε` are roundoff.
    pub condition: f64,
}

impl OracleReport {
    pub fn max(&self) -> f64 {
        self.smoothed_state
            .max(self.smoothed_covariance)
            .max(self.filtered_latest)
    }
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    crate::linalg::norm(&d) / crate::linalg::norm(b).max(f64::MIN_POSITIVE)
}

/// Filters and smooths every step of the scenario (ignoring its command
/// list) and compares the results with the dense generalized least-squares
/// solution.
pub fn oracle_check(scenario: &Scenario) -> Result<OracleReport> {
    scenario.validate()?;
    let mut kf = Kalman::new();
    for (i, s) in scenario.steps.iter().enumerate() {
        kf.apply(s).map_err(|e| e.at_step(i))?;
    }
    let filtered = kf.estimate_latest()?;
    kf.smooth()?;
    let system = oracle::assemble(&scenario.steps)?;
    let gls = oracle::solve_gls(&system)?;
    let mut report = OracleReport {
        steps: scenario.steps.len(),
        smoothed_state: 0.0,
        smoothed_covariance: 0.0,
        filtered_latest: rel(&filtered.state, gls.estimates.last().unwrap()),
        condition: oracle::condition_number(&system),
    };
    for (i, (x, c)) in gls.estimates.iter().zip(&gls.covariances).enumerate() {
        let e = kf.estimate(i)?;
        report.smoothed_state = report.smoothed_state.max(rel(&e.state, x));
        let dc = e.covariance().sub(c).frobenius_norm() / c.frobenius_norm();
        report.smoothed_covariance = report.smoothed_covariance.max(dc);
    }
    Ok(report)
}
