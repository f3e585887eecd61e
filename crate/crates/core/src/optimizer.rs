//! Outer loop: projected steepest descent on the strength field with
//! Armijo backtracking, exact threshold updates inside every objective
//! evaluation, and a convergence history suitable for CSV logging.
//!
//! The descent direction is the negative smoothed gradient; the same
//! smoothed field enters the Armijo model, so the smoothing acts as the
//! scalar product the descent runs in. Iterates are clamped onto
//! `[alpha_floor, alpha_max]` after every trial step.

use crate::error::{Error, Result};
use crate::mesh::{StrengthField, DEFAULT_ALPHA_FLOOR};
use crate::problem::{Evaluation, Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct OptConfig {
    pub max_iters: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    /// The first trial of a line search never moves any component by more
    /// than this; later iterations warm-start from the last accepted step
    /// under the same cap.
    pub max_step_change: f64,
    pub alpha_floor: f64,
    pub alpha_max: f64,
    /// Relative objective decrease below which an iteration counts toward
    /// the stall streak.
    pub tol_rel_objective: f64,
    /// Consecutive low-progress iterations before stopping.
    pub stall_iters: usize,
    /// Absolute objective floor; reaching it stops immediately.
    pub tol_abs_objective: f64,
    pub max_backtracks: usize,
    pub smoothing_steps: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_step_change: 0.1,
            alpha_floor: DEFAULT_ALPHA_FLOOR,
            alpha_max: 1.0,
            tol_rel_objective: 1e-8,
            stall_iters: 10,
            tol_abs_objective: 1e-16,
            max_backtracks: 40,
            smoothing_steps: 4,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "backtrack factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Armijo constant must lie in (0, 1), got {}",
                self.armijo_c
            )));
        }
        if !(self.alpha_floor > 0.0 && self.alpha_floor <= self.alpha_max) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < alpha_floor <= alpha_max, got [{}, {}]",
                self.alpha_floor, self.alpha_max
            )));
        }
        Ok(())
    }
}

/// One line of the convergence log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub t: f64,
    /// Accepted step length that produced this iterate (0 for the start).
    pub step: f64,
    /// Norm of the smoothed gradient at this iterate (0 when not computed).
    pub grad_norm: f64,
    pub backtracks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Relative progress stayed below tolerance for the configured streak.
    Converged,
    /// Objective hit the absolute floor.
    ObjectiveFloor,
    MaxIters,
    /// Zero direction or exhausted line search.
    Stalled,
}

pub struct RunResult {
    pub alpha: StrengthField,
    pub objective: f64,
    pub t: f64,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
    pub stop: StopReason,
    pub forward_solves: usize,
    pub adjoint_solves: usize,
}

/// Outcome of a single descent step from a given iterate.
pub struct StepResult {
    pub alpha: StrengthField,
    pub evaluation: Option<Evaluation>,
    pub step_length: f64,
    pub backtracks: usize,
    /// Smoothed gradient norm at the incoming iterate.
    pub grad_norm: f64,
    pub adjoint_solves: usize,
    pub forward_solves: usize,
    /// True when the direction vanished and the iterate is unchanged.
    pub stalled: bool,
}

fn clamp_trial(
    alpha: &StrengthField,
    direction: &[f64],
    s: f64,
    config: &OptConfig,
) -> StrengthField {
    let values = alpha
        .values
        .iter()
        .zip(direction)
        .map(|(a, d)| (a + s * d).clamp(config.alpha_floor, config.alpha_max))
        .collect();
    StrengthField { values }
}

/// One projected-descent step with Armijo backtracking. The threshold `t`
/// is re-minimized inside every trial evaluation. Errors with
/// [`Error::LineSearchFailed`] when no acceptable step exists within the
/// backtrack budget.
pub fn step(
    problem: &Problem,
    alpha: &StrengthField,
    evaluation: &Evaluation,
    config: &OptConfig,
    initial_step: Option<f64>,
) -> Result<StepResult> {
    config.validate()?;
    let gradient = problem.gradient(evaluation)?;
    let smoothed = problem.smooth(&gradient.raw, config.smoothing_steps);
    let grad_norm = smoothed.iter().map(|g| g * g).sum::<f64>().sqrt();
    let max_component = smoothed.iter().fold(0.0f64, |m, g| m.max(g.abs()));

    if max_component == 0.0 {
        return Ok(StepResult {
            alpha: alpha.clone(),
            evaluation: None,
            step_length: 0.0,
            backtracks: 0,
            grad_norm,
            adjoint_solves: gradient.adjoint_solves,
            forward_solves: 0,
            stalled: true,
        });
    }

    let direction: Vec<f64> = smoothed.iter().map(|g| -g).collect();
    let cap = config.max_step_change / max_component;
    let mut s = initial_step.map_or(cap, |s0| s0.min(cap));
    let mut forward_solves = 0;

    for backtracks in 0..=config.max_backtracks {
        let trial = clamp_trial(alpha, &direction, s, config);
        if trial.values != alpha.values {
            let predicted: f64 = smoothed
                .iter()
                .zip(trial.values.iter().zip(&alpha.values))
                .map(|(g, (t, a))| g * (t - a))
                .sum();
            let trial_eval = problem.evaluate(&trial)?;
            forward_solves += trial_eval.forward_solves;
            if trial_eval.objective <= evaluation.objective + config.armijo_c * predicted {
                return Ok(StepResult {
                    alpha: trial,
                    evaluation: Some(trial_eval),
                    step_length: s,
                    backtracks,
                    grad_norm,
                    adjoint_solves: gradient.adjoint_solves,
                    forward_solves,
                    stalled: false,
                });
            }
        }
        s *= config.backtrack_factor;
    }
    Err(Error::LineSearchFailed(config.max_backtracks))
}

/// Full descent from a uniform strength field of ones. Runs until the
/// objective floor, a converged stall streak, an exhausted line search,
/// or the iteration cap.
pub fn run(problem: &Problem, config: &OptConfig) -> Result<RunResult> {
    run_from(problem, config, StrengthField::uniform(problem.element_count(), 1.0))
}

/// [`run`] from an explicit starting field.
pub fn run_from(
    problem: &Problem,
    config: &OptConfig,
    initial: StrengthField,
) -> Result<RunResult> {
    config.validate()?;
    let mut alpha = initial;
    alpha.clamp(config.alpha_floor, config.alpha_max);

    let mut evaluation = problem.evaluate(&alpha)?;
    let mut forward_solves = evaluation.forward_solves;
    let mut adjoint_solves = 0;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut iteration = 0;
    let mut last_step = 0.0;
    let mut last_backtracks = 0;
    let mut warm_start: Option<f64> = None;
    let mut stall_streak = 0;

    let record = |grad_norm: f64,
                  iteration: usize,
                  evaluation: &Evaluation,
                  last_step: f64,
                  last_backtracks: usize| IterationRecord {
        iteration,
        objective: evaluation.objective,
        t: evaluation.t_star,
        step: last_step,
        grad_norm,
        backtracks: last_backtracks,
    };

    let stop = loop {
        if evaluation.objective <= config.tol_abs_objective {
            history.push(record(0.0, iteration, &evaluation, last_step, last_backtracks));
            break StopReason::ObjectiveFloor;
        }
        if iteration >= config.max_iters {
            history.push(record(0.0, iteration, &evaluation, last_step, last_backtracks));
            break StopReason::MaxIters;
        }

        let step_result = match step(problem, &alpha, &evaluation, config, warm_start) {
            Ok(r) => r,
            Err(Error::LineSearchFailed(_)) => {
                // stationarity up to the activation nonsmoothness;
                // log the iterate and stop
                history.push(record(0.0, iteration, &evaluation, last_step, last_backtracks));
                break StopReason::Stalled;
            }
            Err(e) => return Err(e),
        };

        history.push(record(
            step_result.grad_norm,
            iteration,
            &evaluation,
            last_step,
            last_backtracks,
        ));
        adjoint_solves += step_result.adjoint_solves;
        forward_solves += step_result.forward_solves;
        if step_result.stalled {
            break StopReason::Stalled;
        }

        let previous = evaluation.objective;
        alpha = step_result.alpha;
        evaluation = step_result.evaluation.expect("accepted step carries its evaluation");
        last_step = step_result.step_length;
        last_backtracks = step_result.backtracks;
        warm_start = Some(step_result.step_length / config.backtrack_factor);
        iteration += 1;

        let decrease = previous - evaluation.objective;
        if decrease <= config.tol_rel_objective * previous.abs() {
            stall_streak += 1;
        } else {
            stall_streak = 0;
        }
        if stall_streak >= config.stall_iters {
            history.push(record(0.0, iteration, &evaluation, last_step, last_backtracks));
            break StopReason::Converged;
        }
    };

    Ok(RunResult {
        objective: evaluation.objective,
        t: evaluation.t_star,
        iterations: iteration,
        alpha,
        history,
        stop,
        forward_solves,
        adjoint_solves,
    })
}
