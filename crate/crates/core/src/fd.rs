//! Central finite-difference reference gradients for validating the
//! adjoint path. Deliberately dumb: two full objective evaluations per
//! element, no state reuse beyond what `Problem::evaluate` already does.

use crate::error::Result;
use crate::mesh::StrengthField;
use crate::problem::Problem;
use crate::risk::{cvar_at_t, plus_prime, RiskKind};

/// Reference gradient against a frozen CVaR threshold, with bookkeeping on
/// which perturbations changed a tail activation.
pub struct FdGradient {
    pub values: Vec<f64>,
    /// True where one of the two perturbed evaluations flipped some
    /// sample's tail activation relative to the other; the one-sided
    /// derivative there need not match the adjoint value.
    pub activation_flips: Vec<bool>,
}

/// Central differences of the full scalarized objective, threshold
/// re-minimized at every evaluation. Step per element is `h_rel * alpha_e`.
pub fn fd_gradient(problem: &Problem, alpha: &StrengthField, h_rel: f64) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(alpha.len());
    for e in 0..alpha.len() {
        let h = h_rel * alpha.values[e];
        let mut plus = alpha.clone();
        plus.values[e] += h;
        let mut minus = alpha.clone();
        minus.values[e] -= h;
        let obj_plus = problem.evaluate(&plus)?.objective;
        let obj_minus = problem.evaluate(&minus)?.objective;
        g.push((obj_plus - obj_minus) / (2.0 * h));
    }
    Ok(g)
}

/// Central differences of the objective at a frozen CVaR threshold. For
/// the expectation risk this coincides with [`fd_gradient`].
///
/// The adjoint evaluates tail activations inclusively at the minimizing
/// threshold, which is itself a sample value sitting exactly on the kink
/// of `(x - t)_+`; differentiating through that point is meaningless. The
/// threshold is therefore frozen strictly between the quantile sample and
/// the next sample below it: the strict active set at the frozen value
/// equals the adjoint's inclusive active set at `t_star`, and the frozen
/// objective is smooth around the base point. Perturbations that still
/// push some sample across the frozen threshold are reported and should be
/// skipped by the comparison.
pub fn fd_gradient_fixed_t(
    problem: &Problem,
    alpha: &StrengthField,
    h_rel: f64,
    t_star: f64,
) -> Result<FdGradient> {
    let base = problem.evaluate(alpha)?;
    let t_frozen = frozen_threshold(&base.samples.values, t_star);
    let mut values = Vec::with_capacity(alpha.len());
    let mut activation_flips = Vec::with_capacity(alpha.len());
    for e in 0..alpha.len() {
        let h = h_rel * alpha.values[e];
        let mut plus = alpha.clone();
        plus.values[e] += h;
        let mut minus = alpha.clone();
        minus.values[e] -= h;
        let eval_plus = problem.evaluate(&plus)?;
        let eval_minus = problem.evaluate(&minus)?;
        let (obj_plus, obj_minus, flipped) = match problem.risk.kind {
            RiskKind::Expectation => {
                (eval_plus.samples.mean(), eval_minus.samples.mean(), false)
            }
            RiskKind::Cvar => {
                let beta = problem.risk.beta;
                let flipped = eval_plus
                    .samples
                    .values
                    .iter()
                    .zip(&eval_minus.samples.values)
                    .any(|(p, m)| plus_prime(p - t_frozen) != plus_prime(m - t_frozen));
                (
                    cvar_at_t(&eval_plus.samples, beta, t_frozen),
                    cvar_at_t(&eval_minus.samples, beta, t_frozen),
                    flipped,
                )
            }
        };
        values.push((obj_plus - obj_minus) / (2.0 * h));
        activation_flips.push(flipped);
    }
    Ok(FdGradient { values, activation_flips })
}

/// A threshold below `t_star` but above every sample smaller than it, so
/// strict comparison against it reproduces the inclusive active set.
fn frozen_threshold(samples: &[f64], t_star: f64) -> f64 {
    let below = samples.iter().filter(|v| **v < t_star).fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    if below.is_finite() {
        0.5 * (below + t_star)
    } else {
        t_star - 0.5 * t_star.abs().max(1.0)
    }
}

/// Max relative disagreement between two gradients, elementwise against the
/// reference, skipping flagged entries. Tiny reference entries are floored
/// at `1e-12` of the reference max-norm so a near-zero component cannot
/// dominate the report.
pub fn max_relative_error(adjoint: &[f64], reference: &[f64], skip: Option<&[bool]>) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let floor = 1e-12 * scale.max(f64::MIN_POSITIVE);
    adjoint
        .iter()
        .zip(reference)
        .enumerate()
        .filter(|(e, _)| skip.is_none_or(|s| !s[*e]))
        .map(|(_, (a, r))| (a - r).abs() / r.abs().max(floor))
        .fold(0.0, f64::max)
}
