//! Risk measures on discretely sampled random variables.
//!
//! CVaR is evaluated through the Rockafellar-Uryasev form
//! `CVaR_beta[X] = inf_t { t + E[(X - t)_+] / (1 - beta) }`. On a discrete
//! sample the infimum is attained at a weighted beta-quantile, so the inner
//! minimization is solved exactly by sorting; no gradient steps on `t` are
//! ever taken. The derivative in `t` is kept for diagnostics.

use crate::error::{Error, Result};

/// `max(x, 0)`.
#[inline]
pub fn plus(x: f64) -> f64 {
    x.max(0.0)
}

/// Generalized derivative of the plus-function: 1 for `x >= 0`, else 0.
/// The tie at zero counts as active.
#[inline]
pub fn plus_prime(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// A random variable sampled on a quadrature grid: values paired with
/// positive weights that sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRV {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SampledRV {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: values.len(),
            });
        }
        Ok(Self { values, weights })
    }

    pub fn equal_weight(values: Vec<f64>) -> Self {
        let w = 1.0 / values.len() as f64;
        let weights = vec![w; values.len()];
        Self { values, weights }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

fn check_beta(beta: f64) {
    assert!(
        beta > 0.0 && beta < 1.0,
        "beta must lie strictly inside (0, 1), got {beta}"
    );
}

/// Rockafellar-Uryasev objective at a fixed threshold `t`; convex in `t`.
pub fn cvar_at_t(rv: &SampledRV, beta: f64, t: f64) -> f64 {
    check_beta(beta);
    let tail: f64 = rv
        .values
        .iter()
        .zip(&rv.weights)
        .map(|(x, w)| w * plus(x - t))
        .sum();
    t + tail / (1.0 - beta)
}

/// Weighted beta-quantile: the smallest sample value whose cumulative
/// weight reaches `beta`. This is the smallest minimizer of `cvar_at_t`.
pub fn optimal_t(rv: &SampledRV, beta: f64) -> f64 {
    check_beta(beta);
    assert!(!rv.is_empty(), "cannot take a quantile of an empty sample");
    let mut order: Vec<usize> = (0..rv.len()).collect();
    order.sort_by(|&a, &b| rv.values[a].total_cmp(&rv.values[b]));
    let mut cum = 0.0;
    for &k in &order {
        cum += rv.weights[k];
        if cum >= beta {
            return rv.values[k];
        }
    }
    rv.values[*order.last().unwrap()]
}

/// CVaR with the inner minimization solved exactly; returns the risk value
/// and the minimizing threshold.
pub fn cvar(rv: &SampledRV, beta: f64) -> (f64, f64) {
    let t_star = optimal_t(rv, beta);
    (cvar_at_t(rv, beta, t_star), t_star)
}

/// Derivative of the Rockafellar-Uryasev objective in `t`:
/// `1 - E[(X - t)_+'] / (1 - beta)`.
pub fn dcvar_dt(rv: &SampledRV, beta: f64, t: f64) -> f64 {
    check_beta(beta);
    let active: f64 = rv
        .values
        .iter()
        .zip(&rv.weights)
        .map(|(x, w)| w * plus_prime(x - t))
        .sum();
    1.0 - active / (1.0 - beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskKind {
    Expectation,
    Cvar,
}

/// Which scalarization the optimizer minimizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSpec {
    pub kind: RiskKind,
    pub beta: f64,
}

impl RiskSpec {
    pub fn expectation() -> Self {
        Self { kind: RiskKind::Expectation, beta: 0.0 }
    }

    pub fn cvar(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must lie strictly inside (0, 1), got {beta}"
            )));
        }
        Ok(Self { kind: RiskKind::Cvar, beta })
    }

    /// Scalarize a sampled objective; returns `(value, t)` where `t` is the
    /// minimizing threshold for CVaR and 0 for plain expectation.
    pub fn scalarize(&self, rv: &SampledRV) -> (f64, f64) {
        match self.kind {
            RiskKind::Expectation => (rv.mean(), 0.0),
            RiskKind::Cvar => cvar(rv, self.beta),
        }
    }

    /// Multiplier applied to the misfit gradient on the adjoint right-hand
    /// side for one sample; zero means the adjoint solve can be skipped.
    pub fn adjoint_scale(&self, sample_value: f64, t: f64) -> f64 {
        match self.kind {
            RiskKind::Expectation => -1.0,
            RiskKind::Cvar => -plus_prime(sample_value - t) / (1.0 - self.beta),
        }
    }
}
