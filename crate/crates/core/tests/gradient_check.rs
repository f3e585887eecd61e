//! Adjoint gradients against central finite differences of the objective.

mod common;

use common::FixtureOptions;
use weakspot_core::{
    fd_gradient, fd_gradient_fixed_t, max_relative_error, RiskSpec, StrengthField,
};

#[test]
fn expectation_gradient_matches_fd_on_ten_bar_truss() {
    let (problem, _) = common::ten_bar_problem(FixtureOptions::default());
    let alpha = StrengthField::uniform(10, 1.0);
    let eval = problem.evaluate(&alpha).unwrap();
    let grad = problem.gradient(&eval).unwrap();
    let reference = fd_gradient(&problem, &alpha, 1e-6).unwrap();
    let err = max_relative_error(&grad.raw, &reference, None);
    assert!(err <= 1e-5, "max relative error {err:.3e}");
}

#[test]
fn expectation_gradient_matches_fd_away_from_ones() {
    let (problem, _) = common::ten_bar_problem(FixtureOptions::default());
    let alpha = StrengthField {
        values: vec![0.9, 1.0, 0.55, 0.8, 1.0, 0.3, 0.95, 0.7, 1.0, 0.6],
    };
    let eval = problem.evaluate(&alpha).unwrap();
    let grad = problem.gradient(&eval).unwrap();
    let reference = fd_gradient(&problem, &alpha, 1e-6).unwrap();
    let err = max_relative_error(&grad.raw, &reference, None);
    assert!(err <= 1e-5, "max relative error {err:.3e}");
}

#[test]
fn cvar_gradient_matches_fd_at_frozen_threshold() {
    let (problem, _) = common::ten_bar_problem(FixtureOptions {
        risk: RiskSpec::cvar(0.5).unwrap(),
        ..FixtureOptions::default()
    });
    let alpha = StrengthField {
        values: vec![1.0, 0.85, 0.6, 1.0, 0.75, 0.4, 1.0, 0.9, 0.65, 1.0],
    };
    let eval = problem.evaluate(&alpha).unwrap();
    let grad = problem.gradient(&eval).unwrap();
    let reference = fd_gradient_fixed_t(&problem, &alpha, 1e-6, eval.t_star).unwrap();
    assert!(
        reference.activation_flips.iter().any(|f| !f),
        "every perturbation flipped an activation; fixture too fragile"
    );
    let err =
        max_relative_error(&grad.raw, &reference.values, Some(&reference.activation_flips));
    assert!(err <= 1e-5, "max relative error {err:.3e}");
}

#[test]
fn thermal_inversion_gradient_matches_fd() {
    // rebuild the default fixture with a thermal load folded into the
    // inversion; the gradient must account for the strength-weighted
    // thermal force term
    let (base, _) = common::ten_bar_problem(FixtureOptions::default());
    let problem = weakspot_core::Problem::new(
        base.mesh.clone(),
        base.material,
        base.sensors.clone(),
        base.f_base.clone(),
        base.load_groups.clone(),
        base.grid.clone(),
        RiskSpec::expectation(),
        -25.0,
    )
    .unwrap();
    let alpha = StrengthField {
        values: vec![0.8, 1.0, 0.5, 0.9, 1.0, 0.35, 1.0, 0.75, 0.95, 0.6],
    };
    let eval = problem.evaluate(&alpha).unwrap();
    let grad = problem.gradient(&eval).unwrap();
    let reference = fd_gradient(&problem, &alpha, 1e-6).unwrap();
    let err = max_relative_error(&grad.raw, &reference, None);
    assert!(err <= 1e-5, "max relative error {err:.3e}");
}

#[test]
fn adjoint_solve_count_tracks_active_tail() {
    let (problem, _) = common::ten_bar_problem(FixtureOptions {
        risk: RiskSpec::cvar(0.9).unwrap(),
        ..FixtureOptions::default()
    });
    let alpha = StrengthField {
        values: vec![1.0, 0.85, 0.6, 1.0, 0.75, 0.4, 1.0, 0.9, 0.65, 1.0],
    };
    let eval = problem.evaluate(&alpha).unwrap();
    let grad = problem.gradient(&eval).unwrap();
    let active = eval
        .samples
        .values
        .iter()
        .filter(|v| **v >= eval.t_star)
        .count();
    assert_eq!(grad.adjoint_solves, active);
    assert!(active < eval.samples.len(), "beta = 0.9 should deactivate most samples");
}
