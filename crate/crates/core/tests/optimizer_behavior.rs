//! Descent-loop behavior: toy convergence, recovery, monotonicity,
//! feasibility, determinism, and solve accounting.

mod common;

use common::FixtureOptions;
use weakspot_core::{
    dcvar_dt, run, tensor_grid, Element, LoadGroups, Mesh, OptConfig, ParamBox, Problem,
    RiskKind, RiskSpec, Sensor, SensorKind, SensorSet, StopReason, StrengthField,
};

/// Single bar with one sensor: misfit is a smooth 1-dof function of alpha
/// with its zero at the synthesizing truth.
fn one_bar_problem(alpha_true: f64) -> (Problem, f64) {
    let mesh = Mesh {
        dim: 2,
        coords: vec![0.0, 0.0, 1.0, 0.0],
        elements: vec![Element::TrussBar { nodes: [0, 1], area: 1e-4 }],
        dirichlet: vec![(0, 0), (0, 1), (1, 1)],
    };
    let material = common::steel_like();
    let mut f = vec![0.0; mesh.dof_count()];
    f[mesh.dof(1, 0)] = 2e3;

    let mut sensors = SensorSet::new(vec![Sensor {
        kind: SensorKind::Displacement,
        location: 1,
        component: 0,
        measured: 0.0,
        weight: 1.0,
    }]);
    let truth = StrengthField { values: vec![alpha_true] };
    let measured = common::solve_and_read(&mesh, &material, &truth, &f, &sensors);
    sensors.entries[0].measured = measured[0];
    sensors.entries[0].weight = 1.0 / (measured[0] * measured[0]);

    let groups = LoadGroups::single(&f);
    let grid = tensor_grid(&ParamBox::new(vec![[0.8, 1.2]]).unwrap(), 1).unwrap();
    let problem = Problem::new(
        mesh,
        material,
        sensors,
        f,
        groups,
        grid,
        RiskSpec::expectation(),
        0.0,
    )
    .unwrap();
    (problem, alpha_true)
}

#[test]
fn one_dof_problem_converges_to_known_minimizer() {
    let (problem, alpha_true) = one_bar_problem(0.5);
    let config = OptConfig { max_iters: 50, smoothing_steps: 0, ..OptConfig::default() };
    let result = run(&problem, &config).unwrap();
    assert!(
        (result.alpha.values[0] - alpha_true).abs() <= 1e-6,
        "final alpha {} vs truth {alpha_true} after {} iterations ({:?})",
        result.alpha.values[0],
        result.iterations,
        result.stop
    );
}

#[test]
fn step_with_zero_gradient_reports_stall() {
    // at the synthesizing truth the sensor gaps are exactly zero, so the
    // misfit gradient (and with it the direction) vanishes identically
    let (problem, alpha_true) = one_bar_problem(0.5);
    let truth = StrengthField { values: vec![alpha_true] };
    let evaluation = problem.evaluate(&truth).unwrap();
    let config = OptConfig { smoothing_steps: 0, ..OptConfig::default() };
    let outcome =
        weakspot_core::step(&problem, &truth, &evaluation, &config, None).unwrap();
    assert!(outcome.stalled);
    assert!(outcome.evaluation.is_none());
    assert_eq!(outcome.alpha.values, truth.values);
    assert_eq!(outcome.grad_norm, 0.0);
}

#[test]
fn zero_misfit_start_terminates_immediately() {
    // truth = all ones is also the initial iterate
    let (problem, _) = one_bar_problem(1.0);
    let result = run(&problem, &OptConfig::default()).unwrap();
    assert_eq!(result.iterations, 0);
    assert_eq!(result.stop, StopReason::ObjectiveFloor);
    assert!(result.objective <= 1e-16);
}

#[test]
fn weakened_bars_have_smallest_recovered_strength() {
    let weak = vec![(2usize, 0.3), (6usize, 0.2)];
    let (problem, _) = common::ten_bar_problem(FixtureOptions {
        weak: weak.clone(),
        ..FixtureOptions::default()
    });
    let config = OptConfig { smoothing_steps: 0, ..OptConfig::default() };
    let result = run(&problem, &config).unwrap();

    let mut order: Vec<usize> = (0..10).collect();
    order.sort_by(|&a, &b| result.alpha.values[a].total_cmp(&result.alpha.values[b]));
    let mut smallest = [order[0], order[1]];
    smallest.sort();
    assert_eq!(
        smallest,
        [2, 6],
        "recovered field {:?} (stop {:?} after {})",
        result.alpha.values,
        result.stop,
        result.iterations
    );
}

#[test]
fn descent_is_monotone_and_feasible() {
    let (problem, _) = common::ten_bar_problem(FixtureOptions::default());
    let config = OptConfig { max_iters: 40, smoothing_steps: 1, ..OptConfig::default() };
    let result = run(&problem, &config).unwrap();
    for pair in result.history.windows(2) {
        assert!(
            pair[1].objective <= pair[0].objective,
            "objective increased: {} -> {}",
            pair[0].objective,
            pair[1].objective
        );
    }
    for a in &result.alpha.values {
        assert!(*a >= config.alpha_floor && *a <= config.alpha_max);
    }
}

#[test]
fn histories_are_bit_identical_across_runs() {
    let make = || {
        let (problem, _) = common::ten_bar_problem(FixtureOptions {
            risk: RiskSpec::cvar(0.5).unwrap(),
            ..FixtureOptions::default()
        });
        let config = OptConfig { max_iters: 25, ..OptConfig::default() };
        run(&problem, &config).unwrap()
    };
    let a = make();
    let b = make();
    assert_eq!(a.history, b.history);
    assert_eq!(a.alpha.values, b.alpha.values);
}

#[test]
fn cvar_objective_dominates_expectation_on_same_samples() {
    let (problem, _) = common::ten_bar_problem(FixtureOptions::default());
    let alpha = StrengthField::uniform(10, 0.8);
    let eval = problem.evaluate(&alpha).unwrap();
    let expectation_value = eval.samples.mean();
    let (cvar_value, _) = weakspot_core::cvar(&eval.samples, 0.5);
    assert!(cvar_value >= expectation_value);
}

#[test]
fn four_groups_order_three_runs_81_solves() {
    let (problem, _) = common::ten_bar_problem(FixtureOptions {
        groups: 4,
        quadrature_order: 3,
        ..FixtureOptions::default()
    });
    let alpha = StrengthField::uniform(10, 1.0);
    let eval = problem.evaluate(&alpha).unwrap();
    assert_eq!(eval.forward_solves, 81);
    assert_eq!(eval.samples.len(), 81);
}

#[test]
fn threshold_is_optimal_after_evaluate() {
    let (problem, _) = common::ten_bar_problem(FixtureOptions {
        risk: RiskSpec::cvar(0.7).unwrap(),
        ..FixtureOptions::default()
    });
    assert_eq!(problem.risk.kind, RiskKind::Cvar);
    let alpha = StrengthField::uniform(10, 0.9);
    let eval = problem.evaluate(&alpha).unwrap();
    // left derivative (inclusive activation) <= 0 <= strict right derivative
    let left = dcvar_dt(&eval.samples, 0.7, eval.t_star);
    let strict_tail: f64 = eval
        .samples
        .values
        .iter()
        .zip(&eval.samples.weights)
        .filter(|(v, _)| **v > eval.t_star)
        .map(|(_, w)| w)
        .sum();
    let right = 1.0 - strict_tail / (1.0 - 0.7);
    assert!(left <= 1e-12, "left derivative {left}");
    assert!(right >= -1e-12, "right derivative {right}");
}
