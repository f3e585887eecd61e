//! Subcommand implementations, separated from argument parsing so tests
//! can drive them in-process.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use nalgebra::DVector;
use weakspot_core::{
    compute_strains, extract_measurements, factorize, fd_gradient, fd_gradient_fixed_t,
    max_relative_error, run, scale_loads, DofMap, ElementCache, RiskKind, RunResult, SensorSet,
    StopReason, StrengthField,
};

use crate::config::Experiment;
use crate::output::{self, Summary};
use crate::scenario::synthesize;

fn stop_label(stop: StopReason) -> &'static str {
    match stop {
        StopReason::Converged => "converged",
        StopReason::ObjectiveFloor => "objective_floor",
        StopReason::MaxIters => "max_iters",
        StopReason::Stalled => "stalled",
    }
}

fn risk_label(kind: RiskKind) -> &'static str {
    match kind {
        RiskKind::Expectation => "expectation",
        RiskKind::Cvar => "cvar",
    }
}

/// Sensor set for the inversion: measured values from the measurements
/// file when configured, otherwise synthesized from the scenario.
pub fn inversion_sensors(experiment: &Experiment) -> Result<SensorSet> {
    if let Some(path) = &experiment.measurements_path {
        let layout = output::read_measurements_csv(path)?;
        let measured: Vec<f64> = layout.iter().map(|s| s.measured).collect();
        let weights = experiment.weights_for(&measured)?;
        let entries = layout
            .into_iter()
            .zip(weights)
            .map(|(mut s, w)| {
                s.weight = w;
                s
            })
            .collect();
        Ok(SensorSet::new(entries))
    } else if experiment.scenario.is_some() {
        let measured = synthesize(experiment, experiment.seed)?;
        experiment.sensors_with(&measured)
    } else {
        bail!("config needs either `measurements` or a [scenario] to invert against")
    }
}

pub struct InvertOutcome {
    pub result: RunResult,
    pub summary: Summary,
    pub out_dir: PathBuf,
}

/// Full inversion: obtain measurements, run the descent, emit artifacts
/// (`alpha.vtk`, `alpha.csv`, `convergence.csv`, `summary.json`).
pub fn invert(experiment: &Experiment) -> Result<InvertOutcome> {
    let sensors = inversion_sensors(experiment)?;
    let problem = experiment.problem(sensors)?;
    let result = run(&problem, &experiment.opt)?;

    let out_dir = experiment.out_dir.clone();
    output::ensure_dir(&out_dir)?;
    let vtk = out_dir.join("alpha.vtk");
    let csv = out_dir.join("alpha.csv");
    let conv = out_dir.join("convergence.csv");
    let summary_path = out_dir.join("summary.json");

    output::write_vtk(&vtk, &experiment.mesh, "alpha", &result.alpha.values)?;
    output::write_alpha_csv(&csv, &experiment.mesh, &result.alpha)?;
    output::write_convergence_csv(&conv, &result.history)?;

    let summary = Summary {
        objective: result.objective,
        initial_objective: result.history.first().map_or(result.objective, |r| r.objective),
        t: result.t,
        iterations: result.iterations,
        stop: stop_label(result.stop).into(),
        risk: risk_label(experiment.risk.kind).into(),
        beta: (experiment.risk.kind == RiskKind::Cvar).then_some(experiment.risk.beta),
        quadrature_nodes: experiment.grid()?.len(),
        forward_solves: result.forward_solves,
        adjoint_solves: result.adjoint_solves,
        elements: experiment.mesh.elements.len(),
        sensors: experiment.sensor_layout.len(),
        seed: experiment.seed,
        artifacts: vec![vtk, csv, conv.clone(), summary_path.clone()],
    };
    output::write_summary_json(&summary_path, &summary)?;
    Ok(InvertOutcome { result, summary, out_dir })
}

/// Synthesize target measurements and write `measurements.csv`.
pub fn synthesize_cmd(experiment: &Experiment) -> Result<PathBuf> {
    let measured = synthesize(experiment, experiment.seed)?;
    let sensors = experiment.sensors_with(&measured)?;
    output::ensure_dir(&experiment.out_dir)?;
    let path = experiment.out_dir.join("measurements.csv");
    output::write_measurements_csv(&path, &sensors.entries)?;
    Ok(path)
}

pub struct ForwardOutcome {
    pub max_abs_displacement: f64,
    pub files: Vec<PathBuf>,
}

/// One forward solve at a fixed random-factor vector (all ones by
/// default), with the unweakened structure; writes the displacement,
/// strain, and sensor readout tables.
pub fn forward(experiment: &Experiment, xi: Option<Vec<f64>>) -> Result<ForwardOutcome> {
    let mesh = &experiment.mesh;
    let n_groups = experiment.load_groups.n_groups();
    let xi = xi.unwrap_or_else(|| vec![1.0; n_groups]);
    if xi.len() != n_groups {
        bail!("--xi needs {n_groups} components, got {}", xi.len());
    }
    if !experiment.param_box.contains(&xi) {
        bail!("xi {xi:?} lies outside the configured box");
    }

    let alpha = StrengthField::uniform(mesh.elements.len(), 1.0);
    let cache = ElementCache::build(mesh, &experiment.material)?;
    let factorization = factorize(&cache, &alpha, &DofMap::new(mesh))?;
    let mut f = scale_loads(&experiment.f_base, &experiment.load_groups, &xi)?;
    if experiment.delta_t != 0.0 {
        let f_th =
            weakspot_core::thermal_load(mesh, &experiment.material, &alpha, experiment.delta_t)?;
        for (fi, ti) in f.iter_mut().zip(f_th.iter()) {
            *fi += ti;
        }
    }
    let u = factorization.solve(&DVector::from_vec(f))?;
    let strains = compute_strains(mesh, &u)?;
    let layout = SensorSet::new(experiment.sensor_layout.clone());
    let predicted = extract_measurements(mesh, &u, &strains, &layout)?;

    output::ensure_dir(&experiment.out_dir)?;
    let u_path = experiment.out_dir.join("u.csv");
    let s_path = experiment.out_dir.join("strains.csv");
    let r_path = experiment.out_dir.join("sensors.csv");
    output::write_displacement_csv(&u_path, mesh, &u)?;
    output::write_strains_csv(&s_path, mesh, &strains)?;
    output::write_sensor_readout_csv(&r_path, &experiment.sensor_layout, &predicted)?;

    Ok(ForwardOutcome {
        max_abs_displacement: u.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        files: vec![u_path, s_path, r_path],
    })
}

#[derive(Debug)]
pub struct GradcheckOutcome {
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub skipped_elements: usize,
}

/// Adjoint gradient against central finite differences on a small mesh.
/// Evaluated at a fixed interior probe field so the check is independent
/// of how far a particular inversion happens to descend.
pub fn gradcheck(experiment: &Experiment, h_rel: f64) -> Result<GradcheckOutcome> {
    if !(h_rel > 0.0) || !h_rel.is_finite() {
        bail!("finite-difference step must be positive, got {h_rel}");
    }
    let n_elements = experiment.mesh.elements.len();
    if n_elements > 200 {
        bail!("gradcheck is limited to 200 elements, mesh has {n_elements}");
    }
    let sensors = inversion_sensors(experiment)?;
    let problem = experiment.problem(sensors)?;

    // deterministic quasi-random probe strictly inside the feasible box
    let golden = 0.618_033_988_749_894_9_f64;
    let alpha = StrengthField {
        values: (0..n_elements)
            .map(|e| 0.4 + 0.5 * ((e + 1) as f64 * golden).fract())
            .collect(),
    };

    let evaluation = problem.evaluate(&alpha)?;
    let gradient = problem.gradient(&evaluation)?;
    let tolerance = 1e-4;
    let (max_rel, skipped) = match problem.risk.kind {
        RiskKind::Expectation => {
            let reference = fd_gradient(&problem, &alpha, h_rel)?;
            (max_relative_error(&gradient.raw, &reference, None), 0)
        }
        RiskKind::Cvar => {
            let reference = fd_gradient_fixed_t(&problem, &alpha, h_rel, evaluation.t_star)?;
            let skipped = reference.activation_flips.iter().filter(|f| **f).count();
            if skipped == n_elements {
                bail!("every perturbation flipped a tail activation; decrease h");
            }
            (
                max_relative_error(
                    &gradient.raw,
                    &reference.values,
                    Some(&reference.activation_flips),
                ),
                skipped,
            )
        }
    };
    Ok(GradcheckOutcome {
        max_relative_error: max_rel,
        tolerance,
        pass: max_rel <= tolerance,
        skipped_elements: skipped,
    })
}

/// One inversion per beta value, each into `out_dir/beta_<value>/`.
pub fn sweep(experiment: &Experiment, betas: &[f64]) -> Result<Vec<InvertOutcome>> {
    if betas.is_empty() {
        bail!("sweep needs at least one beta");
    }
    let mut outcomes = Vec::with_capacity(betas.len());
    for &beta in betas {
        let risk = weakspot_core::RiskSpec::cvar(beta)
            .with_context(|| format!("sweep beta {beta}"))?;
        let mut sub = experiment.clone();
        sub.risk = risk;
        sub.out_dir = experiment.out_dir.join(format!("beta_{beta}"));
        outcomes.push(invert(&sub)?);
    }
    Ok(outcomes)
}
