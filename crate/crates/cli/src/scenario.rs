//! Synthetic target generation: solve the forward problem with the
//! scenario's weakened strength field and read the sensors.
//!
//! Deterministic modes use a single solve. The per-sensor-draw mode gives
//! every sensor its own uniform draw of the random load factors and its
//! own solve, producing mutually inconsistent readings of the same
//! structure; this is how measurement uncertainty enters the experiments.

use anyhow::{bail, Context, Result};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakspot_core::{
    compute_strains, extract_measurements, factorize, scale_loads, thermal_load, DofMap,
    ElementCache, SensorSet, StrengthField,
};

use crate::config::{Experiment, Scenario, ScenarioMode};

/// Measured sensor values for the experiment's scenario, in sensor-layout
/// order. All randomness comes from the seed.
pub fn synthesize(experiment: &Experiment, seed: u64) -> Result<Vec<f64>> {
    let scenario = experiment
        .scenario
        .as_ref()
        .context("config has no [scenario]; nothing to synthesize")?;
    let mesh = &experiment.mesh;
    let target_alpha = scenario.target_alpha(mesh.elements.len());

    let cache = ElementCache::build(mesh, &experiment.material)?;
    let dof_map = DofMap::new(mesh);
    let factorization = factorize(&cache, &target_alpha, &dof_map)?;
    let layout = SensorSet::new(experiment.sensor_layout.clone());

    let f_target = target_load(experiment, scenario, &target_alpha)?;

    let read_all = |f: &[f64]| -> Result<Vec<f64>> {
        let u = factorization.solve(&DVector::from_vec(f.to_vec()))?;
        let strains = compute_strains(mesh, &u)?;
        Ok(extract_measurements(mesh, &u, &strains, &layout)?)
    };

    match scenario.mode {
        ScenarioMode::Deterministic | ScenarioMode::LinearRamp | ScenarioMode::Thermal => {
            read_all(&f_target)
        }
        ScenarioMode::PerSensorDraw => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let intervals = experiment.param_box.intervals();
            let mut measured = Vec::with_capacity(layout.len());
            for j in 0..layout.len() {
                let xi: Vec<f64> = intervals
                    .iter()
                    .map(|[a, b]| rng.random_range(*a..*b))
                    .collect();
                let f = scale_loads(&f_target, &experiment.load_groups, &xi)?;
                let readings = read_all(&f)?;
                measured.push(readings[j]);
            }
            Ok(measured)
        }
    }
}

/// The load the target structure is solved under. Only the scenario knows
/// it; the inversion keeps assuming the configured base load.
fn target_load(
    experiment: &Experiment,
    scenario: &Scenario,
    target_alpha: &StrengthField,
) -> Result<Vec<f64>> {
    let mesh = &experiment.mesh;
    let mut f = vec![0.0; mesh.dof_count()];
    match scenario.mode {
        ScenarioMode::LinearRamp => {
            let [a, b] = scenario.ramp.context("linear_ramp scenario lost its ramp")?;
            for &n in &experiment.loaded_nodes {
                let magnitude = a + b * mesh.node_coord(n)[0];
                for (c, d) in experiment.load_direction.iter().enumerate() {
                    f[mesh.dof(n, c)] += magnitude * d;
                }
            }
        }
        _ => {
            let magnitude = scenario.load_magnitude.unwrap_or(experiment.load_magnitude);
            for &n in &experiment.loaded_nodes {
                for (c, d) in experiment.load_direction.iter().enumerate() {
                    f[mesh.dof(n, c)] += magnitude * d;
                }
            }
        }
    }
    if scenario.mode == ScenarioMode::Thermal {
        let delta_t = scenario.delta_t.context("thermal scenario lost its delta_t")?;
        if experiment.material.alpha_exp == 0.0 {
            bail!("thermal scenario needs material.alpha_exp != 0");
        }
        let f_th = thermal_load(mesh, &experiment.material, target_alpha, delta_t)?;
        for (fi, ti) in f.iter_mut().zip(f_th.iter()) {
            *fi += ti;
        }
    }
    Ok(f)
}
