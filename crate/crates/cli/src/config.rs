//! Experiment configuration. One TOML file fully specifies a run: mesh,
//! material, loads, random model, risk measure, optimizer settings, sensor
//! layout, and (optionally) the synthetic target scenario.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use weakspot_core::{
    tensor_grid_with_cap, LoadGroups, Material, Mesh, OptConfig, ParamBox, Problem,
    QuadratureGrid, RiskSpec, Sensor, SensorKind, SensorSet, StrengthField,
};

use crate::meshgen;

// ---------------------------------------------------------------------------
// Raw file schema
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    mesh: RawMesh,
    material: RawMaterial,
    load: RawLoad,
    #[serde(default)]
    load_groups: RawLoadGroups,
    xi: RawXi,
    #[serde(default)]
    quadrature: RawQuadrature,
    #[serde(default)]
    risk: RawRisk,
    #[serde(default)]
    weights: RawWeights,
    #[serde(default)]
    smoothing: RawSmoothing,
    #[serde(default)]
    optimizer: RawOptimizer,
    #[serde(default)]
    sensors: RawSensors,
    scenario: Option<RawScenario>,
    measurements: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    file: Option<PathBuf>,
    generator: Option<String>,
    nx: Option<usize>,
    ny: Option<usize>,
    width: Option<f64>,
    height: Option<f64>,
    thickness: Option<f64>,
    bays: Option<usize>,
    bay_length: Option<f64>,
    panel_height: Option<f64>,
    area: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    young_modulus: f64,
    poisson: f64,
    #[serde(default)]
    density: f64,
    #[serde(default)]
    alpha_exp: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoad {
    boundary: Option<String>,
    nodes: Option<Vec<usize>>,
    direction: Vec<f64>,
    magnitude: f64,
    #[serde(default)]
    delta_t: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLoadGroups {
    direction: Option<String>,
    count: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawXi {
    intervals: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    order: Option<usize>,
    node_cap: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRisk {
    kind: Option<String>,
    beta: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    mode: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSmoothing {
    steps: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    max_iters: Option<usize>,
    armijo_c: Option<f64>,
    backtrack_factor: Option<f64>,
    max_step_change: Option<f64>,
    eps_alpha: Option<f64>,
    alpha_max: Option<f64>,
    tol_rel_objective: Option<f64>,
    stall_iters: Option<usize>,
    tol_abs_objective: Option<f64>,
    max_backtracks: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSensors {
    placement: Option<String>,
    stride: Option<usize>,
    components: Option<Vec<usize>>,
    explicit: Option<Vec<RawSensor>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    kind: String,
    location: usize,
    component: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    mode: String,
    #[serde(default)]
    weak: Vec<RawWeak>,
    load_magnitude: Option<f64>,
    ramp: Option<[f64; 2]>,
    delta_t: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeak {
    elements: Option<Vec<usize>>,
    region: Option<Vec<f64>>,
    alpha: f64,
}

// ---------------------------------------------------------------------------
// Validated experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightsMode {
    Local,
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioMode {
    Deterministic,
    PerSensorDraw,
    LinearRamp,
    Thermal,
}

#[derive(Debug, Clone)]
pub struct WeakPatch {
    pub elements: Vec<usize>,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub mode: ScenarioMode,
    pub weak: Vec<WeakPatch>,
    pub load_magnitude: Option<f64>,
    pub ramp: Option<[f64; 2]>,
    pub delta_t: Option<f64>,
}

impl Scenario {
    /// The ground-truth strength field the scenario weakens.
    pub fn target_alpha(&self, n_elements: usize) -> StrengthField {
        let mut alpha = StrengthField::uniform(n_elements, 1.0);
        for patch in &self.weak {
            for &e in &patch.elements {
                alpha.values[e] = patch.alpha;
            }
        }
        alpha
    }

    /// Union of all weakened element ids.
    pub fn weak_elements(&self) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.weak.iter().flat_map(|p| p.elements.iter().copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub mesh: Mesh,
    pub node_sets: BTreeMap<String, Vec<usize>>,
    pub material: Material,
    /// Assumed nodal load before random scaling.
    pub f_base: Vec<f64>,
    /// The nodes the load is applied to, and its per-node vector, kept so
    /// scenarios can rebuild target loads with modified magnitudes.
    pub loaded_nodes: Vec<usize>,
    pub load_direction: Vec<f64>,
    pub load_magnitude: f64,
    pub load_groups: LoadGroups,
    pub param_box: ParamBox,
    pub quadrature_order: usize,
    pub grid_cap: usize,
    pub risk: RiskSpec,
    pub weights_mode: WeightsMode,
    pub opt: OptConfig,
    /// Sensor layout with placeholder measurements.
    pub sensor_layout: Vec<Sensor>,
    /// Thermal load active during inversion.
    pub delta_t: f64,
    pub scenario: Option<Scenario>,
    pub measurements_path: Option<PathBuf>,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).context("parsing config")?;
        build_experiment(raw, base_dir)
    }

    pub fn grid(&self) -> Result<QuadratureGrid> {
        Ok(tensor_grid_with_cap(&self.param_box, self.quadrature_order, self.grid_cap)?)
    }

    /// Misfit weights for a set of measured values, per the configured mode.
    pub fn weights_for(&self, measured: &[f64]) -> Result<Vec<f64>> {
        match self.weights_mode {
            WeightsMode::Local => Ok(weakspot_core::local_weights(measured)?),
            WeightsMode::Unit => Ok(vec![1.0; measured.len()]),
        }
    }

    /// Sensor set from the layout plus measured values, weighted per config.
    pub fn sensors_with(&self, measured: &[f64]) -> Result<SensorSet> {
        if measured.len() != self.sensor_layout.len() {
            bail!(
                "got {} measured values for {} sensors",
                measured.len(),
                self.sensor_layout.len()
            );
        }
        let weights = self.weights_for(measured)?;
        Ok(SensorSet::new(
            self.sensor_layout
                .iter()
                .zip(measured.iter().zip(&weights))
                .map(|(s, (m, w))| Sensor { measured: *m, weight: *w, ..s.clone() })
                .collect(),
        ))
    }

    /// Assemble the inverse problem around a fully measured sensor set.
    pub fn problem(&self, sensors: SensorSet) -> Result<Problem> {
        Ok(Problem::new(
            self.mesh.clone(),
            self.material,
            sensors,
            self.f_base.clone(),
            self.load_groups.clone(),
            self.grid()?,
            self.risk,
            self.delta_t,
        )?)
    }
}

fn build_experiment(raw: RawConfig, base_dir: &Path) -> Result<Experiment> {
    // mesh: from file or generator
    let (mesh, node_sets, file_sensors) = build_mesh(&raw.mesh, base_dir)?;
    mesh.validate()?;

    let material = Material {
        young_modulus: raw.material.young_modulus,
        poisson: raw.material.poisson,
        density: raw.material.density,
        alpha_exp: raw.material.alpha_exp,
    };
    material.validate()?;

    // assumed load
    if raw.load.direction.len() != mesh.dim {
        bail!(
            "load.direction has {} components for a {}-D mesh",
            raw.load.direction.len(),
            mesh.dim
        );
    }
    let loaded_nodes = resolve_nodes(
        raw.load.nodes.as_deref(),
        raw.load.boundary.as_deref(),
        &node_sets,
        &mesh,
        "load",
    )?;
    let mut f_base = vec![0.0; mesh.dof_count()];
    for &n in &loaded_nodes {
        for (c, d) in raw.load.direction.iter().enumerate() {
            f_base[mesh.dof(n, c)] += raw.load.magnitude * d;
        }
    }

    // load groups
    let group_count = raw.load_groups.count.unwrap_or(1);
    let load_groups = if group_count <= 1 {
        LoadGroups::single(&f_base)
    } else {
        let axis = match raw.load_groups.direction.as_deref().unwrap_or("x") {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            other => bail!("unknown load group direction `{other}`"),
        };
        LoadGroups::uniform_width(&mesh, &f_base, axis, group_count)?
    };

    // random box: a single interval is replicated across all groups
    let mut intervals = raw.xi.intervals.clone();
    if intervals.len() == 1 && group_count > 1 {
        intervals = vec![intervals[0]; group_count];
    }
    if intervals.len() != group_count {
        bail!(
            "xi.intervals has {} entries but load_groups.count is {group_count}",
            intervals.len()
        );
    }
    let param_box = ParamBox::new(intervals)?;

    let risk = match raw.risk.kind.as_deref().unwrap_or("expectation") {
        "expectation" => RiskSpec::expectation(),
        "cvar" => {
            let beta = raw.risk.beta.context("risk.kind = \"cvar\" requires risk.beta")?;
            RiskSpec::cvar(beta)?
        }
        other => bail!("unknown risk kind `{other}`"),
    };

    let weights_mode = match raw.weights.mode.as_deref().unwrap_or("local") {
        "local" => WeightsMode::Local,
        "unit" => WeightsMode::Unit,
        other => bail!("unknown weights mode `{other}`"),
    };

    let defaults = OptConfig::default();
    let opt = OptConfig {
        max_iters: raw.optimizer.max_iters.unwrap_or(defaults.max_iters),
        armijo_c: raw.optimizer.armijo_c.unwrap_or(defaults.armijo_c),
        backtrack_factor: raw
            .optimizer
            .backtrack_factor
            .unwrap_or(defaults.backtrack_factor),
        max_step_change: raw
            .optimizer
            .max_step_change
            .unwrap_or(defaults.max_step_change),
        alpha_floor: raw.optimizer.eps_alpha.unwrap_or(defaults.alpha_floor),
        alpha_max: raw.optimizer.alpha_max.unwrap_or(defaults.alpha_max),
        tol_rel_objective: raw
            .optimizer
            .tol_rel_objective
            .unwrap_or(defaults.tol_rel_objective),
        stall_iters: raw.optimizer.stall_iters.unwrap_or(defaults.stall_iters),
        tol_abs_objective: raw
            .optimizer
            .tol_abs_objective
            .unwrap_or(defaults.tol_abs_objective),
        max_backtracks: raw.optimizer.max_backtracks.unwrap_or(defaults.max_backtracks),
        smoothing_steps: raw.smoothing.steps.unwrap_or(defaults.smoothing_steps),
    };
    opt.validate()?;

    let sensor_layout =
        build_sensor_layout(&raw.sensors, &mesh, &node_sets, file_sensors)?;
    if sensor_layout.is_empty() {
        bail!("no sensors configured");
    }
    SensorSet::new(sensor_layout.clone()).validate(&mesh)?;

    let scenario = raw.scenario.map(|s| build_scenario(s, &mesh)).transpose()?;

    Ok(Experiment {
        material,
        f_base,
        loaded_nodes,
        load_direction: raw.load.direction.clone(),
        load_magnitude: raw.load.magnitude,
        load_groups,
        param_box,
        quadrature_order: raw.quadrature.order.unwrap_or(4),
        grid_cap: raw.quadrature.node_cap.unwrap_or(1_000_000),
        risk,
        weights_mode,
        opt,
        sensor_layout,
        delta_t: raw.load.delta_t,
        scenario,
        measurements_path: raw.measurements.map(|p| base_dir.join(p)),
        seed: raw.seed.unwrap_or(0),
        out_dir: raw.out_dir.map_or_else(|| PathBuf::from("out"), |p| base_dir.join(p)),
        mesh,
        node_sets,
    })
}

type MeshParts = (Mesh, BTreeMap<String, Vec<usize>>, Option<Vec<Sensor>>);

fn build_mesh(raw: &RawMesh, base_dir: &Path) -> Result<MeshParts> {
    match (&raw.file, raw.generator.as_deref()) {
        (Some(path), None) => {
            let full = base_dir.join(path);
            let text = std::fs::read_to_string(&full)
                .with_context(|| format!("reading mesh {}", full.display()))?;
            let (mesh, sensors) = weakspot_core::parse_mesh(&text)?;
            let mut sets = BTreeMap::new();
            sets.insert("all".into(), (0..mesh.node_count()).collect());
            let file_sensors =
                if sensors.is_empty() { None } else { Some(sensors.entries) };
            Ok((mesh, sets, file_sensors))
        }
        (None, Some("plate")) => {
            let g = meshgen::plate(
                raw.nx.unwrap_or(20),
                raw.ny.unwrap_or(10),
                raw.width.unwrap_or(60.0),
                raw.height.unwrap_or(30.0),
                raw.thickness.unwrap_or(0.1),
            );
            Ok((g.mesh, g.node_sets, None))
        }
        (None, Some("cantilever_truss")) => {
            let g = meshgen::cantilever_truss(
                raw.bays.unwrap_or(10),
                raw.bay_length.unwrap_or(1.0),
                raw.panel_height.unwrap_or(1.0),
                raw.area.unwrap_or(5e-4),
            );
            Ok((g.mesh, g.node_sets, None))
        }
        (None, Some(other)) => bail!("unknown mesh generator `{other}`"),
        (Some(_), Some(_)) => bail!("mesh.file and mesh.generator are mutually exclusive"),
        (None, None) => bail!("mesh needs either `file` or `generator`"),
    }
}

fn resolve_nodes(
    explicit: Option<&[usize]>,
    set_name: Option<&str>,
    node_sets: &BTreeMap<String, Vec<usize>>,
    mesh: &Mesh,
    what: &str,
) -> Result<Vec<usize>> {
    let nodes: Vec<usize> = match (explicit, set_name) {
        (Some(nodes), None) => nodes.to_vec(),
        (None, Some(name)) => node_sets
            .get(name)
            .with_context(|| format!("{what}: unknown node set `{name}`"))?
            .clone(),
        (Some(_), Some(_)) => bail!("{what}: `nodes` and `boundary` are mutually exclusive"),
        (None, None) => bail!("{what}: needs `nodes` or `boundary`"),
    };
    for &n in &nodes {
        if n >= mesh.node_count() {
            bail!("{what}: node {n} out of range");
        }
    }
    Ok(nodes)
}

fn build_sensor_layout(
    raw: &RawSensors,
    mesh: &Mesh,
    node_sets: &BTreeMap<String, Vec<usize>>,
    file_sensors: Option<Vec<Sensor>>,
) -> Result<Vec<Sensor>> {
    let placement = raw.placement.as_deref().unwrap_or("free_boundary");
    let stride = raw.stride.unwrap_or(1).max(1);
    let components: Vec<usize> =
        raw.components.clone().unwrap_or_else(|| (0..mesh.dim).collect());

    let displacement_layout = |nodes: Vec<usize>| -> Vec<Sensor> {
        let constrained = &mesh.dirichlet;
        let mut out = Vec::new();
        for n in nodes.into_iter().step_by(stride) {
            for &c in &components {
                if !constrained.contains(&(n, c)) {
                    out.push(Sensor {
                        kind: SensorKind::Displacement,
                        location: n,
                        component: c,
                        measured: 0.0,
                        weight: 1.0,
                    });
                }
            }
        }
        out
    };

    match placement {
        "from_mesh" => {
            file_sensors.context("sensors.placement = \"from_mesh\" but the mesh carries none")
        }
        "explicit" => {
            let list = raw
                .explicit
                .as_ref()
                .context("sensors.placement = \"explicit\" needs sensors.explicit")?;
            list.iter()
                .map(|s| {
                    let kind = match s.kind.as_str() {
                        "disp" => SensorKind::Displacement,
                        "strain" => SensorKind::Strain,
                        other => bail!("unknown sensor kind `{other}`"),
                    };
                    Ok(Sensor {
                        kind,
                        location: s.location,
                        component: s.component,
                        measured: 0.0,
                        weight: 1.0,
                    })
                })
                .collect()
        }
        "free_boundary" => {
            let set = node_sets
                .get("boundary")
                .context("mesh has no `boundary` node set; use explicit sensors")?;
            let constrained_nodes: Vec<usize> = mesh
                .dirichlet
                .iter()
                .map(|&(n, _)| n)
                .collect();
            let free: Vec<usize> = set
                .iter()
                .copied()
                .filter(|n| !constrained_nodes.contains(n))
                .collect();
            Ok(displacement_layout(free))
        }
        "all_free_nodes" => {
            let constrained_nodes: Vec<usize> =
                mesh.dirichlet.iter().map(|&(n, _)| n).collect();
            let free: Vec<usize> = (0..mesh.node_count())
                .filter(|n| !constrained_nodes.contains(n))
                .collect();
            Ok(displacement_layout(free))
        }
        other => bail!("unknown sensor placement `{other}`"),
    }
}

fn build_scenario(raw: RawScenario, mesh: &Mesh) -> Result<Scenario> {
    let mode = match raw.mode.as_str() {
        "deterministic" => ScenarioMode::Deterministic,
        "per_sensor_draw" => ScenarioMode::PerSensorDraw,
        "linear_ramp" => ScenarioMode::LinearRamp,
        "thermal" => ScenarioMode::Thermal,
        other => bail!("unknown scenario mode `{other}`"),
    };
    if mode == ScenarioMode::LinearRamp && raw.ramp.is_none() {
        bail!("linear_ramp scenario needs `ramp = [a, b]`");
    }
    if mode == ScenarioMode::Thermal && raw.delta_t.is_none() {
        bail!("thermal scenario needs `delta_t`");
    }
    let mut weak = Vec::new();
    for w in raw.weak {
        let elements = match (&w.elements, &w.region) {
            (Some(list), None) => {
                for &e in list {
                    if e >= mesh.elements.len() {
                        bail!("scenario.weak: element {e} out of range");
                    }
                }
                list.clone()
            }
            (None, Some(bounds)) => elements_in_region(mesh, bounds)?,
            _ => bail!("scenario.weak entries need exactly one of `elements` or `region`"),
        };
        if elements.is_empty() {
            bail!("scenario.weak entry selects no elements");
        }
        if !(w.alpha > 0.0) {
            bail!("scenario.weak alpha must be positive");
        }
        weak.push(WeakPatch { elements, alpha: w.alpha });
    }
    Ok(Scenario {
        mode,
        weak,
        load_magnitude: raw.load_magnitude,
        ramp: raw.ramp,
        delta_t: raw.delta_t,
    })
}

/// Elements whose centroid lies in the axis-aligned box
/// `[x0, y0, (z0,) x1, y1 (, z1)]`.
fn elements_in_region(mesh: &Mesh, bounds: &[f64]) -> Result<Vec<usize>> {
    if bounds.len() != 2 * mesh.dim {
        bail!(
            "region needs {} bounds for a {}-D mesh, got {}",
            2 * mesh.dim,
            mesh.dim,
            bounds.len()
        );
    }
    let (lo, hi) = bounds.split_at(mesh.dim);
    Ok((0..mesh.elements.len())
        .filter(|&e| {
            mesh.element_centroid(e)
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(c, (a, b))| *c >= *a && *c <= *b)
        })
        .collect())
}
