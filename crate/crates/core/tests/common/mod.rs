//! Shared fixtures: small trusses with synthetic sensor data.
#![allow(dead_code)] // each test target uses a different subset

use nalgebra::DVector;
use weakspot_core::{
    compute_strains, extract_measurements, factorize, tensor_grid, DofMap, Element, ElementCache,
    LoadGroups, Material, Mesh, ParamBox, Problem, RiskSpec, Sensor, SensorKind, SensorSet,
    StrengthField,
};

/// One deterministic forward solve read out at the sensors.
pub fn solve_and_read(
    mesh: &Mesh,
    material: &Material,
    alpha: &StrengthField,
    f: &[f64],
    sensors: &SensorSet,
) -> Vec<f64> {
    let cache = ElementCache::build(mesh, material).unwrap();
    let fac = factorize(&cache, alpha, &DofMap::new(mesh)).unwrap();
    let u = fac.solve(&DVector::from_vec(f.to_vec())).unwrap();
    let strains = compute_strains(mesh, &u).unwrap();
    extract_measurements(mesh, &u, &strains, sensors).unwrap()
}

pub fn steel_like() -> Material {
    Material { young_modulus: 2e9, poisson: 0.3, density: 7.8, alpha_exp: 11e-6 }
}

/// Classic ten-bar cantilever truss: two horizontal chords of two bays,
/// verticals and crossed diagonals, clamped at the left wall.
pub fn ten_bar_truss() -> Mesh {
    let coords = vec![
        0.0, 1.0, // 0 top left (clamped)
        1.0, 1.0, // 1
        2.0, 1.0, // 2
        0.0, 0.0, // 3 bottom left (clamped)
        1.0, 0.0, // 4
        2.0, 0.0, // 5
    ];
    let area = 5e-4;
    let bars = [
        [0, 1],
        [1, 2],
        [3, 4],
        [4, 5],
        [1, 4],
        [2, 5],
        [0, 4],
        [1, 3],
        [1, 5],
        [2, 4],
    ];
    Mesh {
        dim: 2,
        coords,
        elements: bars
            .iter()
            .map(|&nodes| Element::TrussBar { nodes, area })
            .collect(),
        dirichlet: vec![(0, 0), (0, 1), (3, 0), (3, 1)],
    }
}

/// Downward tip loads on the two free bottom nodes.
pub fn ten_bar_load(mesh: &Mesh) -> Vec<f64> {
    let mut f = vec![0.0; mesh.dof_count()];
    f[mesh.dof(4, 1)] = -1e4;
    f[mesh.dof(5, 1)] = -1.5e4;
    f
}

/// Displacement sensors (both components) on every free node.
pub fn free_node_sensors(mesh: &Mesh) -> Vec<Sensor> {
    let constrained: Vec<usize> = mesh.dirichlet.iter().map(|&(n, _)| n).collect();
    (0..mesh.node_count())
        .filter(|n| !constrained.contains(n))
        .flat_map(|n| {
            (0..mesh.dim).map(move |c| Sensor {
                kind: SensorKind::Displacement,
                location: n,
                component: c,
                measured: 0.0,
                weight: 1.0,
            })
        })
        .collect()
}

pub struct FixtureOptions {
    pub groups: usize,
    pub quadrature_order: usize,
    pub interval: [f64; 2],
    pub risk: RiskSpec,
    pub weak: Vec<(usize, f64)>,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        Self {
            groups: 2,
            quadrature_order: 3,
            interval: [0.8, 1.2],
            risk: RiskSpec::expectation(),
            weak: vec![(2, 0.4), (6, 0.25)],
        }
    }
}

/// Build the ten-bar problem with sensor data synthesized from a weakened
/// truth at the nominal load (unit random factors), weighted locally.
pub fn ten_bar_problem(options: FixtureOptions) -> (Problem, StrengthField) {
    let mesh = ten_bar_truss();
    let material = steel_like();
    let f_base = ten_bar_load(&mesh);
    let groups = if options.groups == 1 {
        LoadGroups::single(&f_base)
    } else {
        LoadGroups::uniform_width(&mesh, &f_base, 0, options.groups).unwrap()
    };
    let grid = tensor_grid(
        &ParamBox::new(vec![options.interval; options.groups]).unwrap(),
        options.quadrature_order,
    )
    .unwrap();

    let mut truth = StrengthField::uniform(mesh.elements.len(), 1.0);
    for &(e, a) in &options.weak {
        truth.values[e] = a;
    }

    // synthesize noise-free measurements at the nominal load
    let mut sensors = SensorSet::new(free_node_sensors(&mesh));
    let measured = solve_and_read(&mesh, &material, &truth, &f_base, &sensors);
    let weights = weakspot_core::local_weights(&measured).unwrap();
    for ((s, m), w) in sensors.entries.iter_mut().zip(&measured).zip(&weights) {
        s.measured = *m;
        s.weight = *w;
    }

    let problem = Problem::new(
        mesh,
        material,
        sensors,
        f_base,
        groups,
        grid,
        options.risk,
        0.0,
    )
    .unwrap();
    (problem, truth)
}
