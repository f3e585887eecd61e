//! Benchmark fixtures: a clamped plate problem sized like the default
//! experiments, with noise-free synthetic measurements.

use nalgebra::DVector;
use weakspot_core::{
    compute_strains, extract_measurements, factorize, local_weights, tensor_grid, DofMap,
    Element, ElementCache, LoadGroups, Material, Mesh, ParamBox, Problem, RiskSpec, Sensor,
    SensorKind, SensorSet, StrengthField,
};

pub fn steel() -> Material {
    Material { young_modulus: 2e9, poisson: 0.3, density: 7.8, alpha_exp: 11e-6 }
}

/// Rectangular plate of CST triangles on `[0, 60] x [0, 30]`, top clamped,
/// bottom edge loaded downward.
pub fn plate_mesh(nx: usize, ny: usize) -> (Mesh, Vec<f64>) {
    let node_id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut coords = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push(60.0 * i as f64 / nx as f64);
            coords.push(30.0 * j as f64 / ny as f64);
        }
    }
    let mut elements = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) =
                (node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1));
            elements.push(Element::Triangle { nodes: [a, b, c], thickness: 0.1 });
            elements.push(Element::Triangle { nodes: [a, c, d], thickness: 0.1 });
        }
    }
    let mut dirichlet = Vec::new();
    for i in 0..=nx {
        dirichlet.push((node_id(i, ny), 0));
        dirichlet.push((node_id(i, ny), 1));
    }
    let mesh = Mesh { dim: 2, coords, elements, dirichlet };
    let mut f = vec![0.0; mesh.dof_count()];
    for i in 0..=nx {
        f[mesh.dof(node_id(i, 0), 1)] = -4e5;
    }
    (mesh, f)
}

/// Full plate problem with sensors on the bottom edge and a weakened band
/// in the target that synthesized the measurements.
pub fn plate_problem(nx: usize, ny: usize, order: usize, risk: RiskSpec) -> Problem {
    let (mesh, f_base) = plate_mesh(nx, ny);
    let material = steel();
    let sensors_layout: Vec<Sensor> = (0..=nx)
        .flat_map(|i| {
            (0..2).map(move |c| Sensor {
                kind: SensorKind::Displacement,
                location: i,
                component: c,
                measured: 0.0,
                weight: 1.0,
            })
        })
        .collect();

    let mut truth = StrengthField::uniform(mesh.elements.len(), 1.0);
    for (e, a) in truth.values.iter_mut().enumerate() {
        if e % 7 == 0 {
            *a = 0.2;
        }
    }
    let cache = ElementCache::build(&mesh, &material).unwrap();
    let fac = factorize(&cache, &truth, &DofMap::new(&mesh)).unwrap();
    let u = fac.solve(&DVector::from_vec(f_base.clone())).unwrap();
    let strains = compute_strains(&mesh, &u).unwrap();
    let layout = SensorSet::new(sensors_layout);
    let measured = extract_measurements(&mesh, &u, &strains, &layout).unwrap();
    let weights = local_weights(&measured).unwrap();
    let sensors = SensorSet::new(
        layout
            .entries
            .iter()
            .zip(measured.iter().zip(&weights))
            .map(|(s, (m, w))| Sensor { measured: *m, weight: *w, ..s.clone() })
            .collect(),
    );

    let groups = LoadGroups::single(&f_base);
    let grid = tensor_grid(&ParamBox::new(vec![[0.8, 1.2]]).unwrap(), order).unwrap();
    Problem::new(mesh, material, sensors, f_base, groups, grid, risk, 0.0).unwrap()
}
