//! Artifact writers: legacy VTK, CSV tables, the JSON run summary, and the
//! measurements file shared between `synthesize` and `invert`.
//!
//! Floats are written with `{:e}`, the shortest round-trip scientific
//! form, so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nalgebra::DVector;
use serde::Serialize;
use weakspot_core::{
    Element, IterationRecord, Mesh, Sensor, SensorKind, StrainField, StrengthField,
};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Legacy ASCII VTK unstructured grid with one scalar cell field.
pub fn write_vtk(path: &Path, mesh: &Mesh, field_name: &str, values: &[f64]) -> Result<()> {
    assert_eq!(values.len(), mesh.elements.len());
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 2.0\n");
    let _ = writeln!(out, "{field_name} field");
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");

    let n_nodes = mesh.node_count();
    let _ = writeln!(out, "POINTS {n_nodes} double");
    for n in 0..n_nodes {
        let c = mesh.node_coord(n);
        let z = if mesh.dim == 3 { c[2] } else { 0.0 };
        let _ = writeln!(out, "{:e} {:e} {:e}", c[0], c[1], z);
    }

    let n_cells = mesh.elements.len();
    let total: usize = mesh.elements.iter().map(|e| e.node_count() + 1).sum();
    let _ = writeln!(out, "CELLS {n_cells} {total}");
    for elem in &mesh.elements {
        match elem {
            Element::TrussBar { nodes, .. } => {
                let _ = writeln!(out, "2 {} {}", nodes[0], nodes[1]);
            }
            Element::Triangle { nodes, .. } => {
                let _ = writeln!(out, "3 {} {} {}", nodes[0], nodes[1], nodes[2]);
            }
        }
    }
    let _ = writeln!(out, "CELL_TYPES {n_cells}");
    for elem in &mesh.elements {
        let vtk_type = match elem {
            Element::TrussBar { .. } => 3,
            Element::Triangle { .. } => 5,
        };
        let _ = writeln!(out, "{vtk_type}");
    }

    let _ = writeln!(out, "CELL_DATA {n_cells}");
    let _ = writeln!(out, "SCALARS {field_name} double 1");
    out.push_str("LOOKUP_TABLE default\n");
    for v in values {
        let _ = writeln!(out, "{v:e}");
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Element field with centroids, one row per element.
pub fn write_alpha_csv(path: &Path, mesh: &Mesh, alpha: &StrengthField) -> Result<()> {
    let mut out = String::new();
    let coord_header = ["cx", "cy", "cz"][..mesh.dim].join(",");
    let _ = writeln!(out, "element,{coord_header},alpha");
    for (e, a) in alpha.values.iter().enumerate() {
        let c = mesh.element_centroid(e);
        let coords: Vec<String> = c.iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(out, "{e},{},{a:e}", coords.join(","));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_convergence_csv(path: &Path, history: &[IterationRecord]) -> Result<()> {
    let mut out = String::from("iter,objective,t,step,grad_norm,backtracks\n");
    for r in history {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{}",
            r.iteration, r.objective, r.t, r.step, r.grad_norm, r.backtracks
        );
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn sensor_kind_label(kind: SensorKind) -> &'static str {
    match kind {
        SensorKind::Displacement => "disp",
        SensorKind::Strain => "strain",
    }
}

/// Full sensor table: layout plus measured values.
pub fn write_measurements_csv(path: &Path, sensors: &[Sensor]) -> Result<()> {
    let mut out = String::from("kind,location,component,measured\n");
    for s in sensors {
        let _ = writeln!(
            out,
            "{},{},{},{:e}",
            sensor_kind_label(s.kind),
            s.location,
            s.component,
            s.measured
        );
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Read a measurements table back into a sensor layout with unit weights.
pub fn read_measurements_csv(path: &Path) -> Result<Vec<Sensor>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut sensors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            bail!("{}:{}: expected 4 fields", path.display(), i + 1);
        }
        let kind = match fields[0] {
            "disp" => SensorKind::Displacement,
            "strain" => SensorKind::Strain,
            other => bail!("{}:{}: unknown sensor kind `{other}`", path.display(), i + 1),
        };
        sensors.push(Sensor {
            kind,
            location: fields[1].parse().context("bad location")?,
            component: fields[2].parse().context("bad component")?,
            measured: fields[3].parse().context("bad measured value")?,
            weight: 1.0,
        });
    }
    Ok(sensors)
}

pub fn write_displacement_csv(path: &Path, mesh: &Mesh, u: &DVector<f64>) -> Result<()> {
    let mut out = String::new();
    let coord_header = ["x", "y", "z"][..mesh.dim].join(",");
    let u_header: Vec<String> = (0..mesh.dim).map(|c| format!("u{}", ["x", "y", "z"][c])).collect();
    let _ = writeln!(out, "node,{coord_header},{}", u_header.join(","));
    for n in 0..mesh.node_count() {
        let coords: Vec<String> =
            mesh.node_coord(n).iter().map(|x| format!("{x:e}")).collect();
        let disp: Vec<String> =
            (0..mesh.dim).map(|c| format!("{:e}", u[mesh.dof(n, c)])).collect();
        let _ = writeln!(out, "{n},{},{}", coords.join(","), disp.join(","));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_strains_csv(path: &Path, mesh: &Mesh, strains: &StrainField) -> Result<()> {
    let mut out = String::from("element,component,strain\n");
    for e in 0..mesh.elements.len() {
        for (c, v) in strains.components(e).iter().enumerate() {
            let _ = writeln!(out, "{e},{c},{v:e}");
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_sensor_readout_csv(path: &Path, sensors: &[Sensor], predicted: &[f64]) -> Result<()> {
    let mut out = String::from("kind,location,component,predicted\n");
    for (s, p) in sensors.iter().zip(predicted) {
        let _ = writeln!(
            out,
            "{},{},{},{p:e}",
            sensor_kind_label(s.kind),
            s.location,
            s.component
        );
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub objective: f64,
    pub initial_objective: f64,
    pub t: f64,
    pub iterations: usize,
    pub stop: String,
    pub risk: String,
    pub beta: Option<f64>,
    pub quadrature_nodes: usize,
    pub forward_solves: usize,
    pub adjoint_solves: usize,
    pub elements: usize,
    pub sensors: usize,
    pub seed: u64,
    pub artifacts: Vec<PathBuf>,
}

pub fn write_summary_json(path: &Path, summary: &Summary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use weakspot_core::StrengthField;

    #[test]
    fn vtk_structure() {
        let mesh = Mesh {
            dim: 2,
            coords: vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            elements: vec![
                Element::Triangle { nodes: [0, 1, 2], thickness: 0.1 },
                Element::TrussBar { nodes: [0, 1], area: 1e-4 },
            ],
            dirichlet: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("alpha.vtk");
        write_vtk(&path, &mesh, "alpha", &[0.5, 1.0]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 2.0\n"));
        assert!(text.contains("POINTS 3 double"));
        assert!(text.contains("CELLS 2 7"));
        assert!(text.contains("CELL_TYPES 2\n5\n3\n"));
        assert!(text.contains("CELL_DATA 2"));
        assert!(text.contains("SCALARS alpha double 1"));
        assert!(text.contains("LOOKUP_TABLE default\n5e-1\n1e0\n"));
    }

    #[test]
    fn measurements_round_trip() {
        let sensors = vec![
            Sensor {
                kind: SensorKind::Displacement,
                location: 3,
                component: 1,
                measured: -2.5e-3,
                weight: 4.0,
            },
            Sensor {
                kind: SensorKind::Strain,
                location: 0,
                component: 2,
                measured: 1.25e-6,
                weight: 1.0,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("measurements.csv");
        write_measurements_csv(&path, &sensors).unwrap();
        let back = read_measurements_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].kind, SensorKind::Displacement);
        assert_eq!(back[0].location, 3);
        assert_eq!(back[0].measured, -2.5e-3);
        assert_eq!(back[1].kind, SensorKind::Strain);
        assert_eq!(back[1].measured, 1.25e-6);
    }

    #[test]
    fn convergence_csv_layout() {
        let history = vec![IterationRecord {
            iteration: 0,
            objective: 1.5,
            t: 0.25,
            step: 0.0,
            grad_norm: 3.0,
            backtracks: 0,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("convergence.csv");
        write_convergence_csv(&path, &history).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "iter,objective,t,step,grad_norm,backtracks\n0,1.5e0,2.5e-1,0e0,3e0,0\n"
        );
    }

    #[test]
    fn alpha_csv_has_centroids() {
        let mesh = Mesh {
            dim: 2,
            coords: vec![0.0, 0.0, 2.0, 0.0],
            elements: vec![Element::TrussBar { nodes: [0, 1], area: 1e-4 }],
            dirichlet: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("alpha.csv");
        write_alpha_csv(&path, &mesh, &StrengthField::uniform(1, 0.75)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "element,cx,cy,alpha\n0,1e0,0e0,7.5e-1\n");
    }
}
