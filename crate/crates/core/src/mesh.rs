//! Mesh, material, strength-field and sensor types, plus the plain-text mesh format.
//!
//! A mesh is a flat list of node coordinates (2-D or 3-D), a list of elements
//! (truss bars or plane-stress triangles), and a list of homogeneous Dirichlet
//! constraints given as `(node, dof)` pairs. Degrees of freedom are numbered
//! `node * dim + component`.

use crate::error::{Error, Result};

/// Geometric floor below which an element counts as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// Default lower bound on strength factors; keeps the stiffness matrix
/// invertible for any feasible iterate.
pub const DEFAULT_ALPHA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    /// Axial bar between two nodes, valid in 2-D and 3-D meshes.
    TrussBar { nodes: [usize; 2], area: f64 },
    /// Constant-strain plane-stress triangle, 2-D meshes only.
    Triangle { nodes: [usize; 3], thickness: f64 },
}

impl Element {
    pub fn node_ids(&self) -> &[usize] {
        match self {
            Element::TrussBar { nodes, .. } => nodes,
            Element::Triangle { nodes, .. } => nodes,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_ids().len()
    }

    /// Number of strain components this element reports.
    pub fn strain_components(&self) -> usize {
        match self {
            Element::TrussBar { .. } => 1,
            Element::Triangle { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Young's modulus, Pa.
    pub young_modulus: f64,
    /// Poisson ratio, dimensionless.
    pub poisson: f64,
    /// Density, kg/m^3. Carried for completeness; body loads are not modeled.
    pub density: f64,
    /// Coefficient of thermal expansion, 1/K.
    pub alpha_exp: f64,
}

impl Material {
    pub fn validate(&self) -> Result<()> {
        if !(self.young_modulus > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Young's modulus must be positive, got {}",
                self.young_modulus
            )));
        }
        if !(0.0..0.5).contains(&self.poisson) {
            return Err(Error::InvalidArgument(format!(
                "Poisson ratio must lie in [0, 0.5), got {}",
                self.poisson
            )));
        }
        Ok(())
    }
}

/// Per-element strength factors, the optimization variable.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthField {
    pub values: Vec<f64>,
}

impl StrengthField {
    pub fn uniform(n_elements: usize, value: f64) -> Self {
        Self { values: vec![value; n_elements] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Componentwise clamp onto the feasible box `[floor, max]`.
    pub fn clamp(&mut self, floor: f64, max: f64) {
        for a in &mut self.values {
            *a = a.clamp(floor, max);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorKind {
    /// Reads one displacement component at a node.
    Displacement,
    /// Reads one strain component on an element.
    Strain,
}

/// One sensor: where it sits, which component it reads, what it measured,
/// and its misfit weight. `location` is a node id for displacement sensors
/// and an element id for strain sensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Sensor {
    pub kind: SensorKind,
    pub location: usize,
    pub component: usize,
    pub measured: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SensorSet {
    pub entries: Vec<Sensor>,
}

impl SensorSet {
    pub fn new(entries: Vec<Sensor>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn measured_values(&self) -> Vec<f64> {
        self.entries.iter().map(|s| s.measured).collect()
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        for (index, s) in self.entries.iter().enumerate() {
            match s.kind {
                SensorKind::Displacement => {
                    if s.location >= mesh.node_count() {
                        return Err(Error::InvalidSensor {
                            index,
                            reason: format!("node {} out of range", s.location),
                        });
                    }
                    if s.component >= mesh.dim {
                        return Err(Error::InvalidSensor {
                            index,
                            reason: format!("dof component {} out of range", s.component),
                        });
                    }
                }
                SensorKind::Strain => {
                    if s.location >= mesh.elements.len() {
                        return Err(Error::InvalidSensor {
                            index,
                            reason: format!("element {} out of range", s.location),
                        });
                    }
                    let nc = mesh.elements[s.location].strain_components();
                    if s.component >= nc {
                        return Err(Error::InvalidSensor {
                            index,
                            reason: format!(
                                "strain component {} out of range (element has {})",
                                s.component, nc
                            ),
                        });
                    }
                }
            }
            if !(s.weight > 0.0 && s.weight.is_finite()) {
                return Err(Error::InvalidSensor {
                    index,
                    reason: format!("weight {} must be positive and finite", s.weight),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Spatial dimension, 2 or 3.
    pub dim: usize,
    /// Node coordinates, flattened with stride `dim`.
    pub coords: Vec<f64>,
    pub elements: Vec<Element>,
    /// Fully constrained degrees of freedom, value 0.
    pub dirichlet: Vec<(usize, usize)>,
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn dof_count(&self) -> usize {
        self.coords.len()
    }

    pub fn node_coord(&self, node: usize) -> &[f64] {
        &self.coords[node * self.dim..(node + 1) * self.dim]
    }

    pub fn dof(&self, node: usize, component: usize) -> usize {
        node * self.dim + component
    }

    /// Global dof indices touched by element `e`, node-major.
    pub fn element_dofs(&self, e: usize) -> Vec<usize> {
        let mut dofs = Vec::with_capacity(self.elements[e].node_count() * self.dim);
        for &n in self.elements[e].node_ids() {
            for c in 0..self.dim {
                dofs.push(self.dof(n, c));
            }
        }
        dofs
    }

    /// Length of a bar, or area x thickness of a triangle. This is the
    /// element measure used for volume-weighted smoothing.
    pub fn element_measure(&self, e: usize) -> f64 {
        match &self.elements[e] {
            Element::TrussBar { nodes, .. } => {
                let a = self.node_coord(nodes[0]);
                let b = self.node_coord(nodes[1]);
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (y - x) * (y - x))
                    .sum::<f64>()
                    .sqrt()
            }
            Element::Triangle { nodes, thickness } => {
                self.triangle_area(*nodes) * thickness
            }
        }
    }

    /// Signed-free triangle area; requires a 2-D mesh.
    pub fn triangle_area(&self, nodes: [usize; 3]) -> f64 {
        let p0 = self.node_coord(nodes[0]);
        let p1 = self.node_coord(nodes[1]);
        let p2 = self.node_coord(nodes[2]);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])).abs()
    }

    pub fn element_centroid(&self, e: usize) -> Vec<f64> {
        let ids = self.elements[e].node_ids();
        let mut c = vec![0.0; self.dim];
        for &n in ids {
            for (ci, xi) in c.iter_mut().zip(self.node_coord(n)) {
                *ci += xi;
            }
        }
        for ci in &mut c {
            *ci /= ids.len() as f64;
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidMesh(format!("dimension must be 2 or 3, got {}", self.dim)));
        }
        if self.coords.len() % self.dim != 0 {
            return Err(Error::InvalidMesh(
                "coordinate array length is not a multiple of dim".into(),
            ));
        }
        let n_nodes = self.node_count();
        for (e, elem) in self.elements.iter().enumerate() {
            for &n in elem.node_ids() {
                if n >= n_nodes {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} references node {n} but the mesh has {n_nodes} nodes"
                    )));
                }
            }
            match elem {
                Element::TrussBar { area, .. } => {
                    if !(*area > 0.0) {
                        return Err(Error::InvalidMesh(format!(
                            "element {e}: cross-section area must be positive"
                        )));
                    }
                }
                Element::Triangle { thickness, .. } => {
                    if self.dim != 2 {
                        return Err(Error::InvalidMesh(format!(
                            "element {e}: triangles require a 2-D mesh"
                        )));
                    }
                    if !(*thickness > 0.0) {
                        return Err(Error::InvalidMesh(format!(
                            "element {e}: thickness must be positive"
                        )));
                    }
                }
            }
            let measure = self.element_measure(e);
            if !(measure > DEGENERACY_FLOOR) {
                return Err(Error::DegenerateElement { id: e, measure });
            }
        }
        for &(node, dof) in &self.dirichlet {
            if node >= n_nodes || dof >= self.dim {
                return Err(Error::InvalidMesh(format!(
                    "dirichlet constraint ({node}, {dof}) out of range"
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Plain-text mesh format.
//
//   nodes
//   <id> <x> <y> [<z>]
//   elements
//   <id> truss <n1> <n2> <area>
//   <id> tri <n1> <n2> <n3> <thickness>
//   dirichlet
//   <node> <dof>
//   sensors
//   <location> <component> <disp|strain>
//
// `#` starts a comment; blank lines are ignored. Node and element ids must
// cover 0..n-1 but may appear in any order.
// ---------------------------------------------------------------------------

/// Parse the plain-text mesh format. Sensors parsed from the file carry
/// `measured = 0` and `weight = 1` until measurements are attached.
pub fn parse_mesh(text: &str) -> Result<(Mesh, SensorSet)> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Nodes,
        Elements,
        Dirichlet,
        Sensors,
    }

    let mut section = Section::None;
    let mut dim: Option<usize> = None;
    let mut nodes: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut elements: Vec<(usize, Element)> = Vec::new();
    let mut dirichlet: Vec<(usize, usize)> = Vec::new();
    let mut sensors: Vec<Sensor> = Vec::new();

    let err = |line: usize, reason: &str| Error::MeshParse { line, reason: reason.into() };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match content {
            "nodes" => {
                section = Section::Nodes;
                continue;
            }
            "elements" => {
                section = Section::Elements;
                continue;
            }
            "dirichlet" => {
                section = Section::Dirichlet;
                continue;
            }
            "sensors" => {
                section = Section::Sensors;
                continue;
            }
            _ => {}
        }
        let tok: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::None => return Err(err(line, "data before any section header")),
            Section::Nodes => {
                if tok.len() != 3 && tok.len() != 4 {
                    return Err(err(line, "expected `id x y [z]`"));
                }
                let id: usize =
                    tok[0].parse().map_err(|_| err(line, "bad node id"))?;
                let coords: Vec<f64> = tok[1..]
                    .iter()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err(line, "bad coordinate"))?;
                match dim {
                    None => dim = Some(coords.len()),
                    Some(d) if d != coords.len() => {
                        return Err(err(line, "inconsistent node dimension"))
                    }
                    _ => {}
                }
                nodes.push((id, coords));
            }
            Section::Elements => {
                if tok.len() < 2 {
                    return Err(err(line, "expected `id kind ...`"));
                }
                let id: usize =
                    tok[0].parse().map_err(|_| err(line, "bad element id"))?;
                let elem = match tok[1] {
                    "truss" => {
                        if tok.len() != 5 {
                            return Err(err(line, "expected `id truss n1 n2 area`"));
                        }
                        Element::TrussBar {
                            nodes: [
                                tok[2].parse().map_err(|_| err(line, "bad node id"))?,
                                tok[3].parse().map_err(|_| err(line, "bad node id"))?,
                            ],
                            area: tok[4].parse().map_err(|_| err(line, "bad area"))?,
                        }
                    }
                    "tri" => {
                        if tok.len() != 6 {
                            return Err(err(line, "expected `id tri n1 n2 n3 thickness`"));
                        }
                        Element::Triangle {
                            nodes: [
                                tok[2].parse().map_err(|_| err(line, "bad node id"))?,
                                tok[3].parse().map_err(|_| err(line, "bad node id"))?,
                                tok[4].parse().map_err(|_| err(line, "bad node id"))?,
                            ],
                            thickness: tok[5]
                                .parse()
                                .map_err(|_| err(line, "bad thickness"))?,
                        }
                    }
                    other => {
                        return Err(err(line, &format!("unknown element kind `{other}`")))
                    }
                };
                elements.push((id, elem));
            }
            Section::Dirichlet => {
                if tok.len() != 2 {
                    return Err(err(line, "expected `node dof`"));
                }
                dirichlet.push((
                    tok[0].parse().map_err(|_| err(line, "bad node id"))?,
                    tok[1].parse().map_err(|_| err(line, "bad dof index"))?,
                ));
            }
            Section::Sensors => {
                if tok.len() != 3 {
                    return Err(err(line, "expected `location component kind`"));
                }
                let kind = match tok[2] {
                    "disp" => SensorKind::Displacement,
                    "strain" => SensorKind::Strain,
                    other => {
                        return Err(err(line, &format!("unknown sensor kind `{other}`")))
                    }
                };
                sensors.push(Sensor {
                    kind,
                    location: tok[0].parse().map_err(|_| err(line, "bad location"))?,
                    component: tok[1].parse().map_err(|_| err(line, "bad component"))?,
                    measured: 0.0,
                    weight: 1.0,
                });
            }
        }
    }

    let dim = dim.ok_or_else(|| Error::InvalidMesh("mesh has no nodes".into()))?;
    let mut coords = vec![f64::NAN; nodes.len() * dim];
    let mut seen = vec![false; nodes.len()];
    for (id, c) in &nodes {
        if *id >= seen.len() || seen[*id] {
            return Err(Error::InvalidMesh(format!("node id {id} duplicated or out of range")));
        }
        seen[*id] = true;
        coords[id * dim..(id + 1) * dim].copy_from_slice(c);
    }

    let mut elems = vec![None; elements.len()];
    for (id, e) in elements {
        if id >= elems.len() || elems[id].is_some() {
            return Err(Error::InvalidMesh(format!("element id {id} duplicated or out of range")));
        }
        elems[id] = Some(e);
    }

    let mesh = Mesh {
        dim,
        coords,
        elements: elems.into_iter().map(|e| e.unwrap()).collect(),
        dirichlet,
    };
    mesh.validate()?;
    let sensors = SensorSet::new(sensors);
    sensors.validate(&mesh)?;
    Ok((mesh, sensors))
}

/// Render a mesh (and optional sensor layout) in the plain-text format.
pub fn format_mesh(mesh: &Mesh, sensors: &SensorSet) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    out.push_str("nodes\n");
    for n in 0..mesh.node_count() {
        let _ = write!(out, "{n}");
        for c in mesh.node_coord(n) {
            let _ = write!(out, " {c:e}");
        }
        out.push('\n');
    }
    out.push_str("elements\n");
    for (e, elem) in mesh.elements.iter().enumerate() {
        match elem {
            Element::TrussBar { nodes, area } => {
                let _ = writeln!(out, "{e} truss {} {} {area:e}", nodes[0], nodes[1]);
            }
            Element::Triangle { nodes, thickness } => {
                let _ = writeln!(
                    out,
                    "{e} tri {} {} {} {thickness:e}",
                    nodes[0], nodes[1], nodes[2]
                );
            }
        }
    }
    if !mesh.dirichlet.is_empty() {
        out.push_str("dirichlet\n");
        for (n, d) in &mesh.dirichlet {
            let _ = writeln!(out, "{n} {d}");
        }
    }
    if !sensors.is_empty() {
        out.push_str("sensors\n");
        for s in &sensors.entries {
            let kind = match s.kind {
                SensorKind::Displacement => "disp",
                SensorKind::Strain => "strain",
            };
            let _ = writeln!(out, "{} {} {kind}", s.location, s.component);
        }
    }
    out
}
