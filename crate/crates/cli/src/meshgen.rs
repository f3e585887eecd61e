//! Built-in mesh generators: a rectangular plate of plane-stress triangles
//! clamped at the top, and a planar cantilever truss clamped at the left
//! wall. Both return named node sets for load placement and sensor layout.

use std::collections::BTreeMap;

use weakspot_core::{Element, Mesh};

/// A generated mesh plus named node sets (`"bottom"`, `"top"`, ...).
pub struct GeneratedMesh {
    pub mesh: Mesh,
    pub node_sets: BTreeMap<String, Vec<usize>>,
}

impl GeneratedMesh {
    pub fn node_set(&self, name: &str) -> Option<&[usize]> {
        self.node_sets.get(name).map(|v| v.as_slice())
    }

    /// Boundary-ish nodes that carry at least one unconstrained dof.
    pub fn free_nodes_of(&self, name: &str) -> Vec<usize> {
        let Some(set) = self.node_sets.get(name) else { return Vec::new() };
        let constrained: Vec<usize> =
            self.mesh.dirichlet.iter().map(|&(n, _)| n).collect();
        set.iter().copied().filter(|n| !constrained.contains(n)).collect()
    }
}

/// Rectangular plate on `[0, width] x [0, height]`, `nx x ny` cells split
/// into two triangles each, clamped along the top edge.
pub fn plate(nx: usize, ny: usize, width: f64, height: f64, thickness: f64) -> GeneratedMesh {
    assert!(nx >= 1 && ny >= 1, "plate needs at least one cell per direction");
    let node_id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut coords = Vec::with_capacity(2 * (nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push(width * i as f64 / nx as f64);
            coords.push(height * j as f64 / ny as f64);
        }
    }
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) =
                (node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1));
            elements.push(Element::Triangle { nodes: [a, b, c], thickness });
            elements.push(Element::Triangle { nodes: [a, c, d], thickness });
        }
    }
    // clamp the top edge
    let mut dirichlet = Vec::new();
    for i in 0..=nx {
        dirichlet.push((node_id(i, ny), 0));
        dirichlet.push((node_id(i, ny), 1));
    }
    let mesh = Mesh { dim: 2, coords, elements, dirichlet };

    let mut node_sets = BTreeMap::new();
    node_sets.insert("bottom".into(), (0..=nx).map(|i| node_id(i, 0)).collect());
    node_sets.insert("top".into(), (0..=nx).map(|i| node_id(i, ny)).collect());
    node_sets.insert("left".into(), (0..=ny).map(|j| node_id(0, j)).collect());
    node_sets.insert("right".into(), (0..=ny).map(|j| node_id(nx, j)).collect());
    let mut boundary: Vec<usize> = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            if i == 0 || i == nx || j == 0 || j == ny {
                boundary.push(node_id(i, j));
            }
        }
    }
    node_sets.insert("boundary".into(), boundary);
    node_sets.insert("all".into(), (0..mesh.node_count()).collect());
    GeneratedMesh { mesh, node_sets }
}

/// Planar cantilever truss: `bays` braced rectangular panels with chords,
/// verticals and alternating diagonals, clamped at the left wall. The free
/// right-hand pair of nodes forms the `"tip"` set.
pub fn cantilever_truss(
    bays: usize,
    bay_length: f64,
    panel_height: f64,
    area: f64,
) -> GeneratedMesh {
    assert!(bays >= 1, "truss needs at least one bay");
    let bottom = |i: usize| 2 * i;
    let top = |i: usize| 2 * i + 1;
    let mut coords = Vec::with_capacity(4 * (bays + 1));
    for i in 0..=bays {
        coords.push(i as f64 * bay_length);
        coords.push(0.0);
        coords.push(i as f64 * bay_length);
        coords.push(panel_height);
    }
    let mut elements = Vec::new();
    let mut bar = |a: usize, b: usize| elements.push(Element::TrussBar { nodes: [a, b], area });
    bar(bottom(0), top(0));
    for i in 0..bays {
        bar(bottom(i), bottom(i + 1));
        bar(top(i), top(i + 1));
        bar(bottom(i + 1), top(i + 1));
        if i % 2 == 0 {
            bar(bottom(i), top(i + 1));
        } else {
            bar(top(i), bottom(i + 1));
        }
    }
    let mesh = Mesh {
        dim: 2,
        coords,
        elements,
        dirichlet: vec![(bottom(0), 0), (bottom(0), 1), (top(0), 0), (top(0), 1)],
    };

    let mut node_sets = BTreeMap::new();
    node_sets.insert("tip".into(), vec![bottom(bays), top(bays)]);
    node_sets.insert("bottom".into(), (0..=bays).map(bottom).collect());
    node_sets.insert("top".into(), (0..=bays).map(top).collect());
    node_sets.insert("all".into(), (0..mesh.node_count()).collect());
    node_sets.insert("boundary".into(), (0..mesh.node_count()).collect());
    GeneratedMesh { mesh, node_sets }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plate_counts() {
        let g = plate(20, 10, 60.0, 30.0, 0.1);
        assert_eq!(g.mesh.node_count(), 21 * 11);
        assert_eq!(g.mesh.elements.len(), 400);
        assert_eq!(g.mesh.dirichlet.len(), 2 * 21);
        g.mesh.validate().unwrap();
        // every triangle has positive area by construction
        for e in 0..g.mesh.elements.len() {
            assert!(g.mesh.element_measure(e) > 0.0);
        }
    }

    #[test]
    fn plate_node_sets() {
        let g = plate(4, 2, 4.0, 2.0, 0.1);
        assert_eq!(g.node_set("bottom").unwrap().len(), 5);
        assert_eq!(g.node_set("left").unwrap().len(), 3);
        // the clamped top contributes no free boundary nodes
        assert!(g.free_nodes_of("top").is_empty());
        assert_eq!(g.free_nodes_of("bottom").len(), 5);
    }

    #[test]
    fn truss_is_stable_and_sized() {
        let g = cantilever_truss(10, 1.0, 1.0, 5e-4);
        assert_eq!(g.mesh.node_count(), 22);
        assert_eq!(g.mesh.elements.len(), 1 + 4 * 10);
        g.mesh.validate().unwrap();
        let cache =
            weakspot_core::ElementCache::build(&g.mesh, &crate::meshgen::tests::steel()).unwrap();
        let dof_map = weakspot_core::DofMap::new(&g.mesh);
        // factorization succeeding means no mechanism
        weakspot_core::factorize(
            &cache,
            &weakspot_core::StrengthField::uniform(41, 1.0),
            &dof_map,
        )
        .unwrap();
    }

    pub fn steel() -> weakspot_core::Material {
        weakspot_core::Material {
            young_modulus: 2e9,
            poisson: 0.3,
            density: 7.8,
            alpha_exp: 11e-6,
        }
    }
}
