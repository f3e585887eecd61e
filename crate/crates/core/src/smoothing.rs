//! Spatial smoothing of element fields by cycling between element and
//! nodal values: volume-weighted averages from elements to nodes, simple
//! averages from nodes back to elements. Both passes are linear with unit
//! row sums, so constants pass through unchanged and the range never grows.

use crate::mesh::Mesh;

#[derive(Debug, Clone)]
pub struct Smoother {
    element_nodes: Vec<Vec<usize>>,
    node_elements: Vec<Vec<usize>>,
    measures: Vec<f64>,
    node_measure_sum: Vec<f64>,
    n_nodes: usize,
}

impl Smoother {
    pub fn new(mesh: &Mesh) -> Self {
        let n_nodes = mesh.node_count();
        let element_nodes: Vec<Vec<usize>> =
            mesh.elements.iter().map(|e| e.node_ids().to_vec()).collect();
        let mut node_elements = vec![Vec::new(); n_nodes];
        for (e, nodes) in element_nodes.iter().enumerate() {
            for &n in nodes {
                node_elements[n].push(e);
            }
        }
        let measures: Vec<f64> =
            (0..mesh.elements.len()).map(|e| mesh.element_measure(e)).collect();
        let node_measure_sum: Vec<f64> = node_elements
            .iter()
            .map(|elems| elems.iter().map(|&e| measures[e]).sum())
            .collect();
        Self { element_nodes, node_elements, measures, node_measure_sum, n_nodes }
    }

    /// One element -> node -> element averaging cycle, repeated `steps`
    /// times. `steps = 0` returns the input unchanged.
    pub fn apply(&self, field: &[f64], steps: usize) -> Vec<f64> {
        assert_eq!(field.len(), self.element_nodes.len(), "field length mismatch");
        let mut g = field.to_vec();
        let mut nodal = vec![0.0; self.n_nodes];
        for _ in 0..steps {
            for (p, elems) in self.node_elements.iter().enumerate() {
                if elems.is_empty() {
                    nodal[p] = 0.0;
                    continue;
                }
                let weighted: f64 = elems.iter().map(|&e| g[e] * self.measures[e]).sum();
                nodal[p] = weighted / self.node_measure_sum[p];
            }
            for (e, nodes) in self.element_nodes.iter().enumerate() {
                g[e] = nodes.iter().map(|&p| nodal[p]).sum::<f64>() / nodes.len() as f64;
            }
        }
        g
    }
}

/// Convenience wrapper building a throwaway [`Smoother`].
pub fn smooth(mesh: &Mesh, field: &[f64], steps: usize) -> Vec<f64> {
    Smoother::new(mesh).apply(field, steps)
}
