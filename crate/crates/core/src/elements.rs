//! Per-element operators: stiffness matrices, strain recovery, thermal loads.
//!
//! Both element types are linear, so each one is fully described by a
//! constant stiffness matrix `K_e` and a constant strain operator `B_e`
//! with `strain = B_e * u_e`. The global model weights `K_e` by the
//! per-element strength factor; nothing in this module depends on it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{Element, Material, Mesh, DEGENERACY_FLOOR};

/// Unweighted element stiffness in global coordinates.
///
/// Truss bars give the standard axial `EA/L` rank-1 block; triangles give
/// the constant-strain plane-stress matrix `B^T D B * (area * thickness)`.
pub fn element_stiffness(mesh: &Mesh, material: &Material, e: usize) -> Result<DMatrix<f64>> {
    match &mesh.elements[e] {
        Element::TrussBar { nodes, area } => {
            let (axis, length) = bar_axis(mesh, *nodes, e)?;
            let dim = mesh.dim;
            let k_axial = material.young_modulus * area / length;
            let mut k = DMatrix::zeros(2 * dim, 2 * dim);
            for i in 0..dim {
                for j in 0..dim {
                    let v = k_axial * axis[i] * axis[j];
                    k[(i, j)] = v;
                    k[(i, dim + j)] = -v;
                    k[(dim + i, j)] = -v;
                    k[(dim + i, dim + j)] = v;
                }
            }
            Ok(k)
        }
        Element::Triangle { nodes, thickness } => {
            let area = checked_triangle_area(mesh, *nodes, e)?;
            let b = triangle_strain_op(mesh, *nodes, area);
            let d = plane_stress_d(material);
            Ok(b.transpose() * d * b * (area * thickness))
        }
    }
}

/// Strain operator `B_e` with `strain = B_e * u_e`.
///
/// Bars report the axial strain (1 row); triangles report
/// `(eps_xx, eps_yy, gamma_xy)` with engineering shear (3 rows).
pub fn strain_operator(mesh: &Mesh, e: usize) -> Result<DMatrix<f64>> {
    match &mesh.elements[e] {
        Element::TrussBar { nodes, .. } => {
            let (axis, length) = bar_axis(mesh, *nodes, e)?;
            let dim = mesh.dim;
            let mut b = DMatrix::zeros(1, 2 * dim);
            for i in 0..dim {
                b[(0, i)] = -axis[i] / length;
                b[(0, dim + i)] = axis[i] / length;
            }
            Ok(b)
        }
        Element::Triangle { nodes, .. } => {
            let area = checked_triangle_area(mesh, *nodes, e)?;
            Ok(triangle_strain_op(mesh, *nodes, area))
        }
    }
}

/// Equivalent nodal load of a uniform thermal pre-strain
/// `eps_t = alpha_exp * delta_t`, unweighted by the strength factor.
pub fn thermal_element_load(
    mesh: &Mesh,
    material: &Material,
    e: usize,
    delta_t: f64,
) -> Result<DVector<f64>> {
    let eps_t = material.alpha_exp * delta_t;
    match &mesh.elements[e] {
        Element::TrussBar { nodes, area } => {
            let (axis, _) = bar_axis(mesh, *nodes, e)?;
            let dim = mesh.dim;
            let f_axial = material.young_modulus * area * eps_t;
            let mut f = DVector::zeros(2 * dim);
            for i in 0..dim {
                f[i] = -f_axial * axis[i];
                f[dim + i] = f_axial * axis[i];
            }
            Ok(f)
        }
        Element::Triangle { nodes, thickness } => {
            let area = checked_triangle_area(mesh, *nodes, e)?;
            let b = triangle_strain_op(mesh, *nodes, area);
            let d = plane_stress_d(material);
            let strain_t = DVector::from_vec(vec![eps_t, eps_t, 0.0]);
            Ok(b.transpose() * d * strain_t * (area * thickness))
        }
    }
}

/// Per-element strains, flattened; bars contribute one component,
/// triangles three.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainField {
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl StrainField {
    pub fn components(&self, e: usize) -> &[f64] {
        &self.values[self.offsets[e]..self.offsets[e + 1]]
    }

    pub fn element_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Recover per-element strains from a full displacement vector.
pub fn compute_strains(mesh: &Mesh, u: &DVector<f64>) -> Result<StrainField> {
    if u.len() != mesh.dof_count() {
        return Err(Error::DimensionMismatch { expected: mesh.dof_count(), got: u.len() });
    }
    let mut offsets = Vec::with_capacity(mesh.elements.len() + 1);
    let mut values = Vec::new();
    offsets.push(0);
    for e in 0..mesh.elements.len() {
        let b = strain_operator(mesh, e)?;
        let dofs = mesh.element_dofs(e);
        let u_e = DVector::from_iterator(dofs.len(), dofs.iter().map(|&d| u[d]));
        let s = &b * u_e;
        values.extend(s.iter());
        offsets.push(values.len());
    }
    Ok(StrainField { offsets, values })
}

/// Plane-stress constitutive matrix.
fn plane_stress_d(material: &Material) -> DMatrix<f64> {
    let e = material.young_modulus;
    let nu = material.poisson;
    let c = e / (1.0 - nu * nu);
    DMatrix::from_row_slice(
        3,
        3,
        &[c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, c * (1.0 - nu) / 2.0],
    )
}

fn bar_axis(mesh: &Mesh, nodes: [usize; 2], e: usize) -> Result<(Vec<f64>, f64)> {
    let a = mesh.node_coord(nodes[0]);
    let b = mesh.node_coord(nodes[1]);
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let length = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
    if !(length > DEGENERACY_FLOOR) {
        return Err(Error::DegenerateElement { id: e, measure: length });
    }
    Ok((diff.iter().map(|d| d / length).collect(), length))
}

fn checked_triangle_area(mesh: &Mesh, nodes: [usize; 3], e: usize) -> Result<f64> {
    let area = mesh.triangle_area(nodes);
    if !(area > DEGENERACY_FLOOR) {
        return Err(Error::DegenerateElement { id: e, measure: area });
    }
    Ok(area)
}

/// CST strain-displacement matrix, rows `(eps_xx, eps_yy, gamma_xy)`.
fn triangle_strain_op(mesh: &Mesh, nodes: [usize; 3], area: f64) -> DMatrix<f64> {
    let p: Vec<&[f64]> = nodes.iter().map(|&n| mesh.node_coord(n)).collect();
    let mut b = DMatrix::zeros(3, 6);
    for i in 0..3 {
        let j = (i + 1) % 3;
        let m = (i + 2) % 3;
        let bi = p[j][1] - p[m][1];
        let ci = p[m][0] - p[j][0];
        b[(0, 2 * i)] = bi;
        b[(1, 2 * i + 1)] = ci;
        b[(2, 2 * i)] = ci;
        b[(2, 2 * i + 1)] = bi;
    }
    b / (2.0 * area)
}
