//! Global assembly and the factorized forward operator.
//!
//! The stiffness matrix is the strength-weighted sum of cached element
//! matrices, `K(alpha) = sum_e alpha_e K_e`. Homogeneous Dirichlet
//! constraints are applied by row/column elimination onto a reduced SPD
//! system, factorized once per strength field and reused for every
//! right-hand side (forward and adjoint alike).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::elements::{element_stiffness, strain_operator, thermal_element_load};
use crate::error::{Error, Result};
use crate::mesh::{Material, Mesh, StrengthField};
use crate::sparse::{LdlFactor, SparseSym};

/// Below this many free dofs the reduced system is factorized densely.
pub const DENSE_DOF_LIMIT: usize = 500;

/// Maps full dof indices to the reduced (constraint-free) numbering.
#[derive(Debug, Clone)]
pub struct DofMap {
    reduced_of_full: Vec<Option<usize>>,
    full_of_reduced: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let n = mesh.dof_count();
        let mut constrained = vec![false; n];
        for &(node, c) in &mesh.dirichlet {
            constrained[mesh.dof(node, c)] = true;
        }
        let mut reduced_of_full = vec![None; n];
        let mut full_of_reduced = Vec::new();
        for (dof, &fixed) in constrained.iter().enumerate() {
            if !fixed {
                reduced_of_full[dof] = Some(full_of_reduced.len());
                full_of_reduced.push(dof);
            }
        }
        Self { reduced_of_full, full_of_reduced }
    }

    pub fn n_full(&self) -> usize {
        self.reduced_of_full.len()
    }

    pub fn n_free(&self) -> usize {
        self.full_of_reduced.len()
    }

    pub fn reduced(&self, full_dof: usize) -> Option<usize> {
        self.reduced_of_full[full_dof]
    }

    pub fn reduce_vector(&self, full: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.n_free(), self.full_of_reduced.iter().map(|&d| full[d]))
    }

    pub fn scatter_vector(&self, reduced: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(self.n_full());
        for (r, &d) in self.full_of_reduced.iter().enumerate() {
            full[d] = reduced[r];
        }
        full
    }
}

/// Strength-independent per-element data, computed once per mesh/material.
#[derive(Debug, Clone)]
pub struct ElementCache {
    /// Global dof indices per element, node-major.
    pub dofs: Vec<Vec<usize>>,
    /// Unweighted element stiffness matrices.
    pub stiffness: Vec<DMatrix<f64>>,
    /// Strain operators `B_e`.
    pub strain_ops: Vec<DMatrix<f64>>,
}

impl ElementCache {
    pub fn build(mesh: &Mesh, material: &Material) -> Result<Self> {
        material.validate()?;
        let n = mesh.elements.len();
        let mut dofs = Vec::with_capacity(n);
        let mut stiffness = Vec::with_capacity(n);
        let mut strain_ops = Vec::with_capacity(n);
        for e in 0..n {
            dofs.push(mesh.element_dofs(e));
            stiffness.push(element_stiffness(mesh, material, e)?);
            strain_ops.push(strain_operator(mesh, e)?);
        }
        Ok(Self { dofs, stiffness, strain_ops })
    }

    pub fn element_count(&self) -> usize {
        self.stiffness.len()
    }

    /// `K_e * u_e` gathered from a full displacement vector.
    pub fn stiffness_times_u(&self, e: usize, u: &DVector<f64>) -> DVector<f64> {
        let dofs = &self.dofs[e];
        let u_e = DVector::from_iterator(dofs.len(), dofs.iter().map(|&d| u[d]));
        &self.stiffness[e] * u_e
    }

    /// `v^T K_e u` on element dofs; the per-element gradient kernel.
    pub fn bilinear(&self, e: usize, v: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let dofs = &self.dofs[e];
        let k = &self.stiffness[e];
        let mut acc = 0.0;
        for (i, &di) in dofs.iter().enumerate() {
            let vi = v[di];
            if vi == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for (j, &dj) in dofs.iter().enumerate() {
                row += k[(i, j)] * u[dj];
            }
            acc += vi * row;
        }
        acc
    }
}

enum Backend {
    Dense(Cholesky<f64, Dyn>),
    Sparse(LdlFactor),
}

/// A factorized reduced stiffness matrix `K(alpha)`; immutable and safe to
/// share across concurrent solves.
pub struct Factorization {
    dof_map: DofMap,
    backend: Backend,
}

/// Assemble and factorize the reduced `K(alpha)`.
pub fn factorize(
    cache: &ElementCache,
    alpha: &StrengthField,
    dof_map: &DofMap,
) -> Result<Factorization> {
    if alpha.len() != cache.element_count() {
        return Err(Error::DimensionMismatch {
            expected: cache.element_count(),
            got: alpha.len(),
        });
    }
    let n_free = dof_map.n_free();
    let backend = if n_free < DENSE_DOF_LIMIT {
        let mut k = DMatrix::zeros(n_free, n_free);
        scatter_weighted(cache, alpha, dof_map, |i, j, v| k[(i, j)] += v);
        let chol = k
            .cholesky()
            .ok_or_else(|| Error::SingularSystem("dense Cholesky failed".into()))?;
        Backend::Dense(chol)
    } else {
        let mut triplets = Vec::new();
        scatter_weighted(cache, alpha, dof_map, |i, j, v| {
            if i <= j {
                triplets.push((i, j, v));
            }
        });
        Backend::Sparse(LdlFactor::factor(&SparseSym::from_triplets(n_free, &triplets))?)
    };
    Ok(Factorization { dof_map: dof_map.clone(), backend })
}

fn scatter_weighted(
    cache: &ElementCache,
    alpha: &StrengthField,
    dof_map: &DofMap,
    mut emit: impl FnMut(usize, usize, f64),
) {
    for e in 0..cache.element_count() {
        let a = alpha.values[e];
        let dofs = &cache.dofs[e];
        let k = &cache.stiffness[e];
        for (i, &di) in dofs.iter().enumerate() {
            let Some(ri) = dof_map.reduced(di) else { continue };
            for (j, &dj) in dofs.iter().enumerate() {
                if let Some(rj) = dof_map.reduced(dj) {
                    emit(ri, rj, a * k[(i, j)]);
                }
            }
        }
    }
}

impl Factorization {
    pub fn n_free(&self) -> usize {
        self.dof_map.n_free()
    }

    /// Solve `K u = f` for a full-length load vector; entries of `f` on
    /// constrained dofs are ignored and the returned displacements are
    /// exactly zero there.
    pub fn solve(&self, f_full: &DVector<f64>) -> Result<DVector<f64>> {
        if f_full.len() != self.dof_map.n_full() {
            return Err(Error::DimensionMismatch {
                expected: self.dof_map.n_full(),
                got: f_full.len(),
            });
        }
        let b = self.dof_map.reduce_vector(f_full);
        let x = match &self.backend {
            Backend::Dense(chol) => chol.solve(&b),
            Backend::Sparse(ldl) => ldl.solve(&b),
        };
        Ok(self.dof_map.scatter_vector(&x))
    }
}

/// Unreduced `K(alpha)` as triplets, for tests and reaction recovery.
pub fn full_stiffness_triplets(
    cache: &ElementCache,
    alpha: &StrengthField,
) -> Vec<(usize, usize, f64)> {
    let mut triplets = Vec::new();
    for e in 0..cache.element_count() {
        let a = alpha.values[e];
        let dofs = &cache.dofs[e];
        let k = &cache.stiffness[e];
        for (i, &di) in dofs.iter().enumerate() {
            for (j, &dj) in dofs.iter().enumerate() {
                triplets.push((di, dj, a * k[(i, j)]));
            }
        }
    }
    triplets
}

/// Equivalent nodal forces of a uniform thermal pre-strain over the whole
/// mesh, weighted per element by the strength factor.
pub fn thermal_load(
    mesh: &Mesh,
    material: &Material,
    alpha: &StrengthField,
    delta_t: f64,
) -> Result<DVector<f64>> {
    if alpha.len() != mesh.elements.len() {
        return Err(Error::DimensionMismatch {
            expected: mesh.elements.len(),
            got: alpha.len(),
        });
    }
    let mut f = DVector::zeros(mesh.dof_count());
    for e in 0..mesh.elements.len() {
        let fe = thermal_element_load(mesh, material, e, delta_t)?;
        for (i, &d) in mesh.element_dofs(e).iter().enumerate() {
            f[d] += alpha.values[e] * fe[i];
        }
    }
    Ok(f)
}

/// Reactions `K(alpha) u - f` at the constrained dofs, in `mesh.dirichlet`
/// order. The sign convention is the force the support exerts on the
/// structure.
pub fn reaction_forces(
    mesh: &Mesh,
    cache: &ElementCache,
    alpha: &StrengthField,
    u: &DVector<f64>,
    f_applied: &DVector<f64>,
) -> Result<Vec<((usize, usize), f64)>> {
    if u.len() != mesh.dof_count() || f_applied.len() != mesh.dof_count() {
        return Err(Error::DimensionMismatch {
            expected: mesh.dof_count(),
            got: u.len().max(f_applied.len()),
        });
    }
    let mut ku = DVector::<f64>::zeros(mesh.dof_count());
    for e in 0..cache.element_count() {
        let fe = cache.stiffness_times_u(e, u) * alpha.values[e];
        for (i, &d) in cache.dofs[e].iter().enumerate() {
            ku[d] += fe[i];
        }
    }
    Ok(mesh
        .dirichlet
        .iter()
        .map(|&(node, c)| {
            let d = mesh.dof(node, c);
            ((node, c), ku[d] - f_applied[d])
        })
        .collect())
}
