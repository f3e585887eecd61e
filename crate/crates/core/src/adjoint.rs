//! Adjoint solves and the strength-factor gradient.
//!
//! Each quadrature node contributes one adjoint system sharing the forward
//! factorization (the stiffness matrix is symmetric). Samples outside the
//! active risk tail have an identically zero adjoint and their solve is
//! skipped. The gradient in the strength factor is the quadrature-weighted
//! bilinear form of adjoint and forward states through each element matrix.

use nalgebra::DVector;

use crate::assemble::{ElementCache, Factorization};
use crate::error::{Error, Result};
use crate::risk::RiskSpec;
use crate::stochastic::QuadratureGrid;

/// Forward/adjoint pair at one quadrature node; `adjoint = None` marks a
/// sample whose tail activation is zero.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub u: DVector<f64>,
    pub adjoint: Option<DVector<f64>>,
}

/// Solve the adjoint system for one sample. The right-hand side is the raw
/// misfit gradient scaled by the risk activation; returns `None` without
/// solving when that scale vanishes.
pub fn adjoint_solve(
    factorization: &Factorization,
    risk: &RiskSpec,
    sample_value: f64,
    t: f64,
    rhs_raw: &DVector<f64>,
) -> Result<Option<DVector<f64>>> {
    let scale = risk.adjoint_scale(sample_value, t);
    if scale == 0.0 {
        return Ok(None);
    }
    let adj = factorization.solve(&(rhs_raw * scale))?;
    Ok(Some(adj))
}

/// Quadrature-weighted gradient of the scalarized objective in each
/// strength factor: `g_e = sum_k w_k * adj_k^T K_e u_k`, minus the
/// thermal-load sensitivity `adj_k^T f_th,e` when a thermal pre-strain is
/// part of the load (the thermal load carries the same per-element
/// strength weighting as the stiffness).
pub fn gradient_alpha(
    cache: &ElementCache,
    thermal_unit: Option<&[DVector<f64>]>,
    states: &[NodeState],
    grid: &QuadratureGrid,
) -> Result<Vec<f64>> {
    if states.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: states.len() });
    }
    if let Some(loads) = thermal_unit {
        if loads.len() != cache.element_count() {
            return Err(Error::DimensionMismatch {
                expected: cache.element_count(),
                got: loads.len(),
            });
        }
    }
    let mut g = vec![0.0; cache.element_count()];
    for (k, state) in states.iter().enumerate() {
        let Some(adj) = &state.adjoint else { continue };
        let w = grid.weight(k);
        for (e, ge) in g.iter_mut().enumerate() {
            let mut contribution = cache.bilinear(e, adj, &state.u);
            if let Some(loads) = thermal_unit {
                for (i, &dof) in cache.dofs[e].iter().enumerate() {
                    contribution -= adj[dof] * loads[e][i];
                }
            }
            *ge += w * contribution;
        }
    }
    Ok(g)
}
