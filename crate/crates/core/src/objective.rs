//! The misfit functional: sensor readout, local weighting, the weighted
//! least-squares misfit, and its gradient with respect to displacements.

use nalgebra::DVector;

use crate::assemble::ElementCache;
use crate::elements::StrainField;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, SensorKind, SensorSet};

/// Predicted sensor values for a given state: displacement components are
/// selected from `u`, strain components from the per-element strains.
pub fn extract_measurements(
    mesh: &Mesh,
    u: &DVector<f64>,
    strains: &StrainField,
    sensors: &SensorSet,
) -> Result<Vec<f64>> {
    sensors.validate(mesh)?;
    Ok(sensors
        .entries
        .iter()
        .map(|s| match s.kind {
            SensorKind::Displacement => u[mesh.dof(s.location, s.component)],
            SensorKind::Strain => strains.components(s.location)[s.component],
        })
        .collect())
}

/// Local weights `w_j = 1 / measured_j^2`, floored at
/// `(1e-12 * max|measured|)^2` so sensors on near-zero readings stay finite.
pub fn local_weights(measured: &[f64]) -> Result<Vec<f64>> {
    let max_abs = measured.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        return Err(Error::AllZeroMeasurements);
    }
    let floor = 1e-12 * max_abs;
    let floor_sq = floor * floor;
    Ok(measured.iter().map(|v| 1.0 / (v * v).max(floor_sq)).collect())
}

/// `I = 1/2 sum_j w_j (measured_j - predicted_j)^2`.
pub fn misfit(sensors: &SensorSet, predicted: &[f64]) -> Result<f64> {
    if predicted.len() != sensors.len() {
        return Err(Error::DimensionMismatch { expected: sensors.len(), got: predicted.len() });
    }
    Ok(sensors
        .entries
        .iter()
        .zip(predicted)
        .map(|(s, p)| {
            let gap = s.measured - p;
            0.5 * s.weight * gap * gap
        })
        .sum())
}

/// Gradient of the misfit in the displacement vector: the weighted residual
/// scattered back through the selection operators, with strain sensors
/// chained through their element's strain operator.
pub fn misfit_gradient_u(
    mesh: &Mesh,
    cache: &ElementCache,
    sensors: &SensorSet,
    predicted: &[f64],
) -> Result<DVector<f64>> {
    if predicted.len() != sensors.len() {
        return Err(Error::DimensionMismatch { expected: sensors.len(), got: predicted.len() });
    }
    let mut grad = DVector::zeros(mesh.dof_count());
    for (s, p) in sensors.entries.iter().zip(predicted) {
        let coeff = -s.weight * (s.measured - p);
        match s.kind {
            SensorKind::Displacement => {
                grad[mesh.dof(s.location, s.component)] += coeff;
            }
            SensorKind::Strain => {
                let b = &cache.strain_ops[s.location];
                for (i, &dof) in cache.dofs[s.location].iter().enumerate() {
                    grad[dof] += coeff * b[(s.component, i)];
                }
            }
        }
    }
    Ok(grad)
}
