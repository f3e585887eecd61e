//! The assembled inverse problem: one strength field in, a scalarized
//! objective and its adjoint gradient out.
//!
//! Per evaluation the stiffness matrix is factorized once and reused for
//! every quadrature node (only the load depends on the random vector) and
//! for every adjoint solve. Node evaluations run in parallel; reductions
//! always accumulate in grid order, so results are bit-reproducible
//! regardless of thread count.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::adjoint::{adjoint_solve, gradient_alpha, NodeState};
use crate::assemble::{factorize, DofMap, ElementCache, Factorization};
use crate::elements::thermal_element_load;
use crate::error::{Error, Result};
use crate::mesh::{Material, Mesh, SensorKind, SensorSet, StrengthField};
use crate::objective::{misfit, misfit_gradient_u};
use crate::risk::{RiskSpec, SampledRV};
use crate::smoothing::Smoother;
use crate::stochastic::{scale_loads, LoadGroups, QuadratureGrid};

#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Mesh,
    pub material: Material,
    pub sensors: SensorSet,
    /// Assumed mechanical nodal load before random scaling.
    pub f_base: Vec<f64>,
    pub load_groups: LoadGroups,
    pub grid: QuadratureGrid,
    pub risk: RiskSpec,
    /// Uniform temperature change applied during inversion; 0 disables the
    /// thermal load.
    pub delta_t: f64,
    cache: ElementCache,
    dof_map: DofMap,
    smoother: Smoother,
    /// Per-element thermal loads without strength weighting; present iff
    /// `delta_t != 0`.
    thermal_unit: Option<Vec<DVector<f64>>>,
}

/// Everything produced by one objective evaluation, kept around so the
/// gradient can reuse the factorization and forward states.
pub struct Evaluation {
    pub objective: f64,
    pub t_star: f64,
    pub samples: SampledRV,
    pub states: Vec<DVector<f64>>,
    pub predicted: Vec<Vec<f64>>,
    pub factorization: Factorization,
    pub forward_solves: usize,
}

pub struct Gradient {
    /// Raw adjoint gradient, one entry per element.
    pub raw: Vec<f64>,
    /// Adjoint systems actually solved (inactive tail samples are skipped).
    pub adjoint_solves: usize,
}

impl Problem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: Mesh,
        material: Material,
        sensors: SensorSet,
        f_base: Vec<f64>,
        load_groups: LoadGroups,
        grid: QuadratureGrid,
        risk: RiskSpec,
        delta_t: f64,
    ) -> Result<Self> {
        mesh.validate()?;
        sensors.validate(&mesh)?;
        if f_base.len() != mesh.dof_count() {
            return Err(Error::DimensionMismatch {
                expected: mesh.dof_count(),
                got: f_base.len(),
            });
        }
        if grid.dim() != load_groups.n_groups() {
            return Err(Error::DimensionMismatch {
                expected: load_groups.n_groups(),
                got: grid.dim(),
            });
        }
        let cache = ElementCache::build(&mesh, &material)?;
        let dof_map = DofMap::new(&mesh);
        if dof_map.n_free() == 0 {
            return Err(Error::InvalidMesh("every dof is constrained".into()));
        }
        let smoother = Smoother::new(&mesh);
        let thermal_unit = if delta_t != 0.0 {
            Some(
                (0..mesh.elements.len())
                    .map(|e| thermal_element_load(&mesh, &material, e, delta_t))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        Ok(Self {
            mesh,
            material,
            sensors,
            f_base,
            load_groups,
            grid,
            risk,
            delta_t,
            cache,
            dof_map,
            smoother,
            thermal_unit,
        })
    }

    pub fn element_count(&self) -> usize {
        self.mesh.elements.len()
    }

    pub fn cache(&self) -> &ElementCache {
        &self.cache
    }

    pub fn dof_map(&self) -> &DofMap {
        &self.dof_map
    }

    /// Strength-weighted thermal load vector for the current iterate.
    fn thermal_load_vector(&self, alpha: &StrengthField) -> Option<DVector<f64>> {
        let unit = self.thermal_unit.as_ref()?;
        let mut f = DVector::zeros(self.mesh.dof_count());
        for (e, fe) in unit.iter().enumerate() {
            for (i, &d) in self.cache.dofs[e].iter().enumerate() {
                f[d] += alpha.values[e] * fe[i];
            }
        }
        Some(f)
    }

    /// Predicted sensor values for one state, using cached strain operators.
    fn predict(&self, u: &DVector<f64>) -> Vec<f64> {
        self.sensors
            .entries
            .iter()
            .map(|s| match s.kind {
                SensorKind::Displacement => u[self.mesh.dof(s.location, s.component)],
                SensorKind::Strain => {
                    let b = &self.cache.strain_ops[s.location];
                    self.cache.dofs[s.location]
                        .iter()
                        .enumerate()
                        .map(|(i, &d)| b[(s.component, i)] * u[d])
                        .sum()
                }
            })
            .collect()
    }

    /// Factorize once, solve the forward problem on every quadrature node,
    /// and scalarize the sampled misfit under the configured risk measure.
    pub fn evaluate(&self, alpha: &StrengthField) -> Result<Evaluation> {
        let factorization = factorize(&self.cache, alpha, &self.dof_map)?;
        let f_thermal = self.thermal_load_vector(alpha);

        let per_node: Vec<(DVector<f64>, Vec<f64>, f64)> = (0..self.grid.len())
            .into_par_iter()
            .map(|k| -> Result<_> {
                let mut f = scale_loads(&self.f_base, &self.load_groups, self.grid.node(k))?;
                if let Some(ft) = &f_thermal {
                    for (fi, ti) in f.iter_mut().zip(ft.iter()) {
                        *fi += ti;
                    }
                }
                let u = factorization.solve(&DVector::from_vec(f))?;
                let predicted = self.predict(&u);
                let value = misfit(&self.sensors, &predicted)?;
                Ok((u, predicted, value))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut states = Vec::with_capacity(per_node.len());
        let mut predicted = Vec::with_capacity(per_node.len());
        let mut values = Vec::with_capacity(per_node.len());
        for (u, p, v) in per_node {
            states.push(u);
            predicted.push(p);
            values.push(v);
        }
        let samples = SampledRV::new(values, self.grid.weights().to_vec())?;
        let (objective, t_star) = self.risk.scalarize(&samples);
        Ok(Evaluation {
            objective,
            t_star,
            samples,
            states,
            predicted,
            factorization,
            forward_solves: self.grid.len(),
        })
    }

    /// Adjoint gradient of the scalarized objective in the strength factors,
    /// evaluated at the threshold the evaluation minimized over.
    pub fn gradient(&self, evaluation: &Evaluation) -> Result<Gradient> {
        let node_states: Vec<NodeState> = (0..self.grid.len())
            .into_par_iter()
            .map(|k| -> Result<NodeState> {
                let rhs = misfit_gradient_u(
                    &self.mesh,
                    &self.cache,
                    &self.sensors,
                    &evaluation.predicted[k],
                )?;
                let adj = adjoint_solve(
                    &evaluation.factorization,
                    &self.risk,
                    evaluation.samples.values[k],
                    evaluation.t_star,
                    &rhs,
                )?;
                Ok(NodeState { u: evaluation.states[k].clone(), adjoint: adj })
            })
            .collect::<Result<Vec<_>>>()?;

        let adjoint_solves = node_states.iter().filter(|s| s.adjoint.is_some()).count();
        let raw = gradient_alpha(
            &self.cache,
            self.thermal_unit.as_deref(),
            &node_states,
            &self.grid,
        )?;
        Ok(Gradient { raw, adjoint_solves })
    }

    /// Element/point averaging cycles applied to an element field.
    pub fn smooth(&self, field: &[f64], steps: usize) -> Vec<f64> {
        self.smoother.apply(field, steps)
    }
}
