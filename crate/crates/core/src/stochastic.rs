//! Random-parameter model: uniform box, load groups, tensor-product
//! Gauss-Legendre quadrature, and expectations of sampled quantities.
//!
//! The uniform density over the box is folded into the quadrature weights,
//! which therefore sum to one; everything downstream treats a grid as a
//! discrete probability distribution.

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Default cap on the tensor-grid size (`n_g^d` nodes).
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

/// Box of independent uniform load factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    intervals: Vec<[f64; 2]>,
}

impl ParamBox {
    pub fn new(intervals: Vec<[f64; 2]>) -> Result<Self> {
        for [a, b] in &intervals {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "interval [{a}, {b}] must satisfy a < b"
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        xi.len() == self.dim()
            && xi
                .iter()
                .zip(&self.intervals)
                .all(|(x, [a, b])| *x >= *a && *x <= *b)
    }
}

/// 1-D Gauss-Legendre rule on `[a, b]`: plain quadrature weights summing to
/// `b - a`, exact for polynomials of degree `2n - 1`.
///
/// Nodes of the Legendre polynomial are found by Newton iteration on the
/// three-term recurrence; symmetric pairs are filled in directly.
pub fn gauss_legendre_1d(n: usize, interval: [f64; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidOrder);
    }
    let [a, b] = interval;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            dp = n as f64 * (x * p - if n == 1 { 1.0 } else { p0 }) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = w * half;
        weights[n - 1 - i] = w * half;
    }
    if n % 2 == 1 {
        nodes[n / 2] = mid;
    }
    Ok((nodes, weights))
}

/// Tensor-product quadrature over a parameter box, stored as a discrete
/// probability distribution: weights are positive and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    dim: usize,
    /// Node coordinates, flattened with stride `dim`.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.dim..(k + 1) * self.dim]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Full tensor grid with `n_g` Gauss points per direction, enumerated
/// lexicographically (first coordinate slowest). Size is `n_g^d`.
pub fn tensor_grid(param_box: &ParamBox, n_g: usize) -> Result<QuadratureGrid> {
    tensor_grid_with_cap(param_box, n_g, DEFAULT_GRID_CAP)
}

pub fn tensor_grid_with_cap(
    param_box: &ParamBox,
    n_g: usize,
    cap: usize,
) -> Result<QuadratureGrid> {
    if n_g == 0 {
        return Err(Error::InvalidOrder);
    }
    let d = param_box.dim();
    if d == 0 {
        return Err(Error::InvalidArgument("parameter box must have dimension >= 1".into()));
    }
    let size = (n_g as u128).pow(d as u32);
    if size > cap as u128 {
        return Err(Error::GridTooLarge { size, cap });
    }
    let size = size as usize;

    let mut rules = Vec::with_capacity(d);
    for &interval in param_box.intervals() {
        let (nodes, weights) = gauss_legendre_1d(n_g, interval)?;
        let width = interval[1] - interval[0];
        // fold in the uniform density 1/width so directional weights sum to 1
        let weights: Vec<f64> = weights.iter().map(|w| w / width).collect();
        rules.push((nodes, weights));
    }

    let mut nodes = Vec::with_capacity(size * d);
    let mut weights = Vec::with_capacity(size);
    let mut index = vec![0usize; d];
    for _ in 0..size {
        let mut w = 1.0;
        for (c, &i) in index.iter().enumerate() {
            nodes.push(rules[c].0[i]);
            w *= rules[c].1[i];
        }
        weights.push(w);
        // lexicographic increment, last coordinate fastest
        for c in (0..d).rev() {
            index[c] += 1;
            if index[c] < n_g {
                break;
            }
            index[c] = 0;
        }
    }
    Ok(QuadratureGrid { dim: d, nodes, weights })
}

/// Weighted mean of per-node values over a grid.
pub fn expectation(values: &[f64], grid: &QuadratureGrid) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
    }
    Ok(values.iter().zip(grid.weights()).map(|(v, w)| v * w).sum())
}

/// Partition of the loaded dofs into groups, each scaled by one component
/// of the random vector. Realizes the diagonal scaling of the load.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadGroups {
    group_of_dof: Vec<Option<usize>>,
    n_groups: usize,
}

impl LoadGroups {
    pub fn new(group_of_dof: Vec<Option<usize>>, n_groups: usize) -> Result<Self> {
        for g in group_of_dof.iter().flatten() {
            if *g >= n_groups {
                return Err(Error::InvalidArgument(format!(
                    "group index {g} out of range (n_groups = {n_groups})"
                )));
            }
        }
        Ok(Self { group_of_dof, n_groups })
    }

    /// Every dof with a nonzero load in one single group.
    pub fn single(f_base: &[f64]) -> Self {
        let group_of_dof =
            f_base.iter().map(|&f| if f != 0.0 { Some(0) } else { None }).collect();
        Self { group_of_dof, n_groups: 1 }
    }

    /// Split the loaded dofs into `count` slabs of uniform width along a
    /// coordinate axis of their nodes.
    pub fn uniform_width(
        mesh: &Mesh,
        f_base: &[f64],
        axis: usize,
        count: usize,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument("load group count must be >= 1".into()));
        }
        if axis >= mesh.dim {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for a {}-D mesh",
                mesh.dim
            )));
        }
        if f_base.len() != mesh.dof_count() {
            return Err(Error::DimensionMismatch {
                expected: mesh.dof_count(),
                got: f_base.len(),
            });
        }
        let loaded: Vec<usize> =
            (0..f_base.len()).filter(|&d| f_base[d] != 0.0).collect();
        if loaded.is_empty() {
            return Err(Error::InvalidArgument("no loaded dofs to partition".into()));
        }
        let coord = |dof: usize| mesh.node_coord(dof / mesh.dim)[axis];
        let min = loaded.iter().map(|&d| coord(d)).fold(f64::INFINITY, f64::min);
        let max = loaded.iter().map(|&d| coord(d)).fold(f64::NEG_INFINITY, f64::max);
        let span = max - min;
        if span <= 0.0 && count > 1 {
            return Err(Error::InvalidArgument(
                "loaded dofs span a single coordinate; cannot split into multiple groups".into(),
            ));
        }
        let mut group_of_dof = vec![None; f_base.len()];
        for &d in &loaded {
            let g = if span <= 0.0 {
                0
            } else {
                (((coord(d) - min) / span * count as f64) as usize).min(count - 1)
            };
            group_of_dof[d] = Some(g);
        }
        Ok(Self { group_of_dof, n_groups: count })
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn group_of(&self, dof: usize) -> Option<usize> {
        self.group_of_dof.get(dof).copied().flatten()
    }
}

/// Scale each grouped load entry by its group's component of `xi`;
/// ungrouped entries pass through unchanged.
pub fn scale_loads(f_base: &[f64], groups: &LoadGroups, xi: &[f64]) -> Result<Vec<f64>> {
    if xi.len() != groups.n_groups {
        return Err(Error::DimensionMismatch { expected: groups.n_groups, got: xi.len() });
    }
    if f_base.len() != groups.group_of_dof.len() {
        return Err(Error::DimensionMismatch {
            expected: groups.group_of_dof.len(),
            got: f_base.len(),
        });
    }
    Ok(f_base
        .iter()
        .enumerate()
        .map(|(d, &f)| match groups.group_of_dof[d] {
            Some(g) => xi[g] * f,
            None => f,
        })
        .collect())
}
