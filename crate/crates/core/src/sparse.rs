//! Minimal simplicial sparse LDL^T for symmetric positive definite systems.
//!
//! Up-looking factorization over the elimination tree, after Davis,
//! "Algorithm 849: A concise sparse Cholesky factorization package".
//! No fill-reducing ordering is applied; the meshes this crate targets are
//! banded enough that plain natural order stays cheap.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Upper triangle of a symmetric matrix in compressed sparse column form.
/// Row indices within each column are sorted and unique.
#[derive(Debug, Clone)]
pub struct SparseSym {
    n: usize,
    colptr: Vec<usize>,
    rowind: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSym {
    /// Build from (row, col, value) triplets; entries below the diagonal are
    /// mirrored onto the upper triangle and duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            let (r, c) = if i <= j { (i, j) } else { (j, i) };
            cols[c].push((r, v));
        }
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowind = Vec::new();
        let mut values = Vec::new();
        colptr.push(0);
        for col in &mut cols {
            col.sort_by_key(|&(r, _)| r);
            let mut last: Option<usize> = None;
            for &(r, v) in col.iter() {
                if last == Some(r) {
                    *values.last_mut().unwrap() += v;
                } else {
                    rowind.push(r);
                    values.push(v);
                    last = Some(r);
                }
            }
            colptr.push(rowind.len());
        }
        Self { n, colptr, rowind, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// L D L^T factors with unit lower-triangular L.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl LdlFactor {
    pub fn factor(a: &SparseSym) -> Result<Self> {
        let n = a.n;
        let mut parent = vec![usize::MAX; n];
        let mut lnz = vec![0usize; n];
        let mut flag = vec![usize::MAX; n];

        // symbolic: elimination tree and column counts of L
        for j in 0..n {
            flag[j] = j;
            for p in a.colptr[j]..a.colptr[j + 1] {
                let mut i = a.rowind[p];
                while i < j && flag[i] != j {
                    if parent[i] == usize::MAX {
                        parent[i] = j;
                    }
                    lnz[i] += 1;
                    flag[i] = j;
                    i = parent[i];
                }
            }
        }

        let mut lp = vec![0usize; n + 1];
        for j in 0..n {
            lp[j + 1] = lp[j] + lnz[j];
        }
        let nnz = lp[n];
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0f64; nnz];
        let mut d = vec![0.0f64; n];
        let mut next = lp.clone(); // insertion cursor per column of L
        let mut y = vec![0.0f64; n];
        let mut pattern = vec![0usize; n];

        for j in 0..n {
            // scatter column j of A (upper part) into y, collect reach of the etree
            let mut top = n;
            flag[j] = j;
            for p in a.colptr[j]..a.colptr[j + 1] {
                let row = a.rowind[p];
                if row > j {
                    continue;
                }
                y[row] += a.values[p];
                let mut len = 0;
                let mut i = row;
                while i < j && flag[i] != j {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = j;
                    i = parent[i];
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    pattern[top] = pattern[len];
                }
            }

            d[j] = y[j];
            y[j] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                for p in lp[i]..next[i] {
                    y[li[p]] -= lx[p] * yi;
                }
                let lji = yi / d[i];
                d[j] -= lji * yi;
                li[next[i]] = j;
                lx[next[i]] = lji;
                next[i] += 1;
            }
            if !(d[j] > 0.0) || !d[j].is_finite() {
                return Err(Error::SingularSystem(format!(
                    "non-positive pivot {} at column {j}",
                    d[j]
                )));
            }
        }

        Ok(Self { n, lp, li, lx, d })
    }

    /// Solve `L D L^T x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        for j in 0..self.n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for j in 0..self.n {
            x[j] /= self.d[j];
        }
        for j in (0..self.n).rev() {
            let mut xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                xj -= self.lx[p] * x[self.li[p]];
            }
            x[j] = xj;
        }
        x
    }
}
