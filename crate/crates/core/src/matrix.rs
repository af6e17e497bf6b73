//! Square matrices whose entries are periodic functions of `θ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::periodic::{nodes, PeriodicFn};
use crate::series::FormalSeries;

/// Smallest admissible ratio of extreme singular values at any node.
const MIN_CONDITION: f64 = 1e-12;

/// Row-major `n×n` matrix of [`PeriodicFn`] on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FnMatrix {
    n: usize,
    grid: usize,
    entries: Vec<PeriodicFn>,
}

impl FnMatrix {
    pub fn from_entries(n: usize, entries: Vec<PeriodicFn>) -> Self {
        assert_eq!(entries.len(), n * n);
        let grid = entries.first().map_or(4, PeriodicFn::grid_size);
        assert!(entries.iter().all(|e| e.grid_size() == grid));
        Self { n, grid, entries }
    }

    pub fn identity(n: usize, grid: usize) -> Self {
        Self::from_entries(
            n,
            (0..n * n)
                .map(|k| PeriodicFn::constant(grid, if k / n == k % n { 1.0 } else { 0.0 }))
                .collect(),
        )
    }

    pub fn diagonal(diag: &[PeriodicFn]) -> Self {
        let n = diag.len();
        let grid = diag.first().map_or(4, PeriodicFn::grid_size);
        Self::from_entries(
            n,
            (0..n * n)
                .map(|k| {
                    if k / n == k % n {
                        diag[k / n].clone()
                    } else {
                        PeriodicFn::zeros(grid)
                    }
                })
                .collect(),
        )
    }

    /// Constant matrix from row-major values.
    pub fn constant(n: usize, grid: usize, values: &[f64]) -> Self {
        Self::from_entries(n, values.iter().map(|&v| PeriodicFn::constant(grid, v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn get(&self, i: usize, j: usize) -> &PeriodicFn {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: PeriodicFn) {
        self.entries[i * self.n + j] = f;
    }

    pub fn at_node(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).samples()[k])
    }

    pub fn from_nodes(mats: &[DMatrix<f64>]) -> Result<Self> {
        let grid = mats.len();
        let n = mats.first().map_or(0, |m| m.nrows());
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(PeriodicFn::from_samples(mats.iter().map(|m| m[(i, j)]).collect())?);
            }
        }
        Ok(Self { n, grid, entries })
    }

    pub fn map(&self, f: impl Fn(&PeriodicFn) -> PeriodicFn) -> Self {
        Self::from_entries(self.n, self.entries.iter().map(f).collect())
    }

    pub fn derivative(&self) -> Self {
        self.map(PeriodicFn::derivative)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = PeriodicFn::zeros(self.grid);
                for k in 0..n {
                    acc = &acc + &(self.get(i, k) * other.get(k, j));
                }
                entries.push(acc);
            }
        }
        Self::from_entries(n, entries)
    }

    /// Pointwise inverse; fails when some node is numerically singular.
    pub fn inverse(&self) -> Result<Self> {
        let thetas: Vec<f64> = nodes(self.grid).collect();
        let mut inv = Vec::with_capacity(self.grid);
        for (k, &theta) in thetas.iter().enumerate() {
            let a = self.at_node(k);
            let sv = a.singular_values();
            let smax = sv.max();
            let smin = sv.min();
            let cond = if smax > 0.0 { smin / smax } else { 0.0 };
            if cond < MIN_CONDITION {
                return Err(Error::NonInvertibleLinearPart { theta, cond });
            }
            inv.push(
                a.try_inverse()
                    .ok_or(Error::NonInvertibleLinearPart { theta, cond })?,
            );
        }
        Self::from_nodes(&inv)
    }

    /// `(G v)_i = Σ_j G_ij v_j` for a vector of series.
    pub fn apply(&self, v: &[FormalSeries]) -> Vec<FormalSeries> {
        (0..self.n)
            .map(|i| {
                let mut acc = FormalSeries::zero(v[0].nvars(), v[0].order(), v[0].grid());
                for (j, vj) in v.iter().enumerate() {
                    acc = &acc + &vj.mul_fn(self.get(i, j));
                }
                acc
            })
            .collect()
    }

    /// Linear coordinate functions `yᵢ = Σ_j G_ij(θ) x_j`.
    pub fn as_linear_series(&self, order: usize) -> Vec<FormalSeries> {
        let vars: Vec<FormalSeries> = (0..self.n)
            .map(|i| FormalSeries::variable(self.n, order, self.grid, i))
            .collect();
        self.apply(&vars)
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).max_abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, e| m.max(e.max_abs()))
    }
}
