//! Leaf parametrizations on the positive orthant and the coordinate strata.

use nalgebra::DMatrix;
use serde::Serialize;

use super::canonical::{FoliationReport, HolonomyCase};
use crate::error::{Error, Result};

/// A symplectic leaf through `(0, x₀)`, `x₀ ∈ P⁺`, as a map from parameters
/// to points `(θ, x)`.
///
/// With `ψ` the adapted basis, Case `μ ∈ Im a` uses `θ = t₁` and
/// `ln x = ln x₀ + Σ_{j≤2s} ψ_{:,j} t_j`; otherwise `θ = t₀` is free and
/// `ln x = ln x₀ + Σ_{j≤2s+1} ψ_{:,j} t_j`.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub x0: Vec<f64>,
    pub case: HolonomyCase,
    directions: DMatrix<f64>,
}

impl Leaf {
    pub fn n(&self) -> usize {
        self.x0.len()
    }

    /// Number of parameters, equal to the leaf dimension.
    pub fn dim(&self) -> usize {
        match self.case {
            HolonomyCase::MuInImage => self.directions.ncols(),
            HolonomyCase::MuNotInImage => self.directions.ncols() + 1,
        }
    }

    /// Log-coordinate directions `ψ_{:,j}` used by the parametrization.
    pub fn directions(&self) -> &DMatrix<f64> {
        &self.directions
    }

    fn log_shift(&self, t: &[f64]) -> Vec<f64> {
        let coeffs = match self.case {
            HolonomyCase::MuInImage => t,
            HolonomyCase::MuNotInImage => &t[1..],
        };
        (0..self.n())
            .map(|i| (0..coeffs.len()).map(|j| self.directions[(i, j)] * coeffs[j]).sum())
            .collect()
    }

    /// The point `(θ, x)` at parameters `t`; `θ` is not reduced mod 2π.
    pub fn eval(&self, t: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(t.len(), self.dim(), "parameter count");
        let shift = self.log_shift(t);
        let x = self.x0.iter().zip(&shift).map(|(x, s)| x * s.exp()).collect();
        (t[0], x)
    }

    /// Partial derivatives `∂(θ, x)/∂t_j` at `t`.
    pub fn tangents(&self, t: &[f64]) -> Vec<Vec<f64>> {
        let (_, x) = self.eval(t);
        let n = self.n();
        let column = |j: usize, dtheta: f64| {
            let mut v = vec![dtheta];
            v.extend((0..n).map(|i| x[i] * self.directions[(i, j)]));
            v
        };
        match self.case {
            HolonomyCase::MuInImage => (0..self.directions.ncols())
                .map(|j| column(j, if j == 0 { 1.0 } else { 0.0 }))
                .collect(),
            HolonomyCase::MuNotInImage => {
                let mut out = vec![{
                    let mut e = vec![0.0; n + 1];
                    e[0] = 1.0;
                    e
                }];
                out.extend((0..self.directions.ncols()).map(|j| column(j, 0.0)));
                out
            }
        }
    }

    /// Endpoint of the once-around continuation starting at `x₀`, when the
    /// leaf has holonomy.
    pub fn holonomy_endpoint(&self) -> Option<Vec<f64>> {
        match self.case {
            HolonomyCase::MuInImage => Some(
                self.x0
                    .iter()
                    .enumerate()
                    .map(|(i, x)| x * (2.0 * std::f64::consts::PI * self.directions[(i, 0)]).exp())
                    .collect(),
            ),
            HolonomyCase::MuNotInImage => None,
        }
    }
}

/// The leaf through `(0, x₀)` described by `report`.
pub fn leaf_through(x0: &[f64], report: &FoliationReport) -> Result<Leaf> {
    if x0.len() != report.n {
        return Err(Error::DimensionMismatch("x0 length vs n".into()));
    }
    if x0.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::NotInPositiveOrthant(x0.to_vec()));
    }
    let cols = match report.case {
        HolonomyCase::MuInImage => 2 * report.s,
        HolonomyCase::MuNotInImage => 2 * report.s + 1,
    };
    Ok(Leaf {
        x0: x0.to_vec(),
        case: report.case,
        directions: report.psi.columns(0, cols).into_owned(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stratum {
    /// One-based indices of the coordinates left free.
    pub indices: Vec<usize>,
    pub mu: Vec<f64>,
    /// Row-major restriction of `a`.
    pub a: Vec<f64>,
    /// Number of open orthants of the stratum, all isomorphic under reflections.
    pub orthants: usize,
}

/// Strata `P_I = {xᵢ = 0, i ∉ I}` for every `I ⊆ {1..n}`, by size and then
/// lexicographically.
pub fn stratification(mu: &[f64], a: &[f64]) -> Vec<Stratum> {
    let n = mu.len();
    let mut subsets: Vec<Vec<usize>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    subsets
        .into_iter()
        .map(|idx| Stratum {
            mu: idx.iter().map(|&i| mu[i]).collect(),
            a: idx
                .iter()
                .flat_map(|&i| idx.iter().map(move |&j| a[i * n + j]))
                .collect(),
            orthants: 1 << idx.len(),
            indices: idx.iter().map(|i| i + 1).collect(),
        })
        .collect()
}
