//! Modular vector field, the invariant record of a normal form and the
//! equivalence test between records.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::normalize::NormalForm;
use crate::perm::permutations;
use crate::poisson::PoissonStructure;
use crate::series::FormalSeries;

/// Components `(Z^θ, Z^{x₁}, …, Z^{xₙ})` of the modular vector field for the
/// volume `dθ∧dx₁∧…∧dxₙ`.
pub fn modular_field(p: &PoissonStructure) -> Vec<FormalSeries> {
    let n = p.nvars();
    let zero = FormalSeries::zero(n, p.order(), p.grid());
    let mut out = Vec::with_capacity(n + 1);
    let mut z_theta = zero.clone();
    for k in 0..n {
        z_theta = &z_theta + &p.theta_bracket(k).derive_x(k);
    }
    out.push(z_theta);
    for i in 0..n {
        let mut z = -&p.theta_bracket(i).derive_theta();
        for k in 0..n {
            if k != i {
                z = &z + &p.bracket(i, k).derive_x(k);
            }
        }
        out.push(z);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantRecord {
    pub n: usize,
    pub mu: Vec<f64>,
    /// Row-major skew matrix.
    pub a: Vec<f64>,
    /// `2π/Σμᵢ`, on the circle where `μ` is measured.
    pub period: f64,
    /// Period on the original circle; half of `period` when `covered`.
    pub base_period: f64,
    pub monodromy: Vec<i8>,
    pub covered: bool,
}

fn trace_check(mu: &[f64]) -> Result<f64> {
    let trace: f64 = mu.iter().sum();
    let scale = mu.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if trace.abs() <= 1e-12 * scale {
        return Err(Error::ZeroModularTrace { trace });
    }
    Ok(trace)
}

impl InvariantRecord {
    pub fn new(mu: Vec<f64>, a: Vec<f64>, monodromy: Vec<i8>, covered: bool) -> Result<Self> {
        let n = mu.len();
        if a.len() != n * n || monodromy.len() != n {
            return Err(Error::DimensionMismatch("record sizes disagree".into()));
        }
        let period = 2.0 * PI / trace_check(&mu)?;
        Ok(Self {
            n,
            mu,
            a,
            period,
            base_period: if covered { period / 2.0 } else { period },
            monodromy,
            covered,
        })
    }

    pub fn from_normal_form(nf: &NormalForm) -> Result<Self> {
        Self::new(nf.mu.clone(), nf.a.clone(), nf.monodromy.clone(), nf.covered)
    }

    pub fn a_entry(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// The same germ described on the double cover: `μ/2`, `a` unchanged.
    pub fn lifted(&self) -> Self {
        if self.covered {
            return self.clone();
        }
        let mu: Vec<f64> = self.mu.iter().map(|m| m / 2.0).collect();
        let period = 2.0 * self.period;
        Self {
            mu,
            period,
            base_period: self.period,
            covered: true,
            ..self.clone()
        }
    }
}

/// `2π/Σμᵢ`.
pub fn modular_period(rec: &InvariantRecord) -> Result<f64> {
    Ok(2.0 * PI / trace_check(&rec.mu)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailingInvariant {
    Dimension,
    Mu,
    A,
    Monodromy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equivalence {
    pub equivalent: bool,
    /// `σ` with `μ₂[σ(i)] = μ₁[i]`, zero-based.
    pub permutation: Option<Vec<usize>>,
    pub failing: Option<FailingInvariant>,
}

/// Searches all index permutations for a match of `μ`, `a` and the monodromy.
pub fn equivalent(r1: &InvariantRecord, r2: &InvariantRecord, tol: f64) -> Equivalence {
    let no = |f| Equivalence {
        equivalent: false,
        permutation: None,
        failing: Some(f),
    };
    if r1.n != r2.n {
        return no(FailingInvariant::Dimension);
    }
    let (r1, r2) = match (r1.covered, r2.covered) {
        (true, false) => (r1.clone(), r2.lifted()),
        (false, true) => (r1.lifted(), r2.clone()),
        _ => (r1.clone(), r2.clone()),
    };
    let n = r1.n;
    let mut deepest = FailingInvariant::Mu;
    for sigma in permutations(n) {
        if (0..n).any(|i| (r2.mu[sigma[i]] - r1.mu[i]).abs() > tol) {
            continue;
        }
        let a_ok = (0..n).all(|i| {
            (0..n).all(|j| (r2.a_entry(sigma[i], sigma[j]) - r1.a_entry(i, j)).abs() <= tol)
        });
        if !a_ok {
            deepest = FailingInvariant::A;
            continue;
        }
        if (0..n).any(|i| r2.monodromy[sigma[i]] != r1.monodromy[i]) {
            if deepest == FailingInvariant::Mu {
                deepest = FailingInvariant::Monodromy;
            }
            continue;
        }
        return Equivalence {
            equivalent: true,
            permutation: Some(sigma),
            failing: None,
        };
    }
    no(deepest)
}
