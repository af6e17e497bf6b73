//! Fibered diffeomorphisms of `S¹×Rⁿ` near the circle `x = 0`.
//!
//! Every map here sends fibers to fibers: either it moves the base angle and
//! leaves `x` alone, or it fixes `θ` and acts on `x` with a `θ`-dependent
//! formal diffeomorphism fixing the origin.

use crate::error::{Error, Result};
use crate::matrix::FnMatrix;
use crate::periodic::{nodes, PeriodicFn};
use crate::series::{FormalSeries, MultiIndex};

/// Orientation-preserving circle diffeomorphism `χ(θ) = θ + shift(θ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleMap {
    shift: PeriodicFn,
}

impl CircleMap {
    pub fn new(shift: PeriodicFn) -> Result<Self> {
        let slope = shift.derivative().map(|v| 1.0 + v);
        if slope.min() <= 0.0 {
            return Err(Error::NotInvertible("circle map is not strictly increasing"));
        }
        Ok(Self { shift })
    }

    pub fn rotation(grid: usize, angle: f64) -> Self {
        Self {
            shift: PeriodicFn::constant(grid, angle),
        }
    }

    pub fn shift(&self) -> &PeriodicFn {
        &self.shift
    }

    pub fn grid(&self) -> usize {
        self.shift.grid_size()
    }

    /// `χ` on the grid nodes.
    pub fn values(&self) -> Vec<f64> {
        nodes(self.grid())
            .zip(self.shift.samples())
            .map(|(t, s)| t + s)
            .collect()
    }

    /// `χ'` on the grid.
    pub fn slope(&self) -> PeriodicFn {
        self.shift.derivative().map(|v| 1.0 + v)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        theta + self.shift.eval(theta)
    }

    /// `χ⁻¹`, with nodes solved by Newton's method on the interpolant.
    pub fn inverse(&self) -> Result<Self> {
        let interp = self.shift.interpolant();
        let m = self.grid();
        let mut out = Vec::with_capacity(m);
        for target in nodes(m) {
            let mut t = target - interp.eval(target);
            let mut converged = false;
            for _ in 0..60 {
                let residual = t + interp.eval(t) - target;
                let step = residual / (1.0 + interp.eval_derivative(t));
                t -= step;
                if step.abs() < 1e-15 * (1.0 + t.abs()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NotInvertible("circle map inversion did not converge"));
            }
            out.push(t - target);
        }
        Ok(Self {
            shift: PeriodicFn::from_samples(out)?,
        })
    }
}

/// `θ`-dependent formal diffeomorphism of `(Rⁿ, 0)`: `yᵢ = φᵢ(θ, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberwiseMap {
    components: Vec<FormalSeries>,
}

impl FiberwiseMap {
    pub fn new(components: Vec<FormalSeries>) -> Result<Self> {
        let n = components.len();
        let first = components
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty fiberwise map".into()))?;
        let (order, grid) = (first.order(), first.grid());
        for c in &components {
            if c.nvars() != n || c.order() != order || c.grid() != grid {
                return Err(Error::DimensionMismatch(
                    "fiberwise map components disagree in shape".into(),
                ));
            }
            if c.constant_term().max_abs() > 0.0 {
                return Err(Error::DimensionMismatch(
                    "fiberwise map must fix the circle (zero constant term)".into(),
                ));
            }
        }
        let map = Self { components };
        map.linear_part().inverse()?;
        Ok(map)
    }

    pub fn identity(n: usize, order: usize, grid: usize) -> Self {
        Self {
            components: (0..n)
                .map(|i| FormalSeries::variable(n, order, grid, i))
                .collect(),
        }
    }

    pub fn components(&self) -> &[FormalSeries] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn order(&self) -> usize {
        self.components[0].order()
    }

    pub fn grid(&self) -> usize {
        self.components[0].grid()
    }

    /// `G_ij(θ) = ∂φᵢ/∂x_j` at `x = 0`.
    pub fn linear_part(&self) -> FnMatrix {
        let n = self.dim();
        let entries = (0..n * n)
            .map(|k| self.components[k / n].coeff_or_zero(&MultiIndex::unit(k % n)))
            .collect();
        FnMatrix::from_entries(n, entries)
    }

    /// Formal inverse by fixed-point reversion `ψ = G⁻¹(y − h∘ψ)`, one degree
    /// gained per sweep.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim();
        let order = self.order();
        let g_inv = self.linear_part().inverse()?;
        let y: Vec<FormalSeries> = (0..n)
            .map(|i| FormalSeries::variable(n, order, self.grid(), i))
            .collect();
        let nonlinear: Vec<FormalSeries> = self
            .components
            .iter()
            .map(|c| {
                let mut h = c.clone();
                for i in 0..n {
                    h.remove_term(&MultiIndex::unit(i));
                }
                h
            })
            .collect();
        let mut psi = g_inv.apply(&y);
        if nonlinear.iter().any(|h| !h.is_empty()) {
            for _ in 1..order {
                let composed: Vec<FormalSeries> = nonlinear
                    .iter()
                    .map(|h| h.substitute(&psi))
                    .collect::<Result<_>>()?;
                let rhs: Vec<FormalSeries> =
                    y.iter().zip(&composed).map(|(a, b)| a - b).collect();
                psi = g_inv.apply(&rhs);
            }
        }
        Ok(Self { components: psi })
    }

    /// `self ∘ other` (apply `other` first).
    pub fn after(&self, other: &Self) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.substitute(&other.components))
            .collect::<Result<_>>()?;
        Ok(Self { components })
    }
}

/// A fibered change of coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum FiberedDiffeo {
    /// `θ' = χ(θ)`, `x' = x`.
    BaseReparam(CircleMap),
    /// `θ' = θ`, `x' = φ(θ, x)`.
    FiberwiseFormal(FiberwiseMap),
    /// `θ' = θ`, `x' = G(θ) x`.
    LinearFrame(FnMatrix),
    /// Pullback along `(θ̃, x) ↦ (2θ̃, x)`.
    DoubleCover,
    /// `xᵢ ↦ εᵢ xᵢ` with `εᵢ = ±1`.
    Reflection(Vec<i8>),
    /// Apply the entries in order.
    Chain(Vec<FiberedDiffeo>),
}

impl FiberedDiffeo {
    pub fn identity() -> Self {
        FiberedDiffeo::Chain(Vec::new())
    }

    pub fn is_identity(&self) -> bool {
        match self {
            FiberedDiffeo::Chain(steps) => steps.iter().all(FiberedDiffeo::is_identity),
            FiberedDiffeo::Reflection(signs) => signs.iter().all(|&s| s == 1),
            _ => false,
        }
    }

    /// Flattened list of non-chain steps.
    pub fn steps(&self) -> Vec<&FiberedDiffeo> {
        match self {
            FiberedDiffeo::Chain(steps) => steps.iter().flat_map(FiberedDiffeo::steps).collect(),
            other => vec![other],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FiberedDiffeo::BaseReparam(_) => "base-reparametrization",
            FiberedDiffeo::FiberwiseFormal(_) => "fiberwise-formal",
            FiberedDiffeo::LinearFrame(_) => "linear-frame",
            FiberedDiffeo::DoubleCover => "double-cover",
            FiberedDiffeo::Reflection(_) => "reflection",
            FiberedDiffeo::Chain(_) => "chain",
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(match self {
            FiberedDiffeo::BaseReparam(chi) => FiberedDiffeo::BaseReparam(chi.inverse()?),
            FiberedDiffeo::FiberwiseFormal(phi) => FiberedDiffeo::FiberwiseFormal(phi.inverse()?),
            FiberedDiffeo::LinearFrame(g) => FiberedDiffeo::LinearFrame(g.inverse()?),
            FiberedDiffeo::DoubleCover => {
                return Err(Error::NotInvertible("the double cover has no inverse"))
            }
            FiberedDiffeo::Reflection(s) => FiberedDiffeo::Reflection(s.clone()),
            FiberedDiffeo::Chain(steps) => FiberedDiffeo::Chain(
                steps
                    .iter()
                    .rev()
                    .map(FiberedDiffeo::inverse)
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

/// `a ∘ Φ`, truncated at the order of `a`.
pub fn compose(a: &FormalSeries, phi: &FiberedDiffeo) -> Result<FormalSeries> {
    match phi {
        FiberedDiffeo::BaseReparam(chi) => {
            let points = chi.values();
            a.terms().try_fold(
                FormalSeries::zero(a.nvars(), a.order(), a.grid()),
                |mut acc, (p, c)| {
                    acc.set_term(*p, PeriodicFn::from_samples(c.eval_many(&points))?);
                    Ok(acc)
                },
            )
        }
        FiberedDiffeo::FiberwiseFormal(map) => a.substitute(map.components()),
        FiberedDiffeo::LinearFrame(g) => {
            if g.dim() != a.nvars() {
                return Err(Error::DimensionMismatch("frame size vs variable count".into()));
            }
            a.substitute(&g.as_linear_series(a.order()))
        }
        FiberedDiffeo::DoubleCover => Ok(a.map_coeffs(double_angle)),
        FiberedDiffeo::Reflection(signs) => {
            if signs.len() != a.nvars() {
                return Err(Error::DimensionMismatch("reflection size vs variable count".into()));
            }
            Ok(reflect(a, signs))
        }
        FiberedDiffeo::Chain(steps) => steps
            .iter()
            .rev()
            .try_fold(a.clone(), |acc, step| compose(&acc, step)),
    }
}

/// `f(2θ)` on the same grid; exact at the nodes.
pub(crate) fn double_angle(f: &PeriodicFn) -> PeriodicFn {
    let m = f.grid_size();
    let s = f.samples();
    PeriodicFn::from_samples((0..m).map(|k| s[(2 * k) % m]).collect())
        .expect("grid already validated")
}

pub(crate) fn reflect(a: &FormalSeries, signs: &[i8]) -> FormalSeries {
    let mut out = FormalSeries::zero(a.nvars(), a.order(), a.grid());
    for (p, c) in a.terms() {
        let sign: i32 = (0..a.nvars())
            .map(|i| if p.get(i) % 2 == 1 { signs[i] as i32 } else { 1 })
            .product();
        out.set_term(*p, c.scale(sign as f64));
    }
    out
}
