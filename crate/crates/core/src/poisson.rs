//! Poisson bivectors on a neighborhood of `Γ = S¹×{0}` given by their
//! coordinate brackets `{θ, xᵢ}` and `{xᵢ, x_j}`.

use nalgebra::DMatrix;

use crate::diffeo::{double_angle, reflect, FiberedDiffeo, FiberwiseMap};
use crate::error::{Error, Result};
use crate::matrix::FnMatrix;
use crate::periodic::PeriodicFn;
use crate::series::{FormalSeries, MultiIndex, SeriesEvaluator};

/// Relative tolerance for the skew-symmetry check at construction.
const SKEW_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonStructure {
    nvars: usize,
    order: usize,
    grid: usize,
    theta: Vec<FormalSeries>,
    pairs: Vec<FormalSeries>,
}

impl PoissonStructure {
    /// Builds a structure from `{θ, xᵢ}` and the full matrix `{xᵢ, x_j}`.
    pub fn new(theta: Vec<FormalSeries>, pairs: Vec<Vec<FormalSeries>>) -> Result<Self> {
        let n = theta.len();
        let first = theta
            .first()
            .ok_or_else(|| Error::DimensionMismatch("structure needs at least one variable".into()))?;
        let (order, grid) = (first.order(), first.grid());
        let shape_ok = |s: &FormalSeries| s.nvars() == n && s.order() == order && s.grid() == grid;
        if pairs.len() != n || pairs.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch("bracket matrix must be n×n".into()));
        }
        if !theta.iter().all(shape_ok) || !pairs.iter().flatten().all(shape_ok) {
            return Err(Error::DimensionMismatch("brackets disagree in n, N or M".into()));
        }
        let scale = pairs
            .iter()
            .flatten()
            .fold(1.0f64, |m, s| m.max(s.max_coeff()));
        for i in 0..n {
            if pairs[i][i].max_coeff() > SKEW_TOL * scale {
                return Err(Error::SkewViolation(format!("{{x{0},x{0}}} is nonzero", i + 1)));
            }
            for j in i + 1..n {
                let sum = &pairs[i][j] + &pairs[j][i];
                if sum.max_coeff() > SKEW_TOL * scale {
                    return Err(Error::SkewViolation(format!(
                        "{{x{},x{}}} ≠ -{{x{},x{}}} (deviation {:e})",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1,
                        sum.max_coeff()
                    )));
                }
            }
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in pairs.into_iter().enumerate() {
            for (j, s) in row.into_iter().enumerate() {
                flat.push(if i == j {
                    FormalSeries::zero(n, order, grid)
                } else {
                    s
                });
            }
        }
        Ok(Self {
            nvars: n,
            order,
            grid,
            theta,
            pairs: flat,
        })
    }

    /// Builds a structure from `{θ, xᵢ}` and `{xᵢ, x_j}` for `i < j`; the lower
    /// triangle is filled in by skew-symmetry.
    pub fn from_upper(
        theta: Vec<FormalSeries>,
        upper: impl Fn(usize, usize) -> FormalSeries,
    ) -> Result<Self> {
        let n = theta.len();
        let first = theta
            .first()
            .ok_or_else(|| Error::DimensionMismatch("structure needs at least one variable".into()))?;
        let (order, grid) = (first.order(), first.grid());
        let mut pairs = vec![vec![FormalSeries::zero(n, order, grid); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let s = upper(i, j);
                pairs[j][i] = -&s;
                pairs[i][j] = s;
            }
        }
        Self::new(theta, pairs)
    }

    /// `{θ, xᵢ} = μᵢ xᵢ`, `{xᵢ, x_j} = a_ij xᵢ x_j` with constant `μ` and
    /// skew `a` given row-major.
    pub fn normal_form(mu: &[f64], a: &[f64], order: usize, grid: usize) -> Result<Self> {
        let n = mu.len();
        if a.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "a must have {} entries, got {}",
                n * n,
                a.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if (a[i * n + j] + a[j * n + i]).abs() > SKEW_TOL * (1.0 + a[i * n + j].abs()) {
                    return Err(Error::SkewViolation(format!("a[{i}][{j}] vs a[{j}][{i}]")));
                }
            }
        }
        let theta = (0..n)
            .map(|i| FormalSeries::variable(n, order, grid, i).scale(mu[i]))
            .collect();
        Self::from_upper(theta, |i, j| {
            FormalSeries::monomial(
                n,
                order,
                MultiIndex::pair(i, j),
                PeriodicFn::constant(grid, a[i * n + j]),
            )
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// `{θ, xᵢ}`.
    pub fn theta_bracket(&self, i: usize) -> &FormalSeries {
        &self.theta[i]
    }

    /// `{xᵢ, x_j}`.
    pub fn bracket(&self, i: usize, j: usize) -> &FormalSeries {
        &self.pairs[i * self.nvars + j]
    }

    pub fn theta_brackets(&self) -> &[FormalSeries] {
        &self.theta
    }

    fn zero_series(&self) -> FormalSeries {
        FormalSeries::zero(self.nvars, self.order, self.grid)
    }

    fn var(&self, i: usize) -> FormalSeries {
        FormalSeries::variable(self.nvars, self.order, self.grid, i)
    }

    /// Largest constant term among all brackets.
    pub fn max_constant_term(&self) -> f64 {
        self.theta
            .iter()
            .chain(&self.pairs)
            .fold(0.0f64, |m, s| m.max(s.constant_term().max_abs()))
    }

    pub fn max_coeff(&self) -> f64 {
        self.theta
            .iter()
            .chain(&self.pairs)
            .fold(0.0f64, |m, s| m.max(s.max_coeff()))
    }

    pub fn check_vanishing_on_gamma(&self, tol: f64) -> Result<()> {
        let max = self.max_constant_term();
        if max > tol {
            Err(Error::NotVanishingOnGamma { max })
        } else {
            Ok(())
        }
    }

    /// `{θ, g}` for an arbitrary series `g`.
    pub fn bracket_theta_with(&self, g: &FormalSeries) -> FormalSeries {
        let mut out = self.zero_series();
        for k in 0..self.nvars {
            let dg = g.derive_x(k);
            if !dg.is_empty() {
                out = &out + &(&dg * &self.theta[k]);
            }
        }
        out
    }

    /// `{f, g}` by the Leibniz expansion over the coordinate brackets.
    pub fn bracket_of(&self, f: &FormalSeries, g: &FormalSeries) -> FormalSeries {
        let n = self.nvars;
        let df: Vec<FormalSeries> = (0..n).map(|k| f.derive_x(k)).collect();
        let dg: Vec<FormalSeries> = (0..n).map(|k| g.derive_x(k)).collect();
        let dtf = f.derive_theta();
        let dtg = g.derive_theta();
        let mut out = self.zero_series();
        for k in 0..n {
            let mixed = &(&dtf * &dg[k]) - &(&df[k] * &dtg);
            if !mixed.is_empty() {
                out = &out + &(&mixed * &self.theta[k]);
            }
        }
        for k in 0..n {
            for l in k + 1..n {
                let cross = &(&df[k] * &dg[l]) - &(&df[l] * &dg[k]);
                if !cross.is_empty() {
                    out = &out + &(&cross * self.bracket(k, l));
                }
            }
        }
        out
    }

    /// Max coefficient-wise difference between two structures of equal shape.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.theta
            .iter()
            .zip(&other.theta)
            .chain(self.pairs.iter().zip(&other.pairs))
            .fold(0.0f64, |m, (a, b)| m.max(a.max_deviation(b)))
    }

    pub fn tail_energy(&self) -> f64 {
        self.theta
            .iter()
            .chain(&self.pairs)
            .fold(0.0f64, |m, s| m.max(s.tail_energy()))
    }

    /// Same brackets at a different truncation order.
    pub fn with_order(&self, order: usize) -> Self {
        Self {
            nvars: self.nvars,
            order,
            grid: self.grid,
            theta: self.theta.iter().map(|s| s.with_order(order)).collect(),
            pairs: self.pairs.iter().map(|s| s.with_order(order)).collect(),
        }
    }

    /// Restriction to `{x_i = 0 : i ∉ keep}`, re-indexed in the order of `keep`.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let theta = keep.iter().map(|&i| self.theta[i].restrict(keep)).collect();
        let pairs = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| self.bracket(i, j).restrict(keep)).collect())
            .collect();
        Self::new(theta, pairs)
    }

    /// Relabels coordinates: old `x_i` becomes new `x_{perm[i]}`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.nvars;
        let mut inv = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let theta = (0..n).map(|new| self.theta[inv[new]].permute(perm)).collect();
        let pairs = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| self.bracket(inv[a], inv[b]).permute(perm))
                    .collect()
            })
            .collect();
        Self::new(theta, pairs)
    }

    /// Point evaluator for the bracket matrix.
    pub fn evaluator(&self) -> StructureEvaluator {
        StructureEvaluator {
            nvars: self.nvars,
            theta: self.theta.iter().map(FormalSeries::evaluator).collect(),
            pairs: (0..self.nvars)
                .flat_map(|i| (i + 1..self.nvars).map(move |j| (i, j)))
                .map(|(i, j)| (i, j, self.bracket(i, j).evaluator()))
                .collect(),
        }
    }
}

/// The two-dimensional example with Möbius eigenbundles:
/// `{θ,x₁} = x₁(λc²+μs²) + x₂(μ−λ)cs`, `{θ,x₂} = x₁(μ−λ)cs + x₂(λs²+μc²)`,
/// `{x₁,x₂} = ½x₁²(λc²+μs²) + ½x₂²(λs²+μc²) + x₁x₂(μ−λ)cs`,
/// with `c = cos(θ/2)`, `s = sin(θ/2)`.
pub fn mobius_example(lambda: f64, mu: f64, order: usize, grid: usize) -> Result<PoissonStructure> {
    crate::periodic::check_grid(grid)?;
    let first = PeriodicFn::from_fn(grid, |t| 0.5 * (lambda + mu) + 0.5 * (lambda - mu) * t.cos());
    let second = PeriodicFn::from_fn(grid, |t| 0.5 * (lambda + mu) - 0.5 * (lambda - mu) * t.cos());
    let cross = PeriodicFn::from_fn(grid, |t| 0.5 * (mu - lambda) * t.sin());
    let mono = |e: &[u32], c: &PeriodicFn| {
        FormalSeries::monomial(2, order, MultiIndex::from_exponents(e), c.clone())
    };
    let theta = vec![
        &mono(&[1, 0], &first) + &mono(&[0, 1], &cross),
        &mono(&[1, 0], &cross) + &mono(&[0, 1], &second),
    ];
    let b12 = &(&mono(&[2, 0], &first.scale(0.5)) + &mono(&[0, 2], &second.scale(0.5)))
        + &mono(&[1, 1], &cross);
    PoissonStructure::from_upper(theta, |_, _| b12.clone())
}

/// Evaluates the `(n+1)×(n+1)` bracket matrix `{z_a, z_b}`, `z = (θ, x)`.
pub struct StructureEvaluator {
    nvars: usize,
    theta: Vec<SeriesEvaluator>,
    pairs: Vec<(usize, usize, SeriesEvaluator)>,
}

impl StructureEvaluator {
    pub fn matrix(&self, theta: f64, x: &[f64]) -> DMatrix<f64> {
        let n = self.nvars;
        let mut m = DMatrix::zeros(n + 1, n + 1);
        for (i, e) in self.theta.iter().enumerate() {
            let v = e.eval(theta, x);
            m[(0, i + 1)] = v;
            m[(i + 1, 0)] = -v;
        }
        for (i, j, e) in &self.pairs {
            let v = e.eval(theta, x);
            m[(i + 1, j + 1)] = v;
            m[(j + 1, i + 1)] = -v;
        }
        m
    }
}

/// Which coordinate triple a Jacobiator component belongs to (zero-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triple {
    Theta(usize, usize),
    Transverse(usize, usize, usize),
}

#[derive(Clone, Debug)]
pub struct Jacobiator {
    pub components: Vec<(Triple, FormalSeries)>,
    pub norm: f64,
}

/// Cyclic sums `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` over the coordinate triples
/// `(θ, xᵢ, x_j)` and `(xᵢ, x_j, x_k)`.
pub fn jacobiator(p: &PoissonStructure) -> Jacobiator {
    let n = p.nvars;
    let vars: Vec<FormalSeries> = (0..n).map(|i| p.var(i)).collect();
    let mut components = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let a = p.bracket_theta_with(p.bracket(i, j));
            let b = p.bracket_of(&vars[i], &(-p.theta_bracket(j)));
            let c = p.bracket_of(&vars[j], p.theta_bracket(i));
            components.push((Triple::Theta(i, j), &(&a + &b) + &c));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let a = p.bracket_of(&vars[i], p.bracket(j, k));
                let b = p.bracket_of(&vars[j], p.bracket(k, i));
                let c = p.bracket_of(&vars[k], p.bracket(i, j));
                components.push((Triple::Transverse(i, j, k), &(&a + &b) + &c));
            }
        }
    }
    let norm = components
        .iter()
        .fold(0.0f64, |m, (_, s)| m.max(s.max_coeff()));
    Jacobiator { components, norm }
}

/// Pushforward `Φ_* P`: the brackets of the new coordinates, expressed in the
/// new coordinates. For [`FiberedDiffeo::DoubleCover`] this is the pullback to
/// the source circle of `(θ̃, x) ↦ (2θ̃, x)`.
pub fn transform(p: &PoissonStructure, phi: &FiberedDiffeo) -> Result<PoissonStructure> {
    match phi {
        FiberedDiffeo::BaseReparam(chi) => {
            let back = FiberedDiffeo::BaseReparam(chi.inverse()?);
            let slope = chi.slope();
            let theta = p
                .theta
                .iter()
                .map(|s| crate::diffeo::compose(&s.mul_fn(&slope), &back))
                .collect::<Result<Vec<_>>>()?;
            let pairs = p
                .pairs
                .iter()
                .map(|s| crate::diffeo::compose(s, &back))
                .collect::<Result<Vec<_>>>()?;
            Ok(PoissonStructure { theta, pairs, ..p.clone() })
        }
        FiberedDiffeo::FiberwiseFormal(map) => {
            let inverse = map.inverse()?;
            transform_fiberwise(p, map, &inverse)
        }
        FiberedDiffeo::LinearFrame(g) => {
            if g.dim() != p.nvars {
                return Err(Error::DimensionMismatch("frame size vs variable count".into()));
            }
            let forward = FiberwiseMap::new(g.as_linear_series(p.order))?;
            let inverse = FiberwiseMap::new(g.inverse()?.as_linear_series(p.order))?;
            transform_fiberwise(p, &forward, &inverse)
        }
        FiberedDiffeo::DoubleCover => Ok(PoissonStructure {
            theta: p
                .theta
                .iter()
                .map(|s| s.map_coeffs(double_angle).scale(0.5))
                .collect(),
            pairs: p.pairs.iter().map(|s| s.map_coeffs(double_angle)).collect(),
            ..p.clone()
        }),
        FiberedDiffeo::Reflection(signs) => {
            if signs.len() != p.nvars {
                return Err(Error::DimensionMismatch("reflection size vs variable count".into()));
            }
            let n = p.nvars;
            let theta = (0..n)
                .map(|i| reflect(&p.theta[i], signs).scale(signs[i] as f64))
                .collect();
            let pairs = (0..n * n)
                .map(|k| {
                    let s = (signs[k / n] * signs[k % n]) as f64;
                    reflect(&p.pairs[k], signs).scale(s)
                })
                .collect();
            Ok(PoissonStructure { theta, pairs, ..p.clone() })
        }
        FiberedDiffeo::Chain(steps) => steps
            .iter()
            .try_fold(p.clone(), |acc, step| transform(&acc, step)),
    }
}

fn transform_fiberwise(
    p: &PoissonStructure,
    forward: &FiberwiseMap,
    inverse: &FiberwiseMap,
) -> Result<PoissonStructure> {
    let n = p.nvars;
    if forward.dim() != n || forward.order() != p.order || forward.grid() != p.grid {
        return Err(Error::DimensionMismatch("fiberwise map shape vs structure".into()));
    }
    let comps = forward.components();
    let back = inverse.components();
    let theta = comps
        .iter()
        .map(|c| p.bracket_theta_with(c).substitute(back))
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = vec![FormalSeries::zero(n, p.order, p.grid); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let b = p.bracket_of(&comps[i], &comps[j]).substitute(back)?;
            pairs[j * n + i] = -&b;
            pairs[i * n + j] = b;
        }
    }
    Ok(PoissonStructure { theta, pairs, ..p.clone() })
}

/// Degree-one data of a structure vanishing on `Γ`.
#[derive(Clone, Debug)]
pub struct LinearPart {
    /// `h_ij(θ)`: coefficient of `x_j` in `{θ, xᵢ}`.
    pub h: FnMatrix,
    /// `u^{i,j}_k(θ)` for `i < j`: coefficient of `x_k` in `{xᵢ, x_j}`.
    pub u: Vec<((usize, usize, usize), PeriodicFn)>,
    pub max_u: f64,
    /// All `u^{i,j}_k` vanish within tolerance.
    pub dual_of_nonresonant: bool,
    /// Some bracket carries terms of degree two or higher.
    pub has_higher_order: bool,
}

impl LinearPart {
    pub fn u_coeff(&self, i: usize, j: usize, k: usize) -> Option<&PeriodicFn> {
        self.u
            .iter()
            .find(|((a, b, c), _)| (*a, *b, *c) == (i, j, k))
            .map(|(_, f)| f)
    }
}

/// Extracts `H_θ` and the `u`-coefficients; `tol` bounds both the constant
/// terms and the `u` coefficients.
pub fn linear_part(p: &PoissonStructure, tol: f64) -> Result<LinearPart> {
    p.check_vanishing_on_gamma(tol)?;
    let n = p.nvars;
    let entries = (0..n * n)
        .map(|k| p.theta[k / n].coeff_or_zero(&MultiIndex::unit(k % n)))
        .collect();
    let h = FnMatrix::from_entries(n, entries);
    let mut u = Vec::new();
    let mut max_u: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                if let Some(c) = p.bracket(i, j).coeff(&MultiIndex::unit(k)) {
                    max_u = max_u.max(c.max_abs());
                    u.push(((i, j, k), c.clone()));
                }
            }
        }
    }
    let has_higher_order = p
        .theta
        .iter()
        .chain(&p.pairs)
        .any(|s| s.terms().any(|(q, _)| q.degree() >= 2));
    Ok(LinearPart {
        h,
        u,
        max_u,
        dual_of_nonresonant: max_u <= tol,
        has_higher_order,
    })
}
