//! Reduction of a generic structure to `{θ,xᵢ} = μᵢxᵢ`, `{xᵢ,x_j} = a_ij xᵢx_j`.

use serde::Serialize;

use crate::diffeo::{CircleMap, FiberedDiffeo, FiberwiseMap};
use crate::error::{Error, Result};
use crate::matrix::FnMatrix;
use crate::periodic::PeriodicFn;
use crate::poisson::{jacobiator, linear_part, transform, PoissonStructure};
use crate::series::{FormalSeries, MultiIndex};
use crate::spectral::{
    check_nonresonance, default_tolerance, eigen_continuation, SpectralData, SMALL_DIVISOR,
};

/// Fourier tail energy above which a truncation warning is emitted.
const TAIL_WARNING: f64 = 1e-10;

/// Steps whose data deviates from the identity by less than this are skipped.
const IDENTITY_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub jacobi: f64,
    pub vanishing: f64,
    /// Bound on the linear coefficients of `{xᵢ,x_j}`.
    pub structural: f64,
    pub spectral: f64,
    /// `None` selects `1e-8·max|μ|`.
    pub resonance: Option<f64>,
    /// Bound on the off-monomial coefficients of `{xᵢ,x_j}` after linearization.
    pub monomial: f64,
    /// Bound on the variation of the rescaled quadratic coefficients.
    pub constant: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            jacobi: 1e-8,
            vanishing: 1e-10,
            structural: 1e-8,
            spectral: crate::spectral::DEFAULT_SPECTRAL_TOL,
            resonance: None,
            monomial: 1e-8,
            constant: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Config {
    pub tol: Tolerances,
    /// Also report the closure defect of the literal circle map
    /// `(2π/∫k)·∫₀^θ k⁻¹`.
    pub paper_literal_chi: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Warning {
    pub kind: String,
    pub message: String,
    pub value: f64,
}

impl Warning {
    pub fn new(kind: &str, message: impl Into<String>, value: f64) -> Self {
        Self {
            kind: kind.to_string(),
            message: message.into(),
            value,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub input_jacobi_residual: f64,
    pub jacobi_residual: f64,
    /// Smallest homological divisor met, or the smallest tested resonance gap.
    pub smallest_divisor: f64,
    /// Deviation of the final brackets from the exact normal form.
    pub truncation_residual: f64,
    pub tail_energy: f64,
    pub eigenvalue_gap: f64,
    pub literal_chi_closure: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub n: usize,
    pub mu: Vec<f64>,
    /// Row-major skew matrix.
    pub a: Vec<f64>,
    /// Eigenvalues of `H` at `θ = 0` on the structure that was diagonalized.
    pub lambda: Vec<f64>,
    /// Eigenbundle signs of the original structure.
    pub monodromy: Vec<i8>,
    pub covered: bool,
    /// Applied to the input through [`transform`], gives `structure`.
    pub chain: FiberedDiffeo,
    pub structure: PoissonStructure,
    pub diagnostics: Diagnostics,
    pub warnings: Vec<Warning>,
}

impl NormalForm {
    pub fn a_entry(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// `a` as nested rows.
    pub fn a_rows(&self) -> Vec<Vec<f64>> {
        self.a.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn step_kinds(&self) -> Vec<&'static str> {
        self.chain.steps().iter().map(|s| s.kind()).collect()
    }
}

/// Output of the circle reparametrization.
#[derive(Clone, Debug)]
pub struct Reparametrization {
    pub structure: PoissonStructure,
    pub mu: Vec<f64>,
    /// `None` when `k` is constant and the circle is left alone.
    pub chi: Option<CircleMap>,
    pub literal_chi_closure: f64,
}

/// Straightens `k`: with `g = 1/k`, `χ(θ) = ∫₀^θ g / ḡ` and `μᵢ = λᵢ/ḡ`.
pub fn reparametrize(p: &PoissonStructure, spec: &SpectralData) -> Result<Reparametrization> {
    let kmin = spec.k.min();
    if kmin <= 0.0 {
        return Err(Error::KVanishes { min: kmin });
    }
    let g = spec.k.reciprocal()?;
    let (gbar, anti) = g.mean_and_antiderivative();
    let mu = spec.lambda.iter().map(|l| l / gbar).collect();
    let literal_chi_closure = 2.0 * std::f64::consts::PI * (gbar / spec.k.mean() - 1.0);
    if g.variation() <= IDENTITY_TOL * gbar.abs() {
        return Ok(Reparametrization {
            structure: p.clone(),
            mu,
            chi: None,
            literal_chi_closure,
        });
    }
    let chi = CircleMap::new(anti.scale(1.0 / gbar))?;
    let structure = transform(p, &FiberedDiffeo::BaseReparam(chi.clone()))?;
    Ok(Reparametrization {
        structure,
        mu,
        chi: Some(chi),
        literal_chi_closure,
    })
}

#[derive(Clone, Debug)]
pub struct Linearization {
    /// `None` when the θ-field is already linear.
    pub map: Option<FiberwiseMap>,
    pub structure: PoissonStructure,
    pub mu: Vec<f64>,
    /// Smallest `|⟨p,μ⟩ − μᵢ|` used, `∞` if none.
    pub smallest_divisor: f64,
    pub warnings: Vec<Warning>,
}

/// Diagonal constants `μᵢ` of the linear part of `{θ, xᵢ}`.
fn linear_diagonal(p: &PoissonStructure) -> Vec<f64> {
    (0..p.nvars())
        .map(|i| p.theta_bracket(i).coeff_or_zero(&MultiIndex::unit(i)).mean())
        .collect()
}

/// Solves `{θ, φᵢ} = μᵢφᵢ` degree by degree for `φᵢ = xᵢ + …` and moves to
/// the coordinates `φ`.
pub fn linearize_theta_field(p: &PoissonStructure, tol_resonance: f64) -> Result<Linearization> {
    let n = p.nvars();
    let (order, grid) = (p.order(), p.grid());
    let mu = linear_diagonal(p);
    let mut phi: Vec<FormalSeries> = (0..n).map(|i| FormalSeries::variable(n, order, grid, i)).collect();
    let mut smallest = f64::INFINITY;
    let mut warnings = Vec::new();
    let mut touched = false;
    for r in 2..=order {
        for i in 0..n {
            let residual = &p.bracket_theta_with(&phi[i]) - &phi[i].scale(mu[i]);
            let part = residual.homogeneous(r);
            for (q, c) in part.terms() {
                if c.is_zero() {
                    continue;
                }
                let divisor = q.dot(&mu) - mu[i];
                if divisor.abs() < tol_resonance {
                    return Err(Error::ResonantDivisor {
                        component: i + 1,
                        multi_index: q.exponents(n),
                        divisor,
                    });
                }
                if divisor.abs() < smallest {
                    smallest = divisor.abs();
                }
                if divisor.abs() < SMALL_DIVISOR {
                    warnings.push(Warning::new(
                        "small-divisor",
                        format!("component x{} at {}", i + 1, q.display(n)),
                        divisor,
                    ));
                }
                phi[i].add_term(*q, c, -1.0 / divisor);
                touched = true;
            }
        }
    }
    if !touched {
        return Ok(Linearization {
            map: None,
            structure: p.clone(),
            mu,
            smallest_divisor: smallest,
            warnings,
        });
    }
    let map = FiberwiseMap::new(phi)?;
    let structure = transform(p, &FiberedDiffeo::FiberwiseFormal(map.clone()))?;
    Ok(Linearization {
        map: Some(map),
        structure,
        mu,
        smallest_divisor: smallest,
        warnings,
    })
}

#[derive(Clone, Debug)]
pub struct Quadratization {
    pub a: Vec<f64>,
    /// `diag(1, χ₂, …, χₙ)`, or `None` when no rescaling is needed.
    pub frame: Option<FnMatrix>,
    pub structure: PoissonStructure,
    /// Coefficient of `xᵢx_j` in `{xᵢ,x_j}` before rescaling.
    pub k_funcs: FnMatrix,
}

/// Rescales `x_j ↦ χ_j(θ)x_j` so that every `{xᵢ,x_j}` becomes `a_ij xᵢx_j`.
pub fn quadratize(p: &PoissonStructure, tol: &Tolerances) -> Result<Quadratization> {
    let n = p.nvars();
    let grid = p.grid();
    let mu = linear_diagonal(p);
    let scale = p.max_coeff().max(1.0);
    let mut k_entries = vec![PeriodicFn::zeros(grid); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let target = MultiIndex::pair(i, j);
            for (q, c) in p.bracket(i, j).terms() {
                if *q != target && c.max_abs() > tol.monomial * scale {
                    return Err(Error::UnexpectedMonomial {
                        i: i + 1,
                        j: j + 1,
                        multi_index: q.exponents(n),
                        magnitude: c.max_abs(),
                    });
                }
            }
            let k = p.bracket(i, j).coeff_or_zero(&target);
            k_entries[j * n + i] = -&k;
            k_entries[i * n + j] = k;
        }
    }
    let k_funcs = FnMatrix::from_entries(n, k_entries);

    let needs_frame = (1..n).any(|j| k_funcs.get(0, j).variation() > IDENTITY_TOL * scale);
    let (frame, structure) = if needs_frame {
        let mut diag = vec![PeriodicFn::constant(grid, 1.0)];
        for j in 1..n {
            let (_, anti) = k_funcs.get(0, j).mean_and_antiderivative();
            diag.push(anti.scale(1.0 / mu[0]).exp());
        }
        let g = FnMatrix::diagonal(&diag);
        let s = transform(p, &FiberedDiffeo::LinearFrame(g.clone()))?;
        (Some(g), s)
    } else {
        (None, p.clone())
    };

    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let k = structure.bracket(i, j).coeff_or_zero(&MultiIndex::pair(i, j));
            let variation = k.variation();
            if variation > tol.constant * scale {
                return Err(Error::NonConstantResidual {
                    i: i + 1,
                    j: j + 1,
                    variation,
                });
            }
            a[i * n + j] = k.mean();
            a[j * n + i] = -k.mean();
        }
    }
    Ok(Quadratization {
        a,
        frame,
        structure,
        k_funcs,
    })
}

/// Full pipeline: validation, double cover if some eigenbundle is a Möbius
/// band, diagonalization, reparametrization, linearization, quadratization.
pub fn normalize(p: &PoissonStructure, cfg: &Config) -> Result<NormalForm> {
    let tol = &cfg.tol;
    let n = p.nvars();
    let input_jacobi = jacobiator(p).norm;
    if input_jacobi > tol.jacobi {
        return Err(Error::NotPoisson {
            norm: input_jacobi,
            tol: tol.jacobi,
        });
    }
    let lp = linear_part(p, tol.vanishing)?;
    if lp.max_u > tol.structural {
        return Err(Error::StructuralMismatch { max_u: lp.max_u });
    }
    let first = eigen_continuation(&lp.h, tol.spectral)?;
    let monodromy = first.monodromy.clone();
    let covered = !first.is_trivial();

    let mut warnings = Vec::new();
    let tail_energy = p.tail_energy();
    if tail_energy > TAIL_WARNING {
        warnings.push(Warning::new(
            "tail-energy",
            "input coefficients are under-resolved on the grid",
            tail_energy,
        ));
    }

    let mut steps = Vec::new();
    let mut cur = p.clone();
    let spec = if covered {
        steps.push(FiberedDiffeo::DoubleCover);
        cur = transform(&cur, &FiberedDiffeo::DoubleCover)?;
        let mut s = eigen_continuation(&linear_part(&cur, tol.vanishing)?.h, tol.spectral)?;
        s.covered = true;
        s
    } else {
        first
    };

    let g = spec.frame.inverse()?;
    if g.max_deviation(&FnMatrix::identity(n, cur.grid())) > IDENTITY_TOL {
        let step = FiberedDiffeo::LinearFrame(g);
        cur = transform(&cur, &step)?;
        steps.push(step);
    }

    let rep = reparametrize(&cur, &spec)?;
    if let Some(chi) = rep.chi {
        steps.push(FiberedDiffeo::BaseReparam(chi));
    }
    cur = rep.structure;
    let mu = rep.mu;

    let tol_res = tol.resonance.unwrap_or_else(|| default_tolerance(&mu));
    let report = check_nonresonance(&mu, cur.order().max(2) as u32, tol_res);
    if let Some(v) = report.violations.first() {
        return Err(Error::ResonantInput {
            target: v.relation.describe(),
            multi_index: v.multi_index.clone(),
            divisor: v.gap,
        });
    }
    if report.min_gap < SMALL_DIVISOR {
        warnings.push(Warning::new(
            "small-divisor",
            "near resonance among the eigenvalue ratios",
            report.min_gap,
        ));
    }

    let lin = linearize_theta_field(&cur, tol_res)?;
    warnings.extend(lin.warnings);
    if let Some(map) = lin.map {
        steps.push(FiberedDiffeo::FiberwiseFormal(map));
    }
    cur = lin.structure;

    let quad = quadratize(&cur, tol)?;
    if let Some(frame) = quad.frame {
        steps.push(FiberedDiffeo::LinearFrame(frame));
    }
    cur = quad.structure;

    let exact = PoissonStructure::normal_form(&mu, &quad.a, cur.order(), cur.grid())?;
    let diagnostics = Diagnostics {
        input_jacobi_residual: input_jacobi,
        jacobi_residual: jacobiator(&cur).norm,
        smallest_divisor: lin.smallest_divisor.min(report.min_gap),
        truncation_residual: cur.max_deviation(&exact),
        tail_energy,
        eigenvalue_gap: spec.min_gap,
        literal_chi_closure: cfg.paper_literal_chi.then_some(rep.literal_chi_closure),
    };
    Ok(NormalForm {
        n,
        mu,
        a: quad.a,
        lambda: spec.lambda,
        monodromy,
        covered,
        chain: FiberedDiffeo::Chain(steps),
        structure: cur,
        diagnostics,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::mobius_example;
    use std::f64::consts::{PI, SQRT_2};

    const M: usize = 64;

    fn var(n: usize, order: usize, i: usize) -> FormalSeries {
        FormalSeries::variable(n, order, M, i)
    }

    #[test]
    fn normal_form_input_gives_identity_chain() {
        let p = PoissonStructure::normal_form(&[1.0, SQRT_2], &[0.0, 3.0, -3.0, 0.0], 4, M).unwrap();
        let nf = normalize(&p, &Config::default()).unwrap();
        assert!(nf.chain.is_identity());
        assert_eq!(nf.mu, vec![1.0, SQRT_2]);
        assert_eq!(nf.a, vec![0.0, 3.0, -3.0, 0.0]);
        assert!(!nf.covered);
    }

    #[test]
    fn reparametrization_examples() {
        let p = PoissonStructure::normal_form(&[1.0, SQRT_2], &[0.0; 4], 3, M).unwrap();
        let one = SpectralData {
            lambda: vec![1.0, SQRT_2],
            k: PeriodicFn::constant(M, 1.0),
            frame: FnMatrix::identity(2, M),
            monodromy: vec![1, 1],
            covered: false,
            min_gap: SQRT_2 - 1.0,
        };
        let r = reparametrize(&p, &one).unwrap();
        assert!(r.chi.is_none());
        assert_eq!(r.mu, vec![1.0, SQRT_2]);

        let c = SpectralData {
            k: PeriodicFn::constant(M, 2.5),
            ..one.clone()
        };
        let r = reparametrize(&p, &c).unwrap();
        assert!(r.chi.is_none());
        assert!((r.mu[1] - 2.5 * SQRT_2).abs() < 1e-14);

        // ∫₀^{2π} (2 + sin t)⁻¹ dt = 2π/√3, checked by midpoint quadrature
        let q: f64 = (0..100_000)
            .map(|k| {
                let t = (k as f64 + 0.5) * 2.0 * PI / 100_000.0;
                2.0 * PI / 100_000.0 / (2.0 + t.sin())
            })
            .sum();
        assert!((q - 2.0 * PI / 3f64.sqrt()).abs() < 1e-10);
        let s = SpectralData {
            k: PeriodicFn::from_fn(M, |t| 2.0 + t.sin()),
            ..one
        };
        let r = reparametrize(&p, &s).unwrap();
        let chi = r.chi.unwrap();
        assert!((r.mu[0] - 3f64.sqrt()).abs() < 1e-12);
        assert!((r.mu[1] - SQRT_2 * 3f64.sqrt()).abs() < 1e-12);
        // χ(2π) = 2π: the shift is periodic and χ' > 0
        assert!(chi.slope().min() > 0.0);
        assert!(r.literal_chi_closure.abs() > 1e-3);
    }

    #[test]
    fn single_homological_equation() {
        let n = 1;
        let x = var(n, 2, 0);
        let sin = PeriodicFn::from_fn(M, f64::sin);
        let p = PoissonStructure::new(
            vec![&x + &(&x * &x).mul_fn(&sin)],
            vec![vec![FormalSeries::zero(n, 2, M)]],
        )
        .unwrap();
        let lin = linearize_theta_field(&p, 1e-8).unwrap();
        let map = lin.map.unwrap();
        let c = map.components()[0].coeff(&MultiIndex::from_exponents(&[2])).unwrap();
        assert!((c + &sin).max_abs() < 1e-15);
        assert_eq!(lin.smallest_divisor, 1.0);
        assert!(lin.structure.theta_bracket(0).max_deviation(&x) < 1e-14);
    }

    #[test]
    fn single_remainder_monomial() {
        let n = 2;
        let order = 2;
        let r = PeriodicFn::from_fn(M, |t| 0.3 + t.cos());
        let b0 = vec![
            &var(n, order, 0) + &(&var(n, order, 1) * &var(n, order, 1)).mul_fn(&r),
            var(n, order, 1).scale(SQRT_2),
        ];
        let p = PoissonStructure::from_upper(b0, |_, _| FormalSeries::zero(n, order, M)).unwrap();
        let lin = linearize_theta_field(&p, 1e-8).unwrap();
        let c = lin.map.unwrap().components()[0]
            .coeff(&MultiIndex::from_exponents(&[0, 2]))
            .unwrap()
            .clone();
        let expected = r.scale(-1.0 / (2.0 * SQRT_2 - 1.0));
        assert!((&c - &expected).max_abs() < 1e-14);
        assert!(lin.structure.theta_bracket(0).max_deviation(&var(n, order, 0)) < 1e-14);
    }

    #[test]
    fn resonant_divisor_is_reported() {
        let n = 2;
        let x = |i| var(n, 2, i);
        let b0 = vec![x(0), &x(1).scale(2.0) + &(&x(0) * &x(0))];
        let p = PoissonStructure::from_upper(b0, |_, _| FormalSeries::zero(n, 2, M)).unwrap();
        assert!(matches!(
            linearize_theta_field(&p, 1e-8),
            Err(Error::ResonantDivisor { component: 2, .. })
        ));
    }

    #[test]
    fn constant_quadratic_coefficient() {
        let p = PoissonStructure::normal_form(&[1.0, SQRT_2], &[0.0, 5.0, -5.0, 0.0], 3, M).unwrap();
        let q = quadratize(&p, &Tolerances::default()).unwrap();
        assert_eq!(q.a[1], 5.0);
        assert!(q.frame.is_none());
    }

    #[test]
    fn oscillating_quadratic_coefficient() {
        let n = 2;
        let order = 3;
        let b0 = vec![var(n, order, 0), var(n, order, 1).scale(SQRT_2)];
        let k = PeriodicFn::from_fn(M, |t| 3.0 + t.cos());
        let p = PoissonStructure::from_upper(b0, |i, j| {
            FormalSeries::monomial(n, order, MultiIndex::pair(i, j), k.clone())
        })
        .unwrap();
        assert!(jacobiator(&p).norm < 1e-12);
        let q = quadratize(&p, &Tolerances::default()).unwrap();
        let chi2 = q.frame.unwrap().get(1, 1).clone();
        let expected = PeriodicFn::from_fn(M, |t| t.sin().exp());
        assert!((&chi2 - &expected).max_abs() < 1e-13);
        assert!((q.a[1] - 3.0).abs() < 1e-13);
        let exact = PoissonStructure::normal_form(&[1.0, SQRT_2], &[0.0, 3.0, -3.0, 0.0], order, M).unwrap();
        assert!(q.structure.max_deviation(&exact) < 1e-12);
    }

    #[test]
    fn single_variable_has_no_pairs() {
        let p = PoissonStructure::normal_form(&[0.7], &[0.0], 3, M).unwrap();
        let q = quadratize(&p, &Tolerances::default()).unwrap();
        assert_eq!(q.a, vec![0.0]);
        let nf = normalize(&p, &Config::default()).unwrap();
        assert_eq!(nf.mu, vec![0.7]);
    }

    #[test]
    fn off_monomial_terms_are_rejected() {
        let n = 2;
        let order = 3;
        let b0 = vec![var(n, order, 0), var(n, order, 1).scale(SQRT_2)];
        let p = PoissonStructure::from_upper(b0, |_, _| &var(n, order, 0) * &var(n, order, 0)).unwrap();
        assert!(matches!(
            quadratize(&p, &Tolerances::default()),
            Err(Error::UnexpectedMonomial { .. })
        ));
    }

    #[test]
    fn validation_errors() {
        // {x1,x2} = x3 with μ3 = μ1 + μ2 is Poisson but has a linear u-term
        let x3 = |i| var(3, 3, i);
        let p = PoissonStructure::from_upper(
            vec![x3(0), x3(1).scale(2.0), x3(2).scale(3.0)],
            |i, j| if (i, j) == (0, 1) { x3(2) } else { FormalSeries::zero(3, 3, M) },
        )
        .unwrap();
        assert!(jacobiator(&p).norm < 1e-14);
        let cfg = Config::default();
        assert!(matches!(normalize(&p, &cfg), Err(Error::StructuralMismatch { .. })));
        let n = 2;
        let x = |i| var(n, 3, i);
        let p = PoissonStructure::from_upper(vec![x(0), x(1).scale(2.0)], |_, _| {
            FormalSeries::monomial(n, 3, MultiIndex::from_exponents(&[1, 2]), PeriodicFn::constant(M, 1.0))
        })
        .unwrap();
        assert!(matches!(normalize(&p, &cfg), Err(Error::NotPoisson { .. })));
        let p = PoissonStructure::normal_form(&[1.0, 2.0], &[0.0; 4], 3, M).unwrap();
        assert!(matches!(normalize(&p, &cfg), Err(Error::ResonantInput { .. })));
    }

    #[test]
    fn mobius_example_is_normalized_on_the_cover() {
        let p = mobius_example(1.0, SQRT_2, 3, 256).unwrap();
        let nf = normalize(&p, &Config::default()).unwrap();
        assert!(nf.covered);
        assert_eq!(nf.monodromy, vec![-1, -1]);
        assert!((nf.mu[0] - 0.5).abs() < 1e-10);
        assert!((nf.mu[1] - SQRT_2 / 2.0).abs() < 1e-10);
        assert!(nf.a[1].abs() < 1e-10);
        assert!(nf.diagnostics.jacobi_residual < 1e-9);
        let replay = transform(&p, &nf.chain).unwrap();
        assert!(replay.max_deviation(&nf.structure) < 1e-10);
    }
}
