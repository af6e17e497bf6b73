//! Degree-truncated power series in the transverse variables `x₁..xₙ` with
//! periodic coefficients in `θ`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::periodic::{Interpolant, PeriodicFn};

/// Largest supported number of transverse variables.
pub const MAX_VARS: usize = 8;

/// Exponent vector `(p₁,…,pₙ)`, ordered by total degree and then
/// lexicographically with larger leading exponents first (`x₁² < x₁x₂ < x₂²`).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exps: [u8; MAX_VARS],
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex {
        exps: [0; MAX_VARS],
    };

    pub fn unit(i: usize) -> Self {
        let mut exps = [0; MAX_VARS];
        exps[i] = 1;
        Self { exps }
    }

    pub fn pair(i: usize, j: usize) -> Self {
        Self::unit(i).add(&Self::unit(j))
    }

    pub fn from_exponents(exps: &[u32]) -> Self {
        assert!(exps.len() <= MAX_VARS, "at most {MAX_VARS} variables");
        let mut out = [0; MAX_VARS];
        for (o, &e) in out.iter_mut().zip(exps) {
            *o = u8::try_from(e).expect("exponent overflow");
        }
        Self { exps: out }
    }

    pub fn get(&self, i: usize) -> u32 {
        self.exps[i] as u32
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    pub fn exponents(&self, n: usize) -> Vec<u32> {
        self.exps[..n].iter().map(|&e| e as u32).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut exps = self.exps;
        for (e, o) in exps.iter_mut().zip(&other.exps) {
            *e += o;
        }
        Self { exps }
    }

    /// `p - eᵢ`, or `None` when `pᵢ = 0`.
    pub fn lower(&self, i: usize) -> Option<Self> {
        if self.exps[i] == 0 {
            return None;
        }
        let mut exps = self.exps;
        exps[i] -= 1;
        Some(Self { exps })
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(&self.exps)
            .map(|(x, &e)| x * e as f64)
            .sum()
    }

    /// `x^p` at a numeric point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.exps)
            .map(|(&v, &e)| v.powi(e as i32))
            .product()
    }

    /// First variable with a nonzero exponent.
    pub fn first_var(&self) -> Option<usize> {
        self.exps.iter().position(|&e| e > 0)
    }

    /// All multi-indices in `n` variables with `min ≤ |p| ≤ max`, in graded order.
    pub fn enumerate(n: usize, min_degree: u32, max_degree: u32) -> Vec<Self> {
        assert!(n <= MAX_VARS);
        let mut out = Vec::new();
        for d in min_degree..=max_degree {
            let mut cur = [0u8; MAX_VARS];
            fill(n, 0, d, &mut cur, &mut out);
        }
        out
    }

    pub fn display(&self, n: usize) -> String {
        let parts: Vec<String> = (0..n)
            .filter(|&i| self.exps[i] > 0)
            .map(|i| match self.exps[i] {
                1 => format!("x{}", i + 1),
                e => format!("x{}^{}", i + 1, e),
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

fn fill(n: usize, pos: usize, remaining: u32, cur: &mut [u8; MAX_VARS], out: &mut Vec<MultiIndex>) {
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex { exps: *cur });
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining as u8;
        out.push(MultiIndex { exps: *cur });
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e as u8;
        fill(n, pos + 1, remaining - e, cur, out);
    }
    cur[pos] = 0;
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.exps.iter().rposition(|&e| e > 0).map_or(1, |i| i + 1);
        write!(f, "{:?}", &self.exps[..last])
    }
}

/// Truncated series `Σ_{|p| ≤ N} c_p(θ) x^p`; absent terms are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries {
    nvars: usize,
    order: usize,
    grid: usize,
    terms: BTreeMap<MultiIndex, PeriodicFn>,
}

impl FormalSeries {
    pub fn zero(nvars: usize, order: usize, grid: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        Self {
            nvars,
            order,
            grid,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, order: usize, c: PeriodicFn) -> Self {
        let mut s = Self::zero(nvars, order, c.grid_size());
        s.terms.insert(MultiIndex::ZERO, c);
        s
    }

    /// The coordinate function `xᵢ` (zero-based index).
    pub fn variable(nvars: usize, order: usize, grid: usize, i: usize) -> Self {
        Self::monomial(nvars, order, MultiIndex::unit(i), PeriodicFn::constant(grid, 1.0))
    }

    pub fn monomial(nvars: usize, order: usize, p: MultiIndex, coeff: PeriodicFn) -> Self {
        let mut s = Self::zero(nvars, order, coeff.grid_size());
        if p.degree() as usize <= order {
            s.terms.insert(p, coeff);
        }
        s
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

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &PeriodicFn)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, p: &MultiIndex) -> Option<&PeriodicFn> {
        self.terms.get(p)
    }

    /// Coefficient of `x^p`, materializing zero when absent.
    pub fn coeff_or_zero(&self, p: &MultiIndex) -> PeriodicFn {
        self.terms
            .get(p)
            .cloned()
            .unwrap_or_else(|| PeriodicFn::zeros(self.grid))
    }

    /// Adds `c · x^p` in place; terms beyond the truncation order are dropped.
    pub fn add_term(&mut self, p: MultiIndex, c: &PeriodicFn, scale: f64) {
        if p.degree() as usize > self.order {
            return;
        }
        match self.terms.get_mut(&p) {
            Some(existing) => existing.add_scaled(c, scale),
            None => {
                self.terms.insert(p, c.scale(scale));
            }
        }
    }

    pub fn set_term(&mut self, p: MultiIndex, c: PeriodicFn) {
        if p.degree() as usize <= self.order {
            self.terms.insert(p, c);
        }
    }

    pub fn remove_term(&mut self, p: &MultiIndex) -> Option<PeriodicFn> {
        self.terms.remove(p)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars || self.order != other.order || self.grid != other.grid {
            return Err(Error::DimensionMismatch(format!(
                "series (n={}, N={}, M={}) vs (n={}, N={}, M={})",
                self.nvars, self.order, self.grid, other.nvars, other.order, other.grid
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, c, 1.0);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, c, -1.0);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.nvars, self.order, self.grid);
        for (p, f) in &self.terms {
            let dp = p.degree() as usize;
            for (q, g) in &other.terms {
                if dp + q.degree() as usize > self.order {
                    // terms are sorted by degree
                    break;
                }
                let r = p.add(q);
                match out.terms.get_mut(&r) {
                    Some(acc) => {
                        for ((a, x), y) in acc.samples_mut().iter_mut().zip(f.samples()).zip(g.samples()) {
                            *a += x * y;
                        }
                    }
                    None => {
                        out.terms.insert(r, f * g);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Multiplies every coefficient by a function of `θ`.
    pub fn mul_fn(&self, f: &PeriodicFn) -> Self {
        self.map_coeffs(|c| c * f)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_coeffs(|f| f.scale(c))
    }

    pub fn map_coeffs(&self, f: impl Fn(&PeriodicFn) -> PeriodicFn) -> Self {
        let terms: BTreeMap<_, _> = self.terms.iter().map(|(p, c)| (*p, f(c))).collect();
        let grid = terms.values().next().map_or(self.grid, PeriodicFn::grid_size);
        Self {
            nvars: self.nvars,
            order: self.order,
            grid,
            terms,
        }
    }

    /// Same terms with a different truncation order (higher terms dropped).
    pub fn with_order(&self, order: usize) -> Self {
        Self {
            nvars: self.nvars,
            order,
            grid: self.grid,
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| p.degree() as usize <= order)
                .map(|(p, c)| (*p, c.clone()))
                .collect(),
        }
    }

    /// Homogeneous part of total degree `d`.
    pub fn homogeneous(&self, d: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.order, self.grid);
        for (p, c) in self.terms.iter().filter(|(p, _)| p.degree() as usize == d) {
            out.terms.insert(*p, c.clone());
        }
        out
    }

    pub fn constant_term(&self) -> PeriodicFn {
        self.coeff_or_zero(&MultiIndex::ZERO)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, c| m.max(c.max_abs()))
    }

    /// Largest coefficient among terms of degree `d`.
    pub fn max_coeff_of_degree(&self, d: usize) -> f64 {
        self.terms
            .iter()
            .filter(|(p, _)| p.degree() as usize == d)
            .fold(0.0f64, |m, (_, c)| m.max(c.max_abs()))
    }

    /// Max coefficient-wise difference.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (p, c) in &self.terms {
            let d = match other.terms.get(p) {
                Some(o) => (c - o).max_abs(),
                None => c.max_abs(),
            };
            worst = worst.max(d);
        }
        for (p, c) in &other.terms {
            if !self.terms.contains_key(p) {
                worst = worst.max(c.max_abs());
            }
        }
        worst
    }

    /// `∂/∂xᵢ`.
    pub fn derive_x(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.order, self.grid);
        for (p, c) in &self.terms {
            if let Some(q) = p.lower(i) {
                out.terms.insert(q, c.scale(p.get(i) as f64));
            }
        }
        out
    }

    /// `∂/∂θ`, spectrally on every coefficient.
    pub fn derive_theta(&self) -> Self {
        self.map_coeffs(PeriodicFn::derivative)
    }

    /// Substitutes `x_k ↦ subs[k]`. Exact up to the truncation order when
    /// every substituted series has zero constant term.
    pub fn substitute(&self, subs: &[FormalSeries]) -> Result<Self> {
        if subs.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "substituting {} series into {} variables",
                subs.len(),
                self.nvars
            )));
        }
        let target_vars = subs.first().map_or(self.nvars, FormalSeries::nvars);
        let mut out = FormalSeries::zero(target_vars, self.order, self.grid);
        for s in subs {
            if s.nvars != target_vars || s.order != self.order || s.grid != self.grid {
                return Err(Error::DimensionMismatch(
                    "substituted series disagree in shape".to_string(),
                ));
            }
        }
        let mut powers: BTreeMap<MultiIndex, FormalSeries> = BTreeMap::new();
        for (p, c) in &self.terms {
            if p.degree() == 0 {
                out.add_term(MultiIndex::ZERO, c, 1.0);
                continue;
            }
            let value = monomial_value(p, subs, &mut powers)?;
            for (q, v) in &value.terms {
                match out.terms.get_mut(q) {
                    Some(acc) => {
                        for ((a, x), y) in acc.samples_mut().iter_mut().zip(c.samples()).zip(v.samples()) {
                            *a += x * y;
                        }
                    }
                    None => {
                        out.terms.insert(*q, c * v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Drops the coordinates not listed in `keep` by setting them to zero and
    /// re-indexes the survivors in the given order.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut out = Self::zero(keep.len(), self.order, self.grid);
        'terms: for (p, c) in &self.terms {
            for i in 0..self.nvars {
                if p.get(i) > 0 && !keep.contains(&i) {
                    continue 'terms;
                }
            }
            let exps: Vec<u32> = keep.iter().map(|&i| p.get(i)).collect();
            out.terms.insert(MultiIndex::from_exponents(&exps), c.clone());
        }
        out
    }

    /// Renames variables: `x_i` becomes `x_{perm[i]}`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut out = Self::zero(self.nvars, self.order, self.grid);
        for (p, c) in &self.terms {
            let mut exps = vec![0u32; self.nvars];
            for (i, &target) in perm.iter().enumerate() {
                exps[target] = p.get(i);
            }
            out.terms.insert(MultiIndex::from_exponents(&exps), c.clone());
        }
        out
    }

    /// Point evaluation; builds interpolants on every call. Use
    /// [`FormalSeries::evaluator`] for repeated evaluation.
    pub fn eval(&self, theta: f64, x: &[f64]) -> f64 {
        self.evaluator().eval(theta, x)
    }

    pub fn evaluator(&self) -> SeriesEvaluator {
        SeriesEvaluator {
            terms: self
                .terms
                .iter()
                .map(|(p, c)| {
                    let interp = c.interpolant();
                    let coeff = if interp.is_constant() {
                        Coeff::Constant(c.samples()[0])
                    } else {
                        Coeff::Varying(interp)
                    };
                    (*p, coeff)
                })
                .collect(),
        }
    }

    /// Largest tail-energy fraction among the coefficients.
    pub fn tail_energy(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, c| m.max(c.tail_energy()))
    }
}

fn monomial_value(
    p: &MultiIndex,
    subs: &[FormalSeries],
    cache: &mut BTreeMap<MultiIndex, FormalSeries>,
) -> Result<FormalSeries> {
    if let Some(v) = cache.get(p) {
        return Ok(v.clone());
    }
    let k = p.first_var().expect("nonconstant monomial");
    let lower = p.lower(k).unwrap();
    let value = if lower.degree() == 0 {
        subs[k].clone()
    } else {
        monomial_value(&lower, subs, cache)?.try_mul(&subs[k])?
    };
    cache.insert(*p, value.clone());
    Ok(value)
}

enum Coeff {
    Constant(f64),
    Varying(Interpolant),
}

/// Series with cached coefficient interpolants for evaluation at arbitrary `(θ, x)`.
pub struct SeriesEvaluator {
    terms: Vec<(MultiIndex, Coeff)>,
}

impl SeriesEvaluator {
    pub fn eval(&self, theta: f64, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(p, c)| {
                let cv = match c {
                    Coeff::Constant(v) => *v,
                    Coeff::Varying(i) => i.eval(theta),
                };
                cv * p.eval(x)
            })
            .sum()
    }
}

impl Add for &FormalSeries {
    type Output = FormalSeries;
    fn add(self, rhs: &FormalSeries) -> FormalSeries {
        self.try_add(rhs).expect("series shape mismatch")
    }
}

impl Sub for &FormalSeries {
    type Output = FormalSeries;
    fn sub(self, rhs: &FormalSeries) -> FormalSeries {
        self.try_sub(rhs).expect("series shape mismatch")
    }
}

impl Mul for &FormalSeries {
    type Output = FormalSeries;
    fn mul(self, rhs: &FormalSeries) -> FormalSeries {
        self.try_mul(rhs).expect("series shape mismatch")
    }
}

impl Neg for &FormalSeries {
    type Output = FormalSeries;
    fn neg(self) -> FormalSeries {
        self.scale(-1.0)
    }
}
