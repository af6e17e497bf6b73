//! Smooth 2π-periodic real functions held as uniform samples.
//!
//! A [`PeriodicFn`] stores its values at the nodes `θ_m = 2πm/M`, `m = 0..M`,
//! with `M` a power of two. Pointwise arithmetic happens on the grid (no
//! padding, so products alias if the combined bandwidth reaches `M/2`);
//! differentiation, antiderivatives, off-grid evaluation and resampling go
//! through the discrete Fourier transform.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Default number of samples on the circle.
pub const DEFAULT_GRID: usize = 256;

/// Relative tolerance used by [`PeriodicFn::reciprocal`] and [`PeriodicFn::log`].
pub const TOL_ZERO_REL: f64 = 1e-9;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn check_grid(m: usize) -> Result<()> {
    if m >= 4 && m.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::InvalidGrid(m))
    }
}

/// Grid nodes `2πm/M`.
pub fn nodes(m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |i| 2.0 * PI * i as f64 / m as f64)
}

fn fft_forward(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(&mut buf);
    buf
}

fn fft_inverse_real(mut spec: Vec<Complex64>) -> Vec<f64> {
    let m = spec.len();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m));
    fft.process(&mut spec);
    spec.into_iter().map(|c| c.re / m as f64).collect()
}

/// Signed wavenumber of DFT bin `k`; the Nyquist bin maps to `None`.
fn wavenumber(k: usize, m: usize) -> Option<i64> {
    let half = m / 2;
    match k.cmp(&half) {
        std::cmp::Ordering::Less => Some(k as i64),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(k as i64 - m as i64),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFn {
    samples: Vec<f64>,
}

impl PeriodicFn {
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        check_grid(samples.len())?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { samples })
    }

    /// Samples `f` on the grid of size `m`.
    ///
    /// Panics if `m` is not a valid grid size; callers validate configuration
    /// up front with [`check_grid`].
    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(check_grid(m).is_ok(), "invalid grid size {m}");
        Self {
            samples: nodes(m).map(f).collect(),
        }
    }

    pub fn constant(m: usize, c: f64) -> Self {
        assert!(check_grid(m).is_ok(), "invalid grid size {m}");
        Self {
            samples: vec![c; m],
        }
    }

    pub fn zeros(m: usize) -> Self {
        Self::constant(m, 0.0)
    }

    /// Builds `c₀ + Σ aₖ cos kθ + bₖ sin kθ` from `[c₀, a₁, b₁, a₂, b₂, …]`.
    pub fn from_fourier(m: usize, coeffs: &[f64]) -> Self {
        Self::from_fn(m, |t| {
            let mut v = coeffs.first().copied().unwrap_or(0.0);
            for (k, pair) in coeffs[1.min(coeffs.len())..].chunks(2).enumerate() {
                let kt = (k + 1) as f64 * t;
                v += pair[0] * kt.cos();
                if let Some(b) = pair.get(1) {
                    v += b * kt.sin();
                }
            }
            v
        })
    }

    pub(crate) fn from_raw(samples: Vec<f64>) -> Self {
        debug_assert!(check_grid(samples.len()).is_ok());
        Self { samples }
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max - min` over the grid; zero for constants.
    pub fn variation(&self) -> f64 {
        self.max() - self.min()
    }

    /// `(1/2π)∫₀^{2π} f`, exact for trigonometric polynomials of degree below `M`.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(
            self.grid_size(),
            other.grid_size(),
            "periodic functions on different grids"
        );
        Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add_scaled(&mut self, other: &Self, c: f64) {
        assert_eq!(self.grid_size(), other.grid_size());
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += c * b;
        }
    }

    fn tol_zero(&self) -> f64 {
        TOL_ZERO_REL * self.max_abs()
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let tol = self.tol_zero();
        let min = self.samples.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min <= tol || min == 0.0 {
            return Err(Error::ZeroDivide { min, tol });
        }
        Ok(self.map(|v| 1.0 / v))
    }

    pub fn exp(&self) -> Self {
        self.map(f64::exp)
    }

    pub fn log(&self) -> Result<Self> {
        let tol = self.tol_zero();
        let min = self.min();
        if min <= tol || min <= 0.0 {
            return Err(Error::ZeroDivide { min, tol });
        }
        Ok(self.map(f64::ln))
    }

    /// Spectral derivative `f'`. The Nyquist mode is discarded.
    pub fn derivative(&self) -> Self {
        let m = self.grid_size();
        let mut spec = fft_forward(&self.samples);
        for (k, c) in spec.iter_mut().enumerate() {
            *c = match wavenumber(k, m) {
                Some(w) => *c * Complex64::new(0.0, w as f64),
                None => Complex64::new(0.0, 0.0),
            };
        }
        Self::from_raw(fft_inverse_real(spec))
    }

    /// Mean of `f` and the periodic antiderivative `F` of `f - mean` with `F(0) = 0`.
    pub fn mean_and_antiderivative(&self) -> (f64, Self) {
        let m = self.grid_size();
        let mut spec = fft_forward(&self.samples);
        let mean = spec[0].re / m as f64;
        for (k, c) in spec.iter_mut().enumerate() {
            *c = match wavenumber(k, m) {
                Some(0) | None => Complex64::new(0.0, 0.0),
                Some(w) => *c / Complex64::new(0.0, w as f64),
            };
        }
        let mut anti = fft_inverse_real(spec);
        let offset = anti[0];
        for v in &mut anti {
            *v -= offset;
        }
        (mean, Self::from_raw(anti))
    }

    /// Trigonometric interpolant ready for repeated off-grid evaluation.
    pub fn interpolant(&self) -> Interpolant {
        Interpolant::new(self)
    }

    /// Value of the trigonometric interpolant at `theta`.
    pub fn eval(&self, theta: f64) -> f64 {
        self.interpolant().eval(theta)
    }

    /// Samples the interpolant at arbitrary points, producing a function on a
    /// grid of size `points.len()`.
    pub fn eval_many(&self, points: &[f64]) -> Vec<f64> {
        let interp = self.interpolant();
        points.iter().map(|&t| interp.eval(t)).collect()
    }

    /// Spectral resampling onto a grid of size `m_new` (zero padding or truncation).
    pub fn resample(&self, m_new: usize) -> Result<Self> {
        check_grid(m_new)?;
        let m = self.grid_size();
        if m_new == m {
            return Ok(self.clone());
        }
        let spec = fft_forward(&self.samples);
        let mut out = vec![Complex64::new(0.0, 0.0); m_new];
        let scale = m_new as f64 / m as f64;
        let keep = m.min(m_new) / 2;
        for k in 0..keep {
            out[k] = spec[k] * scale;
            if k > 0 {
                out[m_new - k] = spec[m - k] * scale;
            }
        }
        let nyq_old = spec[m / 2] * scale;
        if m_new > m {
            // split the old Nyquist bin symmetrically
            out[keep] = nyq_old * 0.5;
            out[m_new - keep] = nyq_old * 0.5;
        } else {
            out[keep] = (spec[keep] + spec[m - keep]) * scale;
        }
        Self::from_samples(fft_inverse_real(out))
    }

    /// Fraction of spectral energy in modes with `|k| ≥ M/4`.
    ///
    /// Large values mean the grid is too coarse for subsequent products.
    pub fn tail_energy(&self) -> f64 {
        let m = self.grid_size();
        let spec = fft_forward(&self.samples);
        let mut total = 0.0;
        let mut tail = 0.0;
        for (k, c) in spec.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            let w = wavenumber(k, m).map_or(m as i64 / 2, i64::abs);
            if w as usize >= m / 4 {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}

/// Cached Fourier coefficients of a [`PeriodicFn`]: `c₀ + Σ aₖ cos kθ + bₖ sin kθ`.
#[derive(Debug, Clone)]
pub struct Interpolant {
    c0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    nyquist: f64,
    half: usize,
}

impl Interpolant {
    fn new(f: &PeriodicFn) -> Self {
        let m = f.grid_size();
        let half = m / 2;
        let spec = fft_forward(f.samples());
        let inv_m = 1.0 / m as f64;
        let c0 = spec[0].re * inv_m;
        let nyquist = spec[half].re * inv_m;
        let mut cos = Vec::with_capacity(half);
        let mut sin = Vec::with_capacity(half);
        for c in &spec[1..half] {
            cos.push(2.0 * c.re * inv_m);
            sin.push(-2.0 * c.im * inv_m);
        }
        // drop negligible high modes so constants and low-order polynomials evaluate cheaply
        let scale = f.max_abs().max(f64::MIN_POSITIVE);
        let cutoff = 1e-17 * scale;
        let last = cos
            .iter()
            .zip(&sin)
            .rposition(|(a, b)| a.abs() > cutoff || b.abs() > cutoff)
            .map_or(0, |i| i + 1);
        cos.truncate(last);
        sin.truncate(last);
        let nyquist = if nyquist.abs() > cutoff { nyquist } else { 0.0 };
        Self {
            c0,
            cos,
            sin,
            nyquist,
            half,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.cos.is_empty() && self.nyquist == 0.0
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.c0;
        if !self.cos.is_empty() {
            let (s1, c1) = theta.sin_cos();
            let (mut sk, mut ck) = (s1, c1);
            for (a, b) in self.cos.iter().zip(&self.sin) {
                v += a * ck + b * sk;
                let next_c = ck * c1 - sk * s1;
                sk = sk * c1 + ck * s1;
                ck = next_c;
            }
        }
        if self.nyquist != 0.0 {
            v += self.nyquist * (self.half as f64 * theta).cos();
        }
        v
    }

    /// Derivative of the interpolant at `theta`.
    pub fn eval_derivative(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        if !self.cos.is_empty() {
            let (s1, c1) = theta.sin_cos();
            let (mut sk, mut ck) = (s1, c1);
            for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
                let w = (k + 1) as f64;
                v += w * (b * ck - a * sk);
                let next_c = ck * c1 - sk * s1;
                sk = sk * c1 + ck * s1;
                ck = next_c;
            }
        }
        v
    }
}

impl Add for &PeriodicFn {
    type Output = PeriodicFn;
    fn add(self, rhs: &PeriodicFn) -> PeriodicFn {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &PeriodicFn {
    type Output = PeriodicFn;
    fn sub(self, rhs: &PeriodicFn) -> PeriodicFn {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &PeriodicFn {
    type Output = PeriodicFn;
    fn mul(self, rhs: &PeriodicFn) -> PeriodicFn {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Neg for &PeriodicFn {
    type Output = PeriodicFn;
    fn neg(self) -> PeriodicFn {
        self.map(|v| -v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: usize = 256;

    fn max_diff(a: &PeriodicFn, b: &PeriodicFn) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn grid_validation() {
        assert!(check_grid(256).is_ok());
        assert_eq!(check_grid(2), Err(Error::InvalidGrid(2)));
        assert_eq!(check_grid(100), Err(Error::InvalidGrid(100)));
        assert!(matches!(
            PeriodicFn::from_samples(vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn cos_squared_is_product_to_sum() {
        let c = PeriodicFn::from_fn(M, f64::cos);
        let expected = PeriodicFn::from_fn(M, |t| 0.5 + 0.5 * (2.0 * t).cos());
        assert!(max_diff(&(&c * &c), &expected) < 1e-15);
    }

    #[test]
    fn reciprocal_of_one_is_one() {
        let one = PeriodicFn::constant(M, 1.0);
        assert_eq!(one.reciprocal().unwrap(), one);
    }

    #[test]
    fn reciprocal_round_trip() {
        let f = PeriodicFn::from_fn(M, |t| 2.0 + t.cos());
        let back = &f.reciprocal().unwrap() * &f;
        assert!(max_diff(&back, &PeriodicFn::constant(M, 1.0)) < 1e-12);
    }

    #[test]
    fn reciprocal_and_log_reject_zeros() {
        let f = PeriodicFn::from_fn(M, f64::sin);
        assert!(matches!(f.reciprocal(), Err(Error::ZeroDivide { .. })));
        let g = PeriodicFn::from_fn(M, |t| 1.0 + t.cos());
        assert!(matches!(g.log(), Err(Error::ZeroDivide { .. })));
        let neg = PeriodicFn::constant(M, -2.0);
        assert!(neg.log().is_err());
        assert!(neg.reciprocal().is_ok());
    }

    #[test]
    fn exp_log_round_trip() {
        let f = PeriodicFn::from_fn(M, |t| 3.0 + (2.0 * t).sin() + 0.5 * t.cos());
        assert!(max_diff(&f.log().unwrap().exp(), &f) < 1e-10);
    }

    #[test]
    fn antiderivative_examples() {
        let (mean, anti) = PeriodicFn::from_fn(M, f64::cos).mean_and_antiderivative();
        assert!(mean.abs() < 1e-15);
        assert!(max_diff(&anti, &PeriodicFn::from_fn(M, f64::sin)) < 1e-13);

        let (mean, anti) = PeriodicFn::constant(M, 3.0).mean_and_antiderivative();
        assert!((mean - 3.0).abs() < 1e-15);
        assert!(anti.max_abs() < 1e-15);

        let (mean, anti) = PeriodicFn::from_fn(M, |t| 2.0 + t.cos()).mean_and_antiderivative();
        assert!((mean - 2.0).abs() < 1e-14);
        assert!(max_diff(&anti, &PeriodicFn::from_fn(M, f64::sin)) < 1e-13);
    }

    #[test]
    fn antiderivative_starts_at_zero() {
        let f = PeriodicFn::from_fn(M, |t| (3.0 * t).sin() + 0.2);
        let (_, anti) = f.mean_and_antiderivative();
        assert_eq!(anti.samples()[0], 0.0);
        // ∫ sin 3t = (1 - cos 3θ)/3
        let expected = PeriodicFn::from_fn(M, |t| (1.0 - (3.0 * t).cos()) / 3.0);
        assert!(max_diff(&anti, &expected) < 1e-13);
    }

    #[test]
    fn derivative_of_trig() {
        let f = PeriodicFn::from_fn(M, |t| t.sin());
        assert!(max_diff(&f.derivative(), &PeriodicFn::from_fn(M, f64::cos)) < 1e-13);
        let g = PeriodicFn::from_fn(M, |t| (5.0 * t).cos());
        let dg = PeriodicFn::from_fn(M, |t| -5.0 * (5.0 * t).sin());
        assert!(max_diff(&g.derivative(), &dg) < 1e-12);
    }

    #[test]
    fn evaluation() {
        let f = PeriodicFn::from_fn(M, f64::sin);
        assert!((f.eval(PI / 2.0) - 1.0).abs() < 1e-12);
        let g = PeriodicFn::from_fn(M, |t| (2.0 + t.cos()).ln());
        assert_eq!(g.eval(0.0), g.samples()[0]);
        let h = PeriodicFn::from_fn(M, |t| (3.0 * t).sin());
        assert!((h.eval(0.1) - 0.3f64.sin()).abs() < 1e-12);
        // grid nodes reproduce samples
        for (i, t) in nodes(M).enumerate().step_by(17) {
            assert!((g.eval(t) - g.samples()[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolant_derivative() {
        let f = PeriodicFn::from_fn(M, |t| (2.0 * t).sin() + 0.3 * t.cos());
        let i = f.interpolant();
        let t: f64 = 0.731;
        let expected = 2.0 * (2.0 * t).cos() - 0.3 * t.sin();
        assert!((i.eval_derivative(t) - expected).abs() < 1e-12);
    }

    #[test]
    fn constant_interpolant_is_flagged() {
        assert!(PeriodicFn::constant(M, 4.0).interpolant().is_constant());
        assert!(!PeriodicFn::from_fn(M, f64::cos).interpolant().is_constant());
    }

    #[test]
    fn fourier_constructor() {
        let f = PeriodicFn::from_fourier(M, &[1.0, 2.0, -1.0, 0.0, 0.5]);
        let g = PeriodicFn::from_fn(M, |t| 1.0 + 2.0 * t.cos() - t.sin() + 0.5 * (2.0 * t).sin());
        assert!(max_diff(&f, &g) < 1e-14);
    }

    #[test]
    fn resample_round_trip() {
        let f = PeriodicFn::from_fn(64, |t| (3.0 * t).cos() + 0.1 * (7.0 * t).sin());
        let up = f.resample(128).unwrap();
        let expected = PeriodicFn::from_fn(128, |t| (3.0 * t).cos() + 0.1 * (7.0 * t).sin());
        assert!(max_diff(&up, &expected) < 1e-13);
        let back = up.resample(64).unwrap();
        assert!(max_diff(&back, &f) < 1e-12);
    }

    #[test]
    fn tail_energy_detects_wide_spectra() {
        let smooth = PeriodicFn::from_fn(M, f64::cos);
        assert!(smooth.tail_energy() < 1e-25);
        let rough = PeriodicFn::from_fn(M, |t| (100.0 * t).cos());
        assert!(rough.tail_energy() > 0.99);
    }
}
