//! Seeded random instances: non-resonant spectra, skew matrices and
//! near-identity fibered diffeomorphisms.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diffeo::{CircleMap, FiberedDiffeo, FiberwiseMap};
use crate::periodic::PeriodicFn;
use crate::series::{FormalSeries, MultiIndex};
use crate::spectral::check_nonresonance;

const PRIMES: [f64; 10] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `μᵢ = ±r·√pᵢ` for distinct primes, so that no integer relation holds
/// exactly; redrawn until the trace is not small and every divisor up to
/// degree 8 exceeds `1e-3`.
pub fn nonresonant_mu<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    assert!(n <= PRIMES.len());
    loop {
        let mut primes = PRIMES.to_vec();
        primes.shuffle(rng);
        let r = rng.gen_range(0.5..1.5);
        let mu: Vec<f64> = primes[..n]
            .iter()
            .map(|p| {
                let sign = if rng.gen_bool(0.8) { 1.0 } else { -1.0 };
                sign * r * p.sqrt()
            })
            .collect();
        if mu.iter().sum::<f64>().abs() < 0.3 {
            continue;
        }
        if check_nonresonance(&mu, 8, 1e-3).is_ok() {
            return mu;
        }
    }
}

/// Row-major skew matrix with entries in `[-bound, bound]`.
pub fn skew<R: Rng>(rng: &mut R, n: usize, bound: f64) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(-bound..=bound);
            a[i * n + j] = v;
            a[j * n + i] = -v;
        }
    }
    a
}

/// `c₀ + c₁cos θ + c₂sin θ` with `|c₀|+|c₁|+|c₂| ≤ magnitude`.
pub fn trig_coefficient<R: Rng>(rng: &mut R, grid: usize, magnitude: f64) -> PeriodicFn {
    let w: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let total: f64 = w.iter().map(|v| v.abs()).sum::<f64>().max(1e-12);
    let scale = magnitude * rng.gen_range(0.0..1.0) / total;
    PeriodicFn::from_fourier(grid, &[w[0] * scale, w[1] * scale, w[2] * scale])
}

/// `φᵢ = xᵢ + Σ c_{i,p}(θ) x^p` with trigonometric coefficients of size at
/// most `magnitude`; the linear perturbation is scaled by `1/n` so that the
/// linear part stays invertible.
pub fn near_identity<R: Rng>(
    rng: &mut R,
    n: usize,
    order: usize,
    grid: usize,
    magnitude: f64,
) -> FiberwiseMap {
    let components = (0..n)
        .map(|i| {
            let mut s = FormalSeries::variable(n, order, grid, i);
            for p in MultiIndex::enumerate(n, 1, order as u32) {
                let m = if p.degree() == 1 { magnitude / n as f64 } else { magnitude };
                s.add_term(p, &trig_coefficient(rng, grid, m), 1.0);
            }
            s
        })
        .collect();
    FiberwiseMap::new(components).expect("near-identity map is invertible")
}

/// `χ(θ) = θ + c + a sin θ + b cos 2θ` with `|a| + 2|b| ≤ 0.5`.
pub fn circle_map<R: Rng>(rng: &mut R, grid: usize) -> CircleMap {
    let c = rng.gen_range(-0.5..0.5);
    let a = rng.gen_range(-0.25..0.25);
    let b = rng.gen_range(-0.125..0.125);
    CircleMap::new(PeriodicFn::from_fn(grid, |t| c + a * t.sin() + b * (2.0 * t).cos()))
        .expect("slope stays positive")
}

/// A base reparametrization followed by a near-identity fiberwise map.
pub fn fibered_diffeo<R: Rng>(rng: &mut R, n: usize, order: usize, grid: usize, magnitude: f64) -> FiberedDiffeo {
    FiberedDiffeo::Chain(vec![
        FiberedDiffeo::BaseReparam(circle_map(rng, grid)),
        FiberedDiffeo::FiberwiseFormal(near_identity(rng, n, order, grid, magnitude)),
    ])
}

/// Uniformly random permutation of `0..n`.
pub fn permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn signs<R: Rng>(rng: &mut R, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect()
}
