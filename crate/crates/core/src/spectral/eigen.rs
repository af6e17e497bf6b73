//! Continuation of the eigenstructure of `H(θ)` around the circle.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::FnMatrix;
use crate::perm::permutations;
use crate::periodic::{nodes, PeriodicFn};

/// Default relative tolerance for the proportionality check.
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-8;

/// Eigenvalue gaps (and imaginary parts) below this fraction of `‖H‖` count
/// as collisions.
const MIN_RELATIVE_GAP: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Eigenvalues at `θ = 0`, ordered so that `λᵢ` belongs to the eigenvector
    /// closest to the `xᵢ` axis.
    pub lambda: Vec<f64>,
    /// `k(θ)` with `k(0) = 1`; the spectrum at `θ` is `{k(θ)λᵢ}`.
    pub k: PeriodicFn,
    /// Column `i` is the unit eigenvector of `λᵢ`, continued from `θ = 0`.
    /// For a branch with monodromy `-1` the samples do not close up.
    pub frame: FnMatrix,
    /// `+1` for a trivial eigenline bundle, `-1` for a Möbius band.
    pub monodromy: Vec<i8>,
    pub covered: bool,
    /// Smallest eigenvalue gap over all nodes.
    pub min_gap: f64,
}

impl SpectralData {
    pub fn is_trivial(&self) -> bool {
        self.monodromy.iter().all(|&s| s == 1)
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }
}

fn null_vector(a: &DMatrix<f64>, ev: f64) -> DVector<f64> {
    let n = a.nrows();
    let shifted = a - DMatrix::identity(n, n) * ev;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let idx = svd.singular_values.argmin().0;
    v_t.row(idx).transpose()
}

/// Sorted real eigenvalues of `a`, failing on complex or colliding pairs.
fn real_spectrum(a: &DMatrix<f64>, theta: f64) -> Result<(Vec<f64>, f64)> {
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let eigs = a.clone().complex_eigenvalues();
    let mut re = Vec::with_capacity(eigs.len());
    for z in eigs.iter() {
        if z.im.abs() > MIN_RELATIVE_GAP * scale {
            return Err(Error::EigenvalueCollision { theta, gap: 0.0 });
        }
        re.push(z.re);
    }
    re.sort_by(f64::total_cmp);
    let gap = re
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if gap < MIN_RELATIVE_GAP * scale {
        return Err(Error::EigenvalueCollision { theta, gap });
    }
    Ok((re, gap))
}

/// Tracks eigenvalues and eigenvectors of `H(θ)` along the grid.
///
/// The spectrum stays real and simple, so the ascending order of the
/// eigenvalues is preserved around the loop.
pub fn eigen_continuation(h: &FnMatrix, tol: f64) -> Result<SpectralData> {
    let n = h.dim();
    let grid = h.grid();
    let thetas: Vec<f64> = nodes(grid).collect();
    let mut spectra = Vec::with_capacity(grid);
    let mut min_gap = f64::INFINITY;
    for (m, &theta) in thetas.iter().enumerate() {
        let (ev, gap) = real_spectrum(&h.at_node(m), theta)?;
        min_gap = min_gap.min(gap);
        spectra.push(ev);
    }

    // rank[i]: position in the sorted spectrum of the branch assigned to axis i
    let a0 = h.at_node(0);
    let v0: Vec<DVector<f64>> = spectra[0].iter().map(|&ev| null_vector(&a0, ev)).collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for sigma in permutations(n) {
        let score: f64 = (0..n).map(|i| v0[sigma[i]][i].abs()).sum();
        if score > best.0 + 1e-12 {
            best = (score, sigma);
        }
    }
    let rank = best.1;

    let lambda: Vec<f64> = rank.iter().map(|&r| spectra[0][r]).collect();
    let lmin = lambda.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    if lmin <= MIN_RELATIVE_GAP * a0.norm() {
        return Err(Error::KVanishes { min: lmin });
    }

    let k_samples: Vec<f64> = spectra.iter().map(|ev| ev[rank[0]] / lambda[0]).collect();
    let kmin = k_samples.iter().fold(f64::INFINITY, |m, k| m.min(*k));
    if kmin <= MIN_RELATIVE_GAP {
        return Err(Error::KVanishes { min: kmin });
    }
    let mut deviation: f64 = 0.0;
    for (ev, &k) in spectra.iter().zip(&k_samples) {
        for i in 0..n {
            deviation = deviation.max((ev[rank[i]] / lambda[i] - k).abs());
        }
    }
    if deviation > tol {
        return Err(Error::NonProportionalSpectrum { deviation });
    }

    let mut frames: Vec<DMatrix<f64>> = Vec::with_capacity(grid);
    let mut first = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut v = v0[rank[i]].clone();
        if v[i] < 0.0 {
            v = -v;
        }
        first.set_column(i, &v);
    }
    frames.push(first);
    for m in 1..grid {
        let a = h.at_node(m);
        let prev = &frames[m - 1];
        let mut cur = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut v = null_vector(&a, spectra[m][rank[i]]);
            if v.dot(&prev.column(i)) < 0.0 {
                v = -v;
            }
            cur.set_column(i, &v);
        }
        frames.push(cur);
    }
    let monodromy = (0..n)
        .map(|i| {
            if frames[grid - 1].column(i).dot(&frames[0].column(i)) < 0.0 {
                -1
            } else {
                1
            }
        })
        .collect();

    Ok(SpectralData {
        lambda,
        k: PeriodicFn::from_samples(k_samples)?,
        frame: FnMatrix::from_nodes(&frames)?,
        monodromy,
        covered: false,
        min_gap,
    })
}
