//! Canonical form of the constant log-coordinate brackets and the holonomy
//! dichotomy.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::normalize::Warning;

/// Default rank and membership tolerance.
pub const DEFAULT_FOLIATION_TOL: f64 = 1e-9;

/// Factor around the thresholds inside which a decision is reported as fragile.
const NEAR_FACTOR: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct SkewCanonical {
    /// `φ a φᵀ = diag(J, …, J, 0)` with `J = [[0,-1],[1,0]]`.
    pub phi: DMatrix<f64>,
    /// `ψ = φ⁻¹`; its columns `b₁…bₙ` satisfy `a = Σ_k (b_{2k} b_{2k-1}ᵀ − b_{2k-1} b_{2k}ᵀ)`.
    pub psi: DMatrix<f64>,
    pub s: usize,
    pub singular_values: Vec<f64>,
}

/// Block form `diag(J, …, J, 0)` with `s` blocks.
pub fn block_form(n: usize, s: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(n, n);
    for k in 0..s {
        j[(2 * k, 2 * k + 1)] = -1.0;
        j[(2 * k + 1, 2 * k)] = 1.0;
    }
    j
}

fn rank_threshold(a: &DMatrix<f64>, tol: f64) -> f64 {
    tol * a.amax().max(1.0)
}

struct Decomposition {
    image: Vec<DVector<f64>>,
    kernel: Vec<DVector<f64>>,
    pinv: DMatrix<f64>,
    singular_values: Vec<f64>,
}

fn decompose(a: &DMatrix<f64>, threshold: f64) -> Decomposition {
    let n = a.nrows();
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    // singular values of a skew matrix come in pairs, so the rank is even
    let mut rank = order
        .iter()
        .filter(|&&k| svd.singular_values[k] > threshold)
        .count();
    rank = (rank + rank % 2).min(n - n % 2);
    let mut image = Vec::new();
    let mut kernel = Vec::new();
    let mut pinv = DMatrix::zeros(n, n);
    for (pos, &k) in order.iter().enumerate() {
        let sv = svd.singular_values[k];
        let col = u.column(k).into_owned();
        if pos < rank {
            pinv += v_t.row(k).transpose() * col.transpose() / sv;
            image.push(col);
        } else {
            kernel.push(col);
        }
    }
    Decomposition {
        image,
        kernel,
        pinv,
        singular_values: order.iter().map(|&k| svd.singular_values[k]).collect(),
    }
}

/// Orthonormalizes, dropping vectors that become dependent.
fn orthonormalize(vs: Vec<DVector<f64>>, against: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for mut v in vs {
        let norm0 = v.norm();
        for q in against.iter().chain(out.iter()) {
            let c = q.dot(&v) / q.norm_squared();
            v -= q * c;
        }
        if v.norm() > 1e-8 * norm0.max(1e-300) {
            let nv = v.norm();
            out.push(v / nv);
        }
    }
    out
}

/// Symplectic Gram–Schmidt on the image of `a` for `Ω(u,v) = uᵀa⁺v`,
/// optionally starting from a prescribed pair.
fn symplectic_pairs(
    d: &Decomposition,
    first: Option<(DVector<f64>, DVector<f64>)>,
) -> Vec<DVector<f64>> {
    let omega = |u: &DVector<f64>, v: &DVector<f64>| u.dot(&(&d.pinv * v));
    let mut basis = Vec::new();
    let mut candidates = d.image.clone();
    let mut push_pair = |bo: DVector<f64>, be: DVector<f64>, cands: &mut Vec<DVector<f64>>| {
        let projected: Vec<DVector<f64>> = cands
            .drain(..)
            .map(|w| (w.norm(), &w + &be * omega(&w, &bo) - &bo * omega(&w, &be)))
            .filter(|(n0, p)| p.norm() > 1e-8 * n0)
            .map(|(_, p)| p)
            .collect();
        basis.push(bo);
        basis.push(be);
        let mut kept = orthonormalize(projected, &[]);
        kept.truncate(d.image.len().saturating_sub(basis.len()));
        *cands = kept;
    };
    if let Some((bo, be)) = first {
        push_pair(bo, be, &mut candidates);
    }
    while candidates.len() >= 2 {
        let u = candidates.remove(0);
        let (idx, w) = candidates
            .iter()
            .enumerate()
            .map(|(i, f)| (i, omega(&u, f)))
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("at least one candidate");
        if w.abs() < 1e-300 {
            break;
        }
        let f = candidates.remove(idx) / w;
        push_pair(u, f, &mut candidates);
    }
    basis
}

/// Symplectic basis of `a` with the image part first and an orthonormal
/// kernel basis last.
pub fn skew_canonical(a: &DMatrix<f64>, tol: f64) -> Result<SkewCanonical> {
    let d = decompose(a, rank_threshold(a, tol));
    let mut cols = symplectic_pairs(&d, None);
    let s = cols.len() / 2;
    cols.extend(d.kernel.iter().cloned());
    finish(cols, s, d.singular_values)
}

fn finish(cols: Vec<DVector<f64>>, s: usize, singular_values: Vec<f64>) -> Result<SkewCanonical> {
    let psi = DMatrix::from_columns(&cols);
    let phi = psi
        .clone()
        .try_inverse()
        .ok_or(Error::NotInvertible("canonical basis is degenerate"))?;
    Ok(SkewCanonical {
        phi,
        psi,
        s,
        singular_values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HolonomyCase {
    /// `μ ∈ Im a`: leaves wind around the circle with holonomy.
    MuInImage,
    /// `μ ∉ Im a`: leaves contain the circle direction, no holonomy.
    MuNotInImage,
}

#[derive(Clone, Debug)]
pub struct FoliationReport {
    pub n: usize,
    pub s: usize,
    pub case: HolonomyCase,
    pub phi: DMatrix<f64>,
    pub psi: DMatrix<f64>,
    pub leaf_dim: usize,
    pub leaf_space: String,
    /// Log-coordinate shift after one turn, defined modulo `span(b₂…b_{2s})`.
    pub holonomy_translation: Option<Vec<f64>>,
    /// `|μ − P_{Im a} μ| / |μ|`.
    pub membership_residual: f64,
    pub singular_values: Vec<f64>,
    pub mu: Vec<f64>,
    pub warnings: Vec<Warning>,
    /// The other reading when a rank or membership decision is near its threshold.
    pub alternate: Option<Box<FoliationReport>>,
}

fn build(
    mu: &DVector<f64>,
    a: &DMatrix<f64>,
    threshold: f64,
    case: HolonomyCase,
    membership_residual: f64,
) -> Result<FoliationReport> {
    let n = mu.len();
    let d = decompose(a, threshold);
    let (cols, s) = match case {
        HolonomyCase::MuInImage => {
            let b2 = -mu;
            let v = -(&d.pinv * mu);
            let c = v.dot(&(&d.pinv * &b2));
            if c.abs() < 1e-300 {
                return Err(Error::NotInvertible("mu is not in the image of a"));
            }
            let b1 = v / c;
            let mut cols = symplectic_pairs(&d, Some((b1, b2)));
            let s = cols.len() / 2;
            cols.extend(d.kernel.iter().cloned());
            (cols, s)
        }
        HolonomyCase::MuNotInImage => {
            let mut cols = symplectic_pairs(&d, None);
            let s = cols.len() / 2;
            let mu_k = d
                .kernel
                .iter()
                .fold(DVector::zeros(n), |acc, q| acc + q * q.dot(mu));
            cols.push(-mu);
            let nu_k = mu_k.norm().max(1e-300);
            cols.extend(orthonormalize(d.kernel.clone(), &[mu_k / nu_k]));
            (cols, s)
        }
    };
    let sc = finish(cols, s, d.singular_values)?;
    let (leaf_dim, leaf_space, holonomy_translation) = match case {
        HolonomyCase::MuInImage => (
            2 * s,
            format!("[0,2pi) x R^{}", n - 2 * s),
            Some(
                sc.psi
                    .column(0)
                    .iter()
                    .map(|b| 2.0 * std::f64::consts::PI * b)
                    .collect(),
            ),
        ),
        HolonomyCase::MuNotInImage => ((2 * s + 2).min(n + 1), format!("R^{}", n - 2 * s - 1), None),
    };
    Ok(FoliationReport {
        n,
        s,
        case,
        phi: sc.phi,
        psi: sc.psi,
        leaf_dim,
        leaf_space,
        holonomy_translation,
        membership_residual,
        singular_values: sc.singular_values,
        mu: mu.iter().copied().collect(),
        warnings: Vec::new(),
        alternate: None,
    })
}

/// Decides whether `μ ∈ Im a` and builds the adapted basis, leaf dimension and
/// holonomy of the log-linear foliation.
pub fn classify_holonomy(mu: &[f64], a: &[f64], tol: f64) -> Result<FoliationReport> {
    let n = mu.len();
    if a.len() != n * n {
        return Err(Error::DimensionMismatch("a must be n×n".into()));
    }
    let trace: f64 = mu.iter().sum();
    if trace.abs() <= 1e-12 * mu.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
        return Err(Error::ZeroModularTrace { trace });
    }
    let mu_v = DVector::from_column_slice(mu);
    let a_m = DMatrix::from_row_slice(n, n, a);
    let threshold = rank_threshold(&a_m, tol);
    let d = decompose(&a_m, threshold);
    let membership = |d: &Decomposition| {
        let proj = d
            .image
            .iter()
            .fold(DVector::zeros(n), |acc, q| acc + q * q.dot(&mu_v));
        (&mu_v - proj).norm() / mu_v.norm()
    };
    let residual = membership(&d);
    let case = if residual < tol {
        HolonomyCase::MuInImage
    } else {
        HolonomyCase::MuNotInImage
    };
    let mut report = build(&mu_v, &a_m, threshold, case, residual)?;

    let near_rank = d
        .singular_values
        .iter()
        .find(|&&sv| sv > threshold / NEAR_FACTOR && sv <= threshold * NEAR_FACTOR)
        .copied();
    let near_member = residual > tol / NEAR_FACTOR && residual <= tol * NEAR_FACTOR;
    if let Some(sv) = near_rank {
        report.warnings.push(Warning::new(
            "near-threshold-rank",
            "a singular value of a lies near the rank threshold",
            sv,
        ));
        let alt_threshold = if sv > threshold {
            sv * (1.0 + 1e-12)
        } else {
            sv * (1.0 - 1e-12)
        };
        let alt_d = decompose(&a_m, alt_threshold);
        let alt_residual = membership(&alt_d);
        let alt_case = if alt_residual < tol {
            HolonomyCase::MuInImage
        } else {
            HolonomyCase::MuNotInImage
        };
        if let Ok(alt) = build(&mu_v, &a_m, alt_threshold, alt_case, alt_residual) {
            report.alternate = Some(Box::new(alt));
        }
    } else if near_member {
        report.warnings.push(Warning::new(
            "near-threshold-membership",
            "mu lies near the image of a",
            residual,
        ));
        let alt_case = match case {
            HolonomyCase::MuInImage => HolonomyCase::MuNotInImage,
            HolonomyCase::MuNotInImage => HolonomyCase::MuInImage,
        };
        if let Ok(alt) = build(&mu_v, &a_m, threshold, alt_case, residual) {
            report.alternate = Some(Box::new(alt));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn check_canonical(a: &DMatrix<f64>, sc: &SkewCanonical) {
        let n = a.nrows();
        assert!((&sc.phi * &sc.psi - DMatrix::identity(n, n)).amax() < 1e-10);
        let conj = &sc.phi * a * sc.phi.transpose();
        assert!((conj - block_form(n, sc.s)).amax() < 1e-9);
    }

    #[test]
    fn standard_pair() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let sc = skew_canonical(&a, DEFAULT_FOLIATION_TOL).unwrap();
        assert_eq!(sc.s, 1);
        check_canonical(&a, &sc);
    }

    #[test]
    fn zero_matrix() {
        let a = DMatrix::zeros(3, 3);
        let sc = skew_canonical(&a, DEFAULT_FOLIATION_TOL).unwrap();
        assert_eq!(sc.s, 0);
        assert!((sc.phi.abs() - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn invertible_pair_is_case_one() {
        let r = classify_holonomy(&[1.0, SQRT_2], &[0.0, 1.0, -1.0, 0.0], DEFAULT_FOLIATION_TOL).unwrap();
        assert_eq!(r.case, HolonomyCase::MuInImage);
        assert_eq!((r.s, r.leaf_dim), (1, 2));
        let h = r.holonomy_translation.unwrap();
        // Ω(b₁, −μ) = 1 with a⁺ = [[0,-1],[1,0]] gives b₁ ∝ a⁻¹-rotated μ
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let b1 = DVector::from_vec(h.iter().map(|v| v / (2.0 * PI)).collect());
        let mu = DVector::from_vec(vec![1.0, SQRT_2]);
        let pinv = a.clone().pseudo_inverse(1e-12).unwrap();
        assert!((b1.dot(&(&pinv * -&mu)) - 1.0).abs() < 1e-12);
        check_canonical(&a, &SkewCanonical {
            phi: r.phi.clone(),
            psi: r.psi.clone(),
            s: r.s,
            singular_values: vec![],
        });
    }

    #[test]
    fn zero_a_is_case_two() {
        let r = classify_holonomy(&[1.0, SQRT_2], &[0.0; 4], DEFAULT_FOLIATION_TOL).unwrap();
        assert_eq!(r.case, HolonomyCase::MuNotInImage);
        assert_eq!((r.s, r.leaf_dim), (0, 2));
        assert!(r.holonomy_translation.is_none());
        let r = classify_holonomy(&[0.4], &[0.0], DEFAULT_FOLIATION_TOL).unwrap();
        assert_eq!(r.case, HolonomyCase::MuNotInImage);
        assert_eq!(r.leaf_dim, 2);
        assert_eq!(r.leaf_space, "R^0");
    }

    #[test]
    fn zero_trace_is_rejected() {
        assert!(matches!(
            classify_holonomy(&[1.0, -1.0], &[0.0; 4], DEFAULT_FOLIATION_TOL),
            Err(Error::ZeroModularTrace { .. })
        ));
    }

    #[test]
    fn near_threshold_rank_gets_alternate() {
        let e = 1e-9;
        let r = classify_holonomy(&[1.0, SQRT_2], &[0.0, e, -e, 0.0], DEFAULT_FOLIATION_TOL).unwrap();
        assert!(!r.warnings.is_empty());
        let alt = r.alternate.unwrap();
        assert_ne!(alt.case, r.case);
    }

    #[test]
    fn mu_kept_as_basis_vector() {
        // rank 2 in R³ with μ in the image
        let a = [0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let r = classify_holonomy(&[1.0, 2.0, 0.0], &a, DEFAULT_FOLIATION_TOL).unwrap();
        assert_eq!(r.case, HolonomyCase::MuInImage);
        assert!((r.psi.column(1) + DVector::from_vec(vec![1.0, 2.0, 0.0])).amax() < 1e-15);
        let r = classify_holonomy(&[1.0, 2.0, 0.5], &a, DEFAULT_FOLIATION_TOL).unwrap();
        assert_eq!(r.case, HolonomyCase::MuNotInImage);
        assert_eq!(r.leaf_dim, 4);
        assert!((r.psi.column(2) + DVector::from_vec(vec![1.0, 2.0, 0.5])).amax() < 1e-15);
    }

    proptest! {
        #[test]
        fn rank_two_in_four_dimensions(
            u in proptest::collection::vec(-2.0f64..2.0, 4),
            v in proptest::collection::vec(-2.0f64..2.0, 4),
        ) {
            let u = DVector::from_vec(u);
            let v = DVector::from_vec(v);
            let a = &u * v.transpose() - &v * u.transpose();
            prop_assume!(a.amax() > 0.1);
            let sc = skew_canonical(&a, DEFAULT_FOLIATION_TOL).unwrap();
            prop_assert_eq!(sc.s, 1);
            check_canonical(&a, &sc);
        }

        #[test]
        fn case_is_invariant_under_permutation(
            entries in proptest::collection::vec(-3.0f64..3.0, 6),
            mu in proptest::collection::vec(0.2f64..2.0, 4),
            rank_two in any::<bool>(),
        ) {
            let n = 4;
            let mut a = DMatrix::zeros(n, n);
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    a[(i, j)] = entries[k];
                    a[(j, i)] = -entries[k];
                    k += 1;
                }
            }
            if rank_two {
                let u = a.column(0).into_owned();
                let w = a.column(1).into_owned();
                a = &u * w.transpose() - &w * u.transpose();
            }
            let flat: Vec<f64> = a.transpose().iter().copied().collect();
            let r = classify_holonomy(&mu, &flat, DEFAULT_FOLIATION_TOL).unwrap();
            let perm = [2usize, 0, 3, 1];
            let mut pa = vec![0.0; 16];
            let mut pmu = vec![0.0; 4];
            for i in 0..n {
                pmu[perm[i]] = mu[i];
                for j in 0..n {
                    pa[perm[i] * n + perm[j]] = flat[i * n + j];
                }
            }
            let q = classify_holonomy(&pmu, &pa, DEFAULT_FOLIATION_TOL).unwrap();
            prop_assert_eq!(r.s, q.s);
            prop_assert_eq!(r.case, q.case);
        }
    }
}
