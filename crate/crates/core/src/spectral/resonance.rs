//! Non-resonance of the eigenvalue ratios and the Bruno small-divisor
//! diagnostic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::MultiIndex;

/// Default resonance tolerance, `1e-8·max|λ|`.
pub fn default_tolerance(lambda: &[f64]) -> f64 {
    1e-8 * lambda.iter().fold(0.0f64, |m, l| m.max(l.abs())).max(f64::MIN_POSITIVE)
}

/// Divisors below this are reported as small even when formally nonzero.
pub const SMALL_DIVISOR: f64 = 1e-5;

/// The eigenvalue combination a multi-index is tested against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `⟨p,λ⟩ = λᵢ`
    Single(usize),
    /// `⟨p,λ⟩ = λᵢ + λ_j`
    Pair(usize, usize),
}

impl Relation {
    fn target(&self, lambda: &[f64]) -> f64 {
        match *self {
            Relation::Single(i) => lambda[i],
            Relation::Pair(i, j) => lambda[i] + lambda[j],
        }
    }

    fn is_trivial(&self, p: &MultiIndex) -> bool {
        matches!(*self, Relation::Pair(i, j) if *p == MultiIndex::pair(i, j))
    }

    pub fn describe(&self) -> String {
        match *self {
            Relation::Single(i) => format!("lambda{}", i + 1),
            Relation::Pair(i, j) => format!("lambda{}+lambda{}", i + 1, j + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub relation: Relation,
    pub multi_index: Vec<u32>,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonresonanceReport {
    pub degree_bound: u32,
    pub tol: f64,
    pub violations: Vec<Violation>,
    /// Smallest `|⟨p,λ⟩ − target|` over every tested pair, with its witness.
    pub min_gap: f64,
    pub min_gap_witness: Option<Violation>,
}

impl NonresonanceReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tests every `p` with `2 ≤ |p| ≤ degree_bound` against `λᵢ` and, for
/// `i < j`, against `λᵢ + λ_j` (skipping `p = eᵢ + e_j`).
pub fn check_nonresonance(lambda: &[f64], degree_bound: u32, tol: f64) -> NonresonanceReport {
    let n = lambda.len();
    let mut relations: Vec<Relation> = (0..n).map(Relation::Single).collect();
    for i in 0..n {
        for j in i + 1..n {
            relations.push(Relation::Pair(i, j));
        }
    }
    let mut violations = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut min_gap_witness = None;
    for p in MultiIndex::enumerate(n, 2, degree_bound.max(2)) {
        let dot = p.dot(lambda);
        for rel in &relations {
            if rel.is_trivial(&p) {
                continue;
            }
            let gap = (dot - rel.target(lambda)).abs();
            let record = || Violation {
                relation: *rel,
                multi_index: p.exponents(n),
                gap,
            };
            if gap < min_gap {
                min_gap = gap;
                min_gap_witness = Some(record());
            }
            if gap < tol {
                violations.push(record());
            }
        }
    }
    NonresonanceReport {
        degree_bound,
        tol,
        violations,
        min_gap,
        min_gap_witness,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrunoReport {
    /// `ω_k` for `k = 1..=k_max`.
    pub omega: Vec<f64>,
    /// `Σ_{m≤k} 2^{-m} log(1/ω_m)`.
    pub partial_sums: Vec<f64>,
    /// `Σ_{m≤k} ½ log(1/ω_m)`.
    pub half_weighted_sums: Vec<f64>,
    pub literal: bool,
    /// Heuristic: the last weighted increment is small against the running sum.
    pub appears_bounded: bool,
}

/// Visits every `c ∈ Z₊ⁿ` with `|c| ≤ max_degree` and `c_i ≥ min_entry`,
/// passing `(c, |c|, ⟨c,λ⟩)`.
fn visit(
    lambda: &[f64],
    min_entry: u32,
    max_degree: u32,
    f: &mut impl FnMut(&[u32], u32, f64),
) {
    fn rec(
        lambda: &[f64],
        min_entry: u32,
        left: u32,
        c: &mut Vec<u32>,
        deg: u32,
        dot: f64,
        f: &mut impl FnMut(&[u32], u32, f64),
    ) {
        let pos = c.len();
        if pos == lambda.len() {
            f(c, deg, dot);
            return;
        }
        let rest_min = min_entry * (lambda.len() - pos - 1) as u32;
        if left < min_entry + rest_min {
            return;
        }
        for e in min_entry..=left - rest_min {
            c.push(e);
            rec(lambda, min_entry, left - e, c, deg + e, dot + e as f64 * lambda[pos], f);
            c.pop();
        }
    }
    rec(lambda, min_entry, max_degree, &mut Vec::new(), 0, 0.0, f);
}

/// Small-divisor minima `ω_k` for `k = 1..=k_max`.
///
/// Default family: `min |⟨c,λ⟩ − λ_j|` over `c ∈ Z₊ⁿ`, `2 ≤ |c| ≤ 2^k`; any
/// divisor below `tol` is an error. With `literal`, `min |⟨c,λ⟩|` over
/// `c_i ≥ 1` with `|c| ≤ 2^k`, zero sums excluded (sign-reversed index set,
/// which leaves the absolute values unchanged).
pub fn bruno_omega(lambda: &[f64], k_max: u32, tol: f64, literal: bool) -> Result<BrunoReport> {
    if k_max == 0 || k_max > 24 {
        return Err(Error::DimensionMismatch(format!("k_max must lie in 1..=24, got {k_max}")));
    }
    let max_degree = 1u32 << k_max;
    let mut best = vec![f64::INFINITY; max_degree as usize + 1];
    let mut resonance: Option<Error> = None;
    if literal {
        visit(lambda, 1, max_degree, &mut |_, deg, dot| {
            let d = dot.abs();
            if d >= tol && d < best[deg as usize] {
                best[deg as usize] = d;
            }
        });
    } else {
        visit(lambda, 0, max_degree, &mut |c, deg, dot| {
            if deg < 2 || resonance.is_some() {
                return;
            }
            for (j, &l) in lambda.iter().enumerate() {
                let d = (dot - l).abs();
                if d < tol {
                    resonance = Some(Error::ResonantInput {
                        target: format!("lambda{}", j + 1),
                        multi_index: c.to_vec(),
                        divisor: d,
                    });
                    return;
                }
                if d < best[deg as usize] {
                    best[deg as usize] = d;
                }
            }
        });
    }
    if let Some(e) = resonance {
        return Err(e);
    }
    let mut omega = Vec::with_capacity(k_max as usize);
    let mut running = f64::INFINITY;
    let mut next = 0usize;
    for k in 1..=k_max {
        let top = 1usize << k;
        while next <= top {
            running = running.min(best[next]);
            next += 1;
        }
        omega.push(running);
    }
    let mut partial_sums = Vec::with_capacity(omega.len());
    let mut half_weighted_sums = Vec::with_capacity(omega.len());
    let (mut s, mut h) = (0.0, 0.0);
    let mut last_increment = 0.0;
    for (k, &w) in omega.iter().enumerate() {
        let log = if w.is_finite() { (1.0 / w).ln() } else { 0.0 };
        last_increment = log / 2f64.powi(k as i32 + 1);
        s += last_increment;
        h += 0.5 * log;
        partial_sums.push(s);
        half_weighted_sums.push(h);
    }
    let appears_bounded = last_increment.abs() <= 0.05 * (1.0 + s.abs());
    Ok(BrunoReport {
        omega,
        partial_sums,
        half_weighted_sums,
        literal,
        appears_bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    /// Independent oracle: nested loops over `(c₁, c₂)`.
    fn brute_omega_2d(lambda: [f64; 2], k: u32) -> f64 {
        let d = 1i64 << k;
        let mut best = f64::INFINITY;
        for c1 in 0..=d {
            for c2 in 0..=d - c1 {
                if c1 + c2 < 2 {
                    continue;
                }
                let dot = c1 as f64 * lambda[0] + c2 as f64 * lambda[1];
                for l in lambda {
                    let v = (dot - l).abs();
                    if v > 0.0 {
                        best = best.min(v);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn exact_integer_relation() {
        let r = check_nonresonance(&[1.0, 2.0], 4, 1e-8);
        assert!(!r.is_ok());
        assert!(r
            .violations
            .iter()
            .any(|v| v.relation == Relation::Single(1) && v.multi_index == vec![2, 0]));
    }

    #[test]
    fn golden_pair_is_nonresonant() {
        let r = check_nonresonance(&[1.0, SQRT_2], 8, 1e-8);
        assert!(r.is_ok());
        assert!(r.min_gap > 1e-3);
    }

    #[test]
    fn single_variable() {
        assert!(check_nonresonance(&[1.0], 10, 1e-8).is_ok());
        assert!(check_nonresonance(&[-3.0], 10, 1e-8).is_ok());
        assert!(!check_nonresonance(&[0.0], 3, 1e-8).is_ok());
    }

    #[test]
    fn trivial_pair_relation_is_skipped() {
        // p = e₁+e₂ against λ₁+λ₂ is an identity, not a resonance
        assert!(check_nonresonance(&[1.0, SQRT_2, 3.0f64.sqrt()], 3, 1e-8).is_ok());
    }

    #[test]
    fn bruno_single_variable() {
        let r = bruno_omega(&[1.0], 8, 1e-8, false).unwrap();
        assert!(r.omega.iter().all(|&w| w == 1.0));
        assert!(r.partial_sums.iter().all(|&s| s == 0.0));
        assert!(r.appears_bounded);
    }

    #[test]
    fn bruno_resonant_input() {
        assert!(matches!(
            bruno_omega(&[1.0, 2.0], 3, 1e-8, false),
            Err(Error::ResonantInput { .. })
        ));
    }

    #[test]
    fn bruno_matches_brute_force() {
        let r = bruno_omega(&[1.0, SQRT_2], 6, 1e-8, false).unwrap();
        for k in 1..=6 {
            let expected = brute_omega_2d([1.0, SQRT_2], k);
            assert_eq!(r.omega[k as usize - 1], expected);
        }
    }

    #[test]
    fn literal_variant() {
        let r = bruno_omega(&[1.0], 4, 1e-8, true).unwrap();
        assert!(r.omega.iter().all(|&w| w == 1.0));
        let r = bruno_omega(&[1.0, -SQRT_2], 5, 1e-8, true).unwrap();
        assert!(r.omega.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.omega[4] < 0.1);
    }

    proptest! {
        #[test]
        fn omega_is_non_increasing(a in 0.3f64..3.0, b in -3.0f64..3.0) {
            prop_assume!(check_nonresonance(&[a, b], 16, 1e-6).is_ok());
            let r = bruno_omega(&[a, b], 4, 1e-9, false).unwrap();
            prop_assert!(r.omega.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
