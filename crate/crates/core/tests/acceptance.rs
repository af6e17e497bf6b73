//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use rand::Rng;
use semilocal_poisson::cli::leaf_parameters;
use semilocal_poisson::diffeo::FiberedDiffeo;
use semilocal_poisson::foliation::{
    classify_holonomy, holonomy_continuation, leaf_tangency, leaf_through, modular_period_ode,
    numeric_rank, HolonomyCase, Integrator, DEFAULT_FOLIATION_TOL,
};
use semilocal_poisson::invariants::{equivalent, InvariantRecord};
use semilocal_poisson::io::{parse_structure, Overrides};
use semilocal_poisson::normalize::{normalize, Config};
use semilocal_poisson::periodic::PeriodicFn;
use semilocal_poisson::poisson::{jacobiator, linear_part, transform, PoissonStructure};
use semilocal_poisson::sampling;
use semilocal_poisson::series::{FormalSeries, MultiIndex};
use semilocal_poisson::spectral::{
    bruno_omega, check_nonresonance, default_tolerance, eigen_continuation, Relation,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn round_trip() -> Outcome {
    let (order, grid) = (4, 256);
    let mut rng = sampling::rng(11);
    let (mut mu_err, mut a_err, mut jac) = (0.0f64, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for n in [2usize, 3] {
        for case in 0..50 {
            let mu = sampling::nonresonant_mu(&mut rng, n);
            let a = sampling::skew(&mut rng, n, 5.0);
            let phi = sampling::fibered_diffeo(&mut rng, n, order, grid, 0.3);
            let p0 = PoissonStructure::normal_form(&mu, &a, order, grid).unwrap();
            let p = transform(&p0, &phi).unwrap();
            match normalize(&p, &Config::default()) {
                Ok(nf) => {
                    mu_err = mu_err.max(max_abs_diff(&mu, &nf.mu));
                    a_err = a_err.max(max_abs_diff(&a, &nf.a));
                    jac = jac.max(nf.diagnostics.jacobi_residual);
                }
                Err(e) => failures.push(format!("n={n} case {case}: {e}")),
            }
        }
    }
    let pass = failures.is_empty() && mu_err < 1e-8 && a_err < 1e-7 && jac < 1e-9;
    let mut detail = format!("100 instances, max mu error {mu_err:.2e}, max a error {a_err:.2e}, max Jacobiator {jac:.2e}");
    if !failures.is_empty() {
        detail.push_str(&format!("; {} failed, first: {}", failures.len(), failures[0]));
    }
    outcome(pass, detail)
}

fn record_of(p: &PoissonStructure) -> InvariantRecord {
    let nf = normalize(p, &Config::default()).expect("normalizable");
    InvariantRecord::from_normal_form(&nf).unwrap()
}

fn invariance() -> Outcome {
    let (order, grid) = (3, 128);
    let mut rng = sampling::rng(23);
    let mut worst_a = 0.0f64;
    let mut problems = Vec::new();
    let mut checks = 0;
    for case in 0..12 {
        let n = 2 + case % 2;
        let mu = sampling::nonresonant_mu(&mut rng, n);
        let a = sampling::skew(&mut rng, n, 5.0);
        let p0 = PoissonStructure::normal_form(&mu, &a, order, grid).unwrap();
        let p = transform(&p0, &sampling::fibered_diffeo(&mut rng, n, order, grid, 0.3)).unwrap();
        let base = record_of(&p);
        let variants = [
            ("permutation", p.permute(&sampling::permutation(&mut rng, n)).unwrap()),
            (
                "reflection",
                transform(&p, &FiberedDiffeo::Reflection(sampling::signs(&mut rng, n))).unwrap(),
            ),
            (
                "transform",
                transform(&p, &sampling::fibered_diffeo(&mut rng, n, order, grid, 0.3)).unwrap(),
            ),
        ];
        for (label, q) in variants {
            checks += 1;
            let r = record_of(&q);
            let e = equivalent(&base, &r, 1e-7);
            match e.permutation {
                Some(sigma) => {
                    for i in 0..n {
                        for j in 0..n {
                            worst_a = worst_a.max((r.a_entry(sigma[i], sigma[j]) - base.a_entry(i, j)).abs());
                        }
                    }
                }
                None => problems.push(format!("case {case} {label}: {:?}", e.failing)),
            }
        }
        // a different quadratic part must be told apart
        let mut b = a.clone();
        b[1] += 0.5;
        b[n] -= 0.5;
        checks += 1;
        let other = record_of(&PoissonStructure::normal_form(&mu, &b, order, grid).unwrap());
        if equivalent(&base, &other, 1e-7).equivalent {
            problems.push(format!("case {case}: changed a still equivalent"));
        }
    }
    let pass = problems.is_empty() && worst_a < 1e-7;
    let mut detail = format!("{checks} comparisons, max a deviation {worst_a:.2e}");
    if !problems.is_empty() {
        detail.push_str(&format!("; {} mismatches, first: {}", problems.len(), problems[0]));
    }
    outcome(pass, detail)
}

fn modular_period() -> Outcome {
    let (order, grid) = (3, 128);
    let mut rng = sampling::rng(37);
    let integrator = Integrator::default();
    let mut worst = 0.0f64;
    for case in 0..20 {
        let n = 1 + case % 3;
        let mu = sampling::nonresonant_mu(&mut rng, n);
        let a = sampling::skew(&mut rng, n, 5.0);
        let p0 = PoissonStructure::normal_form(&mu, &a, order, grid).unwrap();
        let p = transform(&p0, &sampling::fibered_diffeo(&mut rng, n, order, grid, 0.3)).unwrap();
        let expected = 2.0 * PI / mu.iter().sum::<f64>();
        match modular_period_ode(&p, &integrator) {
            Ok(t) => worst = worst.max((t - expected).abs() / expected.abs()),
            Err(e) => return outcome(false, format!("case {case}: {e}")),
        }
    }
    outcome(worst < 1e-6, format!("20 instances, max relative period error {worst:.2e}"))
}

fn mobius_fixture() -> Outcome {
    let text = include_str!("../fixtures/mobius.toml");
    let pr = parse_structure(text, &Overrides::default()).unwrap();
    let p = &pr.structure;
    let jac = jacobiator(p).norm;
    let lp = linear_part(p, 1e-8).unwrap();
    let spec = eigen_continuation(&lp.h, 1e-8).unwrap();
    let nf = match normalize(p, &pr.config) {
        Ok(nf) => nf,
        Err(e) => return outcome(false, format!("normalization failed: {e}")),
    };
    let ratio_err = (nf.mu[1] / nf.mu[0] - SQRT_2).abs();
    let pass = jac < 1e-10
        && spec.monodromy == vec![-1, -1]
        && nf.covered
        && nf.diagnostics.jacobi_residual < 1e-9
        && ratio_err < 1e-8;
    outcome(
        pass,
        format!(
            "Jacobiator {jac:.2e}, monodromy {:?}, covered {}, final Jacobiator {:.2e}, mu {:?} (ratio error {ratio_err:.2e})",
            spec.monodromy, nf.covered, nf.diagnostics.jacobi_residual, nf.mu
        ),
    )
}

/// Every violated relation, found by running an odometer over exponents.
fn brute_force_resonances(lambda: &[f64], bound: u32, tol: f64) -> Vec<(Relation, Vec<u32>)> {
    let n = lambda.len();
    let mut out = Vec::new();
    let mut p = vec![0u32; n];
    loop {
        let deg: u32 = p.iter().sum();
        if (2..=bound).contains(&deg) {
            let dot: f64 = p.iter().zip(lambda).map(|(&e, l)| e as f64 * l).sum();
            for i in 0..n {
                if (dot - lambda[i]).abs() < tol {
                    out.push((Relation::Single(i), p.clone()));
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    let trivial = deg == 2 && p[i] == 1 && p[j] == 1;
                    if !trivial && (dot - lambda[i] - lambda[j]).abs() < tol {
                        out.push((Relation::Pair(i, j), p.clone()));
                    }
                }
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                out.sort_by(|x, y| format!("{x:?}").cmp(&format!("{y:?}")));
                return out;
            }
            p[k] += 1;
            if p[k] <= bound {
                break;
            }
            p[k] = 0;
            k += 1;
        }
    }
}

fn nonresonance_oracle() -> Outcome {
    let mut rng = sampling::rng(41);
    let mut disagreements = 0;
    let mut resonant = 0;
    for case in 0..100 {
        let n = 1 + case % 4;
        let lambda: Vec<f64> = (0..n)
            .map(|_| match case % 3 {
                0 => rng.gen_range(-3i32..=3) as f64,
                1 => rng.gen_range(-6i32..=6) as f64 / 2.0,
                _ => rng.gen_range(-3.0..3.0),
            })
            .collect();
        if lambda.iter().all(|&l| l == 0.0) {
            continue;
        }
        let tol = default_tolerance(&lambda);
        let report = check_nonresonance(&lambda, 8, tol);
        let mut got: Vec<(Relation, Vec<u32>)> = report
            .violations
            .iter()
            .map(|v| (v.relation, v.multi_index.clone()))
            .collect();
        got.sort_by(|x, y| format!("{x:?}").cmp(&format!("{y:?}")));
        let expected = brute_force_resonances(&lambda, 8, tol);
        if !expected.is_empty() {
            resonant += 1;
        }
        if got != expected {
            disagreements += 1;
        }
    }
    let r = check_nonresonance(&[1.0, 2.0], 8, default_tolerance(&[1.0, 2.0]));
    let witness = r
        .violations
        .iter()
        .any(|v| v.relation == Relation::Single(1) && v.multi_index == vec![2, 0]);
    outcome(
        disagreements == 0 && witness,
        format!("100 vectors ({resonant} resonant), {disagreements} disagreements; (1,2) flagged with p=(2,0): {witness}"),
    )
}

fn bruno() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let one = bruno_omega(&[1.0], 12, 1e-12, false).unwrap();
    if one.omega.iter().any(|&w| w != 1.0) {
        ok = false;
        notes.push("lambda=(1) not all ones".to_string());
    }
    let mut rng = sampling::rng(43);
    for _ in 0..10 {
        let n = rng.gen_range(1..=3);
        let mu = sampling::nonresonant_mu(&mut rng, n);
        for literal in [false, true] {
            let b = bruno_omega(&mu, 7, 1e-12, literal).unwrap();
            if b.omega.windows(2).any(|w| w[1] > w[0]) {
                ok = false;
                notes.push(format!("omega increases for {mu:?}"));
            }
        }
    }
    let lambda = [1.0, SQRT_2];
    let b = bruno_omega(&lambda, 6, 1e-12, false).unwrap();
    let mut worst = 0.0f64;
    for k in 1..=6u32 {
        let top = 1u32 << k;
        let mut best = f64::INFINITY;
        for c1 in 0..=top {
            for c2 in 0..=top - c1 {
                if c1 + c2 < 2 {
                    continue;
                }
                for &l in &lambda {
                    best = best.min((c1 as f64 + c2 as f64 * SQRT_2 - l).abs());
                }
            }
        }
        worst = worst.max((b.omega[k as usize - 1] - best).abs() / best);
    }
    if worst > 1e-12 {
        ok = false;
    }
    notes.push(format!("brute-force relative deviation for (1, sqrt 2) up to k=6: {worst:.2e}"));
    outcome(ok, format!("omega(1) = 1 for k <= 12, monotone on 20 runs; {}", notes.join("; ")))
}

fn case_one_instance<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let mu = sampling::nonresonant_mu(rng, n);
        let a = match n {
            3 => {
                let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let s = rng.gen_range(0.3..1.0);
                let mut a = vec![0.0; 9];
                for i in 0..3 {
                    for j in 0..3 {
                        a[i * 3 + j] = s * (mu[i] * v[j] - v[i] * mu[j]);
                    }
                }
                a
            }
            _ => sampling::skew(rng, n, 3.0),
        };
        if let Ok(r) = classify_holonomy(&mu, &a, DEFAULT_FOLIATION_TOL) {
            let bounded = r
                .holonomy_translation
                .as_ref()
                .is_some_and(|h| h.iter().all(|v| v.abs() < 12.0));
            if r.case == HolonomyCase::MuInImage && r.warnings.is_empty() && bounded {
                return (mu, a);
            }
        }
    }
}

fn foliation() -> Outcome {
    let (order, grid) = (2, 16);
    let mut rng = sampling::rng(47);
    let integrator = Integrator::default();
    let (mut hol, mut tan) = (0.0f64, 0.0f64);
    let mut rank_mismatch = 0;
    let mut instances = 0;
    for case in 0..9 {
        let n = 2 + case % 3;
        let (mu, a) = case_one_instance(&mut rng, n);
        let r = classify_holonomy(&mu, &a, DEFAULT_FOLIATION_TOL).unwrap();
        let p = PoissonStructure::normal_form(&mu, &a, order, grid).unwrap();
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let leaf = leaf_through(&x0, &r).unwrap();
        let predicted = leaf.holonomy_endpoint().unwrap();
        match holonomy_continuation(&p, &r, &x0, &integrator) {
            Ok(end) => {
                for (e, q) in end.iter().zip(&predicted) {
                    hol = hol.max((e - q).abs() / q.abs());
                }
            }
            Err(e) => return outcome(false, format!("continuation failed for n={n}: {e}")),
        }
        let params = leaf_parameters(&leaf, 100);
        tan = tan.max(leaf_tangency(&p, &leaf, &params).max_residual);
        let ev = p.evaluator();
        for t in params.iter().step_by(5) {
            let (theta, x) = leaf.eval(t);
            if numeric_rank(&ev, theta, &x, 1e-9) != r.leaf_dim {
                rank_mismatch += 1;
            }
        }
        instances += 1;
    }
    let pass = hol < 1e-6 && tan < 1e-8 && rank_mismatch == 0;
    outcome(
        pass,
        format!(
            "{instances} case-1 instances (n = 2..4): max holonomy relative error {hol:.2e}, max tangency residual {tan:.2e} over 100 samples each, {rank_mismatch} rank mismatches over 20 points each"
        ),
    )
}

fn one_dimensional() -> Outcome {
    let (order, grid) = (5, 64);
    let c = 0.8;
    let x = |d: u32| MultiIndex::from_exponents(&[d]);
    let mut b = FormalSeries::monomial(1, order, x(1), PeriodicFn::constant(grid, c));
    b.add_term(x(2), &PeriodicFn::from_fn(grid, f64::cos), 1.0);
    b.add_term(x(3), &PeriodicFn::from_fn(grid, |t| (2.0 * t).sin()), 1.0);
    let p = PoissonStructure::new(vec![b], vec![vec![FormalSeries::zero(1, order, grid)]]).unwrap();
    let nf = match normalize(&p, &Config::default()) {
        Ok(nf) => nf,
        Err(e) => return outcome(false, format!("normalization failed: {e}")),
    };
    let target = PoissonStructure::normal_form(&[c], &[0.0], order, grid).unwrap();
    let dev = nf.structure.max_deviation(&target);

    // oscillating linear coefficient: c = 2π / ∫ dθ/(0.8 + 0.3 sin θ)
    let osc = PoissonStructure::new(
        vec![FormalSeries::monomial(1, order, x(1), PeriodicFn::from_fn(grid, |t| 0.8 + 0.3 * t.sin()))
            .try_add(&FormalSeries::monomial(1, order, x(2), PeriodicFn::from_fn(grid, f64::sin)))
            .unwrap()],
        vec![vec![FormalSeries::zero(1, order, grid)]],
    )
    .unwrap();
    let c_osc = normalize(&osc, &Config::default()).map(|nf| nf.mu[0]);
    let c_exact = (0.64f64 - 0.09).sqrt();
    let osc_err = c_osc.as_ref().map_or(f64::INFINITY, |m| (m - c_exact).abs());

    let fol = classify_holonomy(&nf.mu, &nf.a, DEFAULT_FOLIATION_TOL).unwrap();
    let single_leaf = fol.case == HolonomyCase::MuNotInImage && fol.leaf_dim == 2 && fol.leaf_space == "R^0";
    let pass = nf.mu[0] == c && dev < 1e-12 && osc_err < 1e-12 && single_leaf;
    outcome(
        pass,
        format!(
            "c = {} (input {c}), deviation from c x d_theta^d_x {dev:.2e}; oscillating case error {osc_err:.2e}; P+ one leaf of dimension {} ({})",
            nf.mu[0], fol.leaf_dim, fol.leaf_space
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("normal-form round trip", round_trip),
        ("invariance suite", invariance),
        ("modular period", modular_period),
        ("eigenbundle example on the double cover", mobius_fixture),
        ("non-resonance oracle", nonresonance_oracle),
        ("Bruno diagnostic", bruno),
        ("foliation and holonomy", foliation),
        ("one-dimensional case", one_dimensional),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {} ({name}): {status} [{:.1}s] {}",
            k + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
