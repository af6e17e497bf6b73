use proptest::prelude::*;

use semilocal_poisson::foliation::stratification;
use semilocal_poisson::io::{parse_structure, Overrides};
use semilocal_poisson::normalize::{normalize, Config};
use semilocal_poisson::poisson::{transform, PoissonStructure};
use semilocal_poisson::sampling;

const ORDER: usize = 3;
const GRID: usize = 128;

fn instance(seed: u64, n: usize) -> (Vec<f64>, Vec<f64>, PoissonStructure) {
    let mut rng = sampling::rng(seed);
    let mu = sampling::nonresonant_mu(&mut rng, n);
    let a = sampling::skew(&mut rng, n, 5.0);
    let p0 = PoissonStructure::normal_form(&mu, &a, ORDER, GRID).unwrap();
    let p = transform(&p0, &sampling::fibered_diffeo(&mut rng, n, ORDER, GRID, 0.3)).unwrap();
    (mu, a, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transform_then_inverse(seed in any::<u64>(), n in 1usize..=3) {
        let (_, _, p) = instance(seed, n);
        let phi = sampling::fibered_diffeo(&mut sampling::rng(seed ^ 1), n, ORDER, GRID, 0.3);
        let q = transform(&transform(&p, &phi).unwrap(), &phi.inverse().unwrap()).unwrap();
        prop_assert!(q.max_deviation(&p) < 1e-9 * (1.0 + p.max_coeff()));
    }

    #[test]
    fn exact_normal_forms_need_no_steps(seed in any::<u64>(), n in 1usize..=3) {
        let (mu, a, _) = instance(seed, n);
        let p = PoissonStructure::normal_form(&mu, &a, ORDER, GRID).unwrap();
        let nf = normalize(&p, &Config::default()).unwrap();
        prop_assert!(nf.step_kinds().is_empty(), "{:?}", nf.step_kinds());
        for (x, y) in nf.mu.iter().zip(&mu).chain(nf.a.iter().zip(&a)) {
            prop_assert!((x - y).abs() <= 1e-14 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>(), n in 1usize..=3) {
        let (mu, a, p) = instance(seed, n);
        let nf = normalize(&p, &Config::default()).unwrap();
        let again = normalize(&nf.structure, &Config::default()).unwrap();
        for (x, y) in again.mu.iter().zip(&mu) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        for (x, y) in again.a.iter().zip(&a) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn strata_renormalize_to_restrictions(seed in any::<u64>()) {
        let (mu, a, _) = instance(seed, 3);
        let p = PoissonStructure::normal_form(&mu, &a, ORDER, GRID).unwrap();
        for s in stratification(&mu, &a).into_iter().filter(|s| !s.indices.is_empty()) {
            let keep: Vec<usize> = s.indices.iter().map(|i| i - 1).collect();
            let nf = normalize(&p.restrict(&keep).unwrap(), &Config::default()).unwrap();
            for (x, y) in nf.mu.iter().zip(&s.mu).chain(nf.a.iter().zip(&s.a)) {
                prop_assert!((x - y).abs() < 1e-12, "{:?} vs {:?}", nf.mu, s.mu);
            }
        }
    }

    #[test]
    fn document_order_does_not_matter(
        order in Just(vec![0usize, 1, 2, 3, 4, 5]).prop_shuffle(),
        flips in proptest::collection::vec(any::<bool>(), 6),
    ) {
        let entries = [
            ("theta", "x1", "x1*(1 + 0.2*cos(theta))"),
            ("theta", "x2", "sqrt(2)*x2 + x1^2*sin(theta)"),
            ("theta", "x3", "sqrt(3)*x3"),
            ("x1", "x2", "2*x1*x2"),
            ("x1", "x3", "-x1*x3"),
            ("x2", "x3", "0.5*x2*x3"),
        ];
        let mut text = String::from("n = 3\norder = 3\ngrid = 32\n[brackets]\n");
        let mut reference = text.clone();
        for (k, (f, g, e)) in entries.iter().enumerate() {
            reference.push_str(&format!("\"{f},{g}\" = \"{e}\"\n"));
            let (f, g, e) = entries[order[k]];
            if flips[k] {
                text.push_str(&format!("\"{g},{f}\" = \"-({e})\"\n"));
            } else {
                text.push_str(&format!("\"{f},{g}\" = \"{e}\"\n"));
            }
        }
        let a = parse_structure(&text, &Overrides::default()).unwrap().structure;
        let b = parse_structure(&reference, &Overrides::default()).unwrap().structure;
        prop_assert_eq!(a.max_deviation(&b), 0.0);
    }
}
