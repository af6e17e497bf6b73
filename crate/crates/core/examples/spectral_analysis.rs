//! Eigenvalues of the linear part along the circle, eigenbundle monodromy,
//! resonances and Bruno sums.

use semilocal_poisson::poisson::mobius_example;
use semilocal_poisson::spectral::default_tolerance;
use semilocal_poisson::{bruno_omega, check_nonresonance, eigen_continuation, linear_part};

fn main() {
    let p = mobius_example(1.0, 2f64.sqrt(), 4, 64).unwrap();
    let lp = linear_part(&p, 1e-8).unwrap();
    let spec = eigen_continuation(&lp.h, 1e-8).unwrap();
    println!("λ = {:?}, k ranges over [{:.3}, {:.3}]", spec.lambda, spec.k.min(), spec.k.max());
    println!("monodromy {:?}: eigenbundles trivial: {}", spec.monodromy, spec.is_trivial());

    for lambda in [vec![1.0, 2f64.sqrt()], vec![1.0, 2.0], vec![1.0, 1.5, 2.5]] {
        let r = check_nonresonance(&lambda, 8, default_tolerance(&lambda));
        match r.violations.first() {
            None => println!("{lambda:?}: no resonance up to degree 8, smallest gap {:.3e}", r.min_gap),
            Some(v) => println!(
                "{lambda:?}: {} resonances, e.g. {} with p = {:?}",
                r.violations.len(),
                v.relation.describe(),
                v.multi_index
            ),
        }
    }

    let b = bruno_omega(&[1.0, 2f64.sqrt()], 8, 1e-12, false).unwrap();
    println!("k   ω_k          Σ 2^-m log(1/ω_m)");
    for (k, (w, s)) in b.omega.iter().zip(&b.partial_sums).enumerate() {
        println!("{:<3} {w:.6e} {s:.6}", k + 1);
    }
}
