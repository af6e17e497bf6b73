//! Recovering the normal form of a transformed structure and replaying the
//! normalizing chain.

use semilocal_poisson::poisson::mobius_example;
use semilocal_poisson::{normalize, sampling, transform, Config, PoissonStructure};

fn main() {
    let mut rng = sampling::rng(2024);
    let mu = sampling::nonresonant_mu(&mut rng, 3);
    let a = sampling::skew(&mut rng, 3, 5.0);
    let p0 = PoissonStructure::normal_form(&mu, &a, 4, 256).unwrap();
    let p = transform(&p0, &sampling::fibered_diffeo(&mut rng, 3, 4, 256, 0.3)).unwrap();

    let nf = normalize(&p, &Config::default()).unwrap();
    println!("steps: {:?}", nf.step_kinds());
    println!("μ recovered {:?}\n  expected  {:?}", nf.mu, mu);
    for (row, expected) in nf.a_rows().iter().zip(a.chunks(3)) {
        println!("a row {row:>8.4?} expected {expected:>8.4?}");
    }
    println!("diagnostics: {:#?}", nf.diagnostics);

    let replay = transform(&p, &nf.chain).unwrap();
    println!("replaying the chain: deviation {:.2e}", replay.max_deviation(&nf.structure));

    let m = normalize(&mobius_example(1.0, 2f64.sqrt(), 4, 64).unwrap(), &Config::default()).unwrap();
    println!(
        "half-turn example: covered {}, monodromy {:?}, μ on the cover {:?}",
        m.covered, m.monodromy, m.mu
    );
}
