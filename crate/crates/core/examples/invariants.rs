//! Invariant records, the modular period and the equivalence test.

use semilocal_poisson::foliation::{modular_period_ode, Integrator};
use semilocal_poisson::{
    equivalent, modular_period, normalize, sampling, transform, Config, FiberedDiffeo,
    InvariantRecord, PoissonStructure,
};

fn record(p: &PoissonStructure) -> InvariantRecord {
    InvariantRecord::from_normal_form(&normalize(p, &Config::default()).unwrap()).unwrap()
}

fn main() {
    let mut rng = sampling::rng(8);
    let mu = [1.0, 2f64.sqrt(), 3f64.sqrt()];
    let a = [0.0, 1.0, -2.0, -1.0, 0.0, 0.5, 2.0, -0.5, 0.0];
    let p0 = PoissonStructure::normal_form(&mu, &a, 3, 128).unwrap();
    let p = transform(&p0, &sampling::fibered_diffeo(&mut rng, 3, 3, 128, 0.3)).unwrap();
    let r = record(&p);
    println!("period 2π/Σμ = {:.12}", modular_period(&r).unwrap());
    println!("integrated modular flow: {:.12}", modular_period_ode(&p, &Integrator::default()).unwrap());

    let permuted = p.permute(&[2, 0, 1]).unwrap();
    let reflected = transform(&p, &FiberedDiffeo::Reflection(vec![-1, 1, -1])).unwrap();
    for (label, q) in [("permuted", &permuted), ("reflected", &reflected)] {
        let e = equivalent(&r, &record(q), 1e-7);
        println!("{label}: equivalent {} with permutation {:?}", e.equivalent, e.permutation);
    }
    let other = PoissonStructure::normal_form(&mu, &[0.0, 1.5, -2.0, -1.5, 0.0, 0.5, 2.0, -0.5, 0.0], 3, 128).unwrap();
    let e = equivalent(&r, &record(&other), 1e-7);
    println!("changed a12: equivalent {}, failing invariant {:?}", e.equivalent, e.failing);
}
