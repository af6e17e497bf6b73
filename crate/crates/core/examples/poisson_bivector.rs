//! Building brackets, checking the Jacobi identity and pushing a structure
//! forward along a fibered diffeomorphism.

use semilocal_poisson::poisson::mobius_example;
use semilocal_poisson::{jacobiator, linear_part, sampling, transform, PoissonStructure};

fn main() {
    let mu = [1.0, 2f64.sqrt()];
    let a = [0.0, 3.0, -3.0, 0.0];
    let p0 = PoissonStructure::normal_form(&mu, &a, 4, 128).unwrap();
    println!("normal form: Jacobiator norm {:.2e}", jacobiator(&p0).norm);

    let phi = sampling::fibered_diffeo(&mut sampling::rng(5), 2, 4, 128, 0.3);
    let p = transform(&p0, &phi).unwrap();
    println!(
        "after {:?}: Jacobiator norm {:.2e}, max coefficient {:.3}",
        phi.steps().iter().map(|s| s.kind()).collect::<Vec<_>>(),
        jacobiator(&p).norm,
        p.max_coeff()
    );
    let back = transform(&p, &phi.inverse().unwrap()).unwrap();
    println!("pushing back: deviation from the normal form {:.2e}", back.max_deviation(&p0));

    let lp = linear_part(&p, 1e-8).unwrap();
    println!(
        "linear part: max transverse coefficient {:.2e}, dual to a non-resonant algebra: {}",
        lp.max_u, lp.dual_of_nonresonant
    );

    let m = mobius_example(1.0, 2f64.sqrt(), 4, 64).unwrap();
    println!("half-turn eigenline example: Jacobiator norm {:.2e}", jacobiator(&m).norm);

    let ev = p.evaluator();
    println!("bracket matrix at θ = 0.5, x = (0.1, 0.2):\n{:.4}", ev.matrix(0.5, &[0.1, 0.2]));
}
