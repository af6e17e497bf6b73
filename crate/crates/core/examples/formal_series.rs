//! Truncated power series in x with θ-dependent coefficients.

use semilocal_poisson::{FormalSeries, MultiIndex, PeriodicFn};

fn main() {
    let (n, order, m) = (2, 4, 32);
    let x1 = FormalSeries::variable(n, order, m, 0);
    let x2 = FormalSeries::variable(n, order, m, 1);
    let c = PeriodicFn::from_fn(m, f64::cos);

    let f = &(&x1 + &x2.mul_fn(&c)) * &x1;
    let g = &f * &f;
    println!("f = x1² + cos θ x1x2 has {} terms; f² truncated at order {order} has {}", f.len(), g.len());
    for (p, coeff) in g.terms() {
        println!("  {:<10} coefficient at θ = 0: {:+.3}", p.display(n), coeff.samples()[0]);
    }

    // substitution x1 → x1 + x2², x2 → x2
    let sub = f.substitute(&[&x1 + &(&x2 * &x2), x2.clone()]).unwrap();
    let c13 = sub.coeff_or_zero(&MultiIndex::from_exponents(&[1, 2]));
    println!("coefficient of x1x2² after substitution: {:.3}", c13.samples()[0]);

    let d = f.derive_x(0);
    println!("∂f/∂x1 = 2x1 + cos θ x2: deviation {:.2e}", d.max_deviation(&(&x1.scale(2.0) + &x2.mul_fn(&c))));
    println!("∂f/∂θ has max coefficient {:.3}", f.derive_theta().max_coeff());
}
