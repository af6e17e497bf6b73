//! Symplectic leaves on the positive orthant, their holonomy around the
//! circle and a numerical check by integration.

use semilocal_poisson::foliation::{
    holonomy_continuation, leaf_tangency, Integrator, DEFAULT_FOLIATION_TOL,
};
use semilocal_poisson::{classify_holonomy, leaf_through, stratification, PoissonStructure};

fn main() {
    let mu = [1.0, 2f64.sqrt()];
    for a12 in [1.0, 0.0] {
        let a = [0.0, a12, -a12, 0.0];
        let r = classify_holonomy(&mu, &a, DEFAULT_FOLIATION_TOL).unwrap();
        println!(
            "a12 = {a12}: {:?}, s = {}, leaf dimension {}, leaf space {}, holonomy {:?}",
            r.case, r.s, r.leaf_dim, r.leaf_space, r.holonomy_translation
        );

        let p = PoissonStructure::normal_form(&mu, &a, 2, 16).unwrap();
        let x0 = [1.0, 1.0];
        let leaf = leaf_through(&x0, &r).unwrap();
        let params: Vec<Vec<f64>> = (0..8).map(|k| vec![0.7 * k as f64, 0.1 * k as f64 - 0.3]).collect();
        println!("  tangency residual {:.2e}", leaf_tangency(&p, &leaf, &params).max_residual);
        if let Some(end) = leaf.holonomy_endpoint() {
            let ode = holonomy_continuation(&p, &r, &x0, &Integrator::default()).unwrap();
            println!("  once around: predicted {end:.9?}, integrated {ode:.9?}");
        }
    }
    for s in stratification(&mu, &[0.0, 1.0, -1.0, 0.0]) {
        println!("stratum {:?}: μ {:?}, a {:?}, {} orthants", s.indices, s.mu, s.a, s.orthants);
    }
}
