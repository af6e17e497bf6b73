//! Spectral calculus on the circle: derivatives, antiderivatives and
//! off-grid evaluation of sampled periodic functions.

use semilocal_poisson::PeriodicFn;

fn main() {
    let m = 64;
    let k = PeriodicFn::from_fn(m, |t| 2.0 + t.sin());
    let dk = k.derivative();
    let err = dk
        .zip_with(&PeriodicFn::from_fn(m, f64::cos), |a, b| (a - b).abs())
        .max();
    println!("d/dθ (2 + sin θ) vs cos θ: max error {err:.2e}");

    let inv = k.reciprocal().unwrap();
    let (mean, anti) = inv.mean_and_antiderivative();
    println!("mean of 1/(2 + sin θ) = {mean:.15} (2π/√3 / 2π = {:.15})", 1.0 / 3f64.sqrt());
    println!("zero-mean antiderivative at θ = 1.234: {:.12}", anti.eval(1.234));

    let f = PeriodicFn::from_fourier(m, &[0.5, 0.0, 1.0, 0.25]);
    let t: f64 = 0.7;
    println!(
        "interpolant of 0.5 + sin θ + 0.25 cos 2θ at θ = {t}: {:.15} (exact {:.15})",
        f.eval(t),
        0.5 + t.sin() + 0.25 * (2.0 * t).cos()
    );
    println!("tail energy of a resolved function: {:.2e}", f.tail_energy());
}
