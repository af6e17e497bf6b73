//! Numerical cross-checks: an adaptive Dormand–Prince integrator with event
//! location, and the flows used to test periods, holonomy and tangency.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::canonical::{FoliationReport, HolonomyCase};
use super::leaves::Leaf;
use crate::error::{Error, Result};
use crate::invariants::modular_field;
use crate::poisson::{PoissonStructure, StructureEvaluator};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Debug)]
pub struct Integrator {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            h_min: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

impl Integrator {
    /// One Dormand–Prince step; returns the fifth-order solution and the
    /// error estimate.
    fn step<F: Fn(f64, &[f64], &mut [f64])>(&self, f: &F, t: f64, y: &[f64], h: f64) -> (Vec<f64>, f64) {
        let n = y.len();
        let mut k = vec![vec![0.0; n]; 7];
        let mut tmp = vec![0.0; n];
        for s in 0..7 {
            for i in 0..n {
                tmp[i] = y[i] + h * (0..s).map(|r| A[s][r] * k[r][i]).sum::<f64>();
            }
            let mut out = vec![0.0; n];
            f(t + C[s] * h, &tmp, &mut out);
            k[s] = out;
        }
        let y5: Vec<f64> = (0..n)
            .map(|i| y[i] + h * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>())
            .collect();
        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = h * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>();
            let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / sc).abs());
        }
        (y5, err)
    }

    /// Integrates until the event function `g` first crosses zero upward, or
    /// until `t_max` when `g` is `None`. Returns the final time and state.
    fn run<F, G>(&self, f: &F, t0: f64, y0: &[f64], t_max: f64, g: Option<&G>) -> Result<(f64, Vec<f64>)>
    where
        F: Fn(f64, &[f64], &mut [f64]),
        G: Fn(f64, &[f64]) -> f64,
    {
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut h = ((t_max - t0) / 100.0).max(self.h_min);
        let mut g_prev = g.map(|g| g(t, &y));
        for _ in 0..self.max_steps {
            if g.is_none() && t_max - t <= 0.0 {
                return Ok((t, y));
            }
            if g.is_none() {
                h = h.min(t_max - t);
            }
            let (y_new, err) = self.step(f, t, &y, h);
            if !err.is_finite() {
                return Err(Error::IntegrationFailure(format!("non-finite state at t = {t}")));
            }
            if err <= 1.0 {
                let t_new = t + h;
                if let (Some(g), Some(gp)) = (g, g_prev) {
                    let g_new = g(t_new, &y_new);
                    if gp < 0.0 && g_new >= 0.0 {
                        return Ok(self.bisect(f, g, t, &y, h));
                    }
                    g_prev = Some(g_new);
                }
                t = t_new;
                y = y_new;
                if g.is_some() && t > t_max {
                    return Err(Error::IntegrationFailure(format!("no event before t = {t_max}")));
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
            if h < self.h_min {
                return Err(Error::IntegrationFailure(format!("step size underflow at t = {t}")));
            }
        }
        Err(Error::IntegrationFailure("step budget exhausted".into()))
    }

    /// Locates the crossing inside `[t, t + h]` by bisecting the step length.
    fn bisect<F, G>(&self, f: &F, g: &G, t: f64, y: &[f64], h: f64) -> (f64, Vec<f64>)
    where
        F: Fn(f64, &[f64], &mut [f64]),
        G: Fn(f64, &[f64]) -> f64,
    {
        let (mut lo, mut hi) = (0.0, h);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (ym, _) = self.step(f, t, y, mid);
            if g(t + mid, &ym) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (yh, _) = self.step(f, t, y, hi);
        (t + hi, yh)
    }

    pub fn integrate<F: Fn(f64, &[f64], &mut [f64])>(&self, f: F, t0: f64, y0: &[f64], t1: f64) -> Result<Vec<f64>> {
        let none: Option<&fn(f64, &[f64]) -> f64> = None;
        self.run(&f, t0, y0, t1, none).map(|(_, y)| y)
    }

    /// First time in `(t0, t_max]` at which `g` crosses zero from below.
    pub fn first_crossing<F, G>(&self, f: F, t0: f64, y0: &[f64], g: G, t_max: f64) -> Result<(f64, Vec<f64>)>
    where
        F: Fn(f64, &[f64], &mut [f64]),
        G: Fn(f64, &[f64]) -> f64,
    {
        self.run(&f, t0, y0, t_max, Some(&g))
    }
}

/// First-return time of the modular flow `θ̇ = Z^θ(θ, 0)` on the circle,
/// signed like `Z^θ`.
pub fn modular_period_ode(p: &PoissonStructure, integrator: &Integrator) -> Result<f64> {
    let z = modular_field(p)[0].constant_term().interpolant();
    let sign = z.eval(0.0).signum();
    if sign == 0.0 {
        return Err(Error::ZeroModularTrace { trace: 0.0 });
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let bound = 1e3 * two_pi / z.eval(0.0).abs().max(1e-12);
    let (t, _) = integrator.first_crossing(
        |_, y, out| out[0] = z.eval(y[0]),
        0.0,
        &[0.0],
        |_, y| sign * y[0] - two_pi,
        bound,
    )?;
    Ok(sign * t)
}

/// `ż = −Π(z)∇H` for `H = Σⱼ vⱼ ln xⱼ`, so that `ż` is the Hamiltonian
/// field `{H, ·}` in the coordinates `z = (θ, x)`.
fn log_hamiltonian_field<'a>(
    ev: &'a StructureEvaluator,
    v: &'a [f64],
) -> impl Fn(f64, &[f64], &mut [f64]) + 'a {
    move |_, z, out| {
        let pi = ev.matrix(z[0], &z[1..]);
        let n = v.len();
        for (a, o) in out.iter_mut().enumerate() {
            *o = -(0..n).map(|j| pi[(a, j + 1)] * v[j] / z[j + 1]).sum::<f64>();
        }
    }
}

/// Follows the leaf through `(0, x₀)` along the Hamiltonian of
/// `Σⱼ φ₂ⱼ ln xⱼ`, whose `θ`-speed is one, until `θ = 2π`.
pub fn holonomy_continuation(
    p: &PoissonStructure,
    report: &FoliationReport,
    x0: &[f64],
    integrator: &Integrator,
) -> Result<Vec<f64>> {
    if report.case != HolonomyCase::MuInImage {
        return Err(Error::IntegrationFailure("leaves without holonomy".into()));
    }
    if x0.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotInPositiveOrthant(x0.to_vec()));
    }
    let v: Vec<f64> = report.phi.row(1).iter().copied().collect();
    let ev = p.evaluator();
    let field = log_hamiltonian_field(&ev, &v);
    let mut z0 = vec![0.0];
    z0.extend_from_slice(x0);
    let two_pi = 2.0 * std::f64::consts::PI;
    let (_, z) = integrator.first_crossing(field, 0.0, &z0, |_, z| z[0] - two_pi, 1e3 * two_pi)?;
    Ok(z[1..].to_vec())
}

/// Numeric rank of the bracket matrix at `(θ, x)`.
pub fn numeric_rank(ev: &StructureEvaluator, theta: f64, x: &[f64], rel_tol: f64) -> usize {
    let sv = ev.matrix(theta, x).singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

#[derive(Clone, Debug, Serialize)]
pub struct TangencyReport {
    pub samples: usize,
    pub max_residual: f64,
    pub min_rank: usize,
    pub max_rank: usize,
}

/// Projects each leaf tangent onto the image of the bracket matrix and
/// reports the largest relative residual.
pub fn leaf_tangency(p: &PoissonStructure, leaf: &Leaf, params: &[Vec<f64>]) -> TangencyReport {
    let ev = p.evaluator();
    let r = leaf.dim();
    let mut max_residual: f64 = 0.0;
    let (mut min_rank, mut max_rank) = (usize::MAX, 0);
    for t in params {
        let (theta, x) = leaf.eval(t);
        let pi = ev.matrix(theta, &x);
        let rank = numeric_rank(&ev, theta, &x, 1e-9);
        min_rank = min_rank.min(rank);
        max_rank = max_rank.max(rank);
        let svd = pi.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let basis = DMatrix::from_columns(
            &order[..r].iter().map(|&k| u.column(k).into_owned()).collect::<Vec<_>>(),
        );
        for tau in leaf.tangents(t) {
            let tau = DVector::from_vec(tau);
            let proj = &basis * (basis.transpose() * &tau);
            let res = (&tau - proj).norm() / tau.norm().max(1e-300);
            max_residual = max_residual.max(res);
        }
    }
    TangencyReport {
        samples: params.len(),
        max_residual,
        min_rank: if params.is_empty() { 0 } else { min_rank },
        max_rank,
    }
}
