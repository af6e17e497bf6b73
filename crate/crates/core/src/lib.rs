//! Poisson structures on `S¹×Rⁿ` that vanish on the circle `x = 0`.
//!
//! The brackets `{θ,xᵢ}` and `{xᵢ,x_j}` are truncated power series in `x`
//! whose coefficients are sampled periodic functions of `θ`. On top of that
//! representation the crate provides
//!
//! - the Jacobi identity check, pushforward along fibered diffeomorphisms and
//!   the linear part along the circle ([`poisson`]),
//! - eigenvalue continuation with eigenbundle monodromy, non-resonance
//!   checks and Bruno sums ([`spectral`]),
//! - reduction to the normal form `{θ,xᵢ} = μᵢxᵢ`, `{xᵢ,x_j} = a_ij xᵢx_j`
//!   ([`normalize`]),
//! - invariant records, the modular period and equivalence ([`invariants`]),
//! - the symplectic foliation on the positive orthant with its holonomy and
//!   numerical cross-checks ([`foliation`]),
//! - problem documents, reports and the command-line front end ([`io`],
//!   [`cli`]).
//!
//! ```
//! use semilocal_poisson::{normalize, transform, Config, PoissonStructure};
//! use semilocal_poisson::sampling;
//!
//! let mu = [1.0, 2f64.sqrt()];
//! let a = [0.0, 3.0, -3.0, 0.0];
//! let p0 = PoissonStructure::normal_form(&mu, &a, 3, 64).unwrap();
//! let phi = sampling::fibered_diffeo(&mut sampling::rng(1), 2, 3, 64, 0.2);
//! let p = transform(&p0, &phi).unwrap();
//!
//! let nf = normalize(&p, &Config::default()).unwrap();
//! assert!((nf.mu[1] - mu[1]).abs() < 1e-9);
//! assert!((nf.a_entry(0, 1) - 3.0).abs() < 1e-8);
//! ```

pub mod cli;
pub mod diffeo;
pub mod error;
pub mod foliation;
pub mod invariants;
pub mod io;
pub mod matrix;
pub mod normalize;
pub mod periodic;
pub mod perm;
pub mod poisson;
pub mod sampling;
pub mod series;
pub mod spectral;

pub use diffeo::{compose, CircleMap, FiberedDiffeo, FiberwiseMap};
pub use error::{Error, Result};
pub use foliation::{
    classify_holonomy, leaf_through, stratification, FoliationReport, HolonomyCase, Leaf,
};
pub use invariants::{equivalent, modular_field, modular_period, Equivalence, InvariantRecord};
pub use io::{parse_structure, Overrides, Problem, ProblemSpec};
pub use matrix::FnMatrix;
pub use normalize::{normalize, Config, NormalForm, Tolerances, Warning};
pub use periodic::PeriodicFn;
pub use poisson::{jacobiator, linear_part, transform, PoissonStructure};
pub use series::{FormalSeries, MultiIndex};
pub use spectral::{bruno_omega, check_nonresonance, eigen_continuation, SpectralData};
