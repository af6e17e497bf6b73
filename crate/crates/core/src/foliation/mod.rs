//! Symplectic foliation of a normal form on the positive orthant: the
//! canonical form of `a`, the holonomy classification, explicit leaves and
//! numerical checks by integration.

pub mod canonical;
pub mod leaves;
pub mod ode;

pub use canonical::{
    block_form, classify_holonomy, skew_canonical, FoliationReport, HolonomyCase, SkewCanonical,
    DEFAULT_FOLIATION_TOL,
};
pub use leaves::{leaf_through, stratification, Leaf, Stratum};
pub use ode::{
    holonomy_continuation, leaf_tangency, modular_period_ode, numeric_rank, Integrator,
    TangencyReport,
};
