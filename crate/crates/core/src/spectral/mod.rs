//! Spectrum of the linear part along the circle and small-divisor checks.

pub mod eigen;
pub mod resonance;

pub use eigen::{eigen_continuation, SpectralData, DEFAULT_SPECTRAL_TOL};
pub use resonance::{
    bruno_omega, check_nonresonance, default_tolerance, BrunoReport, NonresonanceReport,
    Relation, Violation, SMALL_DIVISOR,
};
