//! Problem documents: a TOML description of a structure with its settings.
//!
//! ```toml
//! n = 2
//! order = 4
//! grid = 64
//!
//! [tolerances]
//! jacobi = 1e-8
//!
//! [flags]
//! paper_literal_chi = true
//!
//! [brackets]
//! "theta,x1" = "x1"
//! "theta,x2" = "sqrt(2)*x2"
//! "x1,x2" = "3*x1*x2"
//!
//! # or, per monomial, Fourier lists [c0, a1, b1, a2, b2, …] or expressions
//! [brackets."theta,x1"]
//! "x1" = [1.0, 0.0, 0.5]
//! "x2^2" = "sin(3*theta)"
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::expr::{parse_expression, ExprContext};
use crate::error::{Error, Result};
use crate::normalize::{Config, Tolerances};
use crate::periodic::{check_grid, PeriodicFn};
use crate::poisson::PoissonStructure;
use crate::series::FormalSeries;

pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_GRID: usize = 64;

/// Coefficients that differ from the negated transpose by more than this are
/// a skew violation.
const SKEW_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub jacobi: Option<f64>,
    pub vanishing: Option<f64>,
    pub structural: Option<f64>,
    pub spectral: Option<f64>,
    pub resonance: Option<f64>,
    pub monomial: Option<f64>,
    pub constant: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    #[serde(default)]
    pub paper_literal_bruno: bool,
    #[serde(default)]
    pub paper_literal_chi: bool,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Coefficient {
    Number(f64),
    Fourier(Vec<f64>),
    Expression(String),
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum BracketSpec {
    Number(f64),
    Expression(String),
    /// Monomial expression → coefficient.
    Table(BTreeMap<String, Coefficient>),
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub n: usize,
    pub order: Option<usize>,
    pub grid: Option<usize>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default)]
    pub brackets: BTreeMap<String, BracketSpec>,
}

/// Command-line settings that take precedence over the document.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub order: Option<usize>,
    pub grid: Option<usize>,
    pub tol_jacobi: Option<f64>,
    pub tol_resonance: Option<f64>,
    pub paper_literal_bruno: bool,
    pub paper_literal_chi: bool,
}

/// A parsed document: the structure and the settings that go with it.
#[derive(Clone, Debug)]
pub struct Problem {
    pub structure: PoissonStructure,
    pub config: Config,
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Theta(usize),
    Pair(usize, usize),
}

fn parse_var(s: &str, n: usize) -> Result<Option<usize>> {
    let s = s.trim();
    if s == "theta" || s == "θ" {
        return Ok(None);
    }
    match s.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
        Some(i) if (1..=n).contains(&i) => Ok(Some(i - 1)),
        _ => Err(Error::Schema(format!("'{s}' is not theta or one of x1..x{n}"))),
    }
}

/// Parses `"theta,x1"`-style keys into a slot and the sign relating the key
/// to the stored orientation.
fn parse_key(key: &str, n: usize) -> Result<(Slot, f64)> {
    let parts: Vec<&str> = key.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Schema(format!("bracket key '{key}' must name two coordinates")));
    }
    match (parse_var(parts[0], n)?, parse_var(parts[1], n)?) {
        (None, None) => Err(Error::Schema(format!("bracket key '{key}' pairs theta with itself"))),
        (None, Some(i)) => Ok((Slot::Theta(i), 1.0)),
        (Some(i), None) => Ok((Slot::Theta(i), -1.0)),
        (Some(i), Some(j)) if i == j => Ok((Slot::Pair(i, i), 1.0)),
        (Some(i), Some(j)) if i < j => Ok((Slot::Pair(i, j), 1.0)),
        (Some(i), Some(j)) => Ok((Slot::Pair(j, i), -1.0)),
    }
}

fn coefficient(c: &Coefficient, ctx: ExprContext) -> Result<PeriodicFn> {
    let f = match c {
        Coefficient::Number(v) => PeriodicFn::constant(ctx.grid, *v),
        Coefficient::Fourier(list) => PeriodicFn::from_fourier(ctx.grid, list),
        Coefficient::Expression(e) => {
            let s = parse_expression(e, ctx)?;
            if s.terms().any(|(p, _)| p.degree() > 0) {
                return Err(Error::Schema(format!("coefficient '{e}' depends on x")));
            }
            s.constant_term()
        }
    };
    if let Some(k) = f.samples().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(k));
    }
    Ok(f)
}

fn bracket(spec: &BracketSpec, ctx: ExprContext) -> Result<FormalSeries> {
    match spec {
        BracketSpec::Number(v) => parse_expression(&v.to_string(), ctx),
        BracketSpec::Expression(e) => parse_expression(e, ctx),
        BracketSpec::Table(t) => {
            let mut acc = FormalSeries::zero(ctx.nvars, ctx.order, ctx.grid);
            for (mono, c) in t {
                let m = parse_expression(mono, ctx)?;
                acc = acc.try_add(&m.mul_fn(&coefficient(c, ctx)?))?;
            }
            Ok(acc)
        }
    }
}

impl ProblemSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema(e.message().to_string()))
    }

    pub fn tolerances(&self, ov: &Overrides) -> Tolerances {
        let d = Tolerances::default();
        let t = &self.tolerances;
        Tolerances {
            jacobi: ov.tol_jacobi.or(t.jacobi).unwrap_or(d.jacobi),
            vanishing: t.vanishing.unwrap_or(d.vanishing),
            structural: t.structural.unwrap_or(d.structural),
            spectral: t.spectral.unwrap_or(d.spectral),
            resonance: ov.tol_resonance.or(t.resonance).or(d.resonance),
            monomial: t.monomial.unwrap_or(d.monomial),
            constant: t.constant.unwrap_or(d.constant),
        }
    }

    /// Evaluates the brackets on the grid and validates the result.
    pub fn build(&self, ov: &Overrides) -> Result<Problem> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Schema("n must be at least 1".into()));
        }
        let ctx = ExprContext {
            nvars: n,
            order: ov.order.or(self.order).unwrap_or(DEFAULT_ORDER),
            grid: ov.grid.or(self.grid).unwrap_or(DEFAULT_GRID),
        };
        if ctx.order < 1 {
            return Err(Error::Schema("order must be at least 1".into()));
        }
        check_grid(ctx.grid)?;
        let tol = self.tolerances(ov);

        let mut slots: BTreeMap<Slot, (String, FormalSeries)> = BTreeMap::new();
        for (key, spec) in &self.brackets {
            let (slot, sign) = parse_key(key, n)?;
            let value = bracket(spec, ctx)?.scale(sign);
            if let Slot::Pair(i, j) = slot {
                if i == j && value.max_coeff() > SKEW_TOL {
                    return Err(Error::SkewViolation(format!("{{x{},x{}}} must vanish", i + 1, j + 1)));
                }
            }
            if let Some((other, prev)) = slots.get(&slot) {
                let scale = prev.max_coeff().max(value.max_coeff()).max(1.0);
                if prev.max_deviation(&value) > SKEW_TOL * scale {
                    return Err(Error::SkewViolation(format!("'{key}' disagrees with '{other}'")));
                }
            } else {
                slots.insert(slot, (key.clone(), value));
            }
        }
        let zero = FormalSeries::zero(n, ctx.order, ctx.grid);
        let get = |s: Slot| slots.get(&s).map_or_else(|| zero.clone(), |(_, v)| v.clone());
        let theta = (0..n).map(|i| get(Slot::Theta(i))).collect();
        let structure = PoissonStructure::from_upper(theta, |i, j| get(Slot::Pair(i, j)))?;
        structure.check_vanishing_on_gamma(tol.vanishing)?;

        let flags = Flags {
            paper_literal_bruno: self.flags.paper_literal_bruno || ov.paper_literal_bruno,
            paper_literal_chi: self.flags.paper_literal_chi || ov.paper_literal_chi,
        };
        Ok(Problem {
            structure,
            config: Config {
                tol,
                paper_literal_chi: flags.paper_literal_chi,
            },
            flags,
        })
    }
}

/// Parses a problem document into a validated structure.
pub fn parse_structure(text: &str, ov: &Overrides) -> Result<Problem> {
    ProblemSpec::from_toml(text)?.build(ov)
}
