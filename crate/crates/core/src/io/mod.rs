//! Problem documents, coefficient expressions and report output.

pub mod document;
pub mod expr;
pub mod report;

pub use document::{
    parse_structure, BracketSpec, Coefficient, Flags, Overrides, Problem, ProblemSpec, ToleranceSpec,
};
pub use expr::{parse_expression, ExprContext};
