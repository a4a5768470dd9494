//! Exact linear-inequality systems: projection, redundancy removal, LP and inclusion.

mod fme;
mod lp;
mod rational;
mod redundancy;
mod system;

pub use fme::fm_eliminate;
pub use lp::{lp_maximize, LpOutcome};
pub use rational::{format_significant, lcm_of_denominators, ParseRationalError, Rational};
pub use redundancy::{is_equal, is_subset, remove_redundant};
pub use system::{LinearConstraint, LinearSystem};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("no value assigned to variable `{0}`")]
    MissingVariable(String),
    #[error("systems are over different variable sets")]
    VariableMismatch,
    #[error("malformed system JSON: {0}")]
    Json(String),
}
