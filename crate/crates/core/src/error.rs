use alloc::string::String;
use core::fmt;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A point lies outside the domain of the requested evaluation.
    Domain { what: String },
    /// A grid parameter is unusable (odd subdivision count, too coarse, ...).
    Grid { what: String },
    /// The successive-approximation loop hit `max_iter` before reaching the
    /// requested tolerance. Carries the last recorded supremum change.
    Convergence { iterations: usize, last_delta: f64 },
    /// `max |G0|` exceeded the theoretical bound `M`; the problem constants
    /// are inconsistent with the data.
    InconsistentConstants { max_g0: f64, m: f64 },
    /// The compatibility correction system for the initial profile is
    /// singular.
    Compatibility { what: String },
    /// A simulation produced a non-finite value.
    BlowUp { t: f64 },
    /// An invalid simulation configuration.
    Config { what: String },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Domain { what } => write!(f, "domain error: {what}"),
            CoreError::Grid { what } => write!(f, "grid error: {what}"),
            CoreError::Convergence {
                iterations,
                last_delta,
            } => write!(
                f,
                "no convergence after {iterations} iterations (last sup|ΔG| = {last_delta:e})"
            ),
            CoreError::InconsistentConstants { max_g0, m } => write!(
                f,
                "max|G0| = {max_g0:e} exceeds M = {m:e}; constants inconsistent with data"
            ),
            CoreError::Compatibility { what } => write!(f, "compatibility error: {what}"),
            CoreError::BlowUp { t } => write!(f, "solution blew up at t = {t}"),
            CoreError::Config { what } => write!(f, "config error: {what}"),
        }
    }
}

impl core::error::Error for CoreError {}
