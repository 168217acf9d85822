use thiserror::Error;

/// Errors surfaced by the map, Moore-equation and energy machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A physical-validity constraint on the inputs fails; the message names
    /// the violated inequality.
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    /// A guarded root solve ran out of its iteration budget. Unreachable for
    /// valid trajectories (|a'| < 1 makes the solves globally convergent) but
    /// reported rather than panicking.
    #[error("{context}: root solve did not converge (best residual {residual:e})")]
    ConvergenceFailure { context: &'static str, residual: f64 },

    /// A Moore-solution query needed more inverse map steps than the budget.
    #[error("pullback budget of {limit} inverse iterations exceeded at t = {t}")]
    PullbackOverflow { t: f64, limit: usize },

    /// A field query outside the spacetime domain 0 <= x <= a(t).
    #[error("point (t = {t}, x = {x}) lies outside the cavity")]
    DomainError { t: f64, x: f64 },

    /// No phase-locked parameter value was found in the search bracket.
    #[error("no {p}/{q} locking found for alpha in [{lo}, {hi}]")]
    NotLocked { p: i64, q: i64, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
