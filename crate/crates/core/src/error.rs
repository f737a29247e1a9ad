//! Crate-wide error type.
//!
//! Three failure families matter to callers and each maps to a distinct CLI
//! exit code: malformed inputs (`Config`, `Distribution`, `Io`, `Json`),
//! parameter domain violations (`Param`, `SplitRejected`), and exhausted
//! enumeration budgets (`Budget`, `TimeBudget`).

use crate::storage::Violation;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The experiment description itself is unusable: missing sections,
    /// contradictory keys, or a bad environment override.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An argument is outside its documented domain (e.g. `alpha` not in the
    /// open interval (0,1), `rho <= 0`, alphabet size mismatch).
    #[error("invalid parameter: {0}")]
    Param(String),

    /// A probability table failed validation (negative entry, bad row
    /// length, or mass not summing to one within tolerance).
    #[error("invalid distribution: {0}")]
    Distribution(String),

    /// Split parameters rejected; carries every violated constraint so the
    /// caller can report all of them at once.
    #[error("split parameters rejected: {}", format_violations(.0))]
    SplitRejected(Vec<Violation>),

    /// An exhaustive computation would need more configurations than the
    /// budget allows. `required` is kept as a float because counts like
    /// `(|X|!)^cells` overflow integers long before they stop being useful
    /// in an error message.
    #[error("enumeration budget exceeded in {context}: needs {required:.4e} configurations, limit {limit}")]
    Budget {
        context: String,
        required: f64,
        limit: u64,
    },

    /// Wall-clock safety net for the exhaustive oracles.
    #[error("time budget exceeded in {context}: {elapsed:.1}s elapsed, limit {limit:.1}s")]
    TimeBudget {
        context: String,
        elapsed: f64,
        limit: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
