use thiserror::Error;

pub type Result<T> = std::result::Result<T, BkError>;

/// Failures surfaced by the solvers. Every variant names the precondition
/// that was violated so callers can report it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BkError {
    #[error("number of columns must be even, got N={0}")]
    OddColumns(usize),
    #[error("number of rows must be even for this quantity, got M={0}")]
    OddRows(usize),
    #[error("lattice dimensions must be positive, got M={m}, N={n}")]
    EmptyLattice { m: usize, n: usize },
    #[error("enumeration over {spins} spins exceeds the cap of {cap}")]
    EnumerationCap { spins: usize, cap: usize },
    #[error("transfer matrix over 2^{n} ring states exceeds the cap of 2^{cap}")]
    StateCap { n: usize, cap: usize },
    #[error("configuration has {got} bits, lattice needs {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("free-energy integrand is not positive at (x, y) = ({x}, {y}): {value}")]
    NonPositiveIntegrand { x: f64, y: f64, value: f64 },
    #[error("degenerate polynomial: {0}")]
    Degenerate(String),
}
