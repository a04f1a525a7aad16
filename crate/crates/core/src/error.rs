use thiserror::Error;

/// Errors raised by the numerical and symbolic routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("interval [{start}, {start}+{len}) out of bounds for {cells} cells")]
    Bounds { start: usize, len: usize, cells: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("value unbounded: {0}")]
    Unbounded(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64, last: Vec<f64> },
    #[error("truncation depth {depth} too small: tail ratio {tail:e} exceeds tolerance")]
    Depth { depth: usize, tail: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("weight spec parse error: {0}")]
    Parse(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("form error: {0}")]
    Form(String),
    #[error("declaration error: {0}")]
    Declaration(String),
    #[error("rule {rule} failed: {condition}")]
    Rule { rule: String, condition: String },
}

pub type Result<T> = std::result::Result<T, Error>;
