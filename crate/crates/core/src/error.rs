use thiserror::Error;

use crate::rat::Rat;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("search budget exceeded: {needed} free parameters over F_{p}, budget {budget}")]
    Budget { needed: usize, p: u32, budget: usize },

    /// A distance search ran out of budget after bracketing the answer.
    #[error("search budget exceeded while bracketing distance in [{lo}, {hi}]")]
    BudgetBracket { lo: Box<Rat>, hi: Box<Rat> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}
