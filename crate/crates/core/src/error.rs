use std::fmt;

/// Errors raised by constructors, checkers and the file loaders.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("depth error: {0}")]
    Depth(String),
    #[error("resource guard: {what} = {value} exceeds bound {bound} (use --guard-override)")]
    Resource { what: String, value: usize, bound: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl fmt::Display) -> Self {
        Error::Domain(msg.to_string())
    }

    pub fn validation(msg: impl fmt::Display) -> Self {
        Error::Validation(msg.to_string())
    }

    pub fn precondition(msg: impl fmt::Display) -> Self {
        Error::Precondition(msg.to_string())
    }
}

/// Size limits for eager enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Guard {
    pub max_atoms: usize,
    pub max_depth: usize,
    pub max_carrier: usize,
    pub max_candidates: usize,
    pub overridden: bool,
}

impl Default for Guard {
    fn default() -> Self {
        Guard {
            max_atoms: 8,
            max_depth: 4,
            max_carrier: 1 << 16,
            max_candidates: 50_000_000,
            overridden: false,
        }
    }
}

impl Guard {
    pub fn overridden() -> Self {
        Guard { overridden: true, ..Guard::default() }
    }

    pub fn check(&self, what: &str, value: usize, bound: usize) -> Result<()> {
        if !self.overridden && value > bound {
            return Err(Error::Resource { what: what.to_string(), value, bound });
        }
        Ok(())
    }

    pub fn atoms(&self, n: usize) -> Result<()> {
        self.check("atoms", n, self.max_atoms)
    }

    pub fn depth(&self, n: usize) -> Result<()> {
        self.check("depth", n, self.max_depth)
    }

    pub fn carrier(&self, n: usize) -> Result<()> {
        self.check("carrier size", n, self.max_carrier)
    }

    pub fn candidates(&self, n: usize) -> Result<()> {
        self.check("candidate count", n, self.max_candidates)
    }
}
