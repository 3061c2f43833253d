//! Finite, truncated simplicial filters and lifting-property reformulations
//! of classification-theoretic dividing lines, with brute-force oracles.

pub mod error;
pub mod filters;
pub mod simplex;
pub mod homlift;
pub mod fostruct;
pub mod indisc;
pub mod stone;
pub mod dividing_lines;
pub mod geometry;
pub mod ramsey;
pub mod cli;

pub use error::{Error, Guard, Result};
