//! Consistent-histories engine: finite-dimensional Hilbert-space algebra,
//! unitary dynamics, families of histories with their consistency and
//! probabilities, compatibility of frameworks, 1+1 relativistic geometry
//! of events, the worked scenarios, a text format for models and the
//! command-line front end.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod famspec;
pub mod framework;
pub mod histories;
pub mod hilbert;
pub mod relativistic;
pub mod scenarios;

pub use error::{Error, Result};
