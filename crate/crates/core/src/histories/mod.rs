//! Histories, families, chain operators and the probabilities they carry.
//!
//! The history Hilbert space is never built: histories are label tuples and
//! events are sets of them.

mod chain;
mod family;
mod queries;

pub use chain::{Analysis, ChainOperator, Route};
pub use family::{complement_label, Boundary, Family, FamilyBuilder, History, Slot};
pub use queries::{
    conditional_probability, consistency_check, event_probability, label_matches,
    predicate_probability, probabilities, probabilities_with, support, weights,
    ConsistencyMode, ConsistencyOptions, ConsistencyReport, Predicate, Violation, WeightTable,
    EPS_SUPPORT,
};
