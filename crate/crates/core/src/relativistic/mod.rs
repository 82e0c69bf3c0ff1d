//! 1+1 Minkowski geometry, spacelike foliations, tagged spacetime events
//! and the checks relating them to the Hilbert-space description.

mod checks;
mod events;
mod foliation;
mod geometry;

pub use checks::{
    commutation_check, covariance_check, Commutation, CovarianceMap, CovarianceReport, FamilyCovariance,
    FrameResidual, TOL_COVARIANCE, TOL_WEIGHT,
};
pub use events::{
    causal_precedence, embed_events, Embedding, Locality, PrecedenceGraph, ProjectorRef, Region, TaggedEvent,
};
pub use foliation::{validate_foliation, Foliation, FoliationReport, OrderingViolation, SlopeViolation};
pub use geometry::{boost, classify_interval, Hypersurface, IntervalKind, SpacetimePoint, LIGHTLIKE_BAND};
