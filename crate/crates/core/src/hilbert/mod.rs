//! Dense complex operator algebra on finite-dimensional Hilbert spaces.

mod decomposition;
mod density;
mod operator;
mod projector;

pub use decomposition::{validate_decomposition, DecompositionOfIdentity, DecompositionReport};
pub use density::DensityOperator;
pub use operator::{product, re, ComplexScalar, Ket, Operator};
pub use projector::{
    complete_unitary, is_projector, projector_onto_span, Projector,
    ProjectorDiagnostics,
};

pub(crate) use operator::{check_dims, ONE, ZERO};

use crate::error::Result;

/// Hermiticity and idempotency threshold for projectors (Frobenius).
pub const TOL_PROJ: f64 = 1e-9;
/// Threshold for unit norm and unit trace.
pub const TOL_NORM: f64 = 1e-9;
/// Linear-independence threshold used in rank decisions.
pub const TOL_SPAN: f64 = 1e-10;
/// Unitarity threshold for propagator steps.
pub const TOL_UNITARY: f64 = 1e-9;

/// `Tr(A† B)`.
pub fn op_inner(a: &Operator, b: &Operator) -> Result<ComplexScalar> {
    check_dims(a.dim(), b.dim())?;
    // Tr(A†B) = Σ conj(a_ij) b_ij
    Ok(a.matrix().dotc(b.matrix()))
}

/// `Tr(ρ A† B)`.
pub fn rho_inner(rho: &DensityOperator, a: &Operator, b: &Operator) -> Result<ComplexScalar> {
    check_dims(rho.dim(), a.dim())?;
    check_dims(a.dim(), b.dim())?;
    let ab = &a.adjoint() * b;
    // Tr(ρ M) = Σ ρ_ij M_ji
    let r = rho.operator().matrix();
    let m = ab.matrix();
    let n = a.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += r[(i, j)] * m[(j, i)];
        }
    }
    Ok(acc)
}
