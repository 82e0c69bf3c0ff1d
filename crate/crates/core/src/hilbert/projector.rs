use nalgebra::DVector;

use super::operator::{check_dims, ComplexScalar, Ket, Operator, ZERO};
use super::{TOL_PROJ, TOL_SPAN, TOL_UNITARY};
use crate::error::{Error, Result};

/// Hermiticity and idempotency defects of a candidate projector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectorDiagnostics {
    pub is_projector: bool,
    pub hermiticity_defect: f64,
    pub idempotency_defect: f64,
}

/// Tests `P = P†` and `P = P²` in Frobenius norm.
pub fn is_projector(p: &Operator, tol: f64) -> ProjectorDiagnostics {
    let hermiticity_defect = p.hermiticity_defect();
    let idempotency_defect = p.distance(&(p * p));
    ProjectorDiagnostics {
        is_projector: hermiticity_defect < tol && idempotency_defect < tol,
        hermiticity_defect,
        idempotency_defect,
    }
}

/// An orthogonal projector with cached rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    op: Operator,
    rank: usize,
}

impl Projector {
    pub fn new(op: Operator) -> Result<Self> {
        let d = is_projector(&op, TOL_PROJ);
        if !d.is_projector {
            return Err(Error::NotProjector {
                hermiticity: d.hermiticity_defect,
                idempotency: d.idempotency_defect,
            });
        }
        let tr = op.trace().re;
        let rank = tr.round();
        if (tr - rank).abs() >= TOL_PROJ || rank < 0.0 {
            return Err(Error::NotProjector {
                hermiticity: d.hermiticity_defect,
                idempotency: (tr - rank).abs(),
            });
        }
        Ok(Self {
            op,
            rank: rank as usize,
        })
    }

    /// Projector onto the ray of a nonzero ket.
    pub fn from_ket(ket: &Ket) -> Result<Self> {
        let k = ket.normalized()?;
        Ok(Self {
            op: k.outer(&k),
            rank: 1,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim),
            rank: dim,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            op: Operator::zeros(dim),
            rank: 0,
        }
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// `I − P`.
    pub fn complement(&self) -> Self {
        Self {
            op: &Operator::identity(self.dim()) - &self.op,
            rank: self.dim() - self.rank,
        }
    }

    pub fn tensor(&self, other: &Projector) -> Self {
        Self {
            op: self.op.tensor(&other.op),
            rank: self.rank * other.rank,
        }
    }

    /// Embeds `P` as `P ⊗ I_d` (or `I_d ⊗ P` when `left` is false).
    pub fn extend(&self, d: usize, left: bool) -> Self {
        let id = Projector::identity(d);
        if left {
            self.tensor(&id)
        } else {
            id.tensor(self)
        }
    }

    /// Sum of mutually orthogonal projectors; validated.
    pub fn sum(parts: &[&Projector]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty("projector sum"))?;
        let mut acc = Operator::zeros(first.dim());
        for p in parts {
            check_dims(first.dim(), p.dim())?;
            acc = &acc + &p.op;
        }
        Projector::new(acc)
    }

    /// `U P U†`, again a projector of the same rank.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        Ok(Self {
            op: self.op.conjugate_by(u)?,
            rank: self.rank,
        })
    }

    pub(crate) fn from_parts_unchecked(op: Operator, rank: usize) -> Self {
        Self { op, rank }
    }

    pub fn commutes_with(&self, other: &Projector, tol: f64) -> Result<bool> {
        Ok(self.op.commutator(&other.op)?.frobenius_norm() < tol)
    }
}

/// Modified Gram–Schmidt; returns the orthonormal vectors that survive the
/// independence threshold, appended to `basis`.
fn gram_schmidt_into(
    basis: &mut Vec<DVector<ComplexScalar>>,
    candidates: impl IntoIterator<Item = DVector<ComplexScalar>>,
    tol: f64,
) {
    for mut v in candidates {
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let n = v.norm();
        if n > tol {
            basis.push(v.unscale(n));
        }
    }
}

/// Orthogonal projector onto the span of `kets`.
pub fn projector_onto_span(kets: &[Ket]) -> Result<Projector> {
    let first = kets.first().ok_or(Error::Empty("ket list"))?;
    let dim = first.dim();
    for k in kets {
        check_dims(dim, k.dim())?;
    }
    let scale = kets.iter().map(Ket::norm).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::ZeroSpan);
    }
    let mut basis = Vec::new();
    gram_schmidt_into(
        &mut basis,
        kets.iter().map(|k| k.vector().unscale(scale)),
        TOL_SPAN,
    );
    let mut op = Operator::zeros(dim);
    for b in &basis {
        op = &op + &Operator::from_matrix_unchecked(b * b.adjoint());
    }
    Ok(Projector::from_parts_unchecked(op, basis.len()))
}

/// Completes a partial isometry `|inᵢ⟩ ↦ |outᵢ⟩` to a unitary on the full space.
///
/// Standard basis vectors orthogonal to both the input and output spans are
/// left fixed; the remaining complements are paired in Gram–Schmidt order.
pub fn complete_unitary(dim: usize, pairs: &[(Ket, Ket)]) -> Result<Operator> {
    for (a, b) in pairs {
        check_dims(dim, a.dim())?;
        check_dims(dim, b.dim())?;
    }
    // inputs and outputs must both be orthonormal lists
    for (i, (a, b)) in pairs.iter().enumerate() {
        for (j, (c, d)) in pairs.iter().enumerate().skip(i) {
            let delta = if i == j { super::ONE } else { ZERO };
            let defect = (a.inner(c)? - delta).norm().max((b.inner(d)? - delta).norm());
            if defect > TOL_UNITARY {
                return Err(Error::NotUnitary {
                    defect,
                    threshold: TOL_UNITARY,
                });
            }
        }
    }
    let mut ins: Vec<DVector<ComplexScalar>> = Vec::new();
    let mut outs: Vec<DVector<ComplexScalar>> = Vec::new();
    gram_schmidt_into(&mut ins, pairs.iter().map(|p| p.0.vector().clone()), TOL_SPAN);
    gram_schmidt_into(&mut outs, pairs.iter().map(|p| p.1.vector().clone()), TOL_SPAN);
    let rank = ins.len();

    let mut u = nalgebra::DMatrix::from_element(dim, dim, ZERO);
    for (a, b) in pairs {
        u += b.vector() * a.vector().adjoint();
    }

    let basis = |k: usize| Ket::basis(dim, k).vector().clone();
    let touches = |span: &[DVector<ComplexScalar>], k: usize| {
        span.iter().any(|v| v[k].norm() > TOL_SPAN)
    };
    let fixed: Vec<usize> = (0..dim)
        .filter(|&k| !touches(&ins[..rank], k) && !touches(&outs, k))
        .collect();
    for &k in &fixed {
        u[(k, k)] += super::ONE;
    }
    let mut in_c = ins.clone();
    let mut out_c = outs.clone();
    for &k in &fixed {
        in_c.push(basis(k));
        out_c.push(basis(k));
    }
    let start_in = in_c.len();
    let start_out = out_c.len();
    gram_schmidt_into(&mut in_c, (0..dim).map(basis), TOL_SPAN.sqrt());
    gram_schmidt_into(&mut out_c, (0..dim).map(basis), TOL_SPAN.sqrt());
    if in_c.len() != dim || out_c.len() != dim {
        return Err(Error::ZeroSpan);
    }
    for (a, b) in in_c[start_in..].iter().zip(&out_c[start_out..]) {
        u += b * a.adjoint();
    }
    let op = Operator::new(u)?;
    let defect = op.unitarity_defect();
    if defect > TOL_UNITARY {
        return Err(Error::NotUnitary {
            defect,
            threshold: TOL_UNITARY,
        });
    }
    Ok(op)
}
