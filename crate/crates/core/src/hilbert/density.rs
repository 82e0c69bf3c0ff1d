use nalgebra::linalg::SymmetricEigen;

use super::operator::{re, Ket, Operator};
use super::{TOL_NORM, TOL_PROJ};
use crate::error::{Error, Result};

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        let h = op.hermiticity_defect();
        if h >= TOL_PROJ {
            return Err(Error::NotDensity(format!("hermiticity defect {h:.3e}")));
        }
        let tr = op.trace();
        if (tr - re(1.0)).norm() >= TOL_NORM {
            return Err(Error::NotDensity(format!("trace {tr}")));
        }
        let min = min_eigenvalue(&op);
        if min < -TOL_PROJ {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { op })
    }

    pub fn pure(ket: &Ket) -> Result<Self> {
        let k = ket.normalized()?;
        Ok(Self { op: k.outer(&k) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim).scale(re(1.0 / dim as f64)),
        }
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        Ok(Self {
            op: self.op.conjugate_by(u)?,
        })
    }
}

pub(crate) fn min_eigenvalue(op: &Operator) -> f64 {
    // symmetrize so tiny anti-Hermitian noise cannot upset the solver
    let m = (op.matrix() + op.matrix().adjoint()).unscale(2.0);
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}
