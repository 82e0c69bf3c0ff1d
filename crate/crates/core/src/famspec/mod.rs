//! A line-oriented text format for spaces, kets, unitaries, projectors,
//! time grids and families.
//!
//! ```text
//! space S dim 2
//! ket up in S = [1, 0]
//! proj Up on S = span(up)
//! proj Down on S = [[0 0] [0 1]]
//! decomp Z on S = {Up, Down}
//! times T = [0, 1]
//! family F times T initial up { at 1: Z } steps { identity }
//! ```
//!
//! Beyond the core statements the format accepts `density NAME on S =
//! matrix` (usable as `initial`), `sparse { i j value … }` in place of a
//! dense matrix, and `PROJ as LABEL` inside a decomposition to give a member
//! a label different from its projector's name. Family time labels are
//! `t0, t1, …` by position in the grid.

mod export;
mod lexer;
mod parser;
mod semantic;
mod serialize;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use export::export;
pub use semantic::Model;
pub use serialize::serialize;

use crate::dynamics::PropagatorSet;
use crate::error::{Error, Result};
use crate::histories::Family;
use crate::hilbert::ComplexScalar;

/// Largest accepted space dimension.
pub const MAX_DIM: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl ParseDiagnostic {
    pub(crate) fn error(message: impl Into<String>, pos: Pos) -> Self {
        Self {
            severity: Severity::Error,
            message: message.into(),
            line: pos.line,
            column: pos.column,
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: error: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseDiagnostic {}

#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    /// Row-major rows.
    Dense(Vec<Vec<ComplexScalar>>),
    /// `(row, column, value)`; unlisted entries are zero.
    Sparse(Vec<(usize, usize, ComplexScalar)>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProjDef {
    Span(Vec<String>),
    Matrix(Matrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub proj: String,
    pub label: Option<String>,
}

impl Member {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.proj)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SlotSpec {
    Decomp(String),
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Space {
        name: String,
        dim: usize,
    },
    Ket {
        name: String,
        space: String,
        amps: Vec<ComplexScalar>,
    },
    Unitary {
        name: String,
        space: String,
        matrix: Matrix,
    },
    Density {
        name: String,
        space: String,
        matrix: Matrix,
    },
    Proj {
        name: String,
        space: String,
        def: ProjDef,
    },
    Decomp {
        name: String,
        space: String,
        members: Vec<Member>,
    },
    Times {
        name: String,
        values: Vec<f64>,
    },
    Family {
        name: String,
        times: String,
        initial: Option<String>,
        slots: Vec<(f64, SlotSpec, Pos)>,
        /// Unitary names, or `identity`.
        steps: Vec<String>,
    },
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Space { name, .. }
            | Decl::Ket { name, .. }
            | Decl::Unitary { name, .. }
            | Decl::Density { name, .. }
            | Decl::Proj { name, .. }
            | Decl::Decomp { name, .. }
            | Decl::Times { name, .. }
            | Decl::Family { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Located {
    pub pos: Pos,
    pub decl: Decl,
}

/// A validated document: its declarations and the objects they define.
#[derive(Clone, Debug)]
pub struct SpecDocument {
    decls: Vec<Located>,
    model: Model,
}

impl SpecDocument {
    /// Validates declarations and builds the objects they define.
    pub fn from_decls(decls: Vec<Located>) -> std::result::Result<Self, ParseDiagnostic> {
        let model = Model::build(&decls)?;
        Ok(Self { decls, model })
    }

    pub fn decls(&self) -> &[Located] {
        &self.decls
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn families(&self) -> &[Family] {
        &self.model.families
    }

    pub fn family(&self, name: &str) -> Result<&Family> {
        self.model
            .families
            .iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn propagators(&self, family: &str) -> Result<&Arc<PropagatorSet>> {
        Ok(self.family(family)?.propagators())
    }

    /// Same names and structure, numbers within `tol`.
    pub fn approx_eq(&self, other: &SpecDocument, tol: f64) -> bool {
        self.decls.len() == other.decls.len()
            && self
                .decls
                .iter()
                .zip(&other.decls)
                .all(|(a, b)| decl_approx_eq(&a.decl, &b.decl, tol))
    }
}

/// Parses and validates `text`, reporting the first problem found.
pub fn parse(text: &str) -> std::result::Result<SpecDocument, ParseDiagnostic> {
    SpecDocument::from_decls(parser::parse_decls(text)?)
}

fn close(a: ComplexScalar, b: ComplexScalar, tol: f64) -> bool {
    (a - b).norm() <= tol
}

fn dense(m: &Matrix, dim: usize) -> Vec<Vec<ComplexScalar>> {
    match m {
        Matrix::Dense(rows) => rows.clone(),
        Matrix::Sparse(entries) => {
            let mut rows = vec![vec![ComplexScalar::new(0.0, 0.0); dim]; dim];
            for &(i, j, z) in entries {
                if i < dim && j < dim {
                    rows[i][j] += z;
                }
            }
            rows
        }
    }
}

fn matrix_dim(m: &Matrix) -> usize {
    match m {
        Matrix::Dense(rows) => rows.len(),
        Matrix::Sparse(e) => e.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0),
    }
}

fn matrix_approx_eq(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    let n = matrix_dim(a).max(matrix_dim(b));
    let (da, db) = (dense(a, n), dense(b, n));
    let zero = ComplexScalar::new(0.0, 0.0);
    (0..n).all(|i| {
        (0..n).all(|j| {
            let x = da.get(i).and_then(|r| r.get(j)).copied().unwrap_or(zero);
            let y = db.get(i).and_then(|r| r.get(j)).copied().unwrap_or(zero);
            close(x, y, tol)
        })
    })
}

fn decl_approx_eq(a: &Decl, b: &Decl, tol: f64) -> bool {
    use Decl::*;
    match (a, b) {
        (Ket { name, space, amps }, Ket { name: n2, space: s2, amps: a2 }) => {
            name == n2 && space == s2 && amps.len() == a2.len() && amps.iter().zip(a2).all(|(x, y)| close(*x, *y, tol))
        }
        (Unitary { name, space, matrix }, Unitary { name: n2, space: s2, matrix: m2 })
        | (Density { name, space, matrix }, Density { name: n2, space: s2, matrix: m2 }) => {
            name == n2 && space == s2 && matrix_approx_eq(matrix, m2, tol)
        }
        (Proj { name, space, def }, Proj { name: n2, space: s2, def: d2 }) => {
            name == n2
                && space == s2
                && match (def, d2) {
                    (ProjDef::Span(x), ProjDef::Span(y)) => x == y,
                    (ProjDef::Matrix(x), ProjDef::Matrix(y)) => matrix_approx_eq(x, y, tol),
                    _ => false,
                }
        }
        (Times { name, values }, Times { name: n2, values: v2 }) => {
            name == n2 && values.len() == v2.len() && values.iter().zip(v2).all(|(x, y)| (x - y).abs() <= tol)
        }
        (
            Family { name, times, initial, slots, steps },
            Family { name: n2, times: t2, initial: i2, slots: sl2, steps: st2 },
        ) => {
            name == n2
                && times == t2
                && initial == i2
                && steps == st2
                && slots.len() == sl2.len()
                && slots.iter().zip(sl2).all(|(x, y)| (x.0 - y.0).abs() <= tol && x.1 == y.1)
        }
        (a, b) => a == b,
    }
}

#[cfg(test)]
mod tests;
