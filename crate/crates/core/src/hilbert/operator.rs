use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar field of every Hilbert space in the engine.
pub type ComplexScalar = Complex64;

pub(crate) const ZERO: ComplexScalar = Complex64::new(0.0, 0.0);
pub(crate) const ONE: ComplexScalar = Complex64::new(1.0, 0.0);

/// Shorthand for a real scalar.
pub fn re(x: f64) -> ComplexScalar {
    Complex64::new(x, 0.0)
}

/// A vector in a finite-dimensional Hilbert space, optionally named.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: DVector<ComplexScalar>,
    label: Option<String>,
}

impl Ket {
    pub fn new(amplitudes: Vec<ComplexScalar>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty("ket amplitudes"));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("ket"));
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
            label: None,
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| re(x)).collect())
    }

    /// The `index`-th standard basis vector.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Self {
            amplitudes: v,
            label: None,
        }
    }

    pub(crate) fn from_vector(amplitudes: DVector<ComplexScalar>) -> Self {
        Self {
            amplitudes,
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[ComplexScalar] {
        self.amplitudes.as_slice()
    }

    pub(crate) fn vector(&self) -> &DVector<ComplexScalar> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroSpan);
        }
        Ok(Self {
            amplitudes: self.amplitudes.unscale(n),
            label: self.label.clone(),
        })
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Ket) -> Result<ComplexScalar> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in self.amplitudes.iter() {
            for b in other.amplitudes.iter() {
                out.push(a * b);
            }
        }
        Ket::from_vector(DVector::from_vec(out))
    }

    pub fn scale(&self, c: ComplexScalar) -> Ket {
        Ket::from_vector(self.amplitudes.scale(1.0).map(|z| z * c))
    }

    /// Linear combination `Σ cᵢ |kᵢ⟩`.
    pub fn combination(terms: &[(ComplexScalar, &Ket)]) -> Result<Ket> {
        let first = terms.first().ok_or(Error::Empty("linear combination"))?;
        let dim = first.1.dim();
        let mut acc = DVector::from_element(dim, ZERO);
        for (c, k) in terms {
            check_dims(dim, k.dim())?;
            acc += k.amplitudes.map(|z| z * c);
        }
        Ok(Ket::from_vector(acc))
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &Ket) -> Operator {
        Operator::from_matrix_unchecked(&self.amplitudes * other.amplitudes.adjoint())
    }
}

/// A dense complex square matrix.
///
/// Projectors, unitaries, Hamiltonians, chain operators and density operators
/// all share this representation.
#[derive(Clone, PartialEq)]
pub struct Operator {
    m: DMatrix<ComplexScalar>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator({}x{})", self.dim(), self.dim())?;
        if self.dim() <= 8 {
            write!(f, "{}", self.m)?;
        }
        Ok(())
    }
}

impl Operator {
    pub fn new(m: DMatrix<ComplexScalar>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty("operator"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<ComplexScalar>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { m }
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(rows: &[Vec<ComplexScalar>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<ComplexScalar>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| re(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::from_element(dim, dim, ZERO),
        }
    }

    /// Diagonal operator with the given entries.
    pub fn diagonal(entries: &[ComplexScalar]) -> Self {
        Self {
            m: DMatrix::from_diagonal(&DVector::from_column_slice(entries)),
        }
    }

    /// Permutation unitary sending basis vector `j` to basis vector `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidGeometry(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (j, &i) in perm.iter().enumerate() {
            m[(i, j)] = ONE;
        }
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<ComplexScalar> {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> ComplexScalar {
        self.m[(row, col)]
    }

    /// Row-major copy of the entries.
    pub fn rows(&self) -> Vec<Vec<ComplexScalar>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.m[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn trace(&self) -> ComplexScalar {
        self.m.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn scale(&self, c: ComplexScalar) -> Self {
        Self {
            m: self.m.map(|z| z * c),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        check_dims(self.dim(), other.dim())?;
        Ok(&(self * other) - &(other * self))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.m - self.m.adjoint()).norm()
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = &self.adjoint() * self;
        (prod.m - DMatrix::<ComplexScalar>::identity(self.dim(), self.dim())).norm()
    }

    pub fn distance(&self, other: &Operator) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.m - &other.m).norm()
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.distance(other) < tol
    }

    /// Kronecker product; entry `(i·d_b + k, j·d_b + l)` is `a[i,j]·b[k,l]`.
    pub fn tensor(&self, other: &Operator) -> Operator {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        check_dims(self.dim(), ket.dim())?;
        Ok(Ket::from_vector(self.apply_vector(ket.vector())))
    }

    pub(crate) fn apply_vector(&self, v: &DVector<ComplexScalar>) -> DVector<ComplexScalar> {
        match self.monomial() {
            Some(cols) => {
                let mut out = DVector::from_element(v.len(), ZERO);
                for (j, (i, u)) in cols.iter().enumerate() {
                    out[*i] = u * v[j];
                }
                out
            }
            None => &self.m * v,
        }
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Operator> {
        check_dims(self.dim(), u.dim())?;
        Ok(&(u * self) * &u.adjoint())
    }

    /// Diagonal entries when every off-diagonal entry is exactly zero.
    pub(crate) fn diagonal_entries(&self) -> Option<Vec<ComplexScalar>> {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                if i != j && self.m[(i, j)] != ZERO {
                    return None;
                }
            }
        }
        Some((0..n).map(|i| self.m[(i, i)]).collect())
    }

    /// Column structure of a monomial matrix (one nonzero per row and column):
    /// for each column `j` the row index and value of its single entry.
    pub(crate) fn monomial(&self) -> Option<Vec<(usize, ComplexScalar)>> {
        let n = self.dim();
        let mut cols = Vec::with_capacity(n);
        let mut row_used = vec![false; n];
        for j in 0..n {
            let mut found = None;
            for i in 0..n {
                let z = self.m[(i, j)];
                if z != ZERO {
                    if found.is_some() {
                        return None;
                    }
                    found = Some((i, z));
                }
            }
            let (i, z) = found?;
            if row_used[i] {
                return None;
            }
            row_used[i] = true;
            cols.push((i, z));
        }
        Some(cols)
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn left_monomial_mul(cols: &[(usize, ComplexScalar)], b: &DMatrix<ComplexScalar>) -> DMatrix<ComplexScalar> {
    // (U B)[σ(j), :] = u_j · B[j, :]
    let n = b.nrows();
    let mut out = DMatrix::from_element(n, b.ncols(), ZERO);
    for (j, (i, u)) in cols.iter().enumerate() {
        for k in 0..b.ncols() {
            out[(*i, k)] = u * b[(j, k)];
        }
    }
    out
}

fn right_monomial_mul(a: &DMatrix<ComplexScalar>, cols: &[(usize, ComplexScalar)]) -> DMatrix<ComplexScalar> {
    // (A U)[:, k] = u_k · A[:, σ(k)]
    let mut out = DMatrix::from_element(a.nrows(), a.ncols(), ZERO);
    for (k, (i, u)) in cols.iter().enumerate() {
        for r in 0..a.nrows() {
            out[(r, k)] = a[(r, *i)] * u;
        }
    }
    out
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        let m = if let Some(d) = self.diagonal_entries() {
            DMatrix::from_fn(rhs.dim(), rhs.dim(), |i, j| d[i] * rhs.m[(i, j)])
        } else if let Some(d) = rhs.diagonal_entries() {
            DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.m[(i, j)] * d[j])
        } else if let Some(cols) = self.monomial() {
            left_monomial_mul(&cols, &rhs.m)
        } else if let Some(cols) = rhs.monomial() {
            right_monomial_mul(&self.m, &cols)
        } else {
            &self.m * &rhs.m
        };
        Operator { m }
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { m: &self.m + &rhs.m }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { m: &self.m - &rhs.m }
    }
}

/// Product of a sequence of operators, left to right.
pub fn product<'a>(dim: usize, ops: impl IntoIterator<Item = &'a Operator>) -> Operator {
    ops.into_iter()
        .fold(Operator::identity(dim), |acc, op| &acc * op)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_fast_path_matches_dense() {
        let p = Operator::permutation(&[2, 0, 1]).unwrap();
        let a = Operator::from_rows(&[
            vec![re(1.0), Complex64::new(0.0, 2.0), re(3.0)],
            vec![re(4.0), re(5.0), Complex64::new(6.0, -1.0)],
            vec![re(7.0), re(8.0), re(9.0)],
        ])
        .unwrap();
        let d = Operator::diagonal(&[re(2.0), ZERO, Complex64::new(0.0, 1.0)]);
        assert!((&d * &a).approx_eq(&Operator { m: &d.m * &a.m }, 1e-15));
        assert!((&a * &d).approx_eq(&Operator { m: &a.m * &d.m }, 1e-15));
        let dense_left = Operator { m: &p.m * &a.m };
        let dense_right = Operator { m: &a.m * &p.m };
        assert!((&p * &a).approx_eq(&dense_left, 1e-15));
        assert!((&a * &p).approx_eq(&dense_right, 1e-15));
        let v = Ket::from_real(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.apply(&v).unwrap().amplitudes(), &[re(2.0), re(3.0), re(1.0)]);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(Operator::new(DMatrix::from_element(2, 3, ZERO)).is_err());
        assert!(Operator::from_real_rows(&[&[f64::NAN, 0.0], &[0.0, 1.0]]).is_err());
        assert!(Ket::from_real(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn permutation_rejects_repeats() {
        assert!(Operator::permutation(&[0, 0]).is_err());
        assert!(Operator::permutation(&[0, 2]).is_err());
    }
}
