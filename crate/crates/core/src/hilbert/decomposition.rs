use std::collections::HashSet;

use super::operator::{check_dims, Operator};
use super::projector::Projector;
use super::TOL_PROJ;
use crate::error::{Error, Result};

/// Outcome of checking a candidate decomposition of the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionReport {
    pub valid: bool,
    /// `‖Σ P − I‖_F`
    pub completeness_defect: f64,
    /// `max ‖P_a P_b‖_F` over distinct members
    pub max_overlap: f64,
    pub duplicate_labels: Vec<String>,
}

/// Validates completeness, orthogonality and label uniqueness.
pub fn validate_decomposition(members: &[(String, Projector)]) -> Result<DecompositionReport> {
    let first = members.first().ok_or(Error::Empty("decomposition"))?;
    let dim = first.1.dim();
    let mut sum = Operator::zeros(dim);
    for (_, p) in members {
        check_dims(dim, p.dim())?;
        sum = &sum + p.operator();
    }
    let completeness_defect = sum.distance(&Operator::identity(dim));
    let mut max_overlap: f64 = 0.0;
    for (i, (_, a)) in members.iter().enumerate() {
        for (_, b) in &members[i + 1..] {
            max_overlap = max_overlap.max((a.operator() * b.operator()).frobenius_norm());
        }
    }
    let mut seen = HashSet::new();
    let duplicate_labels: Vec<String> = members
        .iter()
        .filter(|(l, _)| !seen.insert(l.as_str()))
        .map(|(l, _)| l.clone())
        .collect();
    Ok(DecompositionReport {
        valid: completeness_defect < TOL_PROJ && max_overlap < TOL_PROJ && duplicate_labels.is_empty(),
        completeness_defect,
        max_overlap,
        duplicate_labels,
    })
}

/// Labelled projectors summing to the identity, pairwise orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionOfIdentity {
    members: Vec<(String, Projector)>,
}

impl DecompositionOfIdentity {
    pub fn new(members: Vec<(String, Projector)>) -> Result<Self> {
        let report = validate_decomposition(&members)?;
        if let Some(l) = report.duplicate_labels.first() {
            return Err(Error::DuplicateLabel(l.clone()));
        }
        if !report.valid {
            return Err(Error::InvalidDecomposition {
                completeness: report.completeness_defect,
                overlap: report.max_overlap,
            });
        }
        Ok(Self { members })
    }

    pub fn from_labelled<S: Into<String>>(members: Vec<(S, Projector)>) -> Result<Self> {
        Self::new(members.into_iter().map(|(l, p)| (l.into(), p)).collect())
    }

    /// `{I}` labelled `I`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            members: vec![("I".to_string(), Projector::identity(dim))],
        }
    }

    /// The given members plus their complement `rest`, when nonzero.
    pub fn with_rest<S: Into<String>>(members: Vec<(S, Projector)>, rest: &str) -> Result<Self> {
        let mut members: Vec<(String, Projector)> =
            members.into_iter().map(|(l, p)| (l.into(), p)).collect();
        let first = members.first().ok_or(Error::Empty("decomposition"))?;
        let refs: Vec<&Projector> = members.iter().map(|(_, p)| p).collect();
        let sum = Projector::sum(&refs).map_err(|_| Error::InvalidDecomposition {
            completeness: f64::NAN,
            overlap: f64::NAN,
        })?;
        let dim = first.1.dim();
        if sum.rank() < dim {
            members.push((rest.to_string(), sum.complement()));
        }
        Self::new(members)
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    pub fn members(&self) -> &[(String, Projector)] {
        &self.members
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|(l, _)| l.as_str())
    }

    pub fn get(&self, label: &str) -> Option<&Projector> {
        self.members.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.members.iter().position(|(l, _)| l == label)
    }

    /// Same decomposition with every member conjugated by `u`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|(l, p)| Ok((l.clone(), p.conjugate_by(u)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members })
    }

    /// Same members with labels rewritten.
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        Self::new(self.members.iter().map(|(l, p)| (f(l), p.clone())).collect())
    }

    /// Member-wise equality of projectors within `tol`, labels ignored.
    pub fn same_projectors(&self, other: &DecompositionOfIdentity, tol: f64) -> bool {
        self.len() == other.len()
            && self.members.iter().all(|(_, p)| {
                other
                    .members
                    .iter()
                    .any(|(_, q)| p.operator().approx_eq(q.operator(), tol))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Ket;

    fn proj(v: &[f64]) -> Projector {
        Projector::from_ket(&Ket::from_real(v).unwrap()).unwrap()
    }

    #[test]
    fn report_cases() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zp = proj(&[1.0, 0.0]);
        let zm = proj(&[0.0, 1.0]);
        let xm = proj(&[s, -s]);
        let ok = validate_decomposition(&[("z+".into(), zp.clone()), ("z-".into(), zm)]).unwrap();
        assert!(ok.valid);
        let bad = validate_decomposition(&[("z+".into(), zp.clone()), ("x-".into(), xm.clone())]).unwrap();
        assert!(!bad.valid);
        // z+ + x- = [[1.5, -0.5], [-0.5, 0.5]]; minus I gives entries 0.5, -0.5, -0.5, -0.5
        let direct = (&(zp.operator() + xm.operator()) - &Operator::identity(2)).frobenius_norm();
        assert!((bad.completeness_defect - direct).abs() < 1e-15);
        assert!(bad.completeness_defect > 0.5);
        assert!(validate_decomposition(&[("I".into(), Projector::identity(2))]).unwrap().valid);
        let dup = validate_decomposition(&[("a".into(), zp.clone()), ("a".into(), zp.complement())]).unwrap();
        assert_eq!(dup.duplicate_labels, vec!["a".to_string()]);
        assert!(DecompositionOfIdentity::new(vec![("a".into(), zp.clone()), ("a".into(), zp.complement())]).is_err());
    }

    #[test]
    fn splitting_a_member_stays_valid() {
        let p = |i| Projector::from_ket(&Ket::basis(3, i)).unwrap();
        let coarse = DecompositionOfIdentity::from_labelled(vec![
            ("a", p(0)),
            ("b", Projector::sum(&[&p(1), &p(2)]).unwrap()),
        ])
        .unwrap();
        assert_eq!(coarse.len(), 2);
        let fine = DecompositionOfIdentity::from_labelled(vec![("a", p(0)), ("b1", p(1)), ("b2", p(2))]);
        assert!(fine.is_ok());
    }

    #[test]
    fn rest_member_is_complement() {
        let d = DecompositionOfIdentity::with_rest(vec![("e0", Projector::from_ket(&Ket::basis(3, 0)).unwrap())], "rest").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.get("rest").unwrap().rank(), 2);
        let full = DecompositionOfIdentity::with_rest(vec![("I", Projector::identity(2))], "rest").unwrap();
        assert_eq!(full.len(), 1);
    }
}
