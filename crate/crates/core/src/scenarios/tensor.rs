//! Small helpers for product spaces built from named factor bases.

use crate::error::Result;
use crate::hilbert::{DecompositionOfIdentity, Ket, Operator, Projector};

pub(crate) const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Named orthonormal basis of one tensor factor.
pub(crate) struct Factor {
    pub names: Vec<&'static str>,
}

impl Factor {
    pub fn new(names: &[&'static str]) -> Self {
        Self {
            names: names.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn ket(&self, name: &str) -> Ket {
        let i = self
            .names
            .iter()
            .position(|n| *n == name)
            .unwrap_or_else(|| panic!("no basis state `{name}`"));
        Ket::basis(self.dim(), i)
    }
}

/// Product space with basis labels `a.b.c`.
pub(crate) struct Space {
    pub factors: Vec<Factor>,
}

impl Space {
    pub fn new(factors: Vec<Factor>) -> Self {
        Self { factors }
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out = vec![String::new()];
        for f in &self.factors {
            out = out
                .iter()
                .flat_map(|p| {
                    f.names.iter().map(move |n| {
                        if p.is_empty() {
                            n.to_string()
                        } else {
                            format!("{p}.{n}")
                        }
                    })
                })
                .collect();
        }
        out
    }

    /// Tensor product of one ket per factor.
    pub fn ket(&self, parts: &[Ket]) -> Ket {
        assert_eq!(parts.len(), self.factors.len());
        let mut k = parts[0].clone();
        for p in &parts[1..] {
            k = k.tensor(p);
        }
        k
    }

    /// Tensor product with identities on factors given as `None`.
    pub fn op(&self, parts: &[Option<&Operator>]) -> Operator {
        assert_eq!(parts.len(), self.factors.len());
        let mut acc: Option<Operator> = None;
        for (f, p) in self.factors.iter().zip(parts) {
            let o = p.cloned().unwrap_or_else(|| Operator::identity(f.dim()));
            acc = Some(match acc {
                None => o,
                Some(a) => a.tensor(&o),
            });
        }
        acc.expect("at least one factor")
    }

    pub fn proj(&self, parts: &[Option<&Projector>]) -> Projector {
        assert_eq!(parts.len(), self.factors.len());
        let mut acc: Option<Projector> = None;
        for (f, p) in self.factors.iter().zip(parts) {
            let o = p.cloned().unwrap_or_else(|| Projector::identity(f.dim()));
            acc = Some(match acc {
                None => o,
                Some(a) => a.tensor(&o),
            });
        }
        acc.expect("at least one factor")
    }
}

pub(crate) fn ket(amps: &[f64]) -> Ket {
    Ket::from_real(amps).expect("finite amplitudes")
}

pub(crate) fn proj(k: &Ket) -> Projector {
    Projector::from_ket(k).expect("nonzero ket")
}

/// Labelled members `a.b` of the product of two lists.
pub(crate) fn product(
    a: &[(String, Projector)],
    b: &[(String, Projector)],
) -> Vec<(String, Projector)> {
    a.iter()
        .flat_map(|(la, pa)| {
            b.iter()
                .map(move |(lb, pb)| (format!("{la}.{lb}"), pa.operator() * pb.operator()))
        })
        .map(|(l, op)| (l, Projector::new(op).expect("commuting projectors multiply to a projector")))
        .collect()
}

pub(crate) fn decomp(members: Vec<(String, Projector)>) -> Result<DecompositionOfIdentity> {
    DecompositionOfIdentity::new(members)
}

pub(crate) fn with_rest(members: Vec<(String, Projector)>) -> Result<DecompositionOfIdentity> {
    DecompositionOfIdentity::with_rest(members, "rest")
}

/// `{P, not-P}`.
pub(crate) fn binary(label: &str, p: Projector) -> Result<DecompositionOfIdentity> {
    with_rest(vec![(label.to_string(), p.clone())]).and_then(|d| {
        d.relabel(|l| {
            if l == "rest" {
                crate::histories::complement_label(label)
            } else {
                l.to_string()
            }
        })
    })
}

/// Swap of basis states `i` and `j` of a `dim`-level system.
pub(crate) fn swap(dim: usize, i: usize, j: usize) -> Operator {
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.swap(i, j);
    Operator::permutation(&perm).expect("swap is a permutation")
}

/// `Σ_k P_k ⊗ V_k`, a controlled unitary, unitary whenever the `P_k`
/// decompose the identity and each `V_k` is unitary.
pub(crate) fn controlled(branches: &[(Operator, Operator)]) -> Operator {
    let mut acc: Option<Operator> = None;
    for (p, v) in branches {
        let t = p.tensor(v);
        acc = Some(match acc {
            None => t,
            Some(a) => &a + &t,
        });
    }
    acc.expect("at least one branch")
}
