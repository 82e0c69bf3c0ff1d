use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::dynamics::{PropagatorSet, TimeGrid};
use crate::error::{Error, Result};
use crate::hilbert::{
    check_dims, DecompositionOfIdentity, DensityOperator, Ket, Operator, Projector, TOL_NORM,
    TOL_PROJ,
};

use super::chain::Analysis;

/// One entry of a history: a decomposition member, or the identity at a
/// time carrying the trivial decomposition `{I}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Identity,
    Member(String),
}

impl Slot {
    pub fn label(&self) -> &str {
        match self {
            Slot::Identity => "I",
            Slot::Member(l) => l,
        }
    }
}

/// A history `Y^α`: one slot per grid time.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History {
    slots: Vec<Slot>,
    pub(crate) indices: Vec<usize>,
}

impl History {
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn labels(&self) -> Vec<&str> {
        self.slots.iter().map(Slot::label).collect()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, j: usize) -> &Slot {
        &self.slots[j]
    }

    pub fn reversed(&self) -> History {
        History {
            slots: self.slots.iter().rev().cloned().collect(),
            indices: self.indices.iter().rev().cloned().collect(),
        }
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.labels().join(" ⊙ "))
    }
}

/// Boundary condition of a family.
///
/// Final conditions arise from time reversal of initial ones.
#[derive(Clone, Debug, PartialEq)]
pub enum Boundary {
    None,
    InitialPure { label: String, ket: Ket },
    InitialDensity(DensityOperator),
    FinalPure { label: String, ket: Ket },
    FinalDensity(DensityOperator),
}

impl Boundary {
    pub fn is_none(&self) -> bool {
        matches!(self, Boundary::None)
    }

    pub fn reversed(&self) -> Boundary {
        match self.clone() {
            Boundary::None => Boundary::None,
            Boundary::InitialPure { label, ket } => Boundary::FinalPure { label, ket },
            Boundary::FinalPure { label, ket } => Boundary::InitialPure { label, ket },
            Boundary::InitialDensity(r) => Boundary::FinalDensity(r),
            Boundary::FinalDensity(r) => Boundary::InitialDensity(r),
        }
    }

    pub(crate) fn transformed(&self, first: &Operator, last: &Operator) -> Result<Boundary> {
        Ok(match self {
            Boundary::None => Boundary::None,
            Boundary::InitialPure { label, ket } => Boundary::InitialPure {
                label: label.clone(),
                ket: first.apply(ket)?,
            },
            Boundary::FinalPure { label, ket } => Boundary::FinalPure {
                label: label.clone(),
                ket: last.apply(ket)?,
            },
            Boundary::InitialDensity(r) => Boundary::InitialDensity(r.conjugate_by(first)?),
            Boundary::FinalDensity(r) => Boundary::FinalDensity(r.conjugate_by(last)?),
        })
    }

    /// Within `tol` in every numeric payload.
    pub fn approx_eq(&self, other: &Boundary, tol: f64) -> bool {
        let kets = |a: &Ket, b: &Ket| {
            a.dim() == b.dim()
                && a.amplitudes()
                    .iter()
                    .zip(b.amplitudes())
                    .all(|(x, y)| (x - y).norm() < tol)
        };
        match (self, other) {
            (Boundary::None, Boundary::None) => true,
            (Boundary::InitialPure { ket: a, .. }, Boundary::InitialPure { ket: b, .. })
            | (Boundary::FinalPure { ket: a, .. }, Boundary::FinalPure { ket: b, .. }) => kets(a, b),
            (Boundary::InitialDensity(a), Boundary::InitialDensity(b))
            | (Boundary::FinalDensity(a), Boundary::FinalDensity(b)) => {
                a.operator().approx_eq(b.operator(), tol)
            }
            _ => false,
        }
    }
}

/// Label given to the complement of a pure boundary state.
pub fn complement_label(label: &str) -> String {
    format!("not-{label}")
}

/// A family of histories: grid, one decomposition per time, boundary.
#[derive(Clone, Debug)]
pub struct Family {
    name: String,
    props: Arc<PropagatorSet>,
    decomps: Vec<DecompositionOfIdentity>,
    boundary: Boundary,
    pinned: Option<(usize, usize)>,
    reference: usize,
    analysis: OnceLock<Analysis>,
}

impl PartialEq for Family {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.props == other.props
            && self.decomps == other.decomps
            && self.boundary == other.boundary
            && self.reference == other.reference
    }
}

impl Family {
    pub fn new(
        name: impl Into<String>,
        props: Arc<PropagatorSet>,
        decomps: Vec<DecompositionOfIdentity>,
        boundary: Boundary,
    ) -> Result<Self> {
        let name = name.into();
        let n = props.grid().len();
        if decomps.len() != n {
            return Err(Error::InvalidFamily(format!(
                "{} decompositions for {} times",
                decomps.len(),
                n
            )));
        }
        for d in &decomps {
            check_dims(props.dim(), d.dim())?;
        }
        let pinned = match &boundary {
            Boundary::None => None,
            Boundary::InitialPure { ket, .. } => Some((0, pin(&decomps[0], ket)?)),
            Boundary::FinalPure { ket, .. } => Some((n - 1, pin(&decomps[n - 1], ket)?)),
            Boundary::InitialDensity(r) | Boundary::FinalDensity(r) => {
                check_dims(props.dim(), r.dim())?;
                None
            }
        };
        Ok(Self {
            name,
            props,
            decomps,
            boundary,
            pinned,
            reference: 0,
            analysis: OnceLock::new(),
        })
    }

    pub fn builder(name: impl Into<String>, props: Arc<PropagatorSet>) -> FamilyBuilder {
        FamilyBuilder {
            name: name.into(),
            props,
            slots: Vec::new(),
            boundary: Boundary::None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(&self, name: impl Into<String>) -> Family {
        let mut f = self.clone();
        f.name = name.into();
        f
    }

    pub fn propagators(&self) -> &Arc<PropagatorSet> {
        &self.props
    }

    pub fn grid(&self) -> &TimeGrid {
        self.props.grid()
    }

    pub fn dim(&self) -> usize {
        self.props.dim()
    }

    pub fn decompositions(&self) -> &[DecompositionOfIdentity] {
        &self.decomps
    }

    pub fn decomposition(&self, j: usize) -> &DecompositionOfIdentity {
        &self.decomps[j]
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    /// Slot and member index fixed by a pure boundary state.
    pub fn pinned(&self) -> Option<(usize, usize)> {
        self.pinned
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    /// Same family with another Heisenberg reference index.
    pub fn with_reference(&self, r: usize) -> Result<Family> {
        self.grid().check_index(r)?;
        let mut f = self.clone();
        f.reference = r;
        f.analysis = OnceLock::new();
        Ok(f)
    }

    pub(crate) fn analysis_cell(&self) -> &OnceLock<Analysis> {
        &self.analysis
    }

    /// Every history of the family, lexicographic in member order.
    pub fn histories(&self) -> Vec<History> {
        let mut out = Vec::new();
        let mut idx = Vec::with_capacity(self.decomps.len());
        self.enumerate(&mut idx, &mut out);
        out
    }

    fn enumerate(&self, idx: &mut Vec<usize>, out: &mut Vec<History>) {
        let j = idx.len();
        if j == self.decomps.len() {
            out.push(self.history_from_indices(idx.clone()));
            return;
        }
        for m in self.member_range(j) {
            idx.push(m);
            self.enumerate(idx, out);
            idx.pop();
        }
    }

    pub(crate) fn member_range(&self, j: usize) -> std::ops::Range<usize> {
        match self.pinned {
            Some((s, m)) if s == j => m..m + 1,
            _ => 0..self.decomps[j].len(),
        }
    }

    pub(crate) fn history_from_indices(&self, indices: Vec<usize>) -> History {
        let slots = indices
            .iter()
            .enumerate()
            .map(|(j, &m)| {
                let d = &self.decomps[j];
                if d.is_trivial() {
                    Slot::Identity
                } else {
                    Slot::Member(d.members()[m].0.clone())
                }
            })
            .collect();
        History { slots, indices }
    }

    /// Resolves a label tuple (`I` for trivial slots) into a history.
    pub fn history(&self, labels: &[&str]) -> Result<History> {
        if labels.len() != self.decomps.len() {
            return Err(Error::InvalidFamily(format!(
                "history of length {} for a grid of {} times",
                labels.len(),
                self.decomps.len()
            )));
        }
        let mut indices = Vec::with_capacity(labels.len());
        for (j, l) in labels.iter().enumerate() {
            let d = &self.decomps[j];
            let m = if d.is_trivial() && *l == "I" {
                0
            } else {
                d.index_of(l).ok_or_else(|| Error::UnknownLabel {
                    time: self.grid().label(j).to_string(),
                    label: l.to_string(),
                })?
            };
            if !self.member_range(j).contains(&m) {
                return Err(Error::InvalidFamily(format!(
                    "slot {} is fixed by the boundary state",
                    self.grid().label(j)
                )));
            }
            indices.push(m);
        }
        Ok(self.history_from_indices(indices))
    }

    pub(crate) fn check_history(&self, h: &History) -> Result<()> {
        if h.indices.len() != self.decomps.len() {
            return Err(Error::InvalidFamily("history length does not match grid".into()));
        }
        for (j, (&m, s)) in h.indices.iter().zip(&h.slots).enumerate() {
            let d = &self.decomps[j];
            let ok = m < d.len()
                && match s {
                    Slot::Identity => d.is_trivial(),
                    Slot::Member(l) => d.members()[m].0 == *l,
                };
            if !ok {
                return Err(Error::UnknownLabel {
                    time: self.grid().label(j).to_string(),
                    label: s.label().to_string(),
                });
            }
        }
        Ok(())
    }

    /// Projector of a history at slot `j` in the Schrödinger picture.
    pub(crate) fn projector(&self, j: usize, m: usize) -> &Projector {
        &self.decomps[j].members()[m].1
    }

    /// Family with reversed slot order, adjoint dynamics and the boundary
    /// moved to the other end; chain operators become adjoints.
    pub fn time_reverse(&self) -> Family {
        let n = self.decomps.len();
        let props = Arc::new(self.props.reversed());
        let decomps = self.decomps.iter().rev().cloned().collect();
        Family {
            name: self.name.clone(),
            props,
            decomps,
            boundary: self.boundary.reversed(),
            pinned: self.pinned.map(|(s, m)| (n - 1 - s, m)),
            reference: n - 1 - self.reference,
            analysis: OnceLock::new(),
        }
    }

    /// Replaces the dynamics, keeping decompositions and boundary.
    pub fn with_propagators(&self, props: Arc<PropagatorSet>) -> Result<Family> {
        let mut f = Family::new(self.name.clone(), props, self.decomps.clone(), self.boundary.clone())?;
        f.reference = self.reference.min(f.grid().len() - 1);
        Ok(f)
    }

    /// Family carried through per-time unitaries `L_j`: projectors become
    /// `L_j P L_j†` and the dynamics `L_j T_{jk} L_k†`.
    pub fn transformed(&self, maps: &[Operator], props: Arc<PropagatorSet>) -> Result<Family> {
        if maps.len() != self.decomps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.decomps.len(),
                found: maps.len(),
            });
        }
        let decomps = self
            .decomps
            .iter()
            .zip(maps)
            .map(|(d, l)| d.conjugate_by(l))
            .collect::<Result<Vec<_>>>()?;
        let boundary = self.boundary.transformed(&maps[0], &maps[maps.len() - 1])?;
        let mut f = Family::new(self.name.clone(), props, decomps, boundary)?;
        f.reference = self.reference;
        Ok(f)
    }
}

fn pin(d: &DecompositionOfIdentity, ket: &Ket) -> Result<usize> {
    let n = ket.norm();
    if (n - 1.0).abs() >= TOL_NORM {
        return Err(Error::InvalidFamily(format!("boundary state has norm {n}")));
    }
    let p = Projector::from_ket(ket)?;
    d.members()
        .iter()
        .position(|(_, q)| q.operator().approx_eq(p.operator(), TOL_PROJ))
        .ok_or_else(|| {
            Error::InvalidFamily("boundary slot does not contain the boundary state projector".into())
        })
}

/// Incremental construction of a [`Family`] by time label.
pub struct FamilyBuilder {
    name: String,
    props: Arc<PropagatorSet>,
    slots: Vec<(String, DecompositionOfIdentity)>,
    boundary: Boundary,
}

impl FamilyBuilder {
    /// Pure initial state fixing the first slot to `{Ψ, I − Ψ}`.
    pub fn initial_pure(mut self, label: impl Into<String>, ket: Ket) -> Self {
        self.boundary = Boundary::InitialPure {
            label: label.into(),
            ket,
        };
        self
    }

    pub fn initial_density(mut self, rho: DensityOperator) -> Self {
        self.boundary = Boundary::InitialDensity(rho);
        self
    }

    pub fn boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn at(mut self, time: impl Into<String>, d: DecompositionOfIdentity) -> Self {
        self.slots.push((time.into(), d));
        self
    }

    pub fn build(self) -> Result<Family> {
        let grid = self.props.grid();
        let dim = self.props.dim();
        let mut decomps: Vec<Option<DecompositionOfIdentity>> = vec![None; grid.len()];
        for (t, d) in self.slots {
            let j = grid.resolve(&t)?;
            if decomps[j].is_some() {
                return Err(Error::InvalidFamily(format!("time {t} given twice")));
            }
            decomps[j] = Some(d);
        }
        let pure_slot = match &self.boundary {
            Boundary::InitialPure { label, ket } => Some((0, label, ket)),
            Boundary::FinalPure { label, ket } => Some((grid.len() - 1, label, ket)),
            _ => None,
        };
        if let Some((j, label, ket)) = pure_slot {
            if decomps[j].is_none() {
                let p = Projector::from_ket(ket)?;
                let members = if p.rank() == dim {
                    vec![(label.clone(), p)]
                } else {
                    vec![(label.clone(), p.clone()), (complement_label(label), p.complement())]
                };
                decomps[j] = Some(DecompositionOfIdentity::new(members)?);
            }
        }
        let decomps = decomps
            .into_iter()
            .map(|d| d.unwrap_or_else(|| DecompositionOfIdentity::trivial(dim)))
            .collect();
        Family::new(self.name, self.props, decomps, self.boundary)
    }
}
