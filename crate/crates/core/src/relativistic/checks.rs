//! Checks tying the spacetime picture to the Hilbert-space one: local
//! commutation of spacelike events and invariance of history
//! probabilities under per-time relabelling unitaries.

use serde::Serialize;

use super::events::TaggedEvent;
use super::geometry::{classify_interval, IntervalKind};
use crate::error::{Error, Result};
use crate::hilbert::{Operator, TOL_UNITARY};
use crate::histories::{consistency_check, weights, ConsistencyOptions};
use crate::scenarios::Scenario;

/// Residual above which the transformed dynamics is reported as wrong.
pub const TOL_COVARIANCE: f64 = 1e-10;
/// Largest tolerated change of a history weight.
pub const TOL_WEIGHT: f64 = 1e-9;

/// Per-time unitaries `L_j`, one for each grid time.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMap {
    maps: Vec<Operator>,
}

impl CovarianceMap {
    pub fn new(maps: Vec<Operator>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Empty("covariance maps"));
        }
        let d = maps[0].dim();
        for m in &maps {
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.dim(),
                });
            }
            let defect = m.unitarity_defect();
            if defect >= TOL_UNITARY {
                return Err(Error::NotUnitary {
                    defect,
                    threshold: TOL_UNITARY,
                });
            }
        }
        Ok(Self { maps })
    }

    pub fn identity(times: usize, dim: usize) -> Self {
        Self {
            maps: vec![Operator::identity(dim); times],
        }
    }

    pub fn maps(&self) -> &[Operator] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// The common map when every `L_j` is the same.
    pub fn uniform(&self) -> Option<&Operator> {
        let first = &self.maps[0];
        self.maps[1..]
            .iter()
            .all(|m| m.approx_eq(first, TOL_UNITARY))
            .then_some(first)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "norm", rename_all = "lowercase")]
pub enum Commutation {
    /// Some pair of points is not spacelike, so nothing is asserted.
    Inapplicable,
    /// `‖[P_e, P_g]‖_F` of the Heisenberg projectors.
    Norm(f64),
}

/// Commutator of the Heisenberg projectors of two events whose points are
/// all pairwise spacelike.
pub fn commutation_check(scn: &Scenario, e: &TaggedEvent, g: &TaggedEvent) -> Result<Commutation> {
    let (pe, pg) = (e.points(), g.points());
    let spacelike = pe
        .iter()
        .all(|p| pg.iter().all(|q| classify_interval(p, q) == IntervalKind::Spacelike));
    if !spacelike {
        return Ok(Commutation::Inapplicable);
    }
    let heis = |ev: &TaggedEvent| {
        let r = ev
            .projector
            .as_ref()
            .ok_or_else(|| Error::UnknownName(format!("projector of event `{}`", ev.id)))?;
        scn.heisenberg(&r.name, &r.time)
    };
    let (a, b) = (heis(e)?, heis(g)?);
    Ok(Commutation::Norm(
        a.operator().commutator(b.operator())?.frobenius_norm(),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameResidual {
    pub frame: String,
    /// `max_{j,k} ‖T'(j,k) − L_j T(j,k) L_k†‖_F`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyCovariance {
    pub family: String,
    pub max_weight_change: f64,
    pub consistent_before: bool,
    pub consistent_after: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub passed: bool,
    pub max_residual: f64,
    pub frames: Vec<FrameResidual>,
    pub families: Vec<FamilyCovariance>,
}

/// Compares `scn` with its description `primed` in relabelled coordinates.
///
/// Every frame of `scn` must reappear in `primed` with
/// `T'(j,k) = L_j T(j,k) L_k†`. Every family keeps its history weights and
/// its consistency verdict; a family missing from `primed` is carried over
/// with [`crate::histories::Family::transformed`].
pub fn covariance_check(scn: &Scenario, maps: &CovarianceMap, primed: &Scenario) -> Result<CovarianceReport> {
    let l = maps.maps();
    let mut frames = Vec::new();
    for (name, t) in scn.frames() {
        let tp = primed.frame(name)?;
        let n = t.grid().len();
        if l.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: l.len(),
            });
        }
        let mut residual: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                let want = &(&l[j] * &t.propagator(j, k)?) * &l[k].adjoint();
                residual = residual.max(tp.propagator(j, k)?.distance(&want));
            }
        }
        frames.push(FrameResidual {
            frame: name.clone(),
            residual,
        });
    }
    let opts = ConsistencyOptions::default();
    let mut families = Vec::new();
    for f in scn.families() {
        let fp = match primed.family(f.name()) {
            Ok(fp) => fp.clone(),
            Err(_) => f.transformed(l, primed.frame(f.propagators().name())?.clone())?,
        };
        let (w, wp) = (weights(f)?, weights(&fp)?);
        let mut change: f64 = 0.0;
        for h in f.histories() {
            let labels = h.labels();
            let a = w.by_labels(&labels).unwrap_or(0.0);
            let b = wp.by_labels(&labels).unwrap_or(0.0);
            change = change.max((a - b).abs());
        }
        families.push(FamilyCovariance {
            family: f.name().to_string(),
            max_weight_change: change,
            consistent_before: consistency_check(f, &opts)?.consistent,
            consistent_after: consistency_check(&fp, &opts)?.consistent,
        });
    }
    let max_residual = frames.iter().map(|f| f.residual).fold(0.0, f64::max);
    let passed = max_residual <= TOL_COVARIANCE
        && families
            .iter()
            .all(|f| f.max_weight_change <= TOL_WEIGHT && f.consistent_before == f.consistent_after);
    Ok(CovarianceReport {
        passed,
        max_residual,
        frames,
        families,
    })
}
