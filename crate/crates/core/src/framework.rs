//! Refinement, extension and compatibility of families.

use std::fmt;
use std::sync::Arc;

use crate::dynamics::PropagatorSet;
use crate::error::{Error, Result};
use crate::histories::{consistency_check, Boundary, ConsistencyOptions, ConsistencyReport, Family};
use crate::hilbert::{DecompositionOfIdentity, Projector, TOL_PROJ};

/// Commutator threshold for the kinematic test.
pub const TOL_COMMUTE: f64 = 1e-9;
/// Step unitaries of families being compared must agree to this.
const TOL_DYNAMICS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Identical,
    Refinement,
    CommonRefinementFound,
    KinematicIncompatible,
    DynamicIncompatible,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Identical => "identical",
            Classification::Refinement => "refinement",
            Classification::CommonRefinementFound => "common-refinement-found",
            Classification::KinematicIncompatible => "kinematic-incompatible",
            Classification::DynamicIncompatible => "dynamic-incompatible",
        }
    }

    pub fn is_compatible(self) -> bool {
        matches!(
            self,
            Classification::Identical
                | Classification::Refinement
                | Classification::CommonRefinementFound
        )
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evidence behind a negative verdict.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Two projectors at one time that fail to commute.
    Kinematic {
        time: String,
        left: String,
        right: String,
        commutator_norm: f64,
    },
    /// Consistency report of the slotwise product family.
    Dynamic(ConsistencyReport),
}

/// Outcome of [`common_refinement`].
///
/// `dynamic-incompatible` means the slotwise product family, the coarsest
/// common refinement when every pair commutes, is inconsistent. Finer common
/// refinements are not searched.
#[derive(Clone, Debug)]
pub struct CompatibilityVerdict {
    pub compatible: bool,
    pub classification: Classification,
    pub witness: Option<Witness>,
    pub refinement: Option<Family>,
}

fn time_label(value: f64) -> String {
    format!("t@{value}")
}

/// Adds times carrying the trivial decomposition `{I}`.
pub fn extend(f: &Family, extra_times: &[f64]) -> Result<Family> {
    let labelled: Vec<(f64, String)> = extra_times.iter().map(|&t| (t, time_label(t))).collect();
    extend_labelled(f, &labelled)
}

fn extend_labelled(f: &Family, extra: &[(f64, String)]) -> Result<Family> {
    let mut props: PropagatorSet = (**f.propagators()).clone();
    let mut decomps = f.decompositions().to_vec();
    let reference_value = f.grid().value(f.reference());
    let first = f.grid().value(0);
    let last = f.grid().value(f.grid().len() - 1);
    for (i, (t, label)) in extra.iter().enumerate() {
        if extra[..i].iter().any(|(u, _)| u == t) {
            return Err(Error::DuplicateTime(*t));
        }
        let blocked = match f.boundary() {
            Boundary::InitialPure { .. } | Boundary::InitialDensity(_) => *t < first,
            Boundary::FinalPure { .. } | Boundary::FinalDensity(_) => *t > last,
            Boundary::None => false,
        };
        if blocked {
            return Err(Error::TimeBeforeBoundary(*t));
        }
        props = props.insert_time(*t, label.clone())?;
        let j = props
            .grid()
            .index_of_value(*t)
            .expect("inserted time present");
        decomps.insert(j, DecompositionOfIdentity::trivial(f.dim()));
    }
    let g = Family::new(f.name(), Arc::new(props), decomps, f.boundary().clone())?;
    let r = g
        .grid()
        .index_of_value(reference_value)
        .expect("reference time kept");
    g.with_reference(r)
}

/// Extends both families to the union of their grids and checks they share
/// dynamics and boundary condition.
pub fn align(f: &Family, g: &Family) -> Result<(Family, Family)> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    if !f.boundary().approx_eq(g.boundary(), TOL_PROJ) {
        return Err(Error::BoundaryMismatch);
    }
    let missing = |a: &Family, b: &Family| -> Vec<(f64, String)> {
        b.grid()
            .values()
            .iter()
            .zip(b.grid().labels())
            .filter(|(v, _)| a.grid().index_of_value(**v).is_none())
            .map(|(v, l)| {
                let label = if a.grid().index_of_label(l).is_ok() {
                    time_label(*v)
                } else {
                    l.clone()
                };
                (*v, label)
            })
            .collect()
    };
    let fa = extend_labelled(f, &missing(f, g))?;
    let ga = extend_labelled(g, &missing(g, f))?;
    if !fa.propagators().same_dynamics(ga.propagators(), TOL_DYNAMICS) {
        return Err(Error::PropagatorMismatch(format!(
            "`{}` ({}) and `{}` ({}) differ on the common grid",
            f.name(),
            f.propagators().name(),
            g.name(),
            g.propagators().name()
        )));
    }
    let ga = ga.with_propagators(fa.propagators().clone())?;
    Ok((fa, ga))
}

fn contains(big: &Projector, small: &Projector) -> bool {
    (big.operator() * small.operator()).approx_eq(small.operator(), TOL_PROJ)
}

/// True iff every coarse member is a sum of fine members, at every time of
/// the common grid.
pub fn is_refinement(coarse: &Family, fine: &Family) -> Result<bool> {
    let (c, f) = align(coarse, fine)?;
    for j in 0..c.grid().len() {
        let cd = c.decomposition(j);
        let fd = f.decomposition(j);
        let mut owner = Vec::with_capacity(fd.len());
        for (_, q) in fd.members() {
            let hits: Vec<usize> = cd
                .members()
                .iter()
                .enumerate()
                .filter(|(_, (_, p))| contains(p, q))
                .map(|(i, _)| i)
                .collect();
            if hits.len() != 1 {
                return Ok(false);
            }
            owner.push(hits[0]);
        }
        for (i, (_, p)) in cd.members().iter().enumerate() {
            let parts: Vec<&Projector> = fd
                .members()
                .iter()
                .zip(&owner)
                .filter(|(_, &o)| o == i)
                .map(|((_, q), _)| q)
                .collect();
            let ok = !parts.is_empty()
                && Projector::sum(&parts)
                    .map(|s| s.operator().approx_eq(p.operator(), TOL_PROJ))
                    .unwrap_or(false);
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn identical(f: &Family, g: &Family) -> bool {
    f.grid().values() == g.grid().values()
        && f.boundary().approx_eq(g.boundary(), TOL_PROJ)
        && f.decompositions()
            .iter()
            .zip(g.decompositions())
            .all(|(a, b)| a.same_projectors(b, TOL_PROJ))
}

fn product_label(a: &str, a_trivial: bool, b: &str, b_trivial: bool, same: bool) -> String {
    match (a_trivial, b_trivial) {
        (true, true) => "I".into(),
        (true, false) => b.into(),
        (false, true) => a.into(),
        (false, false) if same || a == b => a.into(),
        _ => format!("{a}&{b}"),
    }
}

/// Attempts the slotwise product of two families as a common refinement.
pub fn common_refinement(f: &Family, g: &Family) -> Result<CompatibilityVerdict> {
    common_refinement_with(f, g, &ConsistencyOptions::default())
}

pub fn common_refinement_with(
    f: &Family,
    g: &Family,
    opts: &ConsistencyOptions,
) -> Result<CompatibilityVerdict> {
    let (fa, ga) = align(f, g)?;
    if identical(f, g) {
        return Ok(CompatibilityVerdict {
            compatible: true,
            classification: Classification::Identical,
            witness: None,
            refinement: Some(fa),
        });
    }
    let mut decomps = Vec::with_capacity(fa.grid().len());
    for j in 0..fa.grid().len() {
        let (a, b) = (fa.decomposition(j), ga.decomposition(j));
        let mut members = Vec::new();
        for (la, p) in a.members() {
            for (lb, q) in b.members() {
                let norm = p.operator().commutator(q.operator())?.frobenius_norm();
                if norm >= TOL_COMMUTE {
                    return Ok(CompatibilityVerdict {
                        compatible: false,
                        classification: Classification::KinematicIncompatible,
                        witness: Some(Witness::Kinematic {
                            time: fa.grid().label(j).to_string(),
                            left: la.clone(),
                            right: lb.clone(),
                            commutator_norm: norm,
                        }),
                        refinement: None,
                    });
                }
                let pq = p.operator() * q.operator();
                if pq.trace().re < 0.5 {
                    continue;
                }
                let same = p.operator().approx_eq(q.operator(), TOL_PROJ);
                let label = product_label(la, a.is_trivial(), lb, b.is_trivial(), same);
                members.push((label, Projector::new(pq)?));
            }
        }
        decomps.push(DecompositionOfIdentity::new(members)?);
    }
    let product = Family::new(
        format!("{}*{}", f.name(), g.name()),
        fa.propagators().clone(),
        decomps,
        fa.boundary().clone(),
    )?;
    let equals = |x: &Family| {
        x.decompositions()
            .iter()
            .zip(product.decompositions())
            .all(|(a, b)| a.same_projectors(b, TOL_PROJ))
    };
    let is_refinement = equals(&fa) || equals(&ga);
    let report = consistency_check(&product, opts)?;
    let (classification, witness) = match (report.consistent, is_refinement) {
        (true, true) => (Classification::Refinement, None),
        (true, false) => (Classification::CommonRefinementFound, None),
        (false, _) => (Classification::DynamicIncompatible, Some(Witness::Dynamic(report))),
    };
    Ok(CompatibilityVerdict {
        compatible: classification.is_compatible(),
        classification,
        witness,
        refinement: Some(product),
    })
}

pub fn is_compatible(f: &Family, g: &Family) -> Result<bool> {
    Ok(common_refinement(f, g)?.compatible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TimeGrid;
    use crate::histories::weights;
    use crate::hilbert::{Ket, Operator};

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn basis(labels: [&str; 2], a: &[f64], b: &[f64]) -> DecompositionOfIdentity {
        DecompositionOfIdentity::from_labelled(vec![
            (labels[0], Projector::from_ket(&Ket::from_real(a).unwrap()).unwrap()),
            (labels[1], Projector::from_ket(&Ket::from_real(b).unwrap()).unwrap()),
        ])
        .unwrap()
    }

    fn z() -> DecompositionOfIdentity {
        basis(["zplus", "zminus"], &[1.0, 0.0], &[0.0, 1.0])
    }

    fn x() -> DecompositionOfIdentity {
        basis(["xplus", "xminus"], &[S, S], &[S, -S])
    }

    fn props(n: usize) -> Arc<PropagatorSet> {
        Arc::new(PropagatorSet::trivial("L", TimeGrid::uniform(n), 2))
    }

    fn fam(name: &str, slots: Vec<(&str, DecompositionOfIdentity)>) -> Family {
        let mut b = Family::builder(name, props(3)).initial_pure("zplus0", Ket::from_real(&[1.0, 0.0]).unwrap());
        for (t, d) in slots {
            b = b.at(t, d);
        }
        b.build().unwrap()
    }

    #[test]
    fn dynamic_incompatibility_pair() {
        let f = fam("F", vec![("t1", x())]);
        let g = fam("G", vec![("t2", z())]);
        let v = common_refinement(&f, &g).unwrap();
        assert_eq!(v.classification, Classification::DynamicIncompatible);
        assert!(!v.compatible);
        let Some(Witness::Dynamic(r)) = v.witness else { panic!() };
        let worst = r.violations.iter().map(|x| x.overlap).fold(0.0, f64::max);
        // chain kets for (x±, z+) are ±1/2 |z+>, so the overlap is 1/4
        assert!((worst - 0.25).abs() < 1e-12);
        let w = common_refinement(&g, &f).unwrap();
        assert_eq!(w.classification, Classification::DynamicIncompatible);
    }

    #[test]
    fn kinematic_and_identity_cases() {
        let f = fam("F", vec![("t1", x())]);
        let g = fam("G", vec![("t1", z())]);
        let v = common_refinement(&f, &g).unwrap();
        assert_eq!(v.classification, Classification::KinematicIncompatible);
        assert!(matches!(v.witness, Some(Witness::Kinematic { .. })));
        assert_eq!(common_refinement(&g, &f).unwrap().classification, Classification::KinematicIncompatible);
        assert_eq!(common_refinement(&f, &f).unwrap().classification, Classification::Identical);
        assert!(is_compatible(&f, &f).unwrap());
    }

    #[test]
    fn refinement_relation() {
        let coarse = fam("C", vec![]);
        let fine = fam("F", vec![("t1", z())]);
        assert!(is_refinement(&coarse, &fine).unwrap());
        assert!(!is_refinement(&fine, &coarse).unwrap());
        assert!(is_refinement(&fine, &fine).unwrap());
        let other = fam("X", vec![("t1", x())]);
        assert!(!is_refinement(&fine, &other).unwrap());
        let finer = fam("FF", vec![("t1", z()), ("t2", x())]);
        assert!(is_refinement(&fine, &finer).unwrap());
        assert!(is_refinement(&coarse, &finer).unwrap());
        let v = common_refinement(&coarse, &fine).unwrap();
        assert_eq!(v.classification, Classification::Refinement);
        assert_eq!(common_refinement(&fine, &coarse).unwrap().classification, Classification::Refinement);
    }

    #[test]
    fn extension_is_invisible() {
        let f = fam("F", vec![("t1", x()), ("t2", x())]);
        let e = extend(&f, &[1.5]).unwrap();
        assert_eq!(e.grid().len(), 4);
        assert_eq!(e.grid().label(2), "t@1.5");
        let wf = weights(&f).unwrap();
        let we = weights(&e).unwrap();
        for (h, w) in &wf.entries {
            let mut l = h.labels();
            l.insert(2, "I");
            assert!((we.by_labels(&l).unwrap() - w).abs() < 1e-15);
        }
        assert_eq!(common_refinement(&f, &e).unwrap().classification, Classification::Refinement);
        assert!(matches!(extend(&f, &[1.0]), Err(Error::DuplicateTime(_))));
        assert!(matches!(extend(&f, &[-1.0]), Err(Error::TimeBeforeBoundary(_))));
        let ab = extend(&extend(&f, &[0.5]).unwrap(), &[2.5]).unwrap();
        let ba = extend(&extend(&f, &[2.5]).unwrap(), &[0.5]).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn mismatched_dynamics_rejected() {
        let f = fam("F", vec![("t1", x())]);
        let h = Arc::new(
            PropagatorSet::new(
                "M",
                TimeGrid::uniform(3),
                vec![Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap(), Operator::identity(2)],
            )
            .unwrap(),
        );
        let g = Family::builder("G", h).initial_pure("zplus0", Ket::from_real(&[1.0, 0.0]).unwrap()).build().unwrap();
        assert!(matches!(common_refinement(&f, &g), Err(Error::PropagatorMismatch(_))));
        let other = Family::builder("G", props(3)).initial_pure("zminus0", Ket::from_real(&[0.0, 1.0]).unwrap()).build().unwrap();
        assert!(matches!(common_refinement(&f, &other), Err(Error::BoundaryMismatch)));
    }

}
