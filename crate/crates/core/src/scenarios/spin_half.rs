//! Spin half in zero field, measured in the x basis by a three-state
//! apparatus between `t3` and `t4`.
//!
//! Space: spin `{zplus, zminus}` ⊗ apparatus `{X, Xplus, Xminus}`.
//! The measurement is `Σ_s |x_s⟩⟨x_s| ⊗ swap(X, X_s)`: it sends `x_s X` to
//! `x_s X_s` as required and completes the map on the rest by swapping back.

use super::registry::{Expect, Expectation, Provenance, Query};
use super::tensor::{binary, controlled, decomp, ket, proj, product, swap, with_rest, Factor, Space, H};
use super::Scenario;
use crate::dynamics::{PropagatorSet, TimeGrid};
use crate::error::Result;
use crate::histories::Family;
use crate::hilbert::{re, DecompositionOfIdentity, Ket, Operator, Projector};

pub fn build_spin_half() -> Result<Scenario> {
    let space = Space::new(vec![
        Factor::new(&["zplus", "zminus"]),
        Factor::new(&["X", "Xplus", "Xminus"]),
    ]);
    let zp = ket(&[1.0, 0.0]);
    let zm = ket(&[0.0, 1.0]);
    let xp = ket(&[H, H]);
    let xm = ket(&[H, -H]);
    let app = &space.factors[1];
    let (x_ready, x_plus, x_minus) = (app.ket("X"), app.ket("Xplus"), app.ket("Xminus"));

    let measure = controlled(&[
        (proj(&xp).into_operator(), swap(3, 0, 1)),
        (proj(&xm).into_operator(), swap(3, 0, 2)),
    ]);
    let id = Operator::identity(space.dim());
    let grid = TimeGrid::uniform(6);
    let props = PropagatorSet::new(
        "L",
        grid,
        vec![id.clone(), id.clone(), id.clone(), measure, id],
    )?;
    let mut scn = Scenario::new("spin-half", space.labels(), props);

    let psi0 = space.ket(&[zp.clone(), x_ready.clone()]);
    let s = Ket::combination(&[
        (re(H), &space.ket(&[xp.clone(), x_plus.clone()])),
        (re(H), &space.ket(&[xm.clone(), x_minus.clone()])),
    ])?;
    scn.add_ket("Psi0", psi0.clone())?;
    scn.add_ket("S", s.clone())?;
    let spin = |k: &Ket| space.proj(&[Some(&proj(k)), None]);
    let appar = |k: &Ket| space.proj(&[None, Some(&proj(k))]);
    for (n, k) in [("zplus", &zp), ("zminus", &zm), ("xplus", &xp), ("xminus", &xm)] {
        scn.add_projector(n, spin(k));
    }
    for (n, k) in [("X", &x_ready), ("Xplus", &x_plus), ("Xminus", &x_minus)] {
        scn.add_projector(n, appar(k));
    }

    let z = || decomp(vec![("zplus".into(), spin(&zp)), ("zminus".into(), spin(&zm))]);
    let x = || decomp(vec![("xplus".into(), spin(&xp)), ("xminus".into(), spin(&xm))]);
    let joint = |s: &Ket, sl: &str, a: &Ket, al: &str| {
        (format!("{sl}.{al}"), proj(&space.ket(&[s.clone(), a.clone()])))
    };
    let props = scn.default_propagators().clone();
    let fam = |name: &str, slots: Vec<(&str, DecompositionOfIdentity)>| {
        let mut b = Family::builder(name, props.clone()).initial_pure("Psi0", psi0.clone());
        for (t, d) in slots {
            b = b.at(t, d);
        }
        b.build()
    };

    scn.add_family(fam("F0", vec![("t1", z()?), ("t2", z()?), ("t3", z()?)])?);
    scn.add_family(fam("F1", vec![("t1", x()?), ("t2", x()?), ("t3", x()?)])?);
    scn.add_family(fam("F2", vec![("t1", z()?), ("t2", x()?), ("t3", x()?)])?);
    scn.add_family(fam("F1-remerge", vec![("t1", x()?), ("t2", x()?), ("t3", z()?)])?);

    let before = || with_rest(vec![joint(&xp, "xplus", &x_ready, "X"), joint(&xm, "xminus", &x_ready, "X")]);
    let after = || {
        with_rest(vec![
            joint(&xp, "xplus", &x_plus, "Xplus"),
            joint(&xm, "xminus", &x_minus, "Xminus"),
        ])
    };
    let zx = || with_rest(vec![joint(&zp, "zplus", &x_ready, "X")]);
    let s_slot = || binary("S", proj(&s));
    scn.add_family(fam("G0", vec![("t3", zx()?), ("t4", s_slot()?), ("t5", s_slot()?)])?);
    scn.add_family(fam("G1", vec![("t3", before()?), ("t4", after()?), ("t5", after()?)])?);
    scn.add_family(fam("G2", vec![("t2", zx()?), ("t3", before()?), ("t4", after()?)])?);
    // x at t1 then z at t2: each family alone is consistent, their product is not
    scn.add_family(fam("pair-x1", vec![("t1", x()?)])?);
    scn.add_family(fam("pair-z2", vec![("t2", z()?)])?);
    // apparatus read out alone, for the outcome statistics
    let outcomes: Vec<(String, Projector)> = ["X", "Xplus", "Xminus"]
        .iter()
        .map(|n| (n.to_string(), appar(&app.ket(n))))
        .collect();
    let spins = vec![("xplus".to_string(), spin(&xp)), ("xminus".to_string(), spin(&xm))];
    scn.add_family(fam("G1-readout", vec![("t3", x()?), ("t4", decomp(product(&spins, &outcomes))?)])?);

    use Provenance::*;
    let reg = [
        Expectation::probability("F0 keeps z+ with certainty", "F0", "t3=zplus", 1.0, Reported),
        Expectation::probability("F1 x+ branch", "F1", "t1=xplus", 0.5, Reported),
        Expectation::probability("F1 x- branch", "F1", "t1=xminus", 0.5, Reported),
        Expectation::probability("F1 branches never cross", "F1", "t1=xplus,t3=xminus", 0.0, Computed),
        Expectation::probability("F2 keeps z+ at t1", "F2", "t1=zplus", 1.0, Reported),
        Expectation::probability("F2 splits at t2", "F2", "t2=xplus", 0.5, Reported),
        Expectation::consistent("re-merging x branches into z is inconsistent", "F1-remerge", false, Reported),
        Expectation::probability("G0 ends in the MQS state", "G0", "t5=S", 1.0, Reported),
        Expectation::conditional("X+ implies earlier x+", "G1", "t3=xplus", "t4=Xplus", 1.0, Reported),
        Expectation::conditional("X- implies earlier x-", "G1", "t3=xminus", "t4=Xminus", 1.0, Reported),
        Expectation::conditional("X+ implies later x+", "G1", "t5=xplus", "t4=Xplus", 1.0, Reported),
        Expectation::probability("G2 outcome X+", "G2", "t4=Xplus", 0.5, Computed),
        Expectation::probability("G1 outcome read alone", "G1-readout", "t4=xplus.Xplus", 0.5, Computed),
        Expectation::new(
            "S does not commute with the outcome X+",
            "",
            Query::Commutator {
                a: "S".into(),
                b: "Xplus".into(),
            },
            Expect::Above(0.1),
            Structural,
        ),
        Expectation::new(
            "x at t1 and z at t2 are dynamically incompatible",
            "pair-x1",
            Query::Compatible {
                other: "pair-z2".into(),
            },
            Expect::Near { value: 0.0, tol: 0.0 },
            Structural,
        ),
        Expectation::new(
            "F1 and F2 are incompatible",
            "F1",
            Query::Compatible { other: "F2".into() },
            Expect::Near { value: 0.0, tol: 0.0 },
            Reported,
        ),
    ];
    for e in reg {
        scn.expect(e);
    }
    Ok(scn)
}
