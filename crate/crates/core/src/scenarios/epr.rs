//! Two spin-half particles in the singlet state, with an apparatus on the
//! a side measuring `S_az` between `t3` and `t4`.
//!
//! Space: spin a ⊗ spin b ⊗ apparatus `{Z, Zplus, Zminus}`. Positions are
//! left out; the spacetime events place a-side events at negative `x` and
//! b-side events at positive `x`.

use super::registry::{Expectation, Provenance};
use super::tensor::{binary, controlled, decomp, ket, proj, product, swap, with_rest, Factor, Space, H};
use super::Scenario;
use crate::dynamics::{PropagatorSet, TimeGrid};
use crate::error::Result;
use crate::histories::Family;
use crate::hilbert::{re, DecompositionOfIdentity, Ket, Operator, Projector};
use crate::relativistic::{Hypersurface, Region, TaggedEvent};

pub fn build_epr() -> Result<Scenario> {
    let space = Space::new(vec![
        Factor::new(&["zplus_a", "zminus_a"]),
        Factor::new(&["zplus_b", "zminus_b"]),
        Factor::new(&["Z", "Zplus", "Zminus"]),
    ]);
    let zp = ket(&[1.0, 0.0]);
    let zm = ket(&[0.0, 1.0]);
    let xp = ket(&[H, H]);
    let xm = ket(&[H, -H]);
    let app = &space.factors[2];
    let ready = app.ket("Z");

    let measure = controlled(&[
        (proj(&zp).into_operator(), Operator::identity(2).tensor(&swap(3, 0, 1))),
        (proj(&zm).into_operator(), Operator::identity(2).tensor(&swap(3, 0, 2))),
    ]);
    let id = Operator::identity(space.dim());
    let props = PropagatorSet::new(
        "L",
        TimeGrid::uniform(6),
        vec![id.clone(), id.clone(), id.clone(), measure, id],
    )?;
    let mut scn = Scenario::new("epr", space.labels(), props);

    let pair = |a: &Ket, b: &Ket| a.tensor(b);
    let singlet = Ket::combination(&[(re(H), &pair(&zp, &zm)), (re(-H), &pair(&zm, &zp))])?;
    let psi0 = singlet.tensor(&ready);
    scn.add_ket("Psi0", psi0.clone())?;
    let psi_t4 = Ket::combination(&[
        (re(H), &space.ket(&[zp.clone(), zm.clone(), app.ket("Zplus")])),
        (re(-H), &space.ket(&[zm.clone(), zp.clone(), app.ket("Zminus")])),
    ])?;
    scn.add_ket("Psi4", psi_t4)?;
    let s0 = Projector::from_ket(&singlet)?.extend(3, true);
    scn.add_projector("s0", s0.clone());

    let on_a = |k: &Ket| space.proj(&[Some(&proj(k)), None, None]);
    let on_b = |k: &Ket| space.proj(&[None, Some(&proj(k)), None]);
    let on_z = |n: &str| space.proj(&[None, None, Some(&proj(&app.ket(n)))]);
    let spin_states = [("zplus", &zp), ("zminus", &zm), ("xplus", &xp), ("xminus", &xm)];
    for (n, k) in spin_states {
        scn.add_projector(&format!("{n}_a"), on_a(k));
        scn.add_projector(&format!("{n}_b"), on_b(k));
    }
    for n in ["Z", "Zplus", "Zminus"] {
        scn.add_projector(n, on_z(n));
    }

    let basis = |side: &str, which: char| -> Vec<(String, Projector)> {
        let f = |k: &Ket| if side == "a" { on_a(k) } else { on_b(k) };
        let (p, m) = if which == 'z' { (&zp, &zm) } else { (&xp, &xm) };
        vec![
            (format!("{which}plus_{side}"), f(p)),
            (format!("{which}minus_{side}"), f(m)),
        ]
    };
    let zz = || decomp(product(&basis("a", 'z'), &basis("b", 'z')));
    let xx = || decomp(product(&basis("a", 'x'), &basis("b", 'x')));
    let zx = || decomp(product(&basis("a", 'z'), &basis("b", 'x')));
    let s0_slot = || binary("s0", s0.clone());

    let props = scn.default_propagators().clone();
    let fam = |name: &str, slots: Vec<(&str, DecompositionOfIdentity)>| {
        let mut b = Family::builder(name, props.clone()).initial_pure("Psi0", psi0.clone());
        for (t, d) in slots {
            b = b.at(t, d);
        }
        b.build()
    };
    scn.add_family(fam("F0", vec![("t1", s0_slot()?), ("t2", s0_slot()?), ("t3", s0_slot()?)])?);
    scn.add_family(fam("F1", vec![("t1", zz()?), ("t2", zz()?), ("t3", zz()?)])?);
    scn.add_family(fam("F2", vec![("t1", s0_slot()?), ("t2", zz()?), ("t3", zz()?)])?);
    scn.add_family(fam("F3", vec![("t1", xx()?), ("t2", xx()?), ("t3", xx()?)])?);
    scn.add_family(fam("F4", vec![("t1", zx()?), ("t2", zx()?), ("t3", zx()?)])?);
    scn.add_family(fam("F2-remerge", vec![("t1", zz()?), ("t2", zz()?), ("t3", s0_slot()?)])?);

    let joint = |a: &Ket, la: &str, b: &Ket, lb: &str, z: &str| {
        (
            format!("{la}.{lb}.{z}"),
            proj(&space.ket(&[a.clone(), b.clone(), app.ket(z)])),
        )
    };
    let before = || {
        with_rest(vec![
            joint(&zp, "zplus_a", &zm, "zminus_b", "Z"),
            joint(&zm, "zminus_a", &zp, "zplus_b", "Z"),
        ])
    };
    let after = || {
        with_rest(vec![
            joint(&zp, "zplus_a", &zm, "zminus_b", "Zplus"),
            joint(&zm, "zminus_a", &zp, "zplus_b", "Zminus"),
        ])
    };
    let after_x = || {
        with_rest(vec![
            joint(&zp, "zplus_a", &xp, "xplus_b", "Zplus"),
            joint(&zp, "zplus_a", &xm, "xminus_b", "Zplus"),
            joint(&zm, "zminus_a", &xp, "xplus_b", "Zminus"),
            joint(&zm, "zminus_a", &xm, "xminus_b", "Zminus"),
        ])
    };
    let s0_ready = || {
        with_rest(vec![(
            "s0.Z".to_string(),
            proj(&singlet.tensor(&ready)),
        )])
    };
    scn.add_family(fam("G1", vec![("t3", before()?), ("t4", after()?), ("t5", after()?)])?);
    scn.add_family(fam("G2", vec![("t3", s0_ready()?), ("t4", after()?), ("t5", after()?)])?);
    scn.add_family(fam("G4", vec![("t3", s0_ready()?), ("t4", after_x()?), ("t5", after_x()?)])?);

    add_events(&mut scn)?;

    use Provenance::*;
    let reg = [
        Expectation::probability("F0 keeps the singlet", "F0", "t3=s0", 1.0, Reported),
        Expectation::probability("F1 z+ z- history", "F1", "t1=zplus_a.zminus_b", 0.5, Reported),
        Expectation::probability("F1 z- z+ history", "F1", "t1=zminus_a.zplus_b", 0.5, Reported),
        Expectation::probability(
            "F1 perfect anticorrelation",
            "F1",
            "t1=zplus_a.zminus_b|zminus_a.zplus_b",
            1.0,
            Reported,
        ),
        Expectation::probability("F2 splits after t1", "F2", "t2=zplus_a.zminus_b", 0.5, Reported),
        Expectation::probability("F3 x anticorrelation", "F3", "t2=xplus_a.xminus_b", 0.5, Reported),
        Expectation::probability("F4 z+ x+", "F4", "t1=zplus_a.xplus_b", 0.25, Reported),
        Expectation::probability("F4 z+ x-", "F4", "t1=zplus_a.xminus_b", 0.25, Reported),
        Expectation::probability("F4 z- x+", "F4", "t1=zminus_a.xplus_b", 0.25, Reported),
        Expectation::probability("F4 z- x-", "F4", "t1=zminus_a.xminus_b", 0.25, Reported),
        Expectation::conditional("S_bx independent of S_az", "F4", "t1=xplus_b", "t1=zplus_a", 0.5, Reported),
        Expectation::conditional("S_bx independent of S_az (-)", "F4", "t1=xminus_b", "t1=zminus_a", 0.5, Reported),
        Expectation::consistent("re-merging into the singlet is inconsistent", "F2-remerge", false, Computed),
        Expectation::probability("G1 outcome Z+", "G1", "t4=Zplus", 0.5, Reported),
        Expectation::conditional("Z+ implies earlier z+ z-", "G1", "t3=zplus_a", "t4=Zplus", 1.0, Reported),
        Expectation::probability("G2 outcome Z-", "G2", "t4=zminus_a.zplus_b.Zminus", 0.5, Reported),
        Expectation::probability("G4 Z+ with x+ on b", "G4", "t4=zplus_a.xplus_b.Zplus", 0.25, Computed),
        Expectation::conditional("G4 b independent of the outcome", "G4", "t4=xplus_b", "t4=Zminus", 0.5, Computed),
    ];
    for e in reg {
        scn.expect(e);
    }
    Ok(scn)
}

/// Local events at twenty times the unit spacing of the figure, plus the
/// two entangled events on crossing surfaces.
fn add_events(scn: &mut Scenario) -> Result<()> {
    let local = |id: &str, x: i64, t: f64, p: &str, time: &str| {
        TaggedEvent::local(id, Region::at(x, t)).with_projector(p, time)
    };
    let events = vec![
        local("a1", -15, 30.0, "zplus_a", "t1"),
        local("b1", 15, 30.0, "xplus_b", "t1"),
        local("a'1", -12, 24.0, "zminus_a", "t1"),
        local("b'1", 20, 40.0, "xminus_b", "t1"),
        local("a2", -30, 60.0, "Zplus", "t4"),
        local("b2", 30, 60.0, "zminus_b", "t4"),
        local("a'2", -24, 48.0, "xplus_a", "t2"),
        local("b'2", 40, 80.0, "zplus_b", "t4"),
        TaggedEvent::entangled("E1", vec![Region::at(-15, 30.0), Region::at(15, 30.0)])?
            .with_projector("s0", "t1")
            .on_surface("t=30"),
        TaggedEvent::entangled(
            "E'1",
            vec![
                Region::new([-12], Hypersurface::line(30.0, 0.5, -40.0, 40.0)?)?,
                Region::new([20], Hypersurface::line(30.0, 0.5, -40.0, 40.0)?)?,
            ],
        )?
        .with_projector("s0", "t1")
        .on_surface("t'=30"),
    ];
    scn.events = events;
    scn.side(
        "a",
        &["zplus_a", "zminus_a", "xplus_a", "xminus_a", "Z", "Zplus", "Zminus"],
        &["a1", "a'1", "a2", "a'2"],
    );
    scn.side(
        "b",
        &["zplus_b", "zminus_b", "xplus_b", "xminus_b"],
        &["b1", "b'1", "b2", "b'2"],
    );
    Ok(())
}
