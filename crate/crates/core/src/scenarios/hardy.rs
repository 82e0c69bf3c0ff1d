//! Two overlapping Mach-Zehnder interferometers, one for a particle and
//! one for its antiparticle, prepared so that both never reach the
//! annihilation region together.
//!
//! Space: arm `{c, d}` ⊗ arm `{cbar, dbar}`. After a beam splitter the same
//! basis vectors are read as output ports `{e, f}` and `{ebar, fbar}`. Three
//! frames differ in when the two final beam splitters act: simultaneously
//! (`L`), b first (`L'`) or a first (`L''`).

use super::registry::{Expect, Expectation, Provenance, Query};
use super::tensor::{decomp, ket, proj, product, swap, with_rest, Factor, Space, H};
use super::Scenario;
use crate::dynamics::{PropagatorSet, TimeGrid};
use crate::error::Result;
use crate::histories::Family;
use crate::hilbert::{re, DecompositionOfIdentity, Ket, Operator, Projector};
use crate::relativistic::{Region, TaggedEvent};

fn beam_splitter() -> Operator {
    Operator::from_real_rows(&[&[H, -H], &[H, H]]).expect("finite")
}

pub fn build_hardy(with_detectors: bool) -> Result<Scenario> {
    let mut factors = vec![Factor::new(&["c", "d"]), Factor::new(&["cbar", "dbar"])];
    if with_detectors {
        factors.push(Factor::new(&["Da", "E", "F"]));
        factors.push(Factor::new(&["Db", "Ebar", "Fbar"]));
    }
    let space = Space::new(factors);
    let n = space.factors.len();
    let on = |i: usize, o: &Operator| {
        let mut parts: Vec<Option<&Operator>> = vec![None; n];
        parts[i] = Some(o);
        space.op(&parts)
    };
    let bs = beam_splitter();
    let (bs_a, bs_b) = (on(0, &bs), on(1, &bs));
    let id = Operator::identity(space.dim());

    let mut labels = vec!["t0", "t1", "tm", "t2"];
    let mut values = vec![0.0, 1.0, 1.5, 2.0];
    let detect = with_detectors.then(|| {
        let (e, f) = (proj(&ket(&[1.0, 0.0])).into_operator(), proj(&ket(&[0.0, 1.0])).into_operator());
        let side = |arm: usize, det: usize| {
            let branch = |p: &Operator, v: Operator| {
                let mut parts: Vec<Option<&Operator>> = vec![None; n];
                parts[arm] = Some(p);
                parts[det] = Some(&v);
                space.op(&parts)
            };
            &branch(&e, swap(3, 0, 1)) + &branch(&f, swap(3, 0, 2))
        };
        &side(0, 2) * &side(1, 3)
    });
    if with_detectors {
        labels.push("t3");
        values.push(3.0);
    }
    let frame = |name: &str, mut steps: Vec<Operator>| -> Result<PropagatorSet> {
        if let Some(d) = &detect {
            steps.push(d.clone());
        }
        PropagatorSet::new(name, TimeGrid::new(labels.clone(), values.clone())?, steps)
    };
    let both = &bs_a * &bs_b;
    let mut scn = Scenario::new(
        if with_detectors { "hardy-detectors" } else { "hardy" },
        space.labels(),
        frame("L", vec![id.clone(), both.clone(), id.clone()])?,
    );
    scn.add_frame(frame("L'", vec![id.clone(), bs_b.clone(), bs_a.clone()])?);
    scn.add_frame(frame("L''", vec![id.clone(), bs_a.clone(), bs_b.clone()])?);

    let s3 = 1.0 / 3f64.sqrt();
    let rest: Vec<Ket> = space.factors[2..]
        .iter()
        .map(|f| f.ket(f.names[0]))
        .collect();
    let k = |a: usize, b: usize| {
        let mut parts = vec![Ket::basis(2, a), Ket::basis(2, b)];
        parts.extend(rest.iter().cloned());
        space.ket(&parts)
    };
    let psi0 = Ket::combination(&[(re(s3), &k(0, 0)), (re(s3), &k(0, 1)), (re(s3), &k(1, 0))])?;
    scn.add_ket("psi0", psi0.clone())?;
    let l = scn.frame("L")?.clone();
    let lp = scn.frame("L'")?.clone();
    let lpp = scn.frame("L''")?.clone();
    scn.add_ket("psi2", l.propagator(3, 0)?.apply(&psi0)?)?;
    scn.add_ket("psi1p", lp.propagator(2, 0)?.apply(&psi0)?)?;
    scn.add_ket("psi1pp", lpp.propagator(2, 0)?.apply(&psi0)?)?;

    let arm = |i: usize, which: usize| {
        let mut parts: Vec<Option<&Projector>> = vec![None; n];
        let p = proj(&Ket::basis(2, which));
        parts[i] = Some(&p);
        space.proj(&parts)
    };
    let pair = |i: usize, names: [&str; 2]| -> Vec<(String, Projector)> {
        vec![(names[0].to_string(), arm(i, 0)), (names[1].to_string(), arm(i, 1))]
    };
    let (cd, ef) = (pair(0, ["c", "d"]), pair(0, ["e", "f"]));
    let (cdb, efb) = (pair(1, ["cbar", "dbar"]), pair(1, ["ebar", "fbar"]));
    for (name, p) in cd.iter().chain(&ef).chain(&cdb).chain(&efb) {
        scn.add_projector(name, p.clone());
    }

    let fam = |name: &str, props: &std::sync::Arc<PropagatorSet>, slots: Vec<(&str, DecompositionOfIdentity)>| {
        let mut b = Family::builder(name, props.clone()).initial_pure("psi0", psi0.clone());
        for (t, d) in slots {
            b = b.at(t, d);
        }
        b.build()
    };
    scn.add_family(fam("unitary-output", &l, vec![("t2", decomp(product(&ef, &efb))?)])?);
    scn.add_family(fam("inference-ebar", &lp, vec![("tm", decomp(product(&cd, &efb))?)])?);
    scn.add_family(fam("inference-e", &lpp, vec![("tm", decomp(product(&ef, &cdb))?)])?);
    scn.add_family(fam("arm-pair", &l, vec![("t1", decomp(product(&cd, &cdb))?)])?);
    scn.add_family(fam("forbidden", &l, vec![("t1", decomp(cd.clone())?), ("t2", decomp(ef.clone())?)])?);

    use Provenance::*;
    let mut reg = vec![
        Expectation::probability("both dark ports fire", "unitary-output", "t2=e.ebar", 1.0 / 12.0, Reported),
        Expectation::conditional("ebar implies a in d", "inference-ebar", "tm=d", "tm=ebar", 1.0, Reported),
        Expectation::conditional("e implies b in dbar", "inference-e", "tm=dbar", "tm=e", 1.0, Reported),
        Expectation::new(
            "both particles never share the overlap arms",
            "arm-pair",
            Query::Probability(crate::histories::Predicate::parse("t1=d.dbar")?),
            Expect::Near { value: 0.0, tol: 1e-12 },
            Reported,
        ),
        Expectation::consistent("arm at t1 with port at t2 is inconsistent", "forbidden", false, Reported),
        Expectation::new(
            "forbidden family overlap",
            "forbidden",
            Query::MaxNormalizedOverlap,
            Expect::Above(0.1),
            Structural,
        ),
    ];

    if with_detectors {
        let det = |i: usize, names: [&'static str; 3]| -> Vec<(String, Projector)> {
            names
                .iter()
                .enumerate()
                .map(|(j, nm)| {
                    let mut parts: Vec<Option<&Projector>> = vec![None; n];
                    let p = proj(&Ket::basis(3, j));
                    parts[i] = Some(&p);
                    (nm.to_string(), space.proj(&parts))
                })
                .collect()
        };
        let (da, db) = (det(2, ["Da", "E", "F"]), det(3, ["Db", "Ebar", "Fbar"]));
        for (name, p) in da.iter().chain(&db) {
            scn.add_projector(name, p.clone());
        }
        let fired = product(&da[1..], &db[1..]);
        scn.add_family(fam("detector-output", &l, vec![("t3", with_rest(fired)?)])?);
        reg.push(Expectation::probability(
            "both dark-port detectors fire",
            "detector-output",
            "t3=E.Ebar",
            1.0 / 12.0,
            Computed,
        ));
    }
    for e in reg {
        scn.expect(e);
    }
    add_events(&mut scn);
    Ok(scn)
}

fn add_events(scn: &mut Scenario) {
    let local = |id: &str, x: i64, t: f64, p: &str, time: &str| {
        TaggedEvent::local(id, Region::at(x, t)).with_projector(p, time)
    };
    scn.events = vec![
        local("source", 0, 0.0, "psi0", "t0"),
        local("c1", -9, 18.0, "c", "t1"),
        local("d1", -9, 18.0, "d", "t1"),
        local("cbar1", 9, 18.0, "cbar", "t1"),
        local("dbar1", 9, 18.0, "dbar", "t1"),
        local("E2", -15, 30.0, "e", "t2"),
        local("F2", -15, 30.0, "f", "t2"),
        local("Ebar2", 15, 30.0, "ebar", "t2"),
        local("Fbar2", 15, 30.0, "fbar", "t2"),
        TaggedEvent::local("overlap", Region::at(0, 12.0)),
    ];
    scn.side("a", &["c", "d", "e", "f"], &["c1", "d1", "E2", "F2"]);
    scn.side("b", &["cbar", "dbar", "ebar", "fbar"], &["cbar1", "dbar1", "Ebar2", "Fbar2"]);
}
