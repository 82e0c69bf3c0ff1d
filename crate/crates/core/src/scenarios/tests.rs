use super::*;
use crate::histories::{weights, Predicate};

fn all_pass(scn: &Scenario) {
    let failed: Vec<_> = scn.run_expectations().into_iter().filter(|o| !o.passed).collect();
    assert!(failed.is_empty(), "{}: {failed:#?}", scn.name());
}

#[test]
fn registries_hold() {
    for name in SCENARIO_NAMES.iter().chain(&["hardy-detectors"]) {
        all_pass(&build(name).unwrap());
    }
}

#[test]
fn unknown_scenario() {
    assert!(matches!(build("nope"), Err(Error::UnknownName(_))));
}

#[test]
fn step_unitaries_are_unitary() {
    for name in SCENARIO_NAMES {
        let scn = build(name).unwrap();
        for props in scn.frames().values() {
            for s in props.steps() {
                assert!(s.unitarity_defect() < 1e-12, "{name}");
            }
        }
    }
}

#[test]
fn hardy_dark_port_by_hand() {
    // amplitude of e ebar: (1/√3)(h·h + h·(−h) + (−h)·h) = −1/(2√3)
    let scn = build_hardy(false).unwrap();
    let psi2 = scn.ket("psi2").unwrap();
    let a = psi2.amplitudes()[0];
    assert!((a.re + 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-12);
    assert!(a.im.abs() < 1e-15);
}

#[test]
fn hardy_detectors_agree_with_ports() {
    let a = build_hardy(false).unwrap();
    let b = build_hardy(true).unwrap();
    let pa = crate::histories::predicate_probability(
        a.family("unitary-output").unwrap(),
        &Predicate::parse("t2=f.fbar").unwrap(),
    )
    .unwrap();
    let pb = crate::histories::predicate_probability(
        b.family("detector-output").unwrap(),
        &Predicate::parse("t3=F.Fbar").unwrap(),
    )
    .unwrap();
    assert!((pa - pb).abs() < 1e-12);
    assert!((pa - 0.75).abs() < 1e-12);
}

#[test]
fn wavepacket_trajectories() {
    let scn = build_wavepacket_default().unwrap();
    assert_eq!(scn.dim(), 196);
    let w = weights(scn.family("F1").unwrap()).unwrap();
    assert!((w.by_labels(&["Psi0", "x9-11", "absorbed", "absorbed"]).unwrap() - 0.5).abs() < 1e-12);
    assert!((w.by_labels(&["Psi0", "x15-17", "x18-20", "absorbed"]).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn wavepacket_geometry_is_validated() {
    let g = WavepacketGeometry {
        det_a: 2,
        ..WavepacketGeometry::default()
    };
    assert!(matches!(build_wavepacket(&g), Err(Error::InvalidGeometry(_))));
    let g = WavepacketGeometry {
        times: vec![0.0, 3.0],
        ..WavepacketGeometry::default()
    };
    assert!(build_wavepacket(&g).is_err());
}

#[test]
fn epr_singlet_weights_by_hand() {
    let scn = build_epr().unwrap();
    let w = weights(scn.family("F4").unwrap()).unwrap();
    assert!((w.total() - 1.0).abs() < 1e-12);
}

#[test]
fn relabel_with_varying_maps_drops_named_items() {
    let scn = build_spin_half().unwrap();
    let n = scn.default_propagators().grid().len();
    let mut maps = vec![Operator::identity(scn.dim()); n];
    let perm: Vec<usize> = (0..scn.dim()).rev().collect();
    maps[2] = Operator::permutation(&perm).unwrap();
    let primed = scn.relabel(&CovarianceMap::new(maps).unwrap()).unwrap();
    assert!(primed.projectors().is_empty());
    assert!(primed.expected().iter().all(|e| !e.query.uses_named_projectors()));
    all_pass(&primed);
}
