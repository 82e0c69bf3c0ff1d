use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relhist::dynamics::{propagator_from_hamiltonian, Hamiltonian, PropagatorSet, TimeGrid};
use relhist::famspec::{parse, serialize};
use relhist::framework::{common_refinement, extend};
use relhist::histories::{consistency_check, label_matches, probabilities, weights, ConsistencyOptions, Family};
use relhist::hilbert::{DecompositionOfIdentity, Ket, Operator, Projector};
use relhist::relativistic::{boost, classify_interval, IntervalKind, SpacetimePoint};

fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    &a + a.adjoint()
}

fn unitary(rng: &mut ChaCha8Rng, n: usize) -> Operator {
    let h = Hamiltonian::new(Operator::new(hermitian(rng, n)).unwrap()).unwrap();
    propagator_from_hamiltonian(&h, 1.0, 0.0)
}

fn decomposition(rng: &mut ChaCha8Rng, n: usize, parts: usize) -> DecompositionOfIdentity {
    let eig = SymmetricEigen::new(hermitian(rng, n));
    let members = (0..parts)
        .map(|g| {
            let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
            for c in (g..n).step_by(parts) {
                let v = eig.eigenvectors.column(c);
                m += v * v.adjoint();
            }
            (format!("p{g}"), Projector::new(Operator::new(m).unwrap()).unwrap())
        })
        .collect();
    DecompositionOfIdentity::new(members).unwrap()
}

struct Model {
    family: Family,
    psi: DVector<Complex64>,
    steps: Vec<Operator>,
}

fn model(seed: u64, n: usize, times: usize) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps: Vec<Operator> = (1..times).map(|_| unitary(&mut rng, n)).collect();
    let props = Arc::new(PropagatorSet::new("L", TimeGrid::uniform(times), steps.clone()).unwrap());
    let amps: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let psi = Ket::new(amps).unwrap().normalized().unwrap();
    let mut b = Family::builder("R", props).initial_pure("psi", psi.clone());
    for j in 1..times {
        b = b.at(format!("t{j}"), decomposition(&mut rng, n, 2));
    }
    Model {
        family: b.build().unwrap(),
        psi: DVector::from_vec(psi.amplitudes().to_vec()),
        steps,
    }
}

/// Weight by evolving the state vector and projecting at each time.
fn oracle_weight(m: &Model, labels: &[&str]) -> f64 {
    let mut v = m.psi.clone();
    for (j, label) in labels.iter().enumerate().skip(1) {
        v = m.steps[j - 1].matrix() * v;
        let p = m.family.decomposition(j).get(label).unwrap();
        v = p.operator().matrix() * v;
    }
    v.norm_squared()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn weights_match_state_vector_evolution(seed in any::<u64>(), n in 2usize..5, times in 2usize..5) {
        let m = model(seed, n, times);
        let w = weights(&m.family).unwrap();
        let mut total = 0.0;
        for (h, x) in &w.entries {
            let labels = h.labels();
            prop_assert!((x - oracle_weight(&m, &labels)).abs() < 1e-10);
            total += x;
        }
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn consistent_families_normalize(seed in any::<u64>(), n in 2usize..4) {
        let m = model(seed, n, 3);
        if consistency_check(&m.family, &ConsistencyOptions::default()).unwrap().consistent {
            prop_assert!((probabilities(&m.family).unwrap().total() - 1.0).abs() < 1e-9);
        } else {
            prop_assert!(probabilities(&m.family).is_err());
        }
    }

    #[test]
    fn time_reversal_keeps_weights(seed in any::<u64>(), n in 2usize..4, times in 2usize..5) {
        let f = model(seed, n, times).family;
        let r = f.time_reverse();
        let (w, wr) = (weights(&f).unwrap(), weights(&r).unwrap());
        for (h, x) in &w.entries {
            let back = r.history(&h.reversed().labels()).unwrap();
            prop_assert!((wr.get(&back).unwrap() - x).abs() < 1e-10);
        }
        let opts = ConsistencyOptions::default();
        prop_assert_eq!(
            consistency_check(&f, &opts).unwrap().consistent,
            consistency_check(&r, &opts).unwrap().consistent
        );
    }

    #[test]
    fn reference_time_is_immaterial(seed in any::<u64>(), times in 2usize..5) {
        let f = model(seed, 3, times).family;
        let w = weights(&f).unwrap();
        for k in 0..times {
            let g = weights(&f.with_reference(k).unwrap()).unwrap();
            for (h, x) in &w.entries {
                prop_assert!((g.get(h).unwrap() - x).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn extension_is_a_compatible_refinement(seed in any::<u64>(), extra in 0.1f64..0.9) {
        // one slot after a pure state: always consistent
        let f = model(seed, 3, 2).family;
        let g = extend(&f, &[extra]).unwrap();
        let v = common_refinement(&f, &g).unwrap();
        prop_assert!(v.compatible, "{}", v.classification);
        let (wf, wg) = (weights(&f).unwrap(), weights(&g).unwrap());
        prop_assert!((wf.total() - wg.total()).abs() < 1e-10);
    }

    #[test]
    fn propagators_compose(seed in any::<u64>(), times in 3usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let steps = (1..times).map(|_| unitary(&mut rng, 3)).collect();
        let p = PropagatorSet::new("L", TimeGrid::uniform(times), steps).unwrap();
        let (a, b, c) = (0, times / 2, times - 1);
        let composed = &p.propagator(c, b).unwrap() * &p.propagator(b, a).unwrap();
        prop_assert!(composed.approx_eq(&p.propagator(c, a).unwrap(), 1e-10));
        let back = &p.propagator(a, c).unwrap() * &p.propagator(c, a).unwrap();
        prop_assert!(back.approx_eq(&Operator::identity(3), 1e-10));
    }

    #[test]
    fn boosts_preserve_interval_class(
        x1 in -100.0f64..100.0, t1 in -100.0f64..100.0,
        x2 in -100.0f64..100.0, t2 in -100.0f64..100.0,
        v in -0.9f64..0.9,
    ) {
        let (p, q) = (SpacetimePoint::new(x1, t1).unwrap(), SpacetimePoint::new(x2, t2).unwrap());
        let (bp, bq) = (boost(&p, v).unwrap(), boost(&q, v).unwrap());
        prop_assert!((p.interval(&q) - bp.interval(&bq)).abs() < 1e-8);
        prop_assert_eq!(classify_interval(&p, &q), classify_interval(&bp, &bq));
    }

    #[test]
    fn light_rays_stay_lightlike(x in -50i32..50, t in -50i32..50, d in 1i32..40, v in -0.9f64..0.9) {
        let p = SpacetimePoint::new(x as f64, t as f64).unwrap();
        let q = SpacetimePoint::new((x + d) as f64, (t + d) as f64).unwrap();
        prop_assert_eq!(classify_interval(&p, &q), IntervalKind::Lightlike);
        let moved = (boost(&p, v).unwrap(), boost(&q, v).unwrap());
        prop_assert!(moved.0.interval(&moved.1).abs() < 1e-9);
    }

    #[test]
    fn famspec_round_trip_of_random_models(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut text = format!("space S dim {n}\n");
        let raw: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<String> = raw.iter().map(|z| format!("{:e}{:+e}i", z.re / norm, z.im / norm)).collect();
        text += &format!("ket psi in S = [{}]\n", amps.join(", "));
        let u = unitary(&mut rng, n);
        let rows: Vec<String> = (0..n)
            .map(|i| {
                let cells: Vec<String> = (0..n).map(|j| {
                    let z = u.entry(i, j);
                    format!("{:e}{:+e}i", z.re, z.im)
                }).collect();
                format!("[{}]", cells.join(" "))
            })
            .collect();
        text += &format!("unitary U on S = [{}]\n", rows.join(" "));
        for k in 0..n {
            let mut e = vec!["0"; n];
            e[k] = "1";
            text += &format!("ket e{k} in S = [{}]\nproj P{k} on S = span(e{k})\n", e.join(", "));
        }
        let members: Vec<String> = (0..n).map(|k| format!("P{k}")).collect();
        text += &format!("decomp D on S = {{{}}}\ntimes T = [0, 1, 2]\n", members.join(", "));
        text += "family F times T initial psi {\n at 1: D\n at 2: D\n} steps { U U }\n";
        let doc = parse(&text).map_err(|d| TestCaseError::fail(d.to_string()))?;
        let once = serialize(&doc);
        let again = parse(&once).unwrap();
        prop_assert_eq!(serialize(&again), once.clone());
        prop_assert!(doc.approx_eq(&again, 1e-12));
        let (w1, w2) = (weights(doc.family("F").unwrap()).unwrap(), weights(again.family("F").unwrap()).unwrap());
        for ((_, a), (_, b)) in w1.entries.iter().zip(&w2.entries) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parser_is_total(text in "\\PC{0,200}") {
        let _ = parse(&text);
    }

    #[test]
    fn label_components_match(a in "[a-z]{1,4}", b in "[a-z]{1,4}", c in "[a-z]{1,4}") {
        let joined = format!("{a}.{b}&{c}");
        prop_assert!(label_matches(&joined, &a));
        prop_assert!(label_matches(&joined, &b));
        prop_assert!(label_matches(&joined, &c));
        prop_assert!(label_matches(&joined, &joined));
        let other = format!("{a}{b}{c}x");
        prop_assert!(!label_matches(&joined, &other));
    }
}
