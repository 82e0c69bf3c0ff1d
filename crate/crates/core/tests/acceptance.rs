//! End-to-end acceptance suite. Runs without the libtest harness so that one
//! PASS/FAIL line per criterion is always printed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relhist::famspec::{export, parse, serialize};
use relhist::framework::{common_refinement, extend, Classification};
use relhist::histories::{
    conditional_probability, consistency_check, predicate_probability, probabilities, support, weights,
    ConsistencyOptions, Family, Predicate,
};
use relhist::hilbert::Operator;
use relhist::relativistic::{
    boost, classify_interval, commutation_check, covariance_check, embed_events, validate_foliation, Commutation,
    CovarianceMap, Region, SpacetimePoint, TaggedEvent,
};
use relhist::scenarios::{build, build_epr, build_hardy, build_spin_half, build_wavepacket_default, SCENARIO_NAMES};
use relhist::Error;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn q(s: &str) -> Predicate {
    Predicate::parse(s).expect("predicate")
}

fn near(x: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure!((x - want).abs() <= tol, "{what}: got {x:.17e}, want {want} ± {tol:e}");
    Ok(())
}

fn e<T>(r: relhist::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn opts() -> ConsistencyOptions {
    ConsistencyOptions::default()
}

fn c1_hardy_joint_detection() -> Check {
    let scn = e(build_hardy(false))?;
    let p = e(predicate_probability(e(scn.family("unitary-output"))?, &q("t2=e.ebar")))?;
    near(p, 1.0 / 12.0, 1e-9, "Pr(e, ebar)")?;
    // independent oracle: amplitude of e⊗ebar in BS⊗BS ψ0 is −1/(2√3)
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = 1.0 / 3f64.sqrt();
    let psi0 = [s3, s3, s3, 0.0];
    let bs = [[h, -h], [h, h]];
    let mut amp = 0.0;
    for (i, &a) in psi0.iter().enumerate() {
        amp += bs[0][i / 2] * bs[0][i % 2] * a;
    }
    near(amp * amp, 1.0 / 12.0, 1e-12, "hand amplitude")?;
    Ok(format!("Pr(e, ebar) = {p:.17e}"))
}

fn c2_hardy_inferences() -> Check {
    let scn = e(build_hardy(false))?;
    let a = e(conditional_probability(e(scn.family("inference-ebar"))?, &q("tm=d"), &q("tm=ebar")))?;
    let b = e(conditional_probability(e(scn.family("inference-e"))?, &q("tm=dbar"), &q("tm=e")))?;
    let dd = e(predicate_probability(e(scn.family("arm-pair"))?, &q("t1=d.dbar")))?;
    near(a, 1.0, 1e-9, "Pr(d | ebar) in L'")?;
    near(b, 1.0, 1e-9, "Pr(dbar | e) in L''")?;
    near(dd, 0.0, 1e-12, "Pr(d, dbar)")?;
    Ok(format!("Pr(d|ebar) = {a}, Pr(dbar|e) = {b}, Pr(d,dbar) = {dd:e}"))
}

fn c3_hardy_blocker() -> Check {
    let scn = e(build_hardy(false))?;
    let f = e(scn.family("forbidden"))?;
    let r = e(consistency_check(f, &opts()))?;
    ensure!(!r.consistent, "forbidden family reported consistent");
    ensure!(r.max_normalized_overlap > 0.1, "overlap {}", r.max_normalized_overlap);
    ensure!(
        matches!(probabilities(f), Err(Error::InconsistentFamily { .. })),
        "probabilities were not refused"
    );
    Ok(format!("inconsistent, max normalized overlap {:.6}", r.max_normalized_overlap))
}

fn c4_spin_half() -> Check {
    let scn = e(build_spin_half())?;
    let f1 = e(scn.family("F1"))?;
    let s = e(support(f1))?;
    ensure!(s.len() == 2, "F1 support {}", s.len());
    for (h, p) in &s {
        near(*p, 0.5, 1e-9, &h.to_string())?;
    }
    ensure!(!e(consistency_check(e(scn.family("F1-remerge"))?, &opts()))?.consistent, "re-merge consistent");
    let c = e(conditional_probability(e(scn.family("G1"))?, &q("t3=xplus"), &q("t4=Xplus")))?;
    near(c, 1.0, 1e-9, "Pr(x+ | X+)")?;
    Ok(format!("F1 = (1/2, 1/2), re-merge inconsistent, Pr(x+ | X+) = {c}"))
}

fn c5_epr() -> Check {
    let scn = e(build_epr())?;
    let anti = e(predicate_probability(e(scn.family("F1"))?, &q("t1=zplus_a.zminus_b|zminus_a.zplus_b")))?;
    near(anti, 1.0, 1e-9, "anticorrelation")?;
    let f4 = e(scn.family("F4"))?;
    let s = e(support(f4))?;
    ensure!(s.len() == 4, "F4 support {}", s.len());
    for (h, p) in &s {
        near(*p, 0.25, 1e-9, &h.to_string())?;
    }
    for a in ["zplus_a", "zminus_a"] {
        for b in ["xplus_b", "xminus_b"] {
            let c = e(conditional_probability(f4, &q(&format!("t1={b}")), &q(&format!("t1={a}"))))?;
            near(c, 0.5, 1e-9, &format!("Pr({b} | {a})"))?;
        }
    }
    Ok("anticorrelation 1, four histories at 1/4, conditionals 1/2".into())
}

fn c6_wavepacket() -> Check {
    let scn = e(build_wavepacket_default())?;
    let s = e(support(e(scn.family("F1"))?))?;
    ensure!(s.len() == 2, "F1 support {}", s.len());
    near(s[0].1, s[1].1, 1e-12, "equal weights")?;
    near(s[0].1 + s[1].1, 1.0, 1e-9, "total")?;
    // the right-moving packet's interval at t1
    let b = s
        .iter()
        .map(|(h, _)| h.labels()[1].to_string())
        .find(|l| l.starts_with('x') && l[1..].split('-').next().and_then(|n| n.parse::<usize>().ok()) > Some(12))
        .ok_or("no right-moving history")?;
    let c = e(conditional_probability(e(scn.family("G1"))?, &q(&format!("t1={b}")), &q("t2=A")))?;
    near(c, 1.0, 1e-9, "Pr(b trajectory | A untriggered)")?;
    Ok(format!("F1 support {{{}, {}}} at 1/2 each, Pr({b} at t1 | A at t2) = {c}", s[0].0.labels()[1], s[1].0.labels()[1]))
}

fn c7_compatibility() -> Check {
    let scn = e(build_spin_half())?;
    let names = ["F0", "F1", "F2"];
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let v = e(common_refinement(e(scn.family(a))?, e(scn.family(b))?))?;
            ensure!(v.classification == Classification::KinematicIncompatible, "{a}/{b}: {}", v.classification);
        }
    }
    let v = e(common_refinement(e(scn.family("pair-x1"))?, e(scn.family("pair-z2"))?))?;
    ensure!(v.classification == Classification::DynamicIncompatible, "pair: {}", v.classification);
    for n in names {
        let f = e(scn.family(n))?;
        let v = e(common_refinement(f, &e(extend(f, &[2.5, 7.0]))?))?;
        ensure!(v.compatible, "{n} vs extend: {}", v.classification);
        ensure!(e(common_refinement(f, f))?.classification == Classification::Identical, "{n} vs itself");
    }
    Ok("F0/F1/F2 kinematic, pair dynamic, F vs extend(F) compatible".into())
}

fn c8_causality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let scns = [e(build_epr())?, e(build_wavepacket_default())?];
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < 200 {
        let scn = &scns[rng.gen_range(0..2)];
        let grid = scn.default_propagators().grid().labels().to_vec();
        let (a, b) = (&scn.sides()["a"], &scn.sides()["b"]);
        let pick = |rng: &mut ChaCha8Rng, side: &relhist::scenarios::Side, id: &str, sign: i64| {
            let x = sign * rng.gen_range(1..60);
            let t = rng.gen_range(0.0..100.0);
            let p = &side.projectors[rng.gen_range(0..side.projectors.len())];
            let time = &grid[rng.gen_range(0..grid.len())];
            TaggedEvent::local(id, Region::at(x, t)).with_projector(p.clone(), time.clone())
        };
        let ea = pick(&mut rng, a, "ea", -1);
        let eb = pick(&mut rng, b, "eb", 1);
        match e(commutation_check(scn, &ea, &eb))? {
            Commutation::Inapplicable => continue,
            Commutation::Norm(n) => {
                ensure!(n < 1e-12, "{}: [{:?}, {:?}] has norm {n:e}", scn.name(), ea.projector, eb.projector);
                worst = worst.max(n);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} spacelike pairs, max commutator norm {worst:e}"))
}

fn c9_geometry() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let p = e(SpacetimePoint::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)))?;
        let r = e(SpacetimePoint::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)))?;
        let v = rng.gen_range(-0.9..=0.9);
        let (bp, br) = (e(boost(&p, v))?, e(boost(&r, v))?);
        ensure!(classify_interval(&p, &r) == classify_interval(&bp, &br), "sign changed for {p:?} {r:?} at v = {v}");
    }
    let scn = e(build_epr())?;
    let local: Vec<TaggedEvent> = ["a1", "b1", "a'1", "b'1"]
        .iter()
        .map(|id| scn.event(id).cloned())
        .collect::<relhist::Result<_>>()
        .map_err(|e| e.to_string())?;
    let emb = e(embed_events(&local))?;
    ensure!(validate_foliation(&emb.foliation).valid, "invalid foliation");
    let entangled: Vec<TaggedEvent> = ["E1", "E'1"]
        .iter()
        .map(|id| scn.event(id).cloned())
        .collect::<relhist::Result<_>>()
        .map_err(|e| e.to_string())?;
    match embed_events(&entangled) {
        Err(Error::EmbeddingImpossible { entangled, other }) => {
            ensure!(
                (entangled == "E1" && other == "E'1") || (entangled == "E'1" && other == "E1"),
                "witness {entangled} / {other}"
            );
        }
        r => return Err(format!("entangled configuration embedded: {r:?}")),
    }
    Ok(format!("1000 boosted pairs agree, local events ordered {:?}, entangled pair blocked", emb.order))
}

fn phase_permutation(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    let mut perm: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let phases: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    &Operator::diagonal(&phases) * &Operator::permutation(&perm).expect("permutation")
}

fn c10_covariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for name in SCENARIO_NAMES {
        let scn = e(build(name))?;
        let n = scn.default_propagators().grid().len();
        let maps = e(CovarianceMap::new((0..n).map(|_| phase_permutation(&mut rng, scn.dim())).collect()))?;
        let primed = e(scn.relabel(&maps))?;
        let r = e(covariance_check(&scn, &maps, &primed))?;
        ensure!(r.passed, "{name}: covariance failed");
        ensure!(r.max_residual < 1e-10, "{name}: residual {:e}", r.max_residual);
        for f in &r.families {
            ensure!(f.max_weight_change <= 1e-9, "{name}/{}: weight change {:e}", f.family, f.max_weight_change);
            ensure!(f.consistent_before == f.consistent_after, "{name}/{}: verdict changed", f.family);
        }
        worst = worst.max(r.max_residual);
    }
    Ok(format!("four scenarios covariant, max residual {worst:e}"))
}

fn c11_structure() -> Check {
    let mut families = 0;
    for name in SCENARIO_NAMES {
        let scn = e(build(name))?;
        for f in scn.families() {
            let consistent = e(consistency_check(f, &opts()))?.consistent;
            if consistent {
                families += 1;
                near(e(probabilities(f))?.total(), 1.0, 1e-9, &format!("{name}/{} normalization", f.name()))?;
            }
            reversal_and_reference(f).map_err(|m| format!("{name}/{}: {m}", f.name()))?;
        }
        let doc = e(export(&scn))?;
        let text = serialize(&doc);
        let again = parse(&text).map_err(|d| format!("{name}: {d}"))?;
        ensure!(serialize(&again) == text, "{name}: serialization not idempotent");
        for f in scn.families() {
            let g = e(again.family(f.name()))?;
            let (wf, wg) = (e(weights(f))?, e(weights(g))?);
            for ((hf, a), (_, b)) in wf.entries.iter().zip(&wg.entries) {
                near(*b, *a, 1e-9, &format!("{name}/{} round trip {hf}", f.name()))?;
            }
        }
    }
    let crashes = fuzz_parser(10_000);
    ensure!(crashes == 0, "{crashes} parser panics");
    Ok(format!("{families} consistent families normalized; reversal, reference and round trip hold; 10^4 fuzz inputs"))
}

fn reversal_and_reference(f: &Family) -> Result<(), String> {
    let w = e(weights(f))?;
    let r = f.time_reverse();
    let wr = e(weights(&r))?;
    for (h, x) in &w.entries {
        let back = e(r.history(&h.reversed().labels()))?;
        let y = wr.get(&back).ok_or("reversed history missing")?;
        near(y, *x, 1e-9, "time reversal")?;
    }
    for k in 0..f.grid().len() {
        let wg = e(weights(&e(f.with_reference(k))?))?;
        for (h, x) in &w.entries {
            near(wg.get(h).ok_or("history missing")?, *x, 1e-9, &format!("reference {k}"))?;
        }
    }
    Ok(())
}

const TOKENS: &[&str] = &[
    "space", "ket", "proj", "decomp", "unitary", "density", "times", "family", "initial", "at", "steps", "span",
    "sparse", "identity", "as", "on", "in", "dim", "=", "[", "]", "{", "}", "(", ")", ",", ":", "S", "T", "k", "P",
    "D", "F", "U", "0", "1", "2", "0.5", "-1", "1e400", "i", "1+2i", "#", "\n", " ", "é", "\"", "9999999",
];

fn fuzz_parser(n: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let seed = "space S dim 2\nket a in S = [1, 0]\nket b in S = [0, 1]\nproj P on S = span(a)\nproj Q on S = span(b)\n\
                decomp D on S = {P, Q}\ntimes T = [0, 1, 2]\nfamily F times T initial a {\n at 1: D\n} steps { identity identity }\n";
    let prev = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut crashes = 0;
    for i in 0..n {
        let text: String = match i % 3 {
            0 => (0..rng.gen_range(0..60)).map(|_| TOKENS[rng.gen_range(0..TOKENS.len())]).collect::<Vec<_>>().join(" "),
            1 => {
                let mut b = seed.as_bytes().to_vec();
                for _ in 0..rng.gen_range(1..6) {
                    let k = rng.gen_range(0..b.len());
                    match rng.gen_range(0..3) {
                        0 => b[k] = rng.gen(),
                        1 => {
                            b.remove(k);
                        }
                        _ => b.insert(k, TOKENS[rng.gen_range(0..TOKENS.len())].as_bytes()[0]),
                    }
                }
                String::from_utf8_lossy(&b).into_owned()
            }
            _ => (0..rng.gen_range(0..200)).map(|_| rng.gen_range(' '..='~')).collect(),
        };
        if catch_unwind(|| {
            let _ = parse(&text);
        })
        .is_err()
        {
            crashes += 1;
        }
    }
    std::panic::set_hook(prev);
    crashes
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 hardy joint detection", c1_hardy_joint_detection),
        ("2 hardy inferences", c2_hardy_inferences),
        ("3 hardy paradox blocker", c3_hardy_blocker),
        ("4 spin half", c4_spin_half),
        ("5 epr", c5_epr),
        ("6 wave packet", c6_wavepacket),
        ("7 compatibility classes", c7_compatibility),
        ("8 local commutation", c8_causality),
        ("9 relativistic geometry", c9_geometry),
        ("10 covariance", c10_covariance),
        ("11 structural properties", c11_structure),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {name}: PASS ({secs:.2}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.2}s) {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {:.1}s", 11 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
