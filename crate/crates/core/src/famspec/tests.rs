use super::*;
use crate::histories::{predicate_probability, probabilities, Predicate};
use crate::scenarios::{build, SCENARIO_NAMES};

const SPIN: &str = "\
# spin half, z basis kept for three times
space S dim 2
ket z+ in S = [1, 0]
ket z- in S = [0, 1]
proj Zp on S = span(z+)
proj Zm on S = span(z-)
decomp Z on S = {Zp as z+, Zm as z-}
times T = [0, 1, 2, 3]
family F0 times T initial z+ {
  at 1: Z
  at 2: Z
  at 3: identity
} steps { identity identity identity }
";

#[test]
fn minimal_document_matches_hand_built_family() {
    let doc = parse(SPIN).unwrap();
    let f = doc.family("F0").unwrap();
    assert_eq!(f.dim(), 2);
    let p = predicate_probability(f, &Predicate::parse("t2=z+").unwrap()).unwrap();
    assert!((p - 1.0).abs() < 1e-12);
    let w = probabilities(f).unwrap();
    assert_eq!(w.sorted_support(1e-12).len(), 1);
}

#[test]
fn non_unitary_is_reported_with_position() {
    let text = "space S dim 2\n\nunitary U on S = [[1 0] [0 2]]\n";
    let e = parse(text).unwrap_err();
    assert!(e.message.contains("non-unitary"), "{e}");
    assert!(e.message.contains("threshold"));
    assert_eq!((e.line, e.column), (3, 1));
}

#[test]
fn syntax_errors_point_at_the_token() {
    let e = parse("space S dim 2\nket k in S = [1 0]").unwrap_err();
    assert_eq!((e.line, e.column), (2, 17));
    let e = parse("space S dim x").unwrap_err();
    assert_eq!((e.line, e.column), (1, 13));
    let e = parse("space S dim 2\nket k in S = [1, 0").unwrap_err();
    assert!(e.line >= 2);
}

#[test]
fn semantic_errors() {
    let cases = [
        ("ket k in S = [1]", "undefined space"),
        ("space S dim 2\nket k in S = [1, 0, 0]", "dimension mismatch"),
        ("space S dim 2\nproj P on S = [[1 0] [0 0.5]]", "projector"),
        (
            "space S dim 2\nket a in S = [1, 0]\nproj P on S = span(a)\ndecomp D on S = {P}",
            "incomplete",
        ),
        ("space S dim 2\nspace S dim 3", "duplicate"),
        ("times T = [1, 0]", "times"),
        ("space S dim 0", "dimension"),
        ("space S dim 2\nunitary U on S = sparse { 5 0 1 }", "outside"),
        ("times T = [0, 1]\nfamily F times T { } steps { identity }", "infer the space"),
    ];
    for (text, needle) in cases {
        let e = parse(text).unwrap_err();
        assert!(e.message.contains(needle), "{text:?}: {e}");
        assert!(e.line >= 1 && e.column >= 1);
    }
}

#[test]
fn empty_document_is_header_only() {
    let doc = parse("# nothing here\n").unwrap();
    assert_eq!(serialize(&doc), serialize::HEADER);
    assert!(parse("").unwrap().families().is_empty());
}

#[test]
fn roundtrip_is_exact_and_idempotent() {
    let doc = parse(SPIN).unwrap();
    let s1 = serialize(&doc);
    let back = parse(&s1).unwrap();
    assert!(doc.approx_eq(&back, 1e-15));
    assert_eq!(serialize(&back), s1);
}

#[test]
fn complex_and_sparse_roundtrip() {
    let text = "space S dim 2\nunitary U on S = [[0.6 0.8i] [0.8i 0.6]]\nunitary P on S = sparse { 0 1 1 1 0 1 }\n\
                density rho on S = [[0.5 0] [0 0.5]]\n";
    let doc = parse(text).unwrap();
    let s = serialize(&doc);
    let back = parse(&s).unwrap();
    assert!(doc.approx_eq(&back, 1e-15));
    assert_eq!(serialize(&back), s);
}

/// Hardy's interferometers written out by hand.
const HARDY: &str = "\
space AB dim 4
ket psi0 in AB = [0.57735026918962573, 0.57735026918962573, 0.57735026918962573, 0]
unitary BS2 on AB = [
  [0.5 -0.5 -0.5 0.5]
  [0.5 0.5 -0.5 -0.5]
  [0.5 -0.5 0.5 -0.5]
  [0.5 0.5 0.5 0.5]
]
proj ee on AB = [[1 0 0 0] [0 0 0 0] [0 0 0 0] [0 0 0 0]]
proj ef on AB = [[0 0 0 0] [0 1 0 0] [0 0 0 0] [0 0 0 0]]
proj fe on AB = [[0 0 0 0] [0 0 0 0] [0 0 1 0] [0 0 0 0]]
proj ff on AB = [[0 0 0 0] [0 0 0 0] [0 0 0 0] [0 0 0 1]]
decomp out on AB = {ee as e.ebar, ef as e.fbar, fe as f.ebar, ff as f.fbar}
times T = [0, 1, 2]
family unitary-output times T initial psi0 { at 2: out } steps { identity BS2 }
";

#[test]
fn hardy_document_gives_one_twelfth() {
    let doc = parse(HARDY).unwrap();
    let back = parse(&serialize(&doc)).unwrap();
    for d in [&doc, &back] {
        let p = predicate_probability(d.family("unitary-output").unwrap(), &Predicate::parse("t2=e.ebar").unwrap())
            .unwrap();
        assert!((p - 1.0 / 12.0).abs() < 1e-9, "{p}");
    }
}

#[test]
fn scenario_exports_reproduce_weights() {
    for name in SCENARIO_NAMES {
        let scn = build(name).unwrap();
        let doc = export(&scn).unwrap();
        let text = serialize(&doc);
        let back = parse(&text).unwrap();
        assert!(doc.approx_eq(&back, 1e-15), "{name}");
        assert_eq!(serialize(&back), text, "{name}");
        for f in scn.families() {
            let g = back.family(f.name()).unwrap();
            let (wf, wg) = (crate::histories::weights(f).unwrap(), crate::histories::weights(g).unwrap());
            for h in f.histories() {
                let a = wf.get(&h).unwrap_or(0.0);
                let b = wg.by_labels(&h.labels()).unwrap_or(0.0);
                assert!((a - b).abs() < 1e-12, "{name}/{}: {h}", f.name());
            }
        }
    }
}
