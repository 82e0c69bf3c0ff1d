//! Hardy's interferometers: the joint dark-port probability, the two
//! single-frame inferences, and the family that would combine them.

use relhist::histories::{conditional_probability, consistency_check, predicate_probability, ConsistencyOptions, Predicate};
use relhist::scenarios::build_hardy;

fn main() -> relhist::Result<()> {
    let scn = build_hardy(false)?;
    let q = |s: &str| Predicate::parse(s);

    let p = predicate_probability(scn.family("unitary-output")?, &q("t2=e.ebar")?)?;
    println!("Pr(e and ebar) = {p:.12} (1/12 = {:.12})", 1.0 / 12.0);

    let lp = conditional_probability(scn.family("inference-ebar")?, &q("tm=d")?, &q("tm=ebar")?)?;
    let lpp = conditional_probability(scn.family("inference-e")?, &q("tm=dbar")?, &q("tm=e")?)?;
    println!("frame L':  Pr(d | ebar) = {lp}");
    println!("frame L'': Pr(dbar | e) = {lpp}");
    let dd = predicate_probability(scn.family("arm-pair")?, &q("t1=d.dbar")?)?;
    println!("Pr(d and dbar at t1) = {dd}");

    let r = consistency_check(scn.family("forbidden")?, &ConsistencyOptions::default())?;
    println!(
        "arm at t1 with output port at t2: consistent = {}, max normalized overlap = {:.4}",
        r.consistent, r.max_normalized_overlap
    );

    let det = build_hardy(true)?;
    let pd = predicate_probability(det.family("detector-output")?, &q("t3=E.Ebar")?)?;
    println!("with detectors, Pr(E and Ebar) = {pd:.12}");
    Ok(())
}
