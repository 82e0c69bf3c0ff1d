//! Singlet correlations: perfect z anticorrelation, independence of an x
//! measurement on b from a z measurement on a.

use relhist::histories::{conditional_probability, predicate_probability, probabilities, Predicate};
use relhist::scenarios::build_epr;

fn main() -> relhist::Result<()> {
    let scn = build_epr()?;
    let f1 = scn.family("F1")?;
    let anti = predicate_probability(f1, &Predicate::parse("t1=zplus_a.zminus_b|zminus_a.zplus_b")?)?;
    println!("F1: Pr(S_bz = -S_az) = {anti}");

    let f4 = scn.family("F4")?;
    for (h, p) in probabilities(f4)?.sorted_support(1e-12) {
        println!("F4  {p:.3}  {}", h.labels()[1]);
    }
    for (a, b) in [("zplus_a", "xplus_b"), ("zminus_a", "xminus_b")] {
        let p = conditional_probability(f4, &Predicate::parse(&format!("t1={b}"))?, &Predicate::parse(&format!("t1={a}"))?)?;
        println!("Pr({b} | {a}) = {p}");
    }
    Ok(())
}
