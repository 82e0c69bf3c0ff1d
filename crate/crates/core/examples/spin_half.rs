//! Spin half measured in the x basis: unitary, x-basis and re-merge families,
//! plus retrodiction from the apparatus outcome.

use relhist::histories::{conditional_probability, consistency_check, probabilities, ConsistencyOptions, Predicate};
use relhist::scenarios::build_spin_half;

fn main() -> relhist::Result<()> {
    let scn = build_spin_half()?;
    for name in ["F0", "F1", "F2", "F1-remerge"] {
        let f = scn.family(name)?;
        let r = consistency_check(f, &ConsistencyOptions::default())?;
        println!("{name}: consistent = {}, max normalized overlap = {:.3e}", r.consistent, r.max_normalized_overlap);
        if r.consistent {
            for (h, p) in probabilities(f)?.sorted_support(1e-12) {
                println!("    {p:.6}  {h}");
            }
        }
    }
    let g1 = scn.family("G1")?;
    let p = conditional_probability(g1, &Predicate::parse("t3=xplus")?, &Predicate::parse("t4=Xplus")?)?;
    println!("Pr(x+ at t3 | X+ at t4) = {p}");
    Ok(())
}
