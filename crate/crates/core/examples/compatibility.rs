//! Classifies pairs of families: identical, refinement, kinematic and
//! dynamic incompatibility.

use relhist::framework::{common_refinement, extend, Witness};
use relhist::scenarios::build_spin_half;

fn main() -> relhist::Result<()> {
    let scn = build_spin_half()?;
    let fam = |n: &str| scn.family(n);
    let f1 = fam("F1")?;
    let pairs = [
        ("F0", fam("F0")?.clone(), "F1", f1.clone()),
        ("F1", f1.clone(), "F2", fam("F2")?.clone()),
        ("F1", f1.clone(), "F1", f1.clone()),
        ("F1", f1.clone(), "extend(F1)", extend(f1, &[2.5])?),
        ("pair-x1", fam("pair-x1")?.clone(), "pair-z2", fam("pair-z2")?.clone()),
    ];
    for (na, a, nb, b) in pairs {
        let v = common_refinement(&a, &b)?;
        print!("{na:>8} vs {nb:<11} {}", v.classification);
        match v.witness {
            Some(Witness::Kinematic { time, left, right, commutator_norm }) => {
                print!("  ([{left}, {right}] at {time}, norm {commutator_norm:.3})")
            }
            Some(Witness::Dynamic(r)) => print!("  (product family overlap {:.3})", r.max_normalized_overlap),
            None => {}
        }
        println!();
    }
    Ok(())
}
