//! Writes a model in the family-specification language, evaluates it, and
//! round-trips a built-in scenario through the serializer.

use relhist::famspec::{export, parse, serialize};
use relhist::histories::{predicate_probability, Predicate};
use relhist::scenarios::build_spin_half;

const MODEL: &str = "\
space S dim 2
ket up in S = [1, 0]
ket down in S = [0, 1]
ket plus in S = [0.70710678118654752, 0.70710678118654752]
ket minus in S = [0.70710678118654752, -0.70710678118654752]
proj Px on S = span(plus)
proj Mx on S = span(minus)
decomp X on S = {Px as xplus, Mx as xminus}
times T = [0, 1, 2]
family F times T initial up {
  at 1: X
  at 2: X
} steps { identity identity }
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = parse(MODEL)?;
    let f = doc.family("F")?;
    let p = predicate_probability(f, &Predicate::parse("t1=xplus,t2=xplus")?)?;
    println!("Pr(x+ at t1 and t2) = {p}");

    let text = serialize(&doc);
    println!("canonical form:\n{text}");
    assert_eq!(serialize(&parse(&text)?), text);

    let exported = serialize(&export(&build_spin_half()?)?);
    let back = parse(&exported)?;
    println!(
        "spin-half exported to {} lines with {} families",
        exported.lines().count(),
        back.families().len()
    );
    Ok(())
}
