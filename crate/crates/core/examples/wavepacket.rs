//! A particle split into two wave packets, with a detector on each side.
//! Shows the two-history support of F1 and the inference from a silent
//! detector.

use relhist::histories::{conditional_probability, support, Predicate};
use relhist::scenarios::{build_wavepacket, WavepacketGeometry};

fn main() -> relhist::Result<()> {
    let geometry = WavepacketGeometry::default();
    let scn = build_wavepacket(&geometry)?;
    println!("{} cells, Hilbert space dimension {}", geometry.n_cells, scn.dim());

    let f1 = scn.family("F1")?;
    for (h, p) in support(f1)? {
        println!("F1  {p:.3}  {h}");
    }

    let g1 = scn.family("G1")?;
    let b_label = support(f1)?
        .iter()
        .map(|(h, _)| h.labels()[1].to_string())
        .find(|l| {
            let lo: usize = l[1..].split('-').next().and_then(|s| s.parse().ok()).unwrap_or(0);
            lo > geometry.source
        })
        .expect("one packet moves right");
    let p = conditional_probability(g1, &Predicate::parse(&format!("t1={b_label}"))?, &Predicate::parse("t2=A")?)?;
    println!("Pr(packet in {b_label} at t1 | A silent at t2) = {p}");

    for o in scn.run_expectations() {
        println!("[{}] {:<5} {}", o.provenance.as_str(), if o.passed { "ok" } else { "FAIL" }, o.description);
    }
    Ok(())
}
