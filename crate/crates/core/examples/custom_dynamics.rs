//! A family built from scratch: a qubit precessing under a Hamiltonian,
//! histories in the z basis at three times.

use relhist::dynamics::{Hamiltonian, PropagatorSet, TimeGrid};
use relhist::histories::{consistency_check, probabilities, ConsistencyOptions, Family};
use relhist::hilbert::{DecompositionOfIdentity, Ket, Operator, Projector};
use std::sync::Arc;

fn main() -> relhist::Result<()> {
    let sx = Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])?;
    let grid = TimeGrid::from_values(vec![0.0, 0.4, 0.8, 1.2])?;
    let props = Arc::new(PropagatorSet::from_hamiltonian("precession", grid, Hamiltonian::new(sx)?));

    let up = Ket::basis(2, 0);
    let z = DecompositionOfIdentity::from_labelled(vec![
        ("up", Projector::from_ket(&up)?),
        ("down", Projector::from_ket(&Ket::basis(2, 1))?),
    ])?;
    let mut b = Family::builder("z-histories", props.clone()).initial_pure("up", up.clone());
    for t in ["t1", "t2", "t3"] {
        b = b.at(t, z.clone());
    }
    let f = b.build()?;
    let r = consistency_check(&f, &ConsistencyOptions::default())?;
    println!("z at every step: consistent = {}, max normalized overlap {:.3}", r.consistent, r.max_normalized_overlap);

    let only_last = Family::builder("z-final", props).initial_pure("up", up).at("t3", z).build()?;
    for (h, p) in probabilities(&only_last)?.sorted_support(1e-12) {
        println!("{p:.6}  {h}");
    }
    println!("cos^2(1.2) = {:.6}", 1.2f64.cos().powi(2));
    Ok(())
}
