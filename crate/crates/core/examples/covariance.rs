//! Relabels a scenario by time-dependent unitaries and checks that the
//! propagators, weights and consistency verdicts transform covariantly;
//! then checks that spacelike local events commute.

use num_complex::Complex64;
use relhist::hilbert::Operator;
use relhist::relativistic::{commutation_check, covariance_check, CovarianceMap};
use relhist::scenarios::build;

fn phase_permutation(dim: usize, shift: usize, phase: f64) -> relhist::Result<Operator> {
    let perm: Vec<usize> = (0..dim).map(|i| (i + shift) % dim).collect();
    let phases: Vec<Complex64> = (0..dim).map(|i| Complex64::from_polar(1.0, phase * i as f64)).collect();
    Ok(&Operator::diagonal(&phases) * &Operator::permutation(&perm)?)
}

fn main() -> relhist::Result<()> {
    for name in ["spin-half", "epr", "hardy"] {
        let scn = build(name)?;
        let n = scn.default_propagators().grid().len();
        let maps = CovarianceMap::new((0..n).map(|j| phase_permutation(scn.dim(), j + 1, 0.2 * j as f64)).collect::<relhist::Result<_>>()?)?;
        let primed = scn.relabel(&maps)?;
        let r = covariance_check(&scn, &maps, &primed)?;
        let dw = r.families.iter().map(|f| f.max_weight_change).fold(0.0, f64::max);
        println!("{name:>9}: passed = {}, max residual {:.2e}, max weight change {dw:.2e}", r.passed, r.max_residual);
    }

    let epr = build("epr")?;
    let (a, b) = (epr.event("a1")?, epr.event("b1")?);
    println!("[a1, b1] in the Heisenberg picture: {:?}", commutation_check(&epr, a, b)?);
    Ok(())
}
