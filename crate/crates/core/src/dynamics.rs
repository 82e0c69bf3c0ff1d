//! Time grids, unitary propagators and the Heisenberg picture.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{check_dims, Operator, Projector, TOL_PROJ, TOL_UNITARY};

/// Strictly increasing sequence of labelled times `t₀ < t₁ < ⋯ < t_f`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl TimeGrid {
    pub fn new<S: Into<String>>(labels: Vec<S>, values: Vec<f64>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(Error::InvalidGrid("at least one time required".into()));
        }
        if labels.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} labels for {} times",
                labels.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("time grid"));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "times not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels, values })
    }

    /// Grid labelled `t0, t1, …`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let labels = (0..values.len()).map(|i| format!("t{i}")).collect();
        Self::new(labels, values)
    }

    /// `t0..t{n-1}` at `0, 1, …, n−1`.
    pub fn uniform(n: usize) -> Self {
        Self::from_values((0..n).map(|i| i as f64).collect()).expect("uniform grid is valid")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self, j: usize) -> &str {
        &self.labels[j]
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn index_of_label(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownTime(label.to_string()))
    }

    pub fn index_of_value(&self, value: f64) -> Option<usize> {
        self.values.iter().position(|&v| v == value)
    }

    /// Resolves either a label or a numeric time value.
    pub fn resolve(&self, key: &str) -> Result<usize> {
        if let Ok(j) = self.index_of_label(key) {
            return Ok(j);
        }
        key.parse::<f64>()
            .ok()
            .and_then(|v| self.index_of_value(v))
            .ok_or_else(|| Error::UnknownTime(key.to_string()))
    }

    pub(crate) fn check_index(&self, j: usize) -> Result<()> {
        if j < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: j,
                len: self.len(),
            })
        }
    }

    /// Negated, reversed grid used for time reversal.
    pub fn reversed(&self) -> Self {
        Self {
            labels: self.labels.iter().rev().cloned().collect(),
            values: self.values.iter().rev().map(|v| -v).collect(),
        }
    }
}

/// Hermitian generator of a time-independent evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    op: Operator,
}

impl Hamiltonian {
    pub fn new(op: Operator) -> Result<Self> {
        let d = op.hermiticity_defect();
        if d >= TOL_PROJ {
            return Err(Error::NotHermitian(d));
        }
        Ok(Self { op })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

/// `exp[−i (t_to − t_from) H]` with ℏ = 1, via eigendecomposition.
pub fn propagator_from_hamiltonian(h: &Hamiltonian, t_to: f64, t_from: f64) -> Operator {
    let m = h.op.matrix();
    let sym = (m + m.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(sym);
    let dt = t_to - t_from;
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|l| Complex64::from_polar(1.0, -dt * l)),
    );
    Operator::new(v * phases * v.adjoint()).expect("exponential of a finite Hermitian matrix")
}

/// Per-step unitaries `T(t_{j+1}, t_j)` on a grid, composed on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorSet {
    name: String,
    grid: TimeGrid,
    steps: Vec<Operator>,
    generator: Option<Hamiltonian>,
}

impl PropagatorSet {
    pub fn new(name: impl Into<String>, grid: TimeGrid, steps: Vec<Operator>) -> Result<Self> {
        if steps.len() + 1 != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} steps for a grid of {} times",
                steps.len(),
                grid.len()
            )));
        }
        if let Some(first) = steps.first() {
            for s in &steps {
                check_dims(first.dim(), s.dim())?;
                let defect = s.unitarity_defect();
                if defect > TOL_UNITARY {
                    return Err(Error::NotUnitary {
                        defect,
                        threshold: TOL_UNITARY,
                    });
                }
            }
        }
        Ok(Self {
            name: name.into(),
            grid,
            steps,
            generator: None,
        })
    }

    /// Single-time grid; needs the dimension explicitly since it has no steps.
    pub fn single(name: impl Into<String>, grid: TimeGrid, dim: usize) -> Result<Self> {
        if grid.len() != 1 {
            return Err(Error::InvalidGrid("single() takes a one-time grid".into()));
        }
        Ok(Self {
            name: name.into(),
            grid,
            steps: vec![],
            generator: Some(Hamiltonian::new(Operator::zeros(dim))?),
        })
    }

    /// All steps the identity.
    pub fn trivial(name: impl Into<String>, grid: TimeGrid, dim: usize) -> Self {
        let n = grid.len();
        Self {
            name: name.into(),
            grid,
            steps: vec![Operator::identity(dim); n - 1],
            generator: Some(Hamiltonian {
                op: Operator::zeros(dim),
            }),
        }
    }

    pub fn from_hamiltonian(name: impl Into<String>, grid: TimeGrid, h: Hamiltonian) -> Self {
        let steps = grid
            .values()
            .windows(2)
            .map(|w| propagator_from_hamiltonian(&h, w[1], w[0]))
            .collect();
        Self {
            name: name.into(),
            grid,
            steps,
            generator: Some(h),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn steps(&self) -> &[Operator] {
        &self.steps
    }

    pub fn generator(&self) -> Option<&Hamiltonian> {
        self.generator.as_ref()
    }

    pub fn dim(&self) -> usize {
        match (self.steps.first(), &self.generator) {
            (Some(s), _) => s.dim(),
            (None, Some(h)) => h.dim(),
            (None, None) => unreachable!("propagator set without dimension"),
        }
    }

    /// Per-time dimensions; equal at every time in this engine.
    pub fn dims(&self) -> Vec<usize> {
        vec![self.dim(); self.grid.len()]
    }

    /// `T(t_j, t_k)`.
    pub fn propagator(&self, j: usize, k: usize) -> Result<Operator> {
        self.grid.check_index(j)?;
        self.grid.check_index(k)?;
        if j >= k {
            let mut acc = Operator::identity(self.dim());
            for s in &self.steps[k..j] {
                acc = s * &acc;
            }
            Ok(acc)
        } else {
            Ok(self.propagator(k, j)?.adjoint())
        }
    }

    /// `T(t_r, t_j) P T(t_j, t_r)`.
    pub fn heisenberg(&self, p: &Projector, j: usize, r: usize) -> Result<Projector> {
        check_dims(self.dim(), p.dim())?;
        p.conjugate_by(&self.propagator(r, j)?)
    }

    /// Inserts a time into the grid.
    ///
    /// With a generator the new steps are exponentials; otherwise the
    /// evolution of the enclosing interval happens after the new time.
    pub fn insert_time(&self, value: f64, label: impl Into<String>) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        if self.grid.index_of_value(value).is_some() {
            return Err(Error::DuplicateTime(value));
        }
        let label = label.into();
        let pos = self.grid.values().iter().filter(|&&v| v < value).count();
        let mut labels = self.grid.labels().to_vec();
        let mut values = self.grid.values().to_vec();
        labels.insert(pos, label);
        values.insert(pos, value);
        let grid = TimeGrid::new(labels, values)?;
        if let Some(h) = &self.generator {
            return Ok(Self::from_hamiltonian(self.name.clone(), grid, h.clone()));
        }
        let id = Operator::identity(self.dim());
        let mut steps = self.steps.clone();
        if pos == 0 || pos == self.grid.len() {
            steps.insert(if pos == 0 { 0 } else { steps.len() }, id);
        } else {
            // old step pos-1 covered t_{pos-1} -> t_pos; now t_{pos-1} -> new -> t_pos
            steps.insert(pos - 1, id);
        }
        Ok(Self {
            name: self.name.clone(),
            grid,
            steps,
            generator: None,
        })
    }

    /// Time-reversed dynamics on the reversed grid.
    pub fn reversed(&self) -> Self {
        Self {
            name: self.name.clone(),
            grid: self.grid.reversed(),
            steps: self.steps.iter().rev().map(Operator::adjoint).collect(),
            generator: self.generator.as_ref().map(|h| Hamiltonian {
                op: h.op.scale(Complex64::new(-1.0, 0.0)),
            }),
        }
    }

    /// Relabelled dynamics `L_{j+1} S_j L_j†`.
    pub fn transform(&self, maps: &[Operator]) -> Result<Self> {
        if maps.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                found: maps.len(),
            });
        }
        let steps = self
            .steps
            .iter()
            .enumerate()
            .map(|(j, s)| {
                check_dims(s.dim(), maps[j].dim())?;
                Ok(&(&maps[j + 1] * s) * &maps[j].adjoint())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: self.name.clone(),
            grid: self.grid.clone(),
            steps,
            generator: None,
        })
    }

    /// Same grid values and step unitaries within `tol`.
    pub fn same_dynamics(&self, other: &PropagatorSet, tol: f64) -> bool {
        self.grid.values() == other.grid.values()
            && self.dim() == other.dim()
            && self
                .steps
                .iter()
                .zip(&other.steps)
                .all(|(a, b)| a.approx_eq(b, tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{is_projector, re, Ket};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Hamiltonian {
        let a = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        Hamiltonian::new(Operator::new(&a + a.adjoint()).unwrap()).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Operator {
        let h = random_hermitian(rng, n);
        propagator_from_hamiltonian(&h, rng.gen_range(0.1..3.0), 0.0)
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(TimeGrid::from_values(vec![]).is_err());
        assert!(TimeGrid::from_values(vec![0.0, 0.0]).is_err());
        assert!(TimeGrid::from_values(vec![1.0, 0.0]).is_err());
        assert!(TimeGrid::new(vec!["a", "a"], vec![0.0, 1.0]).is_err());
        assert!(TimeGrid::from_values(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn hamiltonian_propagators() {
        let zero = Hamiltonian::new(Operator::zeros(3)).unwrap();
        assert!(propagator_from_hamiltonian(&zero, 5.0, 1.0).approx_eq(&Operator::identity(3), 1e-15));

        let sz = Hamiltonian::new(Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()).unwrap();
        let u = propagator_from_hamiltonian(&sz, std::f64::consts::PI, 0.0);
        let expected = Operator::diagonal(&[
            Complex64::from_polar(1.0, -std::f64::consts::PI),
            Complex64::from_polar(1.0, std::f64::consts::PI),
        ]);
        assert!(u.approx_eq(&expected, 1e-12));
        assert!(u.approx_eq(&Operator::identity(2).scale(re(-1.0)), 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 3);
            let (t0, t1, t2) = (0.3, 1.1, 2.6);
            let lhs = &propagator_from_hamiltonian(&h, t2, t1) * &propagator_from_hamiltonian(&h, t1, t0);
            assert!(lhs.approx_eq(&propagator_from_hamiltonian(&h, t2, t0), 1e-10));
        }
        let nh = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(Hamiltonian::new(nh), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn groupoid_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let grid = TimeGrid::uniform(6);
        let steps = (0..5).map(|_| random_unitary(&mut rng, 3)).collect();
        let ps = PropagatorSet::new("L", grid, steps).unwrap();
        for i in 0..6 {
            assert!(ps.propagator(i, i).unwrap().approx_eq(&Operator::identity(3), 1e-10));
            for j in 0..6 {
                let tij = ps.propagator(i, j).unwrap();
                assert!(tij.adjoint().approx_eq(&ps.propagator(j, i).unwrap(), 1e-10));
                for k in 0..6 {
                    let lhs = &tij * &ps.propagator(j, k).unwrap();
                    assert!(lhs.approx_eq(&ps.propagator(i, k).unwrap(), 1e-10));
                }
            }
        }
        let direct = &ps.steps()[1] * &ps.steps()[0];
        assert!(ps.propagator(2, 0).unwrap().approx_eq(&direct, 1e-15));
        assert!(ps.propagator(0, 6).is_err());
    }

    #[test]
    fn heisenberg_cases() {
        let p = Projector::from_ket(&Ket::from_real(&[1.0, 0.0]).unwrap()).unwrap();
        let trivial = PropagatorSet::trivial("L", TimeGrid::uniform(3), 2);
        assert!(trivial.heisenberg(&p, 2, 0).unwrap().operator().approx_eq(p.operator(), 1e-15));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let had = Operator::from_real_rows(&[&[s, s], &[s, -s]]).unwrap();
        let ps = PropagatorSet::new("L", TimeGrid::uniform(2), vec![had.clone()]).unwrap();
        // T(0,1) z+ T(1,0) = H† z+ H
        let got = ps.heisenberg(&p, 1, 0).unwrap();
        let xplus = Projector::from_ket(&Ket::from_real(&[s, s]).unwrap()).unwrap();
        let manual = &(&had.adjoint() * p.operator()) * &had;
        assert!(got.operator().approx_eq(&manual, 1e-15));
        assert!(got.operator().approx_eq(xplus.operator(), 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let steps = (0..2).map(|_| random_unitary(&mut rng, 3)).collect();
            let ps = PropagatorSet::new("L", TimeGrid::uniform(3), steps).unwrap();
            let k = Ket::new((0..3).map(|_| Complex64::new(rng.gen(), rng.gen())).collect()).unwrap();
            let p = Projector::from_ket(&k).unwrap();
            let h = ps.heisenberg(&p, 2, 0).unwrap();
            assert!(is_projector(h.operator(), TOL_PROJ).is_projector);
            assert!((h.operator().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn insert_time_keeps_composite_propagators() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let steps = (0..2).map(|_| random_unitary(&mut rng, 2)).collect();
        let ps = PropagatorSet::new("L", TimeGrid::uniform(3), steps).unwrap();
        let ext = ps.insert_time(1.5, "mid").unwrap();
        assert_eq!(ext.grid().len(), 4);
        assert!(ext.propagator(3, 0).unwrap().approx_eq(&ps.propagator(2, 0).unwrap(), 1e-12));
        assert!(ext.propagator(1, 0).unwrap().approx_eq(&ps.propagator(1, 0).unwrap(), 1e-12));
        assert!(matches!(ps.insert_time(1.0, "x"), Err(Error::DuplicateTime(_))));
        let before = ps.insert_time(-1.0, "pre").unwrap();
        assert!(before.propagator(3, 1).unwrap().approx_eq(&ps.propagator(2, 0).unwrap(), 1e-12));

        let h = random_hermitian(&mut rng, 2);
        let gen = PropagatorSet::from_hamiltonian("L", TimeGrid::uniform(3), h.clone());
        let ext = gen.insert_time(0.4, "a").unwrap();
        assert!(ext.propagator(1, 0).unwrap().approx_eq(&propagator_from_hamiltonian(&h, 0.4, 0.0), 1e-12));
    }

    #[test]
    fn reversal_and_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let steps = (0..3).map(|_| random_unitary(&mut rng, 2)).collect();
        let ps = PropagatorSet::new("L", TimeGrid::uniform(4), steps).unwrap();
        let rev = ps.reversed();
        assert!(rev.propagator(3, 0).unwrap().approx_eq(&ps.propagator(0, 3).unwrap(), 1e-12));
        let maps: Vec<Operator> = (0..4).map(|_| random_unitary(&mut rng, 2)).collect();
        let t = ps.transform(&maps).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let expected = &(&maps[j] * &ps.propagator(j, k).unwrap()) * &maps[k].adjoint();
                assert!(t.propagator(j, k).unwrap().approx_eq(&expected, 1e-10));
            }
        }
    }
}
