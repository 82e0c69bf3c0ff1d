use nalgebra::{DMatrix, DVector};

use super::family::{Boundary, Family, History};
use crate::error::Result;
use crate::hilbert::{op_inner, ComplexScalar, Operator, Projector, ZERO};

/// Squared norms below this are treated as exactly vanishing branches.
const PRUNE: f64 = 1e-30;

/// `K̂(Y^α)` at the family's reference index.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainOperator {
    pub history: History,
    pub op: Operator,
}

/// How the decoherence functional is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Chain kets for pure boundaries, operators otherwise.
    Auto,
    /// Full Heisenberg chain operators.
    Operator,
}

/// Weights and decoherence functional of every history of a family.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub histories: Vec<History>,
    pub weights: Vec<f64>,
    /// Indices into `histories` with nonvanishing chain operator.
    pub nonzero: Vec<usize>,
    /// `⟨K_a, K_b⟩` over `nonzero`.
    pub gram: DMatrix<ComplexScalar>,
}

impl Analysis {
    pub fn decoherence(&self, a: usize, b: usize) -> ComplexScalar {
        let pa = self.nonzero.iter().position(|&i| i == a);
        let pb = self.nonzero.iter().position(|&i| i == b);
        match (pa, pb) {
            (Some(x), Some(y)) => self.gram[(x, y)],
            _ => ZERO,
        }
    }
}

impl Family {
    fn heisenberg_members(&self) -> Result<Vec<Vec<Projector>>> {
        let r = self.reference();
        (0..self.grid().len())
            .map(|j| {
                self.decomposition(j)
                    .members()
                    .iter()
                    .map(|(_, p)| self.propagators().heisenberg(p, j, r))
                    .collect()
            })
            .collect()
    }

    /// `K̂(Y^α) = P̂_f ⋯ P̂_1 P̂_0`, the adjoint of the time-ordered product.
    pub fn chain_operator(&self, h: &History) -> Result<ChainOperator> {
        self.check_history(h)?;
        let r = self.reference();
        let mut k = Operator::identity(self.dim());
        for (j, &m) in h.indices.iter().enumerate() {
            if self.decomposition(j).is_trivial() {
                continue;
            }
            let p = self.propagators().heisenberg(self.projector(j, m), j, r)?;
            k = p.operator() * &k;
        }
        Ok(ChainOperator {
            history: h.clone(),
            op: k,
        })
    }

    /// Schrödinger form `P_f T_{f,f−1} ⋯ T_{1,0} P_0`.
    pub fn chain_operator_schrodinger(&self, h: &History) -> Result<Operator> {
        self.check_history(h)?;
        let mut k = Operator::identity(self.dim());
        for (j, &m) in h.indices.iter().enumerate() {
            if j > 0 {
                k = &self.propagators().steps()[j - 1] * &k;
            }
            if !self.decomposition(j).is_trivial() {
                k = self.projector(j, m).operator() * &k;
            }
        }
        Ok(k)
    }

    /// Boundary state in the reference picture, if a density operator.
    fn reference_density(&self) -> Result<Option<(bool, Operator)>> {
        let r = self.reference();
        let last = self.grid().len() - 1;
        Ok(match self.boundary() {
            Boundary::InitialDensity(rho) => Some((
                true,
                rho.operator().conjugate_by(&self.propagators().propagator(r, 0)?)?,
            )),
            Boundary::FinalDensity(rho) => Some((
                false,
                rho.operator().conjugate_by(&self.propagators().propagator(r, last)?)?,
            )),
            _ => None,
        })
    }

    /// `W(Y^α)`.
    pub fn weight(&self, h: &History) -> Result<f64> {
        let k = self.chain_operator(h)?.op;
        let w = match self.reference_density()? {
            None => op_inner(&k, &k)?,
            Some((true, rho)) => op_inner(&k, &(&k * &rho))?,
            Some((false, rho)) => op_inner(&k, &(&rho * &k))?,
        };
        Ok(w.re.max(0.0))
    }

    /// Cached analysis along the automatic route.
    pub fn analysis(&self) -> Result<&Analysis> {
        if let Some(a) = self.analysis_cell().get() {
            return Ok(a);
        }
        let a = self.analyze(Route::Auto)?;
        Ok(self.analysis_cell().get_or_init(|| a))
    }

    /// Uncached analysis along an explicit route.
    pub fn analyze(&self, route: Route) -> Result<Analysis> {
        let pure = matches!(
            self.boundary(),
            Boundary::InitialPure { .. } | Boundary::FinalPure { .. }
        );
        let mut rows = if route == Route::Auto && pure {
            self.ket_branches()?
        } else {
            self.operator_branches()?
        };
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let histories: Vec<History> = rows
            .iter()
            .map(|(idx, _)| self.history_from_indices(idx.clone()))
            .collect();
        let nonzero: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.1.is_some())
            .map(|(i, _)| i)
            .collect();
        let n = nonzero.len();
        let mut gram = DMatrix::from_element(n, n, ZERO);
        let payload: Vec<&Branch> = nonzero
            .iter()
            .map(|&i| rows[i].1.as_ref().expect("nonzero branch"))
            .collect();
        let density = self.reference_density()?;
        let final_pure = matches!(self.boundary(), Boundary::FinalPure { .. });
        // right factors for density boundaries
        let dressed: Vec<Option<Operator>> = payload
            .iter()
            .map(|b| match (b, &density) {
                (Branch::Op(k), Some((true, rho))) => Some(k * rho),
                (Branch::Op(k), Some((false, rho))) => Some(rho * k),
                _ => None,
            })
            .collect();
        for a in 0..n {
            for b in a..n {
                let v = match (payload[a], payload[b]) {
                    (Branch::Ket(x), Branch::Ket(y)) => {
                        if final_pure {
                            y.dotc(x)
                        } else {
                            x.dotc(y)
                        }
                    }
                    (Branch::Op(x), Branch::Op(y)) => match &density {
                        None => op_inner(x, y)?,
                        Some((true, _)) => op_inner(x, dressed[b].as_ref().expect("dressed"))?,
                        Some((false, _)) => op_inner(y, dressed[a].as_ref().expect("dressed"))?,
                    },
                    _ => unreachable!("mixed branch kinds"),
                };
                gram[(a, b)] = v;
                gram[(b, a)] = v.conj();
            }
        }
        let mut weights = vec![0.0; rows.len()];
        for (p, &i) in nonzero.iter().enumerate() {
            weights[i] = gram[(p, p)].re.max(0.0);
        }
        Ok(Analysis {
            histories,
            weights,
            nonzero,
            gram,
        })
    }

    /// Chain kets `P_f T ⋯ T P_0 |Ψ⟩` (or the backward analogue from a final
    /// state), pruning branches as soon as they vanish.
    fn ket_branches(&self) -> Result<Vec<(Vec<usize>, Option<Branch>)>> {
        let n = self.grid().len();
        let forward = matches!(self.boundary(), Boundary::InitialPure { .. });
        let ket = match self.boundary() {
            Boundary::InitialPure { ket, .. } | Boundary::FinalPure { ket, .. } => ket.clone(),
            _ => unreachable!("ket route needs a pure boundary"),
        };
        let order: Vec<usize> = if forward {
            (0..n).collect()
        } else {
            (0..n).rev().collect()
        };
        let steps: Vec<Operator> = self.propagators().steps().to_vec();
        let step_adj: Vec<Operator> = steps.iter().map(Operator::adjoint).collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        let mut ctx = KetDfs {
            family: self,
            order: &order,
            forward,
            steps: &steps,
            step_adj: &step_adj,
            out: &mut out,
        };
        ctx.run(0, ket.vector().clone(), &mut idx);
        Ok(out)
    }

    fn operator_branches(&self) -> Result<Vec<(Vec<usize>, Option<Branch>)>> {
        let hp = self.heisenberg_members()?;
        let n = self.grid().len();
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        self.op_dfs(&hp, 0, Operator::identity(self.dim()), &mut idx, &mut out);
        Ok(out)
    }

    fn op_dfs(
        &self,
        hp: &[Vec<Projector>],
        depth: usize,
        k: Operator,
        idx: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, Option<Branch>)>,
    ) {
        if depth == hp.len() {
            out.push((idx.clone(), Some(Branch::Op(k))));
            return;
        }
        for m in self.member_range(depth) {
            idx[depth] = m;
            let next = if self.decomposition(depth).is_trivial() {
                k.clone()
            } else {
                hp[depth][m].operator() * &k
            };
            if next.frobenius_norm().powi(2) < PRUNE {
                let rest: Vec<usize> = (depth + 1..hp.len()).collect();
                self.zero_completions_in(&rest, 0, idx, out);
            } else {
                self.op_dfs(hp, depth + 1, next, idx, out);
            }
        }
    }

    /// Emits every completion of `idx` over `slots` as a zero branch.
    fn zero_completions_in(
        &self,
        slots: &[usize],
        pos: usize,
        idx: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, Option<Branch>)>,
    ) {
        if pos == slots.len() {
            out.push((idx.clone(), None));
            return;
        }
        let j = slots[pos];
        for m in self.member_range(j) {
            idx[j] = m;
            self.zero_completions_in(slots, pos + 1, idx, out);
        }
    }
}

enum Branch {
    Ket(DVector<ComplexScalar>),
    Op(Operator),
}

struct KetDfs<'a> {
    family: &'a Family,
    order: &'a [usize],
    forward: bool,
    steps: &'a [Operator],
    step_adj: &'a [Operator],
    out: &'a mut Vec<(Vec<usize>, Option<Branch>)>,
}

impl KetDfs<'_> {
    fn run(&mut self, pos: usize, v: DVector<ComplexScalar>, idx: &mut Vec<usize>) {
        if pos == self.order.len() {
            self.out.push((idx.clone(), Some(Branch::Ket(v))));
            return;
        }
        let j = self.order[pos];
        let v = if pos == 0 {
            v
        } else if self.forward {
            self.steps[j - 1].apply_vector(&v)
        } else {
            self.step_adj[j].apply_vector(&v)
        };
        let trivial = self.family.decomposition(j).is_trivial();
        for m in self.family.member_range(j) {
            idx[j] = m;
            let w = if trivial {
                v.clone()
            } else {
                self.family.projector(j, m).operator().apply_vector(&v)
            };
            if w.norm_squared() < PRUNE {
                let rest: Vec<usize> = self.order[pos + 1..].to_vec();
                self.family.zero_completions_in(&rest, 0, idx, self.out);
            } else {
                self.run(pos + 1, w, idx);
            }
        }
    }
}
