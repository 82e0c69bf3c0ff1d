use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{dense, Decl, Located, Matrix, ParseDiagnostic, Pos, ProjDef, SlotSpec};
use crate::dynamics::{PropagatorSet, TimeGrid};
use crate::hilbert::{
    projector_onto_span, DecompositionOfIdentity, DensityOperator, Ket, Operator, Projector,
    TOL_UNITARY,
};
use crate::histories::Family;

/// Objects defined by a document, by name.
#[derive(Clone, Debug, Default)]
pub struct Model {
    pub spaces: BTreeMap<String, usize>,
    pub kets: BTreeMap<String, Ket>,
    pub unitaries: BTreeMap<String, Operator>,
    pub densities: BTreeMap<String, DensityOperator>,
    pub projectors: BTreeMap<String, Projector>,
    pub decomps: BTreeMap<String, DecompositionOfIdentity>,
    pub grids: BTreeMap<String, TimeGrid>,
    pub families: Vec<Family>,
    kinds: BTreeMap<String, &'static str>,
    space_of: BTreeMap<String, String>,
}

type DResult<T> = Result<T, ParseDiagnostic>;

fn err<T>(msg: String, pos: Pos) -> DResult<T> {
    Err(ParseDiagnostic::error(msg, pos))
}

impl Model {
    pub(super) fn build(decls: &[Located]) -> DResult<Model> {
        let mut m = Model::default();
        for d in decls {
            m.add(d)?;
        }
        Ok(m)
    }

    fn lookup(&self, name: &str, kind: &str, pos: Pos) -> DResult<()> {
        match self.kinds.get(name) {
            Some(k) if *k == kind => Ok(()),
            Some(k) => Err(ParseDiagnostic::error(format!("`{name}` is a {k}, expected a {kind}"), pos)),
            None => Err(ParseDiagnostic::error(format!("undefined {kind} `{name}`"), pos)),
        }
    }

    fn space_dim(&self, space: &str, pos: Pos) -> DResult<usize> {
        self.lookup(space, "space", pos)?;
        Ok(self.spaces[space])
    }

    /// Checks `name` is a `kind` declared on `space`.
    fn on_space(&self, name: &str, kind: &str, space: &str, pos: Pos) -> DResult<()> {
        self.lookup(name, kind, pos)?;
        let s = &self.space_of[name];
        if s != space {
            return Err(ParseDiagnostic::error(
                format!("{kind} `{name}` is on space `{s}`, not `{space}`"),
                pos,
            ));
        }
        Ok(())
    }

    fn operator(&self, m: &Matrix, dim: usize, what: &str, pos: Pos) -> DResult<Operator> {
        let err = |msg: String| Err(ParseDiagnostic::error(msg, pos));
        match m {
            Matrix::Dense(rows) => {
                if rows.len() != dim {
                    return err(format!("dimension mismatch: {what} has {} rows, space has dim {dim}", rows.len()));
                }
                if let Some(r) = rows.iter().find(|r| r.len() != dim) {
                    return err(format!(
                        "dimension mismatch: {what} has a row of length {}, space has dim {dim}",
                        r.len()
                    ));
                }
            }
            Matrix::Sparse(entries) => {
                if let Some((i, j, _)) = entries.iter().find(|(i, j, _)| *i >= dim || *j >= dim) {
                    return err(format!("dimension mismatch: {what} entry ({i}, {j}) outside dim {dim}"));
                }
            }
        }
        let rows = dense(m, dim);
        Operator::new(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
            .or_else(|e| err(format!("{what}: {e}")))
    }

    fn add(&mut self, d: &Located) -> DResult<()> {
        let pos = d.pos;
        let name = d.decl.name().to_string();
        if name == "identity" {
            return Err(ParseDiagnostic::error("`identity` is reserved", pos));
        }
        if self.kinds.contains_key(&name) {
            return Err(ParseDiagnostic::error(format!("duplicate name `{name}`"), pos));
        }
        let kind = match &d.decl {
            Decl::Space { dim, .. } => {
                self.spaces.insert(name.clone(), *dim);
                "space"
            }
            Decl::Ket { space, amps, .. } => {
                let dim = self.space_dim(space, pos)?;
                if amps.len() != dim {
                    return err(format!(
                        "dimension mismatch: ket `{name}` has {} amplitudes, space `{space}` has dim {dim}",
                        amps.len()
                    ), pos);
                }
                let k = Ket::new(amps.clone()).or_else(|e| err(format!("ket `{name}`: {e}"), pos))?;
                if k.norm() == 0.0 {
                    return err(format!("ket `{name}` is zero"), pos);
                }
                self.kets.insert(name.clone(), k.with_label(name.clone()));
                self.space_of.insert(name.clone(), space.clone());
                "ket"
            }
            Decl::Unitary { space, matrix, .. } => {
                let dim = self.space_dim(space, pos)?;
                let u = self.operator(matrix, dim, &format!("unitary `{name}`"), pos)?;
                let defect = u.unitarity_defect();
                if defect.is_nan() || defect >= TOL_UNITARY {
                    return err(format!(
                        "non-unitary matrix `{name}`: defect {defect:.3e} exceeds threshold {TOL_UNITARY:.0e}"
                    ), pos);
                }
                self.unitaries.insert(name.clone(), u);
                self.space_of.insert(name.clone(), space.clone());
                "unitary"
            }
            Decl::Density { space, matrix, .. } => {
                let dim = self.space_dim(space, pos)?;
                let op = self.operator(matrix, dim, &format!("density `{name}`"), pos)?;
                let rho = DensityOperator::new(op).or_else(|e| err(format!("density `{name}`: {e}"), pos))?;
                self.densities.insert(name.clone(), rho);
                self.space_of.insert(name.clone(), space.clone());
                "density"
            }
            Decl::Proj { space, def, .. } => {
                let dim = self.space_dim(space, pos)?;
                let p = match def {
                    ProjDef::Span(kets) => {
                        let mut ks = Vec::new();
                        for k in kets {
                            self.on_space(k, "ket", space, pos)?;
                            ks.push(self.kets[k].clone());
                        }
                        projector_onto_span(&ks)
                    }
                    ProjDef::Matrix(m) => Projector::new(self.operator(m, dim, &format!("projector `{name}`"), pos)?),
                }
                .or_else(|e| err(format!("projector `{name}`: {e}"), pos))?;
                self.projectors.insert(name.clone(), p);
                self.space_of.insert(name.clone(), space.clone());
                "projector"
            }
            Decl::Decomp { space, members, .. } => {
                self.space_dim(space, pos)?;
                let mut ms = Vec::new();
                for m in members {
                    self.on_space(&m.proj, "projector", space, pos)?;
                    ms.push((m.label().to_string(), self.projectors[&m.proj].clone()));
                }
                let dec = DecompositionOfIdentity::new(ms)
                    .or_else(|e| err(format!("incomplete or invalid decomposition `{name}`: {e}"), pos))?;
                self.decomps.insert(name.clone(), dec);
                self.space_of.insert(name.clone(), space.clone());
                "decomposition"
            }
            Decl::Times { values, .. } => {
                let g = TimeGrid::from_values(values.clone()).or_else(|e| err(format!("times `{name}`: {e}"), pos))?;
                self.grids.insert(name.clone(), g);
                "times"
            }
            Decl::Family {
                times,
                initial,
                slots,
                steps,
                ..
            } => {
                let f = self.family(&name, times, initial.as_deref(), slots, steps, pos)?;
                self.families.push(f);
                "family"
            }
        };
        self.kinds.insert(name, kind);
        Ok(())
    }

    fn family(
        &self,
        name: &str,
        times: &str,
        initial: Option<&str>,
        slots: &[(f64, SlotSpec, Pos)],
        steps: &[String],
        pos: Pos,
    ) -> DResult<Family> {
        self.lookup(times, "times", pos)?;
        let grid = &self.grids[times];
        let n = grid.len();
        if steps.len() + 1 != n {
            return err(
                format!("family `{name}` lists {} steps for {n} times (need {})", steps.len(), n - 1),
                pos,
            );
        }
        // every referenced object must sit on one space
        let mut space: Option<(String, String)> = None;
        let mut note = |obj: &str| -> DResult<()> {
            let s = self.space_of[obj].clone();
            match &space {
                Some((s0, o0)) if *s0 != s => err(
                    format!("family `{name}` mixes space `{s0}` (via `{o0}`) with `{s}` (via `{obj}`)"),
                    pos,
                ),
                Some(_) => Ok(()),
                None => {
                    space = Some((s, obj.to_string()));
                    Ok(())
                }
            }
        };
        enum Init<'a> {
            Ket(&'a Ket),
            Density(&'a DensityOperator),
        }
        let init = match initial {
            None => None,
            Some(k) => match self.kinds.get(k) {
                Some(&"ket") => {
                    note(k)?;
                    Some(Init::Ket(&self.kets[k]))
                }
                Some(&"density") => {
                    note(k)?;
                    Some(Init::Density(&self.densities[k]))
                }
                Some(other) => return err(format!("`{k}` is a {other}, expected a ket or density"), pos),
                None => return err(format!("undefined initial state `{k}`"), pos),
            },
        };
        let mut at: Vec<Option<&SlotSpec>> = vec![None; n];
        for (t, spec, spos) in slots {
            let Some(j) = (0..n).find(|&j| (grid.value(j) - t).abs() <= 1e-12 * t.abs().max(1.0)) else {
                return err(format!("time {t} is not in times `{times}`"), *spos);
            };
            if at[j].is_some() {
                return err(format!("time {t} given twice in family `{name}`"), *spos);
            }
            if let SlotSpec::Decomp(d) = spec {
                self.lookup(d, "decomposition", *spos)?;
                note(d)?;
            }
            at[j] = Some(spec);
        }
        for s in steps.iter().filter(|s| *s != "identity") {
            self.lookup(s, "unitary", pos)?;
            note(s)?;
        }
        let Some((space, _)) = space else {
            return err(format!("cannot infer the space of family `{name}`"), pos);
        };
        let dim = self.spaces[&space];
        let ops = steps
            .iter()
            .map(|s| {
                if s == "identity" {
                    Operator::identity(dim)
                } else {
                    self.unitaries[s].clone()
                }
            })
            .collect();
        let wrap = |e: crate::error::Error| ParseDiagnostic::error(format!("family `{name}`: {e}"), pos);
        let props = PropagatorSet::new(times, grid.clone(), ops).map_err(wrap)?;
        let mut b = Family::builder(name, Arc::new(props));
        b = match init {
            Some(Init::Ket(k)) => b.initial_pure(initial.unwrap_or_default(), k.clone()),
            Some(Init::Density(r)) => b.initial_density(r.clone()),
            None => b,
        };
        for (j, spec) in at.iter().enumerate() {
            if let Some(spec) = spec {
                let d = match spec {
                    SlotSpec::Identity => DecompositionOfIdentity::trivial(dim),
                    SlotSpec::Decomp(d) => self.decomps[d].clone(),
                };
                b = b.at(grid.label(j).to_string(), d);
            }
        }
        b.build().map_err(wrap)
    }
}
