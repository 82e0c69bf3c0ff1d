use std::collections::BTreeMap;

use super::lexer::{is_name_char, is_name_start};
use super::{Decl, Located, Matrix, Member, Pos, SlotSpec, SpecDocument};
use crate::error::{Error, Result};
use crate::histories::Boundary;
use crate::hilbert::{ComplexScalar, Operator};
use crate::scenarios::Scenario;

const SPACE: &str = "H";

fn sanitize(s: &str) -> String {
    let mut out: String = s.chars().map(|c| if is_name_char(c) { c } else { '_' }).collect();
    if !out.chars().next().is_some_and(is_name_start) {
        out.insert_str(0, "n_");
    }
    if out == "identity" {
        out.push('_');
    }
    out
}

fn sparse(op: &Operator) -> Vec<(usize, usize, ComplexScalar)> {
    let m = op.matrix();
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.re != 0.0 || z.im != 0.0 {
                out.push((i, j, z));
            }
        }
    }
    out
}

#[derive(PartialEq)]
enum Payload {
    Ket(Vec<ComplexScalar>),
    Matrix(Vec<(usize, usize, ComplexScalar)>),
    Other,
}

#[derive(Default)]
struct Names {
    taken: BTreeMap<String, Payload>,
}

impl Names {
    /// A free name based on `base`, or the name already holding `payload`.
    fn claim(&mut self, base: &str, payload: Payload) -> (String, bool) {
        let base = sanitize(base);
        for k in 1.. {
            let name = if k == 1 { base.clone() } else { format!("{base}_{k}") };
            match self.taken.get(&name) {
                Some(p) if *p == payload && payload != Payload::Other => return (name, false),
                Some(_) => continue,
                None => {
                    self.taken.insert(name.clone(), payload);
                    return (name, true);
                }
            }
        }
        unreachable!()
    }
}

/// The scenario's named kets, dynamics and families as a document.
///
/// Frames become a `times` grid plus one unitary per step; family time
/// labels are renumbered `t0, t1, …`.
pub fn export(scn: &Scenario) -> Result<SpecDocument> {
    let pos = Pos { line: 0, column: 0 };
    let mut decls = vec![Decl::Space {
        name: SPACE.into(),
        dim: scn.dim(),
    }];
    let mut names = Names::default();
    names.claim(SPACE, Payload::Other);
    let ket_decl = |names: &mut Names, decls: &mut Vec<Decl>, base: &str, amps: Vec<ComplexScalar>| {
        let (name, fresh) = names.claim(base, Payload::Ket(amps.clone()));
        if fresh {
            decls.push(Decl::Ket {
                name: name.clone(),
                space: SPACE.into(),
                amps,
            });
        }
        name
    };
    for (n, k) in scn.kets() {
        ket_decl(&mut names, &mut decls, n, k.amplitudes().to_vec());
    }

    let mut frames: BTreeMap<String, (String, Vec<String>)> = BTreeMap::new();
    for f in scn.families() {
        let props = f.propagators();
        if frames.contains_key(props.name()) {
            continue;
        }
        let (times, _) = names.claim(&format!("T_{}", props.name()), Payload::Other);
        decls.push(Decl::Times {
            name: times.clone(),
            values: props.grid().values().to_vec(),
        });
        let id = Operator::identity(props.dim());
        let mut steps = Vec::new();
        for (j, s) in props.steps().iter().enumerate() {
            if s.distance(&id) == 0.0 {
                steps.push("identity".to_string());
                continue;
            }
            let (u, fresh) = names.claim(&format!("{}_s{j}", props.name()), Payload::Other);
            if fresh {
                decls.push(Decl::Unitary {
                    name: u.clone(),
                    space: SPACE.into(),
                    matrix: Matrix::Sparse(sparse(s)),
                });
            }
            steps.push(u);
        }
        frames.insert(props.name().to_string(), (times, steps));
    }

    for f in scn.families() {
        let initial = match f.boundary() {
            Boundary::None => None,
            Boundary::InitialPure { label, ket } => {
                Some(ket_decl(&mut names, &mut decls, label, ket.amplitudes().to_vec()))
            }
            Boundary::InitialDensity(rho) => {
                let (name, _) = names.claim(&format!("rho_{}", f.name()), Payload::Other);
                decls.push(Decl::Density {
                    name: name.clone(),
                    space: SPACE.into(),
                    matrix: Matrix::Sparse(sparse(rho.operator())),
                });
                Some(name)
            }
            Boundary::FinalPure { .. } | Boundary::FinalDensity(_) => {
                return Err(Error::InvalidFamily(format!(
                    "family `{}` has a final boundary, which the text format cannot express",
                    f.name()
                )))
            }
        };
        let mut slots = Vec::new();
        for (j, d) in f.decompositions().iter().enumerate() {
            if d.is_trivial() {
                continue;
            }
            let mut members = Vec::new();
            for (label, p) in d.members() {
                let entries = sparse(p.operator());
                let (proj, fresh) = names.claim(label, Payload::Matrix(entries.clone()));
                if fresh {
                    decls.push(Decl::Proj {
                        name: proj.clone(),
                        space: SPACE.into(),
                        def: super::ProjDef::Matrix(Matrix::Sparse(entries)),
                    });
                }
                members.push(Member {
                    label: (proj != *label).then(|| label.clone()),
                    proj,
                });
            }
            let (dname, _) = names.claim(&format!("{}_{}", f.name(), f.grid().label(j)), Payload::Other);
            decls.push(Decl::Decomp {
                name: dname.clone(),
                space: SPACE.into(),
                members,
            });
            slots.push((f.grid().value(j), SlotSpec::Decomp(dname), pos));
        }
        let (times, steps) = frames[f.propagators().name()].clone();
        let (name, _) = names.claim(f.name(), Payload::Other);
        decls.push(Decl::Family {
            name,
            times,
            initial,
            slots,
            steps,
        });
    }
    let located = decls.into_iter().map(|decl| Located { pos, decl }).collect();
    SpecDocument::from_decls(located).map_err(|d| Error::InvalidFamily(format!("export of `{}`: {}", scn.name(), d.message)))
}
