use std::fmt::Write;

use super::{dense, Decl, Matrix, ProjDef, SlotSpec, SpecDocument};
use crate::hilbert::ComplexScalar;

pub(super) const HEADER: &str = "# famspec v1\n";

/// 17 significant digits; integral values print without exponent.
pub(crate) fn real(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.16e}")
    }
}

pub(crate) fn complex(z: ComplexScalar) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => real(z.re),
        (true, false) => format!("{}i", real(z.im)),
        (false, false) if z.im < 0.0 => format!("{}{}i", real(z.re), real(z.im)),
        (false, false) => format!("{}+{}i", real(z.re), real(z.im)),
    }
}

fn nonzero(m: &Matrix, dim: usize) -> Vec<(usize, usize, ComplexScalar)> {
    let rows = dense(m, dim);
    let mut out = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        for (j, z) in r.iter().enumerate() {
            if z.re != 0.0 || z.im != 0.0 {
                out.push((i, j, *z));
            }
        }
    }
    out
}

/// Sparse when at most a quarter of the entries are nonzero.
fn matrix(out: &mut String, m: &Matrix, dim: usize) {
    let nz = nonzero(m, dim);
    if 4 * nz.len() <= dim * dim {
        out.push_str("sparse {\n");
        for (i, j, z) in nz {
            let _ = writeln!(out, "  {i} {j} {}", complex(z));
        }
        out.push('}');
    } else {
        out.push_str("[\n");
        for r in dense(m, dim) {
            let cells: Vec<String> = r.into_iter().map(complex).collect();
            let _ = writeln!(out, "  [{}]", cells.join(" "));
        }
        out.push(']');
    }
}

/// Canonical text: declarations in document order, which is a dependency
/// order, separated by blank lines.
pub fn serialize(doc: &SpecDocument) -> String {
    let mut out = String::from(HEADER);
    let dim_of = |space: &str| doc.model().spaces.get(space).copied().unwrap_or(0);
    for d in doc.decls() {
        out.push('\n');
        match &d.decl {
            Decl::Space { name, dim } => {
                let _ = write!(out, "space {name} dim {dim}");
            }
            Decl::Ket { name, space, amps } => {
                let a: Vec<String> = amps.iter().map(|z| complex(*z)).collect();
                let _ = write!(out, "ket {name} in {space} = [{}]", a.join(", "));
            }
            Decl::Unitary { name, space, matrix: m } | Decl::Density { name, space, matrix: m } => {
                let kw = if matches!(d.decl, Decl::Unitary { .. }) { "unitary" } else { "density" };
                let _ = write!(out, "{kw} {name} on {space} = ");
                matrix(&mut out, m, dim_of(space));
            }
            Decl::Proj { name, space, def } => {
                let _ = write!(out, "proj {name} on {space} = ");
                match def {
                    ProjDef::Span(ks) => {
                        let _ = write!(out, "span({})", ks.join(", "));
                    }
                    ProjDef::Matrix(m) => matrix(&mut out, m, dim_of(space)),
                }
            }
            Decl::Decomp { name, space, members } => {
                let ms: Vec<String> = members
                    .iter()
                    .map(|m| match &m.label {
                        Some(l) if *l != m.proj => format!("{} as {l}", m.proj),
                        _ => m.proj.clone(),
                    })
                    .collect();
                let _ = write!(out, "decomp {name} on {space} = {{{}}}", ms.join(", "));
            }
            Decl::Times { name, values } => {
                let v: Vec<String> = values.iter().map(|x| real(*x)).collect();
                let _ = write!(out, "times {name} = [{}]", v.join(", "));
            }
            Decl::Family {
                name,
                times,
                initial,
                slots,
                steps,
            } => {
                let _ = write!(out, "family {name} times {times}");
                if let Some(i) = initial {
                    let _ = write!(out, " initial {i}");
                }
                out.push_str(" {\n");
                for (t, spec, _) in slots {
                    let d = match spec {
                        SlotSpec::Identity => "identity",
                        SlotSpec::Decomp(d) => d,
                    };
                    let _ = writeln!(out, "  at {}: {d}", real(*t));
                }
                let _ = write!(out, "}} steps {{ {} }}", steps.join(" "));
            }
        }
        out.push('\n');
    }
    out
}
