//! A particle emitted in a superposition of a left- and a right-moving
//! packet on a 1-D lattice, with detector A on the left and B on the right.
//!
//! Particle basis: `(cell, L|R)` plus `absorbed`; each detector is
//! `{ready, fired}`. Packets occupy one cell and move one cell per two time
//! units. A left mover entering the A cell while A is ready is absorbed and
//! fires A; likewise for right movers and B. Each grid step is the resulting
//! classical map on basis states, made injective by giving priority to the
//! states the initial ket actually reaches and completed to a permutation by
//! pairing the leftover inputs and outputs in index order.

use super::registry::{Expect, Expectation, Provenance, Query};
use super::tensor::{binary, decomp, with_rest};
use super::Scenario;
use crate::dynamics::{PropagatorSet, TimeGrid};
use crate::error::{Error, Result};
use crate::histories::Family;
use crate::hilbert::{re, DecompositionOfIdentity, Ket, Operator, Projector};
use crate::relativistic::{Region, TaggedEvent};

#[derive(Clone, Debug, PartialEq)]
pub struct WavepacketGeometry {
    pub n_cells: usize,
    pub source: usize,
    pub det_a: usize,
    pub det_b: usize,
    /// Inclusive cell ranges covering `0..n_cells` in order.
    pub intervals: Vec<(usize, usize)>,
    /// Grid times; consecutive differences must be even.
    pub times: Vec<f64>,
}

impl Default for WavepacketGeometry {
    fn default() -> Self {
        Self {
            n_cells: 24,
            source: 12,
            det_a: 6,
            det_b: 21,
            intervals: (0..8).map(|i| (3 * i, 3 * i + 2)).collect(),
            times: vec![0.0, 6.0, 14.0, 20.0],
        }
    }
}

impl WavepacketGeometry {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidGeometry(m.to_string()));
        if !(self.det_a < self.source && self.source < self.det_b && self.det_b < self.n_cells) {
            return bad("need det_a < source < det_b < n_cells");
        }
        if self.source - self.det_a >= self.det_b - self.source {
            return bad("detector A must be closer to the source than B");
        }
        let mut next = 0;
        for &(lo, hi) in &self.intervals {
            if lo != next || hi < lo {
                return bad("intervals must partition the cells in order");
            }
            next = hi + 1;
        }
        if next != self.n_cells {
            return bad("intervals must cover every cell");
        }
        if self.times.len() < 2 {
            return bad("need at least two times");
        }
        for w in self.times.windows(2) {
            let d = w[1] - w[0];
            if d <= 0.0 || d.fract() != 0.0 || !(d as u64).is_multiple_of(2) {
                return bad("time steps must be positive even integers");
            }
        }
        Ok(())
    }

    fn interval_label(&self, cell: usize) -> String {
        let (lo, hi) = self
            .intervals
            .iter()
            .find(|(lo, hi)| (*lo..=*hi).contains(&cell))
            .expect("intervals cover every cell");
        format!("x{lo}-{hi}")
    }
}

/// Basis state `(particle, A fired, B fired)`; `particle = None` is absorbed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct State {
    particle: Option<(usize, bool)>,
    a: bool,
    b: bool,
}

struct Lattice<'g> {
    g: &'g WavepacketGeometry,
}

impl Lattice<'_> {
    fn particle_dim(&self) -> usize {
        2 * self.g.n_cells + 1
    }

    fn dim(&self) -> usize {
        4 * self.particle_dim()
    }

    fn index(&self, s: State) -> usize {
        let p = match s.particle {
            Some((c, right)) => 2 * c + right as usize,
            None => 2 * self.g.n_cells,
        };
        (p * 2 + s.a as usize) * 2 + s.b as usize
    }

    fn state(&self, i: usize) -> State {
        let (b, a, p) = (i % 2 == 1, (i / 2) % 2 == 1, i / 4);
        let particle = (p < 2 * self.g.n_cells).then_some((p / 2, p % 2 == 1));
        State { particle, a, b }
    }

    fn move_once(&self, s: State) -> State {
        let Some((c, right)) = s.particle else {
            return s;
        };
        let n = self.g.n_cells;
        let (c2, right2) = match (right, c) {
            (false, 0) => (0, true),
            (true, x) if x + 1 == n => (x, false),
            (false, x) => (x - 1, false),
            (true, x) => (x + 1, true),
        };
        if !right2 && c2 == self.g.det_a && !s.a && right2 == right {
            return State { particle: None, a: true, ..s };
        }
        if right2 && c2 == self.g.det_b && !s.b && right2 == right {
            return State { particle: None, b: true, ..s };
        }
        State {
            particle: Some((c2, right2)),
            ..s
        }
    }

    fn evolve(&self, s: State, moves: usize) -> State {
        (0..moves).fold(s, |s, _| self.move_once(s))
    }

    /// Permutation realizing `moves` single moves on `reached`.
    fn step(&self, moves: usize, reached: &[usize]) -> Result<Vec<usize>> {
        let n = self.dim();
        let mut image = vec![usize::MAX; n];
        let mut taken = vec![false; n];
        let order = reached.iter().copied().chain(0..n);
        for i in order {
            if image[i] != usize::MAX {
                continue;
            }
            let j = self.index(self.evolve(self.state(i), moves));
            if !taken[j] {
                image[i] = j;
                taken[j] = true;
            }
        }
        let mut free = (0..n).filter(|&j| !taken[j]);
        for slot in image.iter_mut().filter(|x| **x == usize::MAX) {
            *slot = free.next().expect("as many free outputs as free inputs");
        }
        Ok(image)
    }
}

pub fn build_wavepacket_default() -> Result<Scenario> {
    build_wavepacket(&WavepacketGeometry::default())
}

pub fn build_wavepacket(g: &WavepacketGeometry) -> Result<Scenario> {
    g.validate()?;
    let lat = Lattice { g };
    let dim = lat.dim();
    let ready = State {
        particle: None,
        a: false,
        b: false,
    };
    let start_l = State {
        particle: Some((g.source, false)),
        ..ready
    };
    let start_r = State {
        particle: Some((g.source, true)),
        ..ready
    };

    let mut reached = vec![lat.index(start_l), lat.index(start_r)];
    let mut steps = Vec::new();
    let mut paths = vec![(start_l, start_r)];
    for w in g.times.windows(2) {
        let moves = ((w[1] - w[0]) / 2.0) as usize;
        let perm = lat.step(moves, &reached)?;
        reached = reached.iter().map(|&i| perm[i]).collect();
        let (l, r) = *paths.last().expect("nonempty");
        paths.push((lat.evolve(l, moves), lat.evolve(r, moves)));
        steps.push(Operator::permutation(&perm)?);
    }
    let labels: Vec<String> = (0..g.times.len()).map(|j| format!("t{j}")).collect();
    let props = PropagatorSet::new("L", TimeGrid::new(labels.clone(), g.times.clone())?, steps)?;
    let basis_labels = (0..dim)
        .map(|i| {
            let s = lat.state(i);
            let p = match s.particle {
                Some((c, r)) => format!("{c}{}", if r { "R" } else { "L" }),
                None => "absorbed".into(),
            };
            format!("{p}.{}.{}", if s.a { "Astar" } else { "A" }, if s.b { "Bstar" } else { "B" })
        })
        .collect();
    let mut scn = Scenario::new("wavepacket", basis_labels, props);

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi0 = Ket::combination(&[
        (re(h), &Ket::basis(dim, lat.index(start_l))),
        (re(h), &Ket::basis(dim, lat.index(start_r))),
    ])?;
    let t = scn.default_propagators().clone();
    for j in 0..g.times.len() {
        scn.add_ket(&format!("Psi{j}"), t.propagator(j, 0)?.apply(&psi0)?)?;
    }
    let phib2 = if g.times.len() > 2 {
        Some(Ket::basis(dim, lat.index(paths[2].1)))
    } else {
        None
    };
    if let Some(k) = &phib2 {
        scn.add_ket("phib2", k.clone())?;
    }

    // particle-side and detector-side diagonal projectors
    let diag = |keep: &dyn Fn(State) -> bool| -> Result<Projector> {
        let e: Vec<_> = (0..dim)
            .map(|i| re(if keep(lat.state(i)) { 1.0 } else { 0.0 }))
            .collect();
        Projector::new(Operator::diagonal(&e))
    };
    let mut intervals = Vec::new();
    for &(lo, hi) in &g.intervals {
        let p = diag(&|s: State| matches!(s.particle, Some((c, _)) if (lo..=hi).contains(&c)))?;
        let name = format!("x{lo}-{hi}");
        scn.add_projector(&name, p.clone());
        intervals.push((name, p));
    }
    let absorbed = diag(&|s: State| s.particle.is_none())?;
    scn.add_projector("absorbed", absorbed.clone());
    intervals.push(("absorbed".to_string(), absorbed));
    let detectors: Vec<(String, Projector)> = [(false, false), (true, false), (false, true), (true, true)]
        .iter()
        .map(|&(a, b)| {
            let l = format!("{}.{}", if a { "Astar" } else { "A" }, if b { "Bstar" } else { "B" });
            Ok((l, diag(&|s: State| s.a == a && s.b == b)?))
        })
        .collect::<Result<_>>()?;
    for (n, a) in [("A", false), ("Astar", true)] {
        scn.add_projector(n, diag(&|s: State| s.a == a)?);
    }
    for (n, b) in [("B", false), ("Bstar", true)] {
        scn.add_projector(n, diag(&|s: State| s.b == b)?);
    }

    let psi = |j: usize| -> Result<DecompositionOfIdentity> {
        binary(&format!("Psi{j}"), Projector::from_ket(&t.propagator(j, 0)?.apply(&psi0)?)?)
    };
    let by_interval = || decomp(intervals.clone());
    let by_detector = || decomp(detectors.clone());
    let ready_ab = &detectors[0].1;
    let fam = |name: &str, slots: Vec<(String, DecompositionOfIdentity)>| {
        let mut b = Family::builder(name, t.clone()).initial_pure("Psi0", psi0.clone());
        for (tl, d) in slots {
            b = b.at(tl, d);
        }
        b.build()
    };
    let n = g.times.len();
    let later = |from: usize, d: &dyn Fn(usize) -> Result<DecompositionOfIdentity>| -> Result<Vec<(String, DecompositionOfIdentity)>> {
        (from..n).map(|j| Ok((labels[j].clone(), d(j)?))).collect()
    };
    scn.add_family(fam("F0", later(1, &psi)?)?);
    scn.add_family(fam("G0", later(1, &psi)?)?);
    scn.add_family(fam("F1", later(1, &|_| by_interval())?)?);
    let mut f2 = later(1, &|j| if j == 1 { psi(1) } else { by_interval() })?;
    scn.add_family(fam("F2", f2.clone())?);
    if n > 3 {
        f2[n - 2] = (labels[n - 1].clone(), psi(n - 1)?);
        scn.add_family(fam("F2-remerge", f2)?);
    }
    let g1_first = with_rest(
        intervals
            .iter()
            .filter(|(l, _)| l != "absorbed")
            .map(|(l, p)| (format!("{l}.A.B"), Projector::new(p.operator() * ready_ab.operator()).expect("commuting")))
            .collect(),
    )?;
    scn.add_family(fam(
        "G1",
        later(1, &|j| if j == 1 { Ok(g1_first.clone()) } else { by_detector() })?,
    )?);
    if let Some(k) = &phib2 {
        let mid = with_rest(vec![
            ("Astar.B".to_string(), detectors[1].1.clone()),
            ("phib2.A.B".to_string(), Projector::from_ket(k)?),
        ])?;
        scn.add_family(fam(
            "G2",
            later(1, &|j| match j {
                1 => psi(1),
                2 => Ok(mid.clone()),
                _ => by_detector(),
            })?,
        )?);
    }

    // where the two packets are at each time
    let at = |s: State| s.particle.map(|(c, _)| c);
    let a1 = at(paths[1].0).ok_or_else(|| Error::InvalidGeometry("a packet absorbed before t1".into()))?;
    let b1 = at(paths[1].1).ok_or_else(|| Error::InvalidGeometry("b packet absorbed before t1".into()))?;
    let (la1, lb1) = (g.interval_label(a1), g.interval_label(b1));

    use Provenance::*;
    let reg = vec![
        Expectation::new("F1 support has two histories", "F1", Query::SupportSize, Expect::Near { value: 2.0, tol: 0.0 }, Reported),
        Expectation::probability("F1 a trajectory", "F1", &format!("t1={la1}"), 0.5, Reported),
        Expectation::probability("F1 b trajectory", "F1", &format!("t1={lb1}"), 0.5, Reported),
        Expectation::probability("F0 unitary family", "F0", &format!("t{}=Psi{}", n - 1, n - 1), 1.0, Reported),
        Expectation::probability("F2 b branch", "F2", &format!("t2={}", g.interval_label(at(paths[2].1).unwrap_or(g.det_b))), 0.5, Reported),
        Expectation::consistent("re-merging into the final state is inconsistent", "F2-remerge", false, Reported),
        Expectation::probability("G1 A fires", "G1", "t2=Astar", 0.5, Computed),
        Expectation::probability("G1 B fires", "G1", &format!("t{}=Bstar", n - 1), 0.5, Computed),
        Expectation::conditional("A not fired implies b trajectory earlier", "G1", &format!("t1={lb1}"), "t2=A", 1.0, Reported),
        Expectation::conditional("A fired implies a trajectory earlier", "G1", &format!("t1={la1}"), "t2=Astar", 1.0, Reported),
        Expectation::conditional("A not fired implies B fires later", "G1", &format!("t{}=Bstar", n - 1), "t2=A", 1.0, Reported),
        Expectation::probability("G2 collapse branch", "G2", "t2=Astar.B", 0.5, Computed),
        Expectation::new(
            "F0 and F1 are incompatible",
            "F0",
            Query::Compatible { other: "F1".into() },
            Expect::Near { value: 0.0, tol: 0.0 },
            Reported,
        ),
    ];
    for e in reg {
        scn.expect(e);
    }

    add_events(&mut scn, g, &paths, &labels)?;
    Ok(scn)
}

fn add_events(
    scn: &mut Scenario,
    g: &WavepacketGeometry,
    paths: &[(State, State)],
    labels: &[String],
) -> Result<()> {
    let interval_cells = |c: usize| -> Vec<i64> {
        let (lo, hi) = g
            .intervals
            .iter()
            .find(|(lo, hi)| (*lo..=*hi).contains(&c))
            .copied()
            .expect("covered");
        (lo as i64..=hi as i64).collect()
    };
    let mut events = vec![TaggedEvent::local("source", Region::at(g.source as i64, g.times[0]))
        .with_projector("Psi0", labels[0].clone())];
    let mut a_events = Vec::new();
    let mut b_events = Vec::new();
    for (j, (pa, pb)) in paths.iter().enumerate().skip(1) {
        let t = g.times[j];
        for (side, s, det, fired, list) in [
            ("a", pa, g.det_a, "Astar", &mut a_events),
            ("b", pb, g.det_b, "Bstar", &mut b_events),
        ] {
            let id = format!("{side}{j}");
            let e = match s.particle {
                Some((c, _)) => TaggedEvent::local(&id, Region::new(interval_cells(c), flat(t))?)
                    .with_projector(g.interval_label(c), labels[j].clone()),
                None => TaggedEvent::local(&id, Region::at(det as i64, t)).with_projector(fired, labels[j].clone()),
            };
            list.push(id);
            events.push(e);
        }
        for (name, det, ready, list) in [
            ("A", g.det_a, !paths[j].0.a, &mut a_events),
            ("B", g.det_b, !paths[j].1.b, &mut b_events),
        ] {
            if ready {
                let id = format!("{name}-ready{j}");
                events.push(TaggedEvent::local(&id, Region::at(det as i64, t)).with_projector(name, labels[j].clone()));
                list.push(id);
            }
        }
    }
    if let (Some((ca, _)), Some((cb, _))) = (paths[1].0.particle, paths[1].1.particle) {
        events.push(
            TaggedEvent::entangled(
                "psi1",
                vec![Region::at(ca as i64, g.times[1]), Region::at(cb as i64, g.times[1])],
            )?
            .with_projector("Psi1", labels[1].clone()),
        );
    }
    scn.events = events;
    let left: Vec<String> = g
        .intervals
        .iter()
        .filter(|(_, hi)| *hi < g.source)
        .map(|(lo, hi)| format!("x{lo}-{hi}"))
        .chain(["A".to_string(), "Astar".to_string()])
        .collect();
    let right: Vec<String> = g
        .intervals
        .iter()
        .filter(|(lo, _)| *lo > g.source)
        .map(|(lo, hi)| format!("x{lo}-{hi}"))
        .chain(["B".to_string(), "Bstar".to_string()])
        .collect();
    scn.sides.insert(
        "a".into(),
        super::Side {
            projectors: left,
            events: a_events,
        },
    );
    scn.sides.insert(
        "b".into(),
        super::Side {
            projectors: right,
            events: b_events,
        },
    );
    Ok(())
}

fn flat(t: f64) -> crate::relativistic::Hypersurface {
    crate::relativistic::Hypersurface::flat(t)
}
