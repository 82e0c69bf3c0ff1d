use std::collections::BTreeSet;

use petgraph::algo::{is_cyclic_directed, tarjan_scc};
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use super::foliation::{validate_foliation, Foliation};
use super::geometry::{Hypersurface, SpacetimePoint};
use crate::error::{Error, Result};

/// Slope bounds tried in turn by [`embed_events`].
const SLOPES: [f64; 4] = [0.5, 0.75, 0.9, 0.99];
/// Cells of padding on each side of the emitted surfaces.
const PAD: i64 = 5;

/// Cells of one surface.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub cells: BTreeSet<i64>,
    pub surface: Hypersurface,
}

impl Region {
    pub fn new(cells: impl IntoIterator<Item = i64>, surface: Hypersurface) -> Result<Self> {
        let cells: BTreeSet<i64> = cells.into_iter().collect();
        if cells.is_empty() {
            return Err(Error::Empty("region cells"));
        }
        Ok(Self { cells, surface })
    }

    /// A single cell on the flat surface through `(x, t)`.
    pub fn at(x: i64, t: f64) -> Self {
        Self {
            cells: BTreeSet::from([x]),
            surface: Hypersurface::flat(t),
        }
    }

    pub fn points(&self) -> Vec<SpacetimePoint> {
        self.cells.iter().map(|&c| self.surface.point(c as f64)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "regions")]
pub enum Locality {
    Local(Region),
    /// Regions that must share one surface.
    Entangled(Vec<Region>),
}

/// A projector named in a scenario, taken at a grid time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectorRef {
    pub name: String,
    pub time: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaggedEvent {
    pub id: String,
    pub locality: Locality,
    pub projector: Option<ProjectorRef>,
    pub surface: Option<String>,
}

impl TaggedEvent {
    pub fn local(id: impl Into<String>, region: Region) -> Self {
        Self {
            id: id.into(),
            locality: Locality::Local(region),
            projector: None,
            surface: None,
        }
    }

    pub fn entangled(id: impl Into<String>, regions: Vec<Region>) -> Result<Self> {
        let id = id.into();
        if regions.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "entangled event `{id}` needs at least two regions"
            )));
        }
        for (i, a) in regions.iter().enumerate() {
            for b in &regions[..i] {
                let shared = a.points().iter().any(|p| b.points().contains(p));
                if shared {
                    return Err(Error::InvalidGeometry(format!(
                        "regions of entangled event `{id}` overlap"
                    )));
                }
            }
        }
        Ok(Self {
            id,
            locality: Locality::Entangled(regions),
            projector: None,
            surface: None,
        })
    }

    pub fn with_projector(mut self, name: impl Into<String>, time: impl Into<String>) -> Self {
        self.projector = Some(ProjectorRef {
            name: name.into(),
            time: time.into(),
        });
        self
    }

    pub fn on_surface(mut self, name: impl Into<String>) -> Self {
        self.surface = Some(name.into());
        self
    }

    pub fn regions(&self) -> Vec<&Region> {
        match &self.locality {
            Locality::Local(r) => vec![r],
            Locality::Entangled(rs) => rs.iter().collect(),
        }
    }

    pub fn is_entangled(&self) -> bool {
        matches!(self.locality, Locality::Entangled(_))
    }

    pub fn points(&self) -> Vec<SpacetimePoint> {
        self.regions().iter().flat_map(|r| r.points()).collect()
    }

    fn earliest(&self) -> f64 {
        self.points().iter().map(|p| p.t).fold(f64::INFINITY, f64::min)
    }
}

/// Event-level causal order. An edge `a → b` means some point of `a` lies in
/// the causal past of some point of `b`.
#[derive(Clone, Debug)]
pub struct PrecedenceGraph {
    ids: Vec<String>,
    graph: DiGraph<usize, ()>,
}

impl PrecedenceGraph {
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn node(&self, id: &str) -> Option<NodeIndex> {
        self.ids.iter().position(|x| x == id).map(NodeIndex::new)
    }

    pub fn precedes(&self, a: &str, b: &str) -> bool {
        match (self.node(a), self.node(b)) {
            (Some(x), Some(y)) => self.graph.contains_edge(x, y),
            _ => false,
        }
    }

    /// Neither event precedes the other.
    pub fn unordered(&self, a: &str, b: &str) -> bool {
        !self.precedes(a, b) && !self.precedes(b, a)
    }

    pub fn edges(&self) -> Vec<(String, String)> {
        self.graph
            .edge_indices()
            .filter_map(|e| self.graph.edge_endpoints(e))
            .map(|(a, b)| (self.ids[a.index()].clone(), self.ids[b.index()].clone()))
            .collect()
    }

    pub fn is_acyclic(&self) -> bool {
        !is_cyclic_directed(&self.graph)
    }

    fn into_graph(self) -> DiGraph<usize, ()> {
        self.graph
    }
}

/// Builds the precedence graph over events.
///
/// Regions are compared point by point over all their cells. A cycle among
/// regions is malformed input; a cycle that only appears once the regions of
/// an entangled event are merged is returned, and is what makes
/// [`embed_events`] fail.
pub fn causal_precedence(events: &[TaggedEvent]) -> Result<PrecedenceGraph> {
    for (i, e) in events.iter().enumerate() {
        if events[..i].iter().any(|f| f.id == e.id) {
            return Err(Error::DuplicateLabel(e.id.clone()));
        }
    }
    let mut owner = Vec::new();
    let mut points = Vec::new();
    for (i, e) in events.iter().enumerate() {
        for r in e.regions() {
            owner.push(i);
            points.push(r.points());
        }
    }
    let mut regions: DiGraph<usize, ()> = DiGraph::new();
    let rnodes: Vec<NodeIndex> = owner.iter().map(|&o| regions.add_node(o)).collect();
    let mut events_graph: DiGraph<usize, ()> = DiGraph::new();
    let enodes: Vec<NodeIndex> = (0..events.len()).map(|i| events_graph.add_node(i)).collect();
    for a in 0..points.len() {
        for b in 0..points.len() {
            if a == b {
                continue;
            }
            let linked = points[a]
                .iter()
                .any(|p| points[b].iter().any(|q| p.causally_precedes(q)));
            if linked {
                regions.add_edge(rnodes[a], rnodes[b], ());
                let (ea, eb) = (enodes[owner[a]], enodes[owner[b]]);
                if !events_graph.contains_edge(ea, eb) {
                    events_graph.add_edge(ea, eb, ());
                }
            }
        }
    }
    if is_cyclic_directed(&regions) {
        let cyc = tarjan_scc(&regions)
            .into_iter()
            .find(|c| c.len() > 1)
            .unwrap_or_default();
        let mut ids: Vec<String> = cyc.iter().map(|n| events[regions[*n]].id.clone()).collect();
        ids.sort();
        ids.dedup();
        return Err(Error::CyclicCausality(ids));
    }
    Ok(PrecedenceGraph {
        ids: events.iter().map(|e| e.id.clone()).collect(),
        graph: events_graph,
    })
}

/// Surfaces realizing a causal order, one per event.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Embedding {
    pub order: Vec<String>,
    pub foliation: Foliation,
    /// Largest slope used outside the events' own regions.
    pub slope_bound: f64,
}

/// Places every event on a spacelike surface, in an order compatible with
/// causal precedence, with the regions of each entangled event sharing one
/// surface. Events that meet at a point get the same surface.
pub fn embed_events(events: &[TaggedEvent]) -> Result<Embedding> {
    if events.is_empty() {
        return Err(Error::Empty("events"));
    }
    let prec = causal_precedence(events)?;
    if !prec.is_acyclic() {
        return Err(witness(events, prec));
    }
    let order = causal_order(events, &prec);
    // events meeting at a point (alternative outcomes, parts of an
    // entangled event) share a surface through the union of their points
    let keys: Vec<BTreeSet<(u64, u64)>> = events
        .iter()
        .map(|e| e.points().iter().map(|q| (q.x.to_bits(), q.t.to_bits())).collect())
        .collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        let hits: Vec<usize> = (0..groups.len())
            .filter(|&g| groups[g].iter().any(|&j| !keys[j].is_disjoint(&keys[i])))
            .collect();
        match hits.split_first() {
            None => groups.push(vec![i]),
            Some((&first, rest)) => {
                for &g in rest.iter().rev() {
                    let moved = groups.remove(g);
                    groups[first].extend(moved);
                }
                groups[first].push(i);
            }
        }
    }
    let mut group = vec![0usize; events.len()];
    for (g, members) in groups.iter().enumerate() {
        for &i in members {
            group[i] = g;
        }
    }
    let pts: Vec<Vec<SpacetimePoint>> = groups
        .iter()
        .map(|m| {
            let mut p: Vec<SpacetimePoint> = m.iter().flat_map(|&i| events[i].points()).collect();
            p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.t.total_cmp(&b.t)));
            p.dedup_by(|a, b| a.x == b.x && a.t == b.t);
            p
        })
        .collect();
    let xs = sample_grid(events);
    for s in SLOPES {
        let Some(samples) = layer(&pts, &xs, s) else {
            continue;
        };
        let shared = samples
            .into_iter()
            .map(|ts| Hypersurface::new(simplify(xs.iter().cloned().zip(ts).collect())))
            .collect::<Result<Vec<_>>>()?;
        let distinct = Foliation::new(groups.iter().map(|m| events[m[0]].id.clone()).zip(shared.iter().cloned()).collect());
        if validate_foliation(&distinct).valid {
            let surfaces = order.iter().map(|&i| (events[i].id.clone(), shared[group[i]].clone())).collect();
            return Ok(Embedding {
                order: order.iter().map(|&i| events[i].id.clone()).collect(),
                foliation: Foliation::new(surfaces),
                slope_bound: s,
            });
        }
    }
    Err(Error::InvalidGeometry(
        "no spacelike layering found for the given events".into(),
    ))
}

fn witness(events: &[TaggedEvent], prec: PrecedenceGraph) -> Error {
    let g = prec.into_graph();
    for comp in tarjan_scc(&g) {
        let self_loop = comp.len() == 1 && g.contains_edge(comp[0], comp[0]);
        if comp.len() < 2 && !self_loop {
            continue;
        }
        let mut members: Vec<usize> = comp.iter().map(|n| g[*n]).collect();
        members.sort();
        let ent = members
            .iter()
            .copied()
            .find(|&i| events[i].is_entangled())
            .unwrap_or(members[0]);
        let other = members.iter().copied().find(|&i| i != ent).unwrap_or(ent);
        return Error::EmbeddingImpossible {
            entangled: events[ent].id.clone(),
            other: events[other].id.clone(),
        };
    }
    unreachable!("cyclic graph has a nontrivial component")
}

/// Topological order, earliest event first among those available.
fn causal_order(events: &[TaggedEvent], prec: &PrecedenceGraph) -> Vec<usize> {
    let n = events.len();
    let mut indeg = vec![0usize; n];
    let edges: Vec<(usize, usize)> = prec
        .edges()
        .iter()
        .map(|(a, b)| {
            let ia = prec.ids.iter().position(|x| x == a).expect("known id");
            let ib = prec.ids.iter().position(|x| x == b).expect("known id");
            (ia, ib)
        })
        .collect();
    for &(_, b) in &edges {
        indeg[b] += 1;
    }
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n)
            .filter(|&i| !done[i] && indeg[i] == 0)
            .min_by(|&a, &b| {
                events[a]
                    .earliest()
                    .total_cmp(&events[b].earliest())
                    .then_with(|| a.cmp(&b))
            })
            .expect("acyclic graph always has a source");
        done[next] = true;
        order.push(next);
        for &(a, b) in &edges {
            if a == next {
                indeg[b] -= 1;
            }
        }
    }
    order
}

fn sample_grid(events: &[TaggedEvent]) -> Vec<f64> {
    let pts: Vec<SpacetimePoint> = events.iter().flat_map(|e| e.points()).collect();
    let lo = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min).floor() as i64 - PAD;
    let hi = pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max).ceil() as i64 + PAD;
    let mut xs: Vec<f64> = (lo..=hi).map(|x| x as f64).chain(pts.iter().map(|p| p.x)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Surface through an event's points: straight between them, falling off
/// with slope `s` outside.
fn shape(points: &[SpacetimePoint], s: f64, x: f64) -> f64 {
    let mut p: Vec<SpacetimePoint> = points.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x));
    let (first, last) = (p[0], p[p.len() - 1]);
    if x <= first.x {
        return first.t - s * (first.x - x);
    }
    if x >= last.x {
        return last.t - s * (x - last.x);
    }
    let i = p.partition_point(|q| q.x <= x);
    let (a, b) = (p[i - 1], p[i]);
    a.t + (b.t - a.t) * (x - a.x) / (b.x - a.x)
}

/// `S_i = max(shape_i, S_{i−1} + c_i)`, with `c_i` half the smallest gap
/// left below any event not yet placed.
fn layer(pts: &[Vec<SpacetimePoint>], xs: &[f64], s: f64) -> Option<Vec<Vec<f64>>> {
    let pos = |x: f64| xs.iter().position(|&y| y == x).expect("event x on grid");
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    for (k, own) in pts.iter().enumerate() {
        let g: Vec<f64> = xs.iter().map(|&x| shape(own, s, x)).collect();
        let surf = match out.last() {
            None => g,
            Some(prev) => {
                let gap = pts[k..]
                    .iter()
                    .flatten()
                    .map(|p| p.t - prev[pos(p.x)])
                    .fold(f64::INFINITY, f64::min);
                if gap <= 0.0 {
                    return None;
                }
                let c = (0.5 * gap).min(1.0);
                g.iter().zip(prev).map(|(a, b)| a.max(b + c)).collect()
            }
        };
        for p in own {
            if (surf[pos(p.x)] - p.t).abs() > 1e-9 {
                return None;
            }
        }
        if pts[k + 1..].iter().flatten().any(|p| surf[pos(p.x)] >= p.t) {
            return None;
        }
        out.push(surf);
    }
    Some(out)
}

/// Drops knots where the slope does not change.
fn simplify(knots: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if knots.len() < 3 {
        return knots;
    }
    let mut out = vec![knots[0]];
    for w in knots.windows(3) {
        let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        if (s1 - s2).abs() > 1e-12 {
            out.push(w[1]);
        }
    }
    out.push(knots[knots.len() - 1]);
    out
}
