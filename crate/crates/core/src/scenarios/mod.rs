//! The four worked models: spin half with a measuring apparatus, a wave
//! packet with two detectors, EPR-Bohm, and Hardy's interferometers.
//!
//! Each [`Scenario`] carries its dynamics (one propagator set per frame),
//! named states and projectors, families, spacetime events and a registry
//! of expected results that [`Scenario::run_expectations`] re-derives.

mod epr;
mod hardy;
mod registry;
mod spin_half;
mod tensor;
mod wavepacket;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use epr::build_epr;
pub use hardy::build_hardy;
pub use registry::{Expect, Expectation, ExpectationOutcome, Provenance, Query};
pub use spin_half::build_spin_half;
pub use wavepacket::{build_wavepacket, build_wavepacket_default, WavepacketGeometry};

use crate::dynamics::PropagatorSet;
use crate::error::{Error, Result};
use crate::histories::Family;
use crate::hilbert::{Ket, Operator, Projector};
use crate::relativistic::{CovarianceMap, TaggedEvent};

/// CLI names of the built-in scenarios.
pub const SCENARIO_NAMES: [&str; 4] = ["spin-half", "wavepacket", "epr", "hardy"];

/// Builds a scenario by CLI name with default parameters.
pub fn build(name: &str) -> Result<Scenario> {
    match name {
        "spin-half" => build_spin_half(),
        "wavepacket" => build_wavepacket_default(),
        "epr" => build_epr(),
        "hardy" => build_hardy(false),
        "hardy-detectors" => build_hardy(true),
        _ => Err(Error::UnknownName(name.to_string())),
    }
}

/// Projectors and events belonging to one spatial side of a scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Side {
    /// Named projectors acting only on this side's degrees of freedom.
    pub projectors: Vec<String>,
    /// Ids of local events on this side.
    pub events: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub(crate) name: String,
    pub(crate) basis_labels: Vec<String>,
    pub(crate) frames: BTreeMap<String, Arc<PropagatorSet>>,
    pub(crate) default_frame: String,
    pub(crate) kets: BTreeMap<String, Ket>,
    pub(crate) projectors: BTreeMap<String, Projector>,
    pub(crate) families: Vec<Family>,
    pub(crate) events: Vec<TaggedEvent>,
    pub(crate) sides: BTreeMap<String, Side>,
    pub(crate) expected: Vec<Expectation>,
}

impl Scenario {
    pub(crate) fn new(name: &str, basis_labels: Vec<String>, default: PropagatorSet) -> Self {
        let frame = default.name().to_string();
        Self {
            name: name.to_string(),
            basis_labels,
            frames: BTreeMap::from([(frame.clone(), Arc::new(default))]),
            default_frame: frame,
            kets: BTreeMap::new(),
            projectors: BTreeMap::new(),
            families: Vec::new(),
            events: Vec::new(),
            sides: BTreeMap::new(),
            expected: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.default_propagators().dim()
    }

    /// Per-time dimensions of the default frame.
    pub fn dims(&self) -> Vec<usize> {
        self.default_propagators().dims()
    }

    /// Names of the product basis vectors, e.g. `zplus.X`.
    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn default_frame(&self) -> &str {
        &self.default_frame
    }

    pub fn default_propagators(&self) -> &Arc<PropagatorSet> {
        &self.frames[&self.default_frame]
    }

    pub fn frames(&self) -> &BTreeMap<String, Arc<PropagatorSet>> {
        &self.frames
    }

    pub fn frame(&self, name: &str) -> Result<&Arc<PropagatorSet>> {
        self.frames
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn kets(&self) -> &BTreeMap<String, Ket> {
        &self.kets
    }

    pub fn ket(&self, name: &str) -> Result<&Ket> {
        self.kets
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn projectors(&self) -> &BTreeMap<String, Projector> {
        &self.projectors
    }

    pub fn projector(&self, name: &str) -> Result<&Projector> {
        self.projectors
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn family(&self, name: &str) -> Result<&Family> {
        self.families
            .iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn events(&self) -> &[TaggedEvent] {
        &self.events
    }

    pub fn event(&self, id: &str) -> Result<&TaggedEvent> {
        self.events
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownName(id.to_string()))
    }

    pub fn sides(&self) -> &BTreeMap<String, Side> {
        &self.sides
    }

    pub fn expected(&self) -> &[Expectation] {
        &self.expected
    }

    /// Evaluates every registered expectation.
    pub fn run_expectations(&self) -> Vec<ExpectationOutcome> {
        self.expected.iter().map(|e| e.evaluate(self)).collect()
    }

    /// The scenario seen through per-time unitaries `L_j`: every frame's
    /// steps become `L_{j+1} S_j L_j†` and every family projector
    /// `L_j P L_j†`. Named kets and projectors carry no time, so they are
    /// carried along only when all `L_j` coincide; otherwise they are
    /// dropped together with the expectations and event projectors that
    /// refer to them.
    pub fn relabel(&self, maps: &CovarianceMap) -> Result<Scenario> {
        let frames = self
            .frames
            .iter()
            .map(|(n, p)| Ok((n.clone(), Arc::new(p.transform(maps.maps())?))))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let families = self
            .families
            .iter()
            .map(|f| {
                let props = frames
                    .get(f.propagators().name())
                    .ok_or_else(|| Error::UnknownName(f.propagators().name().to_string()))?;
                f.transformed(maps.maps(), props.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Scenario {
            name: self.name.clone(),
            basis_labels: self.basis_labels.clone(),
            frames,
            default_frame: self.default_frame.clone(),
            kets: BTreeMap::new(),
            projectors: BTreeMap::new(),
            families,
            events: self.events.clone(),
            sides: self.sides.clone(),
            expected: self.expected.clone(),
        };
        if let Some(l) = maps.uniform() {
            for (n, k) in &self.kets {
                out.kets.insert(n.clone(), l.apply(k)?);
            }
            for (n, p) in &self.projectors {
                out.projectors.insert(n.clone(), p.conjugate_by(l)?);
            }
        } else {
            out.expected.retain(|e| !e.query.uses_named_projectors());
            for e in &mut out.events {
                e.projector = None;
            }
            for s in out.sides.values_mut() {
                s.projectors.clear();
            }
        }
        Ok(out)
    }

    pub(crate) fn add_frame(&mut self, props: PropagatorSet) {
        self.frames.insert(props.name().to_string(), Arc::new(props));
    }

    pub(crate) fn add_ket(&mut self, name: &str, ket: Ket) -> Result<()> {
        self.add_projector(name, Projector::from_ket(&ket)?);
        self.kets.insert(name.to_string(), ket.with_label(name));
        Ok(())
    }

    pub(crate) fn add_projector(&mut self, name: &str, p: Projector) {
        self.projectors.insert(name.to_string(), p);
    }

    pub(crate) fn add_family(&mut self, f: Family) {
        self.families.push(f);
    }

    pub(crate) fn expect(&mut self, e: Expectation) {
        self.expected.push(e);
    }

    pub(crate) fn side(&mut self, name: &str, projectors: &[&str], events: &[&str]) {
        self.sides.insert(
            name.to_string(),
            Side {
                projectors: projectors.iter().map(|s| s.to_string()).collect(),
                events: events.iter().map(|s| s.to_string()).collect(),
            },
        );
    }

    /// Heisenberg projector at the default frame's first time.
    pub fn heisenberg(&self, projector: &str, time: &str) -> Result<Projector> {
        let props = self.default_propagators();
        let j = props.grid().resolve(time)?;
        props.heisenberg(self.projector(projector)?, j, 0)
    }

    /// Default-frame propagator between two labelled times.
    pub fn propagator(&self, to: &str, from: &str) -> Result<Operator> {
        let props = self.default_propagators();
        props.propagator(props.grid().resolve(to)?, props.grid().resolve(from)?)
    }
}

#[cfg(test)]
mod tests;
