//! JSON description of spacetime events for `embed`.
//!
//! ```json
//! {"events": [
//!   {"id": "a", "regions": [{"cells": [-15], "t": 30}]},
//!   {"id": "E", "regions": [{"cells": [-15], "t": 30}, {"cells": [15], "t": 30}]},
//!   {"id": "tilted", "regions": [{"cells": [0, 1], "surface": [[-40, 10], [40, 50]]}]}
//! ]}
//! ```

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::relativistic::{Hypersurface, Region, TaggedEvent};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventsFile {
    pub events: Vec<EventSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub id: String,
    pub regions: Vec<RegionSpec>,
    #[serde(default)]
    pub projector: Option<ProjectorSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectorSpec {
    pub name: String,
    pub time: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub cells: Vec<i64>,
    /// Flat surface time.
    #[serde(default)]
    pub t: Option<f64>,
    /// Piecewise-linear surface knots `[x, t]`.
    #[serde(default)]
    pub surface: Option<Vec<(f64, f64)>>,
}

impl RegionSpec {
    fn region(&self) -> Result<Region> {
        let surface = match (&self.surface, self.t) {
            (Some(k), None) => Hypersurface::new(k.clone())?,
            (None, Some(t)) if t.is_finite() => Hypersurface::flat(t),
            (None, Some(_)) => return Err(Error::NonFinite("region time")),
            _ => {
                return Err(Error::InvalidGeometry(
                    "a region needs exactly one of `t` and `surface`".into(),
                ))
            }
        };
        Region::new(self.cells.iter().copied(), surface)
    }
}

/// Reads events from JSON text.
pub fn parse_events(text: &str) -> Result<Vec<TaggedEvent>> {
    let file: EventsFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidGeometry(format!("events file: {e}")))?;
    file.events
        .iter()
        .map(|e| {
            let regions = e.regions.iter().map(RegionSpec::region).collect::<Result<Vec<_>>>()?;
            let ev = match regions.len() {
                0 => return Err(Error::Empty("event regions")),
                1 => TaggedEvent::local(e.id.clone(), regions.into_iter().next().expect("one")),
                _ => TaggedEvent::entangled(e.id.clone(), regions)?,
            };
            Ok(match &e.projector {
                Some(p) => ev.with_projector(p.name.clone(), p.time.clone()),
                None => ev,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_local_entangled_and_tilted() {
        let text = r#"{"events": [
            {"id": "a", "regions": [{"cells": [-15], "t": 30}]},
            {"id": "E", "regions": [{"cells": [-15], "t": 40}, {"cells": [15], "t": 40}],
             "projector": {"name": "s0", "time": "t1"}},
            {"id": "s", "regions": [{"cells": [0, 1], "surface": [[-40, 10], [40, 50]]}]}
        ]}"#;
        let ev = parse_events(text).unwrap();
        assert_eq!(ev.len(), 3);
        assert!(ev[1].is_entangled());
        assert_eq!(ev[1].projector.as_ref().unwrap().name, "s0");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_events("{").is_err());
        assert!(parse_events(r#"{"events": [{"id": "a", "regions": []}]}"#).is_err());
        assert!(parse_events(r#"{"events": [{"id": "a", "regions": [{"cells": [0]}]}]}"#).is_err());
        assert!(parse_events(r#"{"events": [{"id": "a", "regions": [{"cells": [0], "t": 1}]}], "x": 1}"#).is_err());
    }
}
