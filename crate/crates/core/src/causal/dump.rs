use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{build_closure, CausalStructure, EventMeta, Generator, StorageHint};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpEvent {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpEdge {
    pub u: usize,
    pub v: usize,
    pub tau: f64,
    /// Marks a local step edge of the discrete curve graph.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub step: bool,
}

/// JSON form of a causal structure.
///
/// With `closed: true` the edges list every causal pair with its τ and are
/// loaded verbatim. Otherwise they are generators and get closed on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dump {
    pub events: Vec<DumpEvent>,
    pub edges: Vec<DumpEdge>,
    pub closed: bool,
}

impl Dump {
    pub fn from_structure(cs: &CausalStructure) -> Dump {
        let events = cs
            .events()
            .map(|id| DumpEvent {
                id: id.index(),
                base: cs.meta(id).base.clone(),
                t: cs.time(id),
            })
            .collect();
        let edges = cs
            .causal_pairs()
            .into_iter()
            .map(|(u, v, tau)| DumpEdge { u: u.index(), v: v.index(), tau, step: cs.is_step(u, v) })
            .collect();
        Dump { events, edges, closed: true }
    }

    pub fn into_structure(self, hint: StorageHint) -> Result<CausalStructure> {
        let n = self.events.len();
        let mut meta = vec![EventMeta::default(); n];
        let mut seen = vec![false; n];
        for e in self.events {
            if e.id >= n || seen[e.id] {
                return Err(Error::input(format!("event ids must be a permutation of 0..{n}, got {}", e.id)));
            }
            seen[e.id] = true;
            meta[e.id] = EventMeta { base: e.base, t: e.t };
        }
        if self.closed {
            let edges: Vec<_> = self.edges.iter().map(|e| (e.u, e.v, e.tau, e.step)).collect();
            CausalStructure::from_closed_edges(meta, &edges, hint)
        } else {
            let gens: Vec<_> = self.edges.iter().map(|e| Generator::new(e.u, e.v, e.tau)).collect();
            build_closure(meta, &gens, hint)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Dump> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Dump> {
        Dump::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{d4, EventId};

    #[test]
    fn d4_round_trips() {
        let cs = d4();
        let dump = Dump::from_structure(&cs);
        assert_eq!(dump.edges.len(), 5);
        let text = dump.to_json().unwrap();
        let back = Dump::from_json(&text).unwrap();
        assert_eq!(back, dump);
        let cs2 = back.into_structure(StorageHint::Auto).unwrap();
        for a in cs.events() {
            for b in cs.events() {
                assert_eq!(cs.tau(a, b).to_bits(), cs2.tau(a, b).to_bits());
                assert_eq!(cs.chron(a, b), cs2.chron(a, b));
                assert_eq!(cs.is_step(a, b), cs2.is_step(a, b));
            }
        }
    }

    #[test]
    fn open_dump_is_closed_on_load() {
        let text = r#"{"events":[{"id":0,"base":"x0","t":0.0},{"id":1},{"id":2}],
            "edges":[{"u":0,"v":1,"tau":0.1},{"u":1,"v":2,"tau":0.2}],"closed":false}"#;
        let cs = Dump::from_json(text).unwrap().into_structure(StorageHint::Auto).unwrap();
        let t = cs.tau(EventId::new(0), EventId::new(2));
        assert_eq!(t, 0.1 + 0.2);
        assert_eq!(cs.meta(EventId::new(0)).base.as_deref(), Some("x0"));
    }

    #[test]
    fn awkward_floats_survive_text() {
        let v = [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, 123456.789];
        let dump = Dump {
            events: (0..2).map(|i| DumpEvent { id: i, base: None, t: Some(v[i]) }).collect(),
            edges: v.iter().map(|&tau| DumpEdge { u: 0, v: 1, tau, step: false }).collect(),
            closed: true,
        };
        let back = Dump::from_json(&dump.to_json().unwrap()).unwrap();
        assert_eq!(back, dump);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = r#"{"events":[{"id":0},{"id":0}],"edges":[],"closed":true}"#;
        assert!(Dump::from_json(text).unwrap().into_structure(StorageHint::Auto).is_err());
    }
}
