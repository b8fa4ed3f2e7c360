//! Finite causal structures `(X, ≪, ≤, τ)`.
//!
//! A [`CausalStructure`] is immutable once built. Relations are kept as dense
//! bitset rows up to [`DENSE_LIMIT`] events and as sorted adjacency lists above
//! it; both storages answer every query identically. The time separation is
//! either tabulated (structures built from generators or dumps) or evaluated on
//! demand from an [`EventGeometry`] (structures sampled from a product space).
//!
//! Both relations are strict: no event is related to itself.

mod axioms;
mod closure;
mod dump;

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::{par, Error, EventSet, Result};

pub use axioms::{check_axioms, Axiom, AxiomOptions, AxiomReport, Coverage, Violation};
pub use closure::{build_closure, Generator};
pub use dump::{Dump, DumpEdge, DumpEvent};

/// Event count up to which relations are stored as bitset rows.
pub const DENSE_LIMIT: usize = 20_000;

/// Event count up to which a tabulated τ is stored as a dense matrix.
const DENSE_TAU_LIMIT: usize = 4_096;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(u32);

impl EventId {
    pub fn new(index: usize) -> Self {
        EventId(u32::try_from(index).expect("event index exceeds u32"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Chron,
    Causal,
}

/// Optional coordinates attached to an event.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EventMeta {
    pub base: Option<String>,
    pub t: Option<f64>,
}

/// Pairwise relation data between two events.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PairRelation {
    pub chron: bool,
    pub causal: bool,
    pub tau: f64,
}

/// Closed-form geometry behind a sampled structure.
///
/// Implementors must be consistent: `chron ⟹ causal`, `tau > 0 ⟺ chron`.
pub trait EventGeometry: Send + Sync + fmt::Debug {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn time(&self, a: usize) -> f64;

    /// Distance in the base space between the base points of two events.
    fn base_distance(&self, a: usize, b: usize) -> f64;

    fn relate(&self, a: usize, b: usize) -> PairRelation;

    /// The spacetime metric `D = √(Δt² + d²)`.
    fn spacetime_distance(&self, a: usize, b: usize) -> f64 {
        let dt = self.time(b) - self.time(a);
        dt.hypot(self.base_distance(a, b))
    }
}

/// Time-reversed view of another geometry.
#[derive(Debug)]
struct Reversed(Arc<dyn EventGeometry>);

impl EventGeometry for Reversed {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn time(&self, a: usize) -> f64 {
        -self.0.time(a)
    }

    fn base_distance(&self, a: usize, b: usize) -> f64 {
        self.0.base_distance(a, b)
    }

    fn relate(&self, a: usize, b: usize) -> PairRelation {
        self.0.relate(b, a)
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum StorageHint {
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StorageKind {
    Dense,
    Sparse,
}

#[derive(Clone)]
enum Relations {
    Dense {
        chron_f: Vec<EventSet>,
        chron_b: Vec<EventSet>,
        causal_f: Vec<EventSet>,
        causal_b: Vec<EventSet>,
    },
    Sparse {
        chron_f: Vec<Vec<u32>>,
        chron_b: Vec<Vec<u32>>,
        causal_f: Vec<Vec<u32>>,
        causal_b: Vec<Vec<u32>>,
    },
}

#[derive(Clone)]
enum TauStore {
    Dense { n: usize, values: Vec<f64> },
    Sparse(Vec<Vec<(u32, f64)>>),
    Geometry(Arc<dyn EventGeometry>),
}

/// A finite causal structure with time separation.
#[derive(Clone)]
pub struct CausalStructure {
    meta: Vec<EventMeta>,
    rel: Relations,
    tau: TauStore,
    steps: Vec<Vec<u32>>,
    topo: Vec<EventId>,
    geometry: Option<Arc<dyn EventGeometry>>,
}

impl fmt::Debug for CausalStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CausalStructure")
            .field("events", &self.len())
            .field("storage", &self.storage())
            .field("geometric", &self.geometry.is_some())
            .finish()
    }
}

/// Causal diamond with its D-metric diameter, when coordinates exist.
#[derive(Clone, Debug)]
pub struct Diamond {
    pub members: EventSet,
    pub diameter: Option<f64>,
}

impl CausalStructure {
    pub fn len(&self) -> usize {
        self.meta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meta.is_empty()
    }

    pub fn events(&self) -> impl ExactSizeIterator<Item = EventId> + '_ {
        (0..self.len()).map(EventId::new)
    }

    pub fn storage(&self) -> StorageKind {
        match self.rel {
            Relations::Dense { .. } => StorageKind::Dense,
            Relations::Sparse { .. } => StorageKind::Sparse,
        }
    }

    /// Validates a raw index.
    pub fn id(&self, index: usize) -> Result<EventId> {
        if index < self.len() {
            Ok(EventId::new(index))
        } else {
            Err(Error::UnknownEvent(index))
        }
    }

    pub(crate) fn check(&self, id: EventId) -> Result<EventId> {
        self.id(id.index())
    }

    pub fn meta(&self, id: EventId) -> &EventMeta {
        &self.meta[id.index()]
    }

    pub fn time(&self, id: EventId) -> Option<f64> {
        match &self.geometry {
            Some(g) => Some(g.time(id.index())),
            None => self.meta[id.index()].t,
        }
    }

    pub fn geometry(&self) -> Option<&Arc<dyn EventGeometry>> {
        self.geometry.as_ref()
    }

    /// D-metric distance between two events, when coordinates exist.
    pub fn spacetime_distance(&self, a: EventId, b: EventId) -> Option<f64> {
        self.geometry
            .as_ref()
            .map(|g| g.spacetime_distance(a.index(), b.index()))
    }

    pub fn base_distance(&self, a: EventId, b: EventId) -> Option<f64> {
        self.geometry
            .as_ref()
            .map(|g| g.base_distance(a.index(), b.index()))
    }

    pub fn empty_set(&self) -> EventSet {
        EventSet::empty(self.len())
    }

    pub fn full_set(&self) -> EventSet {
        EventSet::full(self.len())
    }

    pub fn chron(&self, a: EventId, b: EventId) -> bool {
        match &self.rel {
            Relations::Dense { chron_f, .. } => chron_f[a.index()].contains(b),
            Relations::Sparse { chron_f, .. } => chron_f[a.index()].binary_search(&b.0).is_ok(),
        }
    }

    pub fn causal(&self, a: EventId, b: EventId) -> bool {
        match &self.rel {
            Relations::Dense { causal_f, .. } => causal_f[a.index()].contains(b),
            Relations::Sparse { causal_f, .. } => causal_f[a.index()].binary_search(&b.0).is_ok(),
        }
    }

    pub fn related(&self, a: EventId, b: EventId, kind: RelationKind) -> bool {
        match kind {
            RelationKind::Chron => self.chron(a, b),
            RelationKind::Causal => self.causal(a, b),
        }
    }

    /// Causal but not chronological.
    pub fn null_related(&self, a: EventId, b: EventId) -> bool {
        self.causal(a, b) && !self.chron(a, b)
    }

    pub fn tau(&self, a: EventId, b: EventId) -> f64 {
        match &self.tau {
            TauStore::Dense { n, values } => values[a.index() * n + b.index()],
            TauStore::Sparse(rows) => {
                let row = &rows[a.index()];
                match row.binary_search_by_key(&b.0, |&(v, _)| v) {
                    Ok(i) => row[i].1,
                    Err(_) => 0.0,
                }
            }
            TauStore::Geometry(g) => {
                if a == b {
                    0.0
                } else {
                    g.relate(a.index(), b.index()).tau
                }
            }
        }
    }

    /// Strict future row of one event.
    pub fn future_of(&self, a: EventId, kind: RelationKind) -> Cow<'_, EventSet> {
        self.row(a, kind, true)
    }

    /// Strict past row of one event.
    pub fn past_of(&self, a: EventId, kind: RelationKind) -> Cow<'_, EventSet> {
        self.row(a, kind, false)
    }

    fn row(&self, a: EventId, kind: RelationKind, forward: bool) -> Cow<'_, EventSet> {
        let i = a.index();
        match (&self.rel, kind, forward) {
            (Relations::Dense { chron_f, .. }, RelationKind::Chron, true) => Cow::Borrowed(&chron_f[i]),
            (Relations::Dense { chron_b, .. }, RelationKind::Chron, false) => Cow::Borrowed(&chron_b[i]),
            (Relations::Dense { causal_f, .. }, RelationKind::Causal, true) => Cow::Borrowed(&causal_f[i]),
            (Relations::Dense { causal_b, .. }, RelationKind::Causal, false) => Cow::Borrowed(&causal_b[i]),
            (Relations::Sparse { chron_f, chron_b, causal_f, causal_b }, kind, fwd) => {
                let list = match (kind, fwd) {
                    (RelationKind::Chron, true) => &chron_f[i],
                    (RelationKind::Chron, false) => &chron_b[i],
                    (RelationKind::Causal, true) => &causal_f[i],
                    (RelationKind::Causal, false) => &causal_b[i],
                };
                Cow::Owned(EventSet::from_ids(self.len(), list.iter().map(|&v| EventId(v))))
            }
        }
    }

    /// Number of strict successors without materializing a set.
    pub fn future_count(&self, a: EventId, kind: RelationKind) -> usize {
        match (&self.rel, kind) {
            (Relations::Dense { chron_f, .. }, RelationKind::Chron) => chron_f[a.index()].len(),
            (Relations::Dense { causal_f, .. }, RelationKind::Causal) => causal_f[a.index()].len(),
            (Relations::Sparse { chron_f, .. }, RelationKind::Chron) => chron_f[a.index()].len(),
            (Relations::Sparse { causal_f, .. }, RelationKind::Causal) => causal_f[a.index()].len(),
        }
    }

    /// The `k`-th strict successor in id order.
    pub fn nth_successor(&self, a: EventId, kind: RelationKind, k: usize) -> Option<EventId> {
        match (&self.rel, kind) {
            (Relations::Dense { chron_f, .. }, RelationKind::Chron) => chron_f[a.index()].nth(k),
            (Relations::Dense { causal_f, .. }, RelationKind::Causal) => causal_f[a.index()].nth(k),
            (Relations::Sparse { chron_f, .. }, RelationKind::Chron) => chron_f[a.index()].get(k).map(|&v| EventId(v)),
            (Relations::Sparse { causal_f, .. }, RelationKind::Causal) => causal_f[a.index()].get(k).map(|&v| EventId(v)),
        }
    }

    /// Strict successors in id order, without allocating for dense storage.
    pub fn successors(&self, a: EventId, kind: RelationKind) -> Box<dyn Iterator<Item = EventId> + '_> {
        match (&self.rel, kind) {
            (Relations::Dense { chron_f, .. }, RelationKind::Chron) => Box::new(chron_f[a.index()].iter()),
            (Relations::Dense { causal_f, .. }, RelationKind::Causal) => Box::new(causal_f[a.index()].iter()),
            (Relations::Sparse { chron_f, .. }, RelationKind::Chron) => Box::new(chron_f[a.index()].iter().map(|&v| EventId(v))),
            (Relations::Sparse { causal_f, .. }, RelationKind::Causal) => Box::new(causal_f[a.index()].iter().map(|&v| EventId(v))),
        }
    }

    /// `I⁻(S)` or `J⁻(S)` (strict), i.e. every event below some member of `S`.
    pub fn past(&self, set: &[EventId], kind: RelationKind) -> Result<EventSet> {
        self.sweep(set, kind, false)
    }

    /// `I⁺(S)` or `J⁺(S)` (strict).
    pub fn future(&self, set: &[EventId], kind: RelationKind) -> Result<EventSet> {
        self.sweep(set, kind, true)
    }

    pub fn past_of_set(&self, set: &EventSet, kind: RelationKind) -> EventSet {
        let mut out = self.empty_set();
        for id in set.iter() {
            out.union_with(&self.past_of(id, kind));
        }
        out
    }

    pub fn future_of_set(&self, set: &EventSet, kind: RelationKind) -> EventSet {
        let mut out = self.empty_set();
        for id in set.iter() {
            out.union_with(&self.future_of(id, kind));
        }
        out
    }

    fn sweep(&self, set: &[EventId], kind: RelationKind, forward: bool) -> Result<EventSet> {
        let mut out = self.empty_set();
        for &id in set {
            let id = self.check(id)?;
            out.union_with(&self.row(id, kind, forward));
        }
        Ok(out)
    }

    /// True iff consecutive elements are related under `kind`.
    pub fn is_chain(&self, seq: &[EventId], kind: RelationKind) -> bool {
        seq.iter().all(|&e| e.index() < self.len())
            && seq.windows(2).all(|w| self.related(w[0], w[1], kind))
    }

    /// `J⁺(a) ∩ J⁻(b)` or `I⁺(a) ∩ I⁻(b)`; endpoints are added only on request.
    pub fn diamond(&self, a: EventId, b: EventId, kind: RelationKind, include_endpoints: bool) -> Result<Diamond> {
        let a = self.check(a)?;
        let b = self.check(b)?;
        let mut members = self.future_of(a, kind).into_owned();
        members.intersect_with(&self.past_of(b, kind));
        if include_endpoints && (a == b || self.related(a, b, kind)) {
            members.insert(a);
            members.insert(b);
        }
        let diameter = self.geometry.as_ref().map(|g| {
            let ids: Vec<usize> = members.iter().map(EventId::index).collect();
            let mut best = 0.0f64;
            for (k, &i) in ids.iter().enumerate() {
                for &j in &ids[k + 1..] {
                    best = best.max(g.spacetime_distance(i, j));
                }
            }
            best
        });
        Ok(Diamond { members, diameter })
    }

    /// Local step successors: the edges a discrete curve may take between
    /// consecutive events.
    pub fn steps(&self, a: EventId) -> impl Iterator<Item = EventId> + '_ {
        self.steps[a.index()].iter().map(|&v| EventId(v))
    }

    pub fn step_count(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    pub fn is_step(&self, a: EventId, b: EventId) -> bool {
        self.steps[a.index()].binary_search(&b.0).is_ok()
    }

    /// A linear extension of the causal order.
    pub fn topo_order(&self) -> &[EventId] {
        &self.topo
    }

    /// Events with no chronological successor.
    pub fn chron_maximal(&self) -> EventSet {
        let mut out = self.empty_set();
        for id in self.events() {
            if self.future_count(id, RelationKind::Chron) == 0 {
                out.insert(id);
            }
        }
        out
    }

    /// The same structure with the time orientation flipped.
    pub fn time_reversed(&self) -> CausalStructure {
        let rel = match &self.rel {
            Relations::Dense { chron_f, chron_b, causal_f, causal_b } => Relations::Dense {
                chron_f: chron_b.clone(),
                chron_b: chron_f.clone(),
                causal_f: causal_b.clone(),
                causal_b: causal_f.clone(),
            },
            Relations::Sparse { chron_f, chron_b, causal_f, causal_b } => Relations::Sparse {
                chron_f: chron_b.clone(),
                chron_b: chron_f.clone(),
                causal_f: causal_b.clone(),
                causal_b: causal_f.clone(),
            },
        };
        let n = self.len();
        let tau = match &self.tau {
            TauStore::Dense { n, values } => {
                let mut t = vec![0.0; n * n];
                for i in 0..*n {
                    for j in 0..*n {
                        t[j * n + i] = values[i * n + j];
                    }
                }
                TauStore::Dense { n: *n, values: t }
            }
            TauStore::Sparse(rows) => {
                let mut t: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
                for (i, row) in rows.iter().enumerate() {
                    for &(j, v) in row {
                        t[j as usize].push((i as u32, v));
                    }
                }
                TauStore::Sparse(t)
            }
            TauStore::Geometry(g) => TauStore::Geometry(Arc::new(Reversed(g.clone()))),
        };
        let mut steps: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (i, row) in self.steps.iter().enumerate() {
            for &j in row {
                steps[j as usize].push(i as u32);
            }
        }
        let meta = self
            .meta
            .iter()
            .map(|m| EventMeta { base: m.base.clone(), t: m.t.map(|t| -t) })
            .collect();
        let geometry = match &tau {
            TauStore::Geometry(g) => Some(g.clone()),
            _ => None,
        };
        let mut topo = self.topo.clone();
        topo.reverse();
        CausalStructure { meta, rel, tau, steps, topo, geometry }
    }

    /// Builds a structure whose relations and τ come from a closed-form geometry.
    ///
    /// `steps` lists local step successors per event; it is sorted here.
    pub fn from_geometry(
        meta: Vec<EventMeta>,
        geometry: Arc<dyn EventGeometry>,
        mut steps: Vec<Vec<u32>>,
        hint: StorageHint,
    ) -> Result<CausalStructure> {
        let n = geometry.len();
        if meta.len() != n || steps.len() != n {
            return Err(Error::input("metadata, steps and geometry disagree on event count"));
        }
        let dense = use_dense(n, hint);
        let g = geometry.as_ref();
        let (chron_f, causal_f): (Vec<_>, Vec<_>) = par::map_range(n, |i| {
            let mut chron = Vec::new();
            let mut causal = Vec::new();
            for j in 0..n {
                if i == j {
                    continue;
                }
                let r = g.relate(i, j);
                if r.causal {
                    causal.push(j as u32);
                }
                if r.chron {
                    chron.push(j as u32);
                }
            }
            (chron, causal)
        })
        .into_iter()
        .unzip();
        let chron_b = transpose(n, &chron_f);
        let causal_b = transpose(n, &causal_f);
        let rel = Relations::from_lists(n, dense, chron_f, chron_b, causal_f, causal_b);
        for row in &mut steps {
            row.sort_unstable();
            row.dedup();
        }
        let mut topo: Vec<EventId> = (0..n).map(EventId::new).collect();
        topo.sort_by(|a, b| {
            g.time(a.index())
                .total_cmp(&g.time(b.index()))
                .then(a.cmp(b))
        });
        Ok(CausalStructure {
            meta,
            rel,
            tau: TauStore::Geometry(geometry.clone()),
            steps,
            topo,
            geometry: Some(geometry),
        })
    }

    /// Builds a structure from an explicit, already closed, list of causal pairs.
    ///
    /// Pairs with `tau > 0` are chronological. No closure is applied: the
    /// result may violate the axioms, which is what [`check_axioms`] is for.
    /// When no step edges are flagged, the covering relation (links) is used.
    pub fn from_closed_edges(meta: Vec<EventMeta>, edges: &[(usize, usize, f64, bool)], hint: StorageHint) -> Result<CausalStructure> {
        let n = meta.len();
        let mut chron_f = vec![Vec::new(); n];
        let mut chron_b = vec![Vec::new(); n];
        let mut causal_f = vec![Vec::new(); n];
        let mut causal_b = vec![Vec::new(); n];
        let mut tau_rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut steps = vec![Vec::new(); n];
        let mut any_step = false;
        for &(u, v, tau, step) in edges {
            if u >= n {
                return Err(Error::UnknownEvent(u));
            }
            if v >= n {
                return Err(Error::UnknownEvent(v));
            }
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(Error::input(format!("edge ({u},{v}) has invalid tau {tau}")));
            }
            causal_f[u].push(v as u32);
            causal_b[v].push(u as u32);
            if tau > 0.0 {
                chron_f[u].push(v as u32);
                chron_b[v].push(u as u32);
                tau_rows[u].push((v as u32, tau));
            }
            if step {
                steps[u].push(v as u32);
                any_step = true;
            }
        }
        for rows in [&mut chron_f, &mut chron_b, &mut causal_f, &mut causal_b, &mut steps] {
            for row in rows.iter_mut() {
                row.sort_unstable();
                row.dedup();
            }
        }
        for row in &mut tau_rows {
            row.sort_by_key(|&(v, _)| v);
            row.dedup_by_key(|&mut (v, _)| v);
        }
        let topo = topological_order(n, &causal_f).unwrap_or_else(|_| (0..n).map(EventId::new).collect());
        let dense = use_dense(n, hint);
        let rel = Relations::from_lists(n, dense, chron_f, chron_b, causal_f, causal_b);
        let mut cs = CausalStructure {
            meta,
            rel,
            tau: tau_store(n, tau_rows),
            steps,
            topo,
            geometry: None,
        };
        if !any_step {
            cs.steps = cs.links();
        }
        Ok(cs)
    }

    pub(crate) fn from_parts_tabulated(
        meta: Vec<EventMeta>,
        lists: [Vec<Vec<u32>>; 4],
        tau_rows: Vec<Vec<(u32, f64)>>,
        steps: Vec<Vec<u32>>,
        topo: Vec<EventId>,
        hint: StorageHint,
    ) -> CausalStructure {
        let n = meta.len();
        let [chron_f, chron_b, causal_f, causal_b] = lists;
        let rel = Relations::from_lists(n, use_dense(n, hint), chron_f, chron_b, causal_f, causal_b);
        CausalStructure { meta, rel, tau: tau_store(n, tau_rows), steps, topo, geometry: None }
    }

    /// Covering pairs of the causal order: `x ≤ y` with nothing strictly between.
    pub fn links(&self) -> Vec<Vec<u32>> {
        par::map_range(self.len(), |i| {
            let a = EventId::new(i);
            let fut = self.future_of(a, RelationKind::Causal);
            fut.iter()
                .filter(|&b| fut.is_disjoint(&self.past_of(b, RelationKind::Causal)))
                .map(|b| b.0)
                .collect()
        })
    }

    /// Every causal pair with its τ, in row order.
    pub fn causal_pairs(&self) -> Vec<(EventId, EventId, f64)> {
        let mut out = Vec::new();
        for a in self.events() {
            for b in self.future_of(a, RelationKind::Causal).iter() {
                out.push((a, b, self.tau(a, b)));
            }
        }
        out
    }
}

fn use_dense(n: usize, hint: StorageHint) -> bool {
    match hint {
        StorageHint::Auto => n <= DENSE_LIMIT,
        StorageHint::Dense => true,
        StorageHint::Sparse => false,
    }
}

fn tau_store(n: usize, rows: Vec<Vec<(u32, f64)>>) -> TauStore {
    if n <= DENSE_TAU_LIMIT {
        let mut values = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                values[i * n + j as usize] = v;
            }
        }
        TauStore::Dense { n, values }
    } else {
        TauStore::Sparse(rows)
    }
}

impl Relations {
    fn from_lists(
        n: usize,
        dense: bool,
        chron_f: Vec<Vec<u32>>,
        chron_b: Vec<Vec<u32>>,
        causal_f: Vec<Vec<u32>>,
        causal_b: Vec<Vec<u32>>,
    ) -> Relations {
        if dense {
            let to_bits = |lists: Vec<Vec<u32>>| -> Vec<EventSet> {
                lists
                    .into_iter()
                    .map(|l| {
                        let mut bits = FixedBitSet::with_capacity(n);
                        for v in l {
                            bits.insert(v as usize);
                        }
                        EventSet::from_bits(bits)
                    })
                    .collect()
            };
            Relations::Dense {
                chron_f: to_bits(chron_f),
                chron_b: to_bits(chron_b),
                causal_f: to_bits(causal_f),
                causal_b: to_bits(causal_b),
            }
        } else {
            Relations::Sparse { chron_f, chron_b, causal_f, causal_b }
        }
    }
}

pub(crate) fn transpose(n: usize, rows: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for &j in row {
            out[j as usize].push(i as u32);
        }
    }
    out
}

/// Kahn's algorithm; on failure returns the events left on a cycle.
pub(crate) fn topological_order(n: usize, succ: &[Vec<u32>]) -> std::result::Result<Vec<EventId>, Vec<usize>> {
    let mut indeg = vec![0usize; n];
    for row in succ {
        for &v in row {
            indeg[v as usize] += 1;
        }
    }
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
        (0..n).filter(|&i| indeg[i] == 0).map(std::cmp::Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(u)) = ready.pop() {
        order.push(EventId::new(u));
        for &v in &succ[u] {
            let v = v as usize;
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(std::cmp::Reverse(v));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&i| indeg[i] > 0).collect())
    }
}


#[cfg(test)]
pub(crate) use tests::d4;
