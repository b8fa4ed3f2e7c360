use serde::Serialize;

use crate::causal::{CausalStructure, EventId, RelationKind};
use crate::product::{ProductEvent, ProductSpace, ProductStructure, Region};
use crate::{Error, EventSet, Result};

/// Bulk/horizon split of a truncated structure.
///
/// Every event has a depth, the proper time still available to its future
/// inside the sampled region. The bulk holds events of depth at least
/// `margin`; the top slab holds events of depth below `top_width`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Horizon {
    pub margin: f64,
    pub top_width: f64,
    #[serde(skip)]
    pub bulk: EventSet,
    #[serde(skip)]
    pub top: EventSet,
}

impl Horizon {
    pub fn from_depths(cs: &CausalStructure, depths: &[f64], margin: f64, top_width: f64) -> Result<Horizon> {
        if depths.len() != cs.len() {
            return Err(Error::input("one depth per event is required"));
        }
        if !(margin > 0.0 && top_width > 0.0) {
            return Err(Error::input(format!("margin {margin} and top width {top_width} must be positive")));
        }
        let pick = |f: &dyn Fn(f64) -> bool| EventSet::from_ids(cs.len(), cs.events().filter(|e| f(depths[e.index()])));
        Ok(Horizon { margin, top_width, bulk: pick(&|d| d >= margin), top: pick(&|d| d < top_width) })
    }

    /// Depth `t_end − t` from event times, for structures without geometry.
    pub fn by_time(cs: &CausalStructure, t_end: f64, margin: f64, top_width: f64) -> Result<Horizon> {
        let depths = cs
            .events()
            .map(|e| cs.time(e).map(|t| t_end - t).ok_or_else(|| Error::input("horizon needs event times")))
            .collect::<Result<Vec<f64>>>()?;
        Horizon::from_depths(cs, &depths, margin, top_width)
    }

    /// Horizon of a sampled product.
    ///
    /// Depth is `t_max − t` on full and band regions and `τ(e, hi)` in a
    /// diamond. The automatic margin is `diam Σ + 3s` (`s` the mean sample
    /// spacing), capped at half the largest depth so the bulk is never empty;
    /// the top slab is `3s` wide. With the uncapped margin every bulk event is
    /// chronologically below every top event.
    pub fn for_product(st: &ProductStructure, margin: Option<f64>) -> Result<Horizon> {
        let ps = st.space();
        let spacing = st.mean_spacing().max(f64::EPSILON);
        let depths: Vec<f64> = st
            .samples()
            .events()
            .iter()
            .map(|e| event_depth(ps, e))
            .collect();
        let deepest = depths.iter().copied().fold(0.0, f64::max);
        let margin = match margin {
            Some(m) => m,
            None => (ps.sigma().diameter() + 3.0 * spacing).min(deepest / 2.0),
        };
        Horizon::from_depths(st.cs(), &depths, margin, 3.0 * spacing)
    }
}

/// Proper time left to the future of `e` inside the window and region.
pub(crate) fn event_depth(ps: &ProductSpace, e: &ProductEvent) -> f64 {
    match ps.region() {
        Region::Diamond { hi, .. } => ps.tau(e, hi),
        _ => ps.window().1 - e.t,
    }
}

/// Supremum of the times of the fiber over `x` inside the window and region.
pub(crate) fn fiber_top(ps: &ProductSpace, x: &crate::metric::Point) -> f64 {
    match ps.region() {
        Region::Diamond { hi, .. } => hi.t - ps.sigma().dist(x, &hi.x),
        _ => ps.window().1,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryClass {
    /// Top-slab events whose chains land in this class, ascending.
    pub top_events: Vec<EventId>,
    /// A chronological chain ending at the first top event.
    pub representative: Vec<EventId>,
    pub bulk_past_size: usize,
    #[serde(skip)]
    pub bulk_past: EventSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryClasses {
    pub count: usize,
    pub bulk_size: usize,
    pub top_size: usize,
    pub horizon: Horizon,
    pub classes: Vec<BoundaryClass>,
}

/// Groups chains reaching the top slab by their past inside the bulk.
///
/// A chain's past is the past of its last event, so each top event stands for
/// the chains ending there. Classes are listed in order of their first top
/// event.
pub fn future_boundary_classes(cs: &CausalStructure, horizon: &Horizon) -> Result<BoundaryClasses> {
    if horizon.top.is_empty() {
        return Err(Error::EmptyHorizon);
    }
    let mut classes: Vec<BoundaryClass> = Vec::new();
    for m in horizon.top.iter() {
        let mut past = cs.past_of(m, RelationKind::Chron).into_owned();
        past.intersect_with(&horizon.bulk);
        match classes.iter_mut().find(|c| c.bulk_past == past) {
            Some(c) => c.top_events.push(m),
            None => classes.push(BoundaryClass {
                top_events: vec![m],
                representative: Vec::new(),
                bulk_past_size: past.len(),
                bulk_past: past,
            }),
        }
    }
    for c in &mut classes {
        c.representative = deep_chain(cs, c.top_events[0]);
    }
    Ok(BoundaryClasses {
        count: classes.len(),
        bulk_size: horizon.bulk.len(),
        top_size: horizon.top.len(),
        horizon: horizon.clone(),
        classes,
    })
}

/// A chronological chain ending at `m`, built backwards through the latest
/// chronological predecessor that is a step, or any predecessor otherwise.
fn deep_chain(cs: &CausalStructure, m: EventId) -> Vec<EventId> {
    let order = cs.topo_order();
    let mut rank = vec![0usize; cs.len()];
    for (i, &e) in order.iter().enumerate() {
        rank[e.index()] = i;
    }
    let mut chain = vec![m];
    let mut cur = m;
    loop {
        let past = cs.past_of(cur, RelationKind::Chron);
        let next = past
            .iter()
            .filter(|&p| cs.is_step(p, cur))
            .max_by_key(|p| rank[p.index()])
            .or_else(|| past.iter().max_by_key(|p| rank[p.index()]));
        match next {
            Some(p) => {
                chain.push(p);
                cur = p;
            }
            None => break,
        }
    }
    chain.reverse();
    chain
}
