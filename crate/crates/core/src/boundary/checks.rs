use serde::Serialize;

use super::classes::{event_depth, fiber_top, Horizon};
use crate::causal::{CausalStructure, EventId, RelationKind};
use crate::metric::{MetricSpec, Point};
use crate::product::{ProductEvent, ProductStructure, Region};
use crate::{Error, EventSet, Result, Status};

/// Uncovered or excepted events listed in reports.
const EXAMPLES: usize = 10;

/// Events farther than `margin` from every edge of the window, the region and
/// the base.
pub fn interior_events(st: &ProductStructure, margin: f64) -> EventSet {
    let ps = st.space();
    let (t0, t1) = ps.window();
    let sigma = ps.sigma();
    let inside = |e: &ProductEvent| {
        let window = e.t - t0 > margin && t1 - e.t > margin;
        let region = match ps.region() {
            Region::Full => true,
            Region::Diamond { lo, hi } => {
                (e.t - lo.t) - sigma.dist(&lo.x, &e.x) > margin && (hi.t - e.t) - sigma.dist(&e.x, &hi.x) > margin
            }
            Region::Band { center, half_width } => half_width - sigma.dist(center, &e.x) > margin,
        };
        let base = match (sigma.spec(), e.x) {
            (MetricSpec::Interval { l }, Point::Line(x)) => x > margin && l - x > margin,
            (MetricSpec::Tripod { legs }, Point::Tripod { leg, r }) => legs[leg as usize] - r > margin,
            _ => true,
        };
        window && region && base
    };
    EventSet::from_ids(st.len(), st.samples().events().iter().enumerate().filter(|(_, e)| inside(e)).map(|(i, _)| EventId::new(i)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub status: Status,
    /// Candidate whose past equals the past of the chain.
    pub found: Option<EventId>,
    /// Spacetime distance from the last chain event to `found`.
    pub distance: Option<f64>,
    /// Candidates with the right past, before the distance test.
    pub past_matches: usize,
    /// A chronological pair inside the chain, which voids the check.
    pub chron_pair: Option<(EventId, EventId)>,
}

/// Looks for a limit of a causal chain without chronological jumps.
///
/// The limit must be a candidate event with the same chronological past as
/// the chain, within `cell` of its last event when distances are known.
/// Passing only interior events as candidates rules out limits on the edge of
/// a truncated region.
pub fn check_chain_convergence(cs: &CausalStructure, chain: &[EventId], candidates: &EventSet, cell: f64) -> Result<ConvergenceReport> {
    if chain.is_empty() {
        return Err(Error::InvalidChain("empty chain".into()));
    }
    for &e in chain {
        cs.check(e)?;
    }
    if !cs.is_chain(chain, RelationKind::Causal) {
        return Err(Error::InvalidChain("events are not causally ordered".into()));
    }
    let mut report = ConvergenceReport { status: Status::Fail, found: None, distance: None, past_matches: 0, chron_pair: None };
    report.chron_pair = (0..chain.len())
        .find_map(|i| chain[i + 1..].iter().find(|&&b| cs.chron(chain[i], b)).map(|&b| (chain[i], b)));
    if report.chron_pair.is_some() {
        return Ok(report);
    }
    let target = cs.past(chain, RelationKind::Chron)?;
    let last = *chain.last().unwrap();
    let mut best: Option<(f64, EventId)> = None;
    for x in candidates.iter() {
        if *cs.past_of(x, RelationKind::Chron) != target {
            continue;
        }
        report.past_matches += 1;
        let d = if x == last { 0.0 } else { cs.spacetime_distance(last, x).unwrap_or(0.0) };
        if d <= cell && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, x));
        }
    }
    if let Some((d, x)) = best {
        report.found = Some(x);
        report.distance = Some(d);
        report.status = Status::Pass;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub status: Status,
    /// The base points approach `x0`.
    pub converges: bool,
    /// The last event lies in the top slab.
    pub reaches_top: bool,
    pub bulk_size: usize,
    /// Bulk events in the past of the vertical line but not of the chain.
    pub exceptions: usize,
    pub examples: Vec<EventId>,
}

/// Checks `I⁻(vertical line at x0) ⊆ I⁻(chain)` on the bulk, in closed form.
///
/// The chain must approach `x0` in the base (last base distance within
/// `conv_tol`, not growing over the second half) and reach the top slab.
pub fn check_vertical_past_inclusion(
    st: &ProductStructure,
    chain: &[ProductEvent],
    x0: &Point,
    horizon: &Horizon,
    conv_tol: f64,
) -> Result<InclusionReport> {
    let ps = st.space();
    let Some(last) = chain.last() else {
        return Err(Error::InvalidChain("empty chain".into()));
    };
    if !ps.sigma().contains(x0) {
        return Err(Error::input("x0 lies outside the base space"));
    }
    let dists: Vec<f64> = chain.iter().map(|e| ps.sigma().dist(&e.x, x0)).collect();
    let converges = *dists.last().unwrap() <= conv_tol && dists[dists.len() / 2..].windows(2).all(|w| w[1] <= w[0]);
    let reaches_top = event_depth(ps, last) < horizon.top_width;
    let top = fiber_top(ps, x0);
    let mut exceptions = 0;
    let mut examples = Vec::new();
    for y in horizon.bulk.iter() {
        let e = st.event(y);
        let under_line = top - e.t > ps.sigma().dist(&e.x, x0);
        if under_line && !chain.iter().any(|c| ps.relations(&e, c).chron) {
            exceptions += 1;
            if examples.len() < EXAMPLES {
                examples.push(y);
            }
        }
    }
    Ok(InclusionReport {
        status: Status::from_pass(converges && reaches_top && exceptions == 0),
        converges,
        reaches_top,
        bulk_size: horizon.bulk.len(),
        exceptions,
        examples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverReport {
    pub fiber: String,
    pub bulk_size: usize,
    pub covered: usize,
    pub fraction: f64,
    pub uncovered: Vec<EventId>,
    pub status: Status,
}

/// Fraction of bulk events in the past of the vertical line over `b`.
pub fn check_vertical_past_covers(st: &ProductStructure, b: &Point, horizon: &Horizon) -> Result<CoverReport> {
    let ps = st.space();
    if !ps.sigma().contains(b) {
        return Err(Error::input("fiber base point lies outside the base space"));
    }
    let top = fiber_top(ps, b);
    let mut covered = 0;
    let mut uncovered = Vec::new();
    for y in horizon.bulk.iter() {
        let e = st.event(y);
        if top - e.t > ps.sigma().dist(&e.x, b) {
            covered += 1;
        } else if uncovered.len() < EXAMPLES {
            uncovered.push(y);
        }
    }
    let bulk_size = horizon.bulk.len();
    let fraction = if bulk_size == 0 { 1.0 } else { covered as f64 / bulk_size as f64 };
    Ok(CoverReport { fiber: ps.sigma().label(b), bulk_size, covered, fraction, uncovered, status: Status::from_pass(covered == bulk_size) })
}
