use serde::{Deserialize, Serialize};

use crate::causal::{CausalStructure, EventId, RelationKind};
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub struct NullScanOptions {
    /// Enumeration stops after this many maximal chains.
    pub max_chains: usize,
    /// Unobstructed chains kept in the report.
    pub max_examples: usize,
}

impl Default for NullScanOptions {
    fn default() -> Self {
        NullScanOptions { max_chains: 100_000, max_examples: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullScanReport {
    pub null_links: usize,
    pub chains: usize,
    pub obstructed: usize,
    /// Every maximal null chain has a chronological pair (vacuous when there are none).
    pub no_null_lines: bool,
    pub truncated: bool,
    /// Some unobstructed chains.
    pub unobstructed: Vec<Vec<EventId>>,
    /// A chronological pair from the first obstructed chain.
    pub first_obstruction: Option<(EventId, EventId)>,
}

/// Scans maximal null chains for chronological shortcuts.
///
/// A null chain follows null links (null pairs with nothing in between) and
/// never turns a corner: every three consecutive events are pairwise null.
/// It is obstructed when two of its events, however far apart, are
/// chronologically related, so no part of it longer than that can be a null
/// line.
pub fn null_chain_scan(cs: &CausalStructure, opts: &NullScanOptions) -> NullScanReport {
    let null_succ: Vec<Vec<EventId>> = par::map_range(cs.len(), |i| {
        let a = EventId::new(i);
        let candidates: Vec<EventId> = cs.successors(a, RelationKind::Causal).filter(|&b| !cs.chron(a, b)).collect();
        if candidates.is_empty() {
            return candidates;
        }
        let fut = cs.future_of(a, RelationKind::Causal);
        candidates.into_iter().filter(|&b| fut.is_disjoint(&cs.past_of(b, RelationKind::Causal))).collect()
    });
    let null_links = null_succ.iter().map(Vec::len).sum();
    let mut null_pred = vec![Vec::new(); cs.len()];
    for (a, row) in null_succ.iter().enumerate() {
        for &b in row {
            null_pred[b.index()].push(EventId::new(a));
        }
    }
    let straight = |p: EventId, r: EventId| cs.causal(p, r) && !cs.chron(p, r);

    let mut report = NullScanReport {
        null_links,
        chains: 0,
        obstructed: 0,
        no_null_lines: true,
        truncated: false,
        unobstructed: Vec::new(),
        first_obstruction: None,
    };
    'outer: for u in cs.events() {
        for &v in &null_succ[u.index()] {
            if null_pred[u.index()].iter().any(|&w| straight(w, v)) {
                continue;
            }
            let mut stack = vec![vec![u, v]];
            while let Some(path) = stack.pop() {
                let (p, q) = (path[path.len() - 2], path[path.len() - 1]);
                let next: Vec<EventId> = null_succ[q.index()].iter().copied().filter(|&r| straight(p, r)).collect();
                if next.is_empty() {
                    record(cs, &path, &mut report, opts);
                    if report.chains >= opts.max_chains {
                        report.truncated = true;
                        break 'outer;
                    }
                    continue;
                }
                for &r in next.iter().rev() {
                    let mut longer = path.clone();
                    longer.push(r);
                    stack.push(longer);
                }
            }
        }
    }
    report.no_null_lines = report.obstructed == report.chains;
    report
}

fn record(cs: &CausalStructure, path: &[EventId], report: &mut NullScanReport, opts: &NullScanOptions) {
    report.chains += 1;
    let hit = (0..path.len()).find_map(|i| path[i + 1..].iter().find(|&&b| cs.chron(path[i], b)).map(|&b| (path[i], b)));
    match hit {
        Some(pair) => {
            report.obstructed += 1;
            report.first_obstruction.get_or_insert(pair);
        }
        None if report.unobstructed.len() < opts.max_examples => report.unobstructed.push(path.to_vec()),
        None => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricSpace, Point};
    use crate::product::{build_causal_structure, sprinkle, Mode, ProductEvent, ProductSpace, Region};

    #[test]
    fn cylinder_null_chains_wrap_and_are_obstructed() {
        let ps = ProductSpace::new(MetricSpace::circle(1.0).unwrap(), (0.0, 1.5)).unwrap();
        let st = build_causal_structure(&ps, sprinkle(&ps, &Mode::Grid { nx: 8, nt: 13 }, 0).unwrap(), None).unwrap();
        let r = null_chain_scan(st.cs(), &NullScanOptions::default());
        // Two directions from each of the 8 bottom events.
        assert_eq!(r.chains, 16);
        assert_eq!(r.obstructed, 16);
        assert!(r.no_null_lines);
        let (a, b) = r.first_obstruction.unwrap();
        let (ea, eb) = (st.event(a), st.event(b));
        assert!(eb.t - ea.t > ps.sigma().dist(&ea.x, &eb.x));
    }

    #[test]
    fn short_cylinder_has_unobstructed_chains() {
        let ps = ProductSpace::new(MetricSpace::circle(1.0).unwrap(), (0.0, 0.5)).unwrap();
        let st = build_causal_structure(&ps, sprinkle(&ps, &Mode::Grid { nx: 8, nt: 5 }, 0).unwrap(), None).unwrap();
        let r = null_chain_scan(st.cs(), &NullScanOptions::default());
        assert!(r.chains > 0);
        assert!(!r.no_null_lines);
    }

    #[test]
    fn diamond_edges_are_null_lines() {
        let strip = ProductSpace::new(MetricSpace::interval(2.0).unwrap(), (0.0, 2.0)).unwrap();
        let lo = ProductEvent::new(Point::Line(1.0), 0.0);
        let hi = ProductEvent::new(Point::Line(1.0), 2.0);
        let ps = strip.with_region(Region::Diamond { lo, hi }).unwrap();
        let st = build_causal_structure(&ps, sprinkle(&ps, &Mode::Grid { nx: 9, nt: 9 }, 0).unwrap(), None).unwrap();
        let r = null_chain_scan(st.cs(), &NullScanOptions::default());
        assert!(!r.no_null_lines);
        let edge: Vec<ProductEvent> = r.unobstructed[0].iter().map(|&e| st.event(e)).collect();
        for w in edge.windows(2) {
            assert_eq!(w[1].t - w[0].t, ps.sigma().dist(&w[0].x, &w[1].x));
        }
    }

    #[test]
    fn poisson_sample_has_no_null_pairs() {
        let ps = ProductSpace::new(MetricSpace::circle(1.0).unwrap(), (0.0, 1.0)).unwrap();
        let st = build_causal_structure(&ps, sprinkle(&ps, &Mode::Poisson { density: 200.0 }, 1).unwrap(), None).unwrap();
        let r = null_chain_scan(st.cs(), &NullScanOptions::default());
        assert_eq!((r.null_links, r.chains), (0, 0));
        assert!(r.no_null_lines);
    }
}
