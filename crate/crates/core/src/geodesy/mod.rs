//! Discrete causal curves: τ-length, maximizers, lines, limit lines and null chains.
//!
//! A maximizer is a longest path through the step graph of a structure, so its
//! value is a lower bound for τ of its endpoints that tightens as the sample
//! gets denser.

mod limit;
mod null;

use serde::{Deserialize, Serialize};

use crate::causal::{CausalStructure, EventId, RelationKind};
use crate::{Error, Result};

pub use limit::{extract_limit_line, LimitLine, SlabStat};
pub use null::{null_chain_scan, NullScanOptions, NullScanReport};

/// Relative tolerance below which two path values count as a tie.
const TIE_REL: f64 = 1e-12;

/// An ordered chain of events with its τ-length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub events: Vec<EventId>,
    pub length: f64,
    pub kind: RelationKind,
}

impl Chain {
    /// Validates `events` and computes the length.
    pub fn new(cs: &CausalStructure, events: Vec<EventId>, kind: RelationKind) -> Result<Chain> {
        let length = chain_tau_length(cs, &events, kind)?;
        Ok(Chain { events, length, kind })
    }

    pub fn first(&self) -> Option<EventId> {
        self.events.first().copied()
    }

    pub fn last(&self) -> Option<EventId> {
        self.events.last().copied()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Sum of consecutive τ along a chain, the finest-partition τ-length.
pub fn chain_tau_length(cs: &CausalStructure, events: &[EventId], kind: RelationKind) -> Result<f64> {
    if let Some(&bad) = events.iter().find(|e| e.index() >= cs.len()) {
        return Err(Error::UnknownEvent(bad.index()));
    }
    if let Some(w) = events.windows(2).find(|w| !cs.related(w[0], w[1], kind)) {
        return Err(Error::InvalidChain(format!("{} and {} are not {kind:?}-related", w[0], w[1])));
    }
    Ok(events.windows(2).map(|w| cs.tau(w[0], w[1])).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximizerResult {
    pub chain: Chain,
    /// Length of the chain, a lower bound for τ of the endpoints.
    pub value: f64,
    /// Number of step paths attaining the value (saturating).
    pub tie_count: u64,
    /// No step path joins the endpoints, so the chain is the bare pair.
    pub direct: bool,
}

/// Longest step path from `a` to `b` inside `J(a, b)`.
///
/// Among optimal paths the lexicographically smallest id sequence is returned.
/// With `kind = Chron` only chronological steps are used.
pub fn maximizer(cs: &CausalStructure, a: EventId, b: EventId, kind: RelationKind) -> Result<MaximizerResult> {
    let a = cs.check(a)?;
    let b = cs.check(b)?;
    if a == b || !cs.related(a, b, kind) {
        return Err(Error::NotRelated { a, b });
    }
    let mut inside = cs.future_of(a, RelationKind::Causal).into_owned();
    inside.intersect_with(&cs.past_of(b, RelationKind::Causal));
    inside.insert(a);
    inside.insert(b);

    let n = cs.len();
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut count = vec![0u64; n];
    best[b.index()] = 0.0;
    count[b.index()] = 1;
    let usable = |u: EventId, v: EventId| inside.contains(v) && (kind == RelationKind::Causal || cs.chron(u, v));
    for &u in cs.topo_order().iter().rev() {
        if u == b || !inside.contains(u) {
            continue;
        }
        let mut bu = f64::NEG_INFINITY;
        for v in cs.steps(u) {
            if usable(u, v) && best[v.index()] > f64::NEG_INFINITY {
                bu = bu.max(cs.tau(u, v) + best[v.index()]);
            }
        }
        if bu == f64::NEG_INFINITY {
            continue;
        }
        let tol = TIE_REL * bu.abs().max(1.0);
        let mut c = 0u64;
        for v in cs.steps(u) {
            if usable(u, v) && cs.tau(u, v) + best[v.index()] >= bu - tol {
                c = c.saturating_add(count[v.index()]);
            }
        }
        best[u.index()] = bu;
        count[u.index()] = c;
    }

    if best[a.index()] == f64::NEG_INFINITY {
        let chain = Chain::new(cs, vec![a, b], kind)?;
        let value = chain.length;
        return Ok(MaximizerResult { chain, value, tie_count: 1, direct: true });
    }

    // Greedy forward walk; successors are visited in increasing id order.
    let mut path = vec![a];
    let mut u = a;
    while u != b {
        let target = best[u.index()];
        let tol = TIE_REL * target.abs().max(1.0);
        let next = cs
            .steps(u)
            .find(|&v| usable(u, v) && cs.tau(u, v) + best[v.index()] >= target - tol)
            .expect("an optimal successor exists");
        path.push(next);
        u = next;
    }
    let chain = Chain::new(cs, path, kind)?;
    Ok(MaximizerResult { value: chain.length, tie_count: count[a.index()], chain, direct: false })
}

/// Outcome of a line test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineCheck {
    pub is_line: bool,
    /// First index pair where the segment length misses τ, or the first
    /// non-chronological step.
    pub witness: Option<(usize, usize)>,
    /// Largest `τ(c_i, c_j) − L(c_i..c_j)` over all pairs.
    pub worst_gap: f64,
}

/// A chain is a line when every segment realizes τ between its ends.
pub fn is_line(cs: &CausalStructure, chain: &[EventId], tol: f64) -> LineCheck {
    if let Some(i) = chain.windows(2).position(|w| !cs.chron(w[0], w[1])) {
        return LineCheck { is_line: false, witness: Some((i, i + 1)), worst_gap: f64::INFINITY };
    }
    let mut prefix = vec![0.0; chain.len()];
    for i in 1..chain.len() {
        prefix[i] = prefix[i - 1] + cs.tau(chain[i - 1], chain[i]);
    }
    let rows = crate::par::map_range(chain.len(), |i| {
        let mut worst = 0.0f64;
        let mut first = None;
        for j in i + 1..chain.len() {
            let gap = cs.tau(chain[i], chain[j]) - (prefix[j] - prefix[i]);
            if gap.abs() > tol && first.is_none() {
                first = Some((i, j));
            }
            worst = worst.max(gap.abs());
        }
        (worst, first)
    });
    let worst_gap = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let witness = rows.iter().find_map(|r| r.1);
    LineCheck { is_line: witness.is_none(), witness, worst_gap }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::d4;
    use crate::metric::{MetricSpace, Point};
    use crate::product::{build_causal_structure, sprinkle, Mode, ProductEvent, ProductSpace};

    fn ids(v: &[usize]) -> Vec<EventId> {
        v.iter().map(|&i| EventId::new(i)).collect()
    }

    #[test]
    fn d4_lengths_and_maximizer() {
        let cs = d4();
        assert_eq!(chain_tau_length(&cs, &ids(&[0, 1, 3]), RelationKind::Chron).unwrap(), 2.0);
        assert!(chain_tau_length(&cs, &ids(&[1, 2]), RelationKind::Chron).is_err());
        let m = maximizer(&cs, EventId::new(0), EventId::new(3), RelationKind::Chron).unwrap();
        assert_eq!(m.value, 2.0);
        assert_eq!(m.tie_count, 2);
        assert_eq!(m.chain.events, ids(&[0, 1, 3]));
        assert!(!m.direct);
        assert!(matches!(
            maximizer(&cs, EventId::new(1), EventId::new(2), RelationKind::Causal),
            Err(Error::NotRelated { .. })
        ));
    }

    fn cylinder_grid(window: (f64, f64), nx: usize, nt: usize) -> crate::product::ProductStructure {
        let ps = ProductSpace::new(MetricSpace::circle(1.0).unwrap(), window).unwrap();
        let s = sprinkle(&ps, &Mode::Grid { nx, nt }, 0).unwrap();
        build_causal_structure(&ps, s, None).unwrap()
    }

    #[test]
    fn vertical_maximizer_on_cylinder_grid() {
        let st = cylinder_grid((-2.0, 2.0), 8, 17);
        let p = Point::Line(0.5);
        let a = st.id_of(&ProductEvent::new(p, -2.0)).unwrap();
        let b = st.id_of(&ProductEvent::new(p, 2.0)).unwrap();
        let m = maximizer(st.cs(), a, b, RelationKind::Chron).unwrap();
        assert_eq!(m.value, 4.0);
        assert_eq!(m.tie_count, 1);
        assert!(m.chain.events.iter().all(|&e| st.event(e).x == p));
        assert!(is_line(st.cs(), &m.chain.events, 1e-12).is_line);
    }

    #[test]
    fn maximizer_matches_exhaustive_search_on_small_grid() {
        let st = cylinder_grid((0.0, 1.0), 4, 5);
        let cs = st.cs();
        // Exhaustive longest step path by recursion.
        fn best(cs: &CausalStructure, u: EventId, b: EventId) -> f64 {
            if u == b {
                return 0.0;
            }
            cs.steps(u)
                .filter(|&v| v == b || cs.causal(v, b))
                .map(|v| cs.tau(u, v) + best(cs, v, b))
                .fold(f64::NEG_INFINITY, f64::max)
        }
        for a in cs.events() {
            for b in cs.successors(a, RelationKind::Causal).collect::<Vec<_>>() {
                let m = maximizer(cs, a, b, RelationKind::Causal).unwrap();
                let oracle = best(cs, a, b);
                if oracle > f64::NEG_INFINITY {
                    assert!((m.value - oracle).abs() < 1e-12, "{a:?}->{b:?}");
                    assert!(m.value <= cs.tau(a, b) + 1e-12);
                } else {
                    assert!(m.direct);
                }
            }
        }
    }

    #[test]
    fn zigzag_is_shorter_and_not_a_line() {
        let ps = ProductSpace::new(MetricSpace::circle(1.0).unwrap(), (0.0, 4.0)).unwrap();
        let b = Point::Line(0.0);
        let events = vec![
            ProductEvent::new(b, 0.0),
            ProductEvent::new(Point::Line(0.3), 1.0),
            ProductEvent::new(b, 2.0),
            ProductEvent::new(Point::Line(0.9), 3.0),
            ProductEvent::new(b, 4.0),
        ];
        let st = build_causal_structure(&ps, crate::product::SampleSet::from_events(events.clone()), None).unwrap();
        let chain = st.ids_of(&events).unwrap();
        let len = chain_tau_length(st.cs(), &chain, RelationKind::Chron).unwrap();
        assert!(len < 4.0);
        assert!((len - 2.0 * (1.0f64 - 0.09).sqrt() - 2.0 * (1.0f64 - 0.01).sqrt()).abs() < 1e-12, "{len}");
        let check = is_line(st.cs(), &chain, 1e-9);
        assert!(!check.is_line);
        assert_eq!(check.witness, Some((0, 2)));
        // Two events always form a line.
        assert!(is_line(st.cs(), &chain[..2], 1e-9).is_line);
    }
}
