use serde::{Deserialize, Serialize};

use super::Chain;
use crate::causal::{CausalStructure, EventId, RelationKind};
use crate::{Error, Result};

/// Agreement of the family inside one time slab.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabStat {
    pub slab: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Family members with an event in the slab.
    pub visiting: usize,
    /// Members within half a cell of the selected event.
    pub agreeing: usize,
    /// Largest base distance from a visiting member to the selected event.
    pub dispersion: f64,
    pub selected: EventId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitLine {
    pub chain: Chain,
    pub cell: f64,
    pub slabs: Vec<SlabStat>,
    pub max_dispersion: f64,
}

/// Extracts a limit chain from a family of maximizers over growing windows.
///
/// Time is cut into slabs of width `cell`. In each slab the event visited by
/// the most members (within half a cell in the base) is selected; later
/// members win ties, then smaller ids. The slab contributes the events of the
/// member that visits the selection, and slab segments are stitched in time
/// order, dropping events that would break the chain. Fails with `NoLimit`
/// when some slab disperses by more than `threshold`.
pub fn extract_limit_line(cs: &CausalStructure, family: &[Chain], cell: f64, threshold: f64) -> Result<LimitLine> {
    if family.is_empty() || family.iter().any(Chain::is_empty) {
        return Err(Error::input("limit extraction needs a non-empty family of non-empty chains"));
    }
    if !(cell > 0.0) {
        return Err(Error::input(format!("cell size must be positive, got {cell}")));
    }
    let time = |e: EventId| cs.time(e).ok_or_else(|| Error::input("limit extraction needs event times"));
    if family.len() == 1 {
        let chain = family[0].clone();
        let mut slabs = Vec::new();
        for (slab, &e) in chain.events.iter().enumerate() {
            let t = time(e)?;
            slabs.push(SlabStat { slab, t_lo: t, t_hi: t, visiting: 1, agreeing: 1, dispersion: 0.0, selected: e });
        }
        return Ok(LimitLine { chain, cell, slabs, max_dispersion: 0.0 });
    }
    if cs.geometry().is_none() {
        return Err(Error::input("limit extraction over a family needs base distances"));
    }
    let dist = |a: EventId, b: EventId| cs.base_distance(a, b).unwrap_or(f64::INFINITY);

    let mut t0 = f64::INFINITY;
    let mut t1 = f64::NEG_INFINITY;
    for c in family {
        for &e in &c.events {
            let t = time(e)?;
            t0 = t0.min(t);
            t1 = t1.max(t);
        }
    }
    let nslabs = ((t1 - t0) / cell).floor() as usize + 1;
    let slab_of = |e: EventId| (((cs.time(e).unwrap() - t0) / cell).floor() as usize).min(nslabs - 1);
    // members[k][m] = events of member m inside slab k.
    let mut members = vec![vec![Vec::new(); family.len()]; nslabs];
    for (m, c) in family.iter().enumerate() {
        for &e in &c.events {
            members[slab_of(e)][m].push(e);
        }
    }

    let mut slabs = Vec::new();
    let mut stitched = Vec::new();
    for (k, per_member) in members.iter().enumerate() {
        let visiting: Vec<usize> = (0..family.len()).filter(|&m| !per_member[m].is_empty()).collect();
        if visiting.is_empty() {
            continue;
        }
        let near = |e: EventId, m: usize| per_member[m].iter().map(|&f| dist(e, f)).fold(f64::INFINITY, f64::min);
        let mut best: Option<(usize, usize, EventId)> = None;
        for &m in &visiting {
            for &e in &per_member[m] {
                let score = visiting.iter().filter(|&&o| near(e, o) <= cell / 2.0).count();
                let latest = visiting.iter().rev().find(|&&o| per_member[o].contains(&e)).copied().unwrap_or(m);
                let key = (score, latest, e);
                let better = match best {
                    None => true,
                    Some((s, l, id)) => (score, latest) > (s, l) || ((score, latest) == (s, l) && e < id),
                };
                if better {
                    best = Some(key);
                }
            }
        }
        let (agreeing, owner, selected) = best.expect("a visiting member has events");
        let dispersion = visiting.iter().map(|&o| near(selected, o)).fold(0.0, f64::max);
        stitched.extend_from_slice(&per_member[owner]);
        slabs.push(SlabStat {
            slab: k,
            t_lo: t0 + k as f64 * cell,
            t_hi: t0 + (k + 1) as f64 * cell,
            visiting: visiting.len(),
            agreeing,
            dispersion,
            selected,
        });
    }

    let max_dispersion = slabs.iter().map(|s| s.dispersion).fold(0.0, f64::max);
    if max_dispersion > threshold {
        return Err(Error::NoLimit { dispersion: max_dispersion, threshold });
    }
    let mut events: Vec<EventId> = Vec::with_capacity(stitched.len());
    for e in stitched {
        match events.last() {
            Some(&p) if !cs.causal(p, e) => {}
            _ => events.push(e),
        }
    }
    let kind = if events.windows(2).all(|w| cs.chron(w[0], w[1])) { RelationKind::Chron } else { RelationKind::Causal };
    let chain = Chain::new(cs, events, kind)?;
    Ok(LimitLine { chain, cell, slabs, max_dispersion })
}
