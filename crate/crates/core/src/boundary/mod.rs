//! Discrete causal boundary: chain-generated past sets, the S-relation, the
//! limit operator, τ̄, and future boundary classes of truncated structures.
//!
//! Finite samples are not chronologically dense, so an IP is taken to be the
//! chronological past of a chronological chain rather than an indecomposable
//! past set. Future sets are handled by the same code on the time-reversed
//! relations.

mod checks;
mod classes;

use serde::Serialize;

use crate::causal::{CausalStructure, EventId, RelationKind};
use crate::{Error, EventSet, Result};

pub use checks::{
    check_chain_convergence, check_vertical_past_covers, check_vertical_past_inclusion, interior_events, ConvergenceReport,
    CoverReport, InclusionReport,
};
pub use classes::{future_boundary_classes, BoundaryClass, BoundaryClasses, Horizon};

/// How a past set relates to the sampled events.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "event")]
pub enum Classification {
    /// The past of a bulk event.
    Pip(EventId),
    /// Generated by a chain that reaches the top slab and matches no bulk past.
    Tip,
    Undetermined,
}

/// The chronological past (or future) of a chronological chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PastSet {
    pub members: EventSet,
    pub generator: Vec<EventId>,
}

/// Futures use the same representation.
pub type FutureSet = PastSet;

impl PastSet {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn check_chron_chain(cs: &CausalStructure, chain: &[EventId]) -> Result<()> {
    for &e in chain {
        cs.check(e)?;
    }
    match chain.windows(2).find(|w| !cs.chron(w[0], w[1])) {
        Some(w) => Err(Error::InvalidChain(format!("{} is not chronologically before {}", w[0], w[1]))),
        None => Ok(()),
    }
}

/// `I⁻` of a chronological chain, the union of the pasts of its events.
pub fn generate_ip(cs: &CausalStructure, chain: &[EventId]) -> Result<PastSet> {
    check_chron_chain(cs, chain)?;
    Ok(PastSet { members: cs.past(chain, RelationKind::Chron)?, generator: chain.to_vec() })
}

/// `I⁺` of a chain given in past-directed order (latest event first).
pub fn generate_if(cs: &CausalStructure, chain: &[EventId]) -> Result<FutureSet> {
    let forward: Vec<EventId> = chain.iter().rev().copied().collect();
    check_chron_chain(cs, &forward)?;
    Ok(PastSet { members: cs.future(chain, RelationKind::Chron)?, generator: chain.to_vec() })
}

/// PIP if a bulk event has exactly this past, TIP if the generator ends in
/// the top slab and no such event exists, undetermined otherwise.
pub fn classify(cs: &CausalStructure, ip: &PastSet, bulk: &EventSet, top: &EventSet) -> Classification {
    let size = ip.members.len();
    let found = bulk
        .iter()
        .find(|&x| cs.past_of(x, RelationKind::Chron).len() == size && *cs.past_of(x, RelationKind::Chron) == ip.members);
    match (found, ip.generator.last()) {
        (Some(x), _) => Classification::Pip(x),
        (None, Some(&last)) if top.contains(last) => Classification::Tip,
        _ => Classification::Undetermined,
    }
}

/// `↑P`: events chronologically after every member; all events when `P = ∅`.
pub fn up_set(cs: &CausalStructure, p: &EventSet) -> EventSet {
    let mut out = cs.full_set();
    for x in p.iter() {
        out.intersect_with(&cs.future_of(x, RelationKind::Chron));
    }
    out
}

/// `↓F`: events chronologically before every member; all events when `F = ∅`.
pub fn down_set(cs: &CausalStructure, f: &EventSet) -> EventSet {
    let mut out = cs.full_set();
    for y in f.iter() {
        out.intersect_with(&cs.past_of(y, RelationKind::Chron));
    }
    out
}

/// Distinct non-empty pasts `I⁻(x)`, one per member set, in id order of `x`.
pub fn event_pasts(cs: &CausalStructure) -> Vec<PastSet> {
    let mut out: Vec<PastSet> = Vec::new();
    for x in cs.events() {
        let members = cs.past_of(x, RelationKind::Chron).into_owned();
        if !members.is_empty() && !out.iter().any(|p| p.members == members) {
            out.push(PastSet { members, generator: vec![x] });
        }
    }
    out
}

/// Distinct non-empty futures `I⁺(x)`.
pub fn event_futures(cs: &CausalStructure) -> Vec<FutureSet> {
    let mut out: Vec<PastSet> = Vec::new();
    for x in cs.events() {
        let members = cs.future_of(x, RelationKind::Chron).into_owned();
        if !members.is_empty() && !out.iter().any(|p| p.members == members) {
            out.push(PastSet { members, generator: vec![x] });
        }
    }
    out
}

/// A pair of the completion; indices point into the candidate lists, `None` is ∅.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompletionPair {
    pub p: Option<usize>,
    pub f: Option<usize>,
    /// Another candidate was equally maximal on one side.
    pub tie: bool,
}

/// Indices of the inclusion-maximal candidates contained in `room`.
fn maximal_inside(candidates: &[PastSet], room: &EventSet) -> Vec<usize> {
    let inside: Vec<usize> = (0..candidates.len()).filter(|&i| candidates[i].members.is_subset(room)).collect();
    inside
        .iter()
        .copied()
        .filter(|&i| {
            let m = &candidates[i].members;
            !inside.iter().any(|&j| j != i && m.is_subset(&candidates[j].members) && candidates[j].members != *m)
        })
        .collect()
}

/// All pairs `P ∼_S F` among the candidates.
///
/// `F` must be a maximal candidate IF inside `↑P` and `P` a maximal candidate IP
/// inside `↓F`. Non-empty candidates related to nothing are paired with ∅.
/// When several candidates are maximal every resulting pair is listed and
/// flagged as a tie.
pub fn s_relation_pairs(cs: &CausalStructure, ips: &[PastSet], ifs: &[FutureSet]) -> Vec<CompletionPair> {
    let max_f: Vec<Vec<usize>> = ips.iter().map(|p| maximal_inside(ifs, &up_set(cs, &p.members))).collect();
    let max_p: Vec<Vec<usize>> = ifs.iter().map(|f| maximal_inside(ips, &down_set(cs, &f.members))).collect();
    let mut pairs = Vec::new();
    let mut p_used = vec![false; ips.len()];
    let mut f_used = vec![false; ifs.len()];
    for (i, fs) in max_f.iter().enumerate() {
        for &j in fs {
            if max_p[j].contains(&i) {
                pairs.push(CompletionPair { p: Some(i), f: Some(j), tie: fs.len() > 1 || max_p[j].len() > 1 });
                p_used[i] = true;
                f_used[j] = true;
            }
        }
    }
    for (i, used) in p_used.iter().enumerate() {
        if !used && !ips[i].is_empty() {
            pairs.push(CompletionPair { p: Some(i), f: None, tie: false });
        }
    }
    for (j, used) in f_used.iter().enumerate() {
        if !used && !ifs[j].is_empty() {
            pairs.push(CompletionPair { p: None, f: Some(j), tie: false });
        }
    }
    pairs
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitOutcome {
    /// Members that never leave once they appear.
    pub li: EventSet,
    /// `li` plus members that appear at least twice.
    pub ls: EventSet,
    pub in_li: bool,
    pub maximal_in_ls: bool,
    pub holds: bool,
}

/// Tests whether `candidate` is a limit of a finite sequence of past sets.
///
/// A finite sequence is read with its tail frozen: a member is eventual when
/// it stays from its first appearance to the end, and frequent when it appears
/// at least twice. The candidate must lie in the eventual members and be
/// maximal among `candidates` inside the frequent ones.
pub fn limit_operator(seq: &[EventSet], candidate: &EventSet, candidates: &[EventSet]) -> LimitOutcome {
    let n = candidate.capacity();
    let mut li = EventSet::empty(n);
    let mut ls = EventSet::empty(n);
    if let Some(last) = seq.last() {
        for x in last.iter() {
            let first = seq.iter().position(|s| s.contains(x)).expect("x is in the last set");
            if seq[first..].iter().all(|s| s.contains(x)) {
                li.insert(x);
            }
        }
    }
    let mut seen = EventSet::empty(n);
    for s in seq {
        let mut again = s.clone();
        again.intersect_with(&seen);
        ls.union_with(&again);
        seen.union_with(s);
    }
    ls.union_with(&li);
    let in_li = candidate.is_subset(&li);
    let maximal_in_ls = candidate.is_subset(&ls)
        && !candidates.iter().any(|q| q.is_subset(&ls) && candidate.is_subset(q) && q != candidate);
    LimitOutcome { holds: in_li && maximal_in_ls, li, ls, in_li, maximal_in_ls }
}

/// Extended time separation on completion pairs.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TauBar {
    Finite { value: f64, monotone: bool },
    /// Values keep growing linearly with the generator's time.
    Unbounded { last: f64, slope: f64 },
}

/// `τ̄((P, F), (P′, F′))` as the limit of `τ(y_n, x′_n)`.
///
/// `f_gen` is the past-directed generator `y_n` of `F`, `p_gen` the
/// future-directed generator `x′_n` of `P′`; an empty generator stands for ∅
/// and gives 0. The shorter generator is extended by its last event. The
/// result is unbounded when the values never decrease and the second half of
/// the sequence grows by at least half a unit of τ per unit of time along
/// `p_gen`.
pub fn tau_bar(cs: &CausalStructure, f_gen: &[EventId], p_gen: &[EventId]) -> Result<TauBar> {
    for &e in f_gen.iter().chain(p_gen) {
        cs.check(e)?;
    }
    if f_gen.is_empty() || p_gen.is_empty() {
        return Ok(TauBar::Finite { value: 0.0, monotone: true });
    }
    let n = f_gen.len().max(p_gen.len());
    let at = |g: &[EventId], i: usize| g[i.min(g.len() - 1)];
    let values: Vec<f64> = (0..n).map(|i| cs.tau(at(f_gen, i), at(p_gen, i))).collect();
    let monotone = values.windows(2).all(|w| w[1] >= w[0]);
    let last = *values.last().unwrap();
    let mid = n / 2;
    if monotone && n >= 2 && p_gen.len() >= 2 {
        if let (Some(t_mid), Some(t_last)) = (cs.time(at(p_gen, mid)), cs.time(at(p_gen, n - 1))) {
            if t_last > t_mid {
                let slope = (last - values[mid]) / (t_last - t_mid);
                if slope >= 0.5 {
                    return Ok(TauBar::Unbounded { last, slope });
                }
            }
        }
    }
    Ok(TauBar::Finite { value: last, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::d4;
    use crate::metric::{MetricSpace, Point};
    use crate::product::{build_causal_structure, sprinkle, Mode, ProductEvent, ProductSpace};

    fn id(i: usize) -> EventId {
        EventId::new(i)
    }

    fn set(n: usize, ids: &[usize]) -> EventSet {
        EventSet::from_ids(n, ids.iter().map(|&i| id(i)))
    }

    #[test]
    fn d4_pasts_and_up_sets() {
        let cs = d4();
        let ip = generate_ip(&cs, &[id(3)]).unwrap();
        assert_eq!(ip.members, set(4, &[0, 1, 2]));
        assert!(generate_ip(&cs, &[]).unwrap().is_empty());
        assert!(generate_ip(&cs, &[id(1), id(2)]).is_err());
        assert_eq!(classify(&cs, &ip, &cs.full_set(), &cs.empty_set()), Classification::Pip(id(3)));
        assert_eq!(up_set(&cs, &set(4, &[0])), set(4, &[1, 2, 3]));
        assert_eq!(up_set(&cs, &cs.full_set()), cs.empty_set());
        assert_eq!(up_set(&cs, &cs.empty_set()), cs.full_set());
        assert_eq!(down_set(&cs, &set(4, &[3])), set(4, &[0, 1, 2]));
    }

    /// Direct reading of the S-relation over every chain-generated past and
    /// future of the poset, by enumerating all chronological chains.
    fn s_oracle(cs: &CausalStructure) -> Vec<(EventSet, EventSet)> {
        let n = cs.len();
        let mut chains: Vec<Vec<EventId>> = cs.events().map(|e| vec![e]).collect();
        let mut k = 0;
        while k < chains.len() {
            let c = chains[k].clone();
            for e in cs.events() {
                if cs.chron(*c.last().unwrap(), e) {
                    let mut d = c.clone();
                    d.push(e);
                    chains.push(d);
                }
            }
            k += 1;
        }
        let mut ips: Vec<EventSet> = Vec::new();
        let mut ifs: Vec<EventSet> = Vec::new();
        for c in &chains {
            let p = cs.past(c, RelationKind::Chron).unwrap();
            let f = cs.future(c, RelationKind::Chron).unwrap();
            if !p.is_empty() && !ips.contains(&p) {
                ips.push(p);
            }
            if !f.is_empty() && !ifs.contains(&f) {
                ifs.push(f);
            }
        }
        let up = |p: &EventSet| EventSet::from_ids(n, cs.events().filter(|&y| p.iter().all(|x| cs.chron(x, y))));
        let down = |f: &EventSet| EventSet::from_ids(n, cs.events().filter(|&x| f.iter().all(|y| cs.chron(x, y))));
        let maximal = |c: &EventSet, pool: &[EventSet], room: &EventSet| {
            c.is_subset(room) && !pool.iter().any(|o| o != c && c.is_subset(o) && o.is_subset(room))
        };
        let mut out = Vec::new();
        for p in &ips {
            for f in &ifs {
                if maximal(f, &ifs, &up(p)) && maximal(p, &ips, &down(f)) {
                    out.push((p.clone(), f.clone()));
                }
            }
        }
        out
    }

    #[test]
    fn d4_s_relation_matches_enumeration() {
        let cs = d4();
        let ips = event_pasts(&cs);
        let ifs = event_futures(&cs);
        let pairs = s_relation_pairs(&cs, &ips, &ifs);
        let got: Vec<(EventSet, EventSet)> = pairs
            .iter()
            .filter_map(|p| Some((ips[p.p?].members.clone(), ifs[p.f?].members.clone())))
            .collect();
        assert_eq!(got, s_oracle(&cs));
        // I⁻(d) pairs with the common future {d} of b and c.
        assert!(got.contains(&(set(4, &[0, 1, 2]), set(4, &[3]))));
    }

    #[test]
    fn no_ifs_pairs_every_ip_with_empty() {
        let cs = d4();
        let ips = event_pasts(&cs);
        let pairs = s_relation_pairs(&cs, &ips, &[]);
        assert_eq!(pairs.len(), ips.len());
        assert!(pairs.iter().all(|p| p.f.is_none()));
    }

    #[test]
    fn limit_operator_examples() {
        let n = 8;
        let p = set(n, &[0, 1]);
        let q = set(n, &[4, 5]);
        let r = limit_operator(&[p.clone(), p.clone(), p.clone()], &p, &[p.clone()]);
        assert!(r.holds && r.li == p && r.ls == p);

        let alt = [p.clone(), q.clone(), p.clone(), q.clone()];
        let r = limit_operator(&alt, &p, &[p.clone(), q.clone()]);
        assert_eq!(r.li, p.intersection(&q));
        assert!(!r.in_li && !r.holds);

        let steps = [set(n, &[0]), set(n, &[0, 1]), set(n, &[0, 1, 2])];
        let cands = steps.to_vec();
        let verdicts: Vec<bool> = cands.iter().map(|c| limit_operator(&steps, c, &cands).holds).collect();
        assert_eq!(verdicts, vec![false, false, true]);
    }

    #[test]
    fn tau_bar_cases() {
        let cs = d4();
        assert_eq!(tau_bar(&cs, &[id(0)], &[]).unwrap(), TauBar::Finite { value: 0.0, monotone: true });
        for a in cs.events() {
            for b in cs.events() {
                assert_eq!(tau_bar(&cs, &[a], &[b]).unwrap(), TauBar::Finite { value: cs.tau(a, b), monotone: true });
            }
        }
        let ps = ProductSpace::new(MetricSpace::circle(1.0).unwrap(), (0.0, 10.0)).unwrap();
        let st = build_causal_structure(&ps, sprinkle(&ps, &Mode::Grid { nx: 4, nt: 11 }, 0).unwrap(), None).unwrap();
        let x = st.id_of(&ProductEvent::new(Point::Line(0.5), 1.0)).unwrap();
        let fiber = st.fiber(&Point::Line(0.0));
        match tau_bar(st.cs(), &[x], &fiber[3..]).unwrap() {
            TauBar::Unbounded { slope, .. } => assert!(slope > 0.9),
            other => panic!("{other:?}"),
        }
    }
}
