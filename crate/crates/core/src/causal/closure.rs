use serde::{Deserialize, Serialize};

use super::{topological_order, transpose, CausalStructure, EventId, EventMeta, StorageHint};
use crate::{Error, Result};

/// A generating relation `u → v`. Positive `tau` makes it chronological,
/// zero makes it a purely causal (null) relation.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub u: usize,
    pub v: usize,
    pub tau: f64,
}

impl Generator {
    pub fn new(u: usize, v: usize, tau: f64) -> Self {
        Generator { u, v, tau }
    }
}

/// Closes a generating relation into a causal structure.
///
/// `≤` and `≪` become transitive closures with push-up, and τ on every pair is
/// the maximum chain sum over generator paths, which is the smallest value the
/// reverse triangle inequality allows. The generators become the step graph.
pub fn build_closure(meta: Vec<EventMeta>, generators: &[Generator], hint: StorageHint) -> Result<CausalStructure> {
    let n = meta.len();
    let mut succ: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for g in generators {
        if g.u >= n {
            return Err(Error::UnknownEvent(g.u));
        }
        if g.v >= n {
            return Err(Error::UnknownEvent(g.v));
        }
        if !(g.tau.is_finite() && g.tau >= 0.0) {
            return Err(Error::input(format!("generator ({},{}) has invalid tau {}", g.u, g.v, g.tau)));
        }
        if g.u == g.v {
            return Err(Error::Cycle { witness: vec![EventId::new(g.u), EventId::new(g.u)] });
        }
        succ[g.u].push((g.v as u32, g.tau));
    }
    // Parallel generators collapse to the strongest one.
    for row in &mut succ {
        row.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
        row.dedup_by_key(|e| e.0);
    }
    let plain: Vec<Vec<u32>> = succ.iter().map(|r| r.iter().map(|e| e.0).collect()).collect();
    let topo = topological_order(n, &plain).map_err(|stuck| Error::Cycle { witness: find_cycle(&plain, &stuck) })?;

    // Longest generator path from each event, swept in reverse topological order.
    // `best` is a scratch row, -inf where z is unreachable from x.
    let mut causal_f: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut chron_f: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut tau_rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut chron_mark = vec![false; n];
    let mut touched: Vec<u32> = Vec::new();
    for &x in topo.iter().rev() {
        let x = x.index();
        for &(y, w) in &succ[x] {
            let yi = y as usize;
            relax(&mut best, &mut touched, yi, w);
            if w > 0.0 {
                chron_mark[yi] = true;
            }
            for &z in &causal_f[yi] {
                relax(&mut best, &mut touched, z as usize, w);
            }
            for &(z, t) in &tau_rows[yi] {
                relax(&mut best, &mut touched, z as usize, w + t);
            }
            // Push-up: a chronological first step makes everything after it chronological.
            let pushed = if w > 0.0 { &causal_f[yi] } else { &chron_f[yi] };
            for &z in pushed {
                chron_mark[z as usize] = true;
            }
        }
        touched.sort_unstable();
        for &z in &touched {
            let zi = z as usize;
            causal_f[x].push(z);
            // τ > 0 exactly when the pair is chronological.
            if chron_mark[zi] {
                chron_f[x].push(z);
                tau_rows[x].push((z, best[zi].max(f64::MIN_POSITIVE)));
            }
            best[zi] = f64::NEG_INFINITY;
            chron_mark[zi] = false;
        }
        touched.clear();
    }

    let causal_b = transpose(n, &causal_f);
    let chron_b = transpose(n, &chron_f);
    let steps = plain;
    Ok(CausalStructure::from_parts_tabulated(
        meta,
        [chron_f, chron_b, causal_f, causal_b],
        tau_rows,
        steps,
        topo,
        hint,
    ))
}

// best[z] only ever increases; the first touch registers z.
fn relax(best: &mut [f64], touched: &mut Vec<u32>, z: usize, value: f64) {
    if best[z] == f64::NEG_INFINITY {
        touched.push(z as u32);
    }
    if value > best[z] {
        best[z] = value;
    }
}

/// Every event left over by Kahn's algorithm has a leftover predecessor, so
/// walking predecessors must revisit a vertex.
fn find_cycle(succ: &[Vec<u32>], stuck: &[usize]) -> Vec<EventId> {
    let mut in_stuck = vec![false; succ.len()];
    for &s in stuck {
        in_stuck[s] = true;
    }
    let mut pred: Vec<Option<usize>> = vec![None; succ.len()];
    for &u in stuck {
        for &v in &succ[u] {
            if in_stuck[v as usize] {
                pred[v as usize].get_or_insert(u);
            }
        }
    }
    let mut pos = vec![usize::MAX; succ.len()];
    let mut path = Vec::new();
    let mut cur = stuck[0];
    while pos[cur] == usize::MAX {
        pos[cur] = path.len();
        path.push(cur);
        cur = pred[cur].expect("leftover event without leftover predecessor");
    }
    let mut cycle: Vec<EventId> = path[pos[cur]..].iter().rev().map(|&i| EventId::new(i)).collect();
    cycle.push(cycle[0]);
    cycle
}

/// Exhaustive longest path oracle for tests.
#[cfg(test)]
pub(crate) fn brute_force_tau(n: usize, gens: &[Generator], a: usize, b: usize) -> Option<f64> {
    fn go(n: usize, gens: &[Generator], cur: usize, b: usize, acc: f64, best: &mut Option<f64>) {
        if cur == b {
            *best = Some(best.map_or(acc, |x: f64| x.max(acc)));
            return;
        }
        for g in gens.iter().filter(|g| g.u == cur) {
            go(n, gens, g.v, b, acc + g.tau, best);
        }
    }
    let mut best = None;
    if a != b {
        go(n, gens, a, b, 0.0, &mut best);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{check_axioms, AxiomOptions, RelationKind};

    fn meta(n: usize) -> Vec<EventMeta> {
        vec![EventMeta::default(); n]
    }

    #[test]
    fn d4_closure_adds_the_long_relation() {
        let cs = crate::causal::d4();
        let a = EventId::new(0);
        let d = EventId::new(3);
        assert!(cs.chron(a, d));
        assert_eq!(cs.tau(a, d), 2.0);
        assert!(!cs.chron(EventId::new(1), EventId::new(2)));
        assert!(check_axioms(&cs, &AxiomOptions::default()).passed());
    }

    #[test]
    fn single_event_has_no_relations() {
        let cs = build_closure(meta(1), &[], StorageHint::Auto).unwrap();
        let a = EventId::new(0);
        assert!(!cs.causal(a, a));
        assert_eq!(cs.tau(a, a), 0.0);
    }

    #[test]
    fn two_cycle_is_rejected_with_witness() {
        let gens = [Generator::new(0, 1, 0.0), Generator::new(1, 0, 0.0)];
        match build_closure(meta(2), &gens, StorageHint::Auto) {
            Err(Error::Cycle { witness }) => {
                assert_eq!(witness.first(), witness.last());
                assert_eq!(witness.len(), 3);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn null_generators_stay_null_until_pushed_up() {
        // a ≤ b ≪ c with a null first step: push-up must make a ≪ c.
        let gens = [Generator::new(0, 1, 0.0), Generator::new(1, 2, 1.5)];
        let cs = build_closure(meta(3), &gens, StorageHint::Auto).unwrap();
        let [a, b, c] = [0, 1, 2].map(EventId::new);
        assert!(cs.null_related(a, b));
        assert!(cs.chron(a, c));
        assert_eq!(cs.tau(a, c), 1.5);
        assert!(cs.related(b, c, RelationKind::Chron));
    }

    #[test]
    fn closure_matches_brute_force_paths() {
        // A small layered DAG with uneven weights.
        let gens = [
            Generator::new(0, 1, 0.5),
            Generator::new(0, 2, 2.0),
            Generator::new(1, 3, 3.0),
            Generator::new(2, 3, 0.25),
            Generator::new(3, 4, 0.0),
            Generator::new(2, 4, 1.0),
            Generator::new(4, 5, 0.7),
        ];
        let cs = build_closure(meta(6), &gens, StorageHint::Auto).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                let oracle = brute_force_tau(6, &gens, a, b);
                let (ea, eb) = (EventId::new(a), EventId::new(b));
                assert_eq!(cs.causal(ea, eb), oracle.is_some(), "{a}->{b}");
                if let Some(t) = oracle {
                    assert!((cs.tau(ea, eb) - t).abs() < 1e-15, "{a}->{b}");
                }
            }
        }
    }
}
