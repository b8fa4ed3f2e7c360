use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CausalStructure, EventId, RelationKind};
use crate::{par, Status};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Irreflexive,
    Antisymmetric,
    ChronInCausal,
    TauPositivity,
    Transitive,
    PushUp,
    ReverseTriangle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<EventId>,
    /// Numeric margin for quantitative axioms; absent for purely relational ones.
    pub slack: Option<f64>,
}

/// How many pairs or triples to inspect.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    /// Exhaustive on small structures, sampled otherwise.
    Auto,
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomOptions {
    pub tol: f64,
    /// Violations kept per axiom; the counts still cover all of them.
    pub max_per_axiom: usize,
    pub pairs: Coverage,
    pub triples: Coverage,
}

impl Default for AxiomOptions {
    fn default() -> Self {
        AxiomOptions { tol: 1e-9, max_per_axiom: 10, pairs: Coverage::Auto, triples: Coverage::Auto }
    }
}

impl AxiomOptions {
    pub fn with_tol(tol: f64) -> Self {
        AxiomOptions { tol, ..Self::default() }
    }
}

const AUTO_PAIR_LIMIT: usize = 6_000;
const AUTO_TRIPLE_LIMIT: usize = 64;
const AUTO_SAMPLES: usize = 100_000;
const CHUNK: usize = 4_096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub status: Status,
    pub violations: Vec<Violation>,
    pub counts: BTreeMap<Axiom, u64>,
    pub pairs_checked: u64,
    pub triples_checked: u64,
    pub tol: f64,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.status.is_pass()
    }

    pub fn worst_slack(&self, axiom: Axiom) -> Option<f64> {
        self.violations
            .iter()
            .filter(|v| v.axiom == axiom)
            .filter_map(|v| v.slack)
            .min_by(f64::total_cmp)
    }
}

#[derive(Default)]
struct Acc {
    violations: Vec<Violation>,
    counts: BTreeMap<Axiom, u64>,
    checked: u64,
}

impl Acc {
    fn push(&mut self, cap: usize, axiom: Axiom, witness: &[EventId], slack: Option<f64>) {
        let c = self.counts.entry(axiom).or_insert(0);
        *c += 1;
        if *c as usize <= cap {
            self.violations.push(Violation { axiom, witness: witness.to_vec(), slack });
        }
    }

    fn merge(&mut self, other: Acc, cap: usize) {
        for v in other.violations {
            let kept = self.violations.iter().filter(|w| w.axiom == v.axiom).count();
            if kept < cap {
                self.violations.push(v);
            }
        }
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.checked += other.checked;
    }
}

/// Checks the Lorentzian pre-length axioms on a finite structure.
///
/// Pairs: irreflexivity, antisymmetry, `≪ ⊆ ≤`, `τ > 0 ⟺ ≪`.
/// Causal triples `x ≤ y ≤ z`: transitivity, push-up and the reverse triangle
/// inequality with slack `τ(x,z) − τ(x,y) − τ(y,z) ≥ −tol`.
pub fn check_axioms(cs: &CausalStructure, opts: &AxiomOptions) -> AxiomReport {
    let cap = opts.max_per_axiom.max(1);
    let n = cs.len();

    let mut pairs = Acc::default();
    let exhaustive_pairs = match opts.pairs {
        Coverage::Auto => n <= AUTO_PAIR_LIMIT,
        Coverage::Exhaustive => true,
        Coverage::Sampled { .. } => false,
    };
    if exhaustive_pairs {
        for acc in par::map_range(n, |i| {
            let mut acc = Acc::default();
            let a = EventId::new(i);
            for j in 0..n {
                check_pair(cs, a, EventId::new(j), cap, &mut acc);
            }
            acc
        }) {
            pairs.merge(acc, cap);
        }
    } else if n > 0 {
        let (count, seed) = match opts.pairs {
            Coverage::Sampled { count, seed } => (count, seed),
            _ => (AUTO_SAMPLES, 0),
        };
        for acc in par::map_range(count.div_ceil(CHUNK), |c| {
            let mut rng = par::task_rng(seed, c as u64);
            let mut acc = Acc::default();
            for _ in 0..CHUNK.min(count - c * CHUNK) {
                let a = EventId::new(rng.random_range(0..n));
                let b = EventId::new(rng.random_range(0..n));
                check_pair(cs, a, b, cap, &mut acc);
            }
            acc
        }) {
            pairs.merge(acc, cap);
        }
    }

    let mut triples = Acc::default();
    let exhaustive_triples = match opts.triples {
        Coverage::Auto => n <= AUTO_TRIPLE_LIMIT,
        Coverage::Exhaustive => true,
        Coverage::Sampled { .. } => false,
    };
    if exhaustive_triples {
        for acc in par::map_range(n, |i| {
            let mut acc = Acc::default();
            let x = EventId::new(i);
            for y in cs.successors(x, RelationKind::Causal) {
                for z in cs.successors(y, RelationKind::Causal) {
                    check_triple(cs, x, y, z, opts.tol, cap, &mut acc);
                }
            }
            acc
        }) {
            triples.merge(acc, cap);
        }
    } else if n > 0 {
        let (count, seed) = match opts.triples {
            Coverage::Sampled { count, seed } => (count, seed),
            _ => (AUTO_SAMPLES, 0),
        };
        for acc in par::map_range(count.div_ceil(CHUNK), |c| {
            let mut rng = par::task_rng(seed ^ 0x7472_6970_6c65, c as u64);
            let mut acc = Acc::default();
            let want = CHUNK.min(count - c * CHUNK);
            let mut attempts = 0;
            while (acc.checked as usize) < want && attempts < 50 * want {
                attempts += 1;
                if let Some((x, y, z)) = sample_triple(cs, &mut rng) {
                    check_triple(cs, x, y, z, opts.tol, cap, &mut acc);
                }
            }
            acc
        }) {
            triples.merge(acc, cap);
        }
    }

    let mut violations = pairs.violations;
    violations.extend(triples.violations);
    violations.sort_by_key(|v| v.axiom);
    let mut counts = pairs.counts;
    for (k, c) in triples.counts {
        *counts.entry(k).or_insert(0) += c;
    }
    AxiomReport {
        status: Status::from_pass(violations.is_empty()),
        violations,
        counts,
        pairs_checked: pairs.checked,
        triples_checked: triples.checked,
        tol: opts.tol,
    }
}

fn sample_triple(cs: &CausalStructure, rng: &mut impl Rng) -> Option<(EventId, EventId, EventId)> {
    let x = EventId::new(rng.random_range(0..cs.len()));
    let nx = cs.future_count(x, RelationKind::Causal);
    if nx == 0 {
        return None;
    }
    let y = cs.nth_successor(x, RelationKind::Causal, rng.random_range(0..nx))?;
    let ny = cs.future_count(y, RelationKind::Causal);
    if ny == 0 {
        return None;
    }
    let z = cs.nth_successor(y, RelationKind::Causal, rng.random_range(0..ny))?;
    Some((x, y, z))
}

fn check_pair(cs: &CausalStructure, a: EventId, b: EventId, cap: usize, acc: &mut Acc) {
    acc.checked += 1;
    let chron = cs.chron(a, b);
    let causal = cs.causal(a, b);
    let tau = cs.tau(a, b);
    if a == b {
        if chron || causal {
            acc.push(cap, Axiom::Irreflexive, &[a, b], None);
        }
        return;
    }
    if chron && !causal {
        acc.push(cap, Axiom::ChronInCausal, &[a, b], None);
    }
    if (tau > 0.0) != chron || !(tau >= 0.0) {
        acc.push(cap, Axiom::TauPositivity, &[a, b], Some(tau));
    }
    if a < b && causal && cs.causal(b, a) {
        acc.push(cap, Axiom::Antisymmetric, &[a, b], None);
    }
}

fn check_triple(cs: &CausalStructure, x: EventId, y: EventId, z: EventId, tol: f64, cap: usize, acc: &mut Acc) {
    acc.checked += 1;
    let w = [x, y, z];
    if !cs.causal(x, z) {
        acc.push(cap, Axiom::Transitive, &w, None);
    }
    if (cs.chron(x, y) || cs.chron(y, z)) && !cs.chron(x, z) {
        acc.push(cap, Axiom::PushUp, &w, None);
    }
    let slack = cs.tau(x, z) - cs.tau(x, y) - cs.tau(y, z);
    if slack < -tol || slack.is_nan() {
        acc.push(cap, Axiom::ReverseTriangle, &w, Some(slack));
    }
}
