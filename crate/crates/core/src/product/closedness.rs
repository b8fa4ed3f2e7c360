use serde::{Deserialize, Serialize};

use super::{ProductEvent, ProductSpace};
use crate::Status;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceVerdict {
    /// Limit pair is causally related within tolerance.
    Closed,
    /// Limit pair is not causally related: closedness fails.
    NotClosed,
    /// Coordinates are not Cauchy in the spacetime metric.
    NonConvergent,
    /// Some term of the sequence is not causally related.
    UnrelatedTerm,
    /// The limit leaves the window or region.
    LimitOutsideRegion,
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceOutcome {
    pub index: usize,
    pub verdict: SequenceVerdict,
    /// `Δt − d` at the limit pair; non-negative means causally related.
    pub limit_slack: Option<f64>,
    /// Spacetime distance between the last two terms, per endpoint.
    pub last_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosednessReport {
    pub status: Status,
    pub sequences: Vec<SequenceOutcome>,
}

/// Probes closedness of `≤` along sequences of causally related pairs.
///
/// The last pair stands in for the limit. A sequence counts as convergent when
/// both endpoint tracks end with a step of at most `conv_tol` and the distance
/// to the limit never grows along the second half. Only `NotClosed` fails the
/// report; the other non-closed verdicts are flags on unusable input.
pub fn causal_closedness_probe(
    ps: &ProductSpace,
    sequences: &[Vec<(ProductEvent, ProductEvent)>],
    tol: f64,
    conv_tol: f64,
) -> ClosednessReport {
    let outcomes: Vec<SequenceOutcome> = sequences
        .iter()
        .enumerate()
        .map(|(index, seq)| probe(ps, index, seq, tol, conv_tol))
        .collect();
    let ok = outcomes.iter().all(|o| o.verdict != SequenceVerdict::NotClosed);
    ClosednessReport { status: Status::from_pass(ok), sequences: outcomes }
}

fn probe(ps: &ProductSpace, index: usize, seq: &[(ProductEvent, ProductEvent)], tol: f64, conv_tol: f64) -> SequenceOutcome {
    let mut out = SequenceOutcome { index, verdict: SequenceVerdict::Empty, limit_slack: None, last_step: None };
    let Some(&(la, lb)) = seq.last() else {
        return out;
    };
    let dist = |p: &ProductEvent, q: &ProductEvent| ps.relations(p, q).d_spacetime;
    let track_ok = |pick: fn(&(ProductEvent, ProductEvent)) -> ProductEvent, lim: &ProductEvent| {
        let tail = &seq[seq.len() / 2..];
        let ds: Vec<f64> = tail.iter().map(|p| dist(&pick(p), lim)).collect();
        ds.windows(2).all(|w| w[1] <= w[0] + 1e-15)
    };
    if seq.len() >= 2 {
        let (pa, pb) = seq[seq.len() - 2];
        let step = dist(&pa, &la).max(dist(&pb, &lb));
        out.last_step = Some(step);
        if step > conv_tol || !track_ok(|p| p.0, &la) || !track_ok(|p| p.1, &lb) {
            out.verdict = SequenceVerdict::NonConvergent;
            return out;
        }
    }
    if seq.iter().any(|(a, b)| !ps.relations(a, b).causal) {
        out.verdict = SequenceVerdict::UnrelatedTerm;
        return out;
    }
    let r = ps.relations(&la, &lb);
    out.limit_slack = Some((lb.t - la.t) - ps.sigma().dist(&la.x, &lb.x));
    if !ps.contains(&la) || !ps.contains(&lb) {
        out.verdict = SequenceVerdict::LimitOutsideRegion;
        return out;
    }
    out.verdict = if r.causal || out.limit_slack.unwrap() >= -tol {
        SequenceVerdict::Closed
    } else {
        SequenceVerdict::NotClosed
    };
    out
}
