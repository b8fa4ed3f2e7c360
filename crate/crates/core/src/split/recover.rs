use serde::{Deserialize, Serialize};

use crate::causal::{CausalStructure, EventId, RelationKind};
use crate::metric::{quadruple_curvature_test, MetricSpace, Point, QuadReport, QuadSource};
use crate::product::ProductStructure;
use crate::{par, Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusemannTime {
    pub t_hat: f64,
    /// Line event the estimate is taken against.
    pub line_event: EventId,
    /// Second-order error `d²/(2(t_N − t_e))` when the structure has geometry.
    pub bound: Option<f64>,
}

/// Time coordinate of `e` read off a line: `t_N − τ(e, γ(t_N))` for the
/// latest line event in the causal future of `e`.
///
/// `line` must be in time order.
pub fn busemann_time(cs: &CausalStructure, line: &[EventId], e: EventId) -> Result<BusemannTime> {
    let e = cs.check(e)?;
    let g = *line.iter().rev().find(|&&g| g == e || cs.causal(e, g)).ok_or(Error::NotInPast(e))?;
    let t_n = cs.time(g).ok_or_else(|| Error::input("line events need times"))?;
    let bound = match (cs.time(e), cs.base_distance(e, g)) {
        (_, Some(d)) if d == 0.0 => Some(0.0),
        (Some(t), Some(d)) if t_n > t => Some(d * d / (2.0 * (t_n - t))),
        _ => None,
    };
    Ok(BusemannTime { t_hat: t_n - cs.tau(e, g), line_event: g, bound })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoverOptions {
    /// Fiber representatives.
    pub fibers: Vec<Point>,
    /// Time slab the fibers are read from.
    pub slab: (f64, f64),
    /// An event joins the nearest representative within this base distance.
    pub cell: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapCheck {
    /// Ordered pairs of distinct fiber events compared.
    pub pairs: u64,
    pub related_pairs: u64,
    /// Largest `|τ(e, w) − √(Δt̂² − d̂²)|` over causal pairs.
    pub worst_tau_error: f64,
    /// Pairs where `Δt̂ ≥ d̂ − order_tol` disagrees with `e ≤ w`.
    pub order_disagreements: u64,
    pub order_tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitRecovery {
    /// Last line event; every recovered time is measured against it.
    pub anchor: Option<EventId>,
    #[serde(skip)]
    pub time_hat: Vec<Option<f64>>,
    pub recovered: usize,
    pub unrecovered: usize,
    /// Chronological pairs whose recovered times do not increase.
    pub time_order_violations: u64,
    pub labels: Vec<String>,
    pub fiber_sizes: Vec<usize>,
    pub d_hat: Vec<Vec<f64>>,
    /// Largest amount the intrinsic closure lowered a raw distance.
    pub closure_gap: f64,
    pub map_check: Option<MapCheck>,
    #[serde(skip)]
    pub sigma_hat: Option<MetricSpace>,
}

impl SplitRecovery {
    /// A recovery that only carries a base metric, for validating distance
    /// tables obtained elsewhere.
    pub fn from_distances(labels: Vec<String>, d: Vec<Vec<f64>>) -> Result<SplitRecovery> {
        let sigma_hat = MetricSpace::matrix(labels.clone(), d.clone())?;
        Ok(SplitRecovery {
            anchor: None,
            time_hat: Vec::new(),
            recovered: 0,
            unrecovered: 0,
            time_order_violations: 0,
            fiber_sizes: vec![0; labels.len()],
            labels,
            d_hat: d,
            closure_gap: 0.0,
            map_check: None,
            sigma_hat: Some(sigma_hat),
        })
    }
}

/// Recovers the time coordinate and the base metric from a line.
///
/// Every event in the causal past of the last line event gets a Busemann
/// time against it. Fibers are read inside the slab; `d̂(x, y)` averages the
/// two directed minima of `t̂(w) − t̂(e)` over causal pairs from one fiber to
/// the other, which cancels the first-order drift of the Busemann time, and
/// is then replaced by its intrinsic closure.
pub fn recover_sigma(st: &ProductStructure, line: &[EventId], opts: &RecoverOptions) -> Result<SplitRecovery> {
    let cs = st.cs();
    let anchor = *line.last().ok_or_else(|| Error::input("the line is empty"))?;
    if opts.fibers.is_empty() {
        return Err(Error::input("no fiber representatives"));
    }
    let est: Vec<Option<BusemannTime>> =
        par::map_range(cs.len(), |i| busemann_time(cs, line, EventId::new(i)).ok().filter(|b| b.line_event == anchor));
    let time_hat: Vec<Option<f64>> = est.iter().map(|b| b.map(|b| b.t_hat)).collect();
    let recovered = time_hat.iter().flatten().count();
    let time_order_violations = time_order_violations(cs, &time_hat);

    let sigma = st.space().sigma();
    let mut members: Vec<Vec<EventId>> = vec![Vec::new(); opts.fibers.len()];
    for e in cs.events() {
        let ev = st.event(e);
        if time_hat[e.index()].is_none() || ev.t < opts.slab.0 || ev.t > opts.slab.1 {
            continue;
        }
        let nearest = opts
            .fibers
            .iter()
            .map(|f| sigma.dist(&ev.x, f))
            .enumerate()
            .filter(|&(_, d)| d <= opts.cell)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, _)) = nearest {
            members[i].push(e);
        }
    }
    let th = |e: EventId| time_hat[e.index()].unwrap();
    let k = opts.fibers.len();
    let directed: Vec<Vec<Option<f64>>> = par::map_range(k, |i| {
        (0..k)
            .map(|j| {
                let mut best: Option<f64> = None;
                for &e in &members[i] {
                    for &w in &members[j] {
                        if e != w && cs.causal(e, w) {
                            let v = th(w) - th(e);
                            best = Some(best.map_or(v, |b| b.min(v)));
                        }
                    }
                }
                best
            })
            .collect()
    });
    let mut raw = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let (Some(a), Some(b)) = (directed[i][j], directed[j][i]) else {
                return Err(Error::input(format!(
                    "slab too thin: fibers {} and {} have no causal pair",
                    sigma.label(&opts.fibers[i]),
                    sigma.label(&opts.fibers[j])
                )));
            };
            raw[i][j] = 0.5 * (a + b);
            raw[j][i] = raw[i][j];
        }
    }
    let d_hat = intrinsic_closure(&raw);
    let closure_gap = raw.iter().flatten().zip(d_hat.iter().flatten()).map(|(r, d)| r - d).fold(0.0, f64::max);

    let fiber_of: Vec<(EventId, usize)> =
        members.iter().enumerate().flat_map(|(i, m)| m.iter().map(move |&e| (e, i))).collect();
    let order_tol = 2.0 * fiber_of.iter().filter_map(|&(e, _)| est[e.index()].and_then(|b| b.bound)).fold(0.0, f64::max);
    let rows = par::map_slice(&fiber_of, |&(e, i)| {
        let (mut related, mut worst, mut wrong) = (0u64, 0.0f64, 0u64);
        for &(w, j) in &fiber_of {
            if w == e {
                continue;
            }
            let dt = th(w) - th(e);
            let causal = cs.causal(e, w);
            if causal != (dt >= d_hat[i][j] - order_tol) {
                wrong += 1;
            }
            if causal {
                related += 1;
                let model = (dt * dt - d_hat[i][j] * d_hat[i][j]).max(0.0).sqrt();
                worst = worst.max((cs.tau(e, w) - model).abs());
            }
        }
        (related, worst, wrong)
    });
    let n = fiber_of.len() as u64;
    let map_check = MapCheck {
        pairs: n * n.saturating_sub(1),
        related_pairs: rows.iter().map(|r| r.0).sum(),
        worst_tau_error: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        order_disagreements: rows.iter().map(|r| r.2).sum(),
        order_tol,
    };
    let labels: Vec<String> = opts.fibers.iter().map(|f| sigma.label(f)).collect();
    let sigma_hat = MetricSpace::matrix(labels.clone(), d_hat.clone())?;
    Ok(SplitRecovery {
        anchor: Some(anchor),
        recovered,
        unrecovered: cs.len() - recovered,
        time_order_violations,
        time_hat,
        labels,
        fiber_sizes: members.iter().map(Vec::len).collect(),
        d_hat,
        closure_gap,
        map_check: Some(map_check),
        sigma_hat: Some(sigma_hat),
    })
}

/// Chronological pairs `e ≪ w`, both recovered, with `t̂(w) ≤ t̂(e)`.
pub fn time_order_violations(cs: &CausalStructure, time_hat: &[Option<f64>]) -> u64 {
    par::map_range(cs.len(), |i| {
        let Some(te) = time_hat[i] else { return 0 };
        cs.successors(EventId::new(i), RelationKind::Chron)
            .filter(|w| time_hat[w.index()].is_some_and(|tw| tw <= te))
            .count() as u64
    })
    .into_iter()
    .sum()
}

/// Shortest-path closure of a symmetric distance table.
pub fn intrinsic_closure(d: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = d.to_vec();
    let k = out.len();
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                let via = out[i][m] + out[m][j];
                if via < out[i][j] {
                    out[i][j] = via;
                }
            }
        }
    }
    out
}

/// Runs the quadruple curvature test on the recovered base.
pub fn validate_split(recovery: &SplitRecovery, quadruples: usize, seed: u64, tol: f64) -> Result<QuadReport> {
    let ms = recovery.sigma_hat.as_ref().ok_or_else(|| Error::input("the recovery carries no base metric"))?;
    Ok(quadruple_curvature_test(ms, QuadSource::Random { count: quadruples, seed }, tol))
}
