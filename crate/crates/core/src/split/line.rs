use serde::{Deserialize, Serialize};

use crate::boundary::{future_boundary_classes, Horizon};
use crate::causal::{CausalStructure, EventId, RelationKind};
use crate::geodesy::{extract_limit_line, is_line, maximizer, null_chain_scan, Chain, LimitLine, LineCheck, NullScanOptions, NullScanReport};
use crate::metric::Point;
use crate::product::{ProductEvent, ProductSpace, ProductStructure, Region};
use crate::{Error, Result};

/// Completeness threshold on the slope of maximizer value against window length.
pub const MIN_GROWTH_SLOPE: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineOptions {
    /// Slab width for limit extraction; twice the mean sample spacing when absent.
    pub cell: Option<f64>,
    /// Largest tolerated slab dispersion; the cell when absent.
    pub threshold: Option<f64>,
    /// Centre time of the family; [`family_center`] when absent.
    pub center: Option<f64>,
    pub tol: f64,
}

impl Default for LineOptions {
    fn default() -> Self {
        LineOptions { cell: None, threshold: None, center: None, tol: 1e-9 }
    }
}

/// Maximizer of one family member, from `(p, c − n)` to `(p, c + n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyValue {
    pub n: f64,
    pub value: f64,
    pub tie_count: u64,
    pub direct: bool,
    /// Sum of spacetime distances along the maximizer. Reported only.
    pub d_length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineResult {
    pub p: String,
    /// Time the family is centred on.
    pub center: f64,
    pub values: Vec<FamilyValue>,
    /// Growth of the value per unit of window length `2n`.
    pub slope: f64,
    pub limit: LimitLine,
    pub check: LineCheck,
    pub passed: bool,
}

impl LineResult {
    pub fn chain(&self) -> &Chain {
        &self.limit.chain
    }
}

/// Time the maximizer family is centred on: the window midpoint, or the
/// midpoint of the apexes in a diamond.
pub fn family_center(ps: &ProductSpace) -> f64 {
    match ps.region() {
        Region::Diamond { lo, hi } => 0.5 * (lo.t + hi.t),
        _ => {
            let (t0, t1) = ps.window();
            0.5 * (t0 + t1)
        }
    }
}

/// Finds a line through the fiber over `p` as the limit of maximizers over
/// growing windows.
///
/// The member for `n` joins `(p, c − n)` and `(p, c + n)`. Both endpoints
/// must be in the sample. The result passes when the limit chain is a line
/// and the values grow with slope at least [`MIN_GROWTH_SLOPE`].
pub fn pipeline_find_line(st: &ProductStructure, p: &Point, family: &[f64], opts: &LineOptions) -> Result<LineResult> {
    if family.is_empty() {
        return Err(Error::input("the window family is empty"));
    }
    if family.iter().any(|&n| !(n > 0.0)) || family.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::input("window sizes must be positive and strictly increasing"));
    }
    let cs = st.cs();
    let center = opts.center.unwrap_or_else(|| family_center(st.space()));
    let mut chains = Vec::with_capacity(family.len());
    let mut values = Vec::with_capacity(family.len());
    for &n in family {
        let a = endpoint(st, p, center - n)?;
        let b = endpoint(st, p, center + n)?;
        let m = maximizer(cs, a, b, RelationKind::Chron)?;
        let d_length = m
            .chain
            .events
            .windows(2)
            .map(|w| cs.spacetime_distance(w[0], w[1]))
            .sum::<Option<f64>>();
        values.push(FamilyValue { n, value: m.value, tie_count: m.tie_count, direct: m.direct, d_length });
        chains.push(m.chain);
    }
    let cell = opts.cell.unwrap_or(2.0 * st.mean_spacing());
    let limit = extract_limit_line(cs, &chains, cell, opts.threshold.unwrap_or(cell))?;
    let check = is_line(cs, &limit.chain.events, opts.tol);
    let slope = growth_slope(&values);
    let passed = check.is_line && slope >= MIN_GROWTH_SLOPE;
    Ok(LineResult { p: st.space().sigma().label(p), center, values, slope, limit, check, passed })
}

/// Fraction of a step the fiber lattice is shifted by. It is irrational, so
/// lattice events share no null pairs with dyadic events on other fibers.
const LATTICE_SHIFT: f64 = 0.618_033_988_749_894_9;

/// Events on the fiber over `p` that a family needs: every endpoint
/// `(p, center ± n)` plus, when `step` is given, a lattice of that step
/// spanning the largest window.
pub fn line_fiber_events(p: &Point, center: f64, family: &[f64], step: Option<f64>) -> Vec<ProductEvent> {
    let mut out: Vec<ProductEvent> =
        family.iter().flat_map(|&n| [ProductEvent::new(*p, center - n), ProductEvent::new(*p, center + n)]).collect();
    if let Some(step) = step.filter(|s| *s > 0.0 && s.is_finite()) {
        let n_max = family.iter().copied().fold(0.0, f64::max);
        let k = (n_max / step).ceil() as i64;
        out.extend(
            (-k..k)
                .map(|i| center + (i as f64 + LATTICE_SHIFT) * step)
                .filter(|t| (t - center).abs() < n_max)
                .map(|t| ProductEvent::new(*p, t)),
        );
    }
    out
}

fn endpoint(st: &ProductStructure, p: &Point, t: f64) -> Result<EventId> {
    st.id_of(&ProductEvent::new(*p, t)).ok_or_else(|| {
        Error::input(format!("family endpoint ({}, {t}) is not in the sample", st.space().sigma().label(p)))
    })
}

fn growth_slope(values: &[FamilyValue]) -> f64 {
    match values {
        [] => 0.0,
        [v] => v.value / (2.0 * v.n),
        [first, .., last] => (last.value - first.value) / (2.0 * (last.n - first.n)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimelikeVerdict {
    pub timelike: bool,
    /// First consecutive pair of the chain that is not chronological.
    pub null_step: Option<(EventId, EventId)>,
    pub no_null_lines: bool,
    pub boundary_classes: usize,
}

/// A causal line is certified timelike when its steps are chronological,
/// the structure has no unobstructed null chain and the future boundary is a
/// single class.
pub fn certify_timelike(cs: &CausalStructure, chain: &[EventId], horizon: &Horizon) -> Result<TimelikeVerdict> {
    let null = null_chain_scan(cs, &NullScanOptions::default());
    let classes = future_boundary_classes(cs, horizon)?;
    Ok(timelike_verdict(cs, chain, &null, classes.count))
}

/// [`certify_timelike`] from an existing null scan and class count.
pub fn timelike_verdict(cs: &CausalStructure, chain: &[EventId], null: &NullScanReport, classes: usize) -> TimelikeVerdict {
    let null_step = chain.windows(2).find(|w| !cs.chron(w[0], w[1])).map(|w| (w[0], w[1]));
    let no_null_lines = null.no_null_lines && !null.truncated;
    TimelikeVerdict {
        timelike: null_step.is_none() && no_null_lines && classes == 1,
        null_step,
        no_null_lines,
        boundary_classes: classes,
    }
}
