//! The splitting pipeline: find a line, certify it is timelike, recover the
//! time coordinate and the base metric, and check the base's curvature.
//!
//! [`run_split`] chains the stages into one [`SplitReport`]. Stages that need
//! the line are skipped when no line is found, and recovery is skipped unless
//! the line is certified timelike.

mod line;
mod plot;
mod recover;
mod sweep;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boundary::{future_boundary_classes, Horizon};
use crate::causal::{check_axioms, AxiomOptions, AxiomReport};
use crate::geodesy::{null_chain_scan, NullScanOptions, NullScanReport};
use crate::metric::{MetricSpec, QuadReport};
use crate::product::{build_causal_structure, sprinkle, Mode, ProductEvent, SprinkleConfig};
use crate::{Error, Result, Status};

pub use line::{
    certify_timelike, family_center, line_fiber_events, pipeline_find_line, timelike_verdict, FamilyValue, LineOptions, LineResult,
    TimelikeVerdict, MIN_GROWTH_SLOPE,
};
pub use plot::plotdata;
pub use recover::{
    busemann_time, intrinsic_closure, recover_sigma, time_order_violations, validate_split, BusemannTime, MapCheck,
    RecoverOptions, SplitRecovery,
};
pub use sweep::{convergence_sweep, SweepConfig, SweepRow};

/// Time step of the fiber inserted under the line in Poisson runs.
pub const LINE_STEP: f64 = 1.0 / 16.0;

/// Expected outcome of a run. Negative controls expect `Fail`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    #[default]
    Pass,
    Fail,
}

impl Expect {
    /// 0 when everything passes, 2 for an expected failure, 1 otherwise.
    pub fn exit_code(self, status: Status) -> i32 {
        match (self, status) {
            (Expect::Pass, Status::Pass) => 0,
            (Expect::Fail, Status::Fail) => 2,
            _ => 1,
        }
    }
}

/// A sprinkle config given inline or as a path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SprinkleSource {
    Inline(SprinkleConfig),
    Path(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub line: f64,
    pub axioms: f64,
    pub curvature: f64,
    /// Limit-line dispersion threshold; the extraction cell when absent.
    pub dispersion: Option<f64>,
    /// Relative error allowed on recovered distances; `0.05 + 2/√density`
    /// for Poisson samples and `0.05` on grids when absent.
    pub distance: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { line: 1e-9, axioms: 1e-9, curvature: 1e-6, dispersion: None, distance: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sprinkle: SprinkleSource,
    /// Base point of the line; the first fiber representative when absent.
    #[serde(default)]
    pub line_at: Option<String>,
    /// Half-lengths `n` of the maximizer windows, increasing.
    pub family: Vec<f64>,
    /// Fiber representatives per base axis, for Poisson samples.
    #[serde(default)]
    pub fibers: Option<usize>,
    /// Time step of the inserted fibers, for Poisson samples.
    #[serde(default)]
    pub fiber_step: Option<f64>,
    /// Height of the recovery slab; `2·diam Σ` plus two fiber steps when absent.
    #[serde(default)]
    pub slab: Option<f64>,
    #[serde(default)]
    pub margin: Option<f64>,
    /// Overrides the sprinkle seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_quadruples")]
    pub quadruples: usize,
    #[serde(default)]
    pub expect: Expect,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_quadruples() -> usize {
    2000
}

impl RunConfig {
    /// Reads a config, resolving a sprinkle path against the config's directory.
    pub fn read(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let mut cfg: RunConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if let SprinkleSource::Path(p) = &cfg.sprinkle {
            let p = path.parent().map(|d| d.join(p)).unwrap_or_else(|| p.clone());
            cfg.sprinkle = SprinkleSource::Inline(SprinkleConfig::read(p)?);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.family.is_empty() || self.family.iter().any(|&n| !(n > 0.0)) || self.family.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::input("family must be a non-empty increasing list of positive sizes"));
        }
        let t = &self.tolerances;
        let positive = [Some(t.line), Some(t.axioms), Some(t.curvature), t.dispersion, t.distance, self.fiber_step, self.slab, self.margin];
        if positive.iter().flatten().any(|&v| !(v > 0.0)) {
            return Err(Error::input("tolerances, steps, slab and margin must be positive"));
        }
        if self.fibers == Some(0) || self.quadruples == 0 {
            return Err(Error::input("fibers and quadruples must be positive"));
        }
        Ok(())
    }

    fn sprinkle_config(&self) -> Result<&SprinkleConfig> {
        match &self.sprinkle {
            SprinkleSource::Inline(c) => Ok(c),
            SprinkleSource::Path(p) => Err(Error::input(format!("sprinkle config {} was not loaded", p.display()))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStage {
    pub count: usize,
    pub bulk_size: usize,
    pub top_size: usize,
    pub margin: f64,
    pub top_width: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryStage {
    pub status: Status,
    pub recovery: SplitRecovery,
    /// Largest `|t̂ − t|` over recovered bulk events.
    pub time_max_error: f64,
    /// `d_max²/(2·margin) + 2·cell`.
    pub time_bound: f64,
    /// Largest `|d̂ − d|/d` over distinct fibers.
    pub dist_max_rel_error: f64,
    pub dist_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitReport {
    pub status: Status,
    pub expect: Expect,
    pub exit_code: i32,
    pub seed: u64,
    pub events: usize,
    /// Fiber events added to the sprinkle.
    pub inserted: usize,
    /// One line per failed stage.
    pub failures: Vec<String>,
    pub axioms: AxiomReport,
    pub boundary: Option<BoundaryStage>,
    pub null_scan: NullScanReport,
    pub line: Option<LineResult>,
    pub timelike: Option<TimelikeVerdict>,
    pub recovery: Option<RecoveryStage>,
    pub curvature: Option<QuadReport>,
    pub sweep: Vec<SweepRow>,
}

fn default_fibers(spec: &MetricSpec) -> usize {
    match spec {
        MetricSpec::Torus { .. } => 4,
        MetricSpec::Tripod { .. } => 6,
        _ => 16,
    }
}

/// Runs the whole pipeline.
///
/// Poisson samples get extra events on the fiber under the line (so every
/// family endpoint exists) and on fiber representatives inside the recovery
/// slab. Grid samples are used as they are, with the grid's own fibers.
pub fn run_split(cfg: &RunConfig) -> Result<SplitReport> {
    cfg.validate()?;
    let sc = cfg.sprinkle_config()?;
    let seed = cfg.seed.unwrap_or(sc.seed);
    let ps = sc.space()?;
    let sigma = ps.sigma();
    let mut samples = sprinkle(&ps, &sc.mode, seed)?;
    let base_len = samples.len();

    let (fibers, density) = match sc.mode {
        Mode::Poisson { density } => (sigma.grid(cfg.fibers.unwrap_or_else(|| default_fibers(sigma.spec())))?, Some(density)),
        Mode::Grid { nx, .. } => (sigma.grid(nx)?, None),
    };
    let p = match &cfg.line_at {
        Some(s) => sigma.parse_point(s)?,
        None => fibers[0],
    };
    let center = family_center(&ps);
    let n_max = *cfg.family.last().unwrap();
    let h = cfg.fiber_step.unwrap_or(1.0 / 32.0);
    let s0 = (center - n_max).max(ps.window().0);
    let slab = (s0, s0 + cfg.slab.unwrap_or(2.0 * sigma.diameter() + 2.0 * h));
    if density.is_some() {
        let mut extra = line_fiber_events(&p, center, &cfg.family, Some(LINE_STEP));
        let steps = ((slab.1 - slab.0) / h).floor() as usize;
        extra.extend(fibers.iter().flat_map(|&x| (0..=steps).map(move |i| ProductEvent::new(x, slab.0 + i as f64 * h))));
        samples.extend(extra.into_iter().filter(|e| ps.contains(e)));
    }
    let inserted = samples.len() - base_len;
    let st = build_causal_structure(&ps, samples, sc.step_radius)?;
    let cs = st.cs();
    let mut failures = Vec::new();

    let axioms = check_axioms(cs, &AxiomOptions::with_tol(cfg.tolerances.axioms));
    if !axioms.passed() {
        failures.push(format!("axioms: {} violations", axioms.counts.values().sum::<u64>()));
    }

    let horizon = Horizon::for_product(&st, cfg.margin)?;
    let boundary = match future_boundary_classes(cs, &horizon) {
        Ok(c) => {
            if c.count != 1 {
                failures.push(format!("boundary: {} future boundary classes", c.count));
            }
            Some(BoundaryStage {
                count: c.count,
                bulk_size: c.bulk_size,
                top_size: c.top_size,
                margin: horizon.margin,
                top_width: horizon.top_width,
            })
        }
        Err(e) => {
            failures.push(format!("boundary: {e}"));
            None
        }
    };
    let null_scan = null_chain_scan(cs, &NullScanOptions::default());
    if !null_scan.no_null_lines {
        failures.push(format!("null lines: {} of {} null chains unobstructed", null_scan.chains - null_scan.obstructed, null_scan.chains));
    }

    let line_opts = LineOptions { threshold: cfg.tolerances.dispersion, tol: cfg.tolerances.line, ..LineOptions::default() };
    let line = match pipeline_find_line(&st, &p, &cfg.family, &line_opts) {
        Ok(l) => {
            if !l.passed {
                failures.push(format!("line: is_line {}, growth slope {:.4}", l.check.is_line, l.slope));
            }
            Some(l)
        }
        Err(e) => {
            failures.push(format!("line: {e}"));
            None
        }
    };
    let timelike = line
        .as_ref()
        .map(|l| timelike_verdict(cs, &l.chain().events, &null_scan, boundary.as_ref().map_or(0, |b| b.count)));
    if timelike.as_ref().is_some_and(|t| !t.timelike) {
        failures.push("timelike: the line is not certified".into());
    }

    let mut recovery = None;
    let mut curvature = None;
    if let (Some(l), Some(true)) = (&line, timelike.as_ref().map(|t| t.timelike)) {
        match recover_sigma(&st, &l.chain().events, &RecoverOptions { fibers: fibers.clone(), slab, cell: 0.0 }) {
            Ok(rec) => {
                let (mut t_err, mut d_max) = (0.0f64, 0.0f64);
                for e in horizon.bulk.iter() {
                    if let Some(th) = rec.time_hat[e.index()] {
                        let ev = st.event(e);
                        t_err = t_err.max((th - ev.t).abs());
                        d_max = d_max.max(sigma.dist(&ev.x, &p));
                    }
                }
                let time_bound = d_max * d_max / (2.0 * horizon.margin) + 2.0 * l.limit.cell;
                let mut dist_err = 0.0f64;
                for i in 0..fibers.len() {
                    for j in i + 1..fibers.len() {
                        let d = sigma.dist(&fibers[i], &fibers[j]);
                        dist_err = dist_err.max((rec.d_hat[i][j] - d).abs() / d);
                    }
                }
                let dist_bound = cfg.tolerances.distance.unwrap_or(0.05 + density.map_or(0.0, |r| 2.0 / r.sqrt()));
                let disagreements = rec.map_check.as_ref().map_or(0, |m| m.order_disagreements);
                let ok = rec.time_order_violations == 0
                    && t_err <= time_bound
                    && dist_err <= dist_bound
                    && (density.is_some() || disagreements == 0);
                if !ok {
                    failures.push(format!(
                        "recovery: {} time order violations, time error {t_err:.3e} (bound {time_bound:.3e}), \
                         distance error {dist_err:.3e} (bound {dist_bound:.3e}), {disagreements} order disagreements",
                        rec.time_order_violations
                    ));
                }
                let q = validate_split(&rec, cfg.quadruples, seed, cfg.tolerances.curvature)?;
                if !q.passed() {
                    failures.push(format!("curvature: {} violations", q.violations.len()));
                }
                curvature = Some(q);
                recovery = Some(RecoveryStage {
                    status: Status::from_pass(ok),
                    recovery: rec,
                    time_max_error: t_err,
                    time_bound,
                    dist_max_rel_error: dist_err,
                    dist_bound,
                });
            }
            Err(e) => failures.push(format!("recovery: {e}")),
        }
    }

    let sweep = match &cfg.sweep {
        Some(s) => convergence_sweep(sigma, s)?,
        None => Vec::new(),
    };
    let status = Status::from_pass(failures.is_empty());
    Ok(SplitReport {
        status,
        expect: cfg.expect,
        exit_code: cfg.expect.exit_code(status),
        seed,
        events: st.len(),
        inserted,
        failures,
        axioms,
        boundary,
        null_scan,
        line,
        timelike,
        recovery,
        curvature,
        sweep,
    })
}
