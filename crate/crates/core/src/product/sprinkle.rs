use std::collections::HashSet;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{ProductEvent, ProductSpace, RegionSpec};
use crate::metric::MetricSpec;
use crate::{par, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Points per unit of base measure times unit time.
    Poisson { density: f64 },
    /// `nx` base points (per axis on a torus) times `nt` times including both ends.
    Grid { nx: usize, nt: usize },
}

/// Sprinkle configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprinkleConfig {
    pub sigma: MetricSpec,
    pub window: [f64; 2],
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub region: RegionSpec,
    /// Largest spacetime distance of a local step edge; derived when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_radius: Option<f64>,
}

impl SprinkleConfig {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn space(&self) -> Result<ProductSpace> {
        ProductSpace::from_specs(self.sigma.clone(), self.window, &self.region)
    }

    pub fn sample(&self) -> Result<(ProductSpace, SampleSet)> {
        let ps = self.space()?;
        let samples = sprinkle(&ps, &self.mode, self.seed)?;
        Ok((ps, samples))
    }
}

/// Distinct events sorted by time, then by base point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleSet {
    events: Vec<ProductEvent>,
}

impl SampleSet {
    pub fn from_events(events: impl IntoIterator<Item = ProductEvent>) -> Self {
        let mut s = SampleSet::default();
        s.extend(events);
        s
    }

    /// Adds events, dropping exact duplicates, and restores the canonical order.
    pub fn extend(&mut self, events: impl IntoIterator<Item = ProductEvent>) {
        self.events.extend(events);
        self.events.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.key().cmp(&b.key())));
        let mut seen = HashSet::new();
        self.events.retain(|e| seen.insert(e.key()));
    }

    pub fn events(&self) -> &[ProductEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Samples events of a product space.
///
/// Poisson mode draws a Poisson count over the full window and thins it by the
/// region, so the result is a Poisson process restricted to the region. It
/// needs a base with a canonical measure (the continuous built-ins).
pub fn sprinkle(ps: &ProductSpace, mode: &Mode, seed: u64) -> Result<SampleSet> {
    let (t0, t1) = ps.window();
    let events: Vec<ProductEvent> = match *mode {
        Mode::Poisson { density } => {
            if !(density.is_finite() && density > 0.0) {
                return Err(Error::input(format!("density must be positive, got {density}")));
            }
            let measure = ps
                .sigma()
                .measure()
                .ok_or_else(|| Error::input("poisson mode needs a continuous built-in base; use grid mode"))?;
            let lambda = density * measure * (t1 - t0);
            let mut rng = par::task_rng(seed, 0);
            let count = Poisson::new(lambda)
                .map_err(|e| Error::input(format!("bad poisson mean {lambda}: {e}")))?
                .sample(&mut rng) as usize;
            (0..count)
                .map(|_| {
                    let x = ps.sigma().sample_point(&mut rng);
                    let t = t0 + (t1 - t0) * rng.random::<f64>();
                    ProductEvent::new(x, t)
                })
                .filter(|e| ps.in_region(e))
                .collect()
        }
        Mode::Grid { nx, nt } => {
            if nt < 2 {
                return Err(Error::input("grid needs nt >= 2"));
            }
            let base = ps.sigma().grid(nx)?;
            let times: Vec<f64> = (0..nt).map(|i| t0 + (t1 - t0) * i as f64 / (nt - 1) as f64).collect();
            times
                .iter()
                .flat_map(|&t| base.iter().map(move |&x| ProductEvent::new(x, t)))
                .filter(|e| ps.in_region(e))
                .collect()
        }
    };
    if events.is_empty() {
        return Err(Error::EmptySample(
            "no events fell inside the window and region; raise the density or grid resolution, or widen the region".into(),
        ));
    }
    Ok(SampleSet::from_events(events))
}
