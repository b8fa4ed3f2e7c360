use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::causal::{EventId, RelationKind};
use crate::geodesy::maximizer;
use crate::metric::MetricSpace;
use crate::product::{build_causal_structure, sprinkle, Mode, ProductSpace};
use crate::{par, Error, Result};

/// Maximizer values against closed-form τ over a range of densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub densities: Vec<f64>,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Smallest closed-form τ of a sampled endpoint pair.
    #[serde(default = "default_min_tau")]
    pub min_tau: f64,
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    #[serde(default)]
    pub seed: u64,
}

fn default_pairs() -> usize {
    50
}

fn default_min_tau() -> f64 {
    1.0
}

fn default_window() -> [f64; 2] {
    [0.0, 3.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub density: f64,
    pub events: usize,
    pub pairs: usize,
    /// Median of `(τ − value)/τ` over the pairs.
    pub median_rel_error: f64,
    pub max_rel_error: f64,
}

/// Attempts per requested pair before giving up on finding τ ≥ `min_tau`.
const ATTEMPTS: usize = 1000;

/// Runs the sweep on `sigma × window`, one independent sprinkle per density.
pub fn convergence_sweep(sigma: &MetricSpace, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.pairs == 0 {
        return Err(Error::input("the sweep needs at least one pair"));
    }
    let ps = ProductSpace::new(sigma.clone(), (cfg.window[0], cfg.window[1]))?;
    cfg.densities
        .iter()
        .enumerate()
        .map(|(k, &density)| {
            let samples = sprinkle(&ps, &Mode::Poisson { density }, cfg.seed.wrapping_add(k as u64))?;
            let st = build_causal_structure(&ps, samples, None)?;
            let cs = st.cs();
            let mut rng = par::task_rng(cfg.seed, k as u64);
            let mut pairs = Vec::with_capacity(cfg.pairs);
            for _ in 0..cfg.pairs * ATTEMPTS {
                if pairs.len() == cfg.pairs {
                    break;
                }
                let (a, b) = (EventId::new(rng.random_range(0..cs.len())), EventId::new(rng.random_range(0..cs.len())));
                if cs.chron(a, b) && cs.tau(a, b) >= cfg.min_tau {
                    pairs.push((a, b));
                }
            }
            if pairs.len() < cfg.pairs {
                return Err(Error::input(format!("density {density}: found only {} pairs with τ ≥ {}", pairs.len(), cfg.min_tau)));
            }
            let errs = par::map_slice(&pairs, |&(a, b)| {
                let tau = cs.tau(a, b);
                maximizer(cs, a, b, RelationKind::Chron).map(|m| (tau - m.value) / tau)
            });
            let mut errs = errs.into_iter().collect::<Result<Vec<f64>>>()?;
            errs.sort_by(f64::total_cmp);
            let m = errs.len();
            let median = if m % 2 == 1 { errs[m / 2] } else { 0.5 * (errs[m / 2 - 1] + errs[m / 2]) };
            Ok(SweepRow { density, events: cs.len(), pairs: m, median_rel_error: median, max_rel_error: errs[m - 1] })
        })
        .collect()
}
