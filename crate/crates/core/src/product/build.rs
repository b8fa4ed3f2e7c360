use std::collections::HashMap;
use std::sync::Arc;

use super::{relate, ProductEvent, ProductSpace, SampleSet};
use crate::causal::{CausalStructure, EventGeometry, EventId, EventMeta, PairRelation, StorageHint};
use crate::metric::MetricSpace;
use crate::{par, Error, Result};

/// Closed-form geometry of a sampled product.
#[derive(Debug)]
pub struct ProductGeometry {
    sigma: MetricSpace,
    events: Vec<ProductEvent>,
}

impl ProductGeometry {
    pub fn new(sigma: MetricSpace, events: Vec<ProductEvent>) -> Self {
        ProductGeometry { sigma, events }
    }
}

impl EventGeometry for ProductGeometry {
    fn len(&self) -> usize {
        self.events.len()
    }

    fn time(&self, a: usize) -> f64 {
        self.events[a].t
    }

    fn base_distance(&self, a: usize, b: usize) -> f64 {
        self.sigma.dist(&self.events[a].x, &self.events[b].x)
    }

    fn relate(&self, a: usize, b: usize) -> PairRelation {
        let r = relate(self.events[b].t - self.events[a].t, self.base_distance(a, b));
        PairRelation { chron: r.chron, causal: r.causal, tau: r.tau }
    }
}

/// A causal structure sampled from a product space, with its coordinates.
#[derive(Clone, Debug)]
pub struct ProductStructure {
    space: ProductSpace,
    samples: SampleSet,
    cs: CausalStructure,
    step_radius: f64,
    mean_spacing: f64,
    index: HashMap<((u8, u64, u64), u64), EventId>,
}

impl ProductStructure {
    pub fn cs(&self) -> &CausalStructure {
        &self.cs
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn event(&self, id: EventId) -> ProductEvent {
        self.samples.events()[id.index()]
    }

    pub fn id_of(&self, e: &ProductEvent) -> Option<EventId> {
        self.index.get(&e.key()).copied()
    }

    /// Largest spacetime distance of a step edge.
    pub fn step_radius(&self) -> f64 {
        self.step_radius
    }

    /// Mean nearest-neighbour spacetime distance of the sample.
    pub fn mean_spacing(&self) -> f64 {
        self.mean_spacing
    }

    /// Events on the fiber over the base point of `x`, in time order.
    pub fn fiber(&self, x: &crate::metric::Point) -> Vec<EventId> {
        let k = x.key();
        self.samples
            .events()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.x.key() == k)
            .map(|(i, _)| EventId::new(i))
            .collect()
    }

    pub fn ids_of(&self, events: &[ProductEvent]) -> Result<Vec<EventId>> {
        events
            .iter()
            .map(|e| self.id_of(e).ok_or_else(|| Error::input(format!("event ({}, {}) is not in the sample", self.space.label(e), e.t))))
            .collect()
    }
}

/// Step radius used when none is configured.
///
/// Half the smaller of diam Σ and the window length, capped at 0.5, and never
/// below three mean sample spacings so that sparse samples stay connected.
pub fn default_step_radius(ps: &ProductSpace, mean_spacing: f64) -> f64 {
    let (t0, t1) = ps.window();
    let mut r = ps.sigma().diameter().min(t1 - t0) / 2.0;
    if !(r > 0.0) {
        r = (t1 - t0) / 2.0;
    }
    r.min(0.5).max(3.0 * mean_spacing)
}

/// Builds the causal structure of a sample by closed-form pairwise relations.
///
/// Step edges join causal pairs within `step_radius` in the spacetime metric.
pub fn build_causal_structure(ps: &ProductSpace, samples: SampleSet, step_radius: Option<f64>) -> Result<ProductStructure> {
    let events = samples.events().to_vec();
    if let Some(e) = events.iter().find(|e| !ps.contains(e)) {
        return Err(Error::input(format!("event ({}, {}) lies outside the window or region", ps.label(e), e.t)));
    }
    let n = events.len();
    let mean_spacing = mean_nn_distance(ps, &events);
    let radius = match step_radius {
        Some(r) if r > 0.0 => r,
        Some(r) => return Err(Error::input(format!("step radius must be positive, got {r}"))),
        None => default_step_radius(ps, mean_spacing),
    };
    let geometry = Arc::new(ProductGeometry::new(ps.sigma().clone(), events.clone()));
    let g = geometry.as_ref();
    let steps = par::map_range(n, |i| {
        let mut row = Vec::new();
        for j in i + 1..n {
            if events[j].t - events[i].t > radius {
                break;
            }
            if g.relate(i, j).causal && g.spacetime_distance(i, j) <= radius {
                row.push(j as u32);
            }
        }
        row
    });
    let meta = events
        .iter()
        .map(|e| EventMeta { base: Some(ps.label(e)), t: Some(e.t) })
        .collect();
    let cs = CausalStructure::from_geometry(meta, geometry, steps, StorageHint::Auto)?;
    let index = events.iter().enumerate().map(|(i, e)| (e.key(), EventId::new(i))).collect();
    Ok(ProductStructure { space: ps.clone(), samples, cs, step_radius: radius, mean_spacing, index })
}

/// Mean spacetime distance to the nearest other event; 0 for fewer than two events.
fn mean_nn_distance(ps: &ProductSpace, events: &[ProductEvent]) -> f64 {
    let n = events.len();
    if n < 2 {
        return 0.0;
    }
    let d = |i: usize, j: usize| ps.relations(&events[i], &events[j]).d_spacetime;
    let nn = par::map_range(n, |i| {
        let mut best = f64::INFINITY;
        // Events are time-sorted, so scan outward until |Δt| alone exceeds the best.
        for j in (0..i).rev() {
            if events[i].t - events[j].t >= best {
                break;
            }
            best = best.min(d(j, i));
        }
        for j in i + 1..n {
            if events[j].t - events[i].t >= best {
                break;
            }
            best = best.min(d(i, j));
        }
        best
    });
    nn.iter().sum::<f64>() / n as f64
}
