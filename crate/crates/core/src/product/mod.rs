//! The Lorentzian metric product Σ×ℝ.
//!
//! `(x,s) ≪ (y,t)` iff `t − s > d(x,y)`, `(x,s) ≤ (y,t)` iff `t − s ≥ d(x,y)`,
//! and `τ = √((t−s)² − d²)` on causal pairs. τ is evaluated in the factored
//! form `√((Δt − d)(Δt + d))`, so `τ > 0` holds exactly on chronological pairs
//! even in floating point.

mod build;
mod closedness;
mod sprinkle;

use serde::{Deserialize, Serialize};

use crate::metric::{MetricSpace, MetricSpec, Point};
use crate::{Error, Result};

pub use build::{build_causal_structure, default_step_radius, ProductGeometry, ProductStructure};
pub use closedness::{causal_closedness_probe, ClosednessReport, SequenceOutcome, SequenceVerdict};
pub use sprinkle::{sprinkle, Mode, SampleSet, SprinkleConfig};

/// An event `(x, t)` of Σ×ℝ.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ProductEvent {
    pub x: Point,
    pub t: f64,
}

impl ProductEvent {
    pub fn new(x: Point, t: f64) -> Self {
        ProductEvent { x, t }
    }

    pub fn key(&self) -> ((u8, u64, u64), u64) {
        (self.x.key(), self.t.to_bits())
    }
}

/// Closed-form relation data between two events.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub chron: bool,
    pub causal: bool,
    pub tau: f64,
    /// Spacetime distance `√(Δt² + d²)`.
    #[serde(rename = "D")]
    pub d_spacetime: f64,
}

/// Closed-form product relation for time difference `dt` and base distance `d`.
pub fn relate(dt: f64, d: f64) -> Relation {
    let causal = dt >= d;
    let chron = dt > d;
    let tau = if !causal {
        0.0
    } else if d == 0.0 {
        dt
    } else {
        let p = (dt - d) * (dt + d);
        // Split roots only when the product underflows; they cannot reach zero for dt > d.
        if p > 0.0 || !chron {
            p.sqrt()
        } else {
            (dt - d).sqrt() * (dt + d).sqrt()
        }
    };
    Relation { chron, causal, tau, d_spacetime: dt.hypot(d) }
}

/// Events are given by a base-point label and a time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub x: String,
    pub t: f64,
}

/// Region restriction in file form.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionSpec {
    #[default]
    Full,
    /// Closed causal diamond `J(lo, hi)`.
    Diamond { lo: EventSpec, hi: EventSpec },
    /// Tube `d(x, center) ≤ half_width`.
    Band { center: String, half_width: f64 },
}

/// Region restriction resolved against a base space.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Region {
    Full,
    Diamond { lo: ProductEvent, hi: ProductEvent },
    Band { center: Point, half_width: f64 },
}

/// Σ×[t_min, t_max] with an optional region restriction.
#[derive(Clone, Debug)]
pub struct ProductSpace {
    sigma: MetricSpace,
    window: (f64, f64),
    region: Region,
}

impl ProductSpace {
    pub fn new(sigma: MetricSpace, window: (f64, f64)) -> Result<Self> {
        let (lo, hi) = window;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::input(format!("window [{lo}, {hi}] must satisfy t_min < t_max")));
        }
        Ok(ProductSpace { sigma, window, region: Region::Full })
    }

    pub fn with_region(mut self, region: Region) -> Result<Self> {
        if let Region::Diamond { lo, hi } = region {
            for e in [lo, hi] {
                if !self.sigma.contains(&e.x) {
                    return Err(Error::input("diamond apex lies outside the base space"));
                }
            }
            if !self.relations(&lo, &hi).causal {
                return Err(Error::input("diamond apexes are not causally related"));
            }
        }
        if let Region::Band { half_width, .. } = region {
            if !(half_width >= 0.0) {
                return Err(Error::input("band half width must be non-negative"));
            }
        }
        self.region = region;
        Ok(self)
    }

    pub fn from_specs(sigma: MetricSpec, window: [f64; 2], region: &RegionSpec) -> Result<Self> {
        let ps = ProductSpace::new(MetricSpace::from_spec(sigma)?, (window[0], window[1]))?;
        let region = ps.resolve_region(region)?;
        ps.with_region(region)
    }

    pub fn resolve_region(&self, spec: &RegionSpec) -> Result<Region> {
        Ok(match spec {
            RegionSpec::Full => Region::Full,
            RegionSpec::Diamond { lo, hi } => Region::Diamond { lo: self.parse_event(lo)?, hi: self.parse_event(hi)? },
            RegionSpec::Band { center, half_width } => {
                Region::Band { center: self.sigma.parse_point(center)?, half_width: *half_width }
            }
        })
    }

    pub fn parse_event(&self, e: &EventSpec) -> Result<ProductEvent> {
        Ok(ProductEvent::new(self.sigma.parse_point(&e.x)?, e.t))
    }

    pub fn sigma(&self) -> &MetricSpace {
        &self.sigma
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn relations(&self, e1: &ProductEvent, e2: &ProductEvent) -> Relation {
        relate(e2.t - e1.t, self.sigma.dist(&e1.x, &e2.x))
    }

    pub fn tau(&self, e1: &ProductEvent, e2: &ProductEvent) -> f64 {
        self.relations(e1, e2).tau
    }

    pub fn in_window(&self, t: f64) -> bool {
        t >= self.window.0 && t <= self.window.1
    }

    /// Window and region membership.
    pub fn contains(&self, e: &ProductEvent) -> bool {
        self.in_window(e.t) && self.sigma.contains(&e.x) && self.in_region(e)
    }

    pub fn in_region(&self, e: &ProductEvent) -> bool {
        match &self.region {
            Region::Full => true,
            Region::Diamond { lo, hi } => self.relations(lo, e).causal && self.relations(e, hi).causal,
            Region::Band { center, half_width } => self.sigma.dist(center, &e.x) <= *half_width,
        }
    }

    /// Events on the fiber over `x` at the given strictly increasing times.
    pub fn vertical_chain(&self, x: Point, times: &[f64]) -> Result<Vec<ProductEvent>> {
        if !self.sigma.contains(&x) {
            return Err(Error::input("fiber base point lies outside the base space"));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::input(format!("fiber times must increase strictly, got {} then {}", w[0], w[1])));
        }
        times
            .iter()
            .map(|&t| {
                let e = ProductEvent::new(x, t);
                if self.in_window(t) {
                    Ok(e)
                } else {
                    Err(Error::input(format!("time {t} lies outside the window")))
                }
            })
            .collect()
    }

    pub fn label(&self, e: &ProductEvent) -> String {
        self.sigma.label(&e.x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyl() -> ProductSpace {
        ProductSpace::new(MetricSpace::circle(1.0).unwrap(), (0.0, 10.0)).unwrap()
    }

    #[test]
    fn relation_examples() {
        let r = relate(3.0, 0.0);
        assert!(r.chron && r.tau == 3.0);
        assert_eq!(relate(5.0, 3.0).tau, 4.0);
        let null = relate(2.0, 2.0);
        assert!(null.causal && !null.chron && null.tau == 0.0);
        let space = relate(1.0, 2.0);
        assert!(!space.causal && space.tau == 0.0);
        assert_eq!(relate(3.0, 4.0).d_spacetime, 5.0);
    }

    #[test]
    fn tau_positive_iff_chron_near_the_cone() {
        for k in 0..2000 {
            let d = 0.001 * k as f64;
            for dt in [d, f64::from_bits(d.to_bits() + 1), d * (1.0 + 1e-15)] {
                let r = relate(dt, d);
                assert_eq!(r.tau > 0.0, r.chron, "dt={dt} d={d}");
            }
        }
    }

    #[test]
    fn vertical_chain_checks() {
        let ps = cyl();
        let c = ps.vertical_chain(Point::Line(0.5), &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(ps.tau(&c[0], &c[4]), 4.0);
        for i in 0..5 {
            for j in i + 1..5 {
                assert_eq!(ps.tau(&c[i], &c[j]), c[j].t - c[i].t);
            }
        }
        assert!(ps.vertical_chain(Point::Line(0.5), &[0.0, 1.0, 1.0]).is_err());
        assert!(ps.vertical_chain(Point::Line(0.5), &[0.0, 11.0]).is_err());
    }

    #[test]
    fn diamond_region_drops_corners() {
        let strip = ProductSpace::new(MetricSpace::interval(2.0).unwrap(), (0.0, 2.0)).unwrap();
        let lo = ProductEvent::new(Point::Line(1.0), 0.0);
        let hi = ProductEvent::new(Point::Line(1.0), 2.0);
        let ps = strip.with_region(Region::Diamond { lo, hi }).unwrap();
        assert!(!ps.contains(&ProductEvent::new(Point::Line(0.0), 0.0)));
        assert!(!ps.contains(&ProductEvent::new(Point::Line(2.0), 2.0)));
        assert!(ps.contains(&ProductEvent::new(Point::Line(0.0), 1.0)));
        assert!(ps.contains(&lo));
    }

    #[test]
    fn region_spec_forms() {
        let full: RegionSpec = serde_json::from_str(r#""full""#).unwrap();
        assert_eq!(full, RegionSpec::Full);
        let d: RegionSpec =
            serde_json::from_str(r#"{"diamond":{"lo":{"x":"1","t":0},"hi":{"x":"1","t":2}}}"#).unwrap();
        let ps = ProductSpace::from_specs(MetricSpec::Interval { l: 2.0 }, [0.0, 2.0], &d).unwrap();
        assert!(matches!(ps.region(), Region::Diamond { .. }));
        let b: RegionSpec = serde_json::from_str(r#"{"band":{"center":"0.5","half_width":0.1}}"#).unwrap();
        let ps = ProductSpace::from_specs(MetricSpec::Circle { l: 1.0 }, [0.0, 1.0], &b).unwrap();
        assert!(!ps.contains(&ProductEvent::new(Point::Line(0.0), 0.5)));
    }
}
