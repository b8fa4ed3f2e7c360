//! Base metric spaces Σ.
//!
//! The continuous built-ins (circle, flat torus, interval, tripod) have exact
//! closed-form distances and geodesics. Finite spaces come from a distance
//! matrix or a weighted graph and carry a distance table.

mod curvature;
mod finite;

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use curvature::{euclid_comparison_angle, quadruple_angles, quadruple_curvature_test, QuadReport, QuadSource, QuadViolation, Quadruple};
pub use finite::FiniteMetric;

/// A point of a base space.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Point {
    /// Coordinate on a circle `[0, L)` or an interval `[0, L]`.
    Line(f64),
    /// Coordinates on a flat torus `[0, L1) × [0, L2)`.
    Plane(f64, f64),
    /// Distance `r` from the tripod center along leg `leg` (0, 1 or 2).
    /// The center is `r = 0` on leg 0.
    Tripod { leg: u8, r: f64 },
    /// Node of a finite space.
    Node(usize),
}

impl Point {
    pub const CENTER: Point = Point::Tripod { leg: 0, r: 0.0 };

    /// Bit-exact identity key, used for de-duplication.
    pub fn key(&self) -> (u8, u64, u64) {
        match *self {
            Point::Line(x) => (0, x.to_bits(), 0),
            Point::Plane(x, y) => (1, x.to_bits(), y.to_bits()),
            Point::Tripod { r, .. } if r == 0.0 => (2, 0, 0),
            Point::Tripod { leg, r } => (2, leg as u64 + 1, r.to_bits()),
            Point::Node(i) => (3, i as u64, 0),
        }
    }
}

/// Serializable description of a base space; this is the metric file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MetricSpec {
    Circle {
        #[serde(rename = "L")]
        l: f64,
    },
    Torus {
        #[serde(rename = "L1")]
        l1: f64,
        #[serde(rename = "L2")]
        l2: f64,
    },
    Interval {
        #[serde(rename = "L")]
        l: f64,
    },
    Tripod {
        legs: [f64; 3],
    },
    Matrix {
        points: Vec<String>,
        d: Vec<Vec<f64>>,
    },
    Graph {
        edges: Vec<(String, String, f64)>,
    },
}

/// A metric space with distance oracle and, for the continuous built-ins,
/// a geodesic sampler.
#[derive(Clone)]
pub struct MetricSpace {
    spec: MetricSpec,
    finite: Option<FiniteMetric>,
    diameter: f64,
}

impl fmt::Debug for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.finite {
            None => write!(f, "MetricSpace({:?})", self.spec),
            Some(t) => write!(f, "MetricSpace(finite, {} points)", t.len()),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be positive and finite, got {v}")))
    }
}

impl MetricSpace {
    pub fn circle(l: f64) -> Result<Self> {
        Self::from_spec(MetricSpec::Circle { l })
    }

    pub fn torus(l1: f64, l2: f64) -> Result<Self> {
        Self::from_spec(MetricSpec::Torus { l1, l2 })
    }

    pub fn interval(l: f64) -> Result<Self> {
        Self::from_spec(MetricSpec::Interval { l })
    }

    pub fn tripod(l1: f64, l2: f64, l3: f64) -> Result<Self> {
        Self::from_spec(MetricSpec::Tripod { legs: [l1, l2, l3] })
    }

    /// Verbatim distance table; rejected with a witness triple if it is not a metric.
    pub fn matrix(points: Vec<String>, d: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_spec(MetricSpec::Matrix { points, d })
    }

    /// Shortest-path metric of a connected weighted graph.
    pub fn graph(edges: Vec<(String, String, f64)>) -> Result<Self> {
        Self::from_spec(MetricSpec::Graph { edges })
    }

    pub fn from_spec(spec: MetricSpec) -> Result<Self> {
        let (finite, diameter) = match &spec {
            MetricSpec::Circle { l } => {
                positive("L", *l)?;
                (None, l / 2.0)
            }
            MetricSpec::Torus { l1, l2 } => {
                positive("L1", *l1)?;
                positive("L2", *l2)?;
                (None, (l1 / 2.0).hypot(l2 / 2.0))
            }
            MetricSpec::Interval { l } => {
                positive("L", *l)?;
                (None, *l)
            }
            MetricSpec::Tripod { legs } => {
                for (i, &l) in legs.iter().enumerate() {
                    positive(&format!("leg {}", i + 1), l)?;
                }
                let mut s = *legs;
                s.sort_by(f64::total_cmp);
                (None, s[1] + s[2])
            }
            MetricSpec::Matrix { points, d } => {
                let t = FiniteMetric::from_matrix(points.clone(), d.clone())?;
                let diam = t.diameter();
                (Some(t), diam)
            }
            MetricSpec::Graph { edges } => {
                let t = FiniteMetric::from_graph(edges)?;
                let diam = t.diameter();
                (Some(t), diam)
            }
        };
        Ok(MetricSpace { spec, finite, diameter })
    }

    /// Built-in by name, e.g. `("circle", &[1.0])` or `("tripod", &[1.0, 1.0, 1.0])`.
    pub fn builtin(name: &str, params: &[f64]) -> Result<Self> {
        let want = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::input(format!("{name} takes {k} parameters, got {}", params.len())))
            }
        };
        match name {
            "circle" => want(1).and_then(|_| Self::circle(params[0])),
            "torus" => want(2).and_then(|_| Self::torus(params[0], params[1])),
            "interval" => want(1).and_then(|_| Self::interval(params[0])),
            "tripod" => want(3).and_then(|_| Self::tripod(params[0], params[1], params[2])),
            _ => Err(Error::input(format!("unknown built-in metric space {name:?}"))),
        }
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn finite(&self) -> Option<&FiniteMetric> {
        self.finite.as_ref()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn is_finite(&self) -> bool {
        self.finite.is_some()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let spec: MetricSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_spec(spec)
    }

    pub fn dist(&self, p: &Point, q: &Point) -> f64 {
        match (&self.spec, *p, *q) {
            (MetricSpec::Circle { l }, Point::Line(x), Point::Line(y)) => circle_dist(*l, x, y),
            (MetricSpec::Interval { .. }, Point::Line(x), Point::Line(y)) => (x - y).abs(),
            (MetricSpec::Torus { l1, l2 }, Point::Plane(x1, y1), Point::Plane(x2, y2)) => {
                circle_dist(*l1, x1, x2).hypot(circle_dist(*l2, y1, y2))
            }
            (MetricSpec::Tripod { .. }, Point::Tripod { leg: a, r: ra }, Point::Tripod { leg: b, r: rb }) => {
                if a == b {
                    (ra - rb).abs()
                } else {
                    ra + rb
                }
            }
            (_, Point::Node(i), Point::Node(j)) if self.finite.is_some() => self.finite.as_ref().unwrap().dist(i, j),
            _ => panic!("point kind does not match space: {p:?}, {q:?} in {:?}", self.spec),
        }
    }

    /// Whether a point is a valid member of this space.
    pub fn contains(&self, p: &Point) -> bool {
        let within = |x: f64, hi: f64, closed: bool| x.is_finite() && x >= 0.0 && (x < hi || (closed && x == hi));
        match (&self.spec, *p) {
            (MetricSpec::Circle { l }, Point::Line(x)) => within(x, *l, false),
            (MetricSpec::Interval { l }, Point::Line(x)) => within(x, *l, true),
            (MetricSpec::Torus { l1, l2 }, Point::Plane(x, y)) => within(x, *l1, false) && within(y, *l2, false),
            (MetricSpec::Tripod { legs }, Point::Tripod { leg, r }) => (leg as usize) < 3 && within(r, legs[leg as usize], true),
            (_, Point::Node(i)) => self.finite.as_ref().is_some_and(|t| i < t.len()),
            _ => false,
        }
    }

    /// `n + 1` points `g(0) = p, …, g(n) = q` equally spaced along a shortest
    /// path. Finite spaces have no continuum geodesics and return `None`.
    pub fn geodesic(&self, p: &Point, q: &Point, n: usize) -> Option<Vec<Point>> {
        let n = n.max(1);
        (0..=n).map(|i| self.point_along(p, q, i as f64 / n as f64)).collect()
    }

    /// The point at fraction `f ∈ [0, 1]` of a shortest path from `p` to `q`.
    pub fn point_along(&self, p: &Point, q: &Point, f: f64) -> Option<Point> {
        match (&self.spec, *p, *q) {
            (MetricSpec::Circle { l }, Point::Line(x), Point::Line(y)) => {
                Some(Point::Line(wrap(*l, x + signed_delta(*l, x, y) * f)))
            }
            (MetricSpec::Interval { .. }, Point::Line(x), Point::Line(y)) => Some(Point::Line(x + (y - x) * f)),
            (MetricSpec::Torus { l1, l2 }, Point::Plane(x1, y1), Point::Plane(x2, y2)) => Some(Point::Plane(
                wrap(*l1, x1 + signed_delta(*l1, x1, x2) * f),
                wrap(*l2, y1 + signed_delta(*l2, y1, y2) * f),
            )),
            (MetricSpec::Tripod { .. }, Point::Tripod { leg: a, r: ra }, Point::Tripod { leg: b, r: rb }) => {
                let on = |leg: u8, r: f64| if r == 0.0 { Point::CENTER } else { Point::Tripod { leg, r } };
                if a == b || ra == 0.0 || rb == 0.0 {
                    let leg = if ra == 0.0 { b } else { a };
                    Some(on(leg, ra + (rb - ra) * f))
                } else {
                    let s = (ra + rb) * f;
                    Some(if s <= ra { on(a, ra - s) } else { on(b, s - ra) })
                }
            }
            _ => None,
        }
    }

    /// Total length or area, the Poisson measure of the base.
    pub fn measure(&self) -> Option<f64> {
        match &self.spec {
            MetricSpec::Circle { l } | MetricSpec::Interval { l } => Some(*l),
            MetricSpec::Torus { l1, l2 } => Some(l1 * l2),
            MetricSpec::Tripod { legs } => Some(legs.iter().sum()),
            _ => None,
        }
    }

    /// A point drawn from the normalized measure; finite spaces draw nodes uniformly.
    pub fn sample_point(&self, rng: &mut impl Rng) -> Point {
        match &self.spec {
            MetricSpec::Circle { l } => Point::Line(wrap(*l, rng.random::<f64>() * l)),
            MetricSpec::Interval { l } => Point::Line(rng.random::<f64>() * l),
            MetricSpec::Torus { l1, l2 } => {
                Point::Plane(wrap(*l1, rng.random::<f64>() * l1), wrap(*l2, rng.random::<f64>() * l2))
            }
            MetricSpec::Tripod { legs } => {
                let total: f64 = legs.iter().sum();
                let mut u = rng.random::<f64>() * total;
                for (leg, &len) in legs.iter().enumerate() {
                    if u < len || leg == 2 {
                        let r = u.min(len);
                        return if r == 0.0 { Point::CENTER } else { Point::Tripod { leg: leg as u8, r } };
                    }
                    u -= len;
                }
                unreachable!()
            }
            MetricSpec::Matrix { .. } | MetricSpec::Graph { .. } => {
                Point::Node(rng.random_range(0..self.finite.as_ref().unwrap().len()))
            }
        }
    }

    /// Regular lattice with resolution `nx`; see the crate README for layouts.
    pub fn grid(&self, nx: usize) -> Result<Vec<Point>> {
        if nx < 2 && self.finite.is_none() {
            return Err(Error::input("grid resolution must be at least 2"));
        }
        let step = |l: f64, i: usize, k: usize| l * i as f64 / k as f64;
        Ok(match &self.spec {
            MetricSpec::Circle { l } => (0..nx).map(|i| Point::Line(step(*l, i, nx))).collect(),
            MetricSpec::Interval { l } => (0..nx).map(|i| Point::Line(step(*l, i, nx - 1))).collect(),
            MetricSpec::Torus { l1, l2 } => (0..nx)
                .flat_map(|i| (0..nx).map(move |j| Point::Plane(step(*l1, i, nx), step(*l2, j, nx))))
                .collect(),
            MetricSpec::Tripod { legs } => std::iter::once(Point::CENTER)
                .chain((0..3u8).flat_map(|leg| {
                    (1..nx).map(move |k| Point::Tripod { leg, r: step(legs[leg as usize], k, nx - 1) })
                }))
                .collect(),
            _ => (0..self.finite.as_ref().unwrap().len()).map(Point::Node).collect(),
        })
    }

    /// Self-describing label: `"0.25"`, `"0.25,0.5"`, `"leg1:0.3"`, `"center"` or a node name.
    pub fn label(&self, p: &Point) -> String {
        match *p {
            Point::Line(x) => format!("{x}"),
            Point::Plane(x, y) => format!("{x},{y}"),
            Point::Tripod { r, .. } if r == 0.0 => "center".to_string(),
            Point::Tripod { leg, r } => format!("leg{}:{r}", leg + 1),
            Point::Node(i) => self.finite.as_ref().map_or_else(|| format!("n{i}"), |t| t.label(i).to_string()),
        }
    }

    /// Inverse of [`MetricSpace::label`]; circle coordinates are reduced mod L.
    pub fn parse_point(&self, s: &str) -> Result<Point> {
        let s = s.trim();
        let num = |t: &str| -> Result<f64> {
            t.trim().parse::<f64>().map_err(|_| Error::input(format!("bad coordinate {t:?}")))
        };
        let p = match &self.spec {
            MetricSpec::Circle { l } => Point::Line(wrap(*l, num(s)?)),
            MetricSpec::Interval { .. } => Point::Line(num(s)?),
            MetricSpec::Torus { l1, l2 } => {
                let (x, y) = s.split_once(',').ok_or_else(|| Error::input(format!("torus point needs x,y: {s:?}")))?;
                Point::Plane(wrap(*l1, num(x)?), wrap(*l2, num(y)?))
            }
            MetricSpec::Tripod { .. } => {
                if s == "center" {
                    Point::CENTER
                } else {
                    let (leg, r) = s
                        .strip_prefix("leg")
                        .and_then(|t| t.split_once(':'))
                        .ok_or_else(|| Error::input(format!("tripod point must be legK:r or center: {s:?}")))?;
                    let leg: u8 = leg.parse().map_err(|_| Error::input(format!("bad leg in {s:?}")))?;
                    if !(1..=3).contains(&leg) {
                        return Err(Error::input(format!("leg must be 1, 2 or 3: {s:?}")));
                    }
                    let r = num(r)?;
                    if r == 0.0 {
                        Point::CENTER
                    } else {
                        Point::Tripod { leg: leg - 1, r }
                    }
                }
            }
            _ => {
                let t = self.finite.as_ref().unwrap();
                match t.index_of(s) {
                    Some(i) => Point::Node(i),
                    None => match s.strip_prefix('n').and_then(|k| k.parse::<usize>().ok()) {
                        Some(i) if i < t.len() => Point::Node(i),
                        _ => return Err(Error::input(format!("unknown point {s:?}"))),
                    },
                }
            }
        };
        if self.contains(&p) {
            Ok(p)
        } else {
            Err(Error::input(format!("point {s:?} lies outside the space")))
        }
    }
}

fn wrap(l: f64, x: f64) -> f64 {
    let r = x.rem_euclid(l);
    // rem_euclid can round up to exactly l.
    if r >= l {
        0.0
    } else {
        r
    }
}

fn circle_dist(l: f64, x: f64, y: f64) -> f64 {
    let a = (x - y).rem_euclid(l);
    a.min(l - a)
}

/// Signed displacement from `x` to `y` along the shorter arc, in `(-L/2, L/2]`.
fn signed_delta(l: f64, x: f64, y: f64) -> f64 {
    let a = (y - x).rem_euclid(l);
    if a > l / 2.0 {
        a - l
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::task_rng;

    fn builtins() -> Vec<MetricSpace> {
        vec![
            MetricSpace::circle(1.0).unwrap(),
            MetricSpace::torus(1.0, 2.0).unwrap(),
            MetricSpace::interval(3.0).unwrap(),
            MetricSpace::tripod(1.0, 0.5, 2.0).unwrap(),
        ]
    }

    #[test]
    fn circle_wraps() {
        let c = MetricSpace::circle(1.0).unwrap();
        assert_eq!(c.dist(&Point::Line(0.0), &Point::Line(0.75)), 0.25);
        assert_eq!(c.diameter(), 0.5);
    }

    #[test]
    fn tripod_tips_meet_at_center() {
        let t = MetricSpace::tripod(1.0, 1.0, 1.0).unwrap();
        let a = Point::Tripod { leg: 0, r: 1.0 };
        let b = Point::Tripod { leg: 1, r: 1.0 };
        assert_eq!(t.dist(&a, &b), 2.0);
        assert_eq!(t.dist(&a, &Point::CENTER), 1.0);
        assert_eq!(t.diameter(), 2.0);
    }

    #[test]
    fn torus_diameter_is_half_diagonal() {
        let t = MetricSpace::torus(1.0, 1.0).unwrap();
        let d = t.dist(&Point::Plane(0.0, 0.0), &Point::Plane(0.5, 0.5));
        assert!((d - t.diameter()).abs() < 1e-15);
    }

    #[test]
    fn triangle_inequality_fuzz() {
        for (k, ms) in builtins().iter().enumerate() {
            let mut rng = task_rng(11, k as u64);
            for _ in 0..10_000 {
                let [a, b, c] = [0; 3].map(|_| ms.sample_point(&mut rng));
                let ab = ms.dist(&a, &b);
                assert_eq!(ab, ms.dist(&b, &a));
                assert_eq!(ms.dist(&a, &a), 0.0);
                assert!(ms.dist(&a, &c) <= ab + ms.dist(&b, &c) + 1e-9);
            }
        }
    }

    #[test]
    fn geodesics_are_evenly_spaced() {
        for (k, ms) in builtins().iter().enumerate() {
            let mut rng = task_rng(12, k as u64);
            for _ in 0..200 {
                let p = ms.sample_point(&mut rng);
                let q = ms.sample_point(&mut rng);
                let n = 7;
                let g = ms.geodesic(&p, &q, n).unwrap();
                let d = ms.dist(&p, &q);
                assert!(ms.dist(&g[0], &p) < 1e-12);
                assert!(ms.dist(&g[n], &q) < 1e-12);
                for i in 0..=n {
                    for j in i..=n {
                        let want = (j - i) as f64 * d / n as f64;
                        assert!((ms.dist(&g[i], &g[j]) - want).abs() < 1e-9, "{ms:?} {p:?} {q:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn labels_round_trip() {
        for (k, ms) in builtins().iter().enumerate() {
            let mut rng = task_rng(13, k as u64);
            for _ in 0..100 {
                let p = ms.sample_point(&mut rng);
                assert_eq!(ms.parse_point(&ms.label(&p)).unwrap(), p);
            }
        }
        let t = MetricSpace::tripod(1.0, 1.0, 1.0).unwrap();
        assert_eq!(t.parse_point("leg2:0.5").unwrap(), Point::Tripod { leg: 1, r: 0.5 });
        assert!(t.parse_point("leg4:0.5").is_err());
        assert!(t.parse_point("leg1:1.5").is_err());
    }

    #[test]
    fn grids_have_expected_sizes() {
        assert_eq!(MetricSpace::circle(1.0).unwrap().grid(4).unwrap().len(), 4);
        assert_eq!(MetricSpace::torus(1.0, 1.0).unwrap().grid(4).unwrap().len(), 16);
        let iv = MetricSpace::interval(2.0).unwrap().grid(5).unwrap();
        assert_eq!(iv.first(), Some(&Point::Line(0.0)));
        assert_eq!(iv.last(), Some(&Point::Line(2.0)));
        assert_eq!(MetricSpace::tripod(1.0, 1.0, 1.0).unwrap().grid(3).unwrap().len(), 7);
    }

    #[test]
    fn metric_file_format() {
        let s: MetricSpec = serde_json::from_str(r#"{"type":"circle","L":1.0}"#).unwrap();
        assert_eq!(s, MetricSpec::Circle { l: 1.0 });
        let g: MetricSpec = serde_json::from_str(r#"{"type":"graph","edges":[["a","b",0.5],["b","c",1.0]]}"#).unwrap();
        let ms = MetricSpace::from_spec(g).unwrap();
        let a = ms.parse_point("a").unwrap();
        let c = ms.parse_point("c").unwrap();
        assert_eq!(ms.dist(&a, &c), 1.5);
        assert!(ms.geodesic(&a, &c, 3).is_none());
    }

    #[test]
    fn builtin_by_name() {
        assert!(MetricSpace::builtin("circle", &[1.0]).is_ok());
        assert!(MetricSpace::builtin("circle", &[]).is_err());
        assert!(MetricSpace::builtin("sphere", &[1.0]).is_err());
        assert!(MetricSpace::circle(-1.0).is_err());
    }
}
