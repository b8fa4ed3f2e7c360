use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{MetricSpace, Point};
use crate::{par, Error, Result, Status};

/// Angle at vertex A of a Euclidean triangle with sides `|AB|`, `|AC|`, `|BC|`.
///
/// Uses Kahan's needle-safe formula, so near-degenerate triangles keep full
/// relative accuracy. Side sums are allowed a relative slack of 1e-12.
pub fn euclid_comparison_angle(s_ab: f64, s_ac: f64, s_bc: f64) -> Result<f64> {
    if !(s_ab > 0.0 && s_ac > 0.0 && s_bc >= 0.0) || !(s_ab + s_ac + s_bc).is_finite() {
        return Err(Error::TriangleInequality { ab: s_ab, ac: s_ac, bc: s_bc });
    }
    let (a, b) = if s_ab >= s_ac { (s_ab, s_ac) } else { (s_ac, s_ab) };
    let c = s_bc;
    let scale = a + b + c;
    if c > a + b + 1e-12 * scale || c < a - b - 1e-12 * scale {
        return Err(Error::TriangleInequality { ab: s_ab, ac: s_ac, bc: s_bc });
    }
    let c = c.clamp(a - b, a + b);
    let mu = if b >= c { c - (a - b) } else { b - (a - c) };
    let num = ((a - b) + c) * mu;
    let den = (a + (b + c)) * ((a - c) + b);
    if den <= 0.0 {
        return Ok(PI);
    }
    Ok(2.0 * (num / den).max(0.0).sqrt().atan())
}

/// Center `p` and three outer points.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Quadruple {
    pub p: Point,
    pub a: Point,
    pub b: Point,
    pub c: Point,
}

pub enum QuadSource {
    List(Vec<Quadruple>),
    Random { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadViolation {
    pub index: usize,
    pub points: [String; 4],
    pub angles: [f64; 3],
    pub sum: f64,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadReport {
    pub status: Status,
    pub checked: usize,
    pub skipped: usize,
    pub tol: f64,
    pub max_sum: Option<f64>,
    pub violations: Vec<QuadViolation>,
}

impl QuadReport {
    pub fn passed(&self) -> bool {
        self.status.is_pass()
    }
}

/// The three comparison angles at `p`, or `None` for a degenerate quadruple.
pub fn quadruple_angles(ms: &MetricSpace, q: &Quadruple) -> Option<[f64; 3]> {
    let pts = [q.p, q.a, q.b, q.c];
    for i in 0..4 {
        for j in i + 1..4 {
            if ms.dist(&pts[i], &pts[j]) <= 0.0 {
                return None;
            }
        }
    }
    let angle = |x: &Point, y: &Point| euclid_comparison_angle(ms.dist(&q.p, x), ms.dist(&q.p, y), ms.dist(x, y)).ok();
    Some([angle(&q.a, &q.b)?, angle(&q.b, &q.c)?, angle(&q.a, &q.c)?])
}

/// Alexandrov curvature ≥ 0 test: for every quadruple `(p; a, b, c)` the three
/// comparison angles at `p` must sum to at most `2π + tol`.
///
/// Degenerate quadruples (coincident points) are skipped and counted.
pub fn quadruple_curvature_test(ms: &MetricSpace, source: QuadSource, tol: f64) -> QuadReport {
    const CHUNK: usize = 1024;
    let quads: Vec<Quadruple> = match source {
        QuadSource::List(v) => v,
        QuadSource::Random { count, seed } => par::map_range(count.div_ceil(CHUNK), |c| {
            let mut rng = par::task_rng(seed, c as u64);
            (0..CHUNK.min(count - c * CHUNK))
                .map(|_| {
                    let [p, a, b, c] = [0; 4].map(|_| ms.sample_point(&mut rng));
                    Quadruple { p, a, b, c }
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect(),
    };
    let results = par::map_slice(&quads, |q| quadruple_angles(ms, q));
    let mut checked = 0;
    let mut skipped = 0;
    let mut max_sum: Option<f64> = None;
    let mut violations = Vec::new();
    for (index, (q, r)) in quads.iter().zip(results).enumerate() {
        let Some(angles) = r else {
            skipped += 1;
            continue;
        };
        checked += 1;
        let sum = angles.iter().sum::<f64>();
        max_sum = Some(max_sum.map_or(sum, |m| m.max(sum)));
        if sum > 2.0 * PI + tol {
            violations.push(QuadViolation {
                index,
                points: [q.p, q.a, q.b, q.c].map(|x| ms.label(&x)),
                angles,
                sum,
                excess: sum - 2.0 * PI,
            });
        }
    }
    QuadReport {
        status: Status::from_pass(violations.is_empty()),
        checked,
        skipped,
        tol,
        max_sum,
        violations,
    }
}
