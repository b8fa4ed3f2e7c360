use serde::{Deserialize, Serialize};

use super::{vertex_angles, SideLengths};
use crate::metric::Point;
use crate::product::{ProductEvent, ProductSpace};
use crate::{Error, Result, Status};

/// Ratios `t/s` tried at every stage.
const RATIOS: [f64; 5] = [1.0, 0.75, 0.5, 0.25, 0.125];

/// A timelike product geodesic from a vertex: after time `s` the base point
/// has moved `speed·s` along a shortest path towards `toward`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Ray {
    pub toward: Point,
    pub speed: f64,
}

impl Ray {
    pub fn vertical(at: Point) -> Self {
        Ray { toward: at, speed: 0.0 }
    }

    pub fn at(&self, ps: &ProductSpace, vertex: &ProductEvent, s: f64) -> ProductEvent {
        let d = ps.sigma().dist(&vertex.x, &self.toward);
        let x = if d == 0.0 || self.speed == 0.0 {
            vertex.x
        } else {
            ps.sigma().point_along(&vertex.x, &self.toward, (self.speed * s / d).min(1.0)).unwrap_or(vertex.x)
        };
        ProductEvent::new(x, vertex.t + s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperAngleStage {
    pub k: usize,
    pub s: f64,
    /// Parameter of β attaining the stage value.
    pub t: Option<f64>,
    /// Largest comparison angle over the stage's pairs in A₀.
    pub angle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperAngleReport {
    pub stages: Vec<UpperAngleStage>,
    /// Supremum over the second half of the stages that have values.
    pub estimate: f64,
}

/// Estimates the upper angle between α and β at `vertex`.
///
/// Stage `k` uses `s = s0·2^{-k}` and `t = r·s` for a few ratios `r`, keeping
/// the pairs with `β(t) ≪ α(s)`. The comparison angle is the one at the vertex
/// of the triangle `(vertex, β(t), α(s))`.
pub fn upper_angle(ps: &ProductSpace, vertex: &ProductEvent, alpha: &Ray, beta: &Ray, s0: f64, stages: usize) -> Result<UpperAngleReport> {
    if !(s0 > 0.0) || stages == 0 {
        return Err(Error::input("upper angle needs s0 > 0 and at least one stage"));
    }
    let mut out = Vec::with_capacity(stages);
    for k in 0..stages {
        let s = s0 * 0.5f64.powi(k as i32);
        let a = alpha.at(ps, vertex, s);
        let mut best: Option<(f64, f64)> = None;
        for r in RATIOS {
            let t = r * s;
            let b = beta.at(ps, vertex, t);
            let (r12, r23, r13) = (ps.relations(vertex, &b), ps.relations(&b, &a), ps.relations(vertex, &a));
            if !(r12.chron && r23.chron && r13.chron) {
                continue;
            }
            let Ok(angles) = SideLengths::new(r12.tau, r23.tau, r13.tau).and_then(vertex_angles) else { continue };
            if best.is_none_or(|(v, _)| angles.theta1 > v) {
                best = Some((angles.theta1, t));
            }
        }
        out.push(UpperAngleStage { k, s, t: best.map(|b| b.1), angle: best.map(|b| b.0) });
    }
    let values: Vec<f64> = out.iter().filter_map(|st| st.angle).collect();
    if values.is_empty() {
        return Err(Error::NoRelatedPairs);
    }
    let estimate = values[values.len() / 2..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(UpperAngleReport { stages: out, estimate })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleCheckReport {
    pub upper: UpperAngleReport,
    /// Largest `angle − estimate` over the stages.
    pub worst_excess: f64,
    pub tol: f64,
    pub status: Status,
}

/// Checks that no stage's comparison angle exceeds the upper-angle estimate.
pub fn angle_comparison_check(
    ps: &ProductSpace,
    vertex: &ProductEvent,
    alpha: &Ray,
    beta: &Ray,
    s0: f64,
    stages: usize,
    tol: f64,
) -> Result<AngleCheckReport> {
    let upper = upper_angle(ps, vertex, alpha, beta, s0, stages)?;
    let worst_excess = upper
        .stages
        .iter()
        .filter_map(|st| st.angle)
        .map(|a| a - upper.estimate)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(AngleCheckReport { status: Status::from_pass(worst_excess <= tol), worst_excess, tol, upper })
}
