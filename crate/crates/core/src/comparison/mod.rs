//! Comparison triangles in the Minkowski plane L² and the curvature tests built on them.
//!
//! Angles are unsigned rapidities. Which side of the law of cosines a vertex
//! sits on is carried separately by [`VertexRole`].

mod angle;
mod certify;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use angle::{angle_comparison_check, upper_angle, AngleCheckReport, Ray, UpperAngleReport, UpperAngleStage};
pub use certify::{certify_curvature_below, CertOptions, CertReport, CertViolation, SidePoint, TriangleSampler};

/// Relative slack under which `l13 < l12 + l23` is read as a degenerate triangle.
const DEGENERATE_REL: f64 = 1e-12;

/// Positive gaps below this multiple of `l13` are rounding noise of the sum
/// `l12 + l23` and read as zero.
const ROUNDING_REL: f64 = 4.0 * f64::EPSILON;

/// A point `(x, t)` of the Minkowski plane.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub t: f64,
}

impl PlanarPoint {
    pub const fn new(x: f64, t: f64) -> Self {
        PlanarPoint { x, t }
    }
}

/// Time separation of L².
pub fn minkowski_tau(p: PlanarPoint, q: PlanarPoint) -> f64 {
    let dt = q.t - p.t;
    let dx = (q.x - p.x).abs();
    if dt < dx {
        return 0.0;
    }
    ((dt - dx) * (dt + dx)).sqrt()
}

/// Side separations of a timelike triangle `p1 ≪ p2 ≪ p3`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideLengths {
    pub l12: f64,
    pub l23: f64,
    pub l13: f64,
}

impl SideLengths {
    pub fn new(l12: f64, l23: f64, l13: f64) -> Result<Self> {
        let s = SideLengths { l12, l23, l13 };
        s.gap()?;
        Ok(s)
    }

    /// `l13 − l12 − l23`, clamped to zero inside rounding slack.
    pub fn gap(&self) -> Result<f64> {
        let SideLengths { l12, l23, l13 } = *self;
        let bad = Error::Unrealizable { l12, l23, l13 };
        if !(l12 > 0.0 && l23 > 0.0 && l13.is_finite() && l12.is_finite() && l23.is_finite()) {
            return Err(bad);
        }
        let g = l13 - l12 - l23;
        if g.abs() <= ROUNDING_REL * l13 {
            Ok(0.0)
        } else if g > 0.0 {
            Ok(g)
        } else if -g <= DEGENERATE_REL * l13 {
            Ok(0.0)
        } else {
            Err(bad)
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.gap().is_ok_and(|g| g == 0.0)
    }
}

/// One of the three sides of a triangle.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "12")]
    S12,
    #[serde(rename = "23")]
    S23,
    #[serde(rename = "13")]
    S13,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::S12, Side::S23, Side::S13];

    /// Vertex indices `(i, j)` with `i < j`, counted from 0.
    pub fn ends(self) -> (usize, usize) {
        match self {
            Side::S12 => (0, 1),
            Side::S23 => (1, 2),
            Side::S13 => (0, 2),
        }
    }
}

/// Canonical placement `p̄1 = (0,0)`, `p̄3 = (0, l13)`, `p̄2.x ≥ 0`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTriangle {
    pub sides: SideLengths,
    pub vertices: [PlanarPoint; 3],
}

impl ComparisonTriangle {
    pub fn side_length(&self, side: Side) -> f64 {
        match side {
            Side::S12 => self.sides.l12,
            Side::S23 => self.sides.l23,
            Side::S13 => self.sides.l13,
        }
    }
}

/// Places the comparison triangle of `sides`.
pub fn realize(sides: SideLengths) -> Result<ComparisonTriangle> {
    let g = sides.gap()?;
    let SideLengths { l12, l23, l13 } = sides;
    let t = (l13 * l13 + l12 * l12 - l23 * l23) / (2.0 * l13);
    // (t − l12)(t + l12), with t − l12 = g(g + 2 l23)/(2 l13) free of cancellation.
    let x = (g * (g + 2.0 * l23) * (l13 + l12 - l23) * (l13 + l12 + l23)).sqrt() / (2.0 * l13);
    Ok(ComparisonTriangle {
        sides,
        vertices: [PlanarPoint::new(0.0, 0.0), PlanarPoint::new(x, t), PlanarPoint::new(0.0, l13)],
    })
}

/// The point at τ-distance `u` from the first vertex of `side`.
pub fn corresponding_point(tri: &ComparisonTriangle, side: Side, u: f64) -> Result<PlanarPoint> {
    let len = tri.side_length(side);
    if !(0.0..=len).contains(&u) {
        return Err(Error::input(format!("parameter {u} lies outside [0, {len}]")));
    }
    let (i, j) = side.ends();
    let (p, q) = (tri.vertices[i], tri.vertices[j]);
    let f = u / len;
    Ok(PlanarPoint::new(p.x + f * (q.x - p.x), p.t + f * (q.t - p.t)))
}

/// Position of a vertex along the time orientation of its triangle.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexRole {
    /// `p1`: both sides leave towards the future.
    Past,
    /// `p2`: one side to the past, one to the future.
    Middle,
    /// `p3`: both sides leave towards the past.
    Future,
}

impl VertexRole {
    /// Sign of the `cosh` term in the law of cosines at this vertex:
    /// `c² = a² + b² − 2·sign·a·b·cosh θ`.
    pub fn sign(self) -> f64 {
        match self {
            VertexRole::Middle => -1.0,
            _ => 1.0,
        }
    }
}

/// Comparison angles at the three vertices.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexAngles {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl VertexAngles {
    pub fn at(&self, role: VertexRole) -> f64 {
        match role {
            VertexRole::Past => self.theta1,
            VertexRole::Middle => self.theta2,
            VertexRole::Future => self.theta3,
        }
    }
}

/// `arccosh(1 + u)` without forming `1 + u`.
fn acosh1p(u: f64) -> f64 {
    (u + (u * (u + 2.0)).sqrt()).ln_1p()
}

/// Rapidities at each vertex.
///
/// Each `cosh θ − 1` is written through the gap `g = l13 − l12 − l23`, so
/// nearly degenerate triangles keep full relative precision.
pub fn vertex_angles(sides: SideLengths) -> Result<VertexAngles> {
    let g = sides.gap()?;
    let SideLengths { l12, l23, l13 } = sides;
    Ok(VertexAngles {
        theta1: acosh1p(g * (g + 2.0 * l23) / (2.0 * l12 * l13)),
        theta2: acosh1p(g * (g + 2.0 * (l12 + l23)) / (2.0 * l12 * l23)),
        theta3: acosh1p(g * (g + 2.0 * l12) / (2.0 * l13 * l23)),
    })
}

/// Residual of the law of cosines at one vertex, relative to `l13²`.
pub fn law_of_cosines_residual(sides: SideLengths, role: VertexRole) -> Result<f64> {
    let angles = vertex_angles(sides)?;
    let SideLengths { l12, l23, l13 } = sides;
    let (a, b, c) = match role {
        VertexRole::Past => (l12, l13, l23),
        VertexRole::Middle => (l12, l23, l13),
        VertexRole::Future => (l13, l23, l12),
    };
    let rhs = a * a + b * b - 2.0 * role.sign() * a * b * angles.at(role).cosh();
    Ok((c * c - rhs) / (l13 * l13))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sides(a: f64, b: f64, c: f64) -> SideLengths {
        SideLengths::new(a, b, c).unwrap()
    }

    #[test]
    fn minkowski_tau_examples() {
        let o = PlanarPoint::new(0.0, 0.0);
        assert_eq!(minkowski_tau(o, PlanarPoint::new(0.0, 3.0)), 3.0);
        assert_eq!(minkowski_tau(o, PlanarPoint::new(3.0, 5.0)), 4.0);
        assert_eq!(minkowski_tau(o, PlanarPoint::new(2.0, 1.0)), 0.0);
    }

    #[test]
    fn realize_examples() {
        let tri = realize(sides(1.0, 1.0, 3.0)).unwrap();
        let p2 = tri.vertices[1];
        assert!((p2.x - 1.25f64.sqrt()).abs() < 1e-15 && p2.t == 1.5);
        // Oracle: both hyperbolae through p2.
        assert!((p2.t * p2.t - p2.x * p2.x - 1.0).abs() < 1e-12);
        assert!(((3.0 - p2.t).powi(2) - p2.x * p2.x - 1.0).abs() < 1e-12);
        let flat = realize(sides(1.0, 1.0, 2.0)).unwrap();
        assert_eq!(flat.vertices[1], PlanarPoint::new(0.0, 1.0));
        assert!(matches!(SideLengths::new(2.0, 1.0, 2.0), Err(Error::Unrealizable { .. })));
        assert!(SideLengths::new(0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn corresponding_points() {
        let tri = realize(sides(1.0, 1.0, 3.0)).unwrap();
        assert_eq!(corresponding_point(&tri, Side::S12, 0.0).unwrap(), tri.vertices[0]);
        assert_eq!(corresponding_point(&tri, Side::S13, 1.5).unwrap(), PlanarPoint::new(0.0, 1.5));
        let q = corresponding_point(&tri, Side::S12, 0.5).unwrap();
        assert!((q.x - 1.25f64.sqrt() / 2.0).abs() < 1e-15 && q.t == 0.75);
        assert!((minkowski_tau(tri.vertices[0], q) - 0.5).abs() < 1e-12);
        assert!((minkowski_tau(q, tri.vertices[1]) - 0.5).abs() < 1e-12);
        assert!(corresponding_point(&tri, Side::S12, 1.5).is_err());
    }

    /// Rapidity between two future timelike vectors.
    fn rapidity(a: PlanarPoint, b: PlanarPoint) -> f64 {
        let dot = a.t * b.t - a.x * b.x;
        let na = (a.t * a.t - a.x * a.x).sqrt();
        let nb = (b.t * b.t - b.x * b.x).sqrt();
        (dot / (na * nb)).max(1.0).acosh()
    }

    #[test]
    fn angle_examples_match_embedding() {
        let s = sides(1.0, 1.0, 3.0);
        let a = vertex_angles(s).unwrap();
        assert!((a.theta1 - 1.5f64.acosh()).abs() < 1e-14);
        assert!((a.theta3 - 1.5f64.acosh()).abs() < 1e-14);
        assert!((a.theta2 - 3.5f64.acosh()).abs() < 1e-14);
        assert!((a.theta1 - 0.9624).abs() < 1e-4 && (a.theta2 - 1.9248).abs() < 1e-4);
        let [p1, p2, p3] = realize(s).unwrap().vertices;
        let v = |p: PlanarPoint, q: PlanarPoint| PlanarPoint::new(q.x - p.x, q.t - p.t);
        assert!((rapidity(v(p1, p2), v(p1, p3)) - a.theta1).abs() < 1e-12);
        assert!((rapidity(v(p1, p2), v(p2, p3)) - a.theta2).abs() < 1e-12);
        assert!((rapidity(v(p1, p3), v(p2, p3)) - a.theta3).abs() < 1e-12);
        let z = vertex_angles(sides(1.0, 1.0, 2.0)).unwrap();
        assert_eq!((z.theta1, z.theta2, z.theta3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn law_of_cosines_holds_with_role_signs() {
        let s = sides(0.7, 1.3, 2.6);
        for role in [VertexRole::Past, VertexRole::Middle, VertexRole::Future] {
            assert!(law_of_cosines_residual(s, role).unwrap().abs() < 1e-12, "{role:?}");
        }
        // With a minus sign and the side products τ(p1,p2)·τ(p2,p3), as sometimes
        // printed, no vertex angle balances the identity.
        let a = vertex_angles(s).unwrap();
        for theta in [a.theta1, a.theta2, a.theta3] {
            let r = s.l13 * s.l13 - (s.l12 * s.l12 + s.l23 * s.l23 - 2.0 * s.l12 * s.l23 * theta.cosh());
            assert!(r.abs() > 1.0);
        }
    }

    #[test]
    fn angles_vanish_continuously_at_degeneracy() {
        let mut last = f64::INFINITY;
        for k in 1..40 {
            let eps = 0.5f64.powi(k);
            let a = vertex_angles(sides(0.6, 0.9, 1.5 + eps)).unwrap();
            assert!(a.theta2 < last && a.theta2 > 0.0);
            assert!((a.theta2 - a.theta1 - a.theta3).abs() < 1e-12);
            last = a.theta2;
        }
        assert!(last < 1e-5);
    }
}
