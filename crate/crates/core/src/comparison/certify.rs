use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{corresponding_point, minkowski_tau, realize, Side, SideLengths};
use crate::metric::{MetricSpec, Point};
use crate::product::{relate, ProductEvent, ProductSpace};
use crate::{par, Error, Result, Status};

/// How timelike triangles are drawn.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleSampler {
    /// `Straddle` on a tripod, `Patch` otherwise.
    #[default]
    Auto,
    /// Consecutive vertices within `extent` in the base (a quarter of the
    /// diameter when absent), which keeps flat bases wrap-free.
    Patch { extent: Option<f64> },
    /// Tripod only: the three vertices sit on three different legs.
    Straddle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertOptions {
    pub triangles: usize,
    /// Points per side, vertices included.
    pub grid: usize,
    pub tol: f64,
    pub seed: u64,
    /// Range of `τ(p1,p2)`, `τ(p2,p3)` and `τ(p1,p3)`.
    pub tau_range: (f64, f64),
    pub sampler: TriangleSampler,
    /// Violations kept in the report; all are counted.
    pub max_violations: usize,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions {
            triangles: 64,
            grid: 8,
            tol: 1e-6,
            seed: 0,
            tau_range: (0.2, 2.0),
            sampler: TriangleSampler::Auto,
            max_violations: 100,
        }
    }
}

/// A point on a triangle side: side and grid index from its first vertex.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidePoint {
    pub side: Side,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertViolation {
    pub tri: usize,
    /// Ordered pair, earlier event first.
    pub pair: [SidePoint; 2],
    pub tau: f64,
    pub tau_bar: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub triangles: usize,
    pub pairs: usize,
    pub skipped: usize,
    pub violation_count: usize,
    pub violations: Vec<CertViolation>,
    /// Largest `τ − τ̄` seen, negative when every pair has room.
    pub worst_slack: f64,
    /// Largest `|τ − τ̄|`, zero on flat patches up to rounding.
    pub max_abs_gap: f64,
    pub tol: f64,
    pub status: Status,
}

struct TriangleOutcome {
    pairs: usize,
    skipped: bool,
    worst: f64,
    max_gap: f64,
    violations: Vec<CertViolation>,
}

/// One-sided check of `τ(x, y) ≤ τ̄(x̄, ȳ)` on sampled timelike geodesic triangles.
///
/// Sides are product geodesics: a shortest base path traversed at constant
/// speed with affine time, so grid point `k` sits at τ-distance
/// `k/(m−1)·l_ij` from the first vertex. Each candidate violation is recomputed
/// from the closed forms before it is reported.
pub fn certify_curvature_below(ps: &ProductSpace, opts: &CertOptions) -> Result<CertReport> {
    if ps.sigma().is_finite() {
        return Err(Error::input("curvature certification needs a continuous built-in base with geodesics"));
    }
    if opts.grid < 2 {
        return Err(Error::input("per-side grid needs at least 2 points"));
    }
    let (lo, hi) = opts.tau_range;
    if !(lo > 0.0 && hi >= 2.0 * lo) {
        return Err(Error::input(format!("τ range ({lo}, {hi}) must satisfy 0 < lo and 2·lo ≤ hi")));
    }
    let sampler = match (&opts.sampler, ps.sigma().spec()) {
        (TriangleSampler::Auto, MetricSpec::Tripod { .. }) => TriangleSampler::Straddle,
        (TriangleSampler::Auto, _) => TriangleSampler::Patch { extent: None },
        (TriangleSampler::Straddle, MetricSpec::Tripod { .. }) => TriangleSampler::Straddle,
        (TriangleSampler::Straddle, _) => return Err(Error::input("the straddle sampler needs a tripod base")),
        (s, _) => s.clone(),
    };
    let outcomes = par::map_range(opts.triangles, |tri| {
        let mut rng = par::task_rng(opts.seed, tri as u64);
        match draw_triangle(ps, &sampler, opts.tau_range, &mut rng) {
            Some(v) => check_triangle(ps, tri, v, opts),
            None => TriangleOutcome { pairs: 0, skipped: true, worst: f64::NEG_INFINITY, max_gap: 0.0, violations: vec![] },
        }
    });
    let mut report = CertReport {
        triangles: opts.triangles,
        pairs: 0,
        skipped: 0,
        violation_count: 0,
        violations: Vec::new(),
        worst_slack: f64::NEG_INFINITY,
        max_abs_gap: 0.0,
        tol: opts.tol,
        status: Status::Pass,
    };
    for o in outcomes {
        report.pairs += o.pairs;
        report.skipped += usize::from(o.skipped);
        report.worst_slack = report.worst_slack.max(o.worst);
        report.max_abs_gap = report.max_abs_gap.max(o.max_gap);
        report.violation_count += o.violations.len();
        let room = opts.max_violations.saturating_sub(report.violations.len());
        report.violations.extend(o.violations.into_iter().take(room));
    }
    if report.pairs == 0 {
        report.worst_slack = 0.0;
    }
    report.status = Status::from_pass(report.violation_count == 0);
    Ok(report)
}

/// Number of redraws before a triangle is skipped.
const MAX_TRIES: usize = 1000;

fn draw_triangle(ps: &ProductSpace, sampler: &TriangleSampler, range: (f64, f64), rng: &mut ChaCha8Rng) -> Option<[ProductEvent; 3]> {
    let sigma = ps.sigma();
    let (t0, t1) = ps.window();
    let half = (range.0, range.1 / 2.0);
    for _ in 0..MAX_TRIES {
        let base: [Point; 3] = match sampler {
            TriangleSampler::Straddle => {
                let MetricSpec::Tripod { legs } = sigma.spec() else { return None };
                let first = rng.random_range(0..3u8);
                let turn = if rng.random::<bool>() { 1 } else { 2 };
                let order = [first, (first + turn) % 3, (first + 2 * turn) % 3];
                order.map(|leg| Point::Tripod { leg, r: legs[leg as usize] * (1.0 - rng.random::<f64>()) })
            }
            _ => {
                let extent = match sampler {
                    TriangleSampler::Patch { extent: Some(e) } => *e,
                    _ => sigma.diameter() / 4.0,
                };
                let p1 = sigma.sample_point(rng);
                let near = |rng: &mut ChaCha8Rng, p: &Point| {
                    (0..MAX_TRIES).map(|_| sigma.sample_point(rng)).find(|q| sigma.dist(p, q) <= extent).unwrap_or(*p)
                };
                let p2 = near(rng, &p1);
                let p3 = near(rng, &p2);
                [p1, p2, p3]
            }
        };
        let l12 = rng.random_range(half.0..=half.1);
        let l23 = rng.random_range(half.0..=half.1);
        let dt12 = l12.hypot(sigma.dist(&base[0], &base[1]));
        let dt23 = l23.hypot(sigma.dist(&base[1], &base[2]));
        let span = dt12 + dt23;
        if span > t1 - t0 {
            continue;
        }
        let s = t0 + (t1 - t0 - span) * rng.random::<f64>();
        let v = [
            ProductEvent::new(base[0], s),
            ProductEvent::new(base[1], s + dt12),
            ProductEvent::new(base[2], s + span),
        ];
        let l13 = ps.tau(&v[0], &v[2]);
        if l13 > range.1 || v.iter().any(|e| !ps.contains(e)) {
            continue;
        }
        return Some(v);
    }
    None
}

fn check_triangle(ps: &ProductSpace, tri: usize, v: [ProductEvent; 3], opts: &CertOptions) -> TriangleOutcome {
    let mut out = TriangleOutcome { pairs: 0, skipped: false, worst: f64::NEG_INFINITY, max_gap: 0.0, violations: vec![] };
    let sides = SideLengths { l12: ps.tau(&v[0], &v[1]), l23: ps.tau(&v[1], &v[2]), l13: ps.tau(&v[0], &v[2]) };
    // Exact product τ always satisfies the reverse triangle inequality.
    let comparison = match realize(sides) {
        Ok(c) => c,
        Err(_) => {
            out.skipped = true;
            return out;
        }
    };
    let m = opts.grid;
    let point = |side: Side, k: usize| {
        let (i, j) = side.ends();
        let f = k as f64 / (m - 1) as f64;
        let x = ps.sigma().point_along(&v[i].x, &v[j].x, f).expect("built-in bases have geodesics");
        let e = ProductEvent::new(x, v[i].t + f * (v[j].t - v[i].t));
        let bar = corresponding_point(&comparison, side, (f * comparison.side_length(side)).min(comparison.side_length(side)))
            .expect("parameter within side");
        (e, bar)
    };
    let grid: Vec<Vec<_>> = Side::ALL.iter().map(|&s| (0..m).map(|k| point(s, k)).collect()).collect();
    for a in 0..3 {
        for b in a + 1..3 {
            for ka in 0..m {
                for kb in 0..m {
                    out.pairs += 1;
                    let (pa, pb) = (SidePoint { side: Side::ALL[a], k: ka }, SidePoint { side: Side::ALL[b], k: kb });
                    let ((ea, ba), (eb, bb)) = (grid[a][ka], grid[b][kb]);
                    for (x, xb, y, yb, pair) in [(ea, ba, eb, bb, [pa, pb]), (eb, bb, ea, ba, [pb, pa])] {
                        let tau = ps.tau(&x, &y);
                        let tau_bar = minkowski_tau(xb, yb);
                        let slack = tau - tau_bar;
                        out.worst = out.worst.max(slack);
                        out.max_gap = out.max_gap.max(slack.abs());
                        if slack > opts.tol && reverify(ps, &v, pair, m, opts.tol) {
                            out.violations.push(CertViolation { tri, pair, tau, tau_bar, slack });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Recomputes a candidate violation from scratch with a fresh embedding.
fn reverify(ps: &ProductSpace, v: &[ProductEvent; 3], pair: [SidePoint; 2], m: usize, tol: f64) -> bool {
    let sigma = ps.sigma();
    let l = |i: usize, j: usize| relate(v[j].t - v[i].t, sigma.dist(&v[i].x, &v[j].x)).tau;
    let Ok(tri) = SideLengths::new(l(0, 1), l(1, 2), l(0, 2)).and_then(realize) else { return false };
    let at = |p: SidePoint| {
        let (i, j) = p.side.ends();
        let f = p.k as f64 / (m - 1) as f64;
        let x = sigma.point_along(&v[i].x, &v[j].x, f)?;
        let (pi, pj) = (tri.vertices[i], tri.vertices[j]);
        let bar = super::PlanarPoint::new(pi.x + f * (pj.x - pi.x), pi.t + f * (pj.t - pi.t));
        Some((x, v[i].t + f * (v[j].t - v[i].t), bar))
    };
    let (Some((x, s, xb)), Some((y, t, yb))) = (at(pair[0]), at(pair[1])) else { return false };
    relate(t - s, sigma.dist(&x, &y)).tau - minkowski_tau(xb, yb) > tol
}
