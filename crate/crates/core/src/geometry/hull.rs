//! Planar convex hulls and point/polygon queries.
//!
//! A hull is a counter-clockwise vertex cycle without repeated or collinear
//! vertices. Degenerate hulls are kept as they are: two vertices describe a
//! segment and a single vertex a point.

use super::linalg::Vector2;
use crate::error::{invalid, Result};

/// Relative threshold below which three points count as collinear.
const COLLINEAR_REL: f64 = 1e-12;

/// Counter-clockwise convex hull (Andrew's monotone chain).
///
/// Nearly collinear triples (cross product below `1e-12 * extent^2`) are
/// merged, so rounding noise on a line does not produce sliver polygons.
pub fn hull2d(points: &[Vector2]) -> Result<Vec<Vector2>> {
    if points.is_empty() {
        return Err(invalid("hull of an empty point list"));
    }
    let mut pts: Vec<Vector2> = points.to_vec();
    pts.sort_by(|a, b| a.x1.total_cmp(&b.x1).then(a.x2.total_cmp(&b.x2)));
    pts.dedup();
    if pts.len() == 1 {
        return Ok(pts);
    }

    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = Vector2::new(lo.x1.min(p.x1), lo.x2.min(p.x2));
        hi = Vector2::new(hi.x1.max(p.x1), hi.x2.max(p.x2));
    }
    let extent = (hi - lo).norm();
    let magnitude = lo.norm_inf().max(hi.norm_inf());
    if extent <= 1e-14 * (1.0 + magnitude) {
        return Ok(vec![pts[0]]);
    }
    let eps = COLLINEAR_REL * extent * extent;

    let turn = |o: Vector2, a: Vector2, b: Vector2| (a - o).cross(b - o);
    let mut out: Vec<Vector2> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while out.len() >= 2 && turn(out[out.len() - 2], out[out.len() - 1], p) <= eps {
            out.pop();
        }
        out.push(p);
    }
    let lower_len = out.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while out.len() >= lower_len && turn(out[out.len() - 2], out[out.len() - 1], p) <= eps {
            out.pop();
        }
        out.push(p);
    }
    out.pop();
    Ok(out)
}

pub fn point_segment_distance(x: Vector2, a: Vector2, b: Vector2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return x.distance(a);
    }
    let t = ((x - a).dot(ab) / len2).clamp(0.0, 1.0);
    x.distance(a + t * ab)
}

/// Distance from `x` to the boundary of the hull (to the hull itself for
/// degenerate hulls).
pub fn boundary_distance(hull: &[Vector2], x: Vector2) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => x.distance(hull[0]),
        2 => point_segment_distance(x, hull[0], hull[1]),
        n => (0..n)
            .map(|i| point_segment_distance(x, hull[i], hull[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min),
    }
}

enum Locate {
    Inside,
    /// Outside the half-plane of the edge starting at this vertex index.
    Outside(usize),
}

/// O(log n) location of `x` relative to a polygon with at least 3 vertices.
fn locate(hull: &[Vector2], x: Vector2) -> Locate {
    let n = hull.len();
    let v0 = hull[0];
    let p = x - v0;
    if (hull[1] - v0).cross(p) < 0.0 {
        return Locate::Outside(0);
    }
    if (hull[n - 1] - v0).cross(p) > 0.0 {
        return Locate::Outside(n - 1);
    }
    // Largest i in [1, n-2] with x left of (or on) the ray v0 -> v_i.
    let (mut lo, mut hi) = (1usize, n - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if (hull[mid] - v0).cross(p) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (hull[lo], hull[lo + 1]);
    if (b - a).cross(x - a) >= 0.0 {
        Locate::Inside
    } else {
        Locate::Outside(lo)
    }
}

/// Whether `x` lies within distance `tol` of the hull.
pub fn hull_contains(hull: &[Vector2], x: Vector2, tol: f64) -> bool {
    match hull.len() {
        0 => false,
        1 | 2 => boundary_distance(hull, x) <= tol,
        n => match locate(hull, x) {
            Locate::Inside => true,
            Locate::Outside(i) => {
                let (a, b) = (hull[i], hull[(i + 1) % n]);
                let e = b - a;
                let violation = -e.cross(x - a) / e.norm();
                // The polygon lies inside the edge's half-plane, so the
                // violation is a lower bound on the distance.
                if violation > tol {
                    return false;
                }
                boundary_distance(hull, x) <= tol
            }
        },
    }
}

/// Signed depth of `x` in the hull: distance to the boundary when inside,
/// minus the distance to the hull when outside. Degenerate hulls have no
/// interior, so the depth is never positive.
pub fn signed_depth(hull: &[Vector2], x: Vector2) -> f64 {
    match hull.len() {
        0 => f64::NEG_INFINITY,
        1 | 2 => -boundary_distance(hull, x),
        _ => {
            let d = boundary_distance(hull, x);
            if hull_contains(hull, x, 0.0) {
                d
            } else {
                -d
            }
        }
    }
}

/// Minkowski sum of two hulls (as returned by [`hull2d`]).
pub fn minkowski_sum(p: &[Vector2], q: &[Vector2]) -> Result<Vec<Vector2>> {
    if p.is_empty() || q.is_empty() {
        return Err(invalid("Minkowski sum with an empty hull"));
    }
    if p.len() < 3 || q.len() < 3 {
        let sums: Vec<Vector2> = p
            .iter()
            .flat_map(|&a| q.iter().map(move |&b| a + b))
            .collect();
        return hull2d(&sums);
    }
    let bottom_first = |h: &[Vector2]| -> Vec<Vector2> {
        let start = (0..h.len())
            .min_by(|&a, &b| {
                h[a].x2
                    .total_cmp(&h[b].x2)
                    .then(h[a].x1.total_cmp(&h[b].x1))
            })
            .unwrap_or(0);
        let mut v: Vec<Vector2> = h[start..].iter().chain(&h[..start]).copied().collect();
        v.push(v[0]);
        v.push(v[1]);
        v
    };
    let (pp, qq) = (bottom_first(p), bottom_first(q));
    let (n, m) = (pp.len() - 2, qq.len() - 2);
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(n + m);
    while i < n || j < m {
        out.push(pp[i] + qq[j]);
        let c = (pp[i + 1] - pp[i]).cross(qq[j + 1] - qq[j]);
        if c >= 0.0 && i < n {
            i += 1;
        }
        if c <= 0.0 && j < m {
            j += 1;
        }
    }
    hull2d(&out)
}
