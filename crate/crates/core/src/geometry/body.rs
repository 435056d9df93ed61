//! Exact convex bodies used as control and target sets, with their support
//! oracles.

use serde::{Deserialize, Serialize};

use super::linalg::Vector2;
use crate::error::{invalid, Result};

/// A convex body given in closed form.
///
/// `Interval1D` is a one-dimensional control set `[lo, hi]` embedded in the
/// plane along `column`, i.e. the segment `{u * column : lo <= u <= hi}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConvexBodySpec {
    Ball {
        center: Vector2,
        radius: f64,
    },
    Box {
        lo: Vector2,
        hi: Vector2,
    },
    Segment {
        a: Vector2,
        b: Vector2,
    },
    Point {
        p: Vector2,
    },
    #[serde(rename = "interval")]
    Interval1D {
        lo: f64,
        hi: f64,
        #[serde(default = "unit_column")]
        column: Vector2,
    },
}

fn unit_column() -> Vector2 {
    Vector2::new(1.0, 0.0)
}

/// Chooses `hi` for a positive slope, `lo` for a negative one and the
/// midpoint on an exact tie.
#[inline]
fn face_coordinate(slope: f64, lo: f64, hi: f64) -> f64 {
    if slope > 0.0 {
        hi
    } else if slope < 0.0 {
        lo
    } else {
        0.5 * (lo + hi)
    }
}

impl ConvexBodySpec {
    pub fn ball(center: Vector2, radius: f64) -> Self {
        ConvexBodySpec::Ball { center, radius }
    }

    pub fn origin_ball(radius: f64) -> Self {
        ConvexBodySpec::Ball {
            center: Vector2::ZERO,
            radius,
        }
    }

    /// The square `[-r, r]^2`.
    pub fn square(r: f64) -> Self {
        ConvexBodySpec::Box {
            lo: Vector2::new(-r, -r),
            hi: Vector2::new(r, r),
        }
    }

    pub fn point(p: Vector2) -> Self {
        ConvexBodySpec::Point { p }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        ConvexBodySpec::Interval1D {
            lo,
            hi,
            column: unit_column(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: Vector2| v.is_finite();
        match *self {
            ConvexBodySpec::Ball { center, radius } => {
                if !finite(center) || !radius.is_finite() || radius < 0.0 {
                    return Err(invalid("ball needs a finite center and radius >= 0"));
                }
            }
            ConvexBodySpec::Box { lo, hi } => {
                if !finite(lo) || !finite(hi) || lo.x1 > hi.x1 || lo.x2 > hi.x2 {
                    return Err(invalid("box needs finite corners with lo <= hi"));
                }
            }
            ConvexBodySpec::Segment { a, b } => {
                if !finite(a) || !finite(b) {
                    return Err(invalid("segment endpoints must be finite"));
                }
            }
            ConvexBodySpec::Point { p } => {
                if !finite(p) {
                    return Err(invalid("point must be finite"));
                }
            }
            ConvexBodySpec::Interval1D { lo, hi, column } => {
                if !lo.is_finite() || !hi.is_finite() || lo > hi || !finite(column) {
                    return Err(invalid(
                        "interval needs finite lo <= hi and a finite column",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Support value and a supporting point in direction `l`.
    ///
    /// Accepts the zero direction (value 0, the "center" point), which
    /// occurs when an adjoint is annihilated by the input matrix.
    #[inline]
    pub fn support(&self, l: Vector2) -> (f64, Vector2) {
        match *self {
            ConvexBodySpec::Ball { center, radius } => {
                let n = l.norm();
                if n == 0.0 {
                    return (0.0, center);
                }
                let p = center + (radius / n) * l;
                (l.dot(center) + radius * n, p)
            }
            ConvexBodySpec::Box { lo, hi } => {
                let p = Vector2::new(
                    face_coordinate(l.x1, lo.x1, hi.x1),
                    face_coordinate(l.x2, lo.x2, hi.x2),
                );
                (l.dot(p), p)
            }
            ConvexBodySpec::Segment { a, b } => {
                let (va, vb) = (l.dot(a), l.dot(b));
                if va > vb {
                    (va, a)
                } else if vb > va {
                    (vb, b)
                } else {
                    let m = a.lerp(b, 0.5);
                    (l.dot(m), m)
                }
            }
            ConvexBodySpec::Point { p } => (l.dot(p), p),
            ConvexBodySpec::Interval1D { lo, hi, column } => {
                let s = l.dot(column);
                let u = face_coordinate(s, lo, hi);
                (s * u, u * column)
            }
        }
    }

    /// Largest distance of a point of the body from the origin.
    pub fn max_norm(&self) -> f64 {
        match *self {
            ConvexBodySpec::Ball { center, radius } => center.norm() + radius,
            ConvexBodySpec::Box { lo, hi } => [
                lo,
                hi,
                Vector2::new(lo.x1, hi.x2),
                Vector2::new(hi.x1, lo.x2),
            ]
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max),
            ConvexBodySpec::Segment { a, b } => a.norm().max(b.norm()),
            ConvexBodySpec::Point { p } => p.norm(),
            ConvexBodySpec::Interval1D { lo, hi, column } => lo.abs().max(hi.abs()) * column.norm(),
        }
    }

    /// Euclidean distance from `x` to the body.
    pub fn distance(&self, x: Vector2) -> f64 {
        match *self {
            ConvexBodySpec::Ball { center, radius } => (x.distance(center) - radius).max(0.0),
            ConvexBodySpec::Box { lo, hi } => {
                let d1 = (lo.x1 - x.x1).max(0.0).max(x.x1 - hi.x1);
                let d2 = (lo.x2 - x.x2).max(0.0).max(x.x2 - hi.x2);
                d1.hypot(d2)
            }
            ConvexBodySpec::Segment { a, b } => super::hull::point_segment_distance(x, a, b),
            ConvexBodySpec::Point { p } => x.distance(p),
            ConvexBodySpec::Interval1D { lo, hi, column } => {
                super::hull::point_segment_distance(x, lo * column, hi * column)
            }
        }
    }

    pub fn contains(&self, x: Vector2, tol: f64) -> bool {
        self.distance(x) <= tol
    }

    /// Scalar control value of a point of a one-dimensional body.
    pub fn scalar_coordinate(&self, p: Vector2) -> Option<f64> {
        match *self {
            ConvexBodySpec::Interval1D { column, .. } => {
                let n2 = column.dot(column);
                (n2 > 0.0).then(|| p.dot(column) / n2)
            }
            _ => None,
        }
    }

    /// Whether `p` is an extreme point of the body, within `tol`.
    pub fn is_extreme_point(&self, p: Vector2, tol: f64) -> bool {
        match *self {
            ConvexBodySpec::Ball { center, radius } => (p.distance(center) - radius).abs() <= tol,
            ConvexBodySpec::Box { lo, hi } => {
                let on = |v: f64, a: f64, b: f64| (v - a).abs() <= tol || (v - b).abs() <= tol;
                on(p.x1, lo.x1, hi.x1) && on(p.x2, lo.x2, hi.x2)
            }
            ConvexBodySpec::Segment { a, b } => p.distance(a) <= tol || p.distance(b) <= tol,
            ConvexBodySpec::Point { p: q } => p.distance(q) <= tol,
            ConvexBodySpec::Interval1D { lo, hi, column } => {
                p.distance(lo * column) <= tol || p.distance(hi * column) <= tol
            }
        }
    }

    /// Whether the body is a single point.
    pub fn is_singleton(&self) -> bool {
        match *self {
            ConvexBodySpec::Ball { radius, .. } => radius == 0.0,
            ConvexBodySpec::Box { lo, hi } => lo == hi,
            ConvexBodySpec::Segment { a, b } => a == b,
            ConvexBodySpec::Point { .. } => true,
            ConvexBodySpec::Interval1D { lo, hi, column } => lo == hi || column == Vector2::ZERO,
        }
    }
}

/// Support value and supporting point of `body` in the nonzero direction `l`.
pub fn support_oracle(body: &ConvexBodySpec, l: Vector2) -> Result<(f64, Vector2)> {
    if !(l.norm() > 0.0) {
        return Err(invalid("support direction must be nonzero"));
    }
    Ok(body.support(l))
}
