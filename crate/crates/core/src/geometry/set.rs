//! Direction grids and convex sets sampled on them.

use std::f64::consts::PI;
use std::sync::Arc;

use super::body::ConvexBodySpec;
use super::hull::{hull2d, hull_contains, signed_depth};
use super::linalg::Vector2;
use crate::error::{invalid, Result};

/// Absolute tolerance of the interpolation-parameter bisection.
pub const LAMBDA_TOL: f64 = 1e-12;
/// Iteration cap of the interpolation-parameter bisection.
pub const LAMBDA_MAX_ITER: usize = 60;

/// Unit directions `l^k` at angles `2π(k-1)/(N_R-1)`, `k = 1..N_R`.
///
/// The last direction repeats the first one.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid {
    directions: Vec<Vector2>,
}

impl DirectionGrid {
    pub fn new(n_r: usize) -> Result<Self> {
        if n_r < 3 {
            return Err(invalid(format!("direction grid needs N_R >= 3, got {n_r}")));
        }
        let step = 2.0 * PI / (n_r - 1) as f64;
        let mut directions: Vec<Vector2> = (0..n_r)
            .map(|k| {
                let a = step * k as f64;
                Vector2::new(a.cos(), a.sin())
            })
            .collect();
        directions[n_r - 1] = directions[0];
        Ok(DirectionGrid { directions })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Vector2] {
        &self.directions
    }

    pub fn get(&self, k: usize) -> Vector2 {
        self.directions[k]
    }
}

pub fn make_direction_grid(n_r: usize) -> Result<DirectionGrid> {
    DirectionGrid::new(n_r)
}

/// A convex set known through its support values `h_k` and supporting
/// points `y_k` on a direction grid. Its geometric representation is the
/// inner approximation `co{y_k}`.
#[derive(Debug, Clone)]
pub struct DiscreteConvexSet {
    grid: Arc<DirectionGrid>,
    values: Vec<f64>,
    points: Vec<Vector2>,
    hull: Vec<Vector2>,
}

impl DiscreteConvexSet {
    /// Builds a set from supporting points; the support values are
    /// `⟨l^k, y_k⟩`.
    pub fn from_points(grid: Arc<DirectionGrid>, points: Vec<Vector2>) -> Result<Self> {
        let values = grid
            .directions()
            .iter()
            .zip(&points)
            .map(|(l, y)| l.dot(*y))
            .collect();
        Self::from_parts(grid, values, points)
    }

    /// Builds a set from support values and supporting points computed
    /// together (the values may carry rounding independent of the points).
    pub fn from_parts(
        grid: Arc<DirectionGrid>,
        values: Vec<f64>,
        points: Vec<Vector2>,
    ) -> Result<Self> {
        if values.len() != grid.len() || points.len() != grid.len() {
            return Err(invalid(format!(
                "expected {} support values and points, got {} and {}",
                grid.len(),
                values.len(),
                points.len()
            )));
        }
        let hull = hull2d(&points)?;
        Ok(DiscreteConvexSet {
            grid,
            values,
            points,
            hull,
        })
    }

    /// Samples an exact body on the grid.
    pub fn from_body(grid: Arc<DirectionGrid>, body: &ConvexBodySpec) -> Result<Self> {
        let (values, points) = grid.directions().iter().map(|&l| body.support(l)).unzip();
        Self::from_parts(grid, values, points)
    }

    /// Samples a convex polygon (vertex list in any order) on the grid.
    pub fn from_polygon(grid: Arc<DirectionGrid>, vertices: &[Vector2]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(invalid("polygon without vertices"));
        }
        let points = grid
            .directions()
            .iter()
            .map(|&l| {
                let mut best = vertices[0];
                let mut best_val = l.dot(best);
                for &v in &vertices[1..] {
                    let val = l.dot(v);
                    if val > best_val {
                        best = v;
                        best_val = val;
                    }
                }
                best
            })
            .collect();
        Self::from_points(grid, points)
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn support_values(&self) -> &[f64] {
        &self.values
    }

    pub fn supporting_points(&self) -> &[Vector2] {
        &self.points
    }

    /// Counter-clockwise hull of the supporting points.
    pub fn hull(&self) -> &[Vector2] {
        &self.hull
    }

    /// Whether the hull is a segment or a point.
    pub fn is_degenerate(&self) -> bool {
        self.hull.len() < 3
    }

    pub fn contains(&self, x: Vector2, tol: f64) -> bool {
        hull_contains(&self.hull, x, tol)
    }

    fn same_grid(&self, other: &DiscreteConvexSet) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(invalid("sets live on different direction grids"))
        }
    }

    /// Checks the two defining invariants: the supporting point attains the
    /// support value, and no supporting point exceeds another direction's
    /// support value. Returns a description of the first violation.
    pub fn invariant_violation(&self) -> Option<String> {
        let dirs = self.grid.directions();
        let slack = |h: f64| 1e-9 * (1.0 + h.abs());
        for (k, (&l, (&y, &h))) in dirs
            .iter()
            .zip(self.points.iter().zip(&self.values))
            .enumerate()
        {
            if (l.dot(y) - h).abs() > slack(h) {
                return Some(format!("direction {k}: <l,y> = {} but h = {h}", l.dot(y)));
            }
        }
        for (i, (&l, &h)) in dirs.iter().zip(&self.values).enumerate() {
            for (k, &y) in self.points.iter().enumerate() {
                if l.dot(y) > h + slack(h) {
                    return Some(format!("point {k} exceeds support value of direction {i}"));
                }
            }
        }
        None
    }
}

/// Whether `x` is within `tol` of the hull of `set`.
pub fn contains(set: &DiscreteConvexSet, x: Vector2, tol: f64) -> bool {
    set.contains(x, tol)
}

/// Membership of `x` in the interpolant whose supporting points are
/// `(1-λ) y_a + λ y_b`, walking the points in direction order.
fn in_interpolant(
    sa: &DiscreteConvexSet,
    sb: &DiscreteConvexSet,
    lambda: f64,
    x: Vector2,
    tol: f64,
) -> bool {
    let (ya, yb) = (&sa.points, &sb.points);
    let n = ya.len();
    let at = |k: usize| ya[k].lerp(yb[k], lambda);
    let first = at(0);
    let mut prev = first;
    for k in 1..=n {
        let cur = if k == n { first } else { at(k) };
        let e = cur - prev;
        if e.x1 != 0.0 || e.x2 != 0.0 {
            let c = e.cross(x - prev);
            if c < 0.0 && c * c > tol * tol * e.dot(e) {
                return false;
            }
        }
        prev = cur;
    }
    true
}

/// Smallest `λ ∈ [0, 1]` such that `x` belongs to the Minkowski interpolant
/// between `sa` (λ = 0) and `sb` (λ = 1), found by bisection; `None` when
/// `x` is not in `sb`.
///
/// `tol` enters the endpoint tests and the membership in degenerate
/// (segment or point) interpolants.
pub fn min_lambda_membership(
    sa: &DiscreteConvexSet,
    sb: &DiscreteConvexSet,
    x: Vector2,
    tol: f64,
) -> Result<Option<f64>> {
    sa.same_grid(sb)?;
    if !sb.contains(x, tol) {
        return Ok(None);
    }
    if sa.contains(x, tol) {
        return Ok(Some(0.0));
    }
    let degenerate = sb.is_degenerate();
    let member = |lambda: f64| -> Result<bool> {
        if degenerate {
            let pts: Vec<Vector2> = sa
                .points
                .iter()
                .zip(&sb.points)
                .map(|(a, b)| a.lerp(*b, lambda))
                .collect();
            Ok(hull_contains(&hull2d(&pts)?, x, tol))
        } else {
            // Full-dimensional interpolants are tested exactly; the
            // tolerance only decides the endpoints.
            Ok(in_interpolant(sa, sb, lambda, x, 0.0))
        }
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..LAMBDA_MAX_ITER {
        if hi - lo <= LAMBDA_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if member(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// `max_k |h_a^k - h_b^k|`, a lower bound for the Hausdorff distance.
pub fn support_distance(sa: &DiscreteConvexSet, sb: &DiscreteConvexSet) -> Result<f64> {
    sa.same_grid(sb)?;
    Ok(sa
        .values
        .iter()
        .zip(&sb.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Minimum signed depth of the vertices of `sa` inside `sb`. Positive iff
/// `sa` lies in the interior of `sb`.
pub fn inclusion_margin(sa: &DiscreteConvexSet, sb: &DiscreteConvexSet) -> Result<f64> {
    sa.same_grid(sb)?;
    Ok(sa
        .hull
        .iter()
        .map(|&v| signed_depth(&sb.hull, v))
        .fold(f64::INFINITY, f64::min))
}
