//! Convex-set primitives in the plane.

mod body;
mod hull;
mod linalg;
mod set;

pub use body::{support_oracle, ConvexBodySpec};
pub use hull::{
    boundary_distance, hull2d, hull_contains, minkowski_sum, point_segment_distance, signed_depth,
};
pub use linalg::{Matrix2, Vector2};
pub use set::{
    contains, inclusion_margin, make_direction_grid, min_lambda_membership, support_distance,
    DirectionGrid, DiscreteConvexSet, LAMBDA_MAX_ITER, LAMBDA_TOL,
};
