//! Direct set-valued Euler: `P ← (I + hĀ(τ))P ⊕ h·B̄(τ)U` on polygons.

use std::sync::Arc;

use super::linear::transition_matrix;
use crate::error::Result;
use crate::geometry::{hull2d, minkowski_sum, DirectionGrid, DiscreteConvexSet, Vector2};
use crate::systems::LinearControlProblem;

pub(super) fn tube(
    p: &LinearControlProblem,
    grid: &Arc<DirectionGrid>,
) -> Result<Vec<DiscreteConvexSet>> {
    let (k_outer, n_inner, h) = (p.time.k, p.time.n, p.time.h());
    let first = DiscreteConvexSet::from_body(grid.clone(), &p.target)?;
    let mut poly = first.hull().to_vec();
    let mut sets = Vec::with_capacity(k_outer + 1);
    sets.push(first);
    let mut i = 0;
    for _ in 0..k_outer {
        for _ in 0..n_inner {
            let tau = p.time.inner(i);
            let m = transition_matrix(&p.a_rev, tau, h, 1)?;
            let b = p.b_rev.at(tau)?;
            // Supporting points of B̄U at the grid directions; the control
            // set enters through its extreme points (or face midpoints).
            let inputs: Vec<Vector2> = grid
                .directions()
                .iter()
                .map(|&l| h * b.apply(p.control.support(b.apply_transpose(l)).1))
                .collect();
            let mapped: Vec<Vector2> = poly.iter().map(|&v| m.apply(v)).collect();
            let mapped = if m.det() > 0.0 {
                mapped
            } else {
                hull2d(&mapped)?
            };
            poly = minkowski_sum(&mapped, &hull2d(&inputs)?)?;
            i += 1;
        }
        sets.push(DiscreteConvexSet::from_polygon(grid.clone(), &poly)?);
    }
    Ok(sets)
}
