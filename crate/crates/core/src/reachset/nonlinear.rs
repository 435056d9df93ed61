//! Point-cloud propagation for nonlinear dynamics.
//!
//! Every cloud point is advanced under each sampled constant control by one
//! Euler or Heun step of the reversed field; the new cloud keeps, per grid
//! direction, the candidate maximizing `⟨l, ·⟩`. This convexification step
//! is justified empirically only: the resulting sets are convex inner
//! approximations even where the true reachable set need not be convex.

use std::sync::Arc;

use super::{assemble, ReachTube, Scheme};
use crate::error::{invalid, Result};
use crate::geometry::{hull2d, DirectionGrid, DiscreteConvexSet, Vector2};
use crate::systems::{Dynamics, NonlinearProblem, Problem};

/// `N_U` equispaced samples of `[lo, hi]`, endpoints included.
pub(crate) fn control_samples(lo: f64, hi: f64, n_u: usize) -> Vec<f64> {
    (0..n_u)
        .map(|r| lo + (hi - lo) * r as f64 / (n_u - 1) as f64)
        .collect()
}

#[inline]
fn step(dynamics: Dynamics, scheme: Scheme, x: Vector2, u: f64, h: f64) -> Vector2 {
    let k1 = dynamics.reversed(x, u);
    match scheme {
        Scheme::NonlinearHeun => {
            let k2 = dynamics.reversed(x + h * k1, u);
            x + (0.5 * h) * (k1 + k2)
        }
        _ => x + h * k1,
    }
}

/// Reach tube of a nonlinear problem from `m_b` boundary samples of the
/// target and `n_u` sampled control values.
pub fn reach_nonlinear(
    problem: &NonlinearProblem,
    scheme: Scheme,
    grid: Arc<DirectionGrid>,
    n_u: usize,
    m_b: usize,
) -> Result<ReachTube> {
    problem.validate()?;
    if !scheme.is_nonlinear() {
        return Err(invalid(format!("scheme {scheme} needs a linear problem")));
    }
    if n_u < 2 {
        return Err(invalid("need at least two control samples"));
    }
    if m_b < grid.len() {
        return Err(invalid(format!(
            "need at least {} boundary samples of the target, got {m_b}",
            grid.len()
        )));
    }
    let (lo, hi) = problem.control_bounds();
    let etas = control_samples(lo, hi, n_u);
    let (k_outer, n_inner, h) = (problem.time.k, problem.time.n, problem.time.h());

    let mut cloud: Vec<Vector2> = (0..m_b)
        .map(|m| {
            let phi = std::f64::consts::TAU * m as f64 / m_b as f64;
            problem.target.support(Vector2::new(phi.cos(), phi.sin())).1
        })
        .collect();
    let mut sets = Vec::with_capacity(k_outer + 1);
    sets.push(DiscreteConvexSet::from_body(grid.clone(), &problem.target)?);
    let mut candidates = Vec::with_capacity(cloud.len() * n_u);
    for _ in 0..k_outer {
        let mut selected = None;
        for _ in 0..n_inner {
            candidates.clear();
            for &x in &cloud {
                candidates.extend(
                    etas.iter()
                        .map(|&u| step(problem.dynamics, scheme, x, u, h)),
                );
            }
            if candidates.iter().any(|c| !c.is_finite()) {
                return Err(crate::Error::Domain(
                    "nonlinear propagation diverged".into(),
                ));
            }
            let set = DiscreteConvexSet::from_polygon(grid.clone(), &hull2d(&candidates)?)?;
            cloud = set.supporting_points().to_vec();
            selected = Some(set);
        }
        sets.push(selected.expect("at least one inner step"));
    }
    Ok(assemble(
        Problem::Nonlinear(problem.clone()),
        scheme,
        sets,
        grid,
    ))
}
