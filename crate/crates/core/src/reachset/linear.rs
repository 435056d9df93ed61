//! Support-function quadrature for linear problems.
//!
//! For an end time `t = t0 + n h` and a direction `l`, the adjoint
//! `q_n = l, q_i = M_iᵀ q_{i+1}` is swept backwards and
//!
//! ```text
//! h(l) = δ*(q_0, S) + Σ_i w_i δ*(B̄_iᵀ q_i, U)
//! y(l) = Φ_n s* + Σ_i w_i Φ_(n,i) B̄_i u_i*
//! ```
//!
//! with `Φ_(n,i) = M_{n-1} ⋯ M_i`. Riemann weights are `h` on the nodes
//! `0..n`, trapezoid weights `h/2, h, …, h, h/2` on `0..=n`.

use std::sync::Arc;

use super::{direct, ControlTrace, Scheme};
use crate::error::{invalid, Result};
use crate::geometry::{ConvexBodySpec, DirectionGrid, DiscreteConvexSet, Matrix2, Vector2};
use crate::systems::{LinearControlProblem, Problem, TimeGrid, TimeMatrixFn};

/// One-step map of `ẋ = Ā(t) x` starting at `τ`: Euler for order 1, Heun
/// for order 2.
pub fn transition_matrix(a_rev: &TimeMatrixFn, tau: f64, h: f64, order: u8) -> Result<Matrix2> {
    if !(h > 0.0) {
        return Err(invalid("step size must be positive"));
    }
    let a0 = a_rev.at(tau)?;
    let euler = Matrix2::IDENTITY + a0.scale(h);
    match order {
        1 => Ok(euler),
        2 => {
            let a1 = a_rev.at(tau + h)?;
            Ok(Matrix2::IDENTITY + (a0 + a1 * euler).scale(0.5 * h))
        }
        other => Err(invalid(format!("unsupported order {other}"))),
    }
}

#[inline]
fn weight(scheme: Scheme, i: usize, n: usize, h: f64) -> f64 {
    match scheme {
        Scheme::HeunTrapezoid if i == 0 || i == n => 0.5 * h,
        Scheme::HeunTrapezoid => h,
        _ if i < n => h,
        _ => 0.0,
    }
}

/// Transition and input matrices on the inner nodes `0..=n`.
struct Nodes {
    m: Vec<Matrix2>,
    b: Vec<Matrix2>,
    h: f64,
    t0: f64,
}

impl Nodes {
    fn new(p: &LinearControlProblem, order: u8, n: usize) -> Result<Self> {
        let (t0, h) = (p.time.t0, p.time.h());
        let tau = |i: usize| t0 + i as f64 * h;
        let m = (0..n)
            .map(|i| transition_matrix(&p.a_rev, tau(i), h, order))
            .collect::<Result<_>>()?;
        let b = (0..=n).map(|i| p.b_rev.at(tau(i))).collect::<Result<_>>()?;
        Ok(Nodes { m, b, h, t0 })
    }
}

/// Support value and supporting point for `n` steps in direction `l`;
/// optionally records the selected controls in node order.
fn sweep(
    nodes: &Nodes,
    scheme: Scheme,
    control: &ConvexBodySpec,
    target: &ConvexBodySpec,
    n: usize,
    l: Vector2,
    mut record: Option<&mut Vec<Vector2>>,
) -> (f64, Vector2, Vector2) {
    let mut q = l;
    let mut phi = Matrix2::IDENTITY;
    let mut value = 0.0;
    let mut point = Vector2::ZERO;
    if n > 0 {
        let w = weight(scheme, n, n, nodes.h);
        if w > 0.0 {
            let b = nodes.b[n];
            let (s, u) = control.support(b.apply_transpose(q));
            value += w * s;
            point += w * b.apply(u);
            if let Some(r) = record.as_deref_mut() {
                r.push(u);
            }
        }
        for i in (0..n).rev() {
            let m = nodes.m[i];
            q = m.apply_transpose(q);
            phi = phi * m;
            let b = nodes.b[i];
            let (s, u) = control.support(b.apply_transpose(q));
            let w = weight(scheme, i, n, nodes.h);
            value += w * s;
            point += w * phi.apply(b.apply(u));
            if let Some(r) = record.as_deref_mut() {
                r.push(u);
            }
        }
    }
    let (sv, sp) = target.support(q);
    if let Some(r) = record {
        r.reverse();
    }
    (value + sv, point + phi.apply(sp), sp)
}

fn general_tube(
    p: &LinearControlProblem,
    scheme: Scheme,
    grid: &Arc<DirectionGrid>,
) -> Result<Vec<DiscreteConvexSet>> {
    let (k_outer, n_inner) = (p.time.k, p.time.n);
    let nodes = Nodes::new(p, scheme.order(), k_outer * n_inner)?;
    let mut sets = Vec::with_capacity(k_outer + 1);
    for j in 0..=k_outer {
        let (values, points) = grid
            .directions()
            .iter()
            .map(|&l| {
                let (v, y, _) = sweep(&nodes, scheme, &p.control, &p.target, j * n_inner, l, None);
                (v, y)
            })
            .unzip();
        sets.push(DiscreteConvexSet::from_parts(grid.clone(), values, points)?);
    }
    Ok(sets)
}

/// Time-invariant coefficients: `q_m = (Mᵀ)^m l` does not depend on the end
/// time, so one forward pass per direction with prefix sums serves all
/// end times.
fn constant_tube(
    p: &LinearControlProblem,
    scheme: Scheme,
    grid: &Arc<DirectionGrid>,
    m: Matrix2,
    b: Matrix2,
) -> Result<Vec<DiscreteConvexSet>> {
    let (k_outer, n_inner, h) = (p.time.k, p.time.n, p.time.h());
    let n_max = k_outer * n_inner;
    let n_r = grid.len();
    let mut values = vec![vec![0.0; n_r]; k_outer + 1];
    let mut points = vec![vec![Vector2::ZERO; n_r]; k_outer + 1];
    for (k, &l) in grid.directions().iter().enumerate() {
        let mut q = l;
        let mut phi = Matrix2::IDENTITY;
        let (mut sum_s, mut sum_z) = (0.0, Vector2::ZERO);
        let (mut first_s, mut first_z) = (0.0, Vector2::ZERO);
        for mm in 0..=n_max {
            let (s, u) = p.control.support(b.apply_transpose(q));
            let z = phi.apply(b.apply(u));
            sum_s += s;
            sum_z += z;
            if mm == 0 {
                (first_s, first_z) = (s, z);
            }
            if mm % n_inner == 0 {
                let j = mm / n_inner;
                let (tv, tp) = p.target.support(q);
                let (qs, qz) = if mm == 0 {
                    (0.0, Vector2::ZERO)
                } else {
                    match scheme {
                        Scheme::HeunTrapezoid => (
                            h * sum_s - 0.5 * h * (first_s + s),
                            h * sum_z - (0.5 * h) * (first_z + z),
                        ),
                        _ => (h * (sum_s - first_s), h * (sum_z - first_z)),
                    }
                };
                values[j][k] = tv + qs;
                points[j][k] = phi.apply(tp) + qz;
            }
            q = m.apply_transpose(q);
            phi = phi * m;
        }
    }
    values
        .into_iter()
        .zip(points)
        .map(|(v, y)| DiscreteConvexSet::from_parts(grid.clone(), v, y))
        .collect()
}

pub(super) fn tube(
    p: &LinearControlProblem,
    scheme: Scheme,
    grid: &Arc<DirectionGrid>,
) -> Result<Vec<DiscreteConvexSet>> {
    match (p.a_rev.constant(), p.b_rev.constant()) {
        (Some(a), Some(b)) => {
            let m = transition_matrix(
                &TimeMatrixFn::Constant(a),
                p.time.t0,
                p.time.h(),
                scheme.order(),
            )?;
            constant_tube(p, scheme, grid, m, b)
        }
        _ => general_tube(p, scheme, grid),
    }
}

#[cfg(test)]
pub(super) fn tube_from_scratch(
    p: &LinearControlProblem,
    scheme: Scheme,
    grid: &Arc<DirectionGrid>,
) -> Result<Vec<DiscreteConvexSet>> {
    general_tube(p, scheme, grid)
}

fn outer_index(time: &TimeGrid, t: f64) -> Result<usize> {
    let jr = (t - time.t0) / time.dt();
    let j = jr.round();
    if !(j >= 0.0) || (jr - j).abs() > 1e-9 * j.max(1.0) || j as usize > time.k {
        return Err(invalid(format!("t = {t} is not on the outer time grid")));
    }
    Ok(j as usize)
}

/// Reachable set at the outer grid time `t_j`.
pub fn reach_at(
    problem: &LinearControlProblem,
    t_j: f64,
    scheme: Scheme,
    grid: Arc<DirectionGrid>,
) -> Result<DiscreteConvexSet> {
    problem.validate()?;
    if scheme.is_nonlinear() {
        return Err(invalid(format!(
            "scheme {scheme} needs a nonlinear problem"
        )));
    }
    let j = outer_index(&problem.time, t_j)?;
    if j == 0 {
        return DiscreteConvexSet::from_body(grid, &problem.target);
    }
    if scheme == Scheme::EulerDirect {
        let time = TimeGrid {
            tf: problem.time.outer(j),
            k: j,
            ..problem.time
        };
        return direct::tube(&problem.with_time(time), &grid)?
            .pop()
            .ok_or_else(|| invalid("empty tube"));
    }
    let n = j * problem.time.n;
    let nodes = Nodes::new(problem, scheme.order(), n)?;
    let (values, points) = grid
        .directions()
        .iter()
        .map(|&l| {
            let (v, y, _) = sweep(
                &nodes,
                scheme,
                &problem.control,
                &problem.target,
                n,
                l,
                None,
            );
            (v, y)
        })
        .unzip();
    DiscreteConvexSet::from_parts(grid, values, points)
}

pub(super) fn trace(
    p: &LinearControlProblem,
    scheme: Scheme,
    n: usize,
    l: Vector2,
) -> Result<ControlTrace> {
    let nodes = Nodes::new(p, scheme.order(), n)?;
    let mut controls = Vec::with_capacity(n + 1);
    let (_, _, target_point) = sweep(
        &nodes,
        scheme,
        &p.control,
        &p.target,
        n,
        l,
        Some(&mut controls),
    );
    let times = (0..controls.len())
        .map(|i| nodes.t0 + i as f64 * nodes.h)
        .collect();
    Ok(ControlTrace {
        times,
        controls,
        target_point,
        scheme,
        h: nodes.h,
    })
}

/// States of the discrete reversed system driven by a trace, from the
/// target point (index 0) to the supporting point (index `n`).
pub fn replay_states(problem: &Problem, trace: &ControlTrace) -> Result<Vec<Vector2>> {
    let p = problem
        .as_linear()
        .ok_or_else(|| invalid("control traces replay on linear problems only"))?;
    if !matches!(trace.scheme, Scheme::EulerRiemann | Scheme::HeunTrapezoid) {
        return Err(invalid(format!(
            "scheme {} has no control traces",
            trace.scheme
        )));
    }
    let h = p.time.h();
    if (trace.h - h).abs() > 1e-12 * h {
        return Err(invalid("trace step size differs from the problem's"));
    }
    let n = trace.steps();
    let nodes = Nodes::new(p, trace.scheme.order(), n)?;
    let mut x = trace.target_point;
    let mut states = Vec::with_capacity(n + 1);
    states.push(x);
    for i in 0..n {
        let w = weight(trace.scheme, i, n, h);
        x = nodes.m[i].apply(x + w * nodes.b[i].apply(trace.controls[i]));
        states.push(x);
    }
    if trace.scheme == Scheme::HeunTrapezoid && n > 0 {
        x += weight(trace.scheme, n, n, h) * nodes.b[n].apply(trace.controls[n]);
        states[n] = x;
    }
    Ok(states)
}

/// Endpoint of [`replay_states`].
pub fn replay(problem: &Problem, trace: &ControlTrace) -> Result<Vector2> {
    Ok(*replay_states(problem, trace)?
        .last()
        .expect("at least the start state"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::reachset::reach_tube;
    use crate::systems::{example, ScalarFn};

    fn grid(n: usize) -> Arc<DirectionGrid> {
        Arc::new(DirectionGrid::new(n).unwrap())
    }

    fn close(a: Matrix2, b: Matrix2, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn transition_maps() {
        let zero = TimeMatrixFn::Constant(Matrix2::ZERO);
        for order in [1, 2] {
            assert_eq!(
                transition_matrix(&zero, 0.0, 0.1, order).unwrap(),
                Matrix2::IDENTITY
            );
        }
        let a = Matrix2::new(0.0, 1.0, -2.0, -3.0);
        let h = 0.1;
        let expect = Matrix2::IDENTITY + a.scale(h) + (a * a).scale(0.5 * h * h);
        let m = transition_matrix(&TimeMatrixFn::Constant(a), 0.3, h, 2).unwrap();
        assert!(close(m, expect, 1e-15));
        assert!(transition_matrix(&TimeMatrixFn::Constant(a), 0.0, 0.0, 1).is_err());
        let singular = TimeMatrixFn::ScaledColumn {
            base: a,
            scalar: ScalarFn::InvTSquared,
        };
        assert!(matches!(
            transition_matrix(&singular, 0.0, 0.1, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn transition_products_converge_to_fundamental_matrix() {
        // Φ(1,0) = (Ā + 2I)e^{-1} - (Ā + I)e^{-2} for Ā = [[0,1],[-2,-3]].
        let (a, b) = ((-1.0f64).exp(), (-2.0f64).exp());
        let closed = Matrix2::new(2.0 * a - b, a - b, 2.0 * b - 2.0 * a, 2.0 * b - a);
        let reference = Matrix2::new(0.60042, 0.23254, -0.46508, -0.09721);
        assert!(close(closed, reference, 1e-5));
        let a_rev = TimeMatrixFn::Constant(Matrix2::new(0.0, 1.0, -2.0, -3.0));
        for order in [1u8, 2] {
            let mut errs = Vec::new();
            for steps in [10usize, 20, 40, 80, 160, 320] {
                let h = 1.0 / steps as f64;
                let m = transition_matrix(&a_rev, 0.0, h, order).unwrap();
                let prod = (0..steps).fold(Matrix2::IDENTITY, |acc, _| m * acc);
                errs.push((prod - closed).max_abs());
            }
            assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
            let rate = (errs[4] / errs[5]).log2();
            assert!(
                (rate - order as f64).abs() < 0.1,
                "order {order}: rate {rate}"
            );
        }
    }

    #[test]
    fn integrator_is_exact_for_every_scheme() {
        for id in ["ex1-ball-ball", "ex1-box-ball", "ex1-box-origin"] {
            let ex = example(id).unwrap();
            let p = ex.problem.as_linear().unwrap();
            for scheme in [
                Scheme::EulerRiemann,
                Scheme::HeunTrapezoid,
                Scheme::EulerDirect,
            ] {
                let tube = reach_tube(&ex.problem, scheme, grid(64)).unwrap();
                for (j, set) in tube.sets.iter().enumerate() {
                    let t = tube.times[j] - p.time.t0;
                    for (l, hk) in tube.grid().directions().iter().zip(set.support_values()) {
                        let expect = p.target.support(*l).0 + t * p.control.support(*l).0;
                        // Direct Euler is exact in the hull, not necessarily in
                        // the grid sampling of a ball (its supporting points
                        // are vertices of a polygon).
                        let tol = if scheme == Scheme::EulerDirect {
                            1e-3
                        } else {
                            1e-12 * expect.abs().max(1.0)
                        };
                        assert!(
                            (hk - expect).abs() <= tol,
                            "{id} {scheme} j={j}: {hk} vs {expect}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn fast_path_matches_from_scratch() {
        for id in ["ex2a-ball", "ex2b-oscillator", "ex3a", "ex3b", "ex-counter"] {
            let ex = example(id).unwrap();
            let p = ex.problem.as_linear().unwrap();
            for scheme in [Scheme::EulerRiemann, Scheme::HeunTrapezoid] {
                let g = grid(40);
                let fast = tube(p, scheme, &g).unwrap();
                let slow = tube_from_scratch(p, scheme, &g).unwrap();
                for (a, b) in fast.iter().zip(&slow) {
                    for (x, y) in a.support_values().iter().zip(b.support_values()) {
                        assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{id} {scheme}");
                    }
                    for (x, y) in a.supporting_points().iter().zip(b.supporting_points()) {
                        assert!(x.distance(*y) <= 1e-11, "{id} {scheme}");
                    }
                }
            }
        }
    }

    #[test]
    fn reach_at_agrees_with_tube() {
        let ex = example("exn1-invtsq").unwrap();
        let p = ex.problem.as_linear().unwrap();
        let g = grid(30);
        let tube = reach_tube(&ex.problem, Scheme::HeunTrapezoid, g.clone()).unwrap();
        let set = reach_at(p, p.time.outer(37), Scheme::HeunTrapezoid, g.clone()).unwrap();
        assert_eq!(set.support_values(), tube.sets[37].support_values());
        let s0 = reach_at(p, p.time.t0, Scheme::EulerRiemann, g.clone()).unwrap();
        assert!(s0.support_values().iter().all(|v| v.abs() < 1e-15));
        assert!(reach_at(p, 1.05, Scheme::EulerRiemann, g).is_err());
    }

    #[test]
    fn counter_example_support_approaches_closed_form() {
        // The reachable set is the segment (1 - e^{-t})·[-1,1]·(1,-1).
        let ex = example("ex-counter").unwrap();
        let p = ex.problem.as_linear().unwrap();
        let g = grid(5); // contains l = (1, 0)
        let expect = 1.0 - (-1.0f64).exp();
        let mut errs = Vec::new();
        for n in [2usize, 8, 32] {
            let time = TimeGrid::new(0.0, 1.0, 10, n).unwrap();
            let set = reach_at(&p.with_time(time), 1.0, Scheme::HeunTrapezoid, g.clone()).unwrap();
            errs.push((set.support_values()[0] - expect).abs());
        }
        assert!(errs[2] < 1e-6 && errs[2] < errs[0], "{errs:?}");
    }

    #[test]
    fn traces_replay_to_supporting_points() {
        for id in ["ex2a-origin", "ex3a", "exn1-invtsq"] {
            let ex = example(id).unwrap();
            for scheme in [Scheme::EulerRiemann, Scheme::HeunTrapezoid] {
                let tube = reach_tube(&ex.problem, scheme, grid(24)).unwrap();
                for j in [0, 1, tube.steps()] {
                    for k in [0, 7, 23] {
                        let tr = tube.trace(j, k).unwrap();
                        let n = j * ex.problem.time().n;
                        assert_eq!(tr.steps(), n);
                        assert!(tr
                            .controls
                            .iter()
                            .all(|u| ex.problem.control().contains(*u, 1e-12)));
                        let y = replay(&ex.problem, &tr).unwrap();
                        let target = tube.sets[j].supporting_points()[k];
                        assert!(y.distance(target) < 1e-9, "{id} {scheme} j={j} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn heun_self_converges_at_second_order() {
        let ex = example("ex3a").unwrap();
        let p = ex.problem.as_linear().unwrap();
        let g = grid(50);
        let at = |n: usize, scheme| {
            let time = TimeGrid::new(0.0, 1.0, 10, n).unwrap();
            reach_at(&p.with_time(time), 1.0, scheme, g.clone()).unwrap()
        };
        let reference = at(256, Scheme::HeunTrapezoid);
        let gap = |n: usize, scheme| {
            crate::geometry::support_distance(&at(n, scheme), &reference).unwrap()
        };
        let (e4, e8) = (gap(4, Scheme::HeunTrapezoid), gap(8, Scheme::HeunTrapezoid));
        let slope = (e4 / e8).log2();
        assert!((1.6..=2.2).contains(&slope), "slope {slope}");
        let (r4, r8) = (gap(4, Scheme::EulerRiemann), gap(8, Scheme::EulerRiemann));
        assert!(r8 < r4 && (r4 / r8).log2() > 0.7);
    }

    #[test]
    fn adjoint_identity_for_constant_dynamics() {
        let a_rev = TimeMatrixFn::Constant(Matrix2::new(0.0, 1.0, -2.0, -3.0));
        let m = transition_matrix(&a_rev, 0.0, 0.01, 2).unwrap();
        let l = Vector2::new(0.6, 0.8);
        let (mut q, mut fwd) = (l, Matrix2::IDENTITY);
        for _ in 0..100 {
            q = m.apply_transpose(q);
            fwd = m * fwd;
        }
        assert!(q.distance(fwd.apply_transpose(l)) < 1e-12);
    }
}
