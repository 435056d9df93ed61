//! Fully discrete minimum time function and open-loop trajectories.
//!
//! A node `x` gets the first outer time whose reachable set covers it. In
//! interpolated mode the time is refined inside the covering step by the
//! smallest Minkowski interpolation parameter between consecutive sets that
//! still contains `x`. Times are durations, i.e. measured from `t0`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::csvfmt::num;
use crate::error::{invalid, Error, Result};
use crate::geometry::{min_lambda_membership, Vector2};
use crate::reachset::{replay_states, ReachTube};

/// Uniform test grid on a rectangle, nodes `min + i·dx` up to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub dx: f64,
}

impl Default for SpatialGrid {
    fn default() -> Self {
        SpatialGrid {
            x1: [-1.0, 1.0],
            x2: [-1.0, 1.0],
            dx: 0.02,
        }
    }
}

impl SpatialGrid {
    pub fn new(x1: [f64; 2], x2: [f64; 2], dx: f64) -> Result<Self> {
        let g = SpatialGrid { x1, x2, dx };
        g.validate()?;
        Ok(g)
    }

    /// `[-r, r]^2` with step `dx`.
    pub fn square(r: f64, dx: f64) -> Result<Self> {
        Self::new([-r, r], [-r, r], dx)
    }

    pub fn validate(&self) -> Result<()> {
        let ok_range = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !(self.dx > 0.0) || !self.dx.is_finite() || !ok_range(self.x1) || !ok_range(self.x2) {
            return Err(invalid("spatial grid needs finite bounds and dx > 0"));
        }
        Ok(())
    }

    fn count(range: [f64; 2], dx: f64) -> usize {
        // Tolerate rounding in (max - min) / dx.
        ((range[1] - range[0]) / dx + 1e-9).floor() as usize + 1
    }

    /// Number of nodes along each axis.
    pub fn dims(&self) -> (usize, usize) {
        (Self::count(self.x1, self.dx), Self::count(self.x2, self.dx))
    }

    pub fn len(&self) -> usize {
        let (n1, n2) = self.dims();
        n1 * n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, i1: usize, i2: usize) -> Vector2 {
        Vector2::new(
            self.x1[0] + i1 as f64 * self.dx,
            self.x2[0] + i2 as f64 * self.dx,
        )
    }

    /// All nodes, `x1` varying fastest.
    pub fn nodes(&self) -> Vec<Vector2> {
        let (n1, n2) = self.dims();
        (0..n2)
            .flat_map(|i2| (0..n1).map(move |i1| self.node(i1, i2)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldMode {
    Interpolated,
    Discrete,
}

impl std::str::FromStr for FieldMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interpolated" => Ok(FieldMode::Interpolated),
            "discrete" => Ok(FieldMode::Discrete),
            other => Err(invalid(format!("unknown field mode '{other}'"))),
        }
    }
}

/// Minimum time values on a spatial grid; `+∞` where the tube does not
/// reach.
#[derive(Debug, Clone, PartialEq)]
pub struct MinTimeField {
    pub grid: SpatialGrid,
    /// Node values in [`SpatialGrid::nodes`] order.
    pub values: Vec<f64>,
    pub mode: FieldMode,
    pub monotone: bool,
    /// Duration `t_K - t0` covered by the tube.
    pub horizon: f64,
}

impl MinTimeField {
    pub fn value(&self, i1: usize, i2: usize) -> f64 {
        self.values[i2 * self.grid.dims().0 + i1]
    }

    /// Number of nodes with a finite value.
    pub fn reached(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }

    /// CSV `(x1, x2, T)` with `inf` for unreachable nodes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,T\n");
        for (x, v) in self.grid.nodes().iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{}", num(x.x1), num(x.x2), num(*v));
        }
        out
    }
}

/// Smallest `j` with `x ∈ sets[j]`. The scan tests every set in ascending
/// order and never assumes nesting, so it serves monotone and non-monotone
/// tubes alike.
pub fn covering_index(tube: &ReachTube, x: Vector2, tol: f64) -> Option<usize> {
    tube.sets.iter().position(|s| s.contains(x, tol))
}

/// Minimum time of a single point. `monotone` only gates interpolation,
/// which presumes nested sets.
pub fn min_time_at(
    tube: &ReachTube,
    x: Vector2,
    tol: f64,
    monotone: bool,
    mode: FieldMode,
) -> Result<f64> {
    if mode == FieldMode::Interpolated && !monotone {
        return Err(invalid("interpolated values need a monotone tube"));
    }
    let Some(j) = covering_index(tube, x, tol) else {
        return Ok(f64::INFINITY);
    };
    let t0 = tube.times[0];
    if j == 0 {
        return Ok(0.0);
    }
    match mode {
        FieldMode::Discrete => Ok(tube.times[j] - t0),
        FieldMode::Interpolated => {
            let lambda =
                min_lambda_membership(&tube.sets[j - 1], &tube.sets[j], x, tol)?.unwrap_or(1.0);
            Ok(tube.times[j - 1] - t0 + tube.dt * lambda)
        }
    }
}

/// Evaluates the minimum time function of `tube` at every node of `grid`.
pub fn min_time_field(
    tube: &ReachTube,
    grid: &SpatialGrid,
    tol: f64,
    monotone: bool,
    mode: FieldMode,
) -> Result<MinTimeField> {
    grid.validate()?;
    if mode == FieldMode::Interpolated && !monotone {
        return Err(invalid("interpolated values need a monotone tube"));
    }
    let values = grid
        .nodes()
        .into_iter()
        .map(|x| min_time_at(tube, x, tol, monotone, mode))
        .collect::<Result<_>>()?;
    Ok(MinTimeField {
        grid: *grid,
        values,
        mode,
        monotone,
        horizon: tube.times[tube.steps()] - tube.times[0],
    })
}

/// A discrete open-loop trajectory of the reversed system, from the target
/// (`states[0]`) to the start point (`states[end]`).
///
/// `times` are reversed times measured from the target, so the forward
/// system passes `states[i]` at time `duration - times[i]`. `controls[i]` is
/// the control at the node `times[i]`; it is held on the step that follows.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector2>,
    pub controls: Vec<Vector2>,
    pub duration: f64,
    /// Distance between the last state and the requested start point.
    pub endpoint_gap: f64,
    /// Outer index and direction index of the selected supporting point.
    pub support: Option<(usize, usize)>,
}

impl Trajectory {
    /// Forward times at which the control changes, in increasing order.
    pub fn switch_times(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .controls
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].distance(w[1]) > 1e-12)
            .map(|(i, _)| self.duration - self.times[i + 1])
            .collect();
        out.reverse();
        out
    }

    /// CSV `(t, x1, x2, u1, u2)` in forward time; the last row repeats the
    /// final control.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x1,x2,u1,u2\n");
        for i in (0..self.states.len()).rev() {
            let x = self.states[i];
            // Forward step from node i back towards the target uses the
            // control of the reversed step ending at node i.
            let u = if self.controls.is_empty() {
                Vector2::ZERO
            } else {
                self.controls[i.saturating_sub(1).min(self.controls.len() - 1)]
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                num(self.duration - self.times[i]),
                num(x.x1),
                num(x.x2),
                num(u.x1),
                num(u.x2)
            );
        }
        out
    }
}

/// Reconstructs an open-loop time-optimal trajectory ending at `x`.
///
/// The supporting point whose constraint `⟨l^k, x⟩ - h_k` is most active at
/// the first covering time is followed; for `x` between grid directions the
/// trajectory ends at a nearby boundary point and the gap is reported.
pub fn reconstruct_trajectory(tube: &ReachTube, x: Vector2, tol: f64) -> Result<Trajectory> {
    let j = covering_index(tube, x, tol).ok_or_else(|| {
        Error::NotReachable(format!(
            "({}, {}) is not reached by t = {}",
            x.x1,
            x.x2,
            tube.times[tube.steps()]
        ))
    })?;
    if j == 0 {
        return Ok(Trajectory {
            times: vec![0.0],
            states: vec![x],
            controls: Vec::new(),
            duration: 0.0,
            endpoint_gap: 0.0,
            support: None,
        });
    }
    let set = &tube.sets[j];
    let k = tube
        .grid()
        .directions()
        .iter()
        .zip(set.support_values())
        .map(|(l, hk)| l.dot(x) - hk)
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .expect("direction grid is nonempty");
    let trace = tube.trace(j, k).ok_or_else(|| {
        Error::InvalidState(format!("scheme {} records no control traces", tube.scheme))
    })?;
    let states = replay_states(&tube.problem, &trace)?;
    let t0 = tube.times[0];
    let times = (0..states.len()).map(|i| i as f64 * trace.h).collect();
    let end = *states.last().expect("replay yields states");
    Ok(Trajectory {
        times,
        states,
        controls: trace.controls,
        duration: tube.times[j] - t0,
        endpoint_gap: end.distance(x),
        support: Some((j, k)),
    })
}
