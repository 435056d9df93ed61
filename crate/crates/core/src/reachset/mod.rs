//! Set-valued integrators producing reach tubes of the time-reversed system.
//!
//! Linear problems are handled through support functions: for each grid
//! direction the adjoint is swept back to `t0` and the support value of the
//! reachable set is accumulated by a Riemann (order 1) or trapezoid
//! (order 2) quadrature of `δ*(q(τ), B̄(τ)U)`. Direct set-valued Euler and
//! the nonlinear propagator work with vertex clouds instead.

mod direct;
mod linear;
mod nonlinear;

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::csvfmt::num;
use crate::error::{invalid, Error, Result};
use crate::geometry::{support_distance, DirectionGrid, DiscreteConvexSet, Vector2};
use crate::systems::Problem;

pub use linear::{reach_at, replay, replay_states, transition_matrix};
pub use nonlinear::reach_nonlinear;

/// Default number of sampled control values for nonlinear problems.
pub const DEFAULT_N_U: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Riemann sum with Euler transition maps.
    EulerRiemann,
    /// Trapezoid rule with Heun transition maps.
    HeunTrapezoid,
    /// Set-valued Euler iteration on vertex clouds.
    EulerDirect,
    NonlinearEuler,
    NonlinearHeun,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::EulerRiemann,
        Scheme::HeunTrapezoid,
        Scheme::EulerDirect,
        Scheme::NonlinearEuler,
        Scheme::NonlinearHeun,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Scheme::EulerRiemann => "euler-riemann",
            Scheme::HeunTrapezoid => "heun-trapezoid",
            Scheme::EulerDirect => "euler-direct",
            Scheme::NonlinearEuler => "nonlinear-euler",
            Scheme::NonlinearHeun => "nonlinear-heun",
        }
    }

    /// Consistency order of the one-step map.
    pub fn order(self) -> u8 {
        match self {
            Scheme::EulerRiemann | Scheme::EulerDirect | Scheme::NonlinearEuler => 1,
            Scheme::HeunTrapezoid | Scheme::NonlinearHeun => 2,
        }
    }

    pub fn is_nonlinear(self) -> bool {
        matches!(self, Scheme::NonlinearEuler | Scheme::NonlinearHeun)
    }

    /// The scheme of the same order for the other problem class.
    pub fn for_problem(self, problem: &Problem) -> Scheme {
        match (problem, self) {
            (Problem::Nonlinear(_), Scheme::EulerRiemann | Scheme::EulerDirect) => {
                Scheme::NonlinearEuler
            }
            (Problem::Nonlinear(_), Scheme::HeunTrapezoid) => Scheme::NonlinearHeun,
            (Problem::Linear(_), Scheme::NonlinearEuler) => Scheme::EulerRiemann,
            (Problem::Linear(_), Scheme::NonlinearHeun) => Scheme::HeunTrapezoid,
            _ => self,
        }
    }

    fn check(self, problem: &Problem) -> Result<()> {
        let ok = match problem {
            Problem::Linear(_) => !self.is_nonlinear(),
            Problem::Nonlinear(_) => self.is_nonlinear(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "scheme {} does not apply to {} problems",
                self.id(),
                if self.is_nonlinear() {
                    "linear"
                } else {
                    "nonlinear"
                }
            )))
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.id() == s)
            .ok_or_else(|| invalid(format!("unknown scheme '{s}'")))
    }
}

/// Controls selected by the support-function quadrature for one end time
/// and one direction.
///
/// `controls[i]` is the argmax point of `U` at the quadrature node
/// `times[i]` (reversed time). Riemann sums have `n` nodes, trapezoid rules
/// `n + 1`, where `n` is the number of inner steps up to the end time.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrace {
    pub times: Vec<f64>,
    pub controls: Vec<Vector2>,
    /// Supporting point of the target the trace starts from.
    pub target_point: Vector2,
    pub scheme: Scheme,
    pub h: f64,
}

impl ControlTrace {
    /// Number of inner steps covered.
    pub fn steps(&self) -> usize {
        match self.scheme {
            Scheme::HeunTrapezoid => self.controls.len().saturating_sub(1),
            _ => self.controls.len(),
        }
    }
}

/// Reachable sets `R(t_j)`, `j = 0..K`, of the time-reversed system on a
/// shared direction grid. `sets[0]` is the discretized target.
#[derive(Debug, Clone)]
pub struct ReachTube {
    pub problem: Problem,
    pub scheme: Scheme,
    pub sets: Vec<DiscreteConvexSet>,
    pub times: Vec<f64>,
    pub h: f64,
    pub dt: f64,
    grid: Arc<DirectionGrid>,
}

impl ReachTube {
    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    /// Number of outer steps `K`.
    pub fn steps(&self) -> usize {
        self.sets.len() - 1
    }

    /// The tube restricted to `t_0..t_j`.
    pub fn truncated(&self, j: usize) -> ReachTube {
        let j = j.min(self.steps());
        ReachTube {
            sets: self.sets[..=j].to_vec(),
            times: self.times[..=j].to_vec(),
            ..self.clone()
        }
    }

    /// Control trace of the supporting point `y_k` of `sets[j]`.
    ///
    /// Available for the quadrature schemes only; the trace is recomputed
    /// from the problem, which is cheaper than storing all of them.
    pub fn trace(&self, j: usize, k: usize) -> Option<ControlTrace> {
        if j > self.steps() || k >= self.grid.len() {
            return None;
        }
        match (&self.problem, self.scheme) {
            (Problem::Linear(p), Scheme::EulerRiemann | Scheme::HeunTrapezoid) => {
                linear::trace(p, self.scheme, j * p.time.n, self.grid.get(k)).ok()
            }
            _ => None,
        }
    }

    /// CSV with one row `(j, t_j, k, l1, l2, h_k, y1, y2)` per time and
    /// direction; `k` is zero-based.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,t_j,k,l1,l2,h_k,y1,y2\n");
        for (j, (set, &t)) in self.sets.iter().zip(&self.times).enumerate() {
            let dirs = self.grid.directions();
            for (k, ((l, hk), y)) in dirs
                .iter()
                .zip(set.support_values())
                .zip(set.supporting_points())
                .enumerate()
            {
                let _ = writeln!(
                    out,
                    "{j},{},{k},{},{},{},{},{}",
                    num(t),
                    num(l.x1),
                    num(l.x2),
                    num(*hk),
                    num(y.x1),
                    num(y.x2)
                );
            }
        }
        out
    }
}

/// Builds the reach tube of `problem` on its time grid.
///
/// Nonlinear problems use [`DEFAULT_N_U`] control samples and one boundary
/// sample of the target per grid direction.
pub fn reach_tube(
    problem: &Problem,
    scheme: Scheme,
    grid: Arc<DirectionGrid>,
) -> Result<ReachTube> {
    problem.validate()?;
    scheme.check(problem)?;
    match problem {
        Problem::Linear(p) => {
            let sets = match scheme {
                Scheme::EulerDirect => direct::tube(p, &grid)?,
                _ => linear::tube(p, scheme, &grid)?,
            };
            Ok(assemble(problem.clone(), scheme, sets, grid))
        }
        Problem::Nonlinear(p) => {
            let m_b = grid.len();
            reach_nonlinear(p, scheme, grid, DEFAULT_N_U, m_b)
        }
    }
}

fn assemble(
    problem: Problem,
    scheme: Scheme,
    sets: Vec<DiscreteConvexSet>,
    grid: Arc<DirectionGrid>,
) -> ReachTube {
    let time = problem.time();
    ReachTube {
        times: (0..sets.len()).map(|j| time.outer(j)).collect(),
        h: time.h(),
        dt: time.dt(),
        problem,
        scheme,
        sets,
        grid,
    }
}

/// First `j >= 1` at which consecutive sets differ by less than
/// `threshold` in support values. A non-positive threshold is never met.
pub fn stopping_index(tube: &ReachTube, threshold: f64) -> Option<usize> {
    tube.sets
        .windows(2)
        .position(|w| support_distance(&w[0], &w[1]).is_ok_and(|d| d < threshold))
        .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::inclusion_margin;
    use crate::systems::example;

    fn grid(n: usize) -> Arc<DirectionGrid> {
        Arc::new(DirectionGrid::new(n).unwrap())
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.id().parse::<Scheme>().unwrap(), s);
            assert_eq!(
                serde_json::to_string(&s).unwrap(),
                format!("\"{}\"", s.id())
            );
        }
        assert!("rk4".parse::<Scheme>().is_err());
    }

    #[test]
    fn scheme_must_match_problem_class() {
        let lin = example("ex1-box-origin").unwrap().problem;
        let non = example("ex4-bilinear").unwrap().problem;
        assert!(reach_tube(&lin, Scheme::NonlinearEuler, grid(8)).is_err());
        assert!(reach_tube(&non, Scheme::HeunTrapezoid, grid(8)).is_err());
    }

    #[test]
    fn nesting_on_monotone_examples() {
        // At the default 100 directions the inner polygons of the elongated
        // double-integrator sets cut corners by more than one step's growth
        // near their tips; 200 directions resolve them.
        for id in [
            "ex1-ball-ball",
            "ex1-box-ball",
            "ex1-box-origin",
            "ex2a-ball",
            "ex2a-origin",
            "ex3a",
            "ex3b",
        ] {
            let ex = example(id).unwrap();
            for scheme in [Scheme::EulerRiemann, Scheme::HeunTrapezoid] {
                let tube = reach_tube(&ex.problem, scheme, grid(ex.n_r.max(200))).unwrap();
                for (j, w) in tube.sets.windows(2).enumerate() {
                    let margin = inclusion_margin(&w[0], &w[1]).unwrap();
                    assert!(margin > 0.0, "{id} {scheme} j={j}: {margin}");
                    let grows = w[0]
                        .support_values()
                        .iter()
                        .zip(w[1].support_values())
                        .all(|(a, b)| b > a);
                    assert!(grows, "{id} {scheme} j={j}");
                }
            }
        }
    }

    #[test]
    fn stopping_index_cases() {
        let ex = example("ex1-box-origin").unwrap();
        let tube = reach_tube(&ex.problem, Scheme::EulerRiemann, grid(ex.n_r)).unwrap();
        // Increments are Δt·δ*(l, U) >= 0.1 in every direction.
        assert_eq!(stopping_index(&tube, 0.09), None);
        assert_eq!(stopping_index(&tube, 1e6), Some(1));
        assert_eq!(stopping_index(&tube, 0.0), None);

        let ex = example("exn2-longhorizon").unwrap();
        let tube = reach_tube(&ex.problem, Scheme::HeunTrapezoid, grid(ex.n_r)).unwrap();
        let j = stopping_index(&tube, 1e-3).expect("stable system settles");
        assert!(j < tube.steps());
    }

    #[test]
    fn csv_has_one_row_per_time_and_direction() {
        let ex = example("ex1-box-origin").unwrap();
        let tube = reach_tube(&ex.problem, Scheme::EulerRiemann, grid(5)).unwrap();
        let csv = tube.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "j,t_j,k,l1,l2,h_k,y1,y2");
        assert_eq!(lines.len(), 1 + 11 * 5);
        assert!(lines[1].starts_with("0,0.0000000000000000e0,0,"));
    }

    #[test]
    fn truncation_keeps_prefix() {
        let ex = example("ex2a-origin").unwrap();
        let tube = reach_tube(&ex.problem, Scheme::EulerRiemann, grid(20)).unwrap();
        let t = tube.truncated(4);
        assert_eq!(t.steps(), 4);
        assert_eq!(t.sets[4].support_values(), tube.sets[4].support_values());
    }
}
