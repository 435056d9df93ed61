//! Reference minimum time values.
//!
//! Closed forms follow from the explicit reachable sets of the examples;
//! where none is available, a fine HeunTrapezoid tube serves as reference.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ConvexBodySpec, DirectionGrid, Vector2};
use crate::mtf::{min_time_at, FieldMode};
use crate::reachset::{reach_tube, ReachTube, Scheme};
use crate::systems::{example, Problem, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    RootFind,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub provenance: Provenance,
}

/// Examples with a closed-form or root-finding oracle.
pub const CLOSED_FORM_IDS: &[&str] = &[
    "ex1-ball-ball",
    "ex1-box-ball",
    "ex1-box-origin",
    "ex2a-origin",
    "ex3a",
    "ex4-bilinear",
    "ex-counter",
];

/// Examples referenced against a brute-force tube.
pub const BRUTE_FORCE_IDS: &[&str] = &["ex2a-ball", "ex2b-oscillator", "ex3b"];

const ROOT_TOL: f64 = 1e-12;

/// Smallest `t >= 0` with `f(t) >= 0` for nondecreasing `f`, by bracketing
/// and bisection; `None` if `f` stays negative up to `t_max`.
fn first_crossing(f: impl Fn(f64) -> f64, t_max: f64) -> Option<f64> {
    if f(0.0) >= 0.0 {
        return Some(0.0);
    }
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        if hi >= t_max {
            return None;
        }
        hi = (2.0 * hi).min(t_max);
    }
    let mut lo = 0.0;
    while hi - lo > ROOT_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Beyond this reversed time `1 - e^{-t}` rounds to 1.
const SATURATION: f64 = 800.0;

fn closed_form(id: &str, x: Vector2) -> Option<OracleValue> {
    let closed = |value| OracleValue {
        value,
        provenance: Provenance::ClosedForm,
    };
    let rooted = |value: Option<f64>| OracleValue {
        value: value.unwrap_or(f64::INFINITY),
        provenance: Provenance::RootFind,
    };
    Some(match id {
        "ex1-ball-ball" => closed((x.norm() - 0.25).max(0.0)),
        "ex1-box-origin" => closed(x.norm_inf()),
        "ex1-box-ball" => {
            // x ∈ B_0.25 + t·[-1,1]^2  ⇔  dist(x, t·[-1,1]^2) <= 0.25.
            let f = |t: f64| 0.25 - ConvexBodySpec::square(t).distance(x);
            rooted(first_crossing(f, x.norm_inf().max(1.0)))
        }
        "ex2a-origin" => {
            let (x1, x2) = (x.x1, x.x2);
            let sigma = x1 + 0.5 * x2 * x2.abs();
            closed(if sigma > 0.0 {
                x2 + 2.0 * (x1 + 0.5 * x2 * x2).sqrt()
            } else if sigma < 0.0 {
                -x2 + 2.0 * (-x1 + 0.5 * x2 * x2).sqrt()
            } else {
                x2.abs()
            })
        }
        "ex3a" => {
            // R(t) is the parallelogram a(1,-1) + b(1,-2) with
            // |a| <= 1 - e^{-t}, |b| <= (1 - e^{-2t})/2, where
            // a = 2x1 + x2 and b = -(x1 + x2). Both constraints must hold.
            let a = (2.0 * x.x1 + x.x2).abs();
            let b = (x.x1 + x.x2).abs();
            let ta = first_crossing(|t| (1.0 - (-t).exp()) - a, SATURATION);
            let tb = first_crossing(|t| 0.5 * (1.0 - (-2.0 * t).exp()) - b, SATURATION);
            rooted(ta.zip(tb).map(|(ta, tb)| ta.max(tb)))
        }
        "ex4-bilinear" => closed((x.norm() / 0.25).ln().max(0.0)),
        "ex-counter" => {
            // R(t) = (1 - e^{-t})·co{(-1, 1), (1, -1)}.
            let tf = example("ex-counter").ok()?.problem.time().tf;
            let s = 0.5 * (x.x1 - x.x2);
            let on_line = (x.x1 + x.x2).abs() <= 1e-9;
            closed(if on_line && s.abs() <= 1.0 - (-tf).exp() {
                -(1.0 - s.abs()).ln()
            } else {
                f64::INFINITY
            })
        }
        _ => return None,
    })
}

/// Discretization of a brute-force reference tube: inner step `h`,
/// `n_r` directions and `k` outer steps on the problem's horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FineParams {
    pub h: f64,
    pub n_r: usize,
    pub k: usize,
}

impl FineParams {
    /// Four times finer than `(h, n_r)` in both step and directions, with
    /// `n` inner steps per outer step.
    pub fn finer_than(problem: &Problem, h: f64, n_r: usize, n: usize) -> Result<Self> {
        let time = problem.time();
        let fine = TimeGrid::with_step(time.t0, time.tf, h / 4.0, n)?;
        Ok(FineParams {
            h: fine.h(),
            n_r: 4 * n_r,
            k: fine.k,
        })
    }

    fn time_grid(&self, problem: &Problem) -> Result<TimeGrid> {
        let time = problem.time();
        let steps = (time.tf - time.t0) / (self.k as f64 * self.h);
        let n = steps.round();
        if n < 1.0 || (steps - n).abs() > 1e-9 * n {
            return Err(invalid("fine step does not divide the outer step"));
        }
        TimeGrid::new(time.t0, time.tf, self.k, n as usize)
    }
}

/// A HeunTrapezoid tube at fine parameters evaluated with interpolation.
#[derive(Debug, Clone)]
pub struct BruteForce {
    pub tube: ReachTube,
    pub tol: f64,
}

impl BruteForce {
    pub fn new(problem: &Problem, fine: FineParams, tol: f64) -> Result<Self> {
        let problem = problem.with_time(fine.time_grid(problem)?);
        let scheme = Scheme::HeunTrapezoid.for_problem(&problem);
        let grid = Arc::new(DirectionGrid::new(fine.n_r)?);
        let tube = reach_tube(&problem, scheme, grid)?;
        Ok(BruteForce { tube, tol })
    }

    pub fn eval(&self, x: Vector2) -> Result<f64> {
        min_time_at(&self.tube, x, self.tol, true, FieldMode::Interpolated)
    }
}

/// Minimum time of `x` from a fine reference tube.
pub fn brute_force_min_time(problem: &Problem, x: Vector2, fine: FineParams) -> Result<f64> {
    BruteForce::new(problem, fine, crate::systems::DEFAULT_TOL)?.eval(x)
}

/// Reference values for one example, built once and queried per point.
#[derive(Debug, Clone)]
pub enum Oracle {
    ClosedForm(&'static str),
    BruteForce(Box<BruteForce>),
}

impl Oracle {
    /// Closed form where available, otherwise a brute-force tube at `fine`
    /// (default: four times finer than the registry discretization).
    pub fn for_example(id: &str, fine: Option<FineParams>) -> Result<Self> {
        if let Some(&known) = CLOSED_FORM_IDS.iter().find(|&&k| k == id) {
            return Ok(Oracle::ClosedForm(known));
        }
        if !BRUTE_FORCE_IDS.contains(&id) {
            example(id)?;
            return Err(Error::NotFound(format!("no oracle for example '{id}'")));
        }
        let ex = example(id)?;
        let time = ex.problem.time();
        let fine = match fine {
            Some(f) => f,
            None => FineParams::finer_than(&ex.problem, time.h(), ex.n_r, time.n)?,
        };
        Ok(Oracle::BruteForce(Box::new(BruteForce::new(
            &ex.problem,
            fine,
            ex.tol,
        )?)))
    }

    pub fn eval(&self, x: Vector2) -> Result<OracleValue> {
        match self {
            Oracle::ClosedForm(id) => closed_form(id, x)
                .ok_or_else(|| Error::NotFound(format!("no closed form for '{id}'"))),
            Oracle::BruteForce(b) => Ok(OracleValue {
                value: b.eval(x)?,
                provenance: Provenance::BruteForce,
            }),
        }
    }
}

/// Reference minimum time of `x` for a registered example.
///
/// Brute-force examples build their reference tube on every call; use
/// [`Oracle`] to evaluate many points.
pub fn oracle_eval(id: &str, x: Vector2) -> Result<OracleValue> {
    Oracle::for_example(id, None)?.eval(x)
}
