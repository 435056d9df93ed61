//! JSON problem format.
//!
//! ```json
//! {"A": [[0, 1], [0, 0]], "B": [[0], [1]], "reversed": false,
//!  "control": {"type": "interval", "lo": -1, "hi": 1},
//!  "target": {"type": "ball", "center": [0, 0], "radius": 0.05},
//!  "time": {"t0": 0, "tf": 1, "K": 10, "N": 5}, "scalar_fn": "one"}
//! ```
//!
//! `B` may have one or two columns; a one-column `B` is padded with a zero
//! column. Nonlinear problems name registered `dynamics` instead of `A` and
//! `B`.

use serde::{Deserialize, Serialize};

use super::{
    Dynamics, LinearControlProblem, NonlinearProblem, Problem, ScalarFn, TimeGrid, TimeMatrixFn,
};
use crate::error::{invalid, Result};
use crate::geometry::{ConvexBodySpec, Matrix2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Matrix2>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub reversed: bool,
    pub control: ConvexBodySpec,
    pub target: ConvexBodySpec,
    pub time: TimeGrid,
    #[serde(default)]
    pub scalar_fn: ScalarFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<String>,
}

fn parse_b(rows: &[Vec<f64>]) -> Result<Matrix2> {
    if rows.len() != 2 {
        return Err(invalid("B must have two rows"));
    }
    let width = rows[0].len();
    if !(width == 1 || width == 2) || rows[1].len() != width {
        return Err(invalid("B must have one or two columns"));
    }
    let get = |r: usize, c: usize| if c < width { rows[r][c] } else { 0.0 };
    Ok(Matrix2::new(get(0, 0), get(0, 1), get(1, 0), get(1, 1)))
}

impl ProblemJson {
    pub fn to_problem(&self) -> Result<Problem> {
        let problem = if let Some(id) = &self.dynamics {
            Problem::Nonlinear(NonlinearProblem {
                dynamics: Dynamics::from_id(id)?,
                control: self.control,
                target: self.target,
                time: self.time,
            })
        } else {
            let a = self
                .a
                .ok_or_else(|| invalid("linear problem needs matrix A"))?;
            let b = parse_b(
                self.b
                    .as_deref()
                    .ok_or_else(|| invalid("linear problem needs matrix B"))?,
            )?;
            let (a_rev, b_rev) = if self.reversed { (a, b) } else { (-a, -b) };
            let b_rev = match self.scalar_fn {
                ScalarFn::One => TimeMatrixFn::Constant(b_rev),
                scalar => TimeMatrixFn::ScaledColumn {
                    base: b_rev,
                    scalar,
                },
            };
            Problem::Linear(LinearControlProblem {
                a_rev: TimeMatrixFn::Constant(a_rev),
                b_rev,
                control: self.control,
                target: self.target,
                time: self.time,
            })
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn from_problem(problem: &Problem) -> Result<Self> {
        Ok(match problem {
            Problem::Linear(p) => {
                let a = p
                    .a_rev
                    .constant()
                    .ok_or_else(|| invalid("time-varying A has no JSON form"))?;
                let b = p.b_rev.base();
                ProblemJson {
                    a: Some(a),
                    b: Some(b.to_rows().iter().map(|r| r.to_vec()).collect()),
                    reversed: true,
                    control: p.control,
                    target: p.target,
                    time: p.time,
                    scalar_fn: p.b_rev.scalar(),
                    dynamics: None,
                }
            }
            Problem::Nonlinear(p) => ProblemJson {
                a: None,
                b: None,
                reversed: true,
                control: p.control,
                target: p.target,
                time: p.time,
                scalar_fn: ScalarFn::One,
                dynamics: Some(p.dynamics.id().to_string()),
            },
        })
    }
}
