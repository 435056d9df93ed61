//! Worked examples with their default discretizations.

use super::{
    Dynamics, LinearControlProblem, NonlinearProblem, Problem, ScalarFn, TimeGrid, TimeMatrixFn,
};
use crate::error::{Error, Result};
use crate::geometry::{ConvexBodySpec, Matrix2, Vector2};

/// Membership tolerance used unless an example overrides it.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: &'static str,
    pub summary: &'static str,
    pub problem: Problem,
    /// Default number of grid directions.
    pub n_r: usize,
    /// Default membership tolerance.
    pub tol: f64,
}

const IDS: &[&str] = &[
    "ex1-ball-ball",
    "ex1-box-ball",
    "ex1-box-origin",
    "ex2a-ball",
    "ex2a-origin",
    "ex2b-oscillator",
    "ex3a",
    "ex3b",
    "ex4-bilinear",
    "ex-counter",
    "exn1-invtsq",
    "exn2-longhorizon",
    "exn4a-origin",
    "exn4b-offset-target",
    "exn5-halfcontrol",
    "exn5-shifted",
];

pub fn example_ids() -> &'static [&'static str] {
    IDS
}

const INTEGRATOR: Matrix2 = Matrix2::ZERO;
const DOUBLE_INTEGRATOR: Matrix2 = Matrix2::new(0.0, 1.0, 0.0, 0.0);
const OSCILLATOR: Matrix2 = Matrix2::new(0.0, 1.0, -1.0, 0.0);
const STABLE: Matrix2 = Matrix2::new(0.0, -1.0, 2.0, 3.0);
const E2: Vector2 = Vector2::new(0.0, 1.0);

fn linear(
    a: Matrix2,
    b: Matrix2,
    control: ConvexBodySpec,
    target: ConvexBodySpec,
    time: (f64, f64, usize, usize),
) -> Problem {
    let time = TimeGrid {
        t0: time.0,
        tf: time.1,
        k: time.2,
        n: time.3,
    };
    let (a_rev, b_rev) = super::reverse_linear(a, b);
    Problem::Linear(LinearControlProblem {
        a_rev: TimeMatrixFn::Constant(a_rev),
        b_rev: TimeMatrixFn::Constant(b_rev),
        control,
        target,
        time,
    })
}

fn entry(id: &'static str, summary: &'static str, problem: Problem, n_r: usize) -> Example {
    Example {
        id,
        summary,
        problem,
        n_r,
        tol: DEFAULT_TOL,
    }
}

/// Looks up a registered example.
pub fn example(id: &str) -> Result<Example> {
    let origin = ConvexBodySpec::point(Vector2::ZERO);
    let unit_ball = ConvexBodySpec::origin_ball(1.0);
    let unit_square = ConvexBodySpec::square(1.0);
    let sym_interval = ConvexBodySpec::interval(-1.0, 1.0);
    let column = |c: Vector2| Matrix2::from_column(c);

    let ex = match id {
        "ex1-ball-ball" => entry(
            "ex1-ball-ball",
            "x' = u, U = unit ball, S = B_0.25(0)",
            linear(
                INTEGRATOR,
                Matrix2::IDENTITY,
                unit_ball,
                ConvexBodySpec::origin_ball(0.25),
                (0.0, 1.0, 10, 2),
            ),
            100,
        ),
        "ex1-box-ball" => entry(
            "ex1-box-ball",
            "x' = u, U = [-1,1]^2, S = B_0.25(0)",
            linear(
                INTEGRATOR,
                Matrix2::IDENTITY,
                unit_square,
                ConvexBodySpec::origin_ball(0.25),
                (0.0, 1.0, 10, 2),
            ),
            100,
        ),
        "ex1-box-origin" => entry(
            "ex1-box-origin",
            "x' = u, U = [-1,1]^2, S = {0}",
            linear(
                INTEGRATOR,
                Matrix2::IDENTITY,
                unit_square,
                origin,
                (0.0, 1.0, 10, 2),
            ),
            100,
        ),
        "ex2a-ball" => entry(
            "ex2a-ball",
            "double integrator, U = [-1,1], S = B_0.05(0)",
            linear(
                DOUBLE_INTEGRATOR,
                column(E2),
                sym_interval,
                ConvexBodySpec::origin_ball(0.05),
                (0.0, 1.0, 10, 5),
            ),
            100,
        ),
        "ex2a-origin" => entry(
            "ex2a-origin",
            "double integrator, U = [-1,1], S = {0}",
            linear(
                DOUBLE_INTEGRATOR,
                column(E2),
                sym_interval,
                origin,
                (0.0, 1.0, 10, 5),
            ),
            100,
        ),
        "ex2b-oscillator" => entry(
            "ex2b-oscillator",
            "harmonic oscillator, U = [-1,1], S = {0}",
            linear(
                OSCILLATOR,
                column(E2),
                sym_interval,
                origin,
                (0.0, 6.0, 40, 5),
            ),
            100,
        ),
        "ex3a" => entry(
            "ex3a",
            "A = [[0,-1],[2,3]], B = [[1,-1],[-1,2]], U = [-1,1]^2, S = {0}",
            linear(
                STABLE,
                Matrix2::new(1.0, -1.0, -1.0, 2.0),
                unit_square,
                origin,
                (0.0, 1.0, 10, 2),
            ),
            50,
        ),
        "ex3b" => entry(
            "ex3b",
            "A = [[0,-1],[2,3]], B = I, U = unit ball, S = {0}",
            linear(
                STABLE,
                Matrix2::IDENTITY,
                unit_ball,
                origin,
                (0.0, 1.0, 10, 2),
            ),
            100,
        ),
        "ex4-bilinear" => entry(
            "ex4-bilinear",
            "x1' = -x2 + x1 u, x2' = x1 + x2 u, U = [-1,1], S = B_0.25(0)",
            Problem::Nonlinear(NonlinearProblem {
                dynamics: Dynamics::Bilinear,
                control: sym_interval,
                target: ConvexBodySpec::origin_ball(0.25),
                time: TimeGrid {
                    t0: 0.0,
                    tf: 1.0,
                    k: 10,
                    n: 2,
                },
            }),
            100,
        ),
        "ex-counter" => Example {
            tol: 1e-6,
            ..entry(
                "ex-counter",
                "non-normal: A = [[0,-1],[2,3]], B = (1,-1)^T, U = [-1,1], S = {0}",
                linear(
                    STABLE,
                    column(Vector2::new(1.0, -1.0)),
                    sym_interval,
                    origin,
                    (0.0, 2.0, 40, 2),
                ),
                100,
            )
        },
        "exn1-invtsq" => {
            // Starts at t0 = 1 so that the factor 1/t^2 stays bounded.
            let a = Matrix2::new(0.0, -1.0, 1.0, 0.0);
            let b_base = column(Vector2::new(0.0, -1.0));
            let (a_rev, b_rev) = super::reverse_linear(a, b_base);
            entry(
                "exn1-invtsq",
                "x1' = -x2, x2' = x1 - u/t^2, U = [-1,1], S = {0}, t in [1, 11]",
                Problem::Linear(LinearControlProblem {
                    a_rev: TimeMatrixFn::Constant(a_rev),
                    b_rev: TimeMatrixFn::ScaledColumn {
                        base: b_rev,
                        scalar: ScalarFn::InvTSquared,
                    },
                    control: sym_interval,
                    target: origin,
                    time: TimeGrid {
                        t0: 1.0,
                        tf: 11.0,
                        k: 100,
                        n: 5,
                    },
                }),
                100,
            )
        }
        "exn2-longhorizon" => entry(
            "exn2-longhorizon",
            "ex3a dynamics on [0, 100]",
            linear(
                STABLE,
                Matrix2::new(1.0, -1.0, -1.0, 2.0),
                unit_square,
                origin,
                (0.0, 100.0, 200, 10),
            ),
            50,
        ),
        "exn4a-origin" => entry(
            "exn4a-origin",
            "x1' = x2 + u1, x2' = -x1 + u2, U = unit ball, S = {0}",
            linear(
                OSCILLATOR,
                Matrix2::IDENTITY,
                unit_ball,
                origin,
                (0.0, 3.0, 30, 2),
            ),
            100,
        ),
        "exn4b-offset-target" => entry(
            "exn4b-offset-target",
            "x1' = x2 + u1, x2' = -x1 + u2, U = unit ball, S = {(2,2)}",
            linear(
                OSCILLATOR,
                Matrix2::IDENTITY,
                unit_ball,
                ConvexBodySpec::point(Vector2::new(2.0, 2.0)),
                (0.0, 3.0, 30, 2),
            ),
            100,
        ),
        "exn5-halfcontrol" => entry(
            "exn5-halfcontrol",
            "double integrator, U = [0,1], S = {0}",
            linear(
                DOUBLE_INTEGRATOR,
                column(E2),
                ConvexBodySpec::interval(0.0, 1.0),
                origin,
                (0.0, 1.0, 10, 5),
            ),
            100,
        ),
        "exn5-shifted" => entry(
            "exn5-shifted",
            "double integrator, U = [1,2], S = {0}",
            linear(
                DOUBLE_INTEGRATOR,
                column(E2),
                ConvexBodySpec::interval(1.0, 2.0),
                origin,
                (0.0, 1.0, 10, 5),
            ),
            100,
        ),
        other => return Err(Error::NotFound(format!("unknown example '{other}'"))),
    };
    Ok(ex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::ProblemJson;

    #[test]
    fn every_id_resolves_and_validates() {
        for id in example_ids() {
            let ex = example(id).unwrap();
            assert_eq!(ex.id, *id);
            ex.problem.validate().unwrap();
        }
        assert!(matches!(example("nope"), Err(Error::NotFound(_))));
    }

    #[test]
    fn box_origin_defaults() {
        let ex = example("ex1-box-origin").unwrap();
        let p = ex.problem.as_linear().unwrap();
        assert_eq!(p.a_rev.constant().unwrap().max_abs(), 0.0);
        assert_eq!(
            p.b_rev.constant().unwrap(),
            Matrix2::new(-1.0, 0.0, 0.0, -1.0)
        );
        assert_eq!(p.control, ConvexBodySpec::square(1.0));
        assert_eq!(p.target, ConvexBodySpec::point(Vector2::ZERO));
        assert_eq!(
            p.time,
            TimeGrid {
                t0: 0.0,
                tf: 1.0,
                k: 10,
                n: 2
            }
        );
    }

    #[test]
    fn double_integrator_ball() {
        let p = example("ex2a-ball").unwrap().problem;
        let p = p.as_linear().unwrap();
        assert_eq!(p.target, ConvexBodySpec::origin_ball(0.05));
        assert_eq!(
            p.effective_input(0.0).unwrap().column(0),
            Vector2::new(0.0, -1.0)
        );
        assert_eq!((p.time.tf, p.time.n), (1.0, 5));
    }

    #[test]
    fn oscillator_defaults() {
        let ex = example("ex2b-oscillator").unwrap();
        let t = ex.problem.time();
        assert_eq!((t.tf, t.k, t.n, ex.n_r), (6.0, 40, 5, 100));
    }

    #[test]
    fn counter_example_is_not_normal() {
        let ex = example("ex-counter").unwrap();
        assert_eq!(ex.problem.as_linear().unwrap().kalman_rank().unwrap(), 1);
        assert_eq!(ex.tol, 1e-6);
        for id in [
            "ex1-box-origin",
            "ex1-ball-ball",
            "ex2a-ball",
            "ex2a-origin",
            "ex2b-oscillator",
            "ex3a",
        ] {
            let rank = example(id)
                .unwrap()
                .problem
                .as_linear()
                .unwrap()
                .kalman_rank()
                .unwrap();
            assert_eq!(rank, 2, "{id}");
        }
    }

    #[test]
    fn registry_round_trips_through_json() {
        for id in example_ids() {
            let p = example(id).unwrap().problem;
            let json = serde_json::to_string(&ProblemJson::from_problem(&p).unwrap()).unwrap();
            let back: ProblemJson = serde_json::from_str(&json).unwrap();
            assert_eq!(back.to_problem().unwrap(), p, "{id}");
        }
    }
}
