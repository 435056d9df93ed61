//! Control problems: time-reversed dynamics, control and target sets, time
//! grids, and the registry of worked examples.

mod json;
mod registry;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ConvexBodySpec, Matrix2, Vector2};

pub use json::ProblemJson;
pub use registry::{example, example_ids, Example, DEFAULT_TOL};

/// Registered scalar time functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ScalarFn {
    #[default]
    #[serde(rename = "one")]
    One,
    #[serde(rename = "inv-t-squared")]
    InvTSquared,
}

impl ScalarFn {
    pub fn eval(self, t: f64) -> Result<f64> {
        match self {
            ScalarFn::One => Ok(1.0),
            ScalarFn::InvTSquared => {
                if t == 0.0 || !t.is_finite() {
                    Err(Error::Domain(format!("1/t^2 is undefined at t = {t}")))
                } else {
                    Ok(1.0 / (t * t))
                }
            }
        }
    }
}

/// A matrix-valued function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeMatrixFn {
    Constant(Matrix2),
    ScaledColumn { base: Matrix2, scalar: ScalarFn },
}

impl TimeMatrixFn {
    #[inline]
    pub fn at(&self, t: f64) -> Result<Matrix2> {
        match *self {
            TimeMatrixFn::Constant(m) => Ok(m),
            TimeMatrixFn::ScaledColumn { base, scalar } => Ok(base.scale(scalar.eval(t)?)),
        }
    }

    /// The constant value, if the function does not depend on time.
    pub fn constant(&self) -> Option<Matrix2> {
        match *self {
            TimeMatrixFn::Constant(m) => Some(m),
            TimeMatrixFn::ScaledColumn {
                base,
                scalar: ScalarFn::One,
            } => Some(base),
            TimeMatrixFn::ScaledColumn { .. } => None,
        }
    }

    pub fn base(&self) -> Matrix2 {
        match *self {
            TimeMatrixFn::Constant(m) | TimeMatrixFn::ScaledColumn { base: m, .. } => m,
        }
    }

    pub fn scalar(&self) -> ScalarFn {
        match *self {
            TimeMatrixFn::Constant(_) => ScalarFn::One,
            TimeMatrixFn::ScaledColumn { scalar, .. } => scalar,
        }
    }
}

/// Outer grid `t_j = t0 + j Δt`, `j = 0..K`, each outer step split into `N`
/// inner steps of size `h = Δt / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub tf: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, tf: f64, k: usize, n: usize) -> Result<Self> {
        let g = TimeGrid { t0, tf, k, n };
        g.validate()?;
        Ok(g)
    }

    /// Grid on `[t0, tf]` with inner step `h` and `n` inner steps per outer
    /// step; `(tf - t0) / (n h)` has to be an integer.
    pub fn with_step(t0: f64, tf: f64, h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || n == 0 {
            return Err(invalid("step size must be positive and N >= 1"));
        }
        let k_real = (tf - t0) / (n as f64 * h);
        let k = k_real.round();
        if k < 1.0 || (k - k_real).abs() > 1e-9 * k.max(1.0) {
            return Err(invalid(format!(
                "N*h = {} does not divide the horizon {}",
                n as f64 * h,
                tf - t0
            )));
        }
        Self::new(t0, tf, k as usize, n)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t0.is_finite() || !self.tf.is_finite() || !(self.tf > self.t0) {
            return Err(invalid("time grid needs finite t0 < tf"));
        }
        if self.k == 0 || self.n == 0 {
            return Err(invalid("time grid needs K >= 1 and N >= 1"));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.tf - self.t0) / self.k as f64
    }

    pub fn h(&self) -> f64 {
        self.dt() / self.n as f64
    }

    /// Outer time `t_j`.
    pub fn outer(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt()
    }

    /// Inner time `τ_i = t0 + i h`.
    pub fn inner(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h()
    }

    pub fn inner_steps(&self) -> usize {
        self.k * self.n
    }
}

/// `ẋ = Ā(t) x + B̄(t) u` with `u ∈ U`, started in the target `S`.
///
/// The dynamics are stored already time-reversed: reachable sets of this
/// system are the sets of states that can be steered into `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearControlProblem {
    pub a_rev: TimeMatrixFn,
    pub b_rev: TimeMatrixFn,
    pub control: ConvexBodySpec,
    pub target: ConvexBodySpec,
    pub time: TimeGrid,
}

impl LinearControlProblem {
    /// Problem for the forward system `ẋ = A x + B u`.
    pub fn from_forward(
        a: Matrix2,
        b: Matrix2,
        control: ConvexBodySpec,
        target: ConvexBodySpec,
        time: TimeGrid,
    ) -> Result<Self> {
        let (a_rev, b_rev) = reverse_linear(a, b);
        let p = LinearControlProblem {
            a_rev: TimeMatrixFn::Constant(a_rev),
            b_rev: TimeMatrixFn::Constant(b_rev),
            control,
            target,
            time,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.control.validate()?;
        self.target.validate()?;
        self.time.validate()?;
        if !self.a_rev.base().is_finite() || !self.b_rev.base().is_finite() {
            return Err(invalid("system matrices must be finite"));
        }
        Ok(())
    }

    pub fn with_time(&self, time: TimeGrid) -> Self {
        LinearControlProblem {
            time,
            ..self.clone()
        }
    }

    /// `B̄(t)` restricted to the directions the control set spans: a
    /// one-dimensional control enters through its injection column only.
    pub fn effective_input(&self, t: f64) -> Result<Matrix2> {
        let b = self.b_rev.at(t)?;
        Ok(match self.control {
            ConvexBodySpec::Interval1D { column, .. } => Matrix2::from_column(b.apply(column)),
            _ => b,
        })
    }

    /// Kalman rank of the system at `t0` (rank is unaffected by reversal).
    pub fn kalman_rank(&self) -> Result<usize> {
        let t0 = self.time.t0;
        Ok(kalman_rank(self.a_rev.at(t0)?, self.effective_input(t0)?))
    }
}

/// Registered nonlinear dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    /// `ẋ1 = -x2 + x1 u, ẋ2 = x1 + x2 u`.
    Bilinear,
}

impl Dynamics {
    pub fn id(self) -> &'static str {
        match self {
            Dynamics::Bilinear => "ex4-bilinear",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "ex4-bilinear" => Ok(Dynamics::Bilinear),
            other => Err(Error::NotFound(format!("unknown dynamics '{other}'"))),
        }
    }

    #[inline]
    pub fn forward(self, x: Vector2, u: f64) -> Vector2 {
        match self {
            Dynamics::Bilinear => Vector2::new(-x.x2 + x.x1 * u, x.x1 + x.x2 * u),
        }
    }

    /// Time-reversed field `f̄(x, u) = -f(x, u)`.
    #[inline]
    pub fn reversed(self, x: Vector2, u: f64) -> Vector2 {
        match self {
            Dynamics::Bilinear => Vector2::new(x.x2 - x.x1 * u, -x.x1 - x.x2 * u),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearProblem {
    pub dynamics: Dynamics,
    /// One-dimensional control interval.
    pub control: ConvexBodySpec,
    pub target: ConvexBodySpec,
    pub time: TimeGrid,
}

impl NonlinearProblem {
    pub fn validate(&self) -> Result<()> {
        self.control.validate()?;
        self.target.validate()?;
        self.time.validate()?;
        if !matches!(self.control, ConvexBodySpec::Interval1D { .. }) {
            return Err(invalid(
                "nonlinear problems take a one-dimensional control interval",
            ));
        }
        Ok(())
    }

    pub fn control_bounds(&self) -> (f64, f64) {
        match self.control {
            ConvexBodySpec::Interval1D { lo, hi, .. } => (lo, hi),
            _ => (0.0, 0.0),
        }
    }

    pub fn with_time(&self, time: TimeGrid) -> Self {
        NonlinearProblem {
            time,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Linear(LinearControlProblem),
    Nonlinear(NonlinearProblem),
}

impl Problem {
    pub fn time(&self) -> TimeGrid {
        match self {
            Problem::Linear(p) => p.time,
            Problem::Nonlinear(p) => p.time,
        }
    }

    pub fn target(&self) -> ConvexBodySpec {
        match self {
            Problem::Linear(p) => p.target,
            Problem::Nonlinear(p) => p.target,
        }
    }

    pub fn control(&self) -> ConvexBodySpec {
        match self {
            Problem::Linear(p) => p.control,
            Problem::Nonlinear(p) => p.control,
        }
    }

    pub fn with_time(&self, time: TimeGrid) -> Problem {
        match self {
            Problem::Linear(p) => Problem::Linear(p.with_time(time)),
            Problem::Nonlinear(p) => Problem::Nonlinear(p.with_time(time)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Problem::Linear(p) => p.validate(),
            Problem::Nonlinear(p) => p.validate(),
        }
    }

    pub fn as_linear(&self) -> Option<&LinearControlProblem> {
        match self {
            Problem::Linear(p) => Some(p),
            Problem::Nonlinear(_) => None,
        }
    }
}

/// `(Ā, B̄) = (-A, -B)`.
pub fn reverse_linear(a: Matrix2, b: Matrix2) -> (Matrix2, Matrix2) {
    (-a, -b)
}

/// Numerical rank of `[B, AB]` with singular-value threshold
/// `1e-10 * σ_max`.
pub fn kalman_rank(a: Matrix2, b: Matrix2) -> usize {
    let ab = a * b;
    let cols = [b.column(0), b.column(1), ab.column(0), ab.column(1)];
    // Gram matrix of the rows: trace = Σσ², det = Σ_{i<j} cross(c_i, c_j)²
    // (Cauchy-Binet), which stays accurate for nearly rank-one blocks.
    let trace: f64 = cols.iter().map(|c| c.dot(*c)).sum();
    if trace == 0.0 {
        return 0;
    }
    let mut det = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            let c = cols[i].cross(cols[j]);
            det += c * c;
        }
    }
    let g11: f64 = cols.iter().map(|c| c.x1 * c.x1).sum();
    let g22: f64 = cols.iter().map(|c| c.x2 * c.x2).sum();
    let g12: f64 = cols.iter().map(|c| c.x1 * c.x2).sum();
    let half_gap = (0.25 * (g11 - g22).powi(2) + g12 * g12).sqrt();
    let lambda_max = 0.5 * trace + half_gap;
    let lambda_min = det / lambda_max;
    if lambda_min.sqrt() > 1e-10 * lambda_max.sqrt() {
        2
    } else {
        1
    }
}
