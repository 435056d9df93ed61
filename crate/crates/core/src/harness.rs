//! Error measurement against oracles, convergence-order fits and the
//! structural diagnostics of a tube.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::csvfmt::num;
use crate::error::{invalid, Result};
use crate::geometry::{inclusion_margin, DirectionGrid};
use crate::mtf::{min_time_field, FieldMode, MinTimeField, SpatialGrid};
use crate::oracle::{FineParams, Oracle, BRUTE_FORCE_IDS};
use crate::reachset::{reach_tube, ReachTube, Scheme};
use crate::systems::{example, TimeGrid};

/// Slack for the `T_true ≤ horizon` test.
const HORIZON_SLACK: f64 = 1e-12;

/// Sup-norm error of a field against an oracle.
///
/// Every node lands in exactly one of the four tallies, so they add up to
/// the grid size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub linf: f64,
    /// Nodes where both values are finite and the true time is within the
    /// horizon.
    pub compared: usize,
    /// Nodes where both values are infinite.
    pub skipped_infinite: usize,
    /// Nodes where exactly one side is infinite, ignoring nodes beyond the
    /// horizon.
    pub finite_mismatches: usize,
    /// Nodes whose true time is finite but exceeds the horizon.
    pub beyond_horizon: usize,
}

/// Compares `field` with the oracle of example `id`.
pub fn linf_error(field: &MinTimeField, id: &str) -> Result<ErrorReport> {
    linf_error_with(field, &Oracle::for_example(id, None)?)
}

/// Compares `field` with an already built oracle.
pub fn linf_error_with(field: &MinTimeField, oracle: &Oracle) -> Result<ErrorReport> {
    let nodes = field.grid.nodes();
    let truth = nodes
        .iter()
        .map(|&x| oracle.eval(x).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(compare(&field.values, &truth, field.horizon))
}

/// Tallies `approx` against `truth` node by node.
pub fn compare(approx: &[f64], truth: &[f64], horizon: f64) -> ErrorReport {
    let mut report = ErrorReport {
        linf: 0.0,
        compared: 0,
        skipped_infinite: 0,
        finite_mismatches: 0,
        beyond_horizon: 0,
    };
    for (&a, &t) in approx.iter().zip(truth) {
        if t.is_finite() && t > horizon + HORIZON_SLACK {
            report.beyond_horizon += 1;
        } else if a.is_finite() && t.is_finite() {
            report.compared += 1;
            report.linf = report.linf.max((a - t).abs());
        } else if a.is_finite() || t.is_finite() {
            report.finite_mismatches += 1;
        } else {
            report.skipped_infinite += 1;
        }
    }
    report
}

/// Least-squares fit of `e ≈ C h^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub c: f64,
    pub p: f64,
    /// Euclidean norm of the residuals of `ln e`.
    pub residual: f64,
    pub fixed_p: Option<f64>,
}

impl ConvergenceFit {
    pub fn predict(&self, h: f64) -> f64 {
        self.c * h.powf(self.p)
    }
}

/// Fits `ln e = ln C + p ln h`; with `fixed_p` only `C` is fitted.
pub fn fit_order(h: &[f64], e: &[f64], fixed_p: Option<f64>) -> Result<ConvergenceFit> {
    if h.len() != e.len() {
        return Err(invalid("step and error lists differ in length"));
    }
    if h.len() < 2 {
        return Err(invalid("a fit needs at least two points"));
    }
    if h.iter().chain(e).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(invalid("steps and errors must be positive and finite"));
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let p = match fixed_p {
        Some(p) => p,
        None => {
            let (mx, my) = (mean(&x), mean(&y));
            let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
            if sxx == 0.0 {
                return Err(invalid("all steps are equal"));
            }
            x.iter()
                .zip(&y)
                .map(|(a, b)| (a - mx) * (b - my))
                .sum::<f64>()
                / sxx
        }
    };
    let ln_c = mean(&y.iter().zip(&x).map(|(b, a)| b - p * a).collect::<Vec<_>>());
    let residual = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - ln_c - p * a).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ConvergenceFit {
        c: ln_c.exp(),
        p,
        residual,
        fixed_p,
    })
}

/// Indices `j` where `sets[j + 1]` does not contain `sets[j]` with margin
/// larger than `eps`.
pub fn expansion_check(tube: &ReachTube, eps: f64) -> Result<Vec<usize>> {
    if !(eps >= 0.0) {
        return Err(invalid("eps must be nonnegative"));
    }
    let mut violations = Vec::new();
    for (j, pair) in tube.sets.windows(2).enumerate() {
        if inclusion_margin(&pair[0], &pair[1])? <= eps {
            violations.push(j);
        }
    }
    Ok(violations)
}

/// One discretization of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub h: f64,
    pub n_r: usize,
}

impl Rung {
    pub const fn new(h: f64, n_r: usize) -> Self {
        Rung { h, n_r }
    }
}

/// Settings shared by all rungs of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    /// Inner steps per outer step; the example's default when `None`.
    pub n: Option<usize>,
    pub grid: SpatialGrid,
    pub mode: FieldMode,
    /// Membership tolerance; the example's default when `None`.
    pub tol: Option<f64>,
    /// Fixed order for the fit.
    pub fixed_p: Option<f64>,
    /// Brute-force reference discretization; four times finer than the
    /// finest rung when `None`.
    pub fine: Option<FineParams>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            n: None,
            grid: SpatialGrid::default(),
            mode: FieldMode::Interpolated,
            tol: None,
            fixed_p: None,
            fine: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub h: f64,
    pub n_r: usize,
    pub k: usize,
    pub report: ErrorReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub id: String,
    pub scheme: Scheme,
    pub rows: Vec<StudyRow>,
    /// `None` for single-rung ladders.
    pub fit: Option<ConvergenceFit>,
}

impl Study {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.report.linf).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,N_R,linf,compared,mismatches\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                num(r.h),
                r.n_r,
                num(r.report.linf),
                r.report.compared,
                r.report.finite_mismatches
            );
        }
        out
    }

    /// `C,p,residual` with a single data line; `none` fields without a fit.
    pub fn fit_record(&self) -> String {
        match &self.fit {
            Some(f) => format!(
                "C,p,residual\n{},{},{}\n",
                num(f.c),
                num(f.p),
                num(f.residual)
            ),
            None => "C,p,residual\nnone,none,none\n".to_string(),
        }
    }
}

/// Builds a tube, field and error report for every rung of `ladder` and
/// fits the errors against the steps.
pub fn convergence_study(
    id: &str,
    scheme: Scheme,
    ladder: &[Rung],
    options: &StudyOptions,
) -> Result<Study> {
    if ladder.is_empty() {
        return Err(invalid("empty ladder"));
    }
    let ex = example(id)?;
    let time = ex.problem.time();
    let n = options.n.unwrap_or(time.n);
    let tol = options.tol.unwrap_or(ex.tol);
    let grids = ladder
        .iter()
        .map(|r| TimeGrid::with_step(time.t0, time.tf, r.h, n))
        .collect::<Result<Vec<_>>>()?;

    let oracle = if BRUTE_FORCE_IDS.contains(&id) {
        let fine = match options.fine {
            Some(f) => f,
            None => {
                let h = ladder.iter().map(|r| r.h).fold(f64::INFINITY, f64::min);
                let n_r = ladder.iter().map(|r| r.n_r).max().unwrap_or(ex.n_r);
                FineParams::finer_than(&ex.problem, h, n_r, n)?
            }
        };
        Oracle::for_example(id, Some(fine))?
    } else {
        Oracle::for_example(id, None)?
    };
    let nodes = options.grid.nodes();
    let truth = nodes
        .iter()
        .map(|&x| oracle.eval(x).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;

    // Scans are ascending either way; the flag only unlocks interpolation.
    let monotone = true;
    let mut rows = Vec::with_capacity(ladder.len());
    for (rung, grid_t) in ladder.iter().zip(grids) {
        let problem = ex.problem.with_time(grid_t);
        let tube = reach_tube(&problem, scheme, Arc::new(DirectionGrid::new(rung.n_r)?))?;
        let field = min_time_field(&tube, &options.grid, tol, monotone, options.mode)?;
        rows.push(StudyRow {
            h: grid_t.h(),
            n_r: rung.n_r,
            k: grid_t.k,
            report: compare(&field.values, &truth, field.horizon),
        });
    }
    let fit = if rows.len() >= 2 {
        let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let e: Vec<f64> = rows.iter().map(|r| r.report.linf).collect();
        Some(fit_order(&h, &e, options.fixed_p)?)
    } else {
        None
    };
    Ok(Study {
        id: id.to_string(),
        scheme,
        rows,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LADDER_H: [f64; 5] = [0.04, 0.02, 0.01, 0.005, 0.0025];

    #[test]
    fn fit_recovers_reported_orders() {
        let euler = [0.2951, 0.1862, 0.1332, 0.1132, 0.0683];
        let f = fit_order(&LADDER_H, &euler, None).unwrap();
        assert!(
            (f.c - 1.376).abs() < 1e-2 && (f.p - 0.494).abs() < 1e-2,
            "{f:?}"
        );

        let heun = [0.2265, 0.1180, 0.0122, 0.0062, 0.0062];
        let f = fit_order(&LADDER_H, &heun, Some(1.0)).unwrap();
        assert!((f.c - 2.628).abs() < 2e-2, "{f:?}");
        assert_eq!(f.p, 1.0);

        let e: Vec<f64> = LADDER_H.iter().map(|h| 2.0 * h).collect();
        let f = fit_order(&LADDER_H, &e, None).unwrap();
        assert!((f.c - 2.0).abs() < 1e-12 && (f.p - 1.0).abs() < 1e-12 && f.residual < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_order(&[0.1], &[0.2], None).is_err());
        assert!(fit_order(&[0.1, 0.2], &[0.2], None).is_err());
        assert!(fit_order(&[0.1, 0.2], &[0.0, 0.1], None).is_err());
        assert!(fit_order(&[-0.1, 0.2], &[0.1, 0.1], None).is_err());
        assert!(fit_order(&[0.1, 0.1], &[0.1, 0.2], None).is_err());
    }

    #[test]
    fn compare_tallies_every_node() {
        let inf = f64::INFINITY;
        let r = compare(
            &[0.1, inf, 0.3, inf, 0.5, 2.0],
            &[0.15, inf, inf, 0.2, 0.5, 1.5],
            1.0,
        );
        assert_eq!(
            (
                r.compared,
                r.skipped_infinite,
                r.finite_mismatches,
                r.beyond_horizon
            ),
            (2, 1, 2, 1)
        );
        assert!((r.linf - 0.05).abs() < 1e-15);
    }

    fn tube(id: &str) -> ReachTube {
        let ex = example(id).unwrap();
        let scheme = Scheme::HeunTrapezoid.for_problem(&ex.problem);
        reach_tube(
            &ex.problem,
            scheme,
            Arc::new(DirectionGrid::new(ex.n_r).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn expansion_diagnostics() {
        for id in ["ex1-ball-ball", "ex1-box-ball", "ex1-box-origin"] {
            let t = tube(id);
            assert!(expansion_check(&t, 0.1 * t.dt).unwrap().is_empty(), "{id}");
        }
        let t = tube("ex-counter");
        assert_eq!(
            expansion_check(&t, 0.0).unwrap(),
            (0..t.steps()).collect::<Vec<_>>()
        );

        let t = tube("exn5-halfcontrol");
        assert!(!expansion_check(&t, 0.0).unwrap().is_empty());
        // The true sets are nested and share the origin as a boundary
        // point; the inner polygons only miss by chord effects at the tips.
        for pair in t.sets.windows(2) {
            assert!(inclusion_margin(&pair[0], &pair[1]).unwrap() >= -1e-3);
        }
        assert!(expansion_check(&t, -1.0).is_err());
    }

    #[test]
    fn box_gauge_and_ball_errors() {
        let ex = example("ex1-box-origin").unwrap();
        let p = ex
            .problem
            .with_time(TimeGrid::new(0.0, 1.0, 10, 2).unwrap());
        let t = reach_tube(
            &p,
            Scheme::EulerRiemann,
            Arc::new(DirectionGrid::new(100).unwrap()),
        )
        .unwrap();
        let grid = SpatialGrid::square(1.0, 0.05).unwrap();
        let f = min_time_field(&t, &grid, ex.tol, true, FieldMode::Interpolated).unwrap();
        let r = linf_error(&f, "ex1-box-origin").unwrap();
        assert!(r.linf <= 1e-9, "{r:?}");
        assert_eq!(r.compared, grid.len());

        // Self-test: a field holding the oracle values has zero error.
        let oracle = Oracle::for_example("ex1-ball-ball", None).unwrap();
        let mut exact = f.clone();
        exact.values = grid
            .nodes()
            .iter()
            .map(|&x| oracle.eval(x).unwrap().value)
            .collect();
        assert_eq!(linf_error_with(&exact, &oracle).unwrap().linf, 0.0);
        assert!(linf_error(&f, "exn2-longhorizon").is_err());
    }

    #[test]
    fn single_rung_study_has_no_fit() {
        let options = StudyOptions {
            grid: SpatialGrid::square(1.0, 0.1).unwrap(),
            ..StudyOptions::default()
        };
        let s = convergence_study(
            "ex1-ball-ball",
            Scheme::EulerRiemann,
            &[Rung::new(0.05, 50)],
            &options,
        )
        .unwrap();
        assert_eq!(s.rows.len(), 1);
        assert!(s.fit.is_none());
        assert!(s.fit_record().contains("none"));
        assert_eq!(s.to_csv().lines().count(), 2);
        assert!(convergence_study("ex1-ball-ball", Scheme::EulerRiemann, &[], &options).is_err());
    }
}
