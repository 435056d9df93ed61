//! Run configuration: JSON file merged with command-line overrides, then
//! resolved against the example registry.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mintime::geometry::DirectionGrid;
use mintime::harness::Rung;
use mintime::mtf::{FieldMode, SpatialGrid};
use mintime::reachset::Scheme;
use mintime::systems::{example, Problem, ProblemJson, TimeGrid, DEFAULT_TOL};

use crate::CliError;

pub const DEFAULT_N_R: usize = 100;
pub const DEFAULT_THRESHOLD: f64 = 1e-3;

/// Everything a run can be configured with. After [`resolve`] every field
/// relevant to the problem is filled in, so the resolved form reproduces
/// the run on its own.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SpatialGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<FieldMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<Rung>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("config: cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config: {}: {e}", path.display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(mut self, other: RunConfig) -> Self {
        // An example and an inline problem exclude each other; the newer wins.
        if other.example.is_some() {
            self.problem = None;
        }
        if other.problem.is_some() {
            self.example = None;
        }
        macro_rules! take {
            ($($f:ident),*) => { $(if other.$f.is_some() { self.$f = other.$f; })* };
        }
        take!(
            example, problem, scheme, n_r, k, n, tf, grid, tol, monotone, mode, threshold, ladder,
            fixed_p, start, out
        );
        self
    }
}

/// A configuration with defaults applied and every value checked.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub problem: Problem,
    pub scheme: Scheme,
    pub n_r: usize,
    pub tol: f64,
    pub grid: SpatialGrid,
    pub monotone: bool,
    pub mode: FieldMode,
    pub threshold: f64,
    pub out: PathBuf,
}

fn bad(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

pub fn resolve(cfg: RunConfig) -> Result<Resolved, CliError> {
    let (base, default_n_r, default_tol) = match (&cfg.example, &cfg.problem) {
        (Some(id), None) => {
            let ex = example(id).map_err(|e| bad("example", e))?;
            (ex.problem, ex.n_r, ex.tol)
        }
        (None, Some(p)) => (
            p.to_problem().map_err(|e| bad("problem", e))?,
            DEFAULT_N_R,
            DEFAULT_TOL,
        ),
        (Some(_), Some(_)) => {
            return Err(bad(
                "example",
                "give either an example or an inline problem, not both",
            ))
        }
        (None, None) => return Err(bad("example", "no example or problem given")),
    };

    let t = base.time();
    let time = TimeGrid::new(
        t.t0,
        cfg.tf.unwrap_or(t.tf),
        cfg.k.unwrap_or(t.k),
        cfg.n.unwrap_or(t.n),
    )
    .map_err(|e| {
        let field = if cfg.tf.is_some() {
            "tf"
        } else if cfg.k.is_some() {
            "k"
        } else {
            "n"
        };
        bad(field, e)
    })?;
    let problem = base.with_time(time);

    let n_r = cfg.n_r.unwrap_or(default_n_r);
    DirectionGrid::new(n_r).map_err(|e| bad("nr", e))?;

    let scheme = cfg
        .scheme
        .unwrap_or_else(|| Scheme::HeunTrapezoid.for_problem(&problem));
    if scheme.is_nonlinear() != matches!(problem, Problem::Nonlinear(_)) {
        return Err(bad(
            "scheme",
            format!("{scheme} does not apply to this problem"),
        ));
    }

    let tol = cfg.tol.unwrap_or(default_tol);
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(bad("tol", "must be a nonnegative number"));
    }
    let monotone = cfg.monotone.unwrap_or(true);
    let mode = cfg.mode.unwrap_or(if monotone {
        FieldMode::Interpolated
    } else {
        FieldMode::Discrete
    });
    if mode == FieldMode::Interpolated && !monotone {
        return Err(bad("mode", "interpolated values need a monotone tube"));
    }
    let grid = cfg.grid.unwrap_or_default();
    grid.validate().map_err(|e| bad("grid", e))?;
    let threshold = cfg.threshold.unwrap_or(DEFAULT_THRESHOLD);
    if !(threshold > 0.0) {
        return Err(bad("threshold", "must be positive"));
    }
    if let Some(ladder) = &cfg.ladder {
        if let Some(r) = ladder.iter().find(|r| !(r.h > 0.0) || r.n_r < 3) {
            return Err(bad(
                "ladder",
                format!("invalid rung (h = {}, N_R = {})", r.h, r.n_r),
            ));
        }
    }
    if let Some(s) = cfg.start {
        if !s.iter().all(|v| v.is_finite()) {
            return Err(bad("start", "must be finite"));
        }
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));

    let config = RunConfig {
        problem: if cfg.example.is_some() {
            None
        } else {
            Some(ProblemJson::from_problem(&problem).map_err(|e| bad("problem", e))?)
        },
        scheme: Some(scheme),
        n_r: Some(n_r),
        k: Some(time.k),
        n: Some(time.n),
        tf: Some(time.tf),
        grid: Some(grid),
        tol: Some(tol),
        monotone: Some(monotone),
        mode: Some(mode),
        threshold: Some(threshold),
        out: Some(out.clone()),
        ..cfg
    };
    Ok(Resolved {
        config,
        problem,
        scheme,
        n_r,
        tol,
        grid,
        monotone,
        mode,
        threshold,
        out,
    })
}
