use std::sync::Arc;

use serde_json::{json, Value};

use mintime::geometry::{inclusion_margin, support_distance, DirectionGrid, Vector2};
use mintime::harness::{convergence_study, expansion_check, StudyOptions};
use mintime::mtf::{min_time_field, reconstruct_trajectory};
use mintime::reachset::{reach_tube, stopping_index, ReachTube};
use mintime::systems::Problem;

use crate::config::Resolved;
use crate::output::{write_atomic, write_json};
use crate::CliError;

/// Inner polygons of nested sets can miss their successor by chord effects
/// at sharp tips (observed up to ~7e-4 at N_R = 100); only larger
/// deficits are reported as non-monotone inclusion.
const INCLUSION_SLACK: f64 = 1e-3;

fn tube(r: &Resolved) -> Result<ReachTube, CliError> {
    Ok(reach_tube(
        &r.problem,
        r.scheme,
        Arc::new(DirectionGrid::new(r.n_r)?),
    )?)
}

fn summary(command: &str, r: &Resolved, extra: Value) -> Value {
    let mut v = json!({ "command": command, "config": r.config });
    if let (Value::Object(map), Value::Object(more)) = (&mut v, extra) {
        map.extend(more);
    }
    v
}

pub fn reach(r: &Resolved) -> Result<(), CliError> {
    let t = tube(r)?;
    let increments = t
        .sets
        .windows(2)
        .map(|w| support_distance(&w[0], &w[1]))
        .collect::<Result<Vec<_>, _>>()?;
    let margins = t
        .sets
        .windows(2)
        .map(|w| inclusion_margin(&w[0], &w[1]))
        .collect::<Result<Vec<_>, _>>()?;
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let degenerate = t.sets.iter().filter(|s| s.is_degenerate()).count();
    write_atomic(&r.out, "tube.csv", t.to_csv().as_bytes())?;
    write_json(
        &r.out,
        "summary.json",
        &summary(
            "reach",
            r,
            json!({
                "scheme": t.scheme,
                "steps": t.steps(),
                "times": t.times,
                "support_increments": increments,
                "inclusion_margins": margins,
                "monotone_inclusion": min_margin >= -INCLUSION_SLACK,
                "expansion_violations": expansion_check(&t, 0.0)?,
                "degenerate_sets": degenerate,
            }),
        ),
    )?;
    println!(
        "reach: {} sets, min inclusion margin {min_margin:.3e}, {degenerate} degenerate",
        t.sets.len()
    );
    Ok(())
}

pub fn mtf(r: &Resolved) -> Result<(), CliError> {
    let t = tube(r)?;
    let field = min_time_field(&t, &r.grid, r.tol, r.monotone, r.mode)?;
    let max = field
        .values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    write_atomic(&r.out, "field.csv", field.to_csv().as_bytes())?;
    write_json(
        &r.out,
        "summary.json",
        &summary(
            "mtf",
            r,
            json!({ "nodes": field.values.len(), "reached": field.reached(), "max_finite": max, "horizon": field.horizon }),
        ),
    )?;
    println!(
        "mtf: {} of {} nodes reached, max T = {max:.6}",
        field.reached(),
        field.values.len()
    );
    Ok(())
}

pub fn study(r: &Resolved) -> Result<(), CliError> {
    let id = r.config.example.as_deref().ok_or_else(|| {
        CliError::Config("example: a study needs a registered example with an oracle".into())
    })?;
    let ladder = r.config.ladder.as_deref().unwrap_or_default();
    if ladder.is_empty() {
        return Err(CliError::Config(
            "ladder: a study needs at least one rung".into(),
        ));
    }
    let options = StudyOptions {
        n: r.config.n,
        grid: r.grid,
        mode: r.mode,
        tol: Some(r.tol),
        fixed_p: r.config.fixed_p,
        fine: None,
    };
    let s = convergence_study(id, r.scheme, ladder, &options)?;
    write_atomic(&r.out, "study.csv", s.to_csv().as_bytes())?;
    write_atomic(&r.out, "fit.csv", s.fit_record().as_bytes())?;
    write_json(
        &r.out,
        "summary.json",
        &summary("study", r, json!({ "rows": s.rows, "fit": s.fit })),
    )?;
    match &s.fit {
        Some(f) => println!(
            "study: {} rungs, C = {:.5}, p = {:.4}",
            s.rows.len(),
            f.c,
            f.p
        ),
        None => println!("study: {} rung, no fit", s.rows.len()),
    }
    Ok(())
}

pub fn traj(r: &Resolved) -> Result<(), CliError> {
    let [x1, x2] = r
        .config
        .start
        .ok_or_else(|| CliError::Config("start: a trajectory needs a start point".into()))?;
    let t = tube(r)?;
    let traj = reconstruct_trajectory(&t, Vector2::new(x1, x2), r.tol)?;
    write_atomic(&r.out, "trajectory.csv", traj.to_csv().as_bytes())?;
    write_json(
        &r.out,
        "summary.json",
        &summary(
            "traj",
            r,
            json!({
                "duration": traj.duration,
                "endpoint_gap": traj.endpoint_gap,
                "support": traj.support,
                "switch_times": traj.switch_times(),
                "steps": traj.controls.len(),
            }),
        ),
    )?;
    println!(
        "traj: duration {:.6}, {} switches, endpoint gap {:.3e}",
        traj.duration,
        traj.switch_times().len(),
        traj.endpoint_gap
    );
    Ok(())
}

pub fn diag(r: &Resolved) -> Result<(), CliError> {
    let t = tube(r)?;
    let rank = match &r.problem {
        Problem::Linear(p) => Some(p.kalman_rank()?),
        Problem::Nonlinear(_) => None,
    };
    let violations = expansion_check(&t, 0.0)?;
    let stop = stopping_index(&t, r.threshold);
    write_json(
        &r.out,
        "summary.json",
        &summary(
            "diag",
            r,
            json!({
                "kalman_rank": rank,
                "expansion_violations": violations,
                "stopping_index": stop,
                "stopping_time": stop.map(|j| t.times[j]),
            }),
        ),
    )?;
    let rank = rank.map_or("n/a".to_string(), |k| k.to_string());
    let stop = stop.map_or("none".to_string(), |j| {
        format!("j = {j} (t = {})", t.times[j])
    });
    println!(
        "diag: kalman rank {rank}, {} of {} steps not strictly expanding, stopping index {stop}",
        violations.len(),
        t.steps()
    );
    Ok(())
}
