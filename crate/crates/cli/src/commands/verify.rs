use std::fs;
use std::path::Path;

use blemodel::{simulate_discovery, DeviceProfile, SimConfig, SimResult};
use rayon::prelude::*;

use crate::commands::discovery::{estimate, Estimator, PointEstimate};
use crate::error::{CliError, CliResult};
use crate::output::{flag, num, opt, Table};
use crate::VerifyArgs;

pub const HEADER: [&str; 14] = [
    "point",
    "t_a0_s",
    "t_s_s",
    "d_s_s",
    "method",
    "model_latency_s",
    "aborted",
    "sim_trials",
    "sim_truncated",
    "sim_mean_s",
    "sim_std_err_s",
    "rel_error",
    "tolerance",
    "status",
];

pub const TRIAL_HEADER: [&str; 5] = ["trial", "latency_s", "events", "channel", "truncated"];

pub const SUMMARY_HEADER: [&str; 10] = [
    "trials",
    "truncated",
    "mean_s",
    "std_s",
    "std_err_s",
    "min_s",
    "max_s",
    "q05_s",
    "q50_s",
    "q95_s",
];

/// Twelve `(T_a0, T_s, d_s)` points away from coupling peaks: six for the
/// numeric algorithm, three bounded and three continuous.
pub const DEFAULT_GRID: [(f64, f64, f64); 12] = [
    (2.36, 2.56, 1.28),
    (2.76, 2.56, 1.28),
    (1.3, 3.12, 1.28),
    (2.0, 3.12, 1.28),
    (0.9, 3.12, 0.64),
    (1.7, 3.12, 0.64),
    (0.5, 2.56, 1.28),
    (0.1, 3.12, 0.32),
    (1.0, 3.12, 1.28),
    (0.02, 1.28, 1.28),
    (0.05, 1.28, 1.28),
    (0.1, 1.28, 1.28),
];

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCheck {
    pub t_a0: f64,
    pub t_s: f64,
    pub d_s: f64,
    pub model: PointEstimate,
    pub sim: Option<SimResult>,
    pub rel_error: Option<f64>,
    pub status: &'static str,
}

pub fn parse_point(s: &str) -> CliResult<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::usage(format!("point `{s}` is not TA,TS,DS in seconds"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    Ok((v[0], v[1], v[2]))
}

/// Runs model and simulator at every point. Aborted model points are
/// excluded rather than simulated.
pub fn check_points(
    profile: &DeviceProfile,
    points: &[(f64, f64, f64)],
    est: &Estimator,
    trials: usize,
    tolerance: f64,
    seed: u64,
) -> CliResult<Vec<PointCheck>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, &(t_a0, t_s, d_s))| {
            let p = est.params(profile, t_a0, t_s, d_s);
            let model = estimate(profile, &p, est)?;
            if model.aborted {
                return Ok(PointCheck {
                    t_a0,
                    t_s,
                    d_s,
                    model,
                    sim: None,
                    rel_error: None,
                    status: "excluded",
                });
            }
            let cfg = SimConfig {
                max_sim_time: est.max_sim_time,
                ..SimConfig::new(p, trials, seed.wrapping_add(i as u64))
            };
            let sim = simulate_discovery(&cfg)?;
            let rel = (model.latency - sim.summary.mean).abs() / sim.summary.mean;
            Ok(PointCheck {
                t_a0,
                t_s,
                d_s,
                model,
                sim: Some(sim),
                rel_error: Some(rel),
                status: if rel <= tolerance { "pass" } else { "fail" },
            })
        })
        .collect()
}

fn write_trials(dir: &Path, index: usize, sim: &SimResult) -> CliResult<()> {
    let mut trials = Table::new(&TRIAL_HEADER);
    for (i, o) in sim.outcomes.iter().enumerate() {
        trials.push(vec![
            i.to_string(),
            num(o.latency),
            o.events_sent.to_string(),
            o.hit_channel.map(|c| c.number().to_string()).unwrap_or_default(),
            flag(o.truncated),
        ]);
    }
    trials.emit(Some(&dir.join(format!("point_{index:02}_trials.csv"))))?;
    let s = &sim.summary;
    let mut summary = Table::new(&SUMMARY_HEADER);
    summary.push(vec![
        s.trials.to_string(),
        s.truncated.to_string(),
        num(s.mean),
        num(s.std),
        num(s.std_err),
        num(s.min),
        num(s.max),
        num(s.q05),
        num(s.q50),
        num(s.q95),
    ]);
    summary.emit(Some(&dir.join(format!("point_{index:02}_summary.csv"))))
}

pub fn run(profile: &DeviceProfile, a: &VerifyArgs, seed: u64) -> CliResult<Table> {
    let points = if a.points.is_empty() {
        DEFAULT_GRID.to_vec()
    } else {
        a.points
            .iter()
            .map(|s| parse_point(s))
            .collect::<CliResult<_>>()?
    };
    let est = Estimator::from_args(profile, &a.estimator);
    let checks = check_points(profile, &points, &est, a.trials, a.tolerance, seed)?;
    if let Some(dir) = &a.trials_dir {
        fs::create_dir_all(dir)?;
        for (i, c) in checks.iter().enumerate() {
            if let Some(sim) = &c.sim {
                write_trials(dir, i, sim)?;
            }
        }
    }
    let mut table = Table::new(&HEADER);
    for (i, c) in checks.iter().enumerate() {
        let summary = c.sim.as_ref().map(|s| s.summary);
        table.push(vec![
            i.to_string(),
            num(c.t_a0),
            num(c.t_s),
            num(c.d_s),
            c.model.method.to_string(),
            num(c.model.latency),
            flag(c.model.aborted),
            summary.map(|s| s.trials.to_string()).unwrap_or_default(),
            summary.map(|s| s.truncated.to_string()).unwrap_or_default(),
            opt(summary.map(|s| s.mean)),
            opt(summary.map(|s| s.std_err)),
            opt(c.rel_error),
            num(a.tolerance),
            c.status.to_string(),
        ]);
    }
    Ok(table)
}

/// Error when any row of a verify table failed.
pub fn check_strict(table: &Table) -> CliResult<()> {
    let failed: Vec<&str> = table
        .rows
        .iter()
        .filter(|r| r.last().map(String::as_str) == Some("fail"))
        .map(|r| r[0].as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::new(
            "verify_failed",
            format!("points {} exceed the tolerance", failed.join(";")),
        ))
    }
}
