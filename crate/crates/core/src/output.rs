//! CSV and JSON result files.
//!
//! Throughput is written in Mbps, latency in ms and feeder capacity in Mbps.
//! Every real number goes through [`fmt_sig`], so files are byte-stable and
//! independent of the process locale.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Result, SimError};
use crate::harness::{KpiStats, RunRecord, SweepResult};
use crate::scenario::Scenario;

pub const RAW_HEADER: &str = "mode,k_users,p_f,eta_cfg,feeder_mbps,run,seed,per_user_thr_mbps,latency_ms,prr,fallback_ratio,active_gnbs,n_unserved";

pub const AGGREGATE_HEADER: &str = "mode,k_users,p_f,eta_cfg,feeder_mbps,per_user_thr_mbps_mean,per_user_thr_mbps_std,latency_ms_mean,latency_ms_std,prr_mean,prr_std,fallback_ratio_mean,fallback_ratio_std,active_gnbs_mean,active_gnbs_std,n_unserved_mean,n_unserved_std,runs";

/// Formats `v` with 6 significant digits, like C's `%g`: fixed notation for
/// decimal exponents in [-4, 6), scientific otherwise, trailing zeros
/// removed.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn point_columns(out: &mut String, s: &Scenario) {
    write!(
        out,
        "{},{},{},{},{}",
        s.mode,
        s.n_users,
        fmt_sig(s.disaster.p_f),
        fmt_sig(s.disaster.eta_cfg),
        fmt_sig(s.ntn.feeder_capacity_bps / 1e6)
    )
    .unwrap();
}

/// Appends one raw row per run.
pub fn push_raw_rows(out: &mut String, scenario: &Scenario, records: &[RunRecord]) {
    for r in records {
        let k = &r.kpis;
        point_columns(out, scenario);
        writeln!(
            out,
            ",{},{},{},{},{},{},{},{}",
            r.run,
            r.seed,
            fmt_sig(k.per_user_throughput_bps / 1e6),
            fmt_sig(k.mean_latency_s * 1e3),
            fmt_sig(k.prr),
            fmt_sig(k.fallback_ratio),
            k.n_active_gnbs,
            k.n_unserved
        )
        .unwrap();
    }
}

/// Per-run CSV of a single operating point.
pub fn raw_csv(scenario: &Scenario, records: &[RunRecord]) -> String {
    let mut out = format!("{RAW_HEADER}\n");
    push_raw_rows(&mut out, scenario, records);
    out
}

/// Per-run CSV covering every point of every sweep, in sweep order.
pub fn sweeps_raw_csv(results: &[SweepResult]) -> String {
    let mut out = format!("{RAW_HEADER}\n");
    for r in results {
        for p in &r.points {
            push_raw_rows(&mut out, &p.scenario, &p.runs);
        }
    }
    out
}

/// One row of per-point mean/std statistics.
pub fn push_aggregate_row(out: &mut String, scenario: &Scenario, s: &KpiStats) {
    point_columns(out, scenario);
    let pairs = [
        (s.per_user_throughput_bps, 1e-6),
        (s.mean_latency_s, 1e3),
        (s.prr, 1.0),
        (s.fallback_ratio, 1.0),
        (s.n_active_gnbs, 1.0),
        (s.n_unserved, 1.0),
    ];
    for (stat, scale) in pairs {
        write!(out, ",{},{}", fmt_sig(stat.mean * scale), fmt_sig(stat.std * scale)).unwrap();
    }
    writeln!(out, ",{}", s.runs).unwrap();
}

pub fn aggregate_csv(result: &SweepResult) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for p in &result.points {
        push_aggregate_row(&mut out, &p.scenario, &p.stats);
    }
    out
}

#[derive(Serialize)]
struct PointSummary<'a> {
    mode: String,
    value: Option<f64>,
    k_users: u32,
    p_f: f64,
    eta_cfg: f64,
    feeder_capacity_bps: f64,
    stats: &'a KpiStats,
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    preset: Option<&'a str>,
    parameter: Option<String>,
    config: &'a RunConfig,
    points: Vec<PointSummary<'a>>,
}

fn point_summary<'a>(s: &Scenario, value: Option<f64>, stats: &'a KpiStats) -> PointSummary<'a> {
    PointSummary {
        mode: s.mode.to_string(),
        value,
        k_users: s.n_users,
        p_f: s.disaster.p_f,
        eta_cfg: s.disaster.eta_cfg,
        feeder_capacity_bps: s.ntn.feeder_capacity_bps,
        stats,
    }
}

/// JSON summary of a single-point run, embedding the resolved configuration.
pub fn run_summary_json(config: &RunConfig, stats: &KpiStats) -> String {
    let summary = Summary {
        command: "run",
        preset: None,
        parameter: None,
        config,
        points: vec![point_summary(&config.scenario(), None, stats)],
    };
    serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n"
}

/// JSON summary of a sweep (all modes), embedding the resolved configuration.
pub fn sweep_summary_json(config: &RunConfig, preset: Option<&str>, results: &[SweepResult]) -> String {
    let summary = Summary {
        command: "sweep",
        preset,
        parameter: results.first().map(|r| r.parameter.to_string()),
        config,
        points: results
            .iter()
            .flat_map(|r| r.points.iter().map(|p| point_summary(&p.scenario, Some(p.value), &p.stats)))
            .collect(),
    };
    serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n"
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| SimError::io(path, e))
}
