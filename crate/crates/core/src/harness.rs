//! Monte Carlo replication and one-parameter sweeps.
//!
//! Run `r` of sweep point `p` draws every random quantity from streams keyed
//! by `run_seed(master_seed, p, r)`, so results do not depend on the number
//! of worker threads or on scheduling. By default sweeps use common random
//! numbers: every point reuses the streams of point 0, so run `r` sees the
//! same layout, failure draw, user population and shadowing at every value
//! of the swept parameter. Different modes evaluated at the same point share
//! them as well.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fallback::{
    run_disaster_snapshot, run_nominal_ntn, run_nominal_tn, sample_failures, SnapshotKpis,
    SnapshotOutcome,
};
use crate::ntn::{place_constellation, Satellite};
use crate::scenario::{generate_gnb_layout, generate_users, GnbSite, Mode, Scenario, UserTerminal};
use crate::streams::{run_seed, Purpose, RunStreams};
use crate::tn::TnChannel;

/// Everything drawn at random for one run.
#[derive(Debug, Clone)]
pub struct RunGeometry {
    pub gnbs: Vec<GnbSite>,
    pub users: Vec<UserTerminal>,
    pub sats: Vec<Satellite>,
    pub channel: TnChannel,
}

/// Draws layout, failures (disaster mode only), users, shadowing and the
/// constellation from their dedicated streams.
pub fn build_run(scenario: &Scenario, streams: &RunStreams) -> Result<RunGeometry> {
    let mut gnbs = generate_gnb_layout(scenario, &mut streams.rng(Purpose::Layout))?;
    if scenario.mode == Mode::Disaster {
        sample_failures(&mut gnbs, scenario.disaster.p_f, &mut streams.rng(Purpose::Failures));
    }
    let users = generate_users(
        scenario,
        &gnbs,
        &mut streams.rng(Purpose::Users),
        &mut streams.rng(Purpose::Activity),
    );
    let channel = TnChannel::build(&users, &gnbs, &scenario.tn, &mut streams.rng(Purpose::Shadowing))?;
    let sats = place_constellation(
        &scenario.ntn,
        scenario.center(),
        &mut streams.rng(Purpose::Constellation),
    );
    Ok(RunGeometry {
        gnbs,
        users,
        sats,
        channel,
    })
}

/// Runs one snapshot in the scenario's mode.
pub fn run_snapshot(scenario: &Scenario, streams: &RunStreams) -> Result<SnapshotOutcome> {
    let g = build_run(scenario, streams)?;
    match scenario.mode {
        Mode::Tn => run_nominal_tn(scenario, &g.gnbs, &g.users, &g.channel),
        Mode::Ntn => run_nominal_ntn(scenario, &g.users, &g.sats),
        Mode::Disaster => run_disaster_snapshot(scenario, &g.gnbs, &g.users, &g.sats, &g.channel),
    }
}

/// KPIs of one Monte Carlo run with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    pub point: usize,
    pub run: usize,
    pub seed: u64,
    pub kpis: SnapshotKpis,
}

/// Runs `runs` snapshots at sweep point `point`.
pub fn run_point_indexed(scenario: &Scenario, point: usize, runs: u32) -> Result<Vec<RunRecord>> {
    scenario.validate()?;
    (0..runs as usize)
        .into_par_iter()
        .map(|run| {
            let seed = run_seed(scenario.master_seed, point as u64, run as u64);
            let outcome = run_snapshot(scenario, &RunStreams::new(seed))?;
            Ok(RunRecord {
                point,
                run,
                seed,
                kpis: outcome.kpis,
            })
        })
        .collect()
}

/// Runs `runs` independent snapshots of `scenario`.
pub fn run_point(scenario: &Scenario, runs: u32) -> Result<Vec<SnapshotKpis>> {
    Ok(run_point_indexed(scenario, 0, runs)?
        .into_iter()
        .map(|r| r.kpis)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Users,
    FailureProb,
    FeederCapacity,
    Eta,
}

impl SweepParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParameter::Users => "users",
            SweepParameter::FailureProb => "failure_prob",
            SweepParameter::FeederCapacity => "feeder_capacity",
            SweepParameter::Eta => "eta",
        }
    }

    /// `base` with this parameter set to `value` (feeder capacity in bit/s).
    pub fn apply(&self, base: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = base.clone();
        match self {
            SweepParameter::Users => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(SimError::config(
                        "sweep.values",
                        format!("user counts must be positive integers, got {value}"),
                    ));
                }
                s.n_users = value as u32;
            }
            SweepParameter::FailureProb => s.disaster.p_f = value,
            SweepParameter::FeederCapacity => s.ntn.feeder_capacity_bps = value,
            SweepParameter::Eta => s.disaster.eta_cfg = value,
        }
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for SweepParameter {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "users" => Ok(SweepParameter::Users),
            "failure_prob" => Ok(SweepParameter::FailureProb),
            "feeder_capacity" => Ok(SweepParameter::FeederCapacity),
            "eta" => Ok(SweepParameter::Eta),
            other => Err(SimError::config(
                "sweep.parameter",
                format!("unknown parameter `{other}`, expected users, failure_prob, feeder_capacity or eta"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub runs_per_point: u32,
    pub base: Scenario,
    /// Reuse the same run streams at every point. When false each point gets
    /// its own streams.
    pub common_random_numbers: bool,
}

impl SweepSpec {
    pub fn new(parameter: SweepParameter, values: Vec<f64>, runs_per_point: u32, base: Scenario) -> Self {
        Self {
            parameter,
            values,
            runs_per_point,
            base,
            common_random_numbers: true,
        }
    }

    /// Stream index used for point `point`.
    pub fn stream_point(&self, point: usize) -> usize {
        if self.common_random_numbers {
            0
        } else {
            point
        }
    }

    /// Checks the value grid and every substituted scenario.
    pub fn validate(&self) -> Result<Vec<Scenario>> {
        if self.values.is_empty() {
            return Err(SimError::config("sweep.values", "must not be empty"));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SimError::config("sweep.values", "must be strictly ascending"));
        }
        if self.runs_per_point == 0 {
            return Err(SimError::config("sweep.runs_per_point", "must be >= 1"));
        }
        self.values
            .iter()
            .map(|&v| self.parameter.apply(&self.base, v))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation (zero for a single run).
    pub std: f64,
}

impl Stat {
    pub fn from_samples(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Stat { mean: 0.0, std: 0.0 };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, std }
    }
}

/// Per-point statistics of every reported KPI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KpiStats {
    pub sys_throughput_bps: Stat,
    pub per_user_throughput_bps: Stat,
    pub prr: Stat,
    pub mean_latency_s: Stat,
    pub fallback_ratio: Stat,
    pub n_active_gnbs: Stat,
    pub n_unserved: Stat,
    pub runs: usize,
}

impl KpiStats {
    pub fn from_kpis(kpis: &[SnapshotKpis]) -> Self {
        let stat = |f: fn(&SnapshotKpis) -> f64| {
            Stat::from_samples(&kpis.iter().map(f).collect::<Vec<_>>())
        };
        KpiStats {
            sys_throughput_bps: stat(|k| k.sys_throughput_bps),
            per_user_throughput_bps: stat(|k| k.per_user_throughput_bps),
            prr: stat(|k| k.prr),
            mean_latency_s: stat(|k| k.mean_latency_s),
            fallback_ratio: stat(|k| k.fallback_ratio),
            n_active_gnbs: stat(|k| k.n_active_gnbs as f64),
            n_unserved: stat(|k| k.n_unserved as f64),
            runs: kpis.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub value: f64,
    pub scenario: Scenario,
    pub stats: KpiStats,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub mode: Mode,
    pub points: Vec<PointResult>,
}

impl SweepResult {
    pub fn means(&self, f: fn(&KpiStats) -> Stat) -> Vec<f64> {
        self.points.iter().map(|p| f(&p.stats).mean).collect()
    }
}

/// Runs every point of `spec`. All (point, run) pairs are scheduled as one
/// parallel batch and regrouped in (point, run) order afterwards.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let scenarios = spec.validate()?;
    let runs = spec.runs_per_point as usize;
    let records: Vec<RunRecord> = (0..scenarios.len() * runs)
        .into_par_iter()
        .map(|i| {
            let (point, run) = (i / runs, i % runs);
            let scenario = &scenarios[point];
            let seed = run_seed(scenario.master_seed, spec.stream_point(point) as u64, run as u64);
            run_snapshot(scenario, &RunStreams::new(seed)).map(|o| RunRecord {
                point,
                run,
                seed,
                kpis: o.kpis,
            })
        })
        .collect::<Result<_>>()?;

    let points = scenarios
        .into_iter()
        .zip(&spec.values)
        .zip(records.chunks(runs))
        .map(|((scenario, &value), chunk)| {
            let kpis: Vec<SnapshotKpis> = chunk.iter().map(|r| r.kpis).collect();
            PointResult {
                value,
                scenario,
                stats: KpiStats::from_kpis(&kpis),
                runs: chunk.to_vec(),
            }
        })
        .collect();
    Ok(SweepResult {
        parameter: spec.parameter,
        mode: spec.base.mode,
        points,
    })
}

/// Built-in experiment definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// TN, NTN and disaster modes over K = 100..500.
    Fig2,
    /// Failure probability 0..1 in steps of 0.2 at K = 300.
    Fig3,
    /// Feeder capacity 150..600 Mbit/s at K = 300, p_f = 0.5, eta = 0.5.
    Fig4,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig2, Preset::Fig3, Preset::Fig4];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        }
    }

    /// Sweeps making up this experiment, built on `base`.
    pub fn specs(&self, base: &Scenario, runs_per_point: u32) -> Vec<SweepSpec> {
        match self {
            Preset::Fig2 => Mode::ALL
                .iter()
                .map(|&mode| {
                    SweepSpec::new(
                        SweepParameter::Users,
                        vec![100.0, 200.0, 300.0, 400.0, 500.0],
                        runs_per_point,
                        base.clone().with_mode(mode),
                    )
                })
                .collect(),
            Preset::Fig3 => {
                let mut s = base.clone().with_mode(Mode::Disaster);
                s.n_users = 300;
                vec![SweepSpec::new(
                    SweepParameter::FailureProb,
                    vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
                    runs_per_point,
                    s,
                )]
            }
            Preset::Fig4 => {
                let mut s = base.clone().with_mode(Mode::Disaster);
                s.n_users = 300;
                s.disaster.p_f = 0.5;
                s.disaster.eta_cfg = 0.5;
                vec![SweepSpec::new(
                    SweepParameter::FeederCapacity,
                    vec![150e6, 250e6, 350e6, 450e6, 600e6],
                    runs_per_point,
                    s,
                )]
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Preset {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                SimError::config(
                    "preset",
                    format!("unknown preset `{s}`, valid presets: fig2, fig3, fig4"),
                )
            })
    }
}
