//! Static post-failure snapshot and system-level KPI aggregation.
//!
//! The disaster pipeline runs, in order: nominal attachment over every site,
//! forced NTN handover of users whose site failed, provisional re-scoring of
//! the survivors on the degraded layout, proactive offload of the weakest
//! vulnerable survivors, final terrestrial re-association, the satellite leg
//! with migration overhead and the feeder cap, and aggregation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::ntn::{apply_feeder_constraint, serve_ntn_users, FeederState, Satellite};
use crate::scenario::{unit_interval, GnbSite, Scenario, ServingLayer, UserTerminal};
use crate::tn::{apply_tn_kpis, associate_users, TnAssignment, TnChannel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisasterParams {
    /// Independent failure probability of each gNB.
    pub p_f: f64,
    /// Configured proactive offload aggressiveness.
    pub eta_cfg: f64,
    pub reassoc_thr_penalty: f64,
    pub reassoc_lat_penalty_s: f64,
    pub migration_thr_penalty: f64,
    pub migration_lat_penalty_s: f64,
    /// Reception threshold.
    pub tau_db: f64,
    /// Survivors whose best score is below `tau_db + weak_margin_db` are
    /// offload candidates.
    pub weak_margin_db: f64,
}

impl Default for DisasterParams {
    fn default() -> Self {
        Self {
            p_f: 0.5,
            eta_cfg: 0.5,
            reassoc_thr_penalty: 0.02,
            reassoc_lat_penalty_s: 1e-3,
            migration_thr_penalty: 0.15,
            migration_lat_penalty_s: 3e-3,
            tau_db: -5.0,
            weak_margin_db: 3.0,
        }
    }
}

impl DisasterParams {
    pub fn validate(&self) -> Result<()> {
        unit_interval("disaster.p_f", self.p_f)?;
        unit_interval("disaster.eta_cfg", self.eta_cfg)?;
        unit_interval("disaster.reassoc_thr_penalty", self.reassoc_thr_penalty)?;
        unit_interval("disaster.migration_thr_penalty", self.migration_thr_penalty)?;
        for (key, v) in [
            ("disaster.reassoc_lat_penalty_s", self.reassoc_lat_penalty_s),
            ("disaster.migration_lat_penalty_s", self.migration_lat_penalty_s),
            ("disaster.weak_margin_db", self.weak_margin_db),
        ] {
            if !(v >= 0.0) {
                return Err(SimError::config(key, format!("must be >= 0, got {v}")));
            }
        }
        if !self.tau_db.is_finite() {
            return Err(SimError::config("disaster.tau_db", "must be finite"));
        }
        Ok(())
    }
}

/// Aggregate KPIs of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotKpis {
    pub sys_throughput_bps: f64,
    pub per_user_throughput_bps: f64,
    pub prr: f64,
    /// Mean over served users.
    pub mean_latency_s: f64,
    pub fallback_ratio: f64,
    pub n_active_gnbs: u32,
    pub n_tn_users: u32,
    pub n_ntn_users: u32,
    pub n_unserved: u32,
}

/// KPIs plus the per-user records they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotOutcome {
    pub kpis: SnapshotKpis,
    pub users: Vec<UserTerminal>,
    pub gnbs: Vec<GnbSite>,
    pub feeder: Option<FeederState>,
}

/// Marks each site failed with probability `p_f` and returns the ids of the
/// survivors.
pub fn sample_failures<R: Rng + ?Sized>(gnbs: &mut [GnbSite], p_f: f64, rng: &mut R) -> Vec<usize> {
    let p = p_f.clamp(0.0, 1.0);
    for g in gnbs.iter_mut() {
        g.active = !rng.random_bool(p);
    }
    gnbs.iter().filter(|g| g.active).map(|g| g.id).collect()
}

/// System throughput, PRR over all `k` users, mean latency over served
/// users and the realised fallback ratio.
pub fn aggregate_kpis(users: &[UserTerminal], k: u32, n_active_gnbs: u32) -> Result<SnapshotKpis> {
    if k == 0 {
        return Err(SimError::config("scenario.n_users", "KPIs are undefined for K = 0"));
    }
    let (mut n_tn, mut n_ntn, mut n_unserved) = (0u32, 0u32, 0u32);
    let (mut throughput, mut latency, mut hits) = (0.0, 0.0, 0u32);
    for u in users {
        match u.serving_layer {
            ServingLayer::Tn => n_tn += 1,
            ServingLayer::Ntn => n_ntn += 1,
            ServingLayer::None => {
                n_unserved += 1;
                continue;
            }
        }
        throughput += u.rate_bps;
        latency += u.latency_s;
        if u.received {
            hits += 1;
        }
    }
    let served = n_tn + n_ntn;
    Ok(SnapshotKpis {
        sys_throughput_bps: throughput,
        per_user_throughput_bps: throughput / k as f64,
        prr: hits as f64 / k as f64,
        mean_latency_s: if served > 0 { latency / served as f64 } else { 0.0 },
        fallback_ratio: n_ntn as f64 / k as f64,
        n_active_gnbs,
        n_tn_users: n_tn,
        n_ntn_users: n_ntn,
        n_unserved,
    })
}

fn all_ids(users: &[UserTerminal]) -> Vec<usize> {
    (0..users.len()).collect()
}

fn count_active(gnbs: &[GnbSite]) -> u32 {
    gnbs.iter().filter(|g| g.active).count() as u32
}

fn store_loads(gnbs: &mut [GnbSite], assignment: Option<&TnAssignment>) {
    for g in gnbs.iter_mut() {
        g.load = assignment.map_or(0, |a| a.load.counts[g.id]);
    }
}

/// Nominal terrestrial-only snapshot over every site in `gnbs`.
pub fn run_nominal_tn(
    scenario: &Scenario,
    gnbs: &[GnbSite],
    users: &[UserTerminal],
    channel: &TnChannel,
) -> Result<SnapshotOutcome> {
    let mut gnbs = gnbs.to_vec();
    let mut users = users.to_vec();
    let assignment = associate_users(&users, &all_ids(&users), &gnbs, channel, scenario.tn.l_max)?;
    if let Some(a) = &assignment {
        apply_tn_kpis(&mut users, a, channel, &scenario.tn, scenario.disaster.tau_db);
    }
    store_loads(&mut gnbs, assignment.as_ref());
    let kpis = aggregate_kpis(&users, scenario.n_users, count_active(&gnbs))?;
    Ok(SnapshotOutcome {
        kpis,
        users,
        gnbs,
        feeder: None,
    })
}

/// Nominal satellite-only snapshot: every user on the constellation, feeder
/// cap applied, no migration overhead.
pub fn run_nominal_ntn(
    scenario: &Scenario,
    users: &[UserTerminal],
    sats: &[Satellite],
) -> Result<SnapshotOutcome> {
    let mut users = users.to_vec();
    let mut sats = sats.to_vec();
    let ids = all_ids(&users);
    let served = serve_ntn_users(&mut users, &ids, &mut sats, &scenario.ntn, scenario.disaster.tau_db);
    let feeder = apply_feeder_constraint(&mut users, &served, &scenario.ntn)?;
    let kpis = aggregate_kpis(&users, scenario.n_users, 0)?;
    Ok(SnapshotOutcome {
        kpis,
        users,
        gnbs: Vec::new(),
        feeder: Some(feeder),
    })
}

fn offload_count(eta: f64, candidates: usize) -> usize {
    // Guard against products such as 0.1 * 30 landing just above an integer.
    ((eta * candidates as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Selects the proactive offload set from the provisional assignment: the
/// `ceil(eta * |candidates|)` lowest-scoring weak or overloaded users,
/// ordered by (score, user id).
pub fn select_proactive(provisional: &TnAssignment, scenario: &Scenario) -> Vec<usize> {
    let d = &scenario.disaster;
    let weak_below = d.tau_db + d.weak_margin_db;
    let l_max = scenario.tn.l_max;
    let mut candidates: Vec<(f64, usize)> = provisional
        .associations
        .iter()
        .filter(|a| a.score_db < weak_below || provisional.load.counts[a.gnb_id] > l_max)
        .map(|a| (a.score_db, a.user_id))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = offload_count(d.eta_cfg, candidates.len());
    candidates.into_iter().take(n).map(|(_, u)| u).collect()
}

fn apply_migration_penalty(users: &mut [UserTerminal], ids: &[usize], d: &DisasterParams) {
    for &u in ids {
        users[u].rate_bps *= 1.0 - d.migration_thr_penalty;
        users[u].latency_s += d.migration_lat_penalty_s;
    }
}

/// Post-failure hybrid snapshot.
///
/// `gnbs` carries the failure mask drawn by [`sample_failures`]; the
/// pre-failure attachment ignores it and uses every site.
pub fn run_disaster_snapshot(
    scenario: &Scenario,
    gnbs: &[GnbSite],
    users: &[UserTerminal],
    sats: &[Satellite],
    channel: &TnChannel,
) -> Result<SnapshotOutcome> {
    let d = &scenario.disaster;
    let l_max = scenario.tn.l_max;
    let mut users = users.to_vec();
    let mut gnbs = gnbs.to_vec();
    let mut sats = sats.to_vec();
    let ids = all_ids(&users);

    // Nominal attachment before the failure.
    let intact: Vec<GnbSite> = gnbs
        .iter()
        .map(|g| GnbSite {
            active: true,
            ..g.clone()
        })
        .collect();
    let pre = associate_users(&users, &ids, &intact, channel, l_max)?
        .expect("the intact layout has at least one site");
    let mut pre_gnb = vec![usize::MAX; users.len()];
    for a in &pre.associations {
        pre_gnb[a.user_id] = a.gnb_id;
    }

    // Forced handover off failed sites.
    let mut ntn_ids = Vec::new();
    let mut remaining = Vec::new();
    for &u in &ids {
        users[u].forced_fallback = false;
        users[u].proactive_fallback = false;
        users[u].reassociated = false;
        if gnbs[pre_gnb[u]].active {
            remaining.push(u);
        } else {
            users[u].forced_fallback = true;
            ntn_ids.push(u);
        }
    }

    // Provisional scores on the degraded layout, then proactive offload. With
    // every site intact there is no disaster to react to.
    let any_failed = gnbs.iter().any(|g| !g.active);
    let provisional = associate_users(&users, &remaining, &gnbs, channel, l_max)?;
    let proactive = match &provisional {
        Some(p) if any_failed => select_proactive(p, scenario),
        _ => Vec::new(),
    };
    for &u in &proactive {
        users[u].proactive_fallback = true;
    }
    ntn_ids.extend_from_slice(&proactive);
    ntn_ids.sort_unstable();
    let retained: Vec<usize> = remaining
        .into_iter()
        .filter(|u| !users[*u].proactive_fallback)
        .collect();

    // Final terrestrial attachment of the retained users.
    let assignment = associate_users(&users, &retained, &gnbs, channel, l_max)?;
    if let Some(a) = &assignment {
        apply_tn_kpis(&mut users, a, channel, &scenario.tn, d.tau_db);
        for assoc in &a.associations {
            if assoc.gnb_id != pre_gnb[assoc.user_id] {
                let user = &mut users[assoc.user_id];
                user.reassociated = true;
                user.rate_bps *= 1.0 - d.reassoc_thr_penalty;
                user.latency_s += d.reassoc_lat_penalty_s;
            }
        }
    }
    store_loads(&mut gnbs, assignment.as_ref());

    // Satellite leg.
    let served = serve_ntn_users(&mut users, &ntn_ids, &mut sats, &scenario.ntn, d.tau_db);
    apply_migration_penalty(&mut users, &served, d);
    let feeder = apply_feeder_constraint(&mut users, &served, &scenario.ntn)?;

    let kpis = aggregate_kpis(&users, scenario.n_users, count_active(&gnbs))?;
    Ok(SnapshotOutcome {
        kpis,
        users,
        gnbs,
        feeder: Some(feeder),
    })
}
