//! Terrestrial layer: load-aware association, shared-bandwidth Shannon rate
//! and load-dependent latency.
//!
//! Association is a sequential greedy pass in ascending user id. Each user
//! scores every active gNB with `SINR - 20 log10(1 + L_b / L_max)` using the
//! loads left behind by earlier users, attaches to the best score (lowest id
//! on ties) and increments that gNB's load at once.

use rand::Rng;

use crate::channel::{
    dbm_to_mw, draw_shadowing, hata_path_loss, sinr_db_from_mw, TnParams, SPEED_OF_LIGHT_M_S,
};
use crate::error::{Result, SimError};
use crate::scenario::{GnbSite, ServingLayer, UserTerminal};

/// Received powers of every user-gNB link for one run.
///
/// Shadowing is drawn once per link (user-major order) and reused by every
/// association pass of the snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct TnChannel {
    n_gnb: usize,
    rx_dbm: Vec<f64>,
    rx_mw: Vec<f64>,
    distance_m: Vec<f64>,
    noise_dbm: f64,
}

impl TnChannel {
    pub fn build<R: Rng + ?Sized>(
        users: &[UserTerminal],
        gnbs: &[GnbSite],
        params: &TnParams,
        rng: &mut R,
    ) -> Result<Self> {
        let n_gnb = gnbs.len();
        let mut rx_dbm = Vec::with_capacity(users.len() * n_gnb);
        let mut distance_m = Vec::with_capacity(users.len() * n_gnb);
        for user in users {
            for gnb in gnbs {
                let d = user.pos.distance_to(&gnb.pos).max(f64::MIN_POSITIVE);
                let shadow = draw_shadowing(params.shadowing_sigma_db, rng);
                rx_dbm.push(gnb.tx_power_dbm - hata_path_loss(d, params)? - shadow);
                distance_m.push(d);
            }
        }
        let rx_mw = rx_dbm.iter().map(|&p| dbm_to_mw(p)).collect();
        Ok(Self {
            n_gnb,
            rx_dbm,
            rx_mw,
            distance_m,
            noise_dbm: params.noise_dbm(),
        })
    }

    /// Channel from explicit received powers, `rx_dbm[user][gnb]`.
    pub fn from_rx_dbm(rx_dbm: &[Vec<f64>], noise_dbm: f64) -> Self {
        let n_gnb = rx_dbm.first().map_or(0, Vec::len);
        let flat: Vec<f64> = rx_dbm.iter().flatten().copied().collect();
        Self {
            n_gnb,
            rx_mw: flat.iter().map(|&p| dbm_to_mw(p)).collect(),
            distance_m: vec![0.0; flat.len()],
            rx_dbm: flat,
            noise_dbm,
        }
    }

    pub fn rx_dbm(&self, user: usize, gnb: usize) -> f64 {
        self.rx_dbm[user * self.n_gnb + gnb]
    }

    pub fn distance_m(&self, user: usize, gnb: usize) -> f64 {
        self.distance_m[user * self.n_gnb + gnb]
    }

    /// SINR of `user` on `gnb` with every other active site interfering.
    pub fn sinr_db(&self, user: usize, gnb: usize, active: &[bool]) -> f64 {
        let row = &self.rx_mw[user * self.n_gnb..(user + 1) * self.n_gnb];
        let interference: f64 = row
            .iter()
            .enumerate()
            .filter(|&(b, _)| b != gnb && active[b])
            .map(|(_, p)| p)
            .sum();
        sinr_db_from_mw(row[gnb], interference, self.noise_dbm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TnAssociation {
    pub user_id: usize,
    pub gnb_id: usize,
    /// Winning load-aware score.
    pub score_db: f64,
    pub sinr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TnLoadState {
    pub counts: Vec<u32>,
    pub l_max: u32,
}

impl TnLoadState {
    pub fn new(n_gnb: usize, l_max: u32) -> Self {
        Self {
            counts: vec![0; n_gnb],
            l_max,
        }
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TnAssignment {
    pub associations: Vec<TnAssociation>,
    pub load: TnLoadState,
}

impl TnAssignment {
    pub fn gnb_of(&self, user_id: usize) -> Option<usize> {
        self.associations
            .iter()
            .find(|a| a.user_id == user_id)
            .map(|a| a.gnb_id)
    }
}

/// `20 log10(1 + load / l_max)`.
pub fn load_penalty_db(load: u32, l_max: u32) -> Result<f64> {
    if l_max == 0 {
        return Err(SimError::config("tn.l_max", "must be >= 1"));
    }
    Ok(20.0 * (1.0 + load as f64 / l_max as f64).log10())
}

/// Greedy load-aware association of `user_ids` (processed in ascending id)
/// to the active sites of `gnbs`.
///
/// Users without traffic (`active == false`) still camp on their best cell
/// but leave its load counter untouched.
/// Returns `None` when no site is active.
pub fn associate_users(
    users: &[UserTerminal],
    user_ids: &[usize],
    gnbs: &[GnbSite],
    channel: &TnChannel,
    l_max: u32,
) -> Result<Option<TnAssignment>> {
    let active: Vec<bool> = gnbs.iter().map(|g| g.active).collect();
    if !active.iter().any(|&a| a) {
        return Ok(None);
    }
    let mut order = user_ids.to_vec();
    order.sort_unstable();

    let mut load = TnLoadState::new(gnbs.len(), l_max);
    let mut associations = Vec::with_capacity(order.len());
    for u in order {
        let mut best: Option<(usize, f64, f64)> = None;
        for (b, _) in gnbs.iter().enumerate().filter(|(_, g)| g.active) {
            let sinr = channel.sinr_db(u, b, &active);
            let score = sinr - load_penalty_db(load.counts[b], l_max)?;
            if best.is_none_or(|(_, s, _)| score > s) {
                best = Some((b, score, sinr));
            }
        }
        let (gnb_id, score_db, sinr_db) = best.expect("at least one active site");
        if users[u].active {
            load.counts[gnb_id] += 1;
        }
        associations.push(TnAssociation {
            user_id: u,
            gnb_id,
            score_db,
            sinr_db,
        });
    }
    Ok(Some(TnAssignment { associations, load }))
}

/// Shannon rate on an equal share of the cell bandwidth.
pub fn tn_user_rate(sinr_db: f64, cell_load: u32, bandwidth_hz: f64) -> f64 {
    let share = bandwidth_hz / cell_load.max(1) as f64;
    share * (1.0 + 10f64.powf(sinr_db / 10.0)).log2()
}

/// Propagation plus processing plus an M/M/1-shaped queueing term.
pub fn tn_user_latency(distance_m: f64, cell_load: u32, params: &TnParams) -> f64 {
    let rho = (cell_load as f64 / params.l_max as f64).min(params.queue_rho_cap);
    distance_m / SPEED_OF_LIGHT_M_S
        + params.processing_delay_s
        + params.queue_delay_base_s * rho / (1.0 - rho)
}

/// Reception indicator: strictly above the threshold.
pub fn received(sinr_db: f64, tau_db: f64) -> bool {
    sinr_db > tau_db
}

/// Writes serving state, rate, latency and reception for every associated
/// user. Rates use the final cell loads of `assignment`.
pub fn apply_tn_kpis(
    users: &mut [UserTerminal],
    assignment: &TnAssignment,
    channel: &TnChannel,
    params: &TnParams,
    tau_db: f64,
) {
    for a in &assignment.associations {
        let load = assignment.load.counts[a.gnb_id];
        let user = &mut users[a.user_id];
        user.serving_layer = ServingLayer::Tn;
        user.serving_node = Some(a.gnb_id);
        user.sinr_db = a.sinr_db;
        user.rate_bps = if user.active {
            tn_user_rate(a.sinr_db, load, params.bandwidth_hz)
        } else {
            0.0
        };
        user.latency_s = tn_user_latency(channel.distance_m(a.user_id, a.gnb_id), load.max(1), params);
        user.received = received(a.sinr_db, tau_db);
    }
}
