//! LEO overlay: static constellation snapshot, maximum-received-power
//! association, shared-carrier rate, bent-pipe latency and the feeder-link
//! capacity cap of the transparent payload.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::channel::{
    beam_gain_db, dbm_to_mw, free_space_path_loss, off_nadir_deg, sinr_db_from_mw,
    slant_geometry, NtnParams, SlantGeometry, SPEED_OF_LIGHT_M_S,
};
use crate::error::{Result, SimError};
use crate::scenario::{Position, ServingLayer, UserTerminal};
use crate::tn::received;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Satellite {
    pub id: usize,
    /// Sub-satellite point in the area's planar coordinates.
    pub subpoint: Position,
    pub altitude_m: f64,
    pub load: u32,
}

impl Satellite {
    /// Ground-plane displacement of the sub-satellite point from `center`.
    pub fn subpoint_offset_m(&self, center: &Position) -> (f64, f64) {
        (self.subpoint.x - center.x, self.subpoint.y - center.y)
    }
}

/// One satellite at zenith of `center`, the rest on a ground annulus
/// (uniform by area) around it.
pub fn place_constellation<R: Rng + ?Sized>(
    params: &NtnParams,
    center: Position,
    rng: &mut R,
) -> Vec<Satellite> {
    let (r_in, r_out) = (params.annulus_inner_m, params.annulus_outer_m);
    (0..params.n_satellites as usize)
        .map(|id| {
            let subpoint = if id == 0 {
                center
            } else {
                let u: f64 = rng.random();
                let r = (r_in * r_in + u * (r_out * r_out - r_in * r_in)).sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                Position::new(center.x + r * theta.cos(), center.y + r * theta.sin())
            };
            Satellite {
                id,
                subpoint,
                altitude_m: params.altitude_m,
                load: 0,
            }
        })
        .collect()
}

/// Downlink received power in dBm from `sat` at the given geometry.
pub fn ntn_rx_power_dbm(geometry: &SlantGeometry, sat: &Satellite, params: &NtnParams) -> f64 {
    let beam = beam_gain_db(
        off_nadir_deg(geometry, sat.altitude_m),
        params.beam_half_power_deg,
        params.beam_floor_db,
    );
    let fspl = free_space_path_loss(geometry.slant_range_m, params.carrier_hz)
        .expect("slant range is positive for a positive altitude");
    params.sat_eirp_dbm + beam - fspl + params.ue_rx_gain_dbi
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtnLink {
    pub user_id: usize,
    pub sat_id: usize,
    pub sinr_db: f64,
    pub slant_range_m: f64,
}

/// Maximum-received-power association over the satellites visible above the
/// elevation mask. Invisible satellites neither serve nor interfere. Users
/// with no visible satellite map to `None`.
pub fn ntn_associate(
    users: &[UserTerminal],
    user_ids: &[usize],
    sats: &[Satellite],
    params: &NtnParams,
) -> Vec<(usize, Option<NtnLink>)> {
    let noise = params.noise_dbm();
    let mut order = user_ids.to_vec();
    order.sort_unstable();
    order
        .into_iter()
        .map(|u| {
            let visible: Vec<(usize, f64, f64)> = sats
                .iter()
                .filter_map(|s| {
                    let g = slant_geometry(&users[u].pos, s);
                    (g.elevation_deg >= params.min_elevation_deg)
                        .then(|| (s.id, ntn_rx_power_dbm(&g, s, params), g.slant_range_m))
                })
                .collect();
            let best = visible.iter().fold(None::<&(usize, f64, f64)>, |best, c| match best {
                Some(b) if b.1 >= c.1 => Some(b),
                _ => Some(c),
            });
            let link = best.map(|&(sat_id, rx, slant)| {
                let interference: f64 = visible
                    .iter()
                    .filter(|v| v.0 != sat_id)
                    .map(|v| dbm_to_mw(v.1))
                    .sum();
                NtnLink {
                    user_id: u,
                    sat_id,
                    sinr_db: sinr_db_from_mw(dbm_to_mw(rx), interference, noise),
                    slant_range_m: slant,
                }
            });
            (u, link)
        })
        .collect()
}

/// Rate on an equal share of the satellite carrier and bent-pipe latency
/// (service plus feeder space segment, gateway delay, ground processing).
pub fn ntn_user_rate_latency(link: &NtnLink, sat_load: u32, params: &NtnParams) -> (f64, f64) {
    let rate = params.bandwidth_hz / sat_load.max(1) as f64
        * (1.0 + 10f64.powf(link.sinr_db / 10.0)).log2();
    let latency = 2.0 * link.slant_range_m / SPEED_OF_LIGHT_M_S
        + params.feeder_delay_s
        + params.processing_delay_s;
    (rate, latency)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeederState {
    pub capacity_bps: f64,
    pub offered_bps: f64,
    pub utilization: f64,
}

/// Latency added by the feeder at utilisation `rho`.
pub fn feeder_latency_s(rho: f64, params: &NtnParams) -> f64 {
    let rho = rho.min(params.feeder_rho_cap);
    params.feeder_latency_weight_s * rho / (1.0 - rho)
}

/// Caps the summed NTN rate at the feeder capacity (proportional scaling)
/// and adds the utilisation-dependent feeder delay to every NTN user.
pub fn apply_feeder_constraint(
    users: &mut [UserTerminal],
    ntn_ids: &[usize],
    params: &NtnParams,
) -> Result<FeederState> {
    if !(params.feeder_capacity_bps > 0.0) {
        return Err(SimError::config("ntn.feeder_capacity_bps", "must be > 0"));
    }
    let offered: f64 = ntn_ids.iter().map(|&u| users[u].rate_bps).sum();
    let rho = offered / params.feeder_capacity_bps;
    let delay = feeder_latency_s(rho, params);
    for &u in ntn_ids {
        let user = &mut users[u];
        if rho > 1.0 {
            user.rate_bps /= rho;
        }
        user.latency_s += delay;
    }
    Ok(FeederState {
        capacity_bps: params.feeder_capacity_bps,
        offered_bps: offered,
        utilization: rho,
    })
}

/// Serves `user_ids` from the constellation: association, shared-carrier rate
/// and bent-pipe latency. The feeder cap is not applied here. Returns the ids
/// actually served; the others are marked unserved.
pub fn serve_ntn_users(
    users: &mut [UserTerminal],
    user_ids: &[usize],
    sats: &mut [Satellite],
    params: &NtnParams,
    tau_db: f64,
) -> Vec<usize> {
    let links = ntn_associate(users, user_ids, sats, params);
    for s in sats.iter_mut() {
        s.load = 0;
    }
    for (u, link) in &links {
        if let Some(l) = link {
            if users[*u].active {
                sats[l.sat_id].load += 1;
            }
        }
    }
    let mut served = Vec::with_capacity(links.len());
    for (u, link) in links {
        let user = &mut users[u];
        match link {
            Some(l) => {
                let (rate, latency) = ntn_user_rate_latency(&l, sats[l.sat_id].load, params);
                user.serving_layer = ServingLayer::Ntn;
                user.serving_node = Some(l.sat_id);
                user.sinr_db = l.sinr_db;
                user.rate_bps = if user.active { rate } else { 0.0 };
                user.latency_s = latency;
                user.received = received(l.sinr_db, tau_db);
                served.push(u);
            }
            None => user.set_unserved(),
        }
    }
    served
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::slant_geometry_from_ground;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn center() -> Position {
        Position::new(1000.0, 1000.0)
    }

    fn area_corners() -> Vec<Position> {
        vec![
            Position::new(0.0, 0.0),
            Position::new(2000.0, 0.0),
            Position::new(0.0, 2000.0),
            Position::new(2000.0, 2000.0),
            center(),
        ]
    }

    fn sat(id: usize, x: f64, y: f64) -> Satellite {
        Satellite {
            id,
            subpoint: Position::new(x, y),
            altitude_m: 600e3,
            load: 0,
        }
    }

    fn users(points: &[Position]) -> Vec<UserTerminal> {
        points
            .iter()
            .enumerate()
            .map(|(i, &p)| UserTerminal::new(i, p, true))
            .collect()
    }

    #[test]
    fn single_satellite_is_near_zenith_everywhere() {
        let p = NtnParams {
            n_satellites: 1,
            ..NtnParams::default()
        };
        let sats = place_constellation(&p, center(), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(sats.len(), 1);
        for ue in area_corners() {
            assert!(slant_geometry(&ue, &sats[0]).elevation_deg > 89.0);
        }
        let us = users(&area_corners());
        let links = ntn_associate(&us, &[0, 1, 2, 3, 4], &sats, &p);
        for (_, l) in links {
            let l = l.unwrap();
            assert_eq!(l.sat_id, 0);
            // No interferers: SINR is the plain SNR.
            let g = slant_geometry(&us[l.user_id].pos, &sats[0]);
            let snr = ntn_rx_power_dbm(&g, &sats[0], &p) - p.noise_dbm();
            assert!((l.sinr_db - snr).abs() < 1e-9);
        }
    }

    #[test]
    fn default_constellation_is_fully_visible() {
        let p = NtnParams::default();
        // Annulus edge oracle: 1500 km ground offset is still above the mask.
        assert!(slant_geometry_from_ground(1500e3, 600e3).elevation_deg > 10.0);
        for seed in 0..100 {
            let sats = place_constellation(&p, center(), &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(sats.len(), 10);
            for s in &sats {
                let g = slant_geometry(&center(), s);
                assert!(g.elevation_deg > 10.0);
                let off = s.subpoint.distance_to(&center());
                assert!(s.id == 0 || (200e3..=1500e3).contains(&off));
            }
        }
    }

    #[test]
    fn placement_is_seeded() {
        let p = NtnParams::default();
        let a = place_constellation(&p, center(), &mut ChaCha8Rng::seed_from_u64(4));
        let b = place_constellation(&p, center(), &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
    }

    #[test]
    fn zenith_beats_offset_satellite() {
        let p = NtnParams::default();
        let sats = vec![sat(0, 1001e3, 1000.0), sat(1, 1000.0, 1000.0)];
        let us = users(&[center()]);
        let (_, link) = ntn_associate(&us, &[0], &sats, &p).pop().unwrap();
        assert_eq!(link.unwrap().sat_id, 1);
    }

    #[test]
    fn masked_satellite_neither_serves_nor_interferes() {
        let p = NtnParams::default();
        // Ground distance giving ~9.9 deg elevation.
        let mut g = 2000e3;
        while slant_geometry_from_ground(g, 600e3).elevation_deg > 9.9 {
            g += 100.0;
        }
        let low = sat(1, 1000.0 + g, 1000.0);
        assert!(slant_geometry(&center(), &low).elevation_deg < 10.0);
        let us = users(&[center()]);
        let alone = ntn_associate(&us, &[0], &[sat(0, 1000.0, 1000.0)], &p);
        let with_low = ntn_associate(&us, &[0], &[sat(0, 1000.0, 1000.0), low.clone()], &p);
        assert_eq!(alone, with_low);
        assert!(ntn_associate(&us, &[0], &[low], &p)[0].1.is_none());
    }

    #[test]
    fn zenith_space_segment_delay() {
        let p = NtnParams::default();
        let link = NtnLink {
            user_id: 0,
            sat_id: 0,
            sinr_db: 3.0,
            slant_range_m: 600e3,
        };
        let (r1, l1) = ntn_user_rate_latency(&link, 1, &p);
        let (r2, l2) = ntn_user_rate_latency(&link, 2, &p);
        let space = l1 - p.feeder_delay_s - p.processing_delay_s;
        assert!((space - 2.0 * 600.0 / 299_792.458).abs() < 1e-12);
        assert!((space - 4.00e-3).abs() < 0.01e-3);
        assert_eq!(r2, r1 / 2.0);
        assert_eq!(l1, l2);
    }

    fn with_rates(rates: &[f64]) -> Vec<UserTerminal> {
        rates
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let mut u = UserTerminal::new(i, center(), true);
                u.rate_bps = r;
                u.latency_s = 0.02;
                u
            })
            .collect()
    }

    #[test]
    fn feeder_idle() {
        let p = NtnParams::default();
        let mut us = with_rates(&[0.0, 0.0]);
        let st = apply_feeder_constraint(&mut us, &[0, 1], &p).unwrap();
        assert_eq!(st.offered_bps, 0.0);
        assert!(us.iter().all(|u| u.rate_bps == 0.0 && u.latency_s == 0.02));
    }

    #[test]
    fn feeder_overload_halves_rates() {
        let p = NtnParams::default();
        let rates = [300e6, 200e6, 400e6];
        let mut us = with_rates(&rates);
        let st = apply_feeder_constraint(&mut us, &[0, 1, 2], &p).unwrap();
        assert!((st.utilization - 2.0).abs() < 1e-12);
        for (u, r) in us.iter().zip(rates) {
            assert!((u.rate_bps - r / 2.0).abs() < 1e-6);
        }
        let total: f64 = us.iter().map(|u| u.rate_bps).sum();
        assert!((total - 450e6).abs() / 450e6 < 1e-12);
        let capped = p.feeder_latency_weight_s * 0.95 / 0.05;
        assert!((us[0].latency_s - 0.02 - capped).abs() < 1e-12);
    }

    #[test]
    fn feeder_half_load_adds_weight() {
        let p = NtnParams::default();
        let mut us = with_rates(&[225e6]);
        apply_feeder_constraint(&mut us, &[0], &p).unwrap();
        assert!((us[0].latency_s - 0.02 - 4e-3).abs() < 1e-15);
    }

    #[test]
    fn feeder_rejects_zero_capacity() {
        let p = NtnParams {
            feeder_capacity_bps: 0.0,
            ..NtnParams::default()
        };
        assert!(apply_feeder_constraint(&mut with_rates(&[1.0]), &[0], &p).is_err());
    }
}
