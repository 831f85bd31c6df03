//! Propagation and link-budget primitives.
//!
//! Terrestrial links use the COST-231 extension of Okumura-Hata evaluated at
//! the configured carrier (3.5 GHz by default, i.e. extrapolated beyond the
//! model's 2 GHz validity range) plus log-normal shadowing. Satellite links
//! use free-space loss on a spherical-Earth slant range. Powers are carried
//! in dBm and summed in linear milliwatts.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::ntn::Satellite;
use crate::scenario::Position;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Thermal noise density at 290 K.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;
/// Hata is evaluated no closer than this.
pub const HATA_MIN_DISTANCE_M: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TnParams {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub shadowing_sigma_db: f64,
    pub noise_figure_db: f64,
    pub gnb_height_m: f64,
    pub ue_height_m: f64,
    /// COST-231 area correction (3 dB metropolitan centre, 0 dB medium city).
    pub hata_area_correction_db: f64,
    /// Nominal maximum supported load per gNB.
    pub l_max: u32,
    pub processing_delay_s: f64,
    pub queue_delay_base_s: f64,
    /// Queue utilisation is clamped to this value before `rho / (1 - rho)`.
    pub queue_rho_cap: f64,
}

impl Default for TnParams {
    fn default() -> Self {
        Self {
            carrier_hz: 3.5e9,
            bandwidth_hz: 2.0e7,
            tx_power_dbm: 43.0,
            shadowing_sigma_db: 8.0,
            noise_figure_db: 3.0,
            gnb_height_m: 25.0,
            ue_height_m: 1.5,
            hata_area_correction_db: 3.0,
            l_max: 65,
            processing_delay_s: 10e-3,
            queue_delay_base_s: 1e-3,
            queue_rho_cap: 0.95,
        }
    }
}

impl TnParams {
    pub fn noise_dbm(&self) -> f64 {
        noise_power_dbm(self.bandwidth_hz, self.noise_figure_db)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NtnParams {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub altitude_m: f64,
    pub n_satellites: u32,
    pub min_elevation_deg: f64,
    /// Satellite EIRP towards boresight (transmit power plus peak beam gain).
    pub sat_eirp_dbm: f64,
    /// One-sided half-power beamwidth of the nadir-pointing spot beam. The
    /// default matches a 30 dBi peak gain. Zero selects an isotropic radiator.
    pub beam_half_power_deg: f64,
    /// Floor of the beam pattern relative to boresight.
    pub beam_floor_db: f64,
    pub ue_rx_gain_dbi: f64,
    pub noise_figure_db: f64,
    pub feeder_capacity_bps: f64,
    pub feeder_latency_weight_s: f64,
    /// Feeder utilisation is clamped to this value before `rho / (1 - rho)`.
    pub feeder_rho_cap: f64,
    /// Gateway-to-core one-way delay behind the feeder link.
    pub feeder_delay_s: f64,
    pub processing_delay_s: f64,
    /// Ground-distance annulus for the non-central sub-satellite points.
    pub annulus_inner_m: f64,
    pub annulus_outer_m: f64,
}

impl Default for NtnParams {
    fn default() -> Self {
        Self {
            carrier_hz: 2.0e9,
            bandwidth_hz: 2.0e7,
            altitude_m: 6.0e5,
            n_satellites: 10,
            min_elevation_deg: 10.0,
            sat_eirp_dbm: 70.0,
            beam_half_power_deg: 2.6,
            beam_floor_db: -30.0,
            ue_rx_gain_dbi: 0.0,
            noise_figure_db: 7.0,
            feeder_capacity_bps: 450e6,
            feeder_latency_weight_s: 4e-3,
            feeder_rho_cap: 0.95,
            feeder_delay_s: 8e-3,
            processing_delay_s: 15e-3,
            annulus_inner_m: 200e3,
            annulus_outer_m: 1500e3,
        }
    }
}

impl NtnParams {
    pub fn noise_dbm(&self) -> f64 {
        noise_power_dbm(self.bandwidth_hz, self.noise_figure_db)
    }
}

/// One transmitter-receiver link as seen by the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub rx_power_dbm: f64,
    pub path_loss_db: f64,
    pub shadowing_db: f64,
    pub distance_m: f64,
}

impl LinkSample {
    pub fn new(
        tx_power_dbm: f64,
        gains_db: f64,
        path_loss_db: f64,
        shadowing_db: f64,
        distance_m: f64,
    ) -> Self {
        Self {
            rx_power_dbm: tx_power_dbm + gains_db - path_loss_db - shadowing_db,
            path_loss_db,
            shadowing_db,
            distance_m,
        }
    }

    /// A link known only by its received power.
    pub fn from_rx_dbm(rx_power_dbm: f64) -> Self {
        Self {
            rx_power_dbm,
            path_loss_db: 0.0,
            shadowing_db: 0.0,
            distance_m: 0.0,
        }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn check_distance(distance_m: f64) -> Result<()> {
    if distance_m > 0.0 && distance_m.is_finite() {
        Ok(())
    } else {
        Err(SimError::Domain(format!(
            "distance must be positive and finite, got {distance_m} m"
        )))
    }
}

/// COST-231 Hata urban path loss in dB.
///
/// Uses the medium-city mobile antenna correction
/// `a(h_m) = (1.1 log f - 0.7) h_m - (1.56 log f - 0.8)` and the configured
/// area correction. Distances below 10 m are clamped.
pub fn hata_path_loss(distance_m: f64, params: &TnParams) -> Result<f64> {
    check_distance(distance_m)?;
    let d_km = distance_m.max(HATA_MIN_DISTANCE_M) / 1000.0;
    let f_mhz = params.carrier_hz / 1e6;
    let log_f = f_mhz.log10();
    let log_hb = params.gnb_height_m.log10();
    let mobile_correction =
        (1.1 * log_f - 0.7) * params.ue_height_m - (1.56 * log_f - 0.8);
    Ok(46.3 + 33.9 * log_f - 13.82 * log_hb - mobile_correction
        + (44.9 - 6.55 * log_hb) * d_km.log10()
        + params.hata_area_correction_db)
}

/// Free-space path loss in dB.
pub fn free_space_path_loss(distance_m: f64, carrier_hz: f64) -> Result<f64> {
    check_distance(distance_m)?;
    Ok(20.0 * (distance_m / 1000.0).log10() + 20.0 * (carrier_hz / 1e6).log10() + 32.44)
}

/// Thermal noise power over `bandwidth_hz` in dBm.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// SINR in dB of `serving` against the summed interferers plus noise.
pub fn sinr_db(serving: &LinkSample, interferers: &[LinkSample], noise_dbm: f64) -> f64 {
    let interference: f64 = interferers.iter().map(|l| dbm_to_mw(l.rx_power_dbm)).sum();
    sinr_db_from_mw(dbm_to_mw(serving.rx_power_dbm), interference, noise_dbm)
}

pub(crate) fn sinr_db_from_mw(serving_mw: f64, interference_mw: f64, noise_dbm: f64) -> f64 {
    10.0 * (serving_mw / (interference_mw + dbm_to_mw(noise_dbm))).log10()
}

/// Zero-mean log-normal shadowing sample in dB.
pub fn draw_shadowing<R: Rng + ?Sized>(sigma_db: f64, rng: &mut R) -> f64 {
    if sigma_db <= 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma_db)
        .expect("sigma checked positive")
        .sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlantGeometry {
    pub slant_range_m: f64,
    pub elevation_deg: f64,
}

/// Slant range and elevation of a satellite at `altitude_m` whose
/// sub-satellite point lies `ground_distance_m` (great-circle) from the UE.
pub fn slant_geometry_from_ground(ground_distance_m: f64, altitude_m: f64) -> SlantGeometry {
    let re = EARTH_RADIUS_M;
    let rs = re + altitude_m;
    let psi = ground_distance_m.abs() / re;
    if psi == 0.0 {
        return SlantGeometry {
            slant_range_m: altitude_m,
            elevation_deg: 90.0,
        };
    }
    let slant = (re * re + rs * rs - 2.0 * re * rs * psi.cos()).sqrt();
    let elevation = ((psi.cos() - re / rs) / psi.sin()).atan().to_degrees();
    SlantGeometry {
        slant_range_m: slant,
        elevation_deg: elevation,
    }
}

/// Slant geometry between a UE and a satellite.
///
/// The planar offset between the UE and the sub-satellite point is taken as
/// the great-circle ground distance (local tangent plane around the area).
pub fn slant_geometry(ue: &Position, sat: &Satellite) -> SlantGeometry {
    slant_geometry_from_ground(ue.distance_to(&sat.subpoint), sat.altitude_m)
}

/// Angle at the satellite between nadir and the direction to a ground point.
pub fn off_nadir_deg(geometry: &SlantGeometry, altitude_m: f64) -> f64 {
    // Triangle Earth centre / satellite / UE: angle at the satellite.
    let rs = EARTH_RADIUS_M + altitude_m;
    let elev = geometry.elevation_deg.to_radians();
    (EARTH_RADIUS_M / rs * elev.cos()).clamp(-1.0, 1.0).asin().to_degrees()
}

/// Relative gain in dB of a nadir-pointing parabolic spot beam,
/// `-12 (theta / theta_3dB_full)^2` floored at `floor_db`.
pub fn beam_gain_db(off_axis_deg: f64, half_power_deg: f64, floor_db: f64) -> f64 {
    if half_power_deg <= 0.0 {
        return 0.0;
    }
    let full_width = 2.0 * half_power_deg;
    (-12.0 * (off_axis_deg / full_width).powi(2)).max(floor_db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Closed-form oracle written independently of the implementation.
    fn hata_oracle(d_km: f64, f_mhz: f64, hb: f64, hm: f64, c: f64) -> f64 {
        let a = (1.1 * f_mhz.log10() - 0.7) * hm - (1.56 * f_mhz.log10() - 0.8);
        46.3 + 33.9 * f_mhz.log10() - 13.82 * hb.log10() - a
            + (44.9 - 6.55 * hb.log10()) * d_km.log10()
            + c
    }

    #[test]
    fn hata_matches_closed_form_at_1km() {
        let p = TnParams::default();
        let pl = hata_path_loss(1000.0, &p).unwrap();
        let expected = hata_oracle(1.0, 3500.0, 25.0, 1.5, 3.0);
        assert!((pl - expected).abs() < 1e-9, "{pl} vs {expected}");
        // frozen: 150.0554 dB
        assert!((pl - 150.0554).abs() < 1e-3);
    }

    #[test]
    fn hata_clamps_near_field() {
        let p = TnParams::default();
        assert_eq!(
            hata_path_loss(10.0, &p).unwrap(),
            hata_path_loss(5.0, &p).unwrap()
        );
    }

    #[test]
    fn hata_decade_slope() {
        let p = TnParams::default();
        let slope = 44.9 - 6.55 * 25f64.log10();
        let d1 = hata_path_loss(120.0, &p).unwrap();
        let d2 = hata_path_loss(1200.0, &p).unwrap();
        assert!((d2 - d1 - slope).abs() < 1e-9);
    }

    #[test]
    fn non_positive_distance_is_domain_error() {
        let p = TnParams::default();
        assert!(matches!(hata_path_loss(0.0, &p), Err(SimError::Domain(_))));
        assert!(matches!(hata_path_loss(-3.0, &p), Err(SimError::Domain(_))));
        assert!(free_space_path_loss(0.0, 2e9).is_err());
    }

    #[test]
    fn fspl_values() {
        let pl = free_space_path_loss(600e3, 2e9).unwrap();
        let oracle = 20.0 * 600f64.log10() + 20.0 * 2000f64.log10() + 32.44;
        assert!((pl - oracle).abs() < 1e-9);
        assert!((pl - 154.03).abs() < 0.01);
        assert!((free_space_path_loss(1000.0, 1e6).unwrap() - 32.44).abs() < 1e-12);
        let doubled = free_space_path_loss(1200e3, 2e9).unwrap() - pl;
        assert!((doubled - 20.0 * 2f64.log10()).abs() < 1e-9);
        assert!((doubled - 6.0206).abs() < 1e-4);
    }

    #[test]
    fn noise_values() {
        assert!((noise_power_dbm(20e6, 3.0) + 97.99).abs() < 0.01);
        assert_eq!(noise_power_dbm(1.0, 0.0), -174.0);
        let diff = noise_power_dbm(5e6, 3.0) - noise_power_dbm(5e6, 0.0);
        assert!((diff - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sinr_examples() {
        let s = LinkSample::from_rx_dbm(-90.0);
        assert!((sinr_db(&s, &[], -98.0) - 8.0).abs() < 1e-9);
        // linear-domain oracle: 10log10(1e-9 / 10^-9.8)
        let oracle = 10.0 * (1e-9f64 / 10f64.powf(-9.8)).log10();
        assert!((sinr_db(&s, &[], -98.0) - oracle).abs() < 1e-9);
        let sym = sinr_db(&s, &[LinkSample::from_rx_dbm(-90.0)], -200.0);
        assert!(sym.abs() < 1e-6);
        let with_more = sinr_db(
            &s,
            &[LinkSample::from_rx_dbm(-90.0), LinkSample::from_rx_dbm(-120.0)],
            -200.0,
        );
        assert!(with_more < sym);
    }

    #[test]
    fn link_sample_identity() {
        let l = LinkSample::new(43.0, 2.0, 120.0, 4.5, 300.0);
        assert_eq!(l.rx_power_dbm, 43.0 + 2.0 - 120.0 - 4.5);
    }

    #[test]
    fn zenith_geometry_is_exact() {
        let g = slant_geometry_from_ground(0.0, 600e3);
        assert_eq!(g.slant_range_m, 600e3);
        assert_eq!(g.elevation_deg, 90.0);
    }

    #[test]
    fn ten_degree_slant_range() {
        // Oracle: d = sqrt((Re+h)^2 - Re^2 cos^2 e) - Re sin e.
        let (re, h, e) = (EARTH_RADIUS_M, 600e3, 10f64.to_radians());
        let oracle = ((re + h).powi(2) - (re * e.cos()).powi(2)).sqrt() - re * e.sin();
        assert!((oracle - 1_932e3).abs() < 2e3);
        // Central angle at 10 deg elevation: psi = 90 deg - e - asin(Re cos e / (Re+h)).
        let psi = std::f64::consts::FRAC_PI_2 - e - (re * e.cos() / (re + h)).asin();
        let g = slant_geometry_from_ground(psi * re, h);
        assert!((g.elevation_deg - 10.0).abs() < 1e-9);
        assert!((g.slant_range_m - oracle).abs() < 1e-3);
    }

    #[test]
    fn elevation_decreases_with_ground_distance() {
        let mut prev = 90.0;
        for step in 1..=600 {
            let psi_deg = step as f64 * 0.1;
            let g = slant_geometry_from_ground(psi_deg.to_radians() * EARTH_RADIUS_M, 600e3);
            assert!(g.elevation_deg < prev);
            prev = g.elevation_deg;
        }
    }

    #[test]
    fn off_nadir_zero_at_zenith() {
        let g = slant_geometry_from_ground(0.0, 600e3);
        assert!(off_nadir_deg(&g, 600e3).abs() < 1e-9);
    }

    #[test]
    fn beam_pattern_shape() {
        assert_eq!(beam_gain_db(10.0, 0.0, -30.0), 0.0);
        assert!((beam_gain_db(2.0, 2.0, -30.0) + 3.0).abs() < 1e-12);
        assert_eq!(beam_gain_db(60.0, 2.0, -30.0), -30.0);
    }

    #[test]
    fn shadowing_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = draw_shadowing(8.0, &mut rng);
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let std = (s2 / n as f64 - mean * mean).sqrt();
        assert!(mean.abs() < 0.05);
        assert!((std - 8.0).abs() / 8.0 < 0.02);
    }
}
