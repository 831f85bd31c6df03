//! Per-run geometry: the perturbed hexagonal gNB layout and the user
//! population.
//!
//! Users are placed uniformly over the square area in nominal operation.
//! Once a disaster has actually taken sites down, placement switches to
//! reference-point group mobility with panic: users cluster around group
//! reference points and a share of the groups flees away from the nearest
//! failed site.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{NtnParams, TnParams};
use crate::error::{Result, SimError};
use crate::fallback::DisasterParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Nominal terrestrial-only operation.
    Tn,
    /// Nominal satellite-only operation.
    Ntn,
    /// Post-failure hybrid fallback snapshot.
    Disaster,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Tn, Mode::Ntn, Mode::Disaster];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Tn => "tn",
            Mode::Ntn => "ntn",
            Mode::Disaster => "disaster",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tn" => Ok(Mode::Tn),
            "ntn" => Ok(Mode::Ntn),
            "disaster" => Ok(Mode::Disaster),
            other => Err(SimError::config(
                "mode",
                format!("unknown mode `{other}`, expected one of tn, ntn, disaster"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn inside(&self, side: f64) -> bool {
        (0.0..=side).contains(&self.x) && (0.0..=side).contains(&self.y)
    }
}

/// Group placement parameters used once a disaster has struck.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityParams {
    /// Users per group; the number of groups is `max(1, K / group_size)`.
    pub group_size: u32,
    pub group_radius_m: f64,
    /// Share of groups displaced away from the nearest failed site.
    pub panic_fraction: f64,
    pub panic_distance_m: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            group_size: 20,
            group_radius_m: 100.0,
            panic_fraction: 0.5,
            panic_distance_m: 300.0,
        }
    }
}

/// Immutable configuration of one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub area_side_m: f64,
    pub n_gnb: u32,
    pub isd_m: f64,
    /// Radius of the per-site layout perturbation as a fraction of the ISD.
    pub perturbation_frac: f64,
    pub n_users: u32,
    pub mode: Mode,
    pub master_seed: u64,
    /// Probability that a user has traffic in the snapshot.
    pub activity: f64,
    pub mobility: MobilityParams,
    pub tn: TnParams,
    pub ntn: NtnParams,
    pub disaster: DisasterParams,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            area_side_m: 2000.0,
            n_gnb: 10,
            isd_m: 500.0,
            perturbation_frac: 0.1,
            n_users: 300,
            mode: Mode::Disaster,
            master_seed: 1,
            activity: 1.0,
            mobility: MobilityParams::default(),
            tn: TnParams::default(),
            ntn: NtnParams::default(),
            disaster: DisasterParams::default(),
        }
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(key, format!("must be > 0, got {v}")))
    }
}

pub(crate) fn unit_interval(key: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SimError::config(key, format!("must lie in [0, 1], got {v}")))
    }
}

impl Scenario {
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn center(&self) -> Position {
        Position::new(self.area_side_m / 2.0, self.area_side_m / 2.0)
    }

    /// Checks every numeric field against its admissible range.
    pub fn validate(&self) -> Result<()> {
        positive("scenario.area_side_m", self.area_side_m)?;
        positive("scenario.isd_m", self.isd_m)?;
        if self.n_gnb == 0 {
            return Err(SimError::config("scenario.n_gnb", "must be >= 1"));
        }
        if self.n_users == 0 {
            return Err(SimError::config("scenario.n_users", "must be >= 1"));
        }
        if !(0.0..0.5).contains(&self.perturbation_frac) {
            return Err(SimError::config(
                "scenario.perturbation_frac",
                format!("must lie in [0, 0.5), got {}", self.perturbation_frac),
            ));
        }
        unit_interval("scenario.activity", self.activity)?;

        let m = &self.mobility;
        if m.group_size == 0 {
            return Err(SimError::config("mobility.group_size", "must be >= 1"));
        }
        if !(m.group_radius_m >= 0.0 && 2.0 * m.group_radius_m <= self.area_side_m) {
            return Err(SimError::config(
                "mobility.group_radius_m",
                format!("must lie in [0, area_side_m / 2], got {}", m.group_radius_m),
            ));
        }
        unit_interval("mobility.panic_fraction", m.panic_fraction)?;
        if !(m.panic_distance_m >= 0.0) {
            return Err(SimError::config("mobility.panic_distance_m", "must be >= 0"));
        }

        let t = &self.tn;
        positive("tn.carrier_hz", t.carrier_hz)?;
        positive("tn.bandwidth_hz", t.bandwidth_hz)?;
        positive("tn.gnb_height_m", t.gnb_height_m)?;
        positive("tn.ue_height_m", t.ue_height_m)?;
        if !(t.shadowing_sigma_db >= 0.0) {
            return Err(SimError::config("tn.shadowing_sigma_db", "must be >= 0"));
        }
        if !(t.noise_figure_db >= 0.0) {
            return Err(SimError::config("tn.noise_figure_db", "must be >= 0"));
        }
        if t.l_max == 0 {
            return Err(SimError::config("tn.l_max", "must be >= 1"));
        }
        if !(t.processing_delay_s >= 0.0 && t.queue_delay_base_s >= 0.0) {
            return Err(SimError::config("tn.processing_delay_s", "delays must be >= 0"));
        }
        if !(0.0..1.0).contains(&t.queue_rho_cap) {
            return Err(SimError::config("tn.queue_rho_cap", "must lie in [0, 1)"));
        }

        let n = &self.ntn;
        positive("ntn.carrier_hz", n.carrier_hz)?;
        positive("ntn.bandwidth_hz", n.bandwidth_hz)?;
        positive("ntn.altitude_m", n.altitude_m)?;
        positive("ntn.feeder_capacity_bps", n.feeder_capacity_bps)?;
        if n.n_satellites == 0 {
            return Err(SimError::config("ntn.n_satellites", "must be >= 1"));
        }
        if !(0.0..90.0).contains(&n.min_elevation_deg) {
            return Err(SimError::config("ntn.min_elevation_deg", "must lie in [0, 90)"));
        }
        if !(0.0..1.0).contains(&n.feeder_rho_cap) {
            return Err(SimError::config("ntn.feeder_rho_cap", "must lie in [0, 1)"));
        }
        if !(n.annulus_inner_m >= 0.0 && n.annulus_outer_m >= n.annulus_inner_m) {
            return Err(SimError::config(
                "ntn.annulus_outer_m",
                "annulus must satisfy 0 <= inner <= outer",
            ));
        }
        if !(n.beam_half_power_deg >= 0.0) {
            return Err(SimError::config("ntn.beam_half_power_deg", "must be >= 0"));
        }
        for (key, v) in [
            ("ntn.feeder_latency_weight_s", n.feeder_latency_weight_s),
            ("ntn.feeder_delay_s", n.feeder_delay_s),
            ("ntn.processing_delay_s", n.processing_delay_s),
        ] {
            if !(v >= 0.0) {
                return Err(SimError::config(key, "must be >= 0"));
            }
        }

        self.disaster.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnbSite {
    pub id: usize,
    pub pos: Position,
    pub tx_power_dbm: f64,
    pub height_m: f64,
    pub active: bool,
    /// Attached users after the most recent association pass.
    pub load: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ServingLayer {
    Tn,
    Ntn,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserTerminal {
    pub id: usize,
    pub pos: Position,
    pub active: bool,
    pub serving_layer: ServingLayer,
    pub serving_node: Option<usize>,
    pub sinr_db: f64,
    pub rate_bps: f64,
    pub latency_s: f64,
    pub received: bool,
    pub forced_fallback: bool,
    pub proactive_fallback: bool,
    pub reassociated: bool,
}

impl UserTerminal {
    pub fn new(id: usize, pos: Position, active: bool) -> Self {
        Self {
            id,
            pos,
            active,
            serving_layer: ServingLayer::None,
            serving_node: None,
            sinr_db: f64::NEG_INFINITY,
            rate_bps: 0.0,
            latency_s: 0.0,
            received: false,
            forced_fallback: false,
            proactive_fallback: false,
            reassociated: false,
        }
    }

    /// Drops any service state, keeping geometry and fallback flags.
    pub fn set_unserved(&mut self) {
        self.serving_layer = ServingLayer::None;
        self.serving_node = None;
        self.sinr_db = f64::NEG_INFINITY;
        self.rate_bps = 0.0;
        self.latency_s = 0.0;
        self.received = false;
    }
}

/// Hexagonal lattice points nearest to the origin, in deterministic order.
fn hex_lattice(n: usize, isd: f64) -> Vec<(f64, f64)> {
    let rings = {
        let mut r = 0usize;
        while 3 * r * (r + 1) + 1 < n {
            r += 1;
        }
        r as i64 + 1
    };
    let mut pts = Vec::new();
    for i in -rings..=rings {
        for j in -rings..=rings {
            let x = isd * (i as f64 + 0.5 * j as f64);
            let y = isd * (3f64.sqrt() / 2.0) * j as f64;
            pts.push((x, y, i, j));
        }
    }
    // Sort by ring distance, then angle; the lattice indices break residual
    // floating-point ties.
    pts.sort_by(|a, b| {
        let ra = (a.0.hypot(a.1) / isd * 1e6).round();
        let rb = (b.0.hypot(b.1) / isd * 1e6).round();
        let angle = |p: &(f64, f64, i64, i64)| {
            let t = p.1.atan2(p.0);
            if t < 0.0 {
                t + 2.0 * PI
            } else {
                t
            }
        };
        ra.total_cmp(&rb)
            .then(angle(a).total_cmp(&angle(b)))
            .then((a.2, a.3).cmp(&(b.2, b.3)))
    });
    pts.into_iter().take(n).map(|(x, y, _, _)| (x, y)).collect()
}

/// Perturbed hexagonal layout centred in the area.
///
/// Each lattice point is displaced uniformly within a disc of radius
/// `perturbation_frac * isd`, so every axis moves by at most that amount and
/// neighbour spacing stays within `isd * (1 ± 2 * perturbation_frac)`.
pub fn generate_gnb_layout<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<Vec<GnbSite>> {
    if scenario.n_gnb == 0 {
        return Err(SimError::config("scenario.n_gnb", "must be >= 1"));
    }
    let center = scenario.center();
    let radius = scenario.perturbation_frac * scenario.isd_m;
    let side = scenario.area_side_m;
    let lattice = hex_lattice(scenario.n_gnb as usize, scenario.isd_m);

    for &(dx, dy) in &lattice {
        let (x, y) = (center.x + dx, center.y + dy);
        if x - radius < 0.0 || x + radius > side || y - radius < 0.0 || y + radius > side {
            return Err(SimError::config(
                "scenario.area_side_m",
                format!(
                    "{side} m area cannot host {} sites at ISD {} m",
                    scenario.n_gnb, scenario.isd_m
                ),
            ));
        }
    }

    Ok(lattice
        .into_iter()
        .enumerate()
        .map(|(id, (dx, dy))| {
            let (px, py) = if radius > 0.0 {
                let r = radius * rng.random::<f64>().sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                (r * theta.cos(), r * theta.sin())
            } else {
                (0.0, 0.0)
            };
            GnbSite {
                id,
                pos: Position::new(center.x + dx + px, center.y + dy + py),
                tx_power_dbm: scenario.tn.tx_power_dbm,
                height_m: scenario.tn.gnb_height_m,
                active: true,
                load: 0,
            }
        })
        .collect())
}

fn uniform_in_square<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> Position {
    Position::new(rng.random_range(lo..=hi), rng.random_range(lo..=hi))
}

fn uniform_in_disc<R: Rng + ?Sized>(center: Position, radius: f64, rng: &mut R) -> Position {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Position::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

/// Panic-aware group placement: returns `(user position, group reference)`
/// for each of `k` users.
pub(crate) fn place_panic_groups<R: Rng + ?Sized>(
    k: usize,
    side: f64,
    mobility: &MobilityParams,
    failed_sites: &[Position],
    rng: &mut R,
) -> Vec<(Position, Position)> {
    if k == 0 {
        return Vec::new();
    }
    let r = mobility.group_radius_m;
    let groups = (k / mobility.group_size as usize).max(1);
    let panicking = (mobility.panic_fraction * groups as f64).round() as usize;

    let references: Vec<Position> = (0..groups)
        .map(|g| {
            let mut reference = uniform_in_square(r, side - r, rng);
            if g < panicking {
                let nearest = failed_sites.iter().min_by(|a, b| {
                    a.distance_to(&reference).total_cmp(&b.distance_to(&reference))
                });
                if let Some(site) = nearest {
                    let (dx, dy) = (reference.x - site.x, reference.y - site.y);
                    let norm = dx.hypot(dy);
                    let (ux, uy) = if norm > 0.0 {
                        (dx / norm, dy / norm)
                    } else {
                        let theta = 2.0 * PI * rng.random::<f64>();
                        (theta.cos(), theta.sin())
                    };
                    let d = mobility.panic_distance_m;
                    reference = Position::new(
                        (reference.x + d * ux).clamp(r, side - r),
                        (reference.y + d * uy).clamp(r, side - r),
                    );
                }
            }
            reference
        })
        .collect();

    (0..k)
        .map(|u| {
            let reference = references[u % groups];
            (uniform_in_disc(reference, r, rng), reference)
        })
        .collect()
}

/// Draws the `K` user terminals.
///
/// Placement is uniform unless the scenario is in disaster mode and at least
/// one site in `gnbs` is marked failed, in which case users are placed by
/// panic-aware group mobility. Activity flags come from `activity_rng` so
/// that placement and traffic draws stay independent.
pub fn generate_users<R: Rng + ?Sized, A: Rng + ?Sized>(
    scenario: &Scenario,
    gnbs: &[GnbSite],
    rng: &mut R,
    activity_rng: &mut A,
) -> Vec<UserTerminal> {
    let k = scenario.n_users as usize;
    let side = scenario.area_side_m;
    let failed: Vec<Position> = gnbs.iter().filter(|g| !g.active).map(|g| g.pos).collect();

    let positions: Vec<Position> = if scenario.mode == Mode::Disaster && !failed.is_empty() {
        place_panic_groups(k, side, &scenario.mobility, &failed, rng)
            .into_iter()
            .map(|(p, _)| p)
            .collect()
    } else {
        (0..k).map(|_| uniform_in_square(0.0, side, rng)).collect()
    };

    positions
        .into_iter()
        .enumerate()
        .map(|(id, pos)| {
            debug_assert!(pos.inside(side));
            let active = scenario.activity >= 1.0 || activity_rng.random_bool(scenario.activity);
            UserTerminal::new(id, pos, active)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn single_site_sits_at_center() {
        let s = Scenario {
            n_gnb: 1,
            area_side_m: 300.0,
            ..Scenario::default()
        };
        let sites = generate_gnb_layout(&Scenario { perturbation_frac: 0.0, ..s }, &mut rng(1)).unwrap();
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].pos, Position::new(150.0, 150.0));
        assert!(sites[0].active);
        assert_eq!(sites[0].load, 0);
    }

    fn neighbour_pairs(sites: &[GnbSite], lattice: &[(f64, f64)], isd: f64) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..lattice.len() {
            for j in i + 1..lattice.len() {
                let d = (lattice[i].0 - lattice[j].0).hypot(lattice[i].1 - lattice[j].1);
                if (d - isd).abs() < 1e-6 {
                    pairs.push((sites[i].id, sites[j].id));
                }
            }
        }
        pairs
    }

    #[test]
    fn unperturbed_lattice_spacing_is_exact() {
        let s = Scenario {
            perturbation_frac: 0.0,
            ..Scenario::default()
        };
        let sites = generate_gnb_layout(&s, &mut rng(2)).unwrap();
        assert_eq!(sites.len(), 10);
        let lattice = hex_lattice(10, 500.0);
        let pairs = neighbour_pairs(&sites, &lattice, 500.0);
        assert!(pairs.len() >= 15);
        for (a, b) in pairs {
            let d = sites[a].pos.distance_to(&sites[b].pos);
            assert!((d - 500.0).abs() < 1e-9, "{d}");
        }
        // Minimum spacing over all pairs is the ISD.
        for a in &sites {
            for b in &sites {
                if a.id != b.id {
                    assert!(a.pos.distance_to(&b.pos) >= 500.0 - 1e-9);
                }
            }
        }
    }

    #[test]
    fn perturbed_neighbours_stay_within_bounds() {
        let s = Scenario::default();
        let lattice = hex_lattice(10, 500.0);
        for seed in 0..200 {
            let sites = generate_gnb_layout(&s, &mut rng(seed)).unwrap();
            for (i, site) in sites.iter().enumerate() {
                let nominal = (1000.0 + lattice[i].0, 1000.0 + lattice[i].1);
                assert!((site.pos.x - nominal.0).abs() <= 50.0);
                assert!((site.pos.y - nominal.1).abs() <= 50.0);
                assert!(site.pos.inside(2000.0));
            }
            for (a, b) in neighbour_pairs(&sites, &lattice, 500.0) {
                let d = sites[a].pos.distance_to(&sites[b].pos);
                assert!((400.0..=600.0).contains(&d), "{d}");
            }
        }
    }

    #[test]
    fn layout_rejects_small_area() {
        let s = Scenario {
            area_side_m: 600.0,
            ..Scenario::default()
        };
        assert!(matches!(
            generate_gnb_layout(&s, &mut rng(0)),
            Err(SimError::Config { .. })
        ));
    }

    #[test]
    fn no_users_when_k_is_zero() {
        let s = Scenario {
            n_users: 0,
            ..Scenario::default()
        };
        assert!(generate_users(&s, &[], &mut rng(0), &mut rng(1)).is_empty());
        assert!(place_panic_groups(0, 2000.0, &MobilityParams::default(), &[], &mut rng(0)).is_empty());
    }

    #[test]
    fn uniform_moments() {
        let s = Scenario {
            mode: Mode::Tn,
            ..Scenario::default()
        };
        let mut r = rng(5);
        let mut a = rng(6);
        let (mut n, mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        while n < 1e5 {
            for u in generate_users(&s, &[], &mut r, &mut a) {
                n += 1.0;
                sx += u.pos.x;
                sy += u.pos.y;
                sxx += u.pos.x * u.pos.x;
                syy += u.pos.y * u.pos.y;
            }
        }
        let (mx, my) = (sx / n, sy / n);
        assert!((mx - 1000.0).abs() / 1000.0 < 0.01);
        assert!((my - 1000.0).abs() / 1000.0 < 0.01);
        let var = 2000.0f64.powi(2) / 12.0;
        assert!(((sxx / n - mx * mx) - var).abs() / var < 0.02);
        assert!(((syy / n - my * my) - var).abs() / var < 0.02);
    }

    #[test]
    fn panic_members_stay_near_reference() {
        let failed = [Position::new(1000.0, 1000.0), Position::new(400.0, 1500.0)];
        let m = MobilityParams::default();
        for seed in 0..20 {
            let placed = place_panic_groups(300, 2000.0, &m, &failed, &mut rng(seed));
            assert_eq!(placed.len(), 300);
            for (p, reference) in placed {
                assert!(p.distance_to(&reference) <= 100.0 + 1e-9);
                assert!(p.inside(2000.0));
            }
        }
    }

    #[test]
    fn disaster_without_failures_places_uniformly() {
        let s = Scenario::default();
        let sites = generate_gnb_layout(&s, &mut rng(0)).unwrap();
        let a = generate_users(&s, &sites, &mut rng(9), &mut rng(10));
        let b = generate_users(&s.clone().with_mode(Mode::Tn), &sites, &mut rng(9), &mut rng(10));
        assert_eq!(a, b);
    }

    #[test]
    fn panic_placement_moves_users_off_failed_sites() {
        let s = Scenario::default();
        let mut sites = generate_gnb_layout(&s, &mut rng(0)).unwrap();
        sites[0].active = false;
        let mean_dist = |users: &[UserTerminal]| {
            users.iter().map(|u| u.pos.distance_to(&sites[0].pos)).sum::<f64>() / users.len() as f64
        };
        let (mut panic, mut uniform) = (0.0, 0.0);
        for seed in 0..50 {
            panic += mean_dist(&generate_users(&s, &sites, &mut rng(seed), &mut rng(0)));
            uniform += mean_dist(&generate_users(
                &s.clone().with_mode(Mode::Tn),
                &sites,
                &mut rng(seed),
                &mut rng(0),
            ));
        }
        assert!(panic > uniform);
    }

    #[test]
    fn activity_fraction() {
        let s = Scenario {
            activity: 0.3,
            n_users: 10_000,
            mode: Mode::Tn,
            ..Scenario::default()
        };
        let users = generate_users(&s, &[], &mut rng(1), &mut rng(2));
        let frac = users.iter().filter(|u| u.active).count() as f64 / 10_000.0;
        assert!((frac - 0.3).abs() < 0.02);
    }
}
