//! The LEO overlay on its own: constellation snapshot, visibility, serving
//! satellite choice and the feeder-link cap at several capacities.

use tnntn::channel::slant_geometry;
use tnntn::ntn::{apply_feeder_constraint, place_constellation, serve_ntn_users};
use tnntn::scenario::{Position, UserTerminal};
use tnntn::streams::{Purpose, RunStreams};
use tnntn::Scenario;

fn main() -> tnntn::Result<()> {
    let scenario = Scenario::default();
    let center = scenario.center();
    let streams = RunStreams::new(42);
    let mut sats = place_constellation(&scenario.ntn, center, &mut streams.rng(Purpose::Constellation));

    println!("sat  offset(km)  elev(deg)  slant(km)");
    for s in &sats {
        let g = slant_geometry(&center, s);
        let (dx, dy) = s.subpoint_offset_m(&center);
        println!(
            "{:>3} {:>11.1} {:>10.2} {:>10.1}",
            s.id,
            dx.hypot(dy) / 1e3,
            g.elevation_deg,
            g.slant_range_m / 1e3
        );
    }

    let users: Vec<UserTerminal> = (0..200)
        .map(|i| {
            let t = i as f64 / 200.0;
            UserTerminal::new(i, Position::new(2000.0 * t, 1000.0 + 500.0 * (t * 6.0).sin()), true)
        })
        .collect();
    let ids: Vec<usize> = (0..users.len()).collect();

    for capacity in [10e6, 50e6, 450e6] {
        let mut params = scenario.ntn.clone();
        params.feeder_capacity_bps = capacity;
        let mut u = users.clone();
        let served = serve_ntn_users(&mut u, &ids, &mut sats, &params, scenario.disaster.tau_db);
        let feeder = apply_feeder_constraint(&mut u, &served, &params)?;
        let total: f64 = served.iter().map(|&i| u[i].rate_bps).sum();
        let latency = served.iter().map(|&i| u[i].latency_s).sum::<f64>() / served.len() as f64;
        println!(
            "feeder {:>4.0} Mbps: offered {:6.2} Mbps, utilisation {:5.2}, delivered {:6.2} Mbps, latency {:.2} ms, SINR {:.2} dB",
            capacity / 1e6,
            feeder.offered_bps / 1e6,
            feeder.utilization,
            total / 1e6,
            latency * 1e3,
            u[0].sinr_db
        );
    }
    Ok(())
}
