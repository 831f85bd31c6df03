//! Feeder-link capacity sweep at a fixed disaster operating point, plus a
//! custom sweep showing where the feeder starts to bind when the NTN access
//! link is made stronger.

use tnntn::harness::{SweepParameter, SweepResult, SweepSpec};
use tnntn::{run_sweep, Preset, Scenario};

fn print(result: &SweepResult) {
    println!("feeder(Mbps)  Mbps/user  latency(ms)  fallback");
    for p in &result.points {
        let s = &p.stats;
        println!(
            "{:>12.0} {:>10.3} {:>12.2} {:>9.3}",
            p.value / 1e6,
            s.per_user_throughput_bps.mean / 1e6,
            s.mean_latency_s.mean * 1e3,
            s.fallback_ratio.mean
        );
    }
}

fn main() -> tnntn::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let spec = Preset::Fig4.specs(&Scenario::default(), runs).remove(0);
    println!("reference link budget");
    print(&run_sweep(&spec)?);

    let mut strong = spec.base.clone();
    strong.ntn.sat_eirp_dbm = 95.0;
    let spec = SweepSpec::new(
        SweepParameter::FeederCapacity,
        vec![50e6, 100e6, 150e6, 250e6, 450e6],
        runs,
        strong,
    );
    println!("\nsatellite EIRP raised to 95 dBm");
    print(&run_sweep(&spec)?);
    Ok(())
}
