//! Nominal TN, nominal NTN and the post-failure hybrid over the user count.
//! Pass the number of runs per point as the first argument (default 50).

use tnntn::{run_sweep, Preset, Scenario};

fn main() -> tnntn::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    println!("mode         K   Mbps/user  latency(ms)    PRR  fallback");
    for spec in Preset::Fig2.specs(&Scenario::default(), runs) {
        let result = run_sweep(&spec)?;
        for p in &result.points {
            let s = &p.stats;
            println!(
                "{:<8} {:>5} {:>11.3} {:>12.2} {:>6.3} {:>9.3}",
                result.mode,
                p.value,
                s.per_user_throughput_bps.mean / 1e6,
                s.mean_latency_s.mean * 1e3,
                s.prr.mean,
                s.fallback_ratio.mean
            );
        }
    }
    Ok(())
}
