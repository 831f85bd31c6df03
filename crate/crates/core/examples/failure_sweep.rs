//! Sweep of the gNB failure probability at 300 users, with mean ± std.

use tnntn::{run_sweep, Preset, Scenario};

fn main() -> tnntn::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let spec = Preset::Fig3.specs(&Scenario::default(), runs).remove(0);
    let result = run_sweep(&spec)?;
    println!(" p_f   fallback         Mbps/user        latency(ms)      PRR    active");
    for p in &result.points {
        let s = &p.stats;
        println!(
            "{:>4.1}  {:.3} ± {:.3}  {:>6.3} ± {:.3}  {:>6.2} ± {:>5.2}  {:.3}  {:>5.2}",
            p.value,
            s.fallback_ratio.mean,
            s.fallback_ratio.std,
            s.per_user_throughput_bps.mean / 1e6,
            s.per_user_throughput_bps.std / 1e6,
            s.mean_latency_s.mean * 1e3,
            s.mean_latency_s.std * 1e3,
            s.prr.mean,
            s.n_active_gnbs.mean
        );
    }
    Ok(())
}
