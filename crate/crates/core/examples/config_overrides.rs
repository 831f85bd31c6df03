//! Building a run from a TOML document plus `key=value` overrides, then
//! emitting the per-run CSV and aggregate statistics.

use tnntn::config::RunConfig;
use tnntn::harness::{run_point_indexed, KpiStats};
use tnntn::output;

const DOC: &str = r#"
[scenario]
n_users = 200
mode = "disaster"

[disaster]
p_f = 0.3

[run]
runs = 5
"#;

fn main() -> tnntn::Result<()> {
    let overrides = vec!["disaster.eta_cfg=0.8".to_string(), "ntn.feeder_capacity_bps=150e6".to_string()];
    let cfg = RunConfig::from_toml_str(DOC, &overrides)?;
    let scenario = cfg.scenario();
    let records = run_point_indexed(&scenario, 0, cfg.run.runs)?;
    print!("{}", output::raw_csv(&scenario, &records));

    let kpis: Vec<_> = records.iter().map(|r| r.kpis).collect();
    let stats = KpiStats::from_kpis(&kpis);
    println!(
        "\nmean {:.3} Mbps/user over {} runs",
        stats.per_user_throughput_bps.mean / 1e6,
        stats.runs
    );

    match RunConfig::from_toml_str(DOC, &["disaster.p_f=1.5".to_string()]) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!("p_f outside [0, 1] is invalid"),
    }
    Ok(())
}
