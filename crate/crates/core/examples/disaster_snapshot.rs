//! One post-failure snapshot in detail: which sites failed, how many users
//! were forced or proactively moved to the satellite layer, and the KPIs.

use tnntn::harness::{build_run, run_snapshot};
use tnntn::scenario::ServingLayer;
use tnntn::streams::{run_seed, RunStreams};
use tnntn::{Mode, Scenario};

fn main() -> tnntn::Result<()> {
    let scenario = Scenario::default().with_mode(Mode::Disaster);
    let streams = RunStreams::new(run_seed(scenario.master_seed, 0, 3));

    let geometry = build_run(&scenario, &streams)?;
    let failed: Vec<usize> = geometry.gnbs.iter().filter(|g| !g.active).map(|g| g.id).collect();
    println!("failed sites: {failed:?}");

    let outcome = run_snapshot(&scenario, &streams)?;
    let users = &outcome.users;
    let count = |f: &dyn Fn(&tnntn::scenario::UserTerminal) -> bool| users.iter().filter(|u| f(u)).count();
    println!(
        "users: {} TN ({} reassociated), {} NTN ({} forced, {} proactive), {} unserved",
        count(&|u| u.serving_layer == ServingLayer::Tn),
        count(&|u| u.reassociated),
        count(&|u| u.serving_layer == ServingLayer::Ntn),
        count(&|u| u.forced_fallback),
        count(&|u| u.proactive_fallback),
        count(&|u| u.serving_layer == ServingLayer::None),
    );
    if let Some(f) = &outcome.feeder {
        println!(
            "feeder: {:.1} of {:.0} Mbps offered",
            f.offered_bps / 1e6,
            f.capacity_bps / 1e6
        );
    }
    let k = &outcome.kpis;
    println!(
        "system {:.1} Mbps, {:.3} Mbps/user, PRR {:.3}, latency {:.2} ms, fallback ratio {:.3}",
        k.sys_throughput_bps / 1e6,
        k.per_user_throughput_bps / 1e6,
        k.prr,
        k.mean_latency_s * 1e3,
        k.fallback_ratio
    );
    Ok(())
}
