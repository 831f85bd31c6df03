//! Load-aware greedy association on a perturbed hexagonal layout: per-cell
//! load, mean SINR and the resulting rate / latency of each cell.

use tnntn::scenario::{generate_gnb_layout, generate_users};
use tnntn::streams::{run_seed, Purpose, RunStreams};
use tnntn::tn::{associate_users, load_penalty_db, tn_user_latency, tn_user_rate, TnChannel};
use tnntn::{Mode, Scenario};

fn main() -> tnntn::Result<()> {
    let scenario = Scenario {
        n_users: 400,
        ..Scenario::default()
    }
    .with_mode(Mode::Tn);
    let streams = RunStreams::new(run_seed(scenario.master_seed, 0, 0));

    let gnbs = generate_gnb_layout(&scenario, &mut streams.rng(Purpose::Layout))?;
    let users = generate_users(
        &scenario,
        &gnbs,
        &mut streams.rng(Purpose::Users),
        &mut streams.rng(Purpose::Activity),
    );
    let channel = TnChannel::build(&users, &gnbs, &scenario.tn, &mut streams.rng(Purpose::Shadowing))?;
    let ids: Vec<usize> = (0..users.len()).collect();
    let l_max = scenario.tn.l_max;
    let assignment = associate_users(&users, &ids, &gnbs, &channel, l_max)?.expect("all sites are up");

    println!("{} users on {} sites, L_max = {l_max}", users.len(), gnbs.len());
    println!("gnb      x       y   load  penalty  mean SINR  rate/user  latency");
    for g in &gnbs {
        let load = assignment.load.counts[g.id];
        let sinrs: Vec<f64> = assignment
            .associations
            .iter()
            .filter(|a| a.gnb_id == g.id)
            .map(|a| a.sinr_db)
            .collect();
        let mean_sinr = sinrs.iter().sum::<f64>() / sinrs.len().max(1) as f64;
        println!(
            "{:>3} {:>7.1} {:>7.1} {:>6} {:>6.2} dB {:>7.2} dB {:>6.2} Mbps {:>5.2} ms",
            g.id,
            g.pos.x,
            g.pos.y,
            load,
            load_penalty_db(load, l_max)?,
            mean_sinr,
            tn_user_rate(mean_sinr, load, scenario.tn.bandwidth_hz) / 1e6,
            tn_user_latency(0.0, load, &scenario.tn) * 1e3
        );
    }
    Ok(())
}
