use std::fs;
use std::path::Path;

use tnntn::cli::run_with_args;
use tnntn::output::{AGGREGATE_HEADER, RAW_HEADER};

fn sim(args: &[&str]) -> i32 {
    let mut v = vec!["sim"];
    v.extend_from_slice(args);
    run_with_args(v)
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let ix = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(ix).unwrap().to_string()).collect()
}

#[test]
fn run_writes_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tn.csv");
    let o = out.to_str().unwrap();
    assert_eq!(sim(&["run", "--set", "scenario.mode=tn", "--out", o]), 0);
    let csv = read(&out);
    assert_eq!(csv.lines().count(), 51);
    assert_eq!(csv.lines().next().unwrap(), RAW_HEADER);
    assert!(column(&csv, "mode").iter().all(|m| m == "tn"));
    assert!(column(&csv, "k_users").iter().all(|k| k == "300"));

    let json: serde_json::Value = serde_json::from_str(&read(&dir.path().join("tn.json"))).unwrap();
    assert_eq!(json["config"]["scenario"]["mode"], "tn");
    assert_eq!(json["points"][0]["stats"]["runs"], 50);
}

#[test]
fn run_is_byte_identical_across_repeats_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.csv", "b.csv", "c.csv"].iter().map(|n| dir.path().join(n)).collect();
    for (p, threads) in paths.iter().zip(["1", "1", "4"]) {
        let code = sim(&["run", "--set", "run.runs=20", "--seed", "9", "--threads", threads, "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    assert_eq!(read(&paths[0]), read(&paths[1]));
    assert_eq!(read(&paths[0]), read(&paths[2]));
    assert_eq!(read(&paths[0].with_extension("json")), read(&paths[2].with_extension("json")));
}

#[test]
fn disaster_run_populates_fallback_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    assert_eq!(sim(&["run", "--set", "run.runs=10", "--out", out.to_str().unwrap()]), 0);
    let csv = read(&out);
    let eta: Vec<f64> = column(&csv, "fallback_ratio").iter().map(|v| v.parse().unwrap()).collect();
    let active: Vec<u32> = column(&csv, "active_gnbs").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(eta.len(), 10);
    assert!(eta.iter().any(|&e| e > 0.0));
    assert!(active.iter().all(|&a| a <= 10));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    fs::write(&empty, "").unwrap();
    let outs: Vec<_> = ["default.csv", "empty.csv", "same.csv"].iter().map(|n| dir.path().join(n)).collect();
    assert_eq!(sim(&["run", "--set", "run.runs=5", "--out", outs[0].to_str().unwrap()]), 0);
    assert_eq!(
        sim(&["run", "--config", empty.to_str().unwrap(), "--set", "run.runs=5", "--out", outs[1].to_str().unwrap()]),
        0
    );
    assert_eq!(
        sim(&["run", "--set", "run.runs=5", "--set", "tn.bandwidth_hz=2e7", "--out", outs[2].to_str().unwrap()]),
        0
    );
    assert_eq!(read(&outs[0]), read(&outs[1]));
    assert_eq!(read(&outs[0]), read(&outs[2]));

    let rejected = dir.path().join("rejected.csv");
    assert_eq!(sim(&["run", "--set", "disaster.p_f=1.5", "--out", rejected.to_str().unwrap()]), 2);
    assert!(!rejected.exists());

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[disaster]\nunknown_key = 1\n").unwrap();
    assert_eq!(sim(&["run", "--config", bad.to_str().unwrap()]), 2);
}

#[test]
fn fig3_has_six_points() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(sim(&["sweep", "--preset", "fig3", "--set", "run.runs=4", "--out", d]), 0);
    let agg = read(&dir.path().join("fig3_disaster.csv"));
    assert_eq!(agg.lines().next().unwrap(), AGGREGATE_HEADER);
    assert_eq!(column(&agg, "p_f"), ["0", "0.2", "0.4", "0.6", "0.8", "1"]);
    assert_eq!(column(&agg, "runs"), vec!["4"; 6]);
    let eta = column(&agg, "fallback_ratio_mean");
    assert_eq!(eta.first().unwrap(), "0");
    assert_eq!(eta.last().unwrap(), "1");
    assert_eq!(read(&dir.path().join("fig3_raw.csv")).lines().count(), 1 + 6 * 4);
}

#[test]
fn fig4_covers_feeder_values() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(sim(&["sweep", "--preset", "fig4", "--set", "run.runs=2", "--out", d]), 0);
    let feeder = column(&read(&dir.path().join("fig4_disaster.csv")), "feeder_mbps");
    assert_eq!(feeder, ["150", "250", "350", "450", "600"]);
}

#[test]
fn fig2_writes_one_file_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(sim(&["sweep", "--preset", "fig2", "--set", "run.runs=2", "--out", d]), 0);
    for mode in ["tn", "ntn", "disaster"] {
        let agg = read(&dir.path().join(format!("fig2_{mode}.csv")));
        assert_eq!(column(&agg, "k_users"), ["100", "200", "300", "400", "500"]);
        assert!(column(&agg, "mode").iter().all(|m| m == mode));
    }
    assert!(dir.path().join("fig2_summary.json").exists());
}

#[test]
fn custom_single_value_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let code = sim(&[
        "sweep",
        "--set",
        "sweep.parameter=eta",
        "--set",
        "sweep.values=[0.25]",
        "--set",
        "run.runs=3",
        "--out",
        d,
    ]);
    assert_eq!(code, 0);
    let agg = read(&dir.path().join("sweep_disaster.csv"));
    assert_eq!(agg.lines().count(), 2);
    assert_eq!(column(&agg, "eta_cfg"), ["0.25"]);
}

#[test]
fn sweep_is_thread_count_independent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let d = dir.path().to_str().unwrap();
        assert_eq!(sim(&["sweep", "--preset", "fig2", "--set", "run.runs=3", "--threads", threads, "--out", d]), 0);
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for n in names {
        assert_eq!(read(&a.path().join(&n)), read(&b.path().join(&n)), "{n:?}");
    }
}

#[test]
fn sweep_errors() {
    assert_eq!(sim(&["sweep", "--preset", "fig5"]), 2);
    assert_eq!(sim(&["sweep", "--set", "run.runs=1"]), 2);
    assert_eq!(sim(&["sweep", "--set", "sweep.parameter=failure_prob", "--set", "sweep.values=[0.5, 1.5]"]), 2);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("run.csv");
    assert_eq!(sim(&["run", "--set", "run.runs=1", "--out", out.to_str().unwrap()]), 3);
}
