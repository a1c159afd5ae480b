use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const HORIZON: usize = 12;

const SMALL: &str = r#"
horizon = 12
runs = 2
seed = 5

[[sensors]]
count = 2
detection_probability = 0.9
noise = [100.0, 100.0]
clutter_rate = 5.0
region = { x = [-10000.0, 10000.0], y = [-10000.0, 10000.0] }

[birth]
iterations = 40
mode = "herded"

[update]
iterations = 40
mode = "herded"

[[targets]]
birth = 0
state = [-500.0, 10.0, 300.0, -5.0]

[[targets]]
birth = 3
death = 10
state = [800.0, -8.0, -400.0, 6.0]

[[campaign.modes]]
filter = "lmb"
birth = "herded"
update = "stochastic"

[[campaign.modes]]
filter = "glmb"
birth = "herded"
update = "stochastic"
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_herdtrack"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn simulate(config: &Path, seed: &str, out: &Path) {
    let o = run(&["simulate", "--config", s(config), "--seed", seed, "--out", s(out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn track(config: &Path, data: &Path, seed: &str, mode: &str, out: &Path) -> Output {
    run(&[
        "track",
        "--config",
        s(config),
        "--measurements",
        s(&data.join("measurements.txt")),
        "--truth",
        s(&data.join("truth.txt")),
        "--seed",
        seed,
        "--mode",
        mode,
        "--out",
        s(out),
    ])
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    simulate(&shipped("paper.toml"), "7", &a);
    simulate(&shipped("paper.toml"), "7", &b);
    for f in ["measurements.txt", "truth.txt"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let header = String::from_utf8(read(&a.join("measurements.txt"))).unwrap();
    assert!(header.starts_with("measurements 8 100\n"));
}

#[test]
fn zero_horizon_writes_empty_files() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "zero.toml", &SMALL.replace("horizon = 12", "horizon = 0"));
    let out = dir.path().join("out");
    simulate(&config, "1", &out);
    assert_eq!(read(&out.join("measurements.txt")), b"measurements 2 0\n");
    assert_eq!(read(&out.join("truth.txt")), b"truth 0\n");
}

#[test]
fn missing_sensors_exits_two() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "bad.toml", "horizon = 5\n");
    let o = run(&["simulate", "--config", s(&config), "--out", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sensors: required"));
}

#[test]
fn unknown_key_reports_line() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "typo.toml", &SMALL.replace("clutter_rate = 5.0", "clutter_rat = 5.0"));
    let o = run(&["simulate", "--config", s(&config), "--out", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("line 10"), "{stderr}");
}

#[test]
fn track_reproducible() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "small.toml", SMALL);
    let data = dir.path().join("data");
    simulate(&config, "3", &data);
    for (mode, seeds) in [("herded/herded", ["1", "2"]), ("herded/stochastic", ["9", "9"])] {
        let outs: Vec<PathBuf> = seeds
            .iter()
            .enumerate()
            .map(|(i, seed)| {
                let out = dir.path().join(format!("{}-{i}", mode.replace('/', "-")));
                let o = track(&config, &data, seed, mode, &out);
                assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
                out
            })
            .collect();
        assert_eq!(read(&outs[0].join("estimates.txt")), read(&outs[1].join("estimates.txt")), "{mode}");
        assert!(!read(&outs[0].join("records.csv")).is_empty());
    }
    let records = String::from_utf8(read(&dir.path().join("herded-herded-0/records.csv"))).unwrap();
    assert_eq!(records.lines().count(), HORIZON + 1);
    assert!(records.starts_with("run,seed,step,ospa2,truth_card,est_card\n"));
}

#[test]
fn track_stochastic_different_seeds_succeeds() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "small.toml", SMALL);
    let data = dir.path().join("data");
    simulate(&config, "3", &data);
    for seed in ["1", "2"] {
        let o = track(&config, &data, seed, "stochastic", &dir.path().join(seed));
        assert!(o.status.success());
    }
}

#[test]
fn track_sensor_mismatch_exits_two() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "small.toml", SMALL);
    let one = write_config(&dir, "one.toml", &SMALL.replace("count = 2", "count = 1"));
    let data = dir.path().join("data");
    simulate(&one, "3", &data);
    let o = track(&config, &data, "1", "herded", &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

fn parse_csv(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn campaign_outputs_and_aggregates() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "small.toml", SMALL);
    let out = dir.path().join("campaign");
    let o = run(&["campaign", "--config", s(&config), "--out", s(&out), "--workers", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let runs = String::from_utf8(read(&out.join("runs.csv"))).unwrap();
    assert!(runs.starts_with("mode,run,step,ospa2,truth_card,est_card\n"));
    let rows = parse_csv(&runs);
    assert_eq!(rows.len(), 2 * 2 * HORIZON);

    let mut sums: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    for r in &rows {
        let e = sums.entry((r[0].clone(), r[2].parse().unwrap())).or_default();
        e.0 += r[3].parse::<f64>().unwrap();
        e.1 += 1;
    }
    let summary = parse_csv(&String::from_utf8(read(&out.join("summary.csv"))).unwrap());
    assert_eq!(summary.len(), 2 * HORIZON);
    for r in &summary {
        let (sum, n) = sums[&(r[0].clone(), r[1].parse().unwrap())];
        let mean: f64 = r[2].parse().unwrap();
        assert!((mean - sum / n as f64).abs() <= 1e-12, "{r:?}");
        assert_eq!(r[3], "2");
    }
    let svg = String::from_utf8(read(&out.join("ospa2.svg"))).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(out.join("timing.csv").exists());
}

#[test]
fn campaign_duplicate_modes_agree() {
    let dir = TempDir::new().unwrap();
    let text = SMALL.replace("filter = \"glmb\"", "filter = \"lmb\"");
    let config = write_config(&dir, "dup.toml", &text);
    let out = dir.path().join("campaign");
    let o = run(&["campaign", "--config", s(&config), "--out", s(&out), "--runs", "2", "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = parse_csv(&String::from_utf8(read(&out.join("summary.csv"))).unwrap());
    let (first, second): (Vec<_>, Vec<_>) = summary.iter().partition(|r| !r[0].ends_with("#2"));
    assert_eq!(first.len(), HORIZON);
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a[1..], b[1..]);
    }
}

#[test]
fn campaign_is_deterministic_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "small.toml", SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let o = run(&["campaign", "--config", s(&config), "--out", s(out), "--workers", workers]);
        assert!(o.status.success());
    }
    for f in ["runs.csv", "summary.csv", "ospa2.svg"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
}

#[test]
fn metrics_command_matches_track_records() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "small.toml", SMALL);
    let data = dir.path().join("data");
    simulate(&config, "4", &data);
    let out = dir.path().join("track");
    assert!(track(&config, &data, "1", "herded", &out).status.success());
    let csv = dir.path().join("metrics.csv");
    let o = run(&[
        "metrics",
        "--truth",
        s(&data.join("truth.txt")),
        "--estimates",
        s(&out.join("estimates.txt")),
        "--config",
        s(&config),
        "--out",
        s(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics = parse_csv(&String::from_utf8(read(&csv)).unwrap());
    let records = parse_csv(&String::from_utf8(read(&out.join("records.csv"))).unwrap());
    assert_eq!(metrics.len(), HORIZON);
    for (m, r) in metrics.iter().zip(&records) {
        assert_eq!(m[..], r[2..]);
    }
}

#[test]
fn metrics_rejects_malformed_estimates() {
    let dir = TempDir::new().unwrap();
    let truth = write_config(&dir, "truth.txt", "truth 1\n0 0 1 0 1 0\n");
    let est = write_config(&dir, "est.txt", "estimates 1\n0 garbage\n");
    let o = run(&["metrics", "--truth", s(&truth), "--estimates", s(&est)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}
