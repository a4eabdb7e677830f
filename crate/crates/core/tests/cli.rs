//! The command-line front end, driven in-process.

use isa_mesh::cli::{run_cli, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use isa_mesh::trace::fixtures;

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("isa-mesh").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn csv_value(out: &str, quantity: &str) -> f64 {
    out.lines()
        .find_map(|l| {
            let mut f = l.split(',');
            (f.next() == Some(quantity)).then(|| f.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("{quantity} missing in\n{out}"))
}

fn golden() -> String {
    fixtures::fixture_path(fixtures::GOLDEN_TRACE)
        .display()
        .to_string()
}

#[test]
fn budget_multihop_benefit() {
    let (code, out, _) = cli(&[
        "budget",
        "--sf",
        "7",
        "--n-hops",
        "2",
        "--compare-sf",
        "10",
        "--csv",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!((csv_value(&out, "multihop_benefit") - 2.6).abs() < 0.05);
}

#[test]
fn budget_default_range() {
    let (code, out, _) = cli(&["budget", "--sf", "7", "--csv"]);
    assert_eq!(code, EXIT_OK);
    assert!((csv_value(&out, "range") - 1250.0).abs() < 125.0);
    assert_eq!(csv_value(&out, "packet_bytes"), 354.25);
}

#[test]
fn budget_rejects_bad_sf() {
    let (code, _, err) = cli(&["budget", "--sf", "6"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--sf"));
}

#[test]
fn compress_golden_with_metrics() {
    let (code, out, err) = cli(&[
        "compress",
        &golden(),
        "--y",
        "0.02",
        "--metrics",
        "--x",
        "0.1",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 13);
    assert!(err.contains("compression_ratio=8.3333"), "{err}");
    let corr: f64 = err
        .split("correlation=")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(corr > 0.98);
    assert!(err.contains("anomaly at t=28"));
}

#[test]
fn compress_sweep_has_ten_rows() {
    let (code, out, _) = cli(&["compress", &golden(), "--y-sweep", "0.005:0.05:0.005"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "y,kept,compression_ratio,correlation");
    assert_eq!(lines.len(), 11);
}

#[test]
fn compress_constant_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    let mut text = String::from("timestamp_s,channel,value\n");
    for t in 0..50 {
        text.push_str(&format!("{t},humidity,42\n"));
    }
    std::fs::write(&path, text).unwrap();
    let (code, out, err) = cli(&["compress", path.to_str().unwrap(), "--metrics"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 2);
    assert!(
        err.contains("compression_ratio=50.0000") && err.contains("correlation=constant"),
        "{err}"
    );
}

#[test]
fn compress_missing_file_fails() {
    let (code, _, err) = cli(&["compress", "/nonexistent/trace.csv"]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.contains("error"));
}

#[test]
fn simulate_ladder_is_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = cli(&[
        "simulate",
        "--ladder",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<Vec<String>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        names,
        [
            "lora_every_second",
            "duty_cycled_lora",
            "isa",
            "isa_ci",
            "isa_ci_cas"
        ]
    );
    let hours: f64 = rows[0][4].parse().unwrap();
    let days: f64 = rows[4][5].parse().unwrap();
    assert!((hours - 4.3).abs() / 4.3 < 0.1);
    assert!((days - 104.0).abs() / 104.0 < 0.1);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("ladder.csv")).unwrap(),
        out
    );
}

#[test]
fn simulate_same_seed_same_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let (code, _, err) = cli(&[
            "simulate",
            "--mode",
            "isa_ci_cas",
            "--nodes",
            "3",
            "--seed",
            "9",
            "--set",
            "duration=2d",
            "--set",
            "noise=0.003",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
    }
    for f in ["events.csv", "summary.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn simulate_singleton_cluster() {
    let (code, out, _) = cli(&[
        "simulate",
        "--mode",
        "isa_ci_cas",
        "--nodes",
        "1",
        "--set",
        "duration=5d",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("singleton"));
}

#[test]
fn simulate_preset_file() {
    let preset = concat!(env!("CARGO_MANIFEST_DIR"), "/presets/isa_ci_cas.cfg");
    let (code, out, _) = cli(&["simulate", preset, "--set", "duration=1d"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("isa_ci_cas"));
}

#[test]
fn simulate_names_bad_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "mode = isa\nbogus_key = 3\n").unwrap();
    let (code, _, err) = cli(&["simulate", path.to_str().unwrap()]);
    assert_ne!(code, EXIT_OK);
    assert!(err.contains("bogus_key"), "{err}");
}

#[test]
fn sweep_ci_savings_is_affine() {
    let (code, out, _) = cli(&["sweep", "ci_savings", "--n", "1:20"]);
    assert_eq!(code, EXIT_OK);
    let s: Vec<f64> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(s.len(), 20);
    let slope = s[1] - s[0];
    assert!(s.windows(2).all(|w| ((w[1] - w[0]) - slope).abs() < 1e-12));
    // Slope: one saved long-range uplink minus one node's short-range and CI compute.
    assert!((slope - (50e-3 - 359e-6 - 1.4e-3)).abs() < 1e-12);
}

#[test]
fn sweep_lifetime_vs_n() {
    let (code, out, _) = cli(&["sweep", "lifetime_vs_n", "--n", "1:20"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<Vec<f64>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| (r[4] - 0.96).abs() <= 0.01));
    assert!(rows.windows(2).all(|w| w[1][5] > w[0][5]));
}

#[test]
fn sweep_sf_range_bits() {
    let (code, out, _) = cli(&["sweep", "sf_range_bits"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<Vec<f64>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 18);
    let two_sf7 = rows.iter().find(|r| r[0] == 7.0 && r[1] == 2.0).unwrap();
    let one_hop = rows
        .iter()
        .filter(|r| r[1] == 1.0 && r[3] >= 2500.0)
        .min_by(|a, b| a[0].total_cmp(&b[0]))
        .unwrap();
    assert!(two_sf7[3] >= 2490.0);
    assert!(two_sf7[7] >= 2.5 * one_hop[7]);
}

#[test]
fn sweep_unknown_key_lists_keys() {
    let (code, _, err) = cli(&["sweep", "fig99"]);
    assert_ne!(code, EXIT_OK);
    assert!(err.contains("lifetime_ladder") && err.contains("duty_cycle"));
}

#[test]
fn sweep_is_deterministic() {
    assert_eq!(
        cli(&["sweep", "duty_cycle", "--n", "1:100"]),
        cli(&["sweep", "duty_cycle", "--n", "1:100"])
    );
}
