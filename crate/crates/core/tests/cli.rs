use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use levynet::relu::ReluNetwork;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn levynet(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_levynet"));
    cmd.args(args).env_remove("LEVYNET_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn price_matches_golden_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = levynet(&["price", "--out", tmp.path().to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&tmp.path().join("prices.csv"));
    let (gh, golden) = read_csv(&fixture("prices_bs.csv"));
    assert_eq!(h, gh);
    assert_eq!(h, ["s", "value", "errorBound", "kind"]);
    assert_eq!(rows.len(), golden.len());
    for (r, g) in rows.iter().zip(&golden) {
        assert_eq!(r[0], g[0]);
        assert_eq!(r[3], g[3]);
        let (a, b): (f64, f64) = (r[1].parse().unwrap(), g[1].parse().unwrap());
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
    let at_one = rows.iter().find(|r| r[0] == "1").unwrap();
    assert!((at_one[1].parse::<f64>().unwrap() - 0.0796557).abs() < 1e-7);
}

#[test]
fn merton_config_prices_above_intrinsic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixture("merton_price.toml");
    let out = levynet(&["price", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&tmp.path().join("prices.csv"));
    for r in rows {
        let (s, v): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert!(v >= (s - 1.0).max(0.0) && v <= s, "{s} {v}");
    }
}

#[test]
fn missing_variant_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixture("missing_variant.toml");
    let out = levynet(&["price", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.variant"));
}

#[test]
fn unknown_key_names_its_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixture("unknown_key.toml");
    let out = levynet(&["dim-sweep", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sweep") && err.contains("targt"), "{err}");
}

#[test]
fn threads_flag_and_env_fallback_are_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let out = levynet(&["price", "--threads", "2", "--out", a.to_str().unwrap()], &[("LEVYNET_THREADS", "5")]);
    assert!(out.status.success());
    assert_eq!(report(&a)["threads"], 2);
    let b = tmp.path().join("b");
    let out = levynet(&["price", "--out", b.to_str().unwrap()], &[("LEVYNET_THREADS", "3")]);
    assert!(out.status.success());
    assert_eq!(report(&b)["threads"], 3);
    let out = levynet(&["price", "--out", b.to_str().unwrap()], &[("LEVYNET_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn paper_mode_refuses_infeasible_sample_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = levynet(&["construct", "--mode", "paper", "--out", tmp.path().to_str().unwrap()], &[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("maxSamples"));
}

#[test]
fn construct_network_reloads_and_depends_on_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |seed: &str, dir: &str| {
        let d = tmp.path().join(dir);
        let out = levynet(&["construct", "--seed", seed, "--out", d.to_str().unwrap()], &[]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(d.join("network.json")).unwrap()
    };
    let (a, b, c) = (run("1", "a"), run("1", "b"), run("2", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let net = ReluNetwork::from_json(&a).unwrap();
    assert_eq!(net.depth(), 2);
    assert_eq!(net.size(), 3 * report(&tmp.path().join("a"))["result"]["n"].as_u64().unwrap() as usize);
}

#[test]
fn network_fixture_evaluates() {
    let net = ReluNetwork::from_json(&std::fs::read_to_string(fixture("call_spread.json")).unwrap()).unwrap();
    // 0.5 ((s - 0.9)^+ - (s - 1.1)^+)
    for (s, v) in [(0.5, 0.0), (0.9, 0.0), (1.0, 0.05), (1.1, 0.1), (2.0, 0.1)] {
        assert!((net.eval1(&[s]) - v).abs() < 1e-15);
    }
    assert_eq!(net.size(), 6);
    let again = ReluNetwork::from_json(&net.to_json()).unwrap();
    assert_eq!(again.to_json(), net.to_json());
}
