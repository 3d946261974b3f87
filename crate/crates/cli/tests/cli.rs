use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fcpi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcpi")).args(args).env_remove("FCPI_OUT").output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "exit {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares with the stored report; `FCPI_UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &[u8]) {
    let path = golden(name);
    if std::env::var_os("FCPI_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert!(expected == actual, "{name} differs from the golden report");
}

fn counts(report: &Value) -> (usize, usize) {
    let p = &report["data"]["presentation"];
    (p["generators"].as_array().unwrap().len(), p["relators"].as_array().unwrap().len())
}

#[test]
fn present_catalog_shapes() {
    for (label, shape) in [("pi1-x3", (4, 9)), ("cover-x3-canonical", (11, 39)), ("pi1-x2", (3, 3))] {
        let r = json_of(&fcpi(&["present", "--label", label]));
        assert_eq!(counts(&r), shape, "{label}");
        assert_eq!(r["passed"], true);
    }
}

#[test]
fn unknown_label_exits_nonzero() {
    let out = fcpi(&["present", "--label", "pi1-x99-nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown catalog label"));
}

#[test]
fn config_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 3\nroot_tolerance = 1e-10\n").unwrap();
    let out = fcpi(&["rij-count", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn config_rejects_nonpositive_tolerance() {
    let out = fcpi(&["monodromy-criticals", "--root-tol=-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = fcpi(&["equiv", "--left", "pi1-x2", "--right", "pi1-x2", "--search-nodes", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 3\nformat = \"json\"\n").unwrap();
    let from_file = json_of(&fcpi(&["rij-count", "--config", cfg.to_str().unwrap()]));
    assert_eq!(from_file["data"]["count"], 3);
    let overridden = json_of(&fcpi(&["rij-count", "--config", cfg.to_str().unwrap(), "--n", "4"]));
    assert_eq!(overridden["data"]["count"], 18);
    assert_ne!(from_file["config_hash"], overridden["config_hash"]);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fcpi"))
        .args(["fc-poly", "--n", "2", "--format", "text"])
        .env("FCPI_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let written = std::fs::read(dir.path().join("fc-poly-2.txt")).unwrap();
    assert_eq!(written, out.stdout);
}

#[test]
fn fc_poly_degrees() {
    for n in 1..=5u32 {
        let r = json_of(&fcpi(&["fc-poly", "--n", &n.to_string()]));
        assert_eq!(r["data"]["degree"], 1u64 << (n - 1), "n = {n}");
    }
    let r = json_of(&fcpi(&["fc-poly", "--n", "3"]));
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == "closed form" && c["passed"] == true));
}

#[test]
fn rij_counts() {
    assert_eq!(json_of(&fcpi(&["rij-count", "--n", "3"]))["data"]["count"], 3);
    assert_eq!(json_of(&fcpi(&["rij-count", "--n", "4"]))["data"]["count"], 18);
}

#[test]
fn cover_derive_two_matches_golden_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let first = fcpi(&["cover-derive", "--n", "2", "--out-dir", d]);
    let second = fcpi(&["cover-derive", "--n", "2"]);
    assert_eq!(first.stdout, second.stdout, "reports are not byte-identical");
    let r = json_of(&first);
    assert_eq!(r["data"]["transversal"], serde_json::json!(["1", "g1", "g2", "g1*g2"]));
    assert_eq!(r["data"]["subgroup_generators"].as_array().unwrap().len(), 9);
    assert_eq!(r["data"]["cells"].as_array().unwrap().len(), 12);
    assert_eq!(counts(&r).0, 6);
    check_golden("cover-derive-2.json", &first.stdout);

    let saved = dir.path().join("cover-derive-2.json");
    let replayed = json_of(&fcpi(&["replay", "--report", saved.to_str().unwrap()]));
    assert_eq!(replayed["passed"], true);

    let e = json_of(&fcpi(&["equiv", "--left", saved.to_str().unwrap(), "--right", "cover-x2-canonical"]));
    assert_eq!(e["passed"], true);
}

#[test]
fn cover_derive_three_matches_golden() {
    let out = fcpi(&["cover-derive", "--n", "3"]);
    let r = json_of(&out);
    assert_eq!(r["data"]["subgroup_generators"].as_array().unwrap().len(), 25);
    assert_eq!(r["data"]["cells"].as_array().unwrap().len(), 72);
    assert_eq!(counts(&r).0, 11);
    assert_ne!(r["data"]["verdict"]["tier"], "refuted");
    check_golden("cover-derive-3.json", &out.stdout);
}

#[test]
fn monodromy_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let r = json_of(&fcpi(&["monodromy-criticals", "--out-dir", d]));
    assert_eq!(r["data"]["criticals"]["values"].as_array().unwrap().len(), 21);
    let saved: Value = serde_json::from_slice(&std::fs::read(dir.path().join("criticals.json")).unwrap()).unwrap();
    assert_eq!(saved, r["data"]["criticals"]);

    let r = json_of(&fcpi(&["monodromy-relations", "--trajectory", "11", "--out-dir", d]));
    assert_eq!(r["passed"], true);
    for f in ["events.json", "vk-presentation.json", "trajectory-11.csv", "monodromy-relations.json"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let csv = std::fs::read_to_string(dir.path().join("trajectory-11.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 3 + 16);
    let events: Value = serde_json::from_slice(&std::fs::read(dir.path().join("events.json")).unwrap()).unwrap();
    assert_eq!(events.as_array().unwrap().len(), 21);
}

#[test]
fn verify_all_passes() {
    let out = fcpi(&["verify-all", "--format", "text"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}{}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("monodromy-verify: event at +0.8000000000"));
    assert!(text.trim_end().ends_with("0 failed"));
}
