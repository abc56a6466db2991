use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ricci(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ricci")).current_dir(dir).args(args).output().expect("spawn ricci")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ricci(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

const K3: &str = "0 1\n1 2\n0 2\n";

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn triangle_curvature_is_three_quarters() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "k3.edges", K3);
    let out = ok(tmp.path(), &["curvature", "--input", "k3.edges"]);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 3);
    for row in rows {
        let kappa: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((kappa - 0.75).abs() < 1e-12, "{row}");
    }
    assert!(out.contains("u,v,kappa"));
}

#[test]
fn sampled_curvature_has_plan_size() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--model", "ba", "--n", "502", "--m", "2", "--out-dir", "g"]);
    let out = ok(tmp.path(), &["curvature", "--input", "g/ba_0000.edges", "--epsilon", "0.5", "--delta", "0.5"]);
    assert_eq!(data_rows(&out).len(), 6);
    assert!(out.starts_with("# sampled=true edge_total=1001"), "{out}");
    assert_eq!(ok(tmp.path(), &["sample-size", "--epsilon", "0.5", "--delta", "0.5"]).trim(), "6");
    assert_eq!(ok(tmp.path(), &["sample-size", "--epsilon", "0.05", "--delta", "0.1"]).trim(), "2120");
}

#[test]
fn usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "k3.edges", K3);
    let out = ricci(tmp.path(), &["curvature", "--input", "k3.edges", "--epsilon", "0.1"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("--delta"));
    assert_eq!(code(&ricci(tmp.path(), &["curvature", "--input", "k3.edges", "--alpha", "1.5"])), 1);
    assert_eq!(code(&ricci(tmp.path(), &["hist", "--graph", "k3.edges", "--epsilon", "0.1", "--delta", "0.1", "--dims", "2"])), 1);
    assert_eq!(code(&ricci(tmp.path(), &["frobnicate"])), 1);
    assert_eq!(code(&ricci(tmp.path(), &[])), 1);
    assert_eq!(code(&ricci(tmp.path(), &["--help"])), 0);
}

#[test]
fn data_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "bad.edges", "0 1\n1 x\n");
    write(tmp.path(), "loop.edges", "0 0\n");
    assert_eq!(code(&ricci(tmp.path(), &["curvature", "--input", "bad.edges"])), 2);
    assert_eq!(code(&ricci(tmp.path(), &["curvature", "--input", "loop.edges"])), 2);
    assert_eq!(code(&ricci(tmp.path(), &["curvature", "--input", "missing.edges"])), 2);
}

#[test]
fn empty_er_graphs_are_header_only() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--model", "er", "--n", "10", "--p", "0", "--count", "3", "--out-dir", "g"]);
    for i in 0..3 {
        let text = fs::read_to_string(tmp.path().join(format!("g/er_{i:04}.edges"))).unwrap();
        assert!(text.lines().all(|l| l.starts_with('#')), "{text}");
        assert!(text.contains("edges=0"));
    }
}

#[test]
fn generate_merges_manifest_labels() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--model", "er", "--n", "30", "--p", "0.2", "--count", "4", "--out-dir", "g"]);
    ok(tmp.path(), &["generate", "--model", "ba", "--n", "30", "--m", "2", "--count", "4", "--out-dir", "g"]);
    let manifest = fs::read_to_string(tmp.path().join("g/manifest.csv")).unwrap();
    let rows: Vec<&str> = manifest.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    let labels: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(labels.into_iter().collect::<Vec<_>>(), ["ba", "er"]);

    // Regenerating replaces rows instead of duplicating them.
    ok(tmp.path(), &["generate", "--model", "er", "--n", "30", "--p", "0.2", "--count", "4", "--out-dir", "g"]);
    let again = fs::read_to_string(tmp.path().join("g/manifest.csv")).unwrap();
    assert_eq!(again.lines().count(), 9);
}

#[test]
fn generate_is_seeded() {
    let tmp = TempDir::new().unwrap();
    for (dir, seed) in [("a", "7"), ("b", "7"), ("c", "8")] {
        ok(tmp.path(), &["generate", "--model", "ws", "--n", "40", "--degree", "4", "--beta", "0.3", "--seed", seed, "--out-dir", dir]);
    }
    let read = |d: &str| fs::read(tmp.path().join(d).join("ws_0000.edges")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn sampled_file_rejects_explicit_2d() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--model", "ba", "--n", "200", "--m", "2", "--out-dir", "g"]);
    ok(tmp.path(), &["curvature", "--input", "g/ba_0000.edges", "--epsilon", "0.3", "--delta", "0.3", "--out", "s.csv"]);
    let out = ricci(tmp.path(), &["hist", "--curvature", "s.csv", "--dims", "2"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("1D histogram"), "{}", stderr(&out));

    // Without --dims a sampled file gives a 1D histogram.
    let h: serde_json::Value = serde_json::from_str(&ok(tmp.path(), &["hist", "--curvature", "s.csv"])).unwrap();
    assert_eq!(h["dims"], 1);
}

#[test]
fn triangle_histograms() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "k3.edges", K3);
    let h: serde_json::Value = serde_json::from_str(&ok(tmp.path(), &["hist", "--graph", "k3.edges", "--dims", "1", "--bins", "4"])).unwrap();
    let w: Vec<f64> = serde_json::from_value(h["weights"].clone()).unwrap();
    assert_eq!(w, [0.0, 0.0, 0.0, 1.0]);

    let h: serde_json::Value = serde_json::from_str(&ok(tmp.path(), &["hist", "--graph", "k3.edges", "--bins", "4", "--plot-matrix", "m.txt"])).unwrap();
    assert_eq!(h["dims"], 2);
    let w: Vec<f64> = serde_json::from_value(h["weights"].clone()).unwrap();
    assert_eq!(w.len(), 16);
    assert_eq!(w.iter().filter(|&&x| x != 0.0).count(), 1);
    assert_eq!(w[15], 1.0);
    assert_eq!(fs::read_to_string(tmp.path().join("m.txt")).unwrap().lines().filter(|l| !l.trim().is_empty()).count(), 4);
}

fn parse_gram(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn identical_graphs_give_ones() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "a.edges", K3);
    write(tmp.path(), "b.edges", "5 6\n6 7\n5 7\n");
    write(tmp.path(), "m.csv", "file,label,name\na.edges,0,a\nb.edges,1,b\n");
    let out = ricci(tmp.path(), &["kernel", "--manifest", "m.csv", "--check-psd"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let gram = parse_gram(&String::from_utf8_lossy(&out.stdout));
    assert_eq!(gram, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
    assert!(stderr(&out).contains("sigma = 1"), "{}", stderr(&out));

    write(tmp.path(), "one.csv", "file,label,name\na.edges,0,a\n");
    let gram = parse_gram(&ok(tmp.path(), &["kernel", "--manifest", "one.csv"]));
    assert_eq!(gram, vec![vec![1.0]]);
}

#[test]
fn single_class_cannot_be_stratified() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--model", "er", "--n", "20", "--p", "0.3", "--count", "6", "--out-dir", "g"]);
    let out = ricci(tmp.path(), &["classify", "--manifest", "g/manifest.csv", "--folds", "3"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).to_lowercase().contains("stratif"), "{}", stderr(&out));
}

#[test]
fn classify_separates_models() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["generate", "--model", "er", "--n", "200", "--p", "0.05", "--count", "6", "--out-dir", "g"]);
    ok(tmp.path(), &["generate", "--model", "ba", "--n", "200", "--m", "5", "--count", "6", "--out-dir", "g"]);
    let report: serde_json::Value =
        serde_json::from_str(&ok(tmp.path(), &["classify", "--manifest", "g/manifest.csv", "--folds", "3"])).unwrap();
    assert_eq!(report["folds"], 3);
    assert_eq!(report["k"], 1);
    assert_eq!(report["per_fold_accuracy"].as_array().unwrap().len(), 3);
    assert_eq!(report["mean_accuracy"].as_f64().unwrap(), 1.0);
}

#[test]
fn intermediate_files_match_fused_kernel() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["generate", "--model", "er", "--n", "40", "--p", "0.15", "--count", "3", "--out-dir", "g"]);
    ok(dir, &["generate", "--model", "ws", "--n", "40", "--degree", "4", "--beta", "0.2", "--count", "3", "--out-dir", "g"]);
    let manifest = fs::read_to_string(dir.join("g/manifest.csv")).unwrap();

    for extra in [&[][..], &["--dims", "1", "--bins", "7"][..], &["--epsilon", "0.4", "--delta", "0.4", "--seed", "3"][..]] {
        let fused = ok(dir, &[&["kernel", "--manifest", "g/manifest.csv"][..], extra].concat());

        let mut staged = String::from("file,label,name\n");
        for row in manifest.lines().skip(1) {
            let fields: Vec<&str> = row.split(',').collect();
            let (file, label, name) = (fields[0], fields[1], fields[2]);
            let edges = format!("g/{file}");
            let csv = format!("g/{name}.csv");
            let json = format!("g/{name}.json");
            ok(dir, &[&["curvature", "--input", &edges, "--out", &csv][..], extra].concat());
            // Sampling flags belong to the curvature step only.
            let hist_extra: Vec<&str> = if extra.contains(&"--epsilon") { vec![] } else { extra.to_vec() };
            ok(dir, &[&["hist", "--curvature", &csv, "--out", &json][..], &hist_extra].concat());
            staged.push_str(&format!("{name}.json,{label},{name}\n"));
        }
        write(dir, "g/staged.csv", &staged);
        let via_files = ok(dir, &[&["kernel", "--manifest", "g/staged.csv"][..], extra].concat());
        assert_eq!(fused, via_files, "flags {extra:?}");
    }
}

#[test]
fn config_dump_and_version() {
    let tmp = TempDir::new().unwrap();
    let cfg: serde_json::Value = serde_json::from_str(&ok(tmp.path(), &["--config-dump"])).unwrap();
    assert_eq!(cfg["alpha"], 0.5);
    assert_eq!(cfg["feature_dims"], 2);
    assert_eq!(cfg["sigma"], "auto");
    assert_eq!(cfg["worker_count"], "auto");
    assert_eq!(cfg["epsilon"], serde_json::Value::Null);

    let cfg: serde_json::Value =
        serde_json::from_str(&ok(tmp.path(), &["--epsilon", "0.1", "--delta", "0.2", "--sigma", "0.5", "--workers", "2", "--config-dump"]))
            .unwrap();
    assert_eq!(cfg["feature_dims"], 1);
    assert_eq!(cfg["sigma"], 0.5);
    assert_eq!(cfg["worker_count"], 2);

    let v: serde_json::Value = serde_json::from_str(&ok(tmp.path(), &["--version"])).unwrap();
    assert_eq!(v["name"], "ricci");
    assert_eq!(v["config"]["bins"], cfg["bins"]);
}
