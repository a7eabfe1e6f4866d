use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn shapematch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapematch")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn match_writes_every_output_and_scores_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (a, b, gt) = (data("humanoid_rest.off"), data("humanoid_raised.off"), data("humanoid_identity.gt"));
    let o = shapematch(&["match", s(&a), s(&b), "--gt", s(&gt), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "timings.json", "labels_a.txt", "labels_b.txt", "regions_a.ply", "regions_b.ply"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let acc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(acc["symmetric"].as_f64().unwrap() > 0.9);

    // eval on the written report reproduces the accuracy
    let e = shapematch(&["eval", s(&out.join("report.json")), "--gt", s(&gt)]);
    assert!(e.status.success());
    let again: serde_json::Value = serde_json::from_slice(&e.stdout).unwrap();
    assert_eq!(acc, again);

    let c = dir.path().join("constraints");
    let x = shapematch(&["export-constraints", s(&out.join("report.json")), "--one-to-one", "--out", s(&c)]);
    assert!(x.status.success());
    let pairs = std::fs::read_to_string(c.join("pairs.txt")).unwrap();
    assert!(pairs.lines().count() >= 5);
}

#[test]
fn flags_reach_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let a = data("humanoid_rest.off");
    let o = shapematch(&[
        "match", s(&a), s(&a), "--out", s(dir.path()), "--t-steps", "10", "--t-max", "0.3", "--k-min", "6",
        "--k-max", "7", "--sigma", "0.4", "--max-sym", "4", "--gap", "0.8", "--seed", "7", "--symmetric-only",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let c = &r["config"];
    assert_eq!(c["time_steps"]["count"], 10);
    assert_eq!(c["time_steps"]["t_max"], 0.3);
    assert_eq!(c["segmentation"]["k_min"], 6);
    assert_eq!(c["segmentation"]["seed"], 7);
    assert_eq!(c["matching"]["sigma"], 0.4);
    assert_eq!(c["matching"]["max_symmetry_order"], 4);
    assert_eq!(c["matching"]["gap_ratio"], 0.8);
    assert_eq!(c["symmetric_only"], true);
    assert!(r["one_to_one"].is_null());
    assert!(r["k"].as_u64().unwrap() >= 6);
}

#[test]
fn self_mode_pairs_mirrored_limbs() {
    let dir = tempfile::tempdir().unwrap();
    let o = shapematch(&["self", s(&data("humanoid_rest.off")), "--out", s(dir.path())]);
    assert!(o.status.success());
    let groups: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let groups = groups.as_array().unwrap();
    assert!(groups.iter().all(|g| !g["matches"].as_array().unwrap().is_empty()));
    assert!(groups.iter().any(|g| g["matches"].as_array().unwrap().len() == 2));
    assert!(!dir.path().join("labels_b.txt").exists());
}

#[test]
fn sample_writes_points_and_nearest_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let (xyz, near) = (dir.path().join("c.xyz"), dir.path().join("n.txt"));
    let o = shapematch(&[
        "sample", s(&data("humanoid_rest.off")), "--points", "700", "--noise", "0.01", "--seed", "3", "--out", s(&xyz),
        "--nearest", s(&near),
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&xyz).unwrap().lines().count(), 700);
    assert_eq!(std::fs::read_to_string(&near).unwrap().lines().count(), 700);
}

#[test]
fn small_sweep_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("pairs.txt");
    std::fs::write(&list, format!("{} {}\n", s(&data("humanoid_rest.off")), s(&data("humanoid_raised.off")))).unwrap();
    let out = dir.path().join("sweep");
    let o = shapematch(&[
        "sweep", s(&list), "--densities", "1500", "--noises", "0,0.02", "--repeats", "1", "--modes", "mesh-cloud",
        "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cells = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(cells.lines().count(), 3);
    assert!(cells.starts_with("mode,points,noise"));
    assert_eq!(std::fs::read_to_string(out.join("trials.csv")).unwrap().lines().count(), 3);
}

#[test]
fn synth_meshes_share_indexing_across_poses() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.off"), dir.path().join("b.off"));
    assert!(shapematch(&["synth", "quadruped", "--vertices", "1200", "--out", s(&a)]).status.success());
    assert!(shapematch(&["synth", "quadruped", "--vertices", "1200", "--pose", "0.4", "--out", s(&b)]).status.success());
    let header = |p: &Path| std::fs::read_to_string(p).unwrap().lines().nth(1).unwrap().to_string();
    assert_eq!(header(&a), header(&b));
}

#[test]
fn exit_codes_separate_input_and_pipeline_errors() {
    let dir = tempfile::tempdir().unwrap();
    let a = data("humanoid_rest.off");
    let missing = shapematch(&["match", "no_such.off", s(&a), "--out", s(dir.path())]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("load:"));
    assert_eq!(shapematch(&["match", s(&a), s(&a), "--sigma", "-1"]).status.code(), Some(1));
    assert_eq!(shapematch(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(shapematch(&["--help"]).status.code(), Some(0));

    // a ground truth of the wrong length is the caller's fault
    let gt = dir.path().join("short.gt");
    std::fs::write(&gt, "0\n1\n").unwrap();
    assert_eq!(shapematch(&["match", s(&a), s(&a), "--gt", s(&gt), "--out", s(dir.path())]).status.code(), Some(1));

    // two triangles cannot carry enough eigenpairs for the segmentation
    let tiny = dir.path().join("tiny.off");
    std::fs::write(&tiny, "OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n").unwrap();
    let o = shapematch(&["match", s(&tiny), s(&tiny), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
