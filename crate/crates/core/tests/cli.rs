mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use rigidflow::io::{self, CloudFormat};

fn rigidflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigidflow"))
        .args(args)
        .output()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn cloud(&self, name: &str, points: Vec<V3>) -> String {
        let path = self.path(name);
        io::save_point_cloud(&cloud(points), &path, CloudFormat::from_path(&path)).unwrap();
        path_str(&path).to_owned()
    }

    fn flow(&self, name: &str, vectors: Vec<V3>) -> String {
        let path = self.path(name);
        io::save_flow(&flow(vectors), &path).unwrap();
        path_str(&path).to_owned()
    }

    fn out(&self, name: &str) -> String {
        path_str(&self.path(name)).to_owned()
    }
}

fn sample(seed: u64, n: usize) -> Vec<V3> {
    uniform_points(&mut rng(seed), n, V3::zeros(), V3::new(4.0, 4.0, 2.0))
}

#[test]
fn segment_writes_one_label_per_point() {
    let ws = Workspace::new();
    let input = ws.cloud("scan.ply", sample(1, 500));
    let out = ws.out("labels.txt");
    let o = rigidflow(&[
        "segment",
        "--input",
        &input,
        "--regions",
        "30",
        "--output",
        &out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let partition = io::load_partition(Path::new(&out)).unwrap();
    assert_eq!(partition.len(), 500);
    assert_eq!(partition.region_count(), 30);
}

#[test]
fn segment_rejects_bad_region_counts() {
    let ws = Workspace::new();
    let input = ws.cloud("scan.xyz", sample(2, 20));
    let out = ws.out("labels.txt");
    let o = rigidflow(&[
        "segment",
        "--input",
        &input,
        "--regions",
        "0",
        "--output",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("regions must be ≥ 1"));
    let o = rigidflow(&[
        "segment",
        "--input",
        &input,
        "--regions",
        "21",
        "--output",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!Path::new(&out).exists());
}

#[test]
fn identical_clouds_give_zero_flow_and_full_mask() {
    let ws = Workspace::new();
    let points = sample(3, 300);
    let src = ws.cloud("a.xyz", points.clone());
    let dst = ws.cloud("b.xyz", points);
    let (fl, mk) = (ws.out("flow.txt"), ws.out("mask.txt"));
    let o = rigidflow(&[
        "labels",
        "--source",
        &src,
        "--target",
        &dst,
        "--regions",
        "10",
        "--out-flow",
        &fl,
        "--out-mask",
        &mk,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let labels = io::load_flow(Path::new(&fl)).unwrap();
    assert!(labels.vectors().iter().all(|v| v.norm() < 1e-12));
    let mask = io::load_mask(Path::new(&mk)).unwrap();
    assert_eq!(mask.len(), 300);
    assert!(mask.iter().all(|&c| c));
}

#[test]
fn labels_from_true_flows_evaluate_to_zero_error() {
    let ws = Workspace::new();
    let truth = transform_with(4.0, V3::new(0.2, 0.1, 1.0), V3::new(0.5, -0.2, 0.1));
    let pair = rigid_pair(&mut rng(4), 400, V3::new(4.0, 4.0, 2.0), truth);
    let src = ws.cloud("p.ply", pair.source.points().to_vec());
    let dst = ws.cloud("q.ply", pair.target.points().to_vec());
    let fwd = ws.flow("f.txt", pair.forward.clone());
    let bwd = ws.flow("b.txt", pair.forward.iter().map(|v| -v).collect());
    let (fl, mk, tr) = (
        ws.out("flow.txt"),
        ws.out("mask.txt"),
        ws.out("trace.jsonl"),
    );
    let o = rigidflow(&[
        "labels",
        "--source",
        &src,
        "--target",
        &dst,
        "--forward",
        &fwd,
        "--backward",
        &bwd,
        "--regions",
        "5",
        "--out-flow",
        &fl,
        "--out-mask",
        &mk,
        "--trace",
        &tr,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = rigidflow(&["eval", "--flow", &fl, "--truth", &fwd, "--json"]);
    assert!(o.status.success());
    let m: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(m["epe"].as_f64().unwrap() < 1e-6);
    assert_eq!(m["as"].as_f64(), Some(100.0));
    assert_eq!(m["n"].as_u64(), Some(400));

    let trace = std::fs::read_to_string(&tr).unwrap();
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert!(first["region"].is_u64() && first["objective"].is_f64());
}

#[test]
fn forward_without_backward_is_a_usage_error() {
    let ws = Workspace::new();
    let src = ws.cloud("a.xyz", sample(5, 10));
    let fwd = ws.flow("f.txt", vec![V3::zeros(); 10]);
    let o = rigidflow(&[
        "labels",
        "--source",
        &src,
        "--target",
        &src,
        "--forward",
        &fwd,
        "--out-flow",
        "x",
        "--out-mask",
        "y",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn motion_profile_and_config_file_are_accepted() {
    let ws = Workspace::new();
    let mut points = uniform_points(
        &mut rng(6),
        300,
        V3::new(0.0, 0.0, -0.02),
        V3::new(20.0, 20.0, 0.02),
    );
    points.extend(uniform_points(
        &mut rng(7),
        100,
        V3::new(5.0, 5.0, 1.0),
        V3::new(7.0, 7.0, 2.0),
    ));
    let src = ws.cloud("a.xyz", points.clone());
    let dst = ws.cloud("b.xyz", points);
    std::fs::write(
        ws.path("cfg.txt"),
        "# tighter\nsupervoxel_count = 6\niterations=3\n",
    )
    .unwrap();
    let (fl, mk) = (ws.out("flow.txt"), ws.out("mask.txt"));
    let o = rigidflow(&[
        "--threads",
        "2",
        "labels",
        "--source",
        &src,
        "--target",
        &dst,
        "--profile",
        "motion",
        "--config",
        &ws.out("cfg.txt"),
        "--rounds",
        "1",
        "--out-flow",
        &fl,
        "--out-mask",
        &mk,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(io::load_flow(Path::new(&fl)).unwrap().len(), 400);

    let o = rigidflow(&[
        "labels",
        "--source",
        &src,
        "--target",
        &dst,
        "--profile",
        "indoor",
        "--out-flow",
        &fl,
        "--out-mask",
        &mk,
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn estimate_recovers_translation() {
    let ws = Workspace::new();
    let mut points = Vec::new();
    for i in 0..6 {
        for j in 0..6 {
            for k in 0..3 {
                points.push(V3::new(
                    i as f64 * 3.0,
                    j as f64 * 3.0 + (i % 2) as f64,
                    k as f64 * 3.0,
                ));
            }
        }
    }
    let moved: Vec<V3> = points.iter().map(|p| p + V3::new(0.0, 0.0, 1.0)).collect();
    let src = ws.cloud("a.xyz", points);
    let dst = ws.cloud("b.xyz", moved);
    let fl = ws.out("flow.txt");
    let o = rigidflow(&[
        "estimate",
        "--source",
        &src,
        "--target",
        &dst,
        "--regions",
        "4",
        "--out-flow",
        &fl,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let est = io::load_flow(Path::new(&fl)).unwrap();
    assert!(est.vectors().iter().all(|v| (v - V3::z()).norm() < 1e-6));
}

#[test]
fn eval_prints_text_and_honours_occlusion_mask() {
    let ws = Workspace::new();
    let truth = ws.flow("t.txt", vec![V3::x(), V3::x()]);
    let est = ws.flow("e.txt", vec![V3::x(), V3::new(5.0, 0.0, 0.0)]);
    std::fs::write(ws.path("occ.txt"), "0\n1\n").unwrap();
    let o = rigidflow(&[
        "eval",
        "--flow",
        &est,
        "--truth",
        &truth,
        "--occluded",
        &ws.out("occ.txt"),
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("EPE"), "{text}");
}

#[test]
fn missing_input_exits_with_one() {
    let o = rigidflow(&[
        "eval",
        "--flow",
        "/nonexistent/f.txt",
        "--truth",
        "/nonexistent/t.txt",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
