mod common;

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{axis_original_inradius, square_rigidity_series};
use serde_json::{json, Value};
use tempfile::TempDir;
use torsmink::cli::{read_polygon, write_json};
use torsmink::geometry::{wulff_shape, ConvexPolygon, DiscreteMeasure, SupportVector};

fn torsmink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torsmink")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace { dir: tempfile::tempdir().unwrap() };
        let axes: Vec<f64> = (0..4).map(|k| FRAC_PI_2 * k as f64).collect();
        ws.write("axes4.json", &json!({ "angles": axes, "weights": [1, 1, 1, 1] }));
        let hex: Vec<f64> = (0..6).map(|k| std::f64::consts::TAU * k as f64 / 6.0).collect();
        ws.write("hex6.json", &json!({ "angles": hex, "weights": [2, 2, 2, 2, 2, 2] }));
        write_json(Some(&ws.path("square.json")), &ConvexPolygon::square(1.0)).unwrap();
        write_json(Some(&ws.path("hex.json")), &ConvexPolygon::regular(6, 1.0, 0.0)).unwrap();
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn write(&self, name: &str, value: &Value) {
        fs::write(self.path(name), value.to_string()).unwrap();
    }
}

fn csv_column(text: &str, column: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(column).unwrap().parse().unwrap()).collect()
}

#[test]
fn solve_axes_gives_series_square() {
    let ws = Workspace::new();
    let out = torsmink(&["solve", "--p", "2", &ws.arg("axes4.json")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    let vertices = report["original_solution"]["vertices"].as_array().unwrap();
    assert_eq!(vertices.len(), 4);
    let expected = axis_original_inradius(2.0);
    for v in vertices {
        for c in v.as_array().unwrap() {
            assert!((c.as_f64().unwrap().abs() - expected).abs() < 1e-2 * expected, "{v}");
        }
    }
    assert!(report["residual"].as_f64().unwrap() <= 1e-2);
    assert!(!report["iterations"].as_array().unwrap().is_empty());
    assert_eq!(report["facets"].as_array().unwrap().len(), 4);
}

#[test]
fn solve_at_critical_exponent() {
    let ws = Workspace::new();
    let out = torsmink(&["solve", "--p", "4", &ws.arg("axes4.json")]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("n+2"));

    let out = torsmink(&["solve", "--p", "4", "--normalized", &ws.arg("axes4.json")]);
    assert_eq!(code(&out), 0);
    assert!(stdout_json(&out)["original_solution"].is_null());
}

#[test]
fn solve_without_convergence_writes_history() {
    let ws = Workspace::new();
    let out_path = ws.arg("fail.json");
    let out = torsmink(&["solve", "--p", "2", "--tol", "1e-12", "--max-iters", "2", "--out", &out_path, &ws.arg("hex6.json")]);
    assert_eq!(code(&out), 2);
    let failure: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(failure["error"], "max_iters_exceeded");
    assert!(!failure["history"].as_array().unwrap().is_empty());
}

#[test]
fn solve_rejects_bad_exponent_and_dumps_mesh() {
    let ws = Workspace::new();
    assert_eq!(code(&torsmink(&["solve", "--p", "0.5", &ws.arg("axes4.json")])), 1);
    let mesh = ws.arg("mesh.json");
    let out = torsmink(&["solve", "--p", "3", "--normalized", "--dump-mesh", &mesh, &ws.arg("hex6.json")]);
    assert_eq!(code(&out), 0);
    let dumped: Value = serde_json::from_str(&fs::read_to_string(mesh).unwrap()).unwrap();
    assert!(dumped["nodes"].as_array().unwrap().len() > 100);
    assert!(!dumped["triangles"].as_array().unwrap().is_empty());
}

#[test]
fn torsion_of_square() {
    let ws = Workspace::new();
    let mesh = ws.arg("square_mesh.json");
    let out = torsmink(&["torsion", "--p", "2", "--dump-mesh", &mesh, &ws.arg("square.json")]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let t = v["torsion"]["rigidity"].as_f64().unwrap();
    assert!((t - square_rigidity_series()).abs() < 5e-3 * square_rigidity_series());
    assert_eq!(v["lp_measure"].as_array().unwrap().len(), 4);
    assert!(Path::new(&mesh).exists());
}

#[test]
fn torsion_output_is_byte_identical_across_runs() {
    let ws = Workspace::new();
    let a = torsmink(&["torsion", &ws.arg("hex.json")]);
    let b = torsmink(&["torsion", &ws.arg("hex.json")]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn wulff_output_round_trips() {
    let ws = Workspace::new();
    let out_path = ws.path("rect.json");
    let out = torsmink(&["wulff", "--supports", "1,2,1.5,0.5", "--out", &out_path.to_string_lossy(), &ws.arg("axes4.json")]);
    assert_eq!(code(&out), 0);
    let read = read_polygon(&out_path).unwrap();
    let m = DiscreteMeasure::regular(4, 1.0, 0.0).unwrap();
    let expected = wulff_shape(m.normals(), &SupportVector::new(vec![1.0, 2.0, 1.5, 0.5]).unwrap()).unwrap();
    for (a, b) in read.vertices().iter().zip(expected.vertices()) {
        assert!((*a - *b).norm() < 1e-12);
    }
    assert_eq!(code(&torsmink(&["wulff", "--supports", "1,2", &ws.arg("axes4.json")])), 1);
}

#[test]
fn polygon_json_round_trip() {
    let ws = Workspace::new();
    for seed in 0..5 {
        let poly = ConvexPolygon::random(seed, 7);
        let path = ws.path("poly.json");
        write_json(Some(&path), &poly).unwrap();
        let back = read_polygon(&path).unwrap();
        assert_eq!(back.len(), poly.len());
        for (a, b) in back.vertices().iter().zip(poly.vertices()) {
            assert!((*a - *b).norm() <= 1e-12);
        }
    }
}

#[test]
fn verify_suites_exit_codes() {
    let ws = Workspace::new();
    let out = torsmink(&["verify", "identities", &ws.arg("square.json")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let reports = stdout_json(&out);
    assert!(reports.as_array().unwrap().iter().all(|r| r["passed"] == true));

    let out = torsmink(&["verify", "bm", "--pair", &ws.arg("square.json"), &ws.arg("hex.json"), "--lambda", "0.5"]);
    assert_eq!(code(&out), 0);
    let out = torsmink(&["verify", "minkowski", "--pair", &ws.arg("square.json"), &ws.arg("hex.json")]);
    assert_eq!(code(&out), 0);
    let out = torsmink(&["verify", "hadamard", "--point", "0.3,-0.2", &ws.arg("hex.json")]);
    assert_eq!(code(&out), 0);

    assert_eq!(code(&torsmink(&["verify", "nosuch"])), 1);
    assert_eq!(code(&torsmink(&["verify", "bm", &ws.arg("square.json")])), 1);
    assert_eq!(code(&torsmink(&["verify", "hadamard", "--point", "1,2,3", &ws.arg("hex.json")])), 1);
}

#[test]
fn failed_check_exits_two() {
    let ws = Workspace::new();
    write_json(Some(&ws.path("p64.json")), &ConvexPolygon::regular(64, 1.0, 0.0)).unwrap();
    write_json(Some(&ws.path("p8.json")), &ConvexPolygon::regular(8, 1.0, 0.0)).unwrap();
    // The sequence moves away from its limit, so the probe reports a failure.
    let out = torsmink(&["verify", "weak", "--limit", &ws.arg("p64.json"), &ws.arg("hex.json"), &ws.arg("p8.json"), &ws.arg("square.json")]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout_json(&out)[0]["passed"], false);

    write_json(Some(&ws.path("p16.json")), &ConvexPolygon::regular(16, 1.0, 0.0)).unwrap();
    write_json(Some(&ws.path("p32.json")), &ConvexPolygon::regular(32, 1.0, 0.0)).unwrap();
    let out = torsmink(&["verify", "weak", "--limit", &ws.arg("p64.json"), &ws.arg("p16.json"), &ws.arg("p32.json")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn continuity_in_measure_cli() {
    let ws = Workspace::new();
    let csv = ws.path("axes.csv");
    let out = torsmink(&["continuity", "--mode", "measure", "--p", "2", "--eps", "0.1,0.05,0.025", "--out", &csv.to_string_lossy(), &ws.arg("axes4.json")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("i,perturbation,hausdorff,residual,T\n"));
    let d = csv_column(&text, 2);
    assert_eq!(d.len(), 3);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    let summary: Value = serde_json::from_str(&fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
}

#[test]
fn continuity_in_p_cli() {
    let ws = Workspace::new();
    let out = torsmink(&["continuity", "--mode", "p", "--p-seq", "2.5,2.25,2.125", "--p", "2", &ws.arg("hex6.json")]);
    assert_eq!(code(&out), 0);
    let d = csv_column(&String::from_utf8(out.stdout).unwrap(), 2);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn continuity_empty_schedule() {
    let ws = Workspace::new();
    assert_eq!(code(&torsmink(&["continuity", "--mode", "measure", "--p", "2", &ws.arg("axes4.json")])), 1);
    assert_eq!(code(&torsmink(&["continuity", "--mode", "p", "--p", "2", &ws.arg("axes4.json")])), 1);
}

#[test]
fn malformed_inputs_exit_one_with_location() {
    let ws = Workspace::new();
    fs::write(ws.path("broken.json"), "{ \"angles\": [0, 1,\n  \"weights\": [1] }").unwrap();
    let out = torsmink(&["solve", "--p", "2", &ws.arg("broken.json")]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"), "{}", String::from_utf8_lossy(&out.stderr));

    ws.write("extra.json", &json!({ "angles": [0, 2, 4], "weights": [1, 1, 1], "mass": 3 }));
    let out = torsmink(&["solve", "--p", "2", &ws.arg("extra.json")]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));

    ws.write("half.json", &json!({ "angles": [0, 1, 2], "weights": [1, 1, 1] }));
    let out = torsmink(&["solve", "--p", "2", &ws.arg("half.json")]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("half-circle"));

    assert_eq!(code(&torsmink(&["torsion", &ws.arg("missing.json")])), 1);
}

#[test]
fn help_and_unknown_flags() {
    assert_eq!(code(&torsmink(&["--help"])), 0);
    assert_eq!(code(&torsmink(&["solve", "--help"])), 0);
    assert_eq!(code(&torsmink(&["solve", "--bogus"])), 1);
    assert_eq!(code(&torsmink(&[])), 1);
}
