//! End-to-end checks of the command-line surface: exit codes, artifact
//! determinism, and the documented output values.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cavqed"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cavqed-test-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn unknown_preset_is_a_usage_error() {
    let out = run(&["transmission", "--preset", "nosuch", "--coupled"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("unknown preset"), "stderr: {msg}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["transmission", "--preset", "cavity1a", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_reproduce_target_is_a_usage_error() {
    let dir = tmp("badtarget");
    let out = run(&["--out", dir.to_str().unwrap(), "reproduce", "fig99"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resonant_transmission_value_is_reported() {
    let dir = tmp("trans");
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "--reproducible",
        "transmission",
        "--preset",
        "cavity1a",
        "--coupled",
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.join("transmission.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let t = json["t_re"].as_f64().unwrap();
    assert!((t - 0.988).abs() < 1e-3, "t = {t}");
}

#[test]
fn multiplex_plan_matches_the_closed_form() {
    let dir = tmp("mux");
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "--reproducible",
        "multiplex",
        "--p",
        "0.1",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("multiplex.json")).unwrap()).unwrap();
    let n_real = json["n_real"].as_f64().unwrap();
    assert!((n_real - 9.49).abs() < 0.01, "n_real = {n_real}");
}

#[test]
fn qkd_truth_table_has_four_rows_in_appendix_order() {
    let dir = tmp("qkd");
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "--reproducible",
        "protocol",
        "qkd",
        "--encoding",
        "fock",
        "--basis",
        "x",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("truth_table.json")).unwrap()).unwrap();
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["outcomes"], serde_json::json!([1, 1]));
    assert_eq!(rows[0]["phi_sum"], "0");
    assert_eq!(rows[1]["outcomes"], serde_json::json!([1, -1]));
    assert_eq!(rows[1]["phi_sum"], "pi");
}

#[test]
fn identical_reproducible_runs_are_byte_identical() {
    let d1 = tmp("det1");
    let d2 = tmp("det2");
    for dir in [&d1, &d2] {
        let out = run(&[
            "--out",
            dir.to_str().unwrap(),
            "--reproducible",
            "--grid",
            "512",
            "retrieve",
            "--preset",
            "cavity5",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let t1 = read_tree(&d1);
    let t2 = read_tree(&d2);
    assert_eq!(t1.len(), t2.len());
    for ((n1, b1), (n2, b2)) in t1.iter().zip(&t2) {
        assert_eq!(n1, n2);
        assert_eq!(b1, b2, "artifact {n1} differs between identical runs");
    }
    // SVG, CSV, JSON, and the manifest are all present.
    let names: Vec<&str> = t1.iter().map(|(n, _)| n.as_str()).collect();
    for expected in ["manifest.json", "metrics.json", "pulse.csv", "pulse.svg", "trajectory.csv"] {
        assert!(names.contains(&expected), "missing {expected}; have {names:?}");
    }
}

#[test]
fn sweeps_are_invariant_under_worker_count() {
    let d1 = tmp("jobs1");
    let d2 = tmp("jobs4");
    for (dir, jobs) in [(&d1, "1"), (&d2, "4")] {
        let out = run(&[
            "--out",
            dir.to_str().unwrap(),
            "--reproducible",
            "--grid",
            "512",
            "--jobs",
            jobs,
            "sweep-dg",
            "--preset",
            "cavity1a",
            "--points",
            "7",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        fs::read(d1.join("sweep.csv")).unwrap(),
        fs::read(d2.join("sweep.csv")).unwrap()
    );
    assert_eq!(
        fs::read(d1.join("fit.json")).unwrap(),
        fs::read(d2.join("fit.json")).unwrap()
    );
}

#[test]
fn reproduce_table2_passes_and_exits_zero() {
    let dir = tmp("table2");
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "--reproducible",
        "reproduce",
        "table2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.join("table2").join("table2.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["hard_failures"], 0);
    let cells = json["cells"].as_array().unwrap();
    assert!(cells.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn reproduce_all_fails_only_on_the_documented_cell() {
    let dir = tmp("repall");
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "--reproducible",
        "--jobs",
        "4",
        "reproduce",
        "all",
    ]);
    // The known-red optimizer reference makes the aggregate exit 1.
    assert_eq!(out.status.code(), Some(1));
    let mut failing = Vec::new();
    for target in ["table1", "table2", "table3", "fig6", "fig7", "fig9", "fig10"] {
        let json: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(dir.join(target).join(format!("{target}.json"))).unwrap(),
        )
        .unwrap();
        for cell in json["cells"].as_array().unwrap() {
            if cell["status"] == "fail" {
                failing.push(format!("{target}/{}/{}", cell["row"], cell["quantity"]));
            }
        }
    }
    assert_eq!(failing, vec!["fig6/\"fig6\"/\"x_star\""], "failing cells: {failing:?}");
}

#[test]
fn custom_presets_file_overrides_the_builtin_table() {
    let dir = tmp("presets");
    fs::create_dir_all(&dir).unwrap();
    let file = dir.join("custom.conf");
    fs::write(
        &file,
        "meta.version = 1\n\
         mycavity.g_ghz = 1.6\n\
         mycavity.kappa_ex_ghz = 5\n\
         mycavity.kappa_i_ghz = 0.01\n\
         mycavity.two_gamma_ghz = 0.0061\n\
         mycavity.t_ns = 2.22\n\
         mycavity.tau_ns = 13.7\n\
         mycavity.case = 1\n",
    )
    .unwrap();
    let out = run(&[
        "--out",
        dir.join("o").to_str().unwrap(),
        "--presets-file",
        file.to_str().unwrap(),
        "--reproducible",
        "transmission",
        "--preset",
        "mycavity",
        "--coupled",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // The built-in names are gone when a file is supplied.
    let out = run(&[
        "--out",
        dir.join("o2").to_str().unwrap(),
        "--presets-file",
        file.to_str().unwrap(),
        "transmission",
        "--preset",
        "cavity1a",
        "--coupled",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn adiabatic_and_gaussian_synthesis_paths_work_end_to_end() {
    let dir = tmp("adsynth");
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "--reproducible",
        "--grid",
        "1024",
        "synthesize",
        "--preset",
        "cavity5",
        "--adiabatic",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("synthesis.json")).unwrap()).unwrap();
    assert!(json["peak_omega0_ghz"].as_f64().unwrap() > 0.0);
    assert_eq!(json["truncated"], false);

    let dir2 = tmp("gauss");
    let out = run(&[
        "--out",
        dir2.to_str().unwrap(),
        "--reproducible",
        "--grid",
        "1024",
        "retrieve",
        "--preset",
        "cavity5",
        "--mode",
        "gauss",
        "--T",
        "18.0",
        "--eta-r",
        "0.98",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir2.join("metrics.json")).unwrap()).unwrap();
    let eta = json["eta_r"].as_f64().unwrap();
    assert!((eta - 0.98).abs() < 1e-3, "eta_r = {eta}");
}

#[test]
fn reproduce_fig7_passes_and_emits_curves() {
    let dir = tmp("fig7");
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "--reproducible",
        "reproduce",
        "fig7",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["fig7.csv", "fig7a.svg", "fig7b.svg", "fig7.json", "manifest.json"] {
        assert!(dir.join("fig7").join(f).exists(), "missing {f}");
    }
}

#[test]
fn gate_artifacts_carry_the_labeled_basis() {
    let dir = tmp("gate");
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "--reproducible",
        "gate",
        "--which",
        "unmeasured",
        "--phi",
        "1.3",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("gate.json")).unwrap()).unwrap();
    assert_eq!(json["basis"].as_array().unwrap().len(), 8);
    assert_eq!(json["entries"].as_array().unwrap().len(), 64);
    assert!(json["unitarity_defect"].as_f64().unwrap() < 1e-12);
}
