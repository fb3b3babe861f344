use std::path::Path;
use std::process::Command;

use qheat_cli::curves::{delta_s_iso, st_diagram};
use qheat_cli::scenario::{run_cycle, Scenario};
use qheat_cli::sweep::{run_sweep, Grid, SweepSpec};
use qheat_core::{CycleKind, ModelSpec, OperationMode};

const BIN: &str = env!("CARGO_BIN_EXE_qheat");

fn qheat(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).env_remove("QHEAT_JOBS").output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn in_process(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = qheat_cli::run(std::iter::once("qheat").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

// Oracle: ln Z from the four dimer levels (3J/4, -J/4 ×3).
fn ln_z_dimer(j: f64, t: f64) -> f64 {
    ((-0.75 * j / t).exp() + 3.0 * (0.25 * j / t).exp()).ln()
}

const STIRLING: &[&str] = &[
    "cycle", "--cycle", "stirling", "--model", "dimer", "--J-a", "-42", "--J-b", "-32", "--t-hot", "40",
    "--t-cold", "20", "--format", "json",
];

#[test]
fn stirling_golden_report() {
    let (code, stdout, stderr) = qheat(STIRLING);
    assert_eq!(code, 0, "{stderr}");
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/stirling_dimer.json")).unwrap();
    assert_eq!(stdout, golden);

    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["version"], 1);
    let row = &v["rows"][0];
    assert_eq!(row["mode"], "heat_engine");
    let w_net = row["w_net"].as_f64().unwrap();
    let oracle = -40.0 * (ln_z_dimer(-32.0, 40.0) - ln_z_dimer(-42.0, 40.0))
        + 20.0 * (ln_z_dimer(-32.0, 20.0) - ln_z_dimer(-42.0, 20.0));
    assert!((w_net - oracle).abs() < 1e-12, "{w_net} vs {oracle}");
    assert_eq!(row["strokes"].as_array().unwrap().len(), 4);
}

#[test]
fn exit_codes() {
    let (code, stdout, stderr) = qheat(&["cycle", "--cycle", "stirling", "--J-a", "-42", "--J-b", "-32", "--t-hot", "10", "--t-cold", "20"]);
    assert_eq!(code, 1);
    assert!(stdout.is_empty() && stderr.contains("T_H > T_C"));
    let (code, _, _) = qheat(&["sweep", "--cycle", "otto", "--J-a", "-42", "--J-b", "-32", "--t-cold", "20", "--t-hot", "40", "--axis", "J-a:-50:-40:0"]);
    assert_eq!(code, 1);
    assert_eq!(qheat(&["cycle", "--frobnicate"]).0, 1);
    assert_eq!(qheat(&["teleport"]).0, 1);
    assert_eq!(qheat(&["cycle", "--cycle", "diesel"]).0, 1);
    // Closure failure is a numerical error, not a usage error.
    let (code, _, stderr) = qheat(&["cycle", "--cycle", "carnot", "--J-a", "-32", "--J-b", "-42", "--b-a", "3", "--t-hot", "40", "--t-cold", "20"]);
    assert_eq!(code, 2, "{stderr}");
    assert_eq!(qheat(&["--help"]).0, 0);
    let bad_env = Command::new(BIN)
        .args(["sweep", "--cycle", "otto", "--J-a", "-42", "--J-b", "-32", "--t-cold", "20", "--t-hot", "40"])
        .env("QHEAT_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(1));
}

#[test]
fn cycle_output_is_deterministic() {
    let a = in_process(STIRLING);
    let b = in_process(STIRLING);
    assert_eq!(a.0, 0);
    assert_eq!(a, b);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# Fig. 8 pair\ncycle = stirling\nJ-a = -42\nJ-b = -32\nt-hot = 300\nt-cold = 20\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let (code, from_file) = in_process(&["cycle", "--config", cfg, "--t-hot", "40"]);
    assert_eq!(code, 0);
    assert_eq!(from_file, qheat(STIRLING).1);

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "J-a: -42\n").unwrap();
    assert_eq!(in_process(&["cycle", "--config", bad.to_str().unwrap()]).0, 1);
}

#[test]
fn output_and_svg_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("st.csv");
    let svg = dir.path().join("st.svg");
    let (code, stdout, stderr) = qheat(&[
        "stdiagram", "--J-list", "-32,-42", "--t-range", "5:100:20", "--format", "csv", "--output",
        data.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(&data).unwrap();
    assert!(text.starts_with("# qheat v1\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 41);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn single_point_sweep_matches_direct_run() {
    let base = Scenario::dimer(-42.0, -32.0, 40.0, 20.0);
    let spec = SweepSpec {
        cycle: CycleKind::Otto,
        base: base.clone(),
        axes: vec!["t-hot:40:41:1".parse().unwrap()],
        epsilon: None,
    };
    let rows = run_sweep(&spec, Some(1)).unwrap();
    let direct = run_cycle(CycleKind::Otto, &base, None).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].w_net, Some(direct.w_net));
    assert_eq!(rows[0].q_in, Some(direct.q_in));
    assert_eq!(rows[0].mode, Some(direct.mode));
}

#[test]
fn fig8_sweep_is_heat_engine_throughout() {
    let spec = SweepSpec {
        cycle: CycleKind::Stirling,
        base: Scenario::dimer(-42.0, -32.0, 40.0, 20.0),
        axes: vec!["t-hot:21:300:50".parse().unwrap()],
        epsilon: None,
    };
    let rows = run_sweep(&spec, None).unwrap();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.mode == Some(OperationMode::HeatEngine)));
}

#[test]
fn swapped_couplings_flip_work() {
    let sweep = |a: f64, b: f64| {
        run_sweep(
            &SweepSpec {
                cycle: CycleKind::Stirling,
                base: Scenario::dimer(a, b, 40.0, 20.0),
                axes: vec!["t-hot:25:300:5".parse().unwrap()],
                epsilon: None,
            },
            Some(2),
        )
        .unwrap()
    };
    let (fwd, rev) = (sweep(-42.0, -32.0), sweep(-32.0, -42.0));
    for (f, r) in fwd.iter().zip(&rev) {
        let (wf, wr) = (f.w_net.unwrap(), r.w_net.unwrap());
        assert!(wf < 0.0 && wr > 0.0);
        // Oracle: the Stirling work is antisymmetric in (A, B).
        assert!((wf + wr).abs() <= 1e-12 * wf.abs().max(1.0));
    }
}

#[test]
fn smaller_gap_has_more_entropy() {
    let set = st_diagram(&[ModelSpec::dimer(-32.0, 0.0), ModelSpec::dimer(-42.0, 0.0)], &Grid::linear(5.0, 100.0, 96)).unwrap();
    for (s32, s42) in set.series[0].y.iter().zip(&set.series[1].y) {
        assert!(s32 > s42);
    }
    let hot = st_diagram(&[ModelSpec::dimer(-32.0, 0.0)], &Grid::linear(1e6, 2e6, 2)).unwrap();
    assert!((hot.series[0].y[1] - 4f64.ln()).abs() < 1e-9);
}

#[test]
fn delta_s_iso_single_negative_peak() {
    let (a, b) = (ModelSpec::dimer(-32.0, 0.0), ModelSpec::dimer(-42.0, 0.0));
    let coarse = delta_s_iso(&a, &b, &Grid::linear(1.0, 100.0, 100)).unwrap();
    let y = &coarse.series[0].y;
    assert!(y.iter().all(|v| *v <= 0.0));
    let turns = y.windows(3).filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0).count();
    assert_eq!(turns, 1);
    let peak = coarse.extremum.unwrap();
    assert!(peak.x > 1.0 && peak.x < 100.0 && peak.y < 0.0);

    let dense = delta_s_iso(&a, &b, &Grid::linear(1.0, 100.0, 991)).unwrap();
    let fine = dense.extremum.unwrap();
    assert!((fine.x - peak.x).abs() <= 1.0, "{} vs {}", fine.x, peak.x);
    assert!(fine.y <= peak.y);

    let swapped = delta_s_iso(&b, &a, &Grid::linear(1.0, 100.0, 100)).unwrap();
    for (p, q) in y.iter().zip(&swapped.series[0].y) {
        assert_eq!(*p, -q);
    }
}

#[test]
fn ergotropy_subcommand() {
    let (code, stdout) = in_process(&["ergotropy", "--J-a", "-32", "--b-a", "6", "--temperature", "5", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["rows"][0]["ergotropy"].as_f64().unwrap() > 0.0);
    let (code, stdout) = in_process(&["ergotropy", "--J-a", "-32", "--b-a", "6", "--temperature", "5", "--reference", "full"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["rows"][0]["ergotropy"].as_f64().unwrap() <= 1e-12);
    assert_eq!(in_process(&["ergotropy", "--J-a", "-32"]).0, 1);
}

#[test]
fn sweep_over_cluster_and_levels() {
    let (code, stdout) = in_process(&[
        "sweep", "--cycle", "otto", "--model", "cluster", "--sites", "3", "--periodic", "--J-a", "-20",
        "--J-b", "-30", "--t-cold", "5", "--axis", "t-hot:10:100:4:log", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 6);
    let (code, _) = in_process(&[
        "sweep", "--cycle", "otto", "--model", "levels", "--levels-a", "0,1", "--levels-b", "0,2",
        "--t-cold", "1", "--t-hot", "10", "--axis", "J-a:-2:-1:3",
    ]);
    assert_eq!(code, 1, "J does not enter an explicit level list");
}
