//! End-to-end tests of the `bml` binary: flags, outputs, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bml() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bml"))
}

fn run(args: &[&str]) -> Output {
    bml().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_reports_free_movement_and_final_velocity() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("steps.csv");
    let out = run(&[
        "simulate", "--shape", "4x4", "-m", "2", "--q", "0", "--seed", "1",
        "--steps", "200", "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("free movement: onset"), "{text}");
    assert!(text.contains("final velocity: 1"), "{text}");
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("schema,t,moved,velocity,type_changes\n"));
    assert_eq!(csv.lines().count(), 201);
    assert!(out_path.with_file_name("steps.csv.meta.json").exists());
}

#[test]
fn simulate_full_lattice_never_moves() {
    let out = run(&["simulate", "--shape", "2x2", "-m", "4", "--seed", "3", "--steps", "20"]);
    assert!(out.status.success());
    let records = stdout(&out);
    for line in records.lines().skip(1) {
        assert!(line.contains(",0,0,"), "nonzero movement in {line}");
    }
    assert!(stderr(&out).contains("free movement: none detected"));
}

#[test]
fn simulate_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "simulate", "--shape", "6x4", "-m", "5", "--q", "0.3", "--seed", "9",
            "--steps", "300", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn simulate_jsonl_format() {
    let out = run(&[
        "simulate", "--shape", "4x4", "-m", "3", "--seed", "2", "--steps", "5",
        "--format", "jsonl",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["schema"], "bml.steps.v1");
    }
}

#[test]
fn simulate_loads_initial_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let init = dir.path().join("init.json");
    std::fs::write(
        &init,
        r#"{"shape":"4x4","particles":[{"id":1,"coords":[0,0],"type":1},{"id":2,"coords":[1,1],"type":1}]}"#,
    )
    .unwrap();
    let out = run(&["simulate", "--init", init.to_str().unwrap(), "--steps", "8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    // phi classes {0, 2}: certified from the start, never delayed.
    assert!(stderr(&out).contains("onset 0"), "{}", stderr(&out));
}

#[test]
fn corrupt_initial_configuration_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let init = dir.path().join("bad.json");
    std::fs::write(
        &init,
        r#"{"shape":"4x4","particles":[{"id":1,"coords":[0,0],"type":1},{"id":2,"coords":[0,0],"type":2}]}"#,
    )
    .unwrap();
    let out = run(&["simulate", "--init", init.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("occupy cell"), "{}", stderr(&out));
}

#[test]
fn verify_emits_report_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("verify.json");
    let out = run(&[
        "verify", "--shape", "4x4", "-m", "2", "--out", report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["schema"], "bml.verify.v1");
    assert_eq!(report["states_enumerated"], 480);
    assert_eq!(report["all_free"], true);
    assert!(report["worst_state"]["particles"].is_array());

    // Hypothesis violated without the override: usage error.
    let out = run(&["verify", "--shape", "6x4", "-m", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("hypothesis"));

    // With the override the run is informational and exits 0.
    let out = run(&["verify", "--shape", "2x2", "-m", "2", "--override-hypothesis"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("all free: false"));
    assert!(stdout(&out).contains("informational"));
}

#[test]
fn spectrum_prints_value_sets() {
    let out = run(&["spectrum", "--shape", "2x2", "-m", "1"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("velocity spectrum: {1}"));

    let out = run(&["spectrum", "--shape", "2x2", "-m", "4"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("velocity spectrum: {0}"));

    let out = run(&["spectrum", "--shape", "2x2", "-m", "1", "--q", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("deterministic"));
}

#[test]
fn spectrum_budget_exceeded_exits_2() {
    let out = run(&["spectrum", "--shape", "6x6", "-m", "6", "--max-states", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("budget"));
}

#[test]
fn sweep_grid_bounds_and_determinism() {
    let out = run(&["sweep", "--shape", "4x4", "--densities", "16"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["sweep", "--shape", "4x4", "--densities", "0"]);
    assert_eq!(out.status.code(), Some(1));

    let args = [
        "sweep", "--shape", "8", "--densities", "2,6", "--q-grid", "0",
        "--trajectories", "4", "--steps", "200", "--seed", "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    assert!(text.starts_with("schema,shape,m,density,q,trajectories,mean_velocity,free_fraction,mean_onset\n"));
    assert_eq!(text.lines().count(), 3);
    // Ring of 8: m = 2 flows freely, m = 6 stays below velocity 1.
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows[0].contains(",1,1,"), "{}", rows[0]);
    assert!(rows[1].contains(",0,"), "{}", rows[1]);
}

#[test]
fn sweep_ring_threshold_phenomenology() {
    // Ring of 16, q = 0: every density up to half flows freely; above half
    // the tail velocity sits below 1 and no trajectory reaches free
    // movement.
    let out = run(&[
        "sweep", "--shape", "16",
        "--densities", "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15",
        "--q-grid", "0", "--trajectories", "6", "--steps", "600", "--seed", "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for (row, line) in text.lines().skip(1).enumerate() {
        let m = row + 1;
        let fields: Vec<&str> = line.split(',').collect();
        let mean_velocity: f64 = fields[6].parse().unwrap();
        let free_fraction: f64 = fields[7].parse().unwrap();
        if m <= 8 {
            assert_eq!(free_fraction, 1.0, "m={m}: {line}");
            assert_eq!(mean_velocity, 1.0, "m={m}: {line}");
        } else {
            assert_eq!(free_fraction, 0.0, "m={m}: {line}");
            assert!(mean_velocity < 1.0, "m={m}: {line}");
        }
    }
}

#[test]
fn unwritable_output_path_is_a_runtime_failure() {
    let out = run(&[
        "simulate", "--shape", "4x4", "-m", "1", "--steps", "2",
        "--out", "/dev/null/steps.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn render_ascii_frames() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    let out = run(&[
        "render", "--shape", "4x4", "-m", "2", "--seed", "1", "--steps", "10",
        "--out", frames.to_str().unwrap(), "--style", "ascii",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut names: Vec<String> = std::fs::read_dir(&frames)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".txt"))
        .collect();
    names.sort();
    assert_eq!(names.len(), 11);
    assert_eq!(names[0], "frame_000000.txt");
    assert_eq!(names[10], "frame_000010.txt");
    let frame = std::fs::read_to_string(frames.join(&names[0])).unwrap();
    let lines: Vec<&str> = frame.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l.len() == 4));
    let particles = frame.chars().filter(|c| *c == '>' || *c == 'v').count();
    assert_eq!(particles, 2);
}

#[test]
fn render_full_lattice_frames_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    let out = run(&[
        "render", "--shape", "2x2", "-m", "4", "--seed", "5", "--steps", "4",
        "--out", frames.to_str().unwrap(), "--style", "ascii",
    ]);
    assert!(out.status.success());
    let first = std::fs::read(frames.join("frame_000000.txt")).unwrap();
    for t in 1..=4 {
        let other = std::fs::read(frames.join(format!("frame_{t:06}.txt"))).unwrap();
        assert_eq!(first, other);
    }
}

#[test]
fn render_ppm_dimensions_and_scale() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    let out = run(&[
        "render", "--shape", "5x3", "-m", "2", "--seed", "1", "--steps", "1",
        "--out", frames.to_str().unwrap(), "--style", "ppm", "--scale", "4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let bytes = std::fs::read(frames.join("frame_000000.ppm")).unwrap();
    let header = b"P6\n20 12\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 20 * 12 * 3);
}

#[test]
fn render_rejects_non_2d() {
    let out = run(&["render", "--shape", "2x2x2", "-m", "1", "--out", "/tmp/never"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("2-D"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "shape = 4x4\nparticles = 2\nseed = 1\nsteps = 50\n").unwrap();
    let out = run(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--steps", "7",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("steps 7"), "{}", stderr(&out));
    assert!(stderr(&out).contains("shape 4x4"));

    std::fs::write(&cfg, "shape = 4x4\nparticles = 2\nbogus = 1\n").unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown config key"));
}

#[test]
fn usage_errors_exit_1() {
    let out = run(&["simulate"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["simulate", "--shape", "4x4"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["simulate", "--shape", "4x4", "-m", "2", "--q", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["nonsense"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn sidecar_names_the_rng() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.csv");
    let out = run(&[
        "simulate", "--shape", "4x4", "-m", "1", "--steps", "3",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(Path::new(&format!("{}.meta.json", out_path.display())))
            .unwrap(),
    )
    .unwrap();
    assert_eq!(meta["schema"], "bml.meta.v1");
    assert!(meta["rng"].as_str().unwrap().contains("ChaCha8"));
    assert!(meta["runtime_seconds"].is_number());
}
