use std::path::Path;
use std::process::{Command, Output};

fn egress(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egress"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn environment(name: &str) -> String {
    format!(
        "{}/../core/environments/{name}.json",
        env!("CARGO_MANIFEST_DIR")
    )
}

fn write_spec(dir: &Path, body: &str) -> String {
    let path = dir.join("spec.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL_SPEC: &str = r#"{
    "environments": ["acyclic_school"],
    "planners": ["natural_response", "naive_asters"],
    "distributions": ["rooms_only"],
    "spawns": {"acyclic_school": [38]},
    "seeds": [1, 2]
}"#;

#[test]
fn validate_env_accepts_bundled_files() {
    for name in ["acyclic_school", "cyclic_school", "toy_graph"] {
        let out = egress(&["validate-env", &environment(name)]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let out = egress(&["validate-env", &environment("cyclic_school")]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("70 nodes"), "{text}");
}

#[test]
fn validate_env_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.json");
    std::fs::write(
        &path,
        r#"{"nodes": [{"id": 1, "kind": "room"}, {"id": 2, "kind": "exit"}],
            "edges": [{"a": 1, "b": 3, "door_kind": "single", "sojourn_s": 2}]}"#,
    )
    .unwrap();
    let out = egress(&["validate-env", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown node 3"));

    let out = egress(&[
        "validate-env",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_runs_aggregates_and_crowding() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SMALL_SPEC);
    let out_dir = dir.path().join("out");
    let out = egress(&[
        "run",
        "--spec",
        &spec,
        "--out",
        out_dir.to_str().unwrap(),
        "--workers",
        "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let runs = std::fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    let lines: Vec<&str> = runs.lines().collect();
    assert_eq!(lines.len(), 1 + 4);
    assert!(lines[0].starts_with("environment,planner,distribution,spawn,spawn_category,seed"));
    assert!(lines[1].starts_with("acyclic_school,natural_response,rooms_only,38,room,1,"));
    assert!(lines[4].starts_with("acyclic_school,naive_asters,rooms_only,38,room,2,"));

    let agg = std::fs::read_to_string(out_dir.join("aggregates.csv")).unwrap();
    assert_eq!(agg.lines().count(), 1 + 2);

    let crowd = std::fs::read_to_string(out_dir.join("crowding_acyclic_school.csv")).unwrap();
    assert_eq!(crowd.lines().next().unwrap(), "t,natural_response_n1,natural_response_n12,natural_response_n18,naive_asters_n1,naive_asters_n12,naive_asters_n18");
    assert_eq!(crowd.lines().count(), 1 + 76);
}

#[test]
fn worker_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SMALL_SPEC);
    let mut files = Vec::new();
    for workers in ["1", "3"] {
        let out_dir = dir.path().join(format!("w{workers}"));
        let out = egress(&[
            "run",
            "--spec",
            &spec,
            "--out",
            out_dir.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert_eq!(out.status.code(), Some(0));
        files.push(std::fs::read(out_dir.join("runs.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out_dir = out_dir.to_str().unwrap();

    let spec = write_spec(
        dir.path(),
        r#"{"environments": ["acyclic_school"], "colour": "red"}"#,
    );
    assert_eq!(
        egress(&["run", "--spec", &spec, "--out", out_dir])
            .status
            .code(),
        Some(2)
    );

    let spec = write_spec(dir.path(), r#"{"environments": ["no_such_school"]}"#);
    assert_eq!(
        egress(&["run", "--spec", &spec, "--out", out_dir])
            .status
            .code(),
        Some(2)
    );

    let spec = write_spec(
        dir.path(),
        r#"{"environments": ["acyclic_school"], "spawns": {"acyclic_school": [99]}}"#,
    );
    assert_eq!(
        egress(&["run", "--spec", &spec, "--out", out_dir])
            .status
            .code(),
        Some(2)
    );

    let out = egress(&[
        "sweep-reward",
        "--env",
        "cyclic_school",
        "--dist",
        "everywhere",
        "--out",
        out_dir,
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = egress(&[
        "crowding",
        "--env",
        "acyclic_school",
        "--nodes",
        "1,400",
        "--out",
        out_dir,
        "--seeds",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_cells_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // rooms hold 20, so every cell is rejected when it starts
    let spec = write_spec(
        dir.path(),
        r#"{"environments": ["acyclic_school"], "planners": ["natural_response"],
            "distributions": ["rooms_only"], "spawns": {"acyclic_school": [38]},
            "seeds": [1], "evacuees_per_node": 25}"#,
    );
    let out_dir = dir.path().join("out");
    let out = egress(&["run", "--spec", &spec, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let runs = std::fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    assert!(runs.contains("do not fit"), "{runs}");

    let summary = dir.path().join("summary.csv");
    let out = egress(&[
        "summarize",
        "--runs",
        out_dir.join("runs.csv").to_str().unwrap(),
        "--out",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn summarize_pools_by_spawn_category() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        r#"{"environments": ["acyclic_school"], "planners": ["natural_response"],
            "distributions": ["rooms_only"], "spawns": {"acyclic_school": [2, 6, 38]},
            "seeds": [1, 2]}"#,
    );
    let out_dir = dir.path().join("out");
    let out = egress(&["run", "--spec", &spec, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = dir.path().join("nested/summary.csv");
    let out = egress(&[
        "summarize",
        "--runs",
        out_dir.join("runs.csv").to_str().unwrap(),
        "--out",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(summary).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines[1].starts_with("acyclic_school,hall,rooms_only,natural_response,4,"));
    assert!(lines[2].starts_with("acyclic_school,room,rooms_only,natural_response,2,"));
}

#[test]
fn crowding_writes_a_named_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out_dir = out_dir.to_str().unwrap();
    let out = egress(&[
        "crowding",
        "--env",
        "cyclic_school",
        "--nodes",
        "2,13",
        "--out",
        out_dir,
        "--seeds",
        "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let crowd = std::fs::read_to_string(dir.path().join("out/crowding_cyclic_school.csv")).unwrap();
    assert!(crowd.starts_with("t,ccasters_n2,ccasters_n13,naive_asters_n2,"));
    assert_eq!(crowd.lines().count(), 77);
}

#[test]
fn sweep_reward_writes_one_column_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = egress(&[
        "sweep-reward",
        "--env",
        "cyclic_school",
        "--dist",
        "rooms_only",
        "--out",
        out_dir.to_str().unwrap(),
        "--seeds",
        "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text =
        std::fs::read_to_string(out_dir.join("reward_sweep_cyclic_school_rooms_only.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "t,reward_6,reward_8,reward_9,reward_10,reward_11,reward_12,reward_14"
    );
    assert_eq!(lines.len(), 1 + 301);
    assert!(lines[1].starts_with("0,"));
}
