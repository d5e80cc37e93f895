//! Contract tests for the command-line surface: exit-status codes, artifact
//! reproducibility, the edge-list threshold, and the bundled file layout.

use std::path::PathBuf;
use std::process::Command;

use srmap::commands::{
    run_language, run_mds, run_navigate, run_oracle, EnvChoice, LanguageArgs, MdsArgs,
    NavigateArgs, OracleArgs,
};
use srmap::manifest::fnv1a64;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_srmap"))
}

fn temp_out(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("srmap-test-{}-{tag}", std::process::id()))
}

fn language_args(tag: &str) -> LanguageArgs {
    LanguageArgs {
        samples: 800,
        epochs: 10,
        batch: 32,
        lr: 0.05,
        gamma: 1.0,
        t: 2,
        seed: 7,
        out: temp_out(tag),
        paper_budget: false,
    }
}

#[test]
fn unknown_subcommand_exits_2() {
    let status = bin().arg("frobnicate").status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let status = bin().args(["oracle", "--bogus"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unreadable_maze_file_exits_1() {
    let out = temp_out("io");
    let status = bin()
        .args([
            "oracle",
            "--env",
            "maze",
            "--maze-file",
            "/nonexistent/maze.txt",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn diagnostic_failure_exits_3() {
    // a language state space cannot be reshaped into eigenmaps
    let out = temp_out("diag");
    let status = bin()
        .args(["eigen", "--env", "language", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn success_exits_0() {
    let out = temp_out("ok");
    let status = bin()
        .args([
            "oracle", "--env", "language", "--gamma", "1", "--t", "2", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("manifest.json").exists());
    assert!(out.join("tp.csv").exists());
    assert!(out.join("sr.csv").exists());
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn oracle_room_corner_rows() {
    let out = temp_out("corner");
    let manifest = run_oracle(&OracleArgs {
        env: EnvChoice::Room10,
        maze_file: None,
        gamma: 0.9,
        t: 10,
        out: out.clone(),
    })
    .unwrap();
    assert_eq!(manifest.metrics["n_states"], 100.0);
    let tp = srmap_core::Mat::load_csv(out.join("tp.csv")).unwrap();
    assert_eq!(tp.rows(), 100);
    // corner state 0 transitions to exactly three neighbors at 1/3 each
    let row = tp.row(0);
    let third = 1.0 / 3.0;
    assert_eq!(row[1], third);
    assert_eq!(row[10], third);
    assert_eq!(row[11], third);
    assert_eq!(row.iter().filter(|&&v| v > 0.0).count(), 3);
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn identical_config_reproduces_identical_artifacts() {
    let a = run_language(&language_args("repro-a")).unwrap();
    let b = run_language(&language_args("repro-b")).unwrap();
    assert_eq!(a.outputs.len(), b.outputs.len());
    for (fa, fb) in a.outputs.iter().zip(&b.outputs) {
        assert_eq!(fa.path, fb.path);
        assert_eq!(fa.digest, fb.digest, "artifact {} differs", fa.path);
    }
    // byte-level check on the matrices themselves
    let ta = std::fs::read(temp_out("repro-a").join("tp.csv")).unwrap();
    let tb = std::fs::read(temp_out("repro-b").join("tp.csv")).unwrap();
    assert_eq!(fnv1a64(&ta), fnv1a64(&tb));
    assert_eq!(ta, tb);
    std::fs::remove_dir_all(temp_out("repro-a")).ok();
    std::fs::remove_dir_all(temp_out("repro-b")).ok();
}

#[test]
fn exported_edges_respect_threshold() {
    let out = temp_out("edges");
    run_language(&LanguageArgs {
        out: out.clone(),
        ..language_args("edges")
    })
    .unwrap();
    let edges = std::fs::read_to_string(out.join("edges.txt")).unwrap();
    assert!(!edges.is_empty());
    for line in edges.lines() {
        let p: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
        assert!(p >= 1e-4, "edge below threshold: {line}");
    }
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn navigate_bundle_layout() {
    let out = temp_out("navlayout");
    let manifest = run_navigate(&NavigateArgs {
        maze_file: None,
        epochs: 300,
        lr: 0.05,
        gamma: 0.95,
        t: 30,
        seed: 3,
        out: out.clone(),
        paper_budget: false,
    })
    .unwrap();
    for file in [
        "tp.csv",
        "sr.csv",
        "value.csv",
        "episodes.csv",
        "error_report.json",
    ] {
        assert!(out.join(file).exists(), "missing {file}");
    }
    assert!(out.join("maps/value.pgm").exists());
    let episodes = std::fs::read_to_string(out.join("episodes.csv")).unwrap();
    assert!(episodes.starts_with("episode,step,state,action,reward,cause\n"));
    assert!(manifest.metrics.contains_key("goal_fraction"));
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn custom_maze_file_flows_through() {
    let out = temp_out("custommaze");
    let maze_path = temp_out("custommaze-layout").with_extension("txt");
    std::fs::write(&maze_path, "....F\n.....\n").unwrap();
    let manifest = run_oracle(&OracleArgs {
        env: EnvChoice::Maze,
        maze_file: Some(maze_path.clone()),
        gamma: 0.9,
        t: 5,
        out: out.clone(),
    })
    .unwrap();
    assert_eq!(manifest.metrics["n_states"], 10.0);
    assert_eq!(manifest.metrics["n_rewards"], 1.0);
    assert!(manifest.input_digests.contains_key("maze_file"));
    std::fs::remove_dir_all(&out).ok();
    std::fs::remove_file(&maze_path).ok();
}

#[test]
fn eigen_emits_requested_number_of_maps() {
    let out = temp_out("eigen30");
    let manifest = srmap::commands::run_eigen(&srmap::commands::EigenArgs {
        env: EnvChoice::Room10,
        maze_file: None,
        k: 30,
        gamma: 0.9,
        t: 10,
        out: out.clone(),
    })
    .unwrap();
    let maps: Vec<_> = manifest
        .outputs
        .iter()
        .filter(|f| f.path.starts_with("maps/eigen_") && f.path.ends_with(".svg"))
        .collect();
    assert_eq!(maps.len(), 30);
    assert!(out.join("maps/eigen_000.svg").exists());
    assert!(out.join("maps/eigen_029.svg").exists());
    let eigencsv = std::fs::read_to_string(out.join("eigenvalues.csv")).unwrap();
    assert_eq!(eigencsv.lines().count(), 101); // header + one row per valid state
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn mds_report_contains_all_four_embeddings() {
    let out = temp_out("mdsrep");
    let manifest = run_mds(&MdsArgs {
        samples: 800,
        epochs: 10,
        batch: 32,
        lr: 0.05,
        gamma: 1.0,
        t: 2,
        seed: 7,
        out: out.clone(),
        paper_budget: false,
    })
    .unwrap();
    for name in ["tp_truth", "sr_truth", "tp_learned", "sr_learned"] {
        assert!(manifest.metrics.contains_key(&format!("silhouette_{name}")));
        let csv = std::fs::read_to_string(out.join(format!("embedding_{name}.csv"))).unwrap();
        assert!(csv.starts_with("item,label,x,y\n"));
        assert_eq!(csv.lines().count(), 41); // header + 40 words
    }
    std::fs::remove_dir_all(&out).ok();
}
