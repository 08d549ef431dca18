use std::fs;
use std::path::Path;
use std::process::Command;

use signet_id::commands::{
    check_pe_on, cmd_check_pe, cmd_eigen, cmd_gen_graph, cmd_simulate, cmd_simulate_sweep,
    run_config, MANIFEST_FILE, RESOLVED_CONFIG, TRAJECTORY_FILE,
};
use signet_id::config::{GraphFile, RunConfig};
use signet_id::excitation::GramForm;
use signet_id::graph::{laplacian_direct, spectral_report, GraphGenParams, SignedGraph};
use signet_id::reference::reference_graph;
use signet_id::sim::Trajectory;
use signet_id::Error;

fn signet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_signet"))
}

fn short_reference(seed: u64, horizon: f64) -> RunConfig {
    let mut cfg = RunConfig::reference(seed);
    cfg.sim.horizon = horizon;
    cfg
}

const DIVERGENT: &str = r#"
[graph]
n_nodes = 4
[[graph.edge]]
i = 1
j = 2
w = -1.0
[[graph.edge]]
i = 1
j = 3
w = -1.0
[[graph.edge]]
i = 1
j = 4
w = -1.0
[[graph.edge]]
i = 2
j = 3
w = -1.0
[[graph.edge]]
i = 2
j = 4
w = -1.0
[[graph.edge]]
i = 3
j = 4
w = -1.0

[gains]
c1 = 0.1

[sim]
horizon = 50.0
"#;

#[test]
fn reproduce_is_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_config(&short_reference(2, 3.0), Path::new("."), &a).unwrap();
    let manifest = run_config(&short_reference(2, 3.0), Path::new("."), &b).unwrap();
    for name in &manifest.outputs {
        if name != MANIFEST_FILE {
            assert_eq!(
                fs::read(a.join(name)).unwrap(),
                fs::read(b.join(name)).unwrap(),
                "{name}"
            );
        }
    }
    assert!(manifest.outputs.iter().all(|f| b.join(f).is_file()));

    // replay from the snapshot alone
    let replay = dir.path().join("replay");
    cmd_simulate(&b.join(RESOLVED_CONFIG), &replay).unwrap();
    assert_eq!(
        fs::read(b.join(TRAJECTORY_FILE)).unwrap(),
        fs::read(replay.join(TRAJECTORY_FILE)).unwrap()
    );
}

#[test]
fn seed_changes_magnitudes_not_signs() {
    let a = reference_graph(0).unwrap();
    let b = reference_graph(1).unwrap();
    assert_ne!(a, b);
    for (p, q) in a.edges().iter().zip(b.edges()) {
        assert_eq!((p.i, p.j), (q.i, q.j));
        assert_eq!(p.w.signum(), q.w.signum());
    }
}

#[test]
fn malformed_config_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[graph]\nn_nodes = 3\n[sim]\ndt = \"x\"\n").unwrap();
    let out = dir.path().join("out");
    let err = cmd_simulate(&cfg, &out).unwrap_err();
    assert!(matches!(err, Error::Parse { .. }));
    assert!(err.to_string().contains("line 4"), "{err}");
    assert!(!out.exists());

    let status = signet()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let missing = signet()
        .args(["simulate", "--config", "/definitely/not/here.toml", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(3));

    let cfg = dir.path().join("div.toml");
    fs::write(&cfg, DIVERGENT).unwrap();
    let run = signet()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("WARN"), "gain warning missing: {stderr}");
    assert!(stderr.contains("diverged at t ="), "{stderr}");
    assert!(!out.exists());

    assert_eq!(
        signet().arg("--help").output().unwrap().status.code(),
        Some(0)
    );
    assert_eq!(
        signet().arg("bogus").output().unwrap().status.code(),
        Some(1)
    );
}

#[test]
fn check_pe_reports_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    run_config(&short_reference(0, 4.0), Path::new("."), &run).unwrap();
    let csv = run.join(TRAJECTORY_FILE);

    let report = cmd_check_pe(&csv, 0.0, 1.0, 0.5, GramForm::Outer).unwrap();
    assert_eq!(report.qualified_count, report.total_windows);
    assert!(report.windows.iter().all(|w| w.min_eig >= -1e-10));
    let edge = cmd_check_pe(&csv, 0.0, 1.0, 0.5, GramForm::Inner).unwrap();
    assert_eq!(edge.windows[0].gram.dim(), (66, 66));

    assert!(matches!(
        cmd_check_pe(&csv, 0.1, 10.0, 0.5, GramForm::Outer),
        Err(Error::Range(_))
    ));

    let out = signet()
        .args(["check-pe", "--window", "1", "--delta", "0", "--trajectory"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in [
        "delta",
        "T",
        "stride",
        "mu_estimate",
        "qualified_count",
        "windows",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert!(json["windows"][0].get("t_start").is_some());
    assert!(json["windows"][0].get("min_eig").is_some());

    // drop a column
    let text = fs::read_to_string(&csv).unwrap();
    let broken: String = text
        .lines()
        .map(|l| l.split_once(',').map_or("", |p| p.1).to_string() + "\n")
        .collect();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, broken).unwrap();
    match cmd_check_pe(&bad, 0.1, 1.0, 0.5, GramForm::Outer) {
        Err(Error::Format(m)) => assert!(m.contains("'t'"), "{m}"),
        other => panic!("{other:?}"),
    }
    let out = signet()
        .args(["check-pe", "--trajectory"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // equals the in-memory path
    let traj =
        Trajectory::read_csv(std::io::BufReader::new(fs::File::open(&csv).unwrap())).unwrap();
    assert_eq!(
        check_pe_on(&traj, 0.0, 1.0, 0.5, GramForm::Outer).unwrap(),
        report
    );
}

#[test]
fn eigen_examples() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, g: &SignedGraph| {
        let p = dir.path().join(name);
        fs::write(&p, GraphFile::from_graph(g).to_toml()).unwrap();
        p
    };

    let unit = reference_graph(0)
        .unwrap()
        .map_weights(|e| e.w.signum())
        .unwrap();
    let r = cmd_eigen(&write("fig1.toml", &unit)).unwrap();
    assert!(r.bound_holds);
    assert_eq!(r.c1_prop2, 12.0);

    let pair = SignedGraph::complete(2, -1.0).unwrap();
    let r = cmd_eigen(&write("pair.toml", &pair)).unwrap();
    assert!((r.lambda_min + 2.0).abs() < 1e-12);
    assert!((r.c1_prop1 - 2.0).abs() < 1e-12);

    let path = dir.path().join("path.toml");
    fs::write(
        &path,
        "n_nodes = 3\n[[edge]]\ni = 1\nj = 2\nw = 1.0\n[[edge]]\ni = 2\nj = 3\nw = 1.0\n",
    )
    .unwrap();
    assert!(cmd_eigen(&path).unwrap().lambda_min.abs() < 1e-12);

    let out = signet()
        .args(["eigen", "--graph"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in [
        "eigenvalues",
        "lambda_min",
        "lambda_max",
        "c1_prop1",
        "c1_prop2",
        "bound_holds",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }

    let invalid = dir.path().join("loop.toml");
    fs::write(&invalid, "n_nodes = 2\n[[edge]]\ni = 1\nj = 1\nw = 1.0\n").unwrap();
    assert_eq!(
        signet()
            .args(["eigen", "--graph"])
            .arg(&invalid)
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn gen_graph_examples() {
    let single = GraphGenParams {
        n_nodes: 2,
        density: 1.0,
        negative_fraction: 0.5,
        normalized: true,
    };
    let text = cmd_gen_graph(&single, 0).unwrap();
    let g = signet_id::config::parse_graph_file(&text, "gen").unwrap();
    assert_eq!(g.edges().len(), 1);

    let unsigned = GraphGenParams {
        n_nodes: 6,
        density: 0.5,
        negative_fraction: 0.0,
        normalized: true,
    };
    let g =
        signet_id::config::parse_graph_file(&cmd_gen_graph(&unsigned, 4).unwrap(), "gen").unwrap();
    let lmin = spectral_report(&laplacian_direct(&g)).unwrap().lambda_min;
    assert!(lmin.abs() < 1e-12);

    let args = ["gen-graph", "--n", "10", "--density", "0.4", "--seed", "11"];
    let a = signet().args(args).output().unwrap();
    let b = signet().args(args).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let hopeless = GraphGenParams {
        n_nodes: 30,
        density: 0.01,
        negative_fraction: 0.5,
        normalized: true,
    };
    assert!(matches!(
        cmd_gen_graph(&hopeless, 0),
        Err(Error::Generation(_))
    ));
    let bad = signet()
        .args(["gen-graph", "--n", "4", "--density", "0"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn sweep_names_runs_by_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        "[graph]\nfile = \"net.toml\"\n[sim]\nhorizon = 1.0\nseed = 5\n",
    )
    .unwrap();
    let g = reference_graph(3).unwrap();
    fs::write(
        dir.path().join("net.toml"),
        GraphFile::from_graph(&g).to_toml(),
    )
    .unwrap();
    let out = dir.path().join("out");
    let manifests = cmd_simulate_sweep(&cfg, &out, 3).unwrap();
    assert_eq!(manifests.len(), 3);
    let t5 = fs::read(out.join("seed_5").join(TRAJECTORY_FILE)).unwrap();
    let t6 = fs::read(out.join("seed_6").join(TRAJECTORY_FILE)).unwrap();
    assert!(out.join("seed_7").join(MANIFEST_FILE).is_file());
    assert_ne!(t5, t6);

    let single = dir.path().join("single");
    let mut one = RunConfig::load(&cfg).unwrap();
    one.sim.seed = 6;
    run_config(&one, dir.path(), &single).unwrap();
    assert_eq!(fs::read(single.join(TRAJECTORY_FILE)).unwrap(), t6);
}
