use std::path::Path;
use std::process::{Command, Output};

use ntq_core::bundled;
use ntq_core::sampling::estimate_gamma_nt;

fn ntq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntq"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ntq(&["gamma", "--env", "wall", "--bogus"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(ntq(&[], dir.path()).status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = ntq(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    for sub in ["gen-env", "gamma", "gen-data", "train", "eval", "grid", "plot"] {
        assert!(stdout(&o).contains(sub), "{sub} missing from help");
    }
}

#[test]
fn gamma_prints_the_estimator_value() {
    let dir = tempfile::tempdir().unwrap();
    ntq(&["gen-env", "--name", "wall", "--out", "."], dir.path());
    let o = ntq(&["gamma", "--env", "wall.toml", "--n", "20000", "--seed", "7"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let env = bundled::find("wall").unwrap().environment::<f64>().unwrap();
    let est = estimate_gamma_nt(&env.view(), 20_000, 0.05, 7).unwrap();
    let out = stdout(&o);
    assert!(out.contains(&format!("gamma_nt = {:.4} ± {:.4}", est.gamma, est.half_width)), "{out}");
    assert!(out.contains("manifest: gamma.manifest.json"));
    assert!(dir.path().join("gamma.manifest.json").exists());
}

#[test]
fn gen_env_writes_every_bundled_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = ntq(&["gen-env", "--out", "envs"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    for b in &bundled::BUNDLED {
        let text = std::fs::read_to_string(dir.path().join("envs").join(format!("{}.toml", b.name))).unwrap();
        assert_eq!(text, b.toml);
    }
    assert!(stdout(&o).contains("manifest: "));
}

#[test]
fn pipeline_from_data_to_figure() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let o = ntq(args, dir.path());
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("manifest: "), "{args:?}");
        o
    };
    run(&[
        "gen-data", "--env", "wall", "--preset", "d3", "--k-train", "30", "--seed", "3", "--gamma-samples", "500",
        "--csv", "--out", "d3.bin",
    ]);
    for f in ["d3.bin", "d3.bin.meta.json", "d3.csv", "d3.bin.manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    run(&["train", "--data", "d3.bin", "--epochs", "3", "--hidden-layers", "16,16", "--out", "m.bin"]);
    run(&["eval", "--env", "wall", "--model", "m.bin", "--k-test", "5", "--query-kind", "non-trivial", "--out", "e.json"]);
    let metrics: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(metrics["n_total"], 5);
    run(&[
        "plot", "--env", "wall", "--padding", "0.8", "--data", "d3.bin", "--model", "m.bin", "--start", "2,2", "--goal",
        "18,2", "--expert", "--out", "fig.svg",
    ]);
    let svg = std::fs::read_to_string(dir.path().join("fig.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("data-label=\"expert\""));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d3.bin.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "gen-data");
    assert_eq!(manifest["config"]["k_train"], 30);
    assert_eq!(manifest["seeds"][0], 3);
}

#[test]
fn domain_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = ntq(&["gamma", "--env", "no_such_env"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = ntq(
        &["gen-data", "--env", "wall", "--preset", "d0", "--k-train", "50", "--retry-cap", "3", "--out", "x.bin"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("retry cap"));
}

#[test]
fn grid_subcommand_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("tiny.toml"),
        r#"
name = "tiny"
environments = ["wall"]
k_train = 20
k_test = 5
seeds = [1]
presets = ["D0", "D3"]
gamma_samples = 500

[train]
epochs = 2
hidden_layers = [8]
"#,
    )
    .unwrap();
    let o = ntq(&["--jobs", "1", "grid", "--config", "tiny.toml", "--out", "g"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("g/report.txt")).unwrap();
    assert_eq!(stdout(&o), format!("{report}manifest: g/manifest.json\n"));
    assert!(report.contains("PNet0") && report.contains("PNet3"));
    for f in ["metrics.csv", "timing.csv", "manifest.json", "figures/wall_D0_queries.svg"] {
        assert!(dir.path().join("g").join(f).exists(), "{f}");
    }
}
