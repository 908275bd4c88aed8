use std::path::Path;
use std::process::{Command, Output};

fn qdbench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdbench"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const CONFIG: &str = r#"
[task]
preset = "synthetic"
noise_scale = 0.05

[algorithm]
batch_size = 64
init_batches = 1
eval_budget = 256

[corrected]
num_reevals = 2

[experiment]
replications = 2
global_seed = 9
output_dir = "tree"
"#;

#[test]
fn full_pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("config.toml"), CONFIG).unwrap();

    let validate = qdbench(&["validate", "--config", "config.toml"], root);
    assert_ok(&validate, "validate");
    let stdout = String::from_utf8_lossy(&validate.stdout);
    assert!(stdout.contains("config ok"), "{stdout}");
    assert!(stdout.contains("synthetic"));

    assert_ok(&qdbench(&["run", "--config", "config.toml"], root), "run");
    let rep0 = root.join("tree/map-elites/synthetic/rep_0");
    assert!(rep0.join("DONE").exists());

    assert_ok(&qdbench(&["aggregate", "--in", "tree"], root), "aggregate");
    assert!(root.join("tree/summary.csv").exists());

    assert_ok(
        &qdbench(
            &[
                "plot", "--kind", "curves", "--metric", "qd_score", "--x", "evaluations",
                "--in", "tree", "--out", "curves.svg",
            ],
            root,
        ),
        "plot curves",
    );
    let svg = std::fs::read_to_string(root.join("curves.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "{}", &svg[..svg.len().min(80)]);

    assert_ok(
        &qdbench(
            &[
                "plot", "--kind", "heatmap",
                "--in", "tree/map-elites/synthetic/rep_0/archive.json",
                "--out", "heatmap.svg",
            ],
            root,
        ),
        "plot heatmap",
    );
    assert!(root.join("heatmap.svg").exists());

    assert_ok(
        &qdbench(
            &[
                "plot", "--kind", "profile",
                "--in", "tree/map-elites/synthetic/rep_0/profile.csv",
                "--out", "profile.svg",
            ],
            root,
        ),
        "plot profile",
    );
    assert!(root.join("profile.svg").exists());

    assert_ok(
        &qdbench(
            &[
                "profile",
                "--in", "tree/map-elites/synthetic/rep_0/archive.json",
                "--out", "recomputed.csv",
            ],
            root,
        ),
        "profile",
    );
    assert_eq!(
        std::fs::read(root.join("recomputed.csv")).unwrap(),
        std::fs::read(rep0.join("profile.csv")).unwrap(),
        "profile recomputed from the dump matches the run's export"
    );

    assert_ok(
        &qdbench(
            &[
                "correct",
                "--in", "tree/map-elites/synthetic/rep_0/archive.json",
                "--task", "synthetic",
                "--noise", "0.05",
                "--reevals", "2",
                "--seed", "123",
                "--out", "recorrected",
            ],
            root,
        ),
        "correct",
    );
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(root.join("recorrected/corrected_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["num_reevals"], 2);
    assert!(root.join("recorrected/corrected_archive.json").exists());
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    std::fs::write(root.join("bad.toml"), "[task]\npreset = \"synthetic\"\ntypo = 1\n").unwrap();
    let out = qdbench(&["validate", "--config", "bad.toml"], root);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    std::fs::write(root.join("config.toml"), CONFIG).unwrap();
    assert_ok(
        &qdbench(&["run", "--config", "config.toml", "--replications", "1"], root),
        "run",
    );
    assert_ok(&qdbench(&["aggregate", "--in", "tree"], root), "aggregate");
    let out = qdbench(
        &[
            "plot", "--kind", "curves", "--metric", "speed",
            "--in", "tree", "--out", "x.svg",
        ],
        root,
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("coverage") && stderr.contains("max_fitness"), "{stderr}");
}

#[test]
fn run_without_config_needs_a_task() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdbench(&["run"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--task"));

    assert_ok(
        &qdbench(
            &[
                "run", "--task", "synthetic", "--budget", "2048", "--replications", "1",
                "--out", "quick",
            ],
            dir.path(),
        ),
        "run from flags only",
    );
    assert!(dir.path().join("quick/map-elites/synthetic/rep_0/DONE").exists());
}
