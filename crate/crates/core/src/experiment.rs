//! Experiment orchestration: replication, output layout, and aggregation.
//!
//! One experiment produces the tree
//!
//! ```text
//! output_dir/<algorithm>/<task>/manifest.json
//! output_dir/<algorithm>/<task>/rep_<r>/metrics.csv
//!                                       archive.json
//!                                       profile.csv
//!                                       corrected_report.json
//!                                       corrected_archive.json
//!                                       corrected_metrics.csv
//!                                       DONE
//! ```
//!
//! DONE is written last, so its absence marks an interrupted replication.

use std::path::{Path, PathBuf};

use crate::algorithms::{run, RunOptions};

use crate::config::{ExperimentConfig, Manifest};
use crate::corrected::{corrected_checkpoint, write_corrected_csv, CorrectedConfig};
use crate::error::{Error, Result};
use crate::metrics::{
    archive_profile, read_metrics_csv, write_metrics_csv, write_profile_csv,
};
use crate::rng::derive_seed;

pub const DONE_MARKER: &str = "DONE";
pub const CORRECTED_ARCHIVE_FILE: &str = "corrected_archive.json";

/// Directory holding one (algorithm, task) pair's replications.
pub fn experiment_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir
        .join(cfg.algorithm.algorithm.slug())
        .join(&cfg.task.name)
}

pub fn rep_dir(cfg: &ExperimentConfig, rep: usize) -> PathBuf {
    experiment_dir(cfg).join(format!("rep_{rep}"))
}

fn run_one_rep(cfg: &ExperimentConfig, container: &crate::archive::Container, rep: usize) -> Result<PathBuf> {
    let dir = rep_dir(cfg, rep);
    std::fs::create_dir_all(&dir)?;

    let run_seed = derive_seed(cfg.global_seed, rep as u64);
    let algo_cfg = cfg.algorithm.algo_config(run_seed);
    let opts = RunOptions {
        parallel: cfg.parallel,
        snapshot_every_batches: cfg.corrected.checkpoint_every_batches as usize,
    };
    let result = run(&algo_cfg, &cfg.task, container.clone(), &opts)?;

    let b = cfg.task.fitness_bounds;
    write_metrics_csv(&dir.join("metrics.csv"), &result.metrics)?;
    result.archive.write_json(&dir.join("archive.json"), b)?;
    write_profile_csv(&dir.join("profile.csv"), &archive_profile(&result.archive), b)?;

    let ccfg = CorrectedConfig {
        num_reevals: cfg.corrected.num_reevals,
        reeval_seed: derive_seed(cfg.corrected.reeval_seed, rep as u64),
    };
    let checkpoints = result
        .snapshots
        .iter()
        .map(|(evals, a)| (*evals, a))
        .chain(std::iter::once((result.evaluations, &result.archive)));
    let mut reports = Vec::new();
    let mut last = None;
    for (evals, archive) in checkpoints {
        let (report, corrected) = corrected_checkpoint(
            archive,
            &cfg.task,
            &ccfg,
            evals,
            CORRECTED_ARCHIVE_FILE,
            cfg.parallel,
        )?;
        reports.push(report);
        last = Some(corrected);
    }
    write_corrected_csv(&dir.join("corrected_metrics.csv"), &reports)?;
    let final_report = reports.last().expect("at least the final checkpoint");
    std::fs::write(
        dir.join("corrected_report.json"),
        serde_json::to_string_pretty(final_report)?,
    )?;
    last.expect("at least the final checkpoint")
        .write_json(&dir.join(CORRECTED_ARCHIVE_FILE), b)?;

    std::fs::write(dir.join(DONE_MARKER), "")?;
    Ok(dir)
}

/// Run every replication and write the output tree. Returns the
/// replication directories in index order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let base = experiment_dir(cfg);
    std::fs::create_dir_all(&base)?;
    std::fs::write(
        base.join("manifest.json"),
        Manifest::new(cfg.clone()).to_json_string()?,
    )?;

    // CVT centroids are built once and shared by every replication.
    let container = cfg.archive.build_container(&cfg.task)?;

    let dirs = crate::run_indexed(cfg.replications, cfg.parallel, |rep| {
        run_one_rep(cfg, &container, rep)
    });
    dirs.into_iter().collect()
}

/// Type-7 quantile (linear interpolation between order statistics) of a
/// sorted nonempty slice.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Median and quartiles of values at one checkpoint across replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

fn spread(values: &mut Vec<f64>) -> Spread {
    values.sort_by(|a, b| a.total_cmp(b));
    Spread {
        median: quantile(values, 0.5),
        q1: quantile(values, 0.25),
        q3: quantile(values, 0.75),
    }
}

/// One aggregated row: a metric's spread per (algorithm, task, checkpoint).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub task: String,
    pub evaluations: u64,
    pub replications: usize,
    pub wall_time_s: Spread,
    pub coverage: Spread,
    pub qd_score: Spread,
    pub max_fitness: Spread,
}

pub const SUMMARY_CSV_HEADER: &str = "algorithm,task,evaluations,replications,\
wall_time_s_median,wall_time_s_q1,wall_time_s_q3,\
coverage_median,coverage_q1,coverage_q3,\
qd_score_median,qd_score_q1,qd_score_q3,\
max_fitness_median,max_fitness_q1,max_fitness_q3";

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateOutcome {
    pub rows: Vec<SummaryRow>,
    pub summary_path: PathBuf,
    /// One entry per replication directory skipped for a missing DONE marker.
    pub warnings: Vec<String>,
}

fn sorted_dirs(path: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

/// Aggregate a completed experiment tree into `summary.csv` at its root:
/// median and interquartile range of every metric at every checkpoint,
/// one row per (algorithm, task, checkpoint). Replications without a DONE
/// marker are skipped with a warning naming the directory.
pub fn aggregate(output_dir: &Path) -> Result<AggregateOutcome> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for algo_dir in sorted_dirs(output_dir)? {
        let algorithm = algo_dir.file_name().unwrap().to_string_lossy().to_string();
        for task_dir in sorted_dirs(&algo_dir)? {
            let task = task_dir.file_name().unwrap().to_string_lossy().to_string();
            let mut per_rep = Vec::new();
            for rep in sorted_dirs(&task_dir)? {
                if !rep
                    .file_name()
                    .unwrap()
                    .to_string_lossy()
                    .starts_with("rep_")
                {
                    continue;
                }
                if !rep.join(DONE_MARKER).exists() {
                    warnings.push(format!(
                        "skipping incomplete replication {}: missing {DONE_MARKER}",
                        rep.display()
                    ));
                    continue;
                }
                per_rep.push(read_metrics_csv(&rep.join("metrics.csv"))?);
            }
            if per_rep.is_empty() {
                continue;
            }
            // Checkpoints are batch boundaries, identical across replications
            // of one config; a mismatch means the tree mixes configs.
            let checkpoints: Vec<u64> = per_rep[0].iter().map(|m| m.evaluations).collect();
            for other in &per_rep[1..] {
                let got: Vec<u64> = other.iter().map(|m| m.evaluations).collect();
                if got != checkpoints {
                    return Err(Error::config(format!(
                        "replications of {algorithm}/{task} disagree on checkpoints; \
                         was the tree produced by a single config?"
                    )));
                }
            }
            for (i, &evaluations) in checkpoints.iter().enumerate() {
                let collect = |f: &dyn Fn(&crate::metrics::MetricsRecord) -> f64| {
                    let mut v: Vec<f64> = per_rep.iter().map(|r| f(&r[i])).collect();
                    spread(&mut v)
                };
                rows.push(SummaryRow {
                    algorithm: algorithm.clone(),
                    task: task.clone(),
                    evaluations,
                    replications: per_rep.len(),
                    wall_time_s: collect(&|m| m.wall_time_s),
                    coverage: collect(&|m| m.coverage as f64),
                    qd_score: collect(&|m| m.qd_score),
                    max_fitness: collect(&|m| m.max_fitness),
                });
            }
        }
    }

    let summary_path = output_dir.join("summary.csv");
    write_summary_csv(&summary_path, &rows)?;
    Ok(AggregateOutcome { rows, summary_path, warnings })
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let s = |sp: &Spread| format!("{},{},{}", sp.median, sp.q1, sp.q3);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.algorithm,
            r.task,
            r.evaluations,
            r.replications,
            s(&r.wall_time_s),
            s(&r.coverage),
            s(&r.qd_score),
            s(&r.max_fitness),
        ));
    }
    out
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    std::fs::write(path, summary_to_csv(rows))?;
    Ok(())
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = std::fs::read_to_string(path)?;
    let malformed = |line: usize, msg: String| Error::Malformed {
        path: format!("{}:{}", path.display(), line),
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == SUMMARY_CSV_HEADER => {}
        other => {
            return Err(malformed(
                1,
                format!("expected header '{SUMMARY_CSV_HEADER}', got {:?}", other.map(|o| o.1)),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 16 {
            return Err(malformed(i + 1, format!("expected 16 fields, got {}", fields.len())));
        }
        let num = |j: usize| -> Result<f64> {
            fields[j]
                .parse()
                .map_err(|_| malformed(i + 1, format!("unparseable field {j}")))
        };
        let sp = |j: usize| -> Result<Spread> {
            Ok(Spread { median: num(j)?, q1: num(j + 1)?, q3: num(j + 2)? })
        };
        rows.push(SummaryRow {
            algorithm: fields[0].to_string(),
            task: fields[1].to_string(),
            evaluations: fields[2]
                .parse()
                .map_err(|_| malformed(i + 1, "unparseable evaluations".into()))?,
            replications: fields[3]
                .parse()
                .map_err(|_| malformed(i + 1, "unparseable replications".into()))?,
            wall_time_s: sp(4)?,
            coverage: sp(7)?,
            qd_score: sp(10)?,
            max_fitness: sp(13)?,
        });
    }
    Ok(rows)
}

/// Strip the wall-time column from a metrics CSV so runs can be compared
/// for determinism; wall time is the one column allowed to vary.
pub fn metrics_csv_without_wall_time(text: &str) -> String {
    text.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            let mut kept = Vec::with_capacity(fields.len().saturating_sub(1));
            for (i, f) in fields.iter().enumerate() {
                if i != 1 {
                    kept.push(*f);
                }
            }
            kept.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archive::Archive;
    use crate::config::{resolve, FileConfig, Overrides};

    fn tiny_config(out: &Path, algo: &str) -> ExperimentConfig {
        let toml_text = format!(
            r#"
[task]
preset = "synthetic"
noise_scale = 0.05

[algorithm]
name = "{algo}"
batch_size = 64
init_batches = 1
eval_budget = 256

[corrected]
num_reevals = 3
checkpoint_every_batches = 2

[experiment]
replications = 2
global_seed = 11
output_dir = "{}"
"#,
            out.display()
        );
        let file: FileConfig = toml::from_str(&toml_text).unwrap();
        resolve(&file, &Overrides::default()).unwrap()
    }

    const REP_FILES: &[&str] = &[
        "metrics.csv",
        "archive.json",
        "profile.csv",
        "corrected_report.json",
        "corrected_archive.json",
        "corrected_metrics.csv",
        DONE_MARKER,
    ];

    #[test]
    fn experiment_writes_the_full_tree() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path(), "map-elites");
        let reps = run_experiment(&cfg).unwrap();
        assert_eq!(reps.len(), 2);
        let base = dir.path().join("map-elites").join("synthetic");
        assert!(base.join("manifest.json").exists());
        for r in 0..2 {
            let rep = base.join(format!("rep_{r}"));
            for f in REP_FILES {
                assert!(rep.join(f).exists(), "missing {f} in rep_{r}");
            }
        }
        // 256-eval budget, 64-eval batches, checkpoint every 2 batches:
        // snapshots at 128 and the final archive at 256.
        let rows = crate::corrected::read_corrected_csv(
            &base.join("rep_0").join("corrected_metrics.csv"),
        )
        .unwrap();
        let evals: Vec<u64> = rows.iter().map(|r| r.checkpoint_evaluations).collect();
        assert_eq!(evals, vec![128, 256]);
    }

    #[test]
    fn reruns_are_identical_except_wall_time() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let mut c1 = tiny_config(d1.path(), "map-elites");
        let mut c2 = tiny_config(d2.path(), "map-elites");
        c1.parallel = false;
        c2.parallel = true;
        run_experiment(&c1).unwrap();
        run_experiment(&c2).unwrap();
        for r in 0..2 {
            let p1 = d1.path().join("map-elites/synthetic").join(format!("rep_{r}"));
            let p2 = d2.path().join("map-elites/synthetic").join(format!("rep_{r}"));
            for f in ["archive.json", "corrected_archive.json", "profile.csv", "corrected_metrics.csv", "corrected_report.json"] {
                assert_eq!(
                    std::fs::read(p1.join(f)).unwrap(),
                    std::fs::read(p2.join(f)).unwrap(),
                    "{f} differs in rep_{r}"
                );
            }
            let m1 = std::fs::read_to_string(p1.join("metrics.csv")).unwrap();
            let m2 = std::fs::read_to_string(p2.join("metrics.csv")).unwrap();
            assert_eq!(
                metrics_csv_without_wall_time(&m1),
                metrics_csv_without_wall_time(&m2)
            );
        }
    }

    #[test]
    fn different_seeds_give_different_dumps() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let c1 = tiny_config(d1.path(), "map-elites");
        let mut c2 = tiny_config(d2.path(), "map-elites");
        c2.global_seed = 12;
        run_experiment(&c1).unwrap();
        run_experiment(&c2).unwrap();
        let a1 = std::fs::read(
            d1.path().join("map-elites/synthetic/rep_0/archive.json"),
        )
        .unwrap();
        let a2 = std::fs::read(
            d2.path().join("map-elites/synthetic/rep_0/archive.json"),
        )
        .unwrap();
        assert_ne!(a1, a2);
    }

    #[test]
    fn manifest_reproduces_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path(), "map-elites");
        run_experiment(&cfg).unwrap();
        let manifest = dir.path().join("map-elites/synthetic/manifest.json");
        let reloaded = crate::config::load_config(&manifest, &Overrides::default()).unwrap();
        assert_eq!(reloaded, cfg);
    }

    #[test]
    fn quantiles_use_linear_interpolation() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        assert_eq!(quantile(&xs, 0.5), 5.5);
        assert_eq!(quantile(&xs, 0.25), 3.25);
        assert_eq!(quantile(&xs, 0.75), 7.75);
        assert_eq!(quantile(&[4.0], 0.5), 4.0);
        let constant = vec![3.0; 10];
        let sp = spread(&mut constant.clone());
        assert_eq!(sp.median, 3.0);
        assert_eq!(sp.q3 - sp.q1, 0.0);
    }

    #[test]
    fn aggregate_summarizes_each_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path(), "map-elites");
        run_experiment(&cfg).unwrap();
        let outcome = aggregate(dir.path()).unwrap();
        assert!(outcome.warnings.is_empty());
        assert_eq!(outcome.rows.len(), 4, "4 batch checkpoints per run");
        assert!(outcome.summary_path.exists());
        for row in &outcome.rows {
            assert_eq!(row.algorithm, "map-elites");
            assert_eq!(row.task, "synthetic");
            assert_eq!(row.replications, 2);
            assert!(row.coverage.q1 <= row.coverage.median);
            assert!(row.coverage.median <= row.coverage.q3);
        }
        let read_back = read_summary_csv(&outcome.summary_path).unwrap();
        assert_eq!(read_back, outcome.rows);
    }

    #[test]
    fn aggregate_skips_reps_without_done_marker() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path(), "map-elites");
        run_experiment(&cfg).unwrap();
        let broken = dir.path().join("map-elites/synthetic/rep_1");
        std::fs::remove_file(broken.join(DONE_MARKER)).unwrap();
        let outcome = aggregate(dir.path()).unwrap();
        assert_eq!(outcome.warnings.len(), 1);
        assert!(outcome.warnings[0].contains("rep_1"), "{}", outcome.warnings[0]);
        assert!(outcome.rows.iter().all(|r| r.replications == 1));
    }

    #[test]
    fn constant_metric_has_zero_iqr_across_reps() {
        // Hand-built tree: 10 replications, one checkpoint, values 1..=10
        // for qd_score and a constant coverage.
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("map-elites").join("synthetic");
        for r in 0..10 {
            let rep = base.join(format!("rep_{r}"));
            std::fs::create_dir_all(&rep).unwrap();
            std::fs::write(
                rep.join("metrics.csv"),
                format!(
                    "{}\n100,0.5,7,{},3\n",
                    crate::metrics::METRICS_CSV_HEADER,
                    r + 1
                ),
            )
            .unwrap();
            std::fs::write(rep.join(DONE_MARKER), "").unwrap();
        }
        let outcome = aggregate(dir.path()).unwrap();
        assert_eq!(outcome.rows.len(), 1);
        let row = &outcome.rows[0];
        assert_eq!(row.coverage.median, 7.0);
        assert_eq!(row.coverage.q3 - row.coverage.q1, 0.0);
        assert_eq!(row.qd_score.median, 5.5);
        assert_eq!(row.evaluations, 100);
    }

    #[test]
    fn cvt_experiment_shares_centroids_across_reps() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(dir.path(), "cvt-map-elites");
        cfg.archive = crate::config::ArchiveConfig::Cvt {
            num_centroids: 16,
            kmeans_samples: 200,
            kmeans_max_iters: 20,
            kmeans_tolerance: 1e-9,
            centroid_seed: 3,
        };
        cfg.validate().unwrap();
        run_experiment(&cfg).unwrap();
        let base = dir.path().join("cvt-map-elites").join("synthetic");
        let mut centroid_sets = Vec::new();
        for r in 0..2 {
            let (archive, _) =
                Archive::read_json(&base.join(format!("rep_{r}")).join("archive.json")).unwrap();
            assert_eq!(archive.capacity(), 16);
            match archive.container() {
                crate::archive::Container::Cvt(c) => centroid_sets.push(c.centroids.clone()),
                other => panic!("expected CVT container, got {other:?}"),
            }
        }
        assert_eq!(centroid_sets[0], centroid_sets[1]);
    }
}
