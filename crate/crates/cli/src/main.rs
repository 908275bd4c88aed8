use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qdbench::archive::Archive;
use qdbench::config::{
    load_config, resolve, ExperimentConfig, FileConfig, Overrides, TaskSection,
};
use qdbench::corrected::{corrected_checkpoint, CorrectedConfig};
use qdbench::experiment::{aggregate, read_summary_csv, run_experiment};
use qdbench::metrics::{archive_profile, read_profile_csv, write_profile_csv};
use qdbench::plots::{
    plot_archive_heatmap, plot_archive_profile, plot_metric_curves, ProfileSeries, XAxis,
};
use qdbench::tasks::preset;
use qdbench::FitnessBounds;

#[derive(Parser)]
#[command(name = "qdbench", version, about = "Quality-Diversity benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file: .toml, or .json written by a previous run
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global seed; every replication seed derives from it
    #[arg(long)]
    seed: Option<u64>,
    /// map-elites, cvt-map-elites, or random-search
    #[arg(long)]
    algo: Option<String>,
    /// Task preset name
    #[arg(long)]
    task: Option<String>,
    /// Evaluation budget per replication
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Output directory for the experiment tree
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reevaluations per occupant for corrected metrics
    #[arg(long)]
    reevals: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let ov = Overrides {
            seed: self.seed,
            algo: self.algo.clone(),
            task: self.task.clone(),
            budget: self.budget,
            replications: self.replications,
            out: self.out.clone(),
            reevals: self.reevals,
        };
        match &self.config {
            Some(path) => {
                load_config(path, &ov).with_context(|| format!("loading {}", path.display()))
            }
            None => {
                let preset_name = self
                    .task
                    .clone()
                    .context("pass --config <file> or at least --task <preset>")?;
                let file = FileConfig {
                    task: TaskSection {
                        preset: preset_name,
                        noise_scale: None,
                        episode_length: None,
                        params: None,
                    },
                    archive: None,
                    algorithm: Default::default(),
                    corrected: Default::default(),
                    experiment: Default::default(),
                    plot: Default::default(),
                };
                Ok(resolve(&file, &ov)?)
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    Curves,
    Profile,
    Heatmap,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication of an experiment and write its output tree
    Run(ConfigArgs),
    /// Check a config and print the resolved settings without running
    Validate(ConfigArgs),
    /// Recompute a corrected report from an existing archive dump
    Correct {
        /// Archive dump (archive.json)
        #[arg(long = "in")]
        input: PathBuf,
        /// Task preset the archive was produced on
        #[arg(long)]
        task: String,
        /// Override the preset's noise scale
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 50)]
        reevals: usize,
        /// Seed of the reevaluation stream
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (default: next to the input dump)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the archive profile of a dump as CSV
    Profile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a finished experiment tree into summary.csv
    Aggregate {
        /// Experiment output directory
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Render a figure from experiment outputs
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Metric for curves: coverage, qd_score, or max_fitness
        #[arg(long, default_value = "qd_score")]
        metric: String,
        /// X axis for curves: evaluations or wall_time
        #[arg(long, default_value = "evaluations")]
        x: String,
        /// Curves: summary.csv or its directory. Profile: one or more
        /// profile.csv files. Heatmap: an archive.json dump.
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "#2c7bb6")]
        color_low: String,
        #[arg(long, default_value = "#d7191c")]
        color_high: String,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let dirs = run_experiment(&cfg)?;
            for d in &dirs {
                println!("{}", d.display());
            }
            println!(
                "wrote {} replications of {} on {}",
                dirs.len(),
                cfg.algorithm.algorithm.slug(),
                cfg.task.name
            );
            Ok(())
        }
        Command::Validate(args) => {
            let cfg = args.resolve()?;
            println!("config ok");
            println!("  task          {}", cfg.task.name);
            println!("  algorithm     {}", cfg.algorithm.algorithm.slug());
            println!("  eval budget   {}", cfg.algorithm.eval_budget);
            println!("  replications  {}", cfg.replications);
            println!("  global seed   {}", cfg.global_seed);
            println!("  output dir    {}", cfg.output_dir.display());
            Ok(())
        }
        Command::Correct { input, task, noise, reevals, seed, out } => {
            let (archive, bounds) = Archive::read_json(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let mut task = preset(&task)?;
            if let Some(n) = noise {
                task.noise_scale = n;
            }
            if task.fitness_bounds != bounds {
                bail!(
                    "dump bounds [{}, {}] do not match task '{}' bounds [{}, {}]",
                    bounds.min,
                    bounds.max,
                    task.name,
                    task.fitness_bounds.min,
                    task.fitness_bounds.max
                );
            }
            let dir = match out {
                Some(d) => d,
                None => input
                    .parent()
                    .context("input path has no parent directory")?
                    .to_path_buf(),
            };
            std::fs::create_dir_all(&dir)?;
            let ccfg = CorrectedConfig { num_reevals: reevals, reeval_seed: seed };
            let (report, corrected) =
                corrected_checkpoint(&archive, &task, &ccfg, 0, "corrected_archive.json", true)?;
            let report_path = dir.join("corrected_report.json");
            std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
            corrected.write_json(&dir.join("corrected_archive.json"), bounds)?;
            println!("{}", report_path.display());
            Ok(())
        }
        Command::Profile { input, out } => {
            let (archive, bounds) = Archive::read_json(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            write_profile_csv(&out, &archive_profile(&archive), bounds)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Aggregate { input } => {
            let outcome = aggregate(&input)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if outcome.rows.is_empty() {
                eprintln!(
                    "warning: no replications found under {}; pass the experiment \
                     output root (the directory holding <algorithm>/<task>/rep_*)",
                    input.display()
                );
            }
            println!(
                "{} ({} rows)",
                outcome.summary_path.display(),
                outcome.rows.len()
            );
            Ok(())
        }
        Command::Plot { kind, metric, x, inputs, out, color_low, color_high } => {
            let svg = match kind {
                PlotKind::Curves => {
                    let path = single_input(&inputs, "curves")?;
                    let summary = if path.is_dir() { path.join("summary.csv") } else { path };
                    let rows = read_summary_csv(&summary)
                        .with_context(|| format!("reading {}", summary.display()))?;
                    plot_metric_curves(&rows, &metric, XAxis::from_name(&x)?)?
                }
                PlotKind::Profile => {
                    let mut series = Vec::new();
                    for path in &inputs {
                        let points = read_profile_csv(path)
                            .with_context(|| format!("reading {}", path.display()))?;
                        if points.len() < 2 {
                            bail!("profile {} has fewer than two points", path.display());
                        }
                        series.push(ProfileSeries {
                            label: profile_label(path),
                            bounds: FitnessBounds {
                                min: points.first().unwrap().0,
                                max: points.last().unwrap().0,
                            },
                            points,
                        });
                    }
                    plot_archive_profile(&series)?
                }
                PlotKind::Heatmap => {
                    let path = single_input(&inputs, "heatmap")?;
                    let (archive, bounds) = Archive::read_json(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    plot_archive_heatmap(&archive, bounds, &color_low, &color_high)?
                }
            };
            std::fs::write(&out, svg)?;
            println!("{}", out.display());
            Ok(())
        }
    }
}

fn single_input(inputs: &[PathBuf], kind: &str) -> Result<PathBuf> {
    if inputs.len() != 1 {
        bail!("plot --kind {kind} takes exactly one --in path");
    }
    Ok(inputs[0].clone())
}

/// Label a profile series by the algorithm directory of the experiment
/// tree when the path looks like <algo>/<task>/rep_<r>/profile.csv, and by
/// file stem otherwise.
fn profile_label(path: &Path) -> String {
    let components: Vec<String> = path
        .components()
        .map(|c| c.as_os_str().to_string_lossy().to_string())
        .collect();
    for (i, c) in components.iter().enumerate() {
        if c.starts_with("rep_") && i >= 2 {
            return components[i - 2].clone();
        }
    }
    path.file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "profile".to_string())
}
