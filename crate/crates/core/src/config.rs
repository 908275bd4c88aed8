//! Experiment configuration: TOML config files, CLI overrides, and the
//! fully resolved form recorded in run manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{default_mutation_sigma, AlgoConfig, Algorithm};
use crate::archive::{Container, GridSpec};
use crate::cvt::CvtSpec;
use crate::error::{Error, Result};
use crate::rng::derive_seed2;
use crate::tasks::{preset, TaskParams, TaskSpec};

const DEFAULT_GLOBAL_SEED: u64 = 42;
const DEFAULT_NUM_CENTROIDS: usize = 1024;
const DEFAULT_COLOR_LOW: &str = "#2c7bb6";
const DEFAULT_COLOR_HIGH: &str = "#d7191c";
/// Tag mixed into derived seeds for CVT centroid construction.
const CENTROID_SEED_TAG: u64 = 0x43_56_54;
/// Tag mixed into derived seeds for the reevaluation stream.
const REEVAL_SEED_TAG: u64 = 0x43_4f_52;

/// Raw config file contents before defaults are applied. Every section
/// except `[task]` may be omitted.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub task: TaskSection,
    #[serde(default)]
    pub archive: Option<ArchiveSection>,
    #[serde(default)]
    pub algorithm: AlgorithmSection,
    #[serde(default)]
    pub corrected: CorrectedSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub plot: PlotSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub preset: String,
    #[serde(default)]
    pub noise_scale: Option<f64>,
    #[serde(default)]
    pub episode_length: Option<usize>,
    /// Dynamics constants; fields left out fall back to the standard
    /// values, not the preset's.
    #[serde(default)]
    pub params: Option<TaskParams>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArchiveSection {
    Grid {
        #[serde(default)]
        subdivisions: Option<Vec<usize>>,
    },
    Cvt {
        #[serde(default)]
        num_centroids: Option<usize>,
        #[serde(default)]
        kmeans_samples: Option<usize>,
        #[serde(default)]
        kmeans_max_iters: Option<usize>,
        #[serde(default)]
        kmeans_tolerance: Option<f64>,
        #[serde(default)]
        centroid_seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub init_batches: Option<usize>,
    #[serde(default)]
    pub mutation_sigma: Option<f64>,
    #[serde(default)]
    pub eval_budget: Option<u64>,
    #[serde(default)]
    pub init_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectedSection {
    #[serde(default)]
    pub num_reevals: Option<usize>,
    #[serde(default)]
    pub reeval_seed: Option<u64>,
    #[serde(default)]
    pub checkpoint_every_batches: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub global_seed: Option<u64>,
    #[serde(default)]
    pub parallel: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSection {
    #[serde(default)]
    pub color_low: Option<String>,
    #[serde(default)]
    pub color_high: Option<String>,
}

/// CLI flag values layered on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub algo: Option<String>,
    pub task: Option<String>,
    pub budget: Option<u64>,
    pub replications: Option<usize>,
    pub out: Option<PathBuf>,
    pub reevals: Option<usize>,
}

impl Overrides {
    fn is_empty_except_scalars(&self) -> bool {
        self.algo.is_none() && self.task.is_none()
    }
}

/// Archive construction parameters with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArchiveConfig {
    Grid {
        subdivisions: Vec<usize>,
    },
    Cvt {
        num_centroids: usize,
        kmeans_samples: usize,
        kmeans_max_iters: usize,
        kmeans_tolerance: f64,
        centroid_seed: u64,
    },
}

impl ArchiveConfig {
    /// Materialize the container. For CVT this runs k-means, so call it
    /// once per experiment and clone the result across replications.
    pub fn build_container(&self, task: &TaskSpec) -> Result<Container> {
        match self {
            ArchiveConfig::Grid { subdivisions } => Ok(Container::Grid(GridSpec::new(
                task.bd_bounds.clone(),
                subdivisions.clone(),
            )?)),
            ArchiveConfig::Cvt {
                num_centroids,
                kmeans_samples,
                kmeans_max_iters,
                kmeans_tolerance,
                centroid_seed,
            } => {
                let spec = CvtSpec {
                    bd_bounds: task.bd_bounds.clone(),
                    num_centroids: *num_centroids,
                    kmeans_samples: *kmeans_samples,
                    kmeans_max_iters: *kmeans_max_iters,
                    kmeans_tolerance: *kmeans_tolerance,
                    centroid_seed: *centroid_seed,
                };
                Ok(Container::Cvt(spec.build()?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSettings {
    pub algorithm: Algorithm,
    pub batch_size: usize,
    pub init_batches: usize,
    pub mutation_sigma: f64,
    pub eval_budget: u64,
    pub init_range: [f64; 2],
}

impl AlgorithmSettings {
    pub fn algo_config(&self, seed: u64) -> AlgoConfig {
        AlgoConfig {
            algorithm: self.algorithm,
            batch_size: self.batch_size,
            init_batches: self.init_batches,
            mutation_sigma: self.mutation_sigma,
            eval_budget: self.eval_budget,
            seed,
            init_range: self.init_range,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectedSettings {
    pub num_reevals: usize,
    /// Base seed; replication r reevaluates with hash(reeval_seed, r).
    pub reeval_seed: u64,
    /// 0 means a single corrected checkpoint at the end of the run.
    pub checkpoint_every_batches: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSettings {
    pub color_low: String,
    pub color_high: String,
}

/// Fully resolved configuration: every field concrete, serializable, and
/// sufficient to reproduce the experiment byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskSpec,
    pub archive: ArchiveConfig,
    pub algorithm: AlgorithmSettings,
    pub corrected: CorrectedSettings,
    pub replications: usize,
    pub output_dir: PathBuf,
    pub global_seed: u64,
    pub parallel: bool,
    pub plot: PlotSettings,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        self.algorithm.algo_config(0).validate()?;
        if self.replications == 0 {
            return Err(Error::config("replications must be at least 1"));
        }
        if self.corrected.num_reevals == 0 {
            return Err(Error::config("corrected metrics need at least one reevaluation"));
        }
        parse_hex_color(&self.plot.color_low)?;
        parse_hex_color(&self.plot.color_high)?;
        match (&self.archive, self.algorithm.algorithm) {
            (ArchiveConfig::Cvt { .. }, Algorithm::MapElites) => Err(Error::config(
                "map-elites uses a grid archive; set archive.kind = \"grid\" or pick cvt-map-elites",
            )),
            (ArchiveConfig::Grid { .. }, Algorithm::CvtMapElites) => Err(Error::config(
                "cvt-map-elites uses a CVT archive; set archive.kind = \"cvt\" or pick map-elites",
            )),
            (ArchiveConfig::Grid { subdivisions }, _) => {
                GridSpec::new(self.task.bd_bounds.clone(), subdivisions.clone())?;
                Ok(())
            }
            (
                ArchiveConfig::Cvt {
                    num_centroids,
                    kmeans_samples,
                    kmeans_max_iters,
                    kmeans_tolerance,
                    centroid_seed,
                },
                _,
            ) => CvtSpec {
                bd_bounds: self.task.bd_bounds.clone(),
                num_centroids: *num_centroids,
                kmeans_samples: *kmeans_samples,
                kmeans_max_iters: *kmeans_max_iters,
                kmeans_tolerance: *kmeans_tolerance,
                centroid_seed: *centroid_seed,
            }
            .validate(),
        }
    }
}

/// Parse "#rrggbb" into RGB components.
pub fn parse_hex_color(s: &str) -> Result<[u8; 3]> {
    let body = s
        .strip_prefix('#')
        .ok_or_else(|| Error::config(format!("color '{s}' must look like #rrggbb")))?;
    if body.len() != 6 || !body.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(Error::config(format!("color '{s}' must look like #rrggbb")));
    }
    let channel = |i: usize| u8::from_str_radix(&body[2 * i..2 * i + 2], 16).unwrap();
    Ok([channel(0), channel(1), channel(2)])
}

/// Apply defaults and overrides to a parsed config file.
pub fn resolve(file: &FileConfig, ov: &Overrides) -> Result<ExperimentConfig> {
    let preset_name = ov.task.as_deref().unwrap_or(&file.task.preset);
    let mut task = preset(preset_name)?;
    if let Some(noise) = file.task.noise_scale {
        task.noise_scale = noise;
    }
    if let Some(len) = file.task.episode_length {
        task.episode_length = len;
    }
    if let Some(params) = file.task.params {
        task.task_params = params;
    }
    task.validate()?;

    let global_seed = ov
        .seed
        .or(file.experiment.global_seed)
        .unwrap_or(DEFAULT_GLOBAL_SEED);

    let name = ov
        .algo
        .as_deref()
        .or(file.algorithm.name.as_deref())
        .unwrap_or("map-elites");
    let algorithm = Algorithm::from_slug(name)?;
    let init_range = file.algorithm.init_range.unwrap_or([-1.0, 1.0]);
    let algorithm = AlgorithmSettings {
        algorithm,
        batch_size: file.algorithm.batch_size.unwrap_or(256),
        init_batches: file.algorithm.init_batches.unwrap_or(4),
        mutation_sigma: file
            .algorithm
            .mutation_sigma
            .unwrap_or_else(|| default_mutation_sigma(init_range)),
        eval_budget: ov.budget.or(file.algorithm.eval_budget).unwrap_or(50_000),
        init_range,
    };

    let default_archive = || match algorithm.algorithm {
        Algorithm::CvtMapElites => ArchiveSection::Cvt {
            num_centroids: None,
            kmeans_samples: None,
            kmeans_max_iters: None,
            kmeans_tolerance: None,
            centroid_seed: None,
        },
        _ => ArchiveSection::Grid { subdivisions: None },
    };
    let archive = match file.archive.clone().unwrap_or_else(default_archive) {
        ArchiveSection::Grid { subdivisions } => ArchiveConfig::Grid {
            subdivisions: subdivisions.unwrap_or_else(|| task.default_subdivisions()),
        },
        ArchiveSection::Cvt {
            num_centroids,
            kmeans_samples,
            kmeans_max_iters,
            kmeans_tolerance,
            centroid_seed,
        } => {
            let k = num_centroids.unwrap_or(DEFAULT_NUM_CENTROIDS);
            let defaults = CvtSpec::new(task.bd_bounds.clone(), k, 0);
            ArchiveConfig::Cvt {
                num_centroids: k,
                kmeans_samples: kmeans_samples.unwrap_or(defaults.kmeans_samples),
                kmeans_max_iters: kmeans_max_iters.unwrap_or(defaults.kmeans_max_iters),
                kmeans_tolerance: kmeans_tolerance.unwrap_or(defaults.kmeans_tolerance),
                centroid_seed: centroid_seed
                    .unwrap_or_else(|| derive_seed2(global_seed, CENTROID_SEED_TAG, 0)),
            }
        }
    };

    let corrected = CorrectedSettings {
        num_reevals: ov.reevals.or(file.corrected.num_reevals).unwrap_or(50),
        reeval_seed: file
            .corrected
            .reeval_seed
            .unwrap_or_else(|| derive_seed2(global_seed, REEVAL_SEED_TAG, 0)),
        checkpoint_every_batches: file.corrected.checkpoint_every_batches.unwrap_or(0),
    };

    let cfg = ExperimentConfig {
        task,
        archive,
        algorithm,
        corrected,
        replications: ov
            .replications
            .or(file.experiment.replications)
            .unwrap_or(10),
        output_dir: ov
            .out
            .clone()
            .or_else(|| file.experiment.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        global_seed,
        parallel: file.experiment.parallel.unwrap_or(true),
        plot: PlotSettings {
            color_low: file
                .plot
                .color_low
                .clone()
                .unwrap_or_else(|| DEFAULT_COLOR_LOW.to_string()),
            color_high: file
                .plot
                .color_high
                .clone()
                .unwrap_or_else(|| DEFAULT_COLOR_HIGH.to_string()),
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Manifest written next to experiment outputs: the resolved config plus
/// the software version that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: ExperimentConfig) -> Self {
        Manifest { version: env!("CARGO_PKG_VERSION").to_string(), config }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Load a config from a `.toml` file (raw form) or a `.json` file (either a
/// manifest or a bare resolved config), then layer CLI overrides on top.
/// Resolved JSON configs accept only scalar overrides; changing the task or
/// algorithm of a pinned config would silently invalidate derived fields.
pub fn load_config(path: &Path, ov: &Overrides) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "toml" => {
            let file: FileConfig = toml::from_str(&text)?;
            resolve(&file, ov)
        }
        "json" => {
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let config_value = match value.get("config") {
                Some(inner) => inner.clone(),
                None => value,
            };
            let mut cfg: ExperimentConfig = serde_json::from_value(config_value)?;
            if !ov.is_empty_except_scalars() {
                return Err(Error::config(
                    "a resolved JSON config pins the task and algorithm; \
                     use a TOML config with --task/--algo",
                ));
            }
            if let Some(seed) = ov.seed {
                cfg.global_seed = seed;
            }
            if let Some(budget) = ov.budget {
                cfg.algorithm.eval_budget = budget;
            }
            if let Some(reps) = ov.replications {
                cfg.replications = reps;
            }
            if let Some(out) = &ov.out {
                cfg.output_dir = out.clone();
            }
            if let Some(reevals) = ov.reevals {
                cfg.corrected.num_reevals = reevals;
            }
            cfg.validate()?;
            Ok(cfg)
        }
        other => Err(Error::config(format!(
            "config file must end in .toml or .json, got '{other}'"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL_TOML: &str = r##"
[task]
preset = "pointmass-omni"
noise_scale = 0.2
episode_length = 80

[archive]
kind = "grid"
subdivisions = [50, 50]

[algorithm]
name = "map-elites"
batch_size = 128
init_batches = 3
mutation_sigma = 0.05
eval_budget = 20000
init_range = [-2.0, 2.0]

[corrected]
num_reevals = 25
reeval_seed = 9001
checkpoint_every_batches = 10

[experiment]
replications = 4
output_dir = "results"
global_seed = 7
parallel = false

[plot]
color_low = "#000000"
color_high = "#ffffff"
"##;

    #[test]
    fn full_file_resolves_with_no_surprises() {
        let file: FileConfig = toml::from_str(FULL_TOML).unwrap();
        let cfg = resolve(&file, &Overrides::default()).unwrap();
        assert_eq!(cfg.task.name, "pointmass-omni");
        assert_eq!(cfg.task.noise_scale, 0.2);
        assert_eq!(cfg.task.episode_length, 80);
        assert_eq!(cfg.archive, ArchiveConfig::Grid { subdivisions: vec![50, 50] });
        assert_eq!(cfg.algorithm.batch_size, 128);
        assert_eq!(cfg.algorithm.init_batches, 3);
        assert_eq!(cfg.algorithm.mutation_sigma, 0.05);
        assert_eq!(cfg.algorithm.eval_budget, 20000);
        assert_eq!(cfg.algorithm.init_range, [-2.0, 2.0]);
        assert_eq!(cfg.corrected.num_reevals, 25);
        assert_eq!(cfg.corrected.reeval_seed, 9001);
        assert_eq!(cfg.corrected.checkpoint_every_batches, 10);
        assert_eq!(cfg.replications, 4);
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
        assert_eq!(cfg.global_seed, 7);
        assert!(!cfg.parallel);
        assert_eq!(cfg.plot.color_low, "#000000");
    }

    #[test]
    fn minimal_file_fills_documented_defaults() {
        let file: FileConfig = toml::from_str("[task]\npreset = \"synthetic\"\n").unwrap();
        let cfg = resolve(&file, &Overrides::default()).unwrap();
        assert_eq!(cfg.algorithm.algorithm, Algorithm::MapElites);
        assert_eq!(cfg.algorithm.batch_size, 256);
        assert_eq!(cfg.algorithm.init_batches, 4);
        assert_eq!(cfg.algorithm.eval_budget, 50_000);
        assert_eq!(cfg.algorithm.init_range, [-1.0, 1.0]);
        assert_eq!(cfg.algorithm.mutation_sigma, default_mutation_sigma([-1.0, 1.0]));
        assert_eq!(cfg.corrected.num_reevals, 50);
        assert_eq!(cfg.corrected.checkpoint_every_batches, 0);
        assert_eq!(cfg.replications, 10);
        assert_eq!(cfg.global_seed, DEFAULT_GLOBAL_SEED);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert!(cfg.parallel);
        assert_eq!(
            cfg.archive,
            ArchiveConfig::Grid { subdivisions: vec![20, 20] }
        );
        assert_eq!(cfg.plot.color_low, DEFAULT_COLOR_LOW);
        assert_eq!(cfg.plot.color_high, DEFAULT_COLOR_HIGH);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<FileConfig>("[task]\npreset = \"synthetic\"\ntypo = 3\n");
        assert!(err.is_err());
    }

    #[test]
    fn task_params_are_config_overridable() {
        let file: FileConfig = toml::from_str(
            "[task]\npreset = \"pointmass-omni\"\n[task.params]\naccel_gain = 1.1\ndrag = 4.0\n",
        )
        .unwrap();
        let cfg = resolve(&file, &Overrides::default()).unwrap();
        assert_eq!(cfg.task.task_params.accel_gain, 1.1);
        assert_eq!(cfg.task.task_params.drag, 4.0);
        assert_eq!(cfg.task.task_params.dt, TaskParams::default().dt);

        let typo = toml::from_str::<FileConfig>(
            "[task]\npreset = \"pointmass-omni\"\n[task.params]\naccell_gain = 1.1\n",
        );
        assert!(typo.is_err());
    }

    #[test]
    fn overrides_win_over_file_values() {
        let file: FileConfig = toml::from_str(FULL_TOML).unwrap();
        let ov = Overrides {
            seed: Some(123),
            algo: Some("random-search".into()),
            task: Some("synthetic".into()),
            budget: Some(999),
            replications: Some(2),
            out: Some(PathBuf::from("elsewhere")),
            reevals: Some(5),
        };
        let cfg = resolve(&file, &ov).unwrap();
        assert_eq!(cfg.global_seed, 123);
        assert_eq!(cfg.algorithm.algorithm, Algorithm::RandomSearch);
        assert_eq!(cfg.task.name, "synthetic");
        assert_eq!(cfg.algorithm.eval_budget, 999);
        assert_eq!(cfg.replications, 2);
        assert_eq!(cfg.output_dir, PathBuf::from("elsewhere"));
        assert_eq!(cfg.corrected.num_reevals, 5);
    }

    #[test]
    fn algorithm_and_archive_kind_must_agree() {
        let file: FileConfig = toml::from_str(
            "[task]\npreset = \"synthetic\"\n[algorithm]\nname = \"cvt-map-elites\"\n\
             [archive]\nkind = \"grid\"\n",
        )
        .unwrap();
        let err = resolve(&file, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("cvt"), "{err}");
    }

    #[test]
    fn cvt_algorithm_defaults_to_a_cvt_archive() {
        let file: FileConfig = toml::from_str(
            "[task]\npreset = \"synthetic\"\n[algorithm]\nname = \"cvt-map-elites\"\n",
        )
        .unwrap();
        let cfg = resolve(&file, &Overrides::default()).unwrap();
        match cfg.archive {
            ArchiveConfig::Cvt { num_centroids, kmeans_samples, centroid_seed, .. } => {
                assert_eq!(num_centroids, DEFAULT_NUM_CENTROIDS);
                assert_eq!(kmeans_samples, 50 * DEFAULT_NUM_CENTROIDS);
                assert_eq!(
                    centroid_seed,
                    derive_seed2(DEFAULT_GLOBAL_SEED, CENTROID_SEED_TAG, 0)
                );
            }
            other => panic!("expected CVT archive, got {other:?}"),
        }
    }

    #[test]
    fn grid_subdivision_dimension_is_checked() {
        let file: FileConfig = toml::from_str(
            "[task]\npreset = \"synthetic\"\n[archive]\nkind = \"grid\"\nsubdivisions = [10]\n",
        )
        .unwrap();
        assert!(resolve(&file, &Overrides::default()).is_err());
    }

    #[test]
    fn bad_hex_color_is_rejected() {
        for bad in ["2c7bb6", "#2c7bb", "#2c7bg6", "#2c7bb6ff"] {
            let toml_text =
                format!("[task]\npreset = \"synthetic\"\n[plot]\ncolor_low = \"{bad}\"\n");
            let file: FileConfig = toml::from_str(&toml_text).unwrap();
            assert!(resolve(&file, &Overrides::default()).is_err(), "{bad}");
        }
        assert_eq!(parse_hex_color("#2c7bb6").unwrap(), [0x2c, 0x7b, 0xb6]);
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let file: FileConfig = toml::from_str(FULL_TOML).unwrap();
        let cfg = resolve(&file, &Overrides::default()).unwrap();
        let manifest = Manifest::new(cfg.clone());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        std::fs::write(&path, manifest.to_json_string().unwrap()).unwrap();
        let reloaded = load_config(&path, &Overrides::default()).unwrap();
        assert_eq!(reloaded, cfg);
    }

    #[test]
    fn resolved_json_rejects_task_and_algo_overrides() {
        let file: FileConfig = toml::from_str(FULL_TOML).unwrap();
        let cfg = resolve(&file, &Overrides::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        std::fs::write(
            &path,
            Manifest::new(cfg.clone()).to_json_string().unwrap(),
        )
        .unwrap();

        let scalar = Overrides { seed: Some(5), budget: Some(1000), ..Default::default() };
        let adjusted = load_config(&path, &scalar).unwrap();
        assert_eq!(adjusted.global_seed, 5);
        assert_eq!(adjusted.algorithm.eval_budget, 1000);

        let structural = Overrides { algo: Some("random-search".into()), ..Default::default() };
        assert!(load_config(&path, &structural).is_err());
    }

    #[test]
    fn toml_is_required_for_raw_configs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.yaml");
        std::fs::write(&path, "task: {}").unwrap();
        assert!(load_config(&path, &Overrides::default()).is_err());
    }
}
