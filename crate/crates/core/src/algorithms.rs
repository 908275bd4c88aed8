//! MAP-Elites, CVT-MAP-Elites, and Random Search under one budget contract.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::archive::{Archive, Container};
use crate::error::{Error, Result};
use crate::metrics::{record_metrics, MetricsRecord};
use crate::rng::{streams, RngStream};
use crate::tasks::{evaluate_batch, TaskSpec};
use crate::types::{Genotype, Individual};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    MapElites,
    CvtMapElites,
    RandomSearch,
}

impl Algorithm {
    pub fn slug(&self) -> &'static str {
        match self {
            Algorithm::MapElites => "map-elites",
            Algorithm::CvtMapElites => "cvt-map-elites",
            Algorithm::RandomSearch => "random-search",
        }
    }

    pub fn from_slug(s: &str) -> Result<Self> {
        match s {
            "map-elites" => Ok(Algorithm::MapElites),
            "cvt-map-elites" => Ok(Algorithm::CvtMapElites),
            "random-search" => Ok(Algorithm::RandomSearch),
            other => Err(Error::config(format!(
                "unknown algorithm '{other}' (map-elites, cvt-map-elites, random-search)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub algorithm: Algorithm,
    pub batch_size: usize,
    pub init_batches: usize,
    pub mutation_sigma: f64,
    pub eval_budget: u64,
    pub seed: u64,
    pub init_range: [f64; 2],
}

impl AlgoConfig {
    /// Defaults: batch 256, 4 init batches, 50k evaluations, init range
    /// [-1, 1] with mutation sigma 0.02 x its width.
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        let init_range = [-1.0, 1.0];
        AlgoConfig {
            algorithm,
            batch_size: 256,
            init_batches: 4,
            mutation_sigma: default_mutation_sigma(init_range),
            eval_budget: 50_000,
            seed,
            init_range,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be positive"));
        }
        if self.init_batches == 0 {
            return Err(Error::config("at least one initialization batch is required"));
        }
        let init_total = (self.init_batches * self.batch_size) as u64;
        if self.eval_budget < init_total {
            return Err(Error::config(format!(
                "evaluation budget {} is smaller than the {} initialization evaluations",
                self.eval_budget, init_total
            )));
        }
        if !(self.mutation_sigma.is_finite() && self.mutation_sigma > 0.0) {
            return Err(Error::config("mutation sigma must be positive"));
        }
        if !(self.init_range[0].is_finite()
            && self.init_range[1].is_finite()
            && self.init_range[0] <= self.init_range[1])
        {
            return Err(Error::config("init range must be finite with lo <= hi"));
        }
        Ok(())
    }
}

pub fn default_mutation_sigma(init_range: [f64; 2]) -> f64 {
    0.02 * (init_range[1] - init_range[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Evaluate batches on the rayon pool when the feature is compiled in.
    /// Results are bitwise identical either way.
    pub parallel: bool,
    /// Clone the archive every K batches for mid-run corrected checkpoints;
    /// 0 records no intermediate snapshots.
    pub snapshot_every_batches: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { parallel: true, snapshot_every_batches: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub archive: Archive,
    pub metrics: Vec<MetricsRecord>,
    /// Training evaluations consumed; always equals the configured budget.
    /// Corrected-metric reevaluations never touch this counter.
    pub evaluations: u64,
    pub wall_time_s: f64,
    /// Mid-run archive snapshots as (cumulative evaluations, archive).
    pub snapshots: Vec<(u64, Archive)>,
}

pub fn random_genotypes(
    n: usize,
    dim: usize,
    init_range: [f64; 2],
    rng: &mut ChaCha8Rng,
) -> Vec<Genotype> {
    (0..n)
        .map(|_| {
            Genotype::new(
                (0..dim)
                    .map(|_| rng.random_range(init_range[0]..=init_range[1]))
                    .collect(),
            )
        })
        .collect()
}

/// Uniform draws with replacement over occupied cells.
pub fn select_uniform(a: &Archive, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Individual>> {
    if a.is_empty() {
        return Err(Error::EmptyArchive(
            "uniform selection needs occupants; seed the archive with random genotypes first",
        ));
    }
    let occupants: Vec<&Individual> = a.occupants().collect();
    Ok((0..n)
        .map(|_| occupants[rng.random_range(0..occupants.len())].clone())
        .collect())
}

/// Isotropic Gaussian perturbation of every component, no clipping.
pub fn mutate_gaussian(g: &Genotype, sigma: f64, rng: &mut ChaCha8Rng) -> Genotype {
    Genotype::new(
        g.params
            .iter()
            .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
}

/// Execute one optimization run.
///
/// All three algorithms share this loop: `init_batches` random batches seed
/// the archive, then MAP-Elites variants select-and-mutate while Random
/// Search keeps drawing fresh random genotypes. The final batch shrinks so
/// the budget is consumed exactly. Metrics are recorded after every batch.
pub fn run(
    cfg: &AlgoConfig,
    task: &TaskSpec,
    container: Container,
    opts: &RunOptions,
) -> Result<RunResult> {
    cfg.validate()?;
    task.validate()?;
    container.validate()?;
    if container.bd_bounds() != task.bd_bounds {
        return Err(Error::config(format!(
            "archive descriptor bounds {:?} differ from task bounds {:?}",
            container.bd_bounds(),
            task.bd_bounds
        )));
    }
    match (cfg.algorithm, &container) {
        (Algorithm::MapElites, Container::Cvt(_)) => {
            return Err(Error::config("map-elites runs on a grid container; use cvt-map-elites"))
        }
        (Algorithm::CvtMapElites, Container::Grid(_)) => {
            return Err(Error::config("cvt-map-elites runs on a CVT container"))
        }
        _ => {}
    }

    let mut archive = Archive::new(container)?;
    let mut init_rng = RngStream::new(cfg.seed, streams::INIT).rng();
    let mut select_rng = RngStream::new(cfg.seed, streams::SELECT).rng();
    let mut mutate_rng = RngStream::new(cfg.seed, streams::MUTATE).rng();

    let init_total = (cfg.init_batches * cfg.batch_size) as u64;
    let started = Instant::now();
    let mut metrics = Vec::new();
    let mut snapshots = Vec::new();
    let mut evaluations: u64 = 0;
    let mut batches = 0usize;

    while evaluations < cfg.eval_budget {
        let n = (cfg.eval_budget - evaluations).min(cfg.batch_size as u64) as usize;
        let genotypes = if evaluations < init_total || cfg.algorithm == Algorithm::RandomSearch {
            random_genotypes(n, task.genotype_dim, cfg.init_range, &mut init_rng)
        } else {
            let parents = select_uniform(&archive, n, &mut select_rng)?;
            parents
                .iter()
                .map(|p| mutate_gaussian(&p.genotype, cfg.mutation_sigma, &mut mutate_rng))
                .collect()
        };

        let individuals = evaluate_batch(task, &genotypes, evaluations, cfg.seed, opts.parallel)?;
        for ind in individuals {
            archive.try_insert(ind)?;
        }
        evaluations += n as u64;
        batches += 1;
        metrics.push(record_metrics(&archive, task.fitness_bounds, evaluations, started)?);

        if opts.snapshot_every_batches > 0
            && batches % opts.snapshot_every_batches == 0
            && evaluations < cfg.eval_budget
        {
            snapshots.push((evaluations, archive.clone()));
        }
    }

    Ok(RunResult {
        evaluations,
        wall_time_s: started.elapsed().as_secs_f64(),
        archive,
        metrics,
        snapshots,
    })
}
