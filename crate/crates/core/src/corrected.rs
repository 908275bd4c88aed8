//! Corrected metrics: reevaluate every occupant, rebuild the archive from
//! expected fitness/descriptor, and report the induced losses.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::archive::Archive;
use crate::error::{Error, Result};
use crate::metrics::{archive_profile, max_fitness, qd_score, ArchiveProfile};
use crate::rng::derive_seed2;
use crate::tasks::TaskSpec;
use crate::types::{clamp_descriptor, Descriptor, FitnessBounds, Individual};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectedConfig {
    /// Reevaluations per occupant (N).
    pub num_reevals: usize,
    /// Base seed of the reevaluation stream, independent of the run seed.
    pub reeval_seed: u64,
}

impl CorrectedConfig {
    pub fn new(reeval_seed: u64) -> Self {
        CorrectedConfig { num_reevals: 50, reeval_seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_reevals == 0 {
            return Err(Error::config("corrected metrics need at least one reevaluation"));
        }
        Ok(())
    }
}

/// Mean that returns the first element exactly when all elements are equal,
/// and never leaves [min, max] of the inputs. Keeps deterministic-task
/// losses at exactly zero instead of within float tolerance.
fn stable_mean(values: &[f64]) -> f64 {
    let x0 = values[0];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut shift = 0.0;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        shift += v - x0;
    }
    (x0 + shift / values.len() as f64).clamp(lo, hi)
}

/// Expected fitness and descriptor of one occupant, estimated from N fresh
/// evaluations seeded by (reeval_seed, cell, reeval index). The descriptor
/// mean is clamped to the task bounds after averaging. None of this touches
/// any budget counter.
pub fn expected_eval(
    ind: &Individual,
    cell: usize,
    task: &TaskSpec,
    cfg: &CorrectedConfig,
) -> Result<(f64, Descriptor)> {
    cfg.validate()?;
    let n = cfg.num_reevals;
    let mut fitnesses = Vec::with_capacity(n);
    let mut descriptors: Vec<Vec<f64>> = vec![Vec::with_capacity(n); task.bd_dim()];
    for k in 0..n {
        let seed = derive_seed2(cfg.reeval_seed, cell as u64, k as u64);
        let eval = task.evaluate(&ind.genotype, seed)?;
        fitnesses.push(eval.fitness);
        for (column, v) in descriptors.iter_mut().zip(&eval.descriptor.values) {
            column.push(*v);
        }
    }
    let mean_bd = Descriptor::new(descriptors.iter().map(|c| stable_mean(c)).collect());
    Ok((
        stable_mean(&fitnesses),
        clamp_descriptor(&mean_bd, &task.bd_bounds),
    ))
}

/// Rebuild the archive from expected evaluations: every occupant of `a` is
/// reinserted with its (mean fitness, mean descriptor) under the usual
/// addition rules, in ascending original-cell-index order.
pub fn build_corrected_archive(
    a: &Archive,
    task: &TaskSpec,
    cfg: &CorrectedConfig,
    parallel: bool,
) -> Result<Archive> {
    if a.is_empty() {
        return Err(Error::EmptyArchive("nothing to reevaluate"));
    }
    let occupants: Vec<(usize, &Individual)> =
        a.cells().iter().map(|(&cell, ind)| (cell, ind)).collect();
    let expectations = crate::run_indexed(occupants.len(), parallel, |i| {
        let (cell, ind) = occupants[i];
        expected_eval(ind, cell, task, cfg)
    });

    let mut corrected = Archive::new(a.container().clone())?;
    for ((cell, ind), expectation) in occupants.iter().zip(expectations) {
        let (mean_fitness, mean_bd) = expectation?;
        corrected.try_insert(Individual {
            genotype: ind.genotype.clone(),
            fitness: mean_fitness,
            descriptor: mean_bd,
            eval_seed: derive_seed2(cfg.reeval_seed, *cell as u64, 0),
        })?;
    }
    Ok(corrected)
}

/// Relative drops from original to corrected metrics. A loss whose
/// denominator is zero (or, for max fitness, non-positive) is undefined and
/// reported as a missing value, never as infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Losses {
    pub coverage: Option<f64>,
    pub qd_score: Option<f64>,
    pub max_fitness: Option<f64>,
    /// max_fitness(a) - max_fitness(corrected); well-defined on any scale.
    pub max_fitness_diff: f64,
}

pub fn losses(a: &Archive, corrected: &Archive, b: FitnessBounds) -> Result<Losses> {
    if a.is_empty() {
        return Err(Error::EmptyArchive("losses need a populated original archive"));
    }
    let relative = |orig: f64, corr: f64, defined: bool| {
        if defined { Some((orig - corr) / orig) } else { None }
    };

    let cov_a = a.coverage() as f64;
    let cov_c = corrected.coverage() as f64;
    let qd_a = qd_score(a, b)?;
    let qd_c = qd_score(corrected, b)?;
    let max_a = max_fitness(a)?;
    let max_c = max_fitness(corrected)?;

    Ok(Losses {
        coverage: relative(cov_a, cov_c, cov_a > 0.0),
        qd_score: relative(qd_a, qd_c, qd_a != 0.0),
        max_fitness: relative(max_a, max_c, max_a > 0.0),
        max_fitness_diff: max_a - max_c,
    })
}

/// Everything the reevaluation pipeline produces at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedReport {
    pub checkpoint_evaluations: u64,
    pub num_reevals: usize,
    pub reeval_seed: u64,
    pub corrected_coverage: usize,
    pub corrected_qd_score: f64,
    pub corrected_max_fitness: f64,
    pub loss_coverage: Option<f64>,
    pub loss_qd_score: Option<f64>,
    pub loss_max_fitness: Option<f64>,
    pub max_fitness_diff: f64,
    /// File name of the corrected archive dump stored next to this report.
    pub corrected_archive: String,
    pub corrected_profile: ArchiveProfile,
}

/// Run the full corrected pipeline against one archive snapshot.
/// Returns the report plus the corrected archive for dumping.
pub fn corrected_checkpoint(
    a: &Archive,
    task: &TaskSpec,
    cfg: &CorrectedConfig,
    checkpoint_evaluations: u64,
    corrected_archive_ref: &str,
    parallel: bool,
) -> Result<(CorrectedReport, Archive)> {
    let corrected = build_corrected_archive(a, task, cfg, parallel)?;
    let b = task.fitness_bounds;
    let loss = losses(a, &corrected, b)?;
    let report = CorrectedReport {
        checkpoint_evaluations,
        num_reevals: cfg.num_reevals,
        reeval_seed: cfg.reeval_seed,
        corrected_coverage: corrected.coverage(),
        corrected_qd_score: qd_score(&corrected, b)?,
        corrected_max_fitness: max_fitness(&corrected)?,
        loss_coverage: loss.coverage,
        loss_qd_score: loss.qd_score,
        loss_max_fitness: loss.max_fitness,
        max_fitness_diff: loss.max_fitness_diff,
        corrected_archive: corrected_archive_ref.to_string(),
        corrected_profile: archive_profile(&corrected),
    };
    Ok((report, corrected))
}

pub const CORRECTED_CSV_HEADER: &str = "checkpoint_evaluations,corrected_coverage,\
corrected_qd_score,corrected_max_fitness,loss_coverage,loss_qd_score,loss_max_fitness";

fn optional_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn corrected_to_csv(reports: &[CorrectedReport]) -> String {
    let mut out = String::from(CORRECTED_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.checkpoint_evaluations,
            r.corrected_coverage,
            r.corrected_qd_score,
            r.corrected_max_fitness,
            optional_field(r.loss_coverage),
            optional_field(r.loss_qd_score),
            optional_field(r.loss_max_fitness),
        ));
    }
    out
}

pub fn write_corrected_csv(path: &Path, reports: &[CorrectedReport]) -> Result<()> {
    std::fs::write(path, corrected_to_csv(reports))?;
    Ok(())
}

/// Parsed row of a corrected-metrics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedRecord {
    pub checkpoint_evaluations: u64,
    pub corrected_coverage: usize,
    pub corrected_qd_score: f64,
    pub corrected_max_fitness: f64,
    pub loss_coverage: Option<f64>,
    pub loss_qd_score: Option<f64>,
    pub loss_max_fitness: Option<f64>,
}

pub fn read_corrected_csv(path: &Path) -> Result<Vec<CorrectedRecord>> {
    let text = std::fs::read_to_string(path)?;
    let malformed = |line: usize, msg: String| Error::Malformed {
        path: format!("{}:{}", path.display(), line),
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CORRECTED_CSV_HEADER => {}
        other => {
            return Err(malformed(
                1,
                format!("expected header '{CORRECTED_CSV_HEADER}', got {:?}", other.map(|o| o.1)),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(malformed(i + 1, format!("expected 7 fields, got {}", fields.len())));
        }
        let opt = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| malformed(i + 1, format!("unparseable {what}")))
            }
        };
        let req = |s: &str, what: &str| -> Result<f64> {
            s.parse().map_err(|_| malformed(i + 1, format!("unparseable {what}")))
        };
        rows.push(CorrectedRecord {
            checkpoint_evaluations: fields[0]
                .parse()
                .map_err(|_| malformed(i + 1, "unparseable checkpoint".into()))?,
            corrected_coverage: fields[1]
                .parse()
                .map_err(|_| malformed(i + 1, "unparseable coverage".into()))?,
            corrected_qd_score: req(fields[2], "qd_score")?,
            corrected_max_fitness: req(fields[3], "max_fitness")?,
            loss_coverage: opt(fields[4], "loss_coverage")?,
            loss_qd_score: opt(fields[5], "loss_qd_score")?,
            loss_max_fitness: opt(fields[6], "loss_max_fitness")?,
        });
    }
    Ok(rows)
}
