//! Coverage, QD Score, max fitness, and the archive profile.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::archive::Archive;
use crate::error::{Error, Result};
use crate::types::FitnessBounds;

/// Snapshot of the running metrics, one per recorded batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub evaluations: u64,
    pub wall_time_s: f64,
    pub coverage: usize,
    pub qd_score: f64,
    pub max_fitness: f64,
}

/// Sum of normalized fitnesses over the fixed interval `b`.
///
/// Normalizing against declared per-task bounds (rather than the archive's
/// own extrema) keeps scores comparable across algorithms and checkpoints,
/// and is the convention under which the area identity holds. See
/// [`qd_score_archive_relative`] for the self-normalized variant.
pub fn qd_score(a: &Archive, b: FitnessBounds) -> Result<f64> {
    b.validate()?;
    let span = b.span();
    let mut total = 0.0;
    for ind in a.occupants() {
        if !b.contains(ind.fitness) {
            return Err(Error::FitnessOutOfBounds {
                value: ind.fitness,
                min: b.min,
                max: b.max,
            });
        }
        total += (ind.fitness - b.min) / span;
    }
    Ok(total)
}

/// QD Score normalized by the archive's own fitness extrema.
///
/// This matches the literal reading of the score formula but makes values
/// incomparable across archives; it exists for completeness only. An archive
/// whose occupants all share one fitness value scores its coverage (every
/// occupant sits at the archive maximum).
pub fn qd_score_archive_relative(a: &Archive) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let min = a.occupants().map(|i| i.fitness).fold(f64::INFINITY, f64::min);
    let max = a.occupants().map(|i| i.fitness).fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    if span == 0.0 {
        return a.coverage() as f64;
    }
    a.occupants().map(|i| (i.fitness - min) / span).sum()
}

pub fn max_fitness(a: &Archive) -> Result<f64> {
    a.occupants()
        .map(|i| i.fitness)
        .fold(None, |acc: Option<f64>, f| Some(acc.map_or(f, |m| m.max(f))))
        .ok_or(Error::EmptyArchive("max fitness is undefined"))
}

/// Distribution of archive fitnesses as a right-continuous step function:
/// `query(t)` counts occupants with fitness >= t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveProfile {
    /// Ascending distinct fitness values f_1 < ... < f_Nf.
    pub distinct_fitnesses: Vec<f64>,
    /// n(f_i): occupants exactly at f_i.
    pub counts_at: Vec<usize>,
    /// n>=(f_i): occupants at or above f_i.
    pub counts_above: Vec<usize>,
}

impl ArchiveProfile {
    pub fn coverage(&self) -> usize {
        self.counts_above.first().copied().unwrap_or(0)
    }

    /// Number of occupants with fitness >= `threshold`.
    pub fn query(&self, threshold: f64) -> usize {
        let idx = self.distinct_fitnesses.partition_point(|&f| f < threshold);
        if idx == self.distinct_fitnesses.len() {
            0
        } else {
            self.counts_above[idx]
        }
    }

    /// Profile sampled on a uniform threshold grid over the fitness bounds,
    /// for plotting; the distinct-fitness representation stays authoritative.
    pub fn resample(&self, b: FitnessBounds, points: usize) -> Vec<(f64, usize)> {
        assert!(points >= 2, "resampling needs at least both endpoints");
        (0..points)
            .map(|k| {
                let t = b.min + b.span() * k as f64 / (points - 1) as f64;
                (t, self.query(t))
            })
            .collect()
    }
}

pub fn archive_profile(a: &Archive) -> ArchiveProfile {
    let mut fitnesses: Vec<f64> = a.occupants().map(|i| i.fitness).collect();
    fitnesses.sort_by(|x, y| x.partial_cmp(y).expect("archive fitness is never NaN"));

    let mut distinct_fitnesses = Vec::new();
    let mut counts_at = Vec::new();
    for f in fitnesses {
        if distinct_fitnesses.last() == Some(&f) {
            *counts_at.last_mut().unwrap() += 1;
        } else {
            distinct_fitnesses.push(f);
            counts_at.push(1);
        }
    }

    let mut counts_above = counts_at.clone();
    for i in (0..counts_above.len().saturating_sub(1)).rev() {
        counts_above[i] += counts_above[i + 1];
    }
    ArchiveProfile { distinct_fitnesses, counts_at, counts_above }
}

/// Area under the profile's step curve from f_min to f_max:
/// a = N_A (f_1 - f_min) + sum_i (f_{i+1} - f_i) n>=(f_{i+1}),
/// which telescopes to -N_A f_min + sum_j n(f_j) f_j and therefore equals
/// span times the QD Score. Computed from the step geometry here so the
/// identity test exercises two independent routes.
pub fn area_under_profile(p: &ArchiveProfile, b: FitnessBounds) -> f64 {
    if p.distinct_fitnesses.is_empty() {
        return 0.0;
    }
    let mut area = p.coverage() as f64 * (p.distinct_fitnesses[0] - b.min);
    for i in 1..p.distinct_fitnesses.len() {
        area += (p.distinct_fitnesses[i] - p.distinct_fitnesses[i - 1])
            * p.counts_above[i] as f64;
    }
    area
}

/// Snapshot coverage, QD Score and max fitness, stamped with the cumulative
/// evaluation count and elapsed wall time. An empty archive reports
/// `b.min` as its max fitness so logs stay total.
pub fn record_metrics(
    a: &Archive,
    b: FitnessBounds,
    evaluations: u64,
    started: Instant,
) -> Result<MetricsRecord> {
    Ok(MetricsRecord {
        evaluations,
        wall_time_s: started.elapsed().as_secs_f64(),
        coverage: a.coverage(),
        qd_score: qd_score(a, b)?,
        max_fitness: if a.is_empty() { b.min } else { max_fitness(a)? },
    })
}

pub const METRICS_CSV_HEADER: &str = "evaluations,wall_time_s,coverage,qd_score,max_fitness";
pub const PROFILE_CSV_HEADER: &str = "fitness_threshold,count";

/// Thresholds in the exported profile CSV.
pub const PROFILE_EXPORT_POINTS: usize = 512;

pub fn metrics_to_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from(METRICS_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.evaluations, r.wall_time_s, r.coverage, r.qd_score, r.max_fitness
        ));
    }
    out
}

pub fn write_metrics_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    std::fs::write(path, metrics_to_csv(records))?;
    Ok(())
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRecord>> {
    let text = std::fs::read_to_string(path)?;
    let malformed = |line: usize, msg: String| Error::Malformed {
        path: format!("{}:{}", path.display(), line),
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == METRICS_CSV_HEADER => {}
        other => {
            return Err(malformed(
                1,
                format!("expected header '{METRICS_CSV_HEADER}', got {:?}", other.map(|o| o.1)),
            ))
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(malformed(i + 1, format!("expected 5 fields, got {}", fields.len())));
        }
        let parse_err = |what: &str| malformed(i + 1, format!("unparseable {what}"));
        records.push(MetricsRecord {
            evaluations: fields[0].parse().map_err(|_| parse_err("evaluations"))?,
            wall_time_s: fields[1].parse().map_err(|_| parse_err("wall_time_s"))?,
            coverage: fields[2].parse().map_err(|_| parse_err("coverage"))?,
            qd_score: fields[3].parse().map_err(|_| parse_err("qd_score"))?,
            max_fitness: fields[4].parse().map_err(|_| parse_err("max_fitness"))?,
        });
    }
    Ok(records)
}

pub fn profile_to_csv(p: &ArchiveProfile, b: FitnessBounds) -> String {
    let mut out = String::from(PROFILE_CSV_HEADER);
    out.push('\n');
    for (t, count) in p.resample(b, PROFILE_EXPORT_POINTS) {
        out.push_str(&format!("{t},{count}\n"));
    }
    out
}

pub fn write_profile_csv(path: &Path, p: &ArchiveProfile, b: FitnessBounds) -> Result<()> {
    std::fs::write(path, profile_to_csv(p, b))?;
    Ok(())
}

pub fn read_profile_csv(path: &Path) -> Result<Vec<(f64, usize)>> {
    let text = std::fs::read_to_string(path)?;
    let malformed = |line: usize, msg: String| Error::Malformed {
        path: format!("{}:{}", path.display(), line),
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == PROFILE_CSV_HEADER => {}
        other => {
            return Err(malformed(
                1,
                format!("expected header '{PROFILE_CSV_HEADER}', got {:?}", other.map(|o| o.1)),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let (t, count) = line
            .split_once(',')
            .ok_or_else(|| malformed(i + 1, "expected 2 fields".into()))?;
        rows.push((
            t.parse().map_err(|_| malformed(i + 1, "unparseable threshold".into()))?,
            count.parse().map_err(|_| malformed(i + 1, "unparseable count".into()))?,
        ));
    }
    Ok(rows)
}
