//! Core value types shared across the library.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flat parameter vector of a candidate solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genotype {
    pub params: Vec<f64>,
}

impl Genotype {
    pub fn new(params: Vec<f64>) -> Self {
        Genotype { params }
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn validate(&self, expected_dim: usize) -> Result<()> {
        if self.params.len() != expected_dim {
            return Err(Error::GenotypeDim {
                got: self.params.len(),
                expected: expected_dim,
            });
        }
        if let Some(bad) = self.params.iter().find(|v| !v.is_finite()) {
            return Err(Error::config(format!("non-finite genotype entry {bad}")));
        }
        Ok(())
    }
}

/// Point in behavior-descriptor space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Descriptor {
    pub values: Vec<f64>,
}

impl Descriptor {
    pub fn new(values: Vec<f64>) -> Self {
        Descriptor { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Inclusive per-dimension descriptor bounds, `bounds[d] = [low, high]`.
pub type BdBounds = Vec<[f64; 2]>;

/// Clamp each descriptor component into its inclusive `[low, high]` interval.
///
/// Out-of-range descriptors are mapped to the nearest boundary point rather
/// than rejected, so every evaluation lands in some cell.
pub fn clamp_descriptor(desc: &Descriptor, bounds: &[[f64; 2]]) -> Descriptor {
    debug_assert_eq!(desc.dim(), bounds.len());
    let values = desc
        .values
        .iter()
        .zip(bounds)
        .map(|(v, b)| v.clamp(b[0], b[1]))
        .collect();
    Descriptor { values }
}

pub fn validate_bd_bounds(bounds: &[[f64; 2]]) -> Result<()> {
    if bounds.is_empty() {
        return Err(Error::config("descriptor bounds must not be empty"));
    }
    for (d, b) in bounds.iter().enumerate() {
        if !(b[0].is_finite() && b[1].is_finite()) {
            return Err(Error::config(format!(
                "descriptor bounds for dimension {d} must be finite, got [{}, {}]",
                b[0], b[1]
            )));
        }
        if b[0] >= b[1] {
            return Err(Error::config(format!(
                "descriptor bounds for dimension {d} must satisfy low < high, got [{}, {}]",
                b[0], b[1]
            )));
        }
    }
    Ok(())
}

/// Fixed fitness normalization interval for a task.
///
/// QD Score normalizes fitness against this declared interval rather than the
/// archive's own extrema, so scores are comparable across algorithms and
/// across checkpoints of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessBounds {
    pub min: f64,
    pub max: f64,
}

impl FitnessBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        let fb = FitnessBounds { min, max };
        fb.validate()?;
        Ok(fb)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min >= self.max {
            return Err(Error::config(format!(
                "fitness bounds must be finite with min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.min && f <= self.max
    }

    /// Check a raw fitness against the interval, with a hint to widen the
    /// bounds when a task produces values outside it.
    pub fn check(&self, f: f64) -> Result<f64> {
        if !f.is_finite() || !self.contains(f) {
            return Err(Error::FitnessOutOfBounds {
                value: f,
                min: self.min,
                max: self.max,
            });
        }
        Ok(f)
    }
}

/// An evaluated solution as stored in an archive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genotype: Genotype,
    pub fitness: f64,
    pub descriptor: Descriptor,
    /// Seed of the evaluation that produced `fitness` and `descriptor`,
    /// kept so any stored result can be replayed exactly.
    pub eval_seed: u64,
}
