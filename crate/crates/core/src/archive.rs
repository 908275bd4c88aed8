//! Elitist archives over tessellated descriptor spaces.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{validate_bd_bounds, Descriptor, FitnessBounds, Individual};

pub const DUMP_SCHEMA_VERSION: u32 = 1;

/// Regular grid tessellation: `subdivisions[d]` equal-width bins per
/// descriptor dimension, cells numbered row-major (last dimension fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bd_bounds: Vec<[f64; 2]>,
    pub subdivisions: Vec<usize>,
}

impl GridSpec {
    pub fn new(bd_bounds: Vec<[f64; 2]>, subdivisions: Vec<usize>) -> Result<Self> {
        let spec = GridSpec { bd_bounds, subdivisions };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        validate_bd_bounds(&self.bd_bounds)?;
        if self.subdivisions.len() != self.bd_bounds.len() {
            return Err(Error::config(format!(
                "grid has {} subdivision entries but {} descriptor dimensions",
                self.subdivisions.len(),
                self.bd_bounds.len()
            )));
        }
        if self.subdivisions.iter().any(|&n| n == 0) {
            return Err(Error::config("grid subdivisions must be positive"));
        }
        self.subdivisions
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::config("grid capacity overflows usize"))?;
        Ok(())
    }

    pub fn capacity(&self) -> usize {
        self.subdivisions.iter().product()
    }

    /// Map a descriptor to its cell. Values on the upper boundary of the last
    /// bin belong to that bin, so the mapping is total over clamped input.
    pub fn cell_index(&self, desc: &Descriptor) -> Result<usize> {
        if desc.dim() != self.bd_bounds.len() {
            return Err(Error::DescriptorDim {
                got: desc.dim(),
                expected: self.bd_bounds.len(),
            });
        }
        let mut index = 0usize;
        for ((v, b), &n) in desc.values.iter().zip(&self.bd_bounds).zip(&self.subdivisions) {
            let t = (v - b[0]) / (b[1] - b[0]);
            let bin = ((t * n as f64).floor() as isize).clamp(0, n as isize - 1) as usize;
            index = index * n + bin;
        }
        Ok(index)
    }
}

/// Centroidal Voronoi tessellation with materialized centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvtContainer {
    pub bd_bounds: Vec<[f64; 2]>,
    pub centroids: Vec<Vec<f64>>,
}

impl CvtContainer {
    pub fn new(bd_bounds: Vec<[f64; 2]>, centroids: Vec<Vec<f64>>) -> Result<Self> {
        let c = CvtContainer { bd_bounds, centroids };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        validate_bd_bounds(&self.bd_bounds)?;
        if self.centroids.is_empty() {
            return Err(Error::config("CVT container has no centroids"));
        }
        let dim = self.bd_bounds.len();
        if let Some(bad) = self.centroids.iter().find(|c| c.len() != dim) {
            return Err(Error::config(format!(
                "centroid has {} components, expected {dim}",
                bad.len()
            )));
        }
        Ok(())
    }

    pub fn capacity(&self) -> usize {
        self.centroids.len()
    }

    /// Nearest centroid by squared Euclidean distance; ties resolve to the
    /// lowest centroid index.
    pub fn cell_index(&self, desc: &Descriptor) -> Result<usize> {
        if desc.dim() != self.bd_bounds.len() {
            return Err(Error::DescriptorDim {
                got: desc.dim(),
                expected: self.bd_bounds.len(),
            });
        }
        let mut best = 0usize;
        let mut best_d2 = f64::INFINITY;
        for (i, c) in self.centroids.iter().enumerate() {
            let d2: f64 = c
                .iter()
                .zip(&desc.values)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 < best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        Ok(best)
    }
}

/// Tessellation of descriptor space into a finite set of cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Container {
    Grid(GridSpec),
    Cvt(CvtContainer),
}

impl Container {
    pub fn validate(&self) -> Result<()> {
        match self {
            Container::Grid(g) => g.validate(),
            Container::Cvt(c) => c.validate(),
        }
    }

    pub fn bd_bounds(&self) -> &[[f64; 2]] {
        match self {
            Container::Grid(g) => &g.bd_bounds,
            Container::Cvt(c) => &c.bd_bounds,
        }
    }

    pub fn bd_dim(&self) -> usize {
        self.bd_bounds().len()
    }

    pub fn capacity(&self) -> usize {
        match self {
            Container::Grid(g) => g.capacity(),
            Container::Cvt(c) => c.capacity(),
        }
    }

    pub fn cell_index(&self, desc: &Descriptor) -> Result<usize> {
        match self {
            Container::Grid(g) => g.cell_index(desc),
            Container::Cvt(c) => c.cell_index(desc),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertKind {
    InsertedNew,
    ReplacedIncumbent,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InsertOutcome {
    pub kind: InsertKind,
    pub cell: usize,
}

/// One-individual-per-cell elitist archive.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    container: Container,
    cells: BTreeMap<usize, Individual>,
}

impl Archive {
    pub fn new(container: Container) -> Result<Self> {
        container.validate()?;
        Ok(Archive { container, cells: BTreeMap::new() })
    }

    pub fn container(&self) -> &Container {
        &self.container
    }

    pub fn capacity(&self) -> usize {
        self.container.capacity()
    }

    pub fn coverage(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, cell: usize) -> Option<&Individual> {
        self.cells.get(&cell)
    }

    /// Occupied cells in ascending cell-index order.
    pub fn cells(&self) -> &BTreeMap<usize, Individual> {
        &self.cells
    }

    /// Occupants in ascending cell-index order.
    pub fn occupants(&self) -> impl Iterator<Item = &Individual> {
        self.cells.values()
    }

    /// Insert under strict-improvement elitism: an empty cell accepts any
    /// candidate, an occupied cell only a strictly fitter one. Equal fitness
    /// keeps the incumbent, so insertion order cannot leak into results.
    pub fn try_insert(&mut self, ind: Individual) -> Result<InsertOutcome> {
        let cell = self.container.cell_index(&ind.descriptor)?;
        use std::collections::btree_map::Entry;
        let kind = match self.cells.entry(cell) {
            Entry::Vacant(e) => {
                e.insert(ind);
                InsertKind::InsertedNew
            }
            Entry::Occupied(mut e) => {
                if ind.fitness > e.get().fitness {
                    e.insert(ind);
                    InsertKind::ReplacedIncumbent
                } else {
                    InsertKind::Rejected
                }
            }
        };
        Ok(InsertOutcome { kind, cell })
    }

    pub fn to_dump(&self, fitness_bounds: FitnessBounds) -> ArchiveDump {
        let cells = self
            .cells
            .iter()
            .map(|(&cell, ind)| CellRecord {
                cell,
                fitness: ind.fitness,
                descriptor: ind.descriptor.values.clone(),
                eval_seed: ind.eval_seed,
                genotype: ind.genotype.params.clone(),
            })
            .collect();
        ArchiveDump {
            schema_version: DUMP_SCHEMA_VERSION,
            fitness_bounds,
            container: self.container.clone(),
            cells,
        }
    }

    pub fn write_json(&self, path: &Path, fitness_bounds: FitnessBounds) -> Result<()> {
        let dump = self.to_dump(fitness_bounds);
        std::fs::write(path, dump.to_json_string()?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<(Archive, FitnessBounds)> {
        let text = std::fs::read_to_string(path)?;
        let dump: ArchiveDump = serde_json::from_str(&text)?;
        dump.into_archive()
    }
}

/// Occupied cell as serialized in an archive dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub cell: usize,
    pub fitness: f64,
    pub descriptor: Vec<f64>,
    pub eval_seed: u64,
    pub genotype: Vec<f64>,
}

/// Self-contained serialized archive: tessellation (with centroids for CVT),
/// fitness bounds, and all occupied cells in ascending cell order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveDump {
    pub schema_version: u32,
    pub fitness_bounds: FitnessBounds,
    pub container: Container,
    pub cells: Vec<CellRecord>,
}

impl ArchiveDump {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn into_archive(self) -> Result<(Archive, FitnessBounds)> {
        if self.schema_version != DUMP_SCHEMA_VERSION {
            return Err(Error::config(format!(
                "archive dump has schema version {}, this build reads {}",
                self.schema_version, DUMP_SCHEMA_VERSION
            )));
        }
        self.fitness_bounds.validate()?;
        let mut archive = Archive::new(self.container)?;
        for rec in self.cells {
            let ind = Individual {
                genotype: crate::types::Genotype::new(rec.genotype),
                fitness: rec.fitness,
                descriptor: Descriptor::new(rec.descriptor),
                eval_seed: rec.eval_seed,
            };
            let computed = archive.container.cell_index(&ind.descriptor)?;
            if computed != rec.cell {
                return Err(Error::config(format!(
                    "dump cell {} disagrees with recomputed cell {computed}",
                    rec.cell
                )));
            }
            if archive.cells.insert(rec.cell, ind).is_some() {
                return Err(Error::config(format!("dump repeats cell {}", rec.cell)));
            }
        }
        Ok((archive, self.fitness_bounds))
    }
}
