//! Quality-diversity optimization library and benchmark harness.
//!
//! Implements MAP-Elites-style algorithms over grid and CVT archives on
//! stochastic surrogate control tasks, the usual QD metrics (coverage,
//! QD score, max fitness, archive profile), and corrected variants of those
//! metrics obtained by reevaluating every archive occupant.

pub mod algorithms;
pub mod archive;
pub mod config;
pub mod corrected;
pub mod experiment;
pub mod cvt;
pub mod error;
pub mod metrics;
pub mod plots;
pub mod policy;
pub mod rng;
pub mod svg;
pub mod tasks;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    clamp_descriptor, BdBounds, Descriptor, FitnessBounds, Genotype, Individual,
};

/// Apply `f` to `0..n`, preserving index order in the output.
///
/// With the `parallel` feature enabled and `parallel == true` the work is
/// distributed over rayon's thread pool; results are identical either way
/// because every item depends only on its index.
pub(crate) fn run_indexed<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}
