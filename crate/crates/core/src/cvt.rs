//! Centroid construction for CVT archives via Lloyd's k-means.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::archive::CvtContainer;
use crate::error::{Error, Result};
use crate::types::validate_bd_bounds;

/// Parameters of a CVT tessellation before its centroids are materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvtSpec {
    pub bd_bounds: Vec<[f64; 2]>,
    pub num_centroids: usize,
    pub kmeans_samples: usize,
    pub kmeans_max_iters: usize,
    pub kmeans_tolerance: f64,
    pub centroid_seed: u64,
}

impl CvtSpec {
    /// Spec with default k-means settings: 50 samples per centroid,
    /// at most 100 iterations, displacement tolerance 1e-9.
    pub fn new(bd_bounds: Vec<[f64; 2]>, num_centroids: usize, centroid_seed: u64) -> Self {
        CvtSpec {
            bd_bounds,
            num_centroids,
            kmeans_samples: 50 * num_centroids,
            kmeans_max_iters: 100,
            kmeans_tolerance: 1e-9,
            centroid_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_bd_bounds(&self.bd_bounds)?;
        if self.num_centroids == 0 {
            return Err(Error::config("CVT needs at least one centroid"));
        }
        if self.kmeans_samples < self.num_centroids {
            return Err(Error::config(format!(
                "k-means needs at least as many samples as centroids ({} < {})",
                self.kmeans_samples, self.num_centroids
            )));
        }
        if self.kmeans_max_iters == 0 {
            return Err(Error::config("k-means needs at least one iteration"));
        }
        if !(self.kmeans_tolerance.is_finite() && self.kmeans_tolerance >= 0.0) {
            return Err(Error::config("k-means tolerance must be finite and non-negative"));
        }
        Ok(())
    }

    /// Materialize the tessellation. The sample set, initialization and every
    /// iteration depend only on `centroid_seed`, so the same spec always
    /// yields bitwise-identical centroids.
    pub fn build(&self) -> Result<CvtContainer> {
        let centroids = build_centroids(self)?;
        CvtContainer::new(self.bd_bounds.clone(), centroids)
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0usize;
    let mut best_d2 = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d2 = dist2(point, c);
        if d2 < best_d2 {
            best_d2 = d2;
            best = i;
        }
    }
    best
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    #[cfg(feature = "parallel")]
    {
        points.par_iter().map(|p| nearest(p, centroids)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points.iter().map(|p| nearest(p, centroids)).collect()
    }
}

/// Lloyd's algorithm over a uniform sample of descriptor space.
///
/// Clusters that lose all their points are reseeded to the sample point
/// farthest from its assigned centroid, so the result always has exactly
/// `num_centroids` distinct cells.
pub fn build_centroids(spec: &CvtSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let dim = spec.bd_bounds.len();
    let k = spec.num_centroids;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.centroid_seed);

    let points: Vec<Vec<f64>> = (0..spec.kmeans_samples)
        .map(|_| {
            spec.bd_bounds
                .iter()
                .map(|b| rng.random_range(b[0]..=b[1]))
                .collect()
        })
        .collect();

    let init = rand::seq::index::sample(&mut rng, points.len(), k);
    let mut centroids: Vec<Vec<f64>> = init.iter().map(|i| points[i].clone()).collect();

    for _ in 0..spec.kmeans_max_iters {
        let assignments = assign(&points, &centroids);

        let mut sums = vec![vec![0.0f64; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }

        let mut new_centroids: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&counts)
            .zip(&centroids)
            .map(|((sum, &count), old)| {
                if count > 0 {
                    sum.iter().map(|s| s / count as f64).collect()
                } else {
                    old.clone()
                }
            })
            .collect();

        if counts.iter().any(|&c| c == 0) {
            let dists: Vec<f64> = points
                .iter()
                .zip(&assignments)
                .map(|(p, &a)| dist2(p, &centroids[a]))
                .collect();
            let mut taken = vec![false; points.len()];
            for j in 0..k {
                if counts[j] > 0 {
                    continue;
                }
                let far = dists
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !taken[*i])
                    .max_by(|(i, a), (j, b)| a.partial_cmp(b).unwrap().then(j.cmp(i)))
                    .map(|(i, _)| i)
                    .expect("sample set exhausted while reseeding empty clusters");
                taken[far] = true;
                new_centroids[j] = points[far].clone();
            }
        }

        let displacement = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(a, b)| dist2(a, b).sqrt())
            .fold(0.0f64, f64::max);
        centroids = new_centroids;
        if displacement <= spec.kmeans_tolerance {
            break;
        }
    }

    debug_assert_eq!(centroids.len(), k);
    Ok(centroids)
}
