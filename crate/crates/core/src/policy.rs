//! Small feedforward policies encoded as flat parameter vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Genotype;

/// Fully connected network with tanh on every layer, including the output,
/// so controls are bounded in [-1, 1] per component.
///
/// `layer_sizes[0]` is the observation dimension, the last entry the control
/// dimension. Parameters are laid out layer by layer: the weight matrix in
/// row-major order (one row per output unit), then the biases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub layer_sizes: Vec<usize>,
}

impl PolicySpec {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::config("policy needs at least input and output layers"));
        }
        if layer_sizes.iter().any(|&n| n == 0) {
            return Err(Error::config("policy layer sizes must be positive"));
        }
        Ok(PolicySpec { layer_sizes })
    }

    pub fn obs_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn control_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| (w[0] + 1) * w[1])
            .sum()
    }
}

/// Forward pass. Pure function of (genotype, spec, obs).
pub fn mlp_forward(g: &Genotype, spec: &PolicySpec, obs: &[f64]) -> Result<Vec<f64>> {
    if g.dim() != spec.param_count() {
        return Err(Error::config(format!(
            "policy expects {} parameters, genotype has {}",
            spec.param_count(),
            g.dim()
        )));
    }
    if obs.len() != spec.obs_dim() {
        return Err(Error::config(format!(
            "policy expects {} observations, got {}",
            spec.obs_dim(),
            obs.len()
        )));
    }
    let params = &g.params;
    let mut offset = 0usize;
    let mut activ: Vec<f64> = obs.to_vec();
    for w in spec.layer_sizes.windows(2) {
        let (n_in, n_out) = (w[0], w[1]);
        let weights = &params[offset..offset + n_in * n_out];
        let biases = &params[offset + n_in * n_out..offset + (n_in + 1) * n_out];
        offset += (n_in + 1) * n_out;
        let mut next = Vec::with_capacity(n_out);
        for o in 0..n_out {
            let row = &weights[o * n_in..(o + 1) * n_in];
            let z: f64 = row.iter().zip(&activ).map(|(w, a)| w * a).sum::<f64>() + biases[o];
            next.push(z.tanh());
        }
        activ = next;
    }
    Ok(activ)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_count_matches_dense_layers() {
        let spec = PolicySpec::new(vec![4, 8, 8, 2]).unwrap();
        assert_eq!(spec.param_count(), 130);
        let spec = PolicySpec::new(vec![3, 8, 8, 4]).unwrap();
        assert_eq!(spec.param_count(), (3 + 1) * 8 + (8 + 1) * 8 + (8 + 1) * 4);
    }

    #[test]
    fn zero_genotype_outputs_zero() {
        let spec = PolicySpec::new(vec![4, 8, 8, 2]).unwrap();
        let g = Genotype::new(vec![0.0; 130]);
        let out = mlp_forward(&g, &spec, &[1.0, -2.0, 0.5, 3.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn single_layer_matches_direct_tanh() {
        let spec = PolicySpec::new(vec![1, 1]).unwrap();
        let g = Genotype::new(vec![1.0, 0.0]);
        let out = mlp_forward(&g, &spec, &[0.1]).unwrap();
        assert_eq!(out[0], 0.1f64.tanh());
        assert!((out[0] - 0.1).abs() < 1e-3);
    }

    #[test]
    fn outputs_are_bounded_by_squashing() {
        let spec = PolicySpec::new(vec![2, 4, 2]).unwrap();
        let g = Genotype::new(vec![100.0; spec.param_count()]);
        let out = mlp_forward(&g, &spec, &[5.0, -5.0]).unwrap();
        assert_eq!(out.len(), 2);
        for v in out {
            assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn rejects_parameter_count_mismatch() {
        let spec = PolicySpec::new(vec![4, 8, 8, 2]).unwrap();
        let g = Genotype::new(vec![0.0; 129]);
        assert!(mlp_forward(&g, &spec, &[0.0; 4]).is_err());
        assert!(mlp_forward(&Genotype::new(vec![0.0; 130]), &spec, &[0.0; 3]).is_err());
    }
}
