//! Stochastic surrogate evaluation tasks.
//!
//! Two control tasks mirror the usual uni-directional and omni-directional
//! benchmark structure on closed-form dynamics cheap enough for desk-scale
//! experiments, and a third analytic task exists purely for unit testing the
//! metric pipeline. Every task is a pure function of (genotype, seed), with
//! `noise_scale = 0` selecting the deterministic variant.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::archive::GridSpec;
use crate::error::{Error, Result};
use crate::policy::{mlp_forward, PolicySpec};
use crate::rng::eval_seed;
use crate::types::{
    clamp_descriptor, validate_bd_bounds, Descriptor, FitnessBounds, Genotype, Individual,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    PointmassOmni,
    SurrogateUni,
    Synthetic,
}

/// Tunable constants of the surrogate dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskParams {
    /// Constant per-step survival bonus.
    pub survival_reward: f64,
    /// Weight on the squared control norm subtracted each step.
    pub torque_cost: f64,
    /// Uni: forward velocity per unit of mean positive control.
    pub forward_gain: f64,
    /// Omni: acceleration per unit control.
    pub accel_gain: f64,
    /// Omni: velocity damping coefficient.
    pub drag: f64,
    /// Omni: integrator timestep.
    pub dt: f64,
    /// Uni: period (in steps) of the oscillator fed to the policy.
    pub phase_period: f64,
}

impl Default for TaskParams {
    fn default() -> Self {
        TaskParams {
            survival_reward: 1.0,
            torque_cost: 0.1,
            forward_gain: 1.0,
            accel_gain: 2.8,
            drag: 2.0,
            dt: 0.05,
            phase_period: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub kind: TaskKind,
    pub genotype_dim: usize,
    pub bd_bounds: Vec<[f64; 2]>,
    pub fitness_bounds: FitnessBounds,
    pub episode_length: usize,
    pub noise_scale: f64,
    pub policy: Option<PolicySpec>,
    pub task_params: TaskParams,
}

/// Per-timestep reward decomposition. `torque` is stored as a nonnegative
/// magnitude and enters the fitness with a minus sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardTerms {
    pub forward: f64,
    pub survive: f64,
    pub torque: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    /// T+1 state vectors, including the initial state.
    pub states: Vec<Vec<f64>>,
    /// T control vectors.
    pub controls: Vec<Vec<f64>>,
    pub reward_terms: Vec<RewardTerms>,
    /// Uni tasks: per-timestep foot contacts.
    pub contacts: Option<Vec<Vec<bool>>>,
    /// Omni tasks: unclamped final position.
    pub final_position: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    pub descriptor: Descriptor,
    pub trace: Option<EpisodeTrace>,
}

impl TaskSpec {
    pub fn bd_dim(&self) -> usize {
        self.bd_bounds.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::config("task name must not be empty"));
        }
        if self.genotype_dim == 0 {
            return Err(Error::config("genotype dimension must be positive"));
        }
        validate_bd_bounds(&self.bd_bounds)?;
        self.fitness_bounds.validate()?;
        if self.episode_length == 0 {
            return Err(Error::config("episode length must be at least 1"));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(Error::config("noise scale must be finite and non-negative"));
        }
        match self.kind {
            TaskKind::PointmassOmni | TaskKind::SurrogateUni => {
                let policy = self.policy.as_ref().ok_or_else(|| {
                    Error::config(format!("task '{}' needs a policy network", self.name))
                })?;
                if policy.param_count() != self.genotype_dim {
                    return Err(Error::config(format!(
                        "policy has {} parameters but genotype_dim is {}",
                        policy.param_count(),
                        self.genotype_dim
                    )));
                }
                if self.kind == TaskKind::PointmassOmni {
                    if self.bd_dim() != 2 {
                        return Err(Error::config("omni descriptor space must be 2-D"));
                    }
                    if policy.obs_dim() != 4 || policy.control_dim() != 2 {
                        return Err(Error::config(
                            "omni policy must map 4 observations to 2 controls",
                        ));
                    }
                } else {
                    if policy.obs_dim() != 3 {
                        return Err(Error::config("uni policy observes 3 inputs"));
                    }
                    if policy.control_dim() != self.bd_dim() {
                        return Err(Error::config(format!(
                            "uni task with {} feet needs {} control channels, policy has {}",
                            self.bd_dim(),
                            self.bd_dim(),
                            policy.control_dim()
                        )));
                    }
                }
            }
            TaskKind::Synthetic => {
                if self.policy.is_some() {
                    return Err(Error::config("synthetic task takes no policy"));
                }
                if self.genotype_dim < self.bd_dim() {
                    return Err(Error::config(
                        "synthetic task needs genotype_dim >= descriptor dimension",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Evaluate one genotype under one seed.
    pub fn evaluate(&self, g: &Genotype, seed: u64) -> Result<Evaluation> {
        g.validate(self.genotype_dim)?;
        match self.kind {
            TaskKind::PointmassOmni => evaluate_omni(g, self, seed),
            TaskKind::SurrogateUni => evaluate_uni(g, self, seed),
            TaskKind::Synthetic => evaluate_synthetic(g, self, seed),
        }
    }

    /// Default tessellation resolution for this task's descriptor space.
    pub fn default_subdivisions(&self) -> Vec<usize> {
        match self.kind {
            TaskKind::PointmassOmni => vec![100, 100],
            TaskKind::SurrogateUni => match self.bd_dim() {
                2 => vec![30, 30],
                n => vec![5; n],
            },
            TaskKind::Synthetic => vec![20; self.bd_dim()],
        }
    }

    pub fn default_grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.bd_bounds.clone(), self.default_subdivisions())
    }
}

/// Zero-mean Gaussian draw of the given scale. Skips the generator entirely
/// when the scale is zero so noise-free tasks are seed-independent.
fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        sigma * rng.sample::<f64, _>(StandardNormal)
    } else {
        0.0
    }
}

/// 2-D point mass rewarded for surviving cheaply; the descriptor is where it
/// ends up, so quality and diversity pull in different directions.
fn evaluate_omni(g: &Genotype, spec: &TaskSpec, seed: u64) -> Result<Evaluation> {
    let policy = spec.policy.as_ref().expect("validated omni task has a policy");
    let p = &spec.task_params;
    let t_max = spec.episode_length;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut pos = [gauss(&mut rng, spec.noise_scale), gauss(&mut rng, spec.noise_scale)];
    let mut vel = [0.0f64, 0.0];

    let mut states = Vec::with_capacity(t_max + 1);
    let mut controls = Vec::with_capacity(t_max);
    let mut reward_terms = Vec::with_capacity(t_max);
    states.push(vec![pos[0], pos[1], vel[0], vel[1]]);

    let mut fitness = 0.0;
    for _ in 0..t_max {
        let obs = [pos[0], pos[1], vel[0], vel[1]];
        let u = mlp_forward(g, policy, &obs)?;
        let torque = p.torque_cost * (u[0] * u[0] + u[1] * u[1]);
        for d in 0..2 {
            let accel = p.accel_gain * (u[d] + gauss(&mut rng, spec.noise_scale)) - p.drag * vel[d];
            vel[d] += p.dt * accel;
            pos[d] += p.dt * vel[d];
        }
        fitness += p.survival_reward - torque;
        reward_terms.push(RewardTerms { forward: 0.0, survive: p.survival_reward, torque });
        controls.push(u);
        states.push(vec![pos[0], pos[1], vel[0], vel[1]]);
    }

    let descriptor = clamp_descriptor(&Descriptor::new(vec![pos[0], pos[1]]), &spec.bd_bounds);
    Ok(Evaluation {
        fitness,
        descriptor,
        trace: Some(EpisodeTrace {
            states,
            controls,
            reward_terms,
            contacts: None,
            final_position: Some([pos[0], pos[1]]),
        }),
    })
}

/// 1-D locomotion surrogate: forward speed follows the mean positive control,
/// and the descriptor is each channel's duty cycle (fraction of steps spent
/// "in contact", i.e. with positive control).
fn evaluate_uni(g: &Genotype, spec: &TaskSpec, seed: u64) -> Result<Evaluation> {
    let policy = spec.policy.as_ref().expect("validated uni task has a policy");
    let p = &spec.task_params;
    let feet = spec.bd_dim();
    let t_max = spec.episode_length;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut x = 0.0f64;
    let mut v = 0.0f64;
    let mut contact_sums = vec![0.0f64; feet];

    let mut states = Vec::with_capacity(t_max + 1);
    let mut controls = Vec::with_capacity(t_max);
    let mut reward_terms = Vec::with_capacity(t_max);
    let mut contacts = Vec::with_capacity(t_max);
    states.push(vec![x, v]);

    let mut fitness = 0.0;
    for t in 0..t_max {
        let phase = 2.0 * std::f64::consts::PI * t as f64 / p.phase_period;
        let obs = [phase.sin(), phase.cos(), v];
        let u = mlp_forward(g, policy, &obs)?;

        let step_contacts: Vec<bool> = u.iter().map(|&c| c > 0.0).collect();
        for (sum, &on) in contact_sums.iter_mut().zip(&step_contacts) {
            *sum += if on { 1.0 } else { 0.0 };
        }

        let mean_positive = u.iter().map(|&c| c.max(0.0)).sum::<f64>() / feet as f64;
        v = p.forward_gain * mean_positive + gauss(&mut rng, spec.noise_scale);
        x += v;

        let torque = p.torque_cost * u.iter().map(|&c| c * c).sum::<f64>();
        fitness += v + p.survival_reward - torque;
        reward_terms.push(RewardTerms { forward: v, survive: p.survival_reward, torque });
        contacts.push(step_contacts);
        controls.push(u);
        states.push(vec![x, v]);
    }

    let descriptor = Descriptor::new(
        contact_sums.iter().map(|s| s / t_max as f64).collect(),
    );
    Ok(Evaluation {
        fitness,
        descriptor,
        trace: Some(EpisodeTrace {
            states,
            controls,
            reward_terms,
            contacts: Some(contacts),
            final_position: None,
        }),
    })
}

/// Analytic task for metric unit tests: the genotype is its own descriptor.
fn evaluate_synthetic(g: &Genotype, spec: &TaskSpec, seed: u64) -> Result<Evaluation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = spec.bd_dim();
    let clamped = clamp_descriptor(&Descriptor::new(g.params[..b].to_vec()), &spec.bd_bounds);
    let values = clamped
        .values
        .iter()
        .map(|v| v + gauss(&mut rng, spec.noise_scale))
        .collect();
    let fitness =
        -g.params.iter().map(|v| v * v).sum::<f64>() + gauss(&mut rng, spec.noise_scale);
    Ok(Evaluation {
        fitness,
        descriptor: Descriptor::new(values),
        trace: None,
    })
}

/// Evaluate a batch, assigning evaluation `first_eval_index + i` its
/// counter-derived seed. Descriptors are clamped before storage and fitness
/// is checked against the task's declared bounds.
pub fn evaluate_batch(
    task: &TaskSpec,
    genotypes: &[Genotype],
    first_eval_index: u64,
    run_seed: u64,
    parallel: bool,
) -> Result<Vec<Individual>> {
    let evaluate_one = |i: usize| -> Result<Individual> {
        let seed = eval_seed(run_seed, first_eval_index + i as u64);
        let eval = task.evaluate(&genotypes[i], seed)?;
        task.fitness_bounds.check(eval.fitness)?;
        Ok(Individual {
            genotype: genotypes[i].clone(),
            fitness: eval.fitness,
            descriptor: clamp_descriptor(&eval.descriptor, &task.bd_bounds),
            eval_seed: seed,
        })
    };
    crate::run_indexed(genotypes.len(), parallel, evaluate_one)
        .into_iter()
        .collect()
}

/// Named task presets with their default descriptor spaces.
pub fn preset(name: &str) -> Result<TaskSpec> {
    let spec = match name {
        "pointmass-omni" => TaskSpec {
            name: name.to_string(),
            kind: TaskKind::PointmassOmni,
            genotype_dim: 130,
            bd_bounds: vec![[-5.0, 5.0], [-5.0, 5.0]],
            fitness_bounds: FitnessBounds { min: 0.0, max: 100.0 },
            episode_length: 100,
            noise_scale: 0.05,
            policy: Some(PolicySpec { layer_sizes: vec![4, 8, 8, 2] }),
            task_params: TaskParams::default(),
        },
        "surrogate-uni" | "surrogate-uni-2" | "surrogate-uni-4" | "surrogate-uni-6" => {
            let feet = match name {
                "surrogate-uni-2" => 2,
                "surrogate-uni-6" => 6,
                _ => 4,
            };
            let policy = PolicySpec { layer_sizes: vec![3, 8, 8, feet] };
            TaskSpec {
                name: format!("surrogate-uni-{feet}"),
                kind: TaskKind::SurrogateUni,
                genotype_dim: policy.param_count(),
                bd_bounds: vec![[0.0, 1.0]; feet],
                fitness_bounds: FitnessBounds { min: -50.0, max: 250.0 },
                episode_length: 100,
                noise_scale: 0.05,
                policy: Some(policy),
                task_params: TaskParams::default(),
            }
        }
        "synthetic" => TaskSpec {
            name: name.to_string(),
            kind: TaskKind::Synthetic,
            genotype_dim: 4,
            bd_bounds: vec![[-1.0, 1.0], [-1.0, 1.0]],
            fitness_bounds: FitnessBounds { min: -100.0, max: 5.0 },
            episode_length: 1,
            noise_scale: 0.05,
            policy: None,
            task_params: TaskParams::default(),
        },
        other => {
            return Err(Error::config(format!(
                "unknown task preset '{other}' (available: pointmass-omni, surrogate-uni, \
                 surrogate-uni-2, surrogate-uni-4, surrogate-uni-6, synthetic)"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}
