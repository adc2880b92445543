//! Behavior policies, batch generation, policy evaluation and
//! transfer-learning batch layouts.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, Environment, StepLatents};
use crate::error::{Error, Result};
use crate::miscal::MiscalState;
use crate::rng::{derive_seed, SimRng};
use crate::state::{Action, Observation, ScalingFactors, Steerings};

pub const BENCHMARK_VERSION: &str = concat!("indbench-", env!("CARGO_PKG_VERSION"));
pub const DEFAULT_HORIZON: usize = 1000;
pub const DEFAULT_EPISODES: usize = 10;
/// Unscored steps after a random initialization.
pub const BURN_IN_STEPS: usize = 100;

/// Maps an observation to an action.
pub trait Policy {
    fn act(&mut self, obs: &Observation) -> Action;
}

impl<F: FnMut(&Observation) -> Action> Policy for F {
    fn act(&mut self, obs: &Observation) -> Action {
        self(obs)
    }
}

/// Builds fresh, seeded policy instances for externally supplied policies.
pub trait PolicyFactory: Send + Sync {
    fn build(&self, seed: u64) -> Box<dyn Policy>;
    fn name(&self) -> String;
}

#[derive(Clone)]
pub enum BehaviorPolicy {
    /// Each action component i.i.d. uniform on [-1, 1].
    RandomUniform,
    /// Holds v and g at 50 and h at the safe-zone center with bounded noise.
    SafeSuboptimal { amplitude: f64, noise_scale: f64 },
    External(Arc<dyn PolicyFactory>),
}

impl fmt::Debug for BehaviorPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl BehaviorPolicy {
    pub const DEFAULT_SAFE: BehaviorPolicy = BehaviorPolicy::SafeSuboptimal {
        amplitude: 1.0,
        noise_scale: 0.1,
    };

    /// Parses `random`, `safe` or `safe:<amplitude>,<noise_scale>`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, params) = match text.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (text, None),
        };
        match (name, params) {
            ("random", None) => Ok(BehaviorPolicy::RandomUniform),
            ("safe", None) => Ok(Self::DEFAULT_SAFE),
            ("safe", Some(p)) => {
                let nums = p
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| Error::Validation(format!("policy parameters {p:?}: {e}")))?;
                match nums[..] {
                    [amplitude, noise_scale]
                        if (0.0..=1.0).contains(&amplitude) && noise_scale >= 0.0 =>
                    {
                        Ok(BehaviorPolicy::SafeSuboptimal {
                            amplitude,
                            noise_scale,
                        })
                    }
                    _ => Err(Error::Validation(format!(
                        "safe policy expects amplitude in [0,1] and noise_scale >= 0, got {p:?}"
                    ))),
                }
            }
            _ => Err(Error::Validation(format!("unknown policy {text:?}"))),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            BehaviorPolicy::RandomUniform => "random".to_string(),
            BehaviorPolicy::SafeSuboptimal {
                amplitude,
                noise_scale,
            } => format!("safe:{amplitude},{noise_scale}"),
            BehaviorPolicy::External(f) => format!("external:{}", f.name()),
        }
    }

    pub fn build(&self, seed: u64) -> Box<dyn Policy> {
        match self {
            BehaviorPolicy::RandomUniform => Box::new(RandomPolicy::new(seed)),
            BehaviorPolicy::SafeSuboptimal {
                amplitude,
                noise_scale,
            } => Box::new(SafePolicy::new(*amplitude, *noise_scale, seed)),
            BehaviorPolicy::External(f) => f.build(seed),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: SimRng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SimRng::seed_from(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _obs: &Observation) -> Action {
        Action::new(
            self.rng.uniform_range(-1.0, 1.0),
            self.rng.uniform_range(-1.0, 1.0),
            self.rng.uniform_range(-1.0, 1.0),
        )
    }
}

/// Proportional hold of v = g = 50 and h at the safe-zone center for the
/// observed setpoint, perturbed by `noise_scale * U(-1, 1)` per component
/// and capped at `amplitude`.
#[derive(Debug, Clone)]
pub struct SafePolicy {
    amplitude: f64,
    noise_scale: f64,
    scaling: ScalingFactors,
    rng: SimRng,
}

impl SafePolicy {
    pub const TARGET_VELOCITY: f64 = 50.0;
    pub const TARGET_GAIN: f64 = 50.0;

    pub fn new(amplitude: f64, noise_scale: f64, seed: u64) -> Self {
        Self {
            amplitude,
            noise_scale,
            scaling: ScalingFactors::standard(),
            rng: SimRng::seed_from(seed),
        }
    }

    /// Shift that puts the effective shift at zero for setpoint `p`.
    pub fn shift_target(p: f64) -> f64 {
        (20.0 * (p / 50.0 + 1.5)).clamp(0.0, 100.0)
    }
}

impl Policy for SafePolicy {
    fn act(&mut self, obs: &Observation) -> Action {
        let targets = [
            (Self::TARGET_VELOCITY - obs.velocity) / self.scaling.d_v,
            (Self::TARGET_GAIN - obs.gain) / self.scaling.d_g,
            (Self::shift_target(obs.setpoint) - obs.shift) / self.scaling.d_h,
        ];
        let cap = self.amplitude.min(1.0);
        let mut out = [0.0; 3];
        for (o, t) in out.iter_mut().zip(targets) {
            let jitter = self.noise_scale * self.rng.uniform_range(-1.0, 1.0);
            *o = (t + jitter).clamp(-cap, cap);
        }
        Action::from_array(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub observation: Observation,
    pub action: Action,
    pub next_observation: Observation,
    /// Reward of the successor state.
    pub reward: f64,
}

impl TransitionRecord {
    pub const COLUMNS: [&'static str; 16] = [
        "p", "v", "g", "h", "c", "f", "dv", "dg", "dh", "p_next", "v_next", "g_next", "h_next",
        "c_next", "f_next", "reward",
    ];

    pub fn to_row(&self) -> [f64; 16] {
        let mut row = [0.0; 16];
        row[..6].copy_from_slice(&self.observation.to_array());
        row[6..9].copy_from_slice(&self.action.to_array());
        row[9..15].copy_from_slice(&self.next_observation.to_array());
        row[15] = self.reward;
        row
    }

    pub fn from_row(row: &[f64; 16]) -> Self {
        let obs = |i: usize| Observation::from_array(row[i..i + 6].try_into().unwrap());
        Self {
            observation: obs(0),
            action: Action::new(row[6], row[7], row[8]),
            next_observation: obs(9),
            reward: row[15],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMetadata {
    pub benchmark_version: String,
    pub seed: u64,
    pub setpoints: Vec<f64>,
    pub steps_per_setpoint: usize,
    pub policy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub metadata: BatchMetadata,
    pub records: Vec<TransitionRecord>,
}

fn check_setpoints(setpoints: &[f64]) -> Result<()> {
    if setpoints.is_empty() {
        return Err(Error::Validation("no setpoints given".into()));
    }
    if let Some(p) = setpoints.iter().find(|p| !(0.0..=100.0).contains(*p)) {
        return Err(Error::Validation(format!("setpoint {p} outside [0, 100]")));
    }
    Ok(())
}

fn env_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, 2 * index as u64)
}

fn policy_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, 2 * index as u64 + 1)
}

/// Rolls `policy` for `steps` steps at each setpoint from the default
/// start (steerings at 50, constant setpoint) and concatenates the
/// transitions in setpoint order.
pub fn generate_batch(
    setpoints: &[f64],
    steps_per_setpoint: usize,
    policy: &BehaviorPolicy,
    seed: u64,
) -> Result<Batch> {
    check_setpoints(setpoints)?;
    if steps_per_setpoint == 0 {
        return Err(Error::Validation("steps per setpoint must be >= 1".into()));
    }
    let mut records = Vec::with_capacity(setpoints.len() * steps_per_setpoint);
    for (i, &p) in setpoints.iter().enumerate() {
        let mut env = Environment::new(EnvConfig::constant(p, env_seed(seed, i)))?;
        let mut pi = policy.build(policy_seed(seed, i));
        let mut obs = env.observe();
        for step in 0..steps_per_setpoint {
            let action = pi.act(&obs);
            let result = env.step(action).map_err(|e| Error::Rollout {
                setpoint: p,
                step,
                source: Box::new(e),
            })?;
            records.push(TransitionRecord {
                observation: obs,
                action,
                next_observation: result.observation,
                reward: result.reward,
            });
            obs = result.observation;
        }
    }
    Ok(Batch {
        metadata: BatchMetadata {
            benchmark_version: BENCHMARK_VERSION.to_string(),
            seed,
            setpoints: setpoints.to_vec(),
            steps_per_setpoint,
            policy: policy.descriptor(),
            role: None,
        },
        records,
    })
}

/// Rebuilds a batch from its metadata alone.
pub fn regenerate(meta: &BatchMetadata) -> Result<Batch> {
    if meta.benchmark_version != BENCHMARK_VERSION {
        return Err(Error::VersionMismatch {
            expected: BENCHMARK_VERSION.to_string(),
            found: meta.benchmark_version.clone(),
        });
    }
    let policy = BehaviorPolicy::parse(&meta.policy)?;
    let mut batch = generate_batch(&meta.setpoints, meta.steps_per_setpoint, &policy, meta.seed)?;
    batch.metadata.role = meta.role.clone();
    Ok(batch)
}

/// A large source batch and a small target batch from independently
/// seeded environments.
pub fn transfer_layout(
    source_setpoint: f64,
    source_size: usize,
    target_setpoint: f64,
    target_size: usize,
    policy: &BehaviorPolicy,
    seed: u64,
) -> Result<(Batch, Batch)> {
    let mut source = generate_batch(&[source_setpoint], source_size, policy, derive_seed(seed, 0))?;
    let mut target = generate_batch(&[target_setpoint], target_size, policy, derive_seed(seed, 1))?;
    source.metadata.role = Some("transfer-source".into());
    target.metadata.role = Some("transfer-target".into());
    Ok((source, target))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Default start settings.
    #[default]
    Start,
    /// Steerings uniform on [0, 100]^3 followed by an unscored burn-in.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetpointSummary {
    pub setpoint: f64,
    /// Mean per-step reward of each episode.
    pub episode_means: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub policy: String,
    pub horizon: usize,
    pub episodes: usize,
    pub init_mode: InitMode,
    pub per_setpoint: Vec<SetpointSummary>,
    pub mean: f64,
    pub std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Scores `policy` by the mean per-step reward over `horizon` steps,
/// per episode; statistics are taken across episodes.
pub fn evaluate_policy(
    policy: &BehaviorPolicy,
    setpoints: &[f64],
    horizon: usize,
    episodes: usize,
    seed: u64,
    init_mode: InitMode,
) -> Result<EvalSummary> {
    check_setpoints(setpoints)?;
    if horizon == 0 {
        return Err(Error::Validation("horizon must be >= 1".into()));
    }
    if episodes == 0 {
        return Err(Error::Validation("episodes must be >= 1".into()));
    }
    let mut per_setpoint = Vec::with_capacity(setpoints.len());
    let mut all = Vec::with_capacity(setpoints.len() * episodes);
    for (i, &p) in setpoints.iter().enumerate() {
        let sp_seed = derive_seed(seed, i as u64);
        let mut episode_means = Vec::with_capacity(episodes);
        for e in 0..episodes {
            let base = 3 * e as u64;
            let mut cfg = EnvConfig::constant(p, derive_seed(sp_seed, base));
            let mut pi = policy.build(derive_seed(sp_seed, base + 1));
            let burn_in = match init_mode {
                InitMode::Start => 0,
                InitMode::Random => {
                    let mut init = SimRng::seed_from(derive_seed(sp_seed, base + 2));
                    cfg.initial = Steerings {
                        velocity: init.uniform_range(0.0, 100.0),
                        gain: init.uniform_range(0.0, 100.0),
                        shift: init.uniform_range(0.0, 100.0),
                    };
                    BURN_IN_STEPS
                }
            };
            let mut env = Environment::new(cfg)?;
            let mut obs = env.observe();
            let mut total = 0.0;
            for step in 0..burn_in + horizon {
                let r = env.step(pi.act(&obs)).map_err(|e| Error::Rollout {
                    setpoint: p,
                    step,
                    source: Box::new(e),
                })?;
                if step >= burn_in {
                    total += r.reward;
                }
                obs = r.observation;
            }
            episode_means.push(total / horizon as f64);
        }
        let (mean, std) = mean_std(&episode_means);
        all.extend_from_slice(&episode_means);
        per_setpoint.push(SetpointSummary {
            setpoint: p,
            episode_means,
            mean,
            std,
        });
    }
    let (mean, std) = mean_std(&all);
    Ok(EvalSummary {
        policy: policy.descriptor(),
        horizon,
        episodes,
        init_mode,
        per_setpoint,
        mean,
        std,
    })
}

/// One row of a rolled-out trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: u64,
    pub action: Action,
    pub observation: Observation,
    pub reward: f64,
    pub latents: StepLatents,
    pub miscal: MiscalState,
    pub mu_v: f64,
    pub mu_g: f64,
}

/// Rolls a single environment for `steps` steps; the policy is seeded
/// from the environment seed.
pub fn rollout(config: EnvConfig, policy: &BehaviorPolicy, steps: usize) -> Result<Vec<TrajectoryRow>> {
    let mut env = Environment::new(config)?;
    let mut pi = policy.build(derive_seed(config.seed, 1));
    let mut obs = env.observe();
    let mut rows = Vec::with_capacity(steps);
    for step in 0..steps {
        let action = pi.act(&obs);
        let r = env.step(action).map_err(|e| Error::Rollout {
            setpoint: obs.setpoint,
            step,
            source: Box::new(e),
        })?;
        let st = env.state();
        rows.push(TrajectoryRow {
            t: env.steps(),
            action,
            observation: r.observation,
            reward: r.reward,
            latents: r.latents,
            miscal: st.miscal,
            mu_v: st.mu_v,
            mu_g: st.mu_g,
        });
        obs = r.observation;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miscal::{effective_shift, safe_zone};

    #[test]
    fn policy_parse_roundtrip() {
        for text in ["random", "safe:0.5,0.2"] {
            assert_eq!(BehaviorPolicy::parse(text).unwrap().descriptor(), text);
        }
        assert_eq!(BehaviorPolicy::parse("safe").unwrap().descriptor(), "safe:1,0.1");
        assert!(BehaviorPolicy::parse("greedy").is_err());
        assert!(BehaviorPolicy::parse("safe:2,0.1").is_err());
        assert!(BehaviorPolicy::parse("safe:x").is_err());
    }

    #[test]
    fn random_policy_in_box() {
        let mut pi = RandomPolicy::new(4);
        let obs = Observation::from_array([50.0; 6]);
        for _ in 0..10_000 {
            let a = pi.act(&obs).to_array();
            assert!(a.iter().all(|x| (-1.0..1.0).contains(x)));
        }
    }

    #[test]
    fn safe_policy_stays_in_safe_zone() {
        let batch = generate_batch(&[10.0, 60.0, 100.0], 300, &BehaviorPolicy::DEFAULT_SAFE, 1).unwrap();
        for r in batch.records.chunks(300).flat_map(|c| &c[50..]) {
            let o = r.next_observation;
            let he = effective_shift(o.shift, o.setpoint);
            assert!(he.abs() <= safe_zone(), "h_e {he} obs {o:?}");
            assert!((o.velocity - 50.0).abs() <= 1.0);
        }
    }

    #[test]
    fn single_step_batch_matches_manual_step() {
        let batch = generate_batch(&[40.0], 1, &BehaviorPolicy::RandomUniform, 17).unwrap();
        assert_eq!(batch.records.len(), 1);
        let rec = batch.records[0];
        let mut env = Environment::new(EnvConfig::constant(40.0, env_seed(17, 0))).unwrap();
        let expected_action = RandomPolicy::new(policy_seed(17, 0)).act(&env.observe());
        assert_eq!(rec.action, expected_action);
        assert_eq!(rec.observation, env.observe());
        let r = env.step(expected_action).unwrap();
        assert_eq!(rec.next_observation, r.observation);
        assert_eq!(rec.reward, r.reward);
    }

    #[test]
    fn validation_errors() {
        let pi = BehaviorPolicy::RandomUniform;
        assert!(generate_batch(&[], 10, &pi, 0).is_err());
        assert!(generate_batch(&[101.0], 10, &pi, 0).is_err());
        assert!(generate_batch(&[50.0], 0, &pi, 0).is_err());
        assert!(evaluate_policy(&pi, &[50.0], 10, 0, 0, InitMode::Start).is_err());
        assert!(evaluate_policy(&pi, &[50.0], 0, 1, 0, InitMode::Start).is_err());
    }

    struct Bad;
    impl PolicyFactory for Bad {
        fn build(&self, _seed: u64) -> Box<dyn Policy> {
            let mut n = 0;
            Box::new(move |_: &Observation| {
                n += 1;
                if n > 3 {
                    Action::new(3.0, 0.0, 0.0)
                } else {
                    Action::ZERO
                }
            })
        }
        fn name(&self) -> String {
            "bad".into()
        }
    }

    #[test]
    fn invalid_policy_action_aborts_with_context() {
        let err = generate_batch(&[20.0, 30.0], 10, &BehaviorPolicy::External(Arc::new(Bad)), 0)
            .unwrap_err();
        match err {
            Error::Rollout { setpoint, step, .. } => {
                assert_eq!(setpoint, 20.0);
                assert_eq!(step, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        let meta = BatchMetadata {
            benchmark_version: BENCHMARK_VERSION.into(),
            seed: 0,
            setpoints: vec![50.0],
            steps_per_setpoint: 1,
            policy: "external:bad".into(),
            role: None,
        };
        assert!(regenerate(&meta).is_err());
    }

    #[test]
    fn transfer_layout_shapes() {
        let pi = BehaviorPolicy::RandomUniform;
        let (src, tgt) = transfer_layout(50.0, 300, 75.0, 20, &pi, 3).unwrap();
        assert_eq!(src.records.len(), 300);
        assert_eq!(tgt.records.len(), 20);
        assert!(src.records.iter().all(|r| r.observation.setpoint == 50.0));
        assert!(tgt.records.iter().all(|r| r.observation.setpoint == 75.0));
        assert_eq!(src.metadata.setpoints, vec![50.0]);
        assert_eq!(tgt.metadata.steps_per_setpoint, 20);
        assert_eq!(tgt.metadata.role.as_deref(), Some("transfer-target"));
        let (a, b) = transfer_layout(60.0, 5, 60.0, 5, &pi, 3).unwrap();
        assert_ne!(a.records, b.records);
        assert_eq!(regenerate(&b.metadata).unwrap(), b);
    }

    #[test]
    fn evaluation_is_deterministic_and_random_init_differs() {
        let pi = BehaviorPolicy::RandomUniform;
        let a = evaluate_policy(&pi, &[30.0, 70.0], 50, 3, 9, InitMode::Start).unwrap();
        let b = evaluate_policy(&pi, &[30.0, 70.0], 50, 3, 9, InitMode::Start).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_setpoint.len(), 2);
        assert_eq!(a.per_setpoint[0].episode_means.len(), 3);
        let c = evaluate_policy(&pi, &[30.0, 70.0], 50, 3, 9, InitMode::Random).unwrap();
        assert_ne!(a.mean, c.mean);
    }
}
