//! The composed environment: reset, step, observation and snapshots.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fatigue::{self, FatigueOutcome};
use crate::miscal::{self, MiscalState};
use crate::opcost::{self, OpCostHistory};
use crate::rng::{Noise, NoiseHook, RngPosition, SimRng};
use crate::setpoint::{self, SetpointMode};
use crate::state::{apply_action, Action, ActionMode, MarkovState, Observation, ScalingFactors, Steerings};

pub const SNAPSHOT_VERSION: &str = "indbench-snapshot/1";

/// Weight of mis-calibration in consumption.
pub const MISCAL_WEIGHT: f64 = 25.0;
/// Weight of fatigue in the reward.
pub const FATIGUE_WEIGHT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardConvention {
    /// r = -c - 3f.
    #[default]
    CostNegative,
    /// r = c + 3f, a cost to be minimized.
    CostPositive,
}

impl RewardConvention {
    pub fn reward(self, consumption: f64, fatigue: f64) -> f64 {
        match self {
            RewardConvention::CostNegative => -consumption - FATIGUE_WEIGHT * fatigue,
            RewardConvention::CostPositive => consumption + FATIGUE_WEIGHT * fatigue,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub setpoint: SetpointMode,
    pub initial: Steerings,
    pub seed: u64,
    pub action_mode: ActionMode,
    pub reward: RewardConvention,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            setpoint: SetpointMode::default(),
            initial: Steerings::default(),
            seed: 0,
            action_mode: ActionMode::Strict,
            reward: RewardConvention::CostNegative,
        }
    }
}

impl EnvConfig {
    pub fn constant(setpoint: f64, seed: u64) -> Self {
        Self {
            setpoint: SetpointMode::Constant { value: setpoint },
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.setpoint.initial();
        if !(0.0..=100.0).contains(&p) {
            return Err(Error::Config(format!("setpoint {p} outside [0, 100]")));
        }
        let s = self.initial;
        Steerings::new(s.velocity, s.gain, s.shift)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: EnvConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Intermediate quantities of one step, for debugging and oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLatents {
    pub opcost: f64,
    pub opcost_convolved: f64,
    pub effective_shift: f64,
    pub penalty: f64,
    pub consumption_clean: f64,
    pub effective_velocity: f64,
    pub effective_gain: f64,
    pub basic_fatigue: f64,
    pub amplification: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub latents: StepLatents,
}

#[derive(Debug, Clone)]
pub struct Environment {
    config: EnvConfig,
    scaling: ScalingFactors,
    state: MarkovState,
    rng: SimRng,
    noise_hook: Option<NoiseHook>,
    steps: u64,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    version: String,
    config: EnvConfig,
    state: MarkovState,
    rng: RngPosition,
    steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise_hook: Option<NoiseHook>,
}

impl Environment {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = SimRng::seed_from(config.seed);
        let state = initial_state(&config, &mut rng);
        Ok(Self {
            config,
            scaling: ScalingFactors::standard(),
            state,
            rng,
            noise_hook: None,
            steps: 0,
        })
    }

    /// Returns to the initial state; `seed` overrides the configured seed.
    pub fn reset(&mut self, seed: Option<u64>) -> Observation {
        if let Some(seed) = seed {
            self.config.seed = seed;
        }
        self.rng = SimRng::seed_from(self.config.seed);
        self.state = initial_state(&self.config, &mut self.rng);
        self.steps = 0;
        self.state.observation()
    }

    /// Replaces stochastic fatigue and consumption draws with deterministic
    /// surrogates. Test hook; not reachable from configuration files.
    #[doc(hidden)]
    pub fn set_noise_hook(&mut self, hook: Option<NoiseHook>) {
        self.noise_hook = hook;
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &MarkovState {
        &self.state
    }

    pub fn observe(&self) -> Observation {
        self.state.observation()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Uniform draws consumed since the last reset.
    pub fn rng_draws(&self) -> u64 {
        self.rng.draws()
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        let action = self.config.action_mode.validate(action)?;
        let st = &mut self.state;

        if let Some(seg) = st.segment {
            let (p, seg) = setpoint::step_setpoint(st.setpoint, seg, &mut self.rng);
            st.setpoint = p;
            st.segment = Some(seg);
        }
        let p = st.setpoint;

        st.steerings = apply_action(st.steerings, action, &self.scaling);
        let Steerings {
            velocity: v,
            gain: g,
            shift: h,
        } = st.steerings;

        let mut noise = match self.noise_hook {
            Some(hook) => Noise::Suppressed(hook),
            None => Noise::Live(&mut self.rng),
        };

        let fat = fatigue::fatigue_step(p, v, g, st.mu_v, st.mu_g, &mut noise);
        st.mu_v = fat.mu_v;
        st.mu_g = fat.mu_g;

        let theta = opcost::current_opcost(p, v, g);
        let theta_c = st.opcost_history.convolve();
        st.opcost_history.push(theta);

        let he = miscal::effective_shift(h, p);
        st.miscal = miscal::step_rotation(st.miscal, he);
        let m = miscal::miscal_penalty(st.miscal.direction, he);

        let c_hat = theta_c + MISCAL_WEIGHT * m;
        let c = c_hat + noise.gaussian(0.0, 1.0 + 0.02 * c_hat);

        st.consumption = c;
        st.fatigue = fat.fatigue;
        self.steps += 1;

        Ok(StepResult {
            observation: st.observation(),
            reward: self.config.reward.reward(c, fat.fatigue),
            latents: latents(theta, theta_c, he, m, c_hat, &fat),
        })
    }

    pub fn serialize_state(&self) -> Vec<u8> {
        let snap = Snapshot {
            version: SNAPSHOT_VERSION.to_string(),
            config: self.config,
            state: self.state.clone(),
            rng: self.rng.position(),
            steps: self.steps,
            noise_hook: self.noise_hook,
        };
        serde_json::to_vec(&snap).expect("snapshot serialization is infallible")
    }

    pub fn deserialize_state(bytes: &[u8]) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| Error::Deserialize(e.to_string()))?;
        match value.get("version").and_then(|v| v.as_str()) {
            Some(SNAPSHOT_VERSION) => {}
            other => {
                return Err(Error::VersionMismatch {
                    expected: SNAPSHOT_VERSION.to_string(),
                    found: other.unwrap_or("<missing>").to_string(),
                })
            }
        }
        let snap: Snapshot =
            serde_json::from_value(value).map_err(|e| Error::Deserialize(e.to_string()))?;
        snap.config.validate()?;
        if !snap.state.miscal.is_valid() {
            return Err(Error::Deserialize(format!(
                "invalid mis-calibration state {:?}",
                snap.state.miscal
            )));
        }
        Ok(Self {
            config: snap.config,
            scaling: ScalingFactors::standard(),
            state: snap.state,
            rng: SimRng::from_position(snap.rng),
            noise_hook: snap.noise_hook,
            steps: snap.steps,
        })
    }
}

fn latents(theta: f64, theta_c: f64, he: f64, m: f64, c_hat: f64, fat: &FatigueOutcome) -> StepLatents {
    StepLatents {
        opcost: theta,
        opcost_convolved: theta_c,
        effective_shift: he,
        penalty: m,
        consumption_clean: c_hat,
        effective_velocity: fat.effective_velocity,
        effective_gain: fat.effective_gain,
        basic_fatigue: fat.basic,
        amplification: fat.alpha,
    }
}

/// Initial Markov state. The operational-cost history is filled with the
/// initial cost (steady state), the fatigue latents start at the effective
/// values, and c/f come from one noise-free evaluation (Gaussian at its
/// mean, fatigue draws at their means) without advancing any latent.
fn initial_state(config: &EnvConfig, rng: &mut SimRng) -> MarkovState {
    let p = config.setpoint.initial();
    let s = config.initial;
    let segment = config
        .setpoint
        .is_variable()
        .then(|| setpoint::sample_segment(rng));

    let theta = opcost::current_opcost(p, s.velocity, s.gain);
    let history = OpCostHistory::filled(theta);
    let miscal = MiscalState::RESET;
    let he = miscal::effective_shift(s.shift, p);
    let consumption = history.convolve() + MISCAL_WEIGHT * miscal::miscal_penalty(miscal.direction, he);

    let mu_v = fatigue::effective_velocity(s.velocity, s.gain, p);
    let mu_g = fatigue::effective_gain(s.gain, p);
    let mut means = Noise::Suppressed(NoiseHook::Means);
    let draws = fatigue::sample_fatigue_noise(mu_v, mu_g, &mut means);
    let alpha = fatigue::amplification(mu_v, mu_g, draws.eta_v, draws.eta_g, &mut means);
    let fatigue = fatigue::fatigue(fatigue::basic_fatigue(s.velocity, s.gain), alpha);

    MarkovState {
        setpoint: p,
        steerings: s,
        consumption,
        fatigue,
        opcost_history: history,
        miscal,
        mu_v,
        mu_g,
        segment,
    }
}
