//! Core value types: steerings, actions, observations and the full
//! Markov state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::miscal::MiscalState;
use crate::opcost::OpCostHistory;
use crate::setpoint::SegmentState;

pub const STEERING_MIN: f64 = 0.0;
pub const STEERING_MAX: f64 = 100.0;

/// Proposed steering deltas, each nominally in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub delta_v: f64,
    pub delta_g: f64,
    pub delta_h: f64,
}

impl Action {
    pub const ZERO: Action = Action {
        delta_v: 0.0,
        delta_g: 0.0,
        delta_h: 0.0,
    };

    pub fn new(delta_v: f64, delta_g: f64, delta_h: f64) -> Self {
        Self {
            delta_v,
            delta_g,
            delta_h,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.delta_v, self.delta_g, self.delta_h]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// How out-of-range action components are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionMode {
    #[default]
    Strict,
    Lenient,
}

impl ActionMode {
    /// Strict mode rejects components outside [-1, 1]; lenient mode clamps
    /// them. Non-finite components are rejected in both modes.
    pub fn validate(self, a: Action) -> Result<Action> {
        let names = ["delta_v", "delta_g", "delta_h"];
        let mut out = a.to_array();
        for (x, name) in out.iter_mut().zip(names) {
            if !x.is_finite() {
                return Err(Error::InvalidAction(format!("{name} is not finite ({x})")));
            }
            if !(-1.0..=1.0).contains(x) {
                match self {
                    ActionMode::Strict => {
                        return Err(Error::InvalidAction(format!(
                            "{name} = {x} outside [-1, 1]"
                        )))
                    }
                    ActionMode::Lenient => *x = x.clamp(-1.0, 1.0),
                }
            }
        }
        Ok(Action::from_array(out))
    }
}

/// Step sizes mapping unit action deltas to steering changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFactors {
    pub d_v: f64,
    pub d_g: f64,
    pub d_h: f64,
}

impl ScalingFactors {
    pub fn standard() -> Self {
        Self {
            d_v: 1.0,
            d_g: 10.0,
            d_h: 20.0 * (std::f64::consts::PI * 15.0 / 180.0).sin() / 0.9,
        }
    }
}

impl Default for ScalingFactors {
    fn default() -> Self {
        Self::standard()
    }
}

/// The three agent-controlled variables, each in [0, 100].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Steerings {
    pub velocity: f64,
    pub gain: f64,
    pub shift: f64,
}

impl Default for Steerings {
    fn default() -> Self {
        Self {
            velocity: 50.0,
            gain: 50.0,
            shift: 50.0,
        }
    }
}

impl Steerings {
    pub fn new(velocity: f64, gain: f64, shift: f64) -> Result<Self> {
        for (name, x) in [("velocity", velocity), ("gain", gain), ("shift", shift)] {
            if !(STEERING_MIN..=STEERING_MAX).contains(&x) {
                return Err(Error::Config(format!("{name} = {x} outside [0, 100]")));
            }
        }
        Ok(Self {
            velocity,
            gain,
            shift,
        })
    }
}

fn clip(x: f64) -> f64 {
    STEERING_MAX.min(x).max(STEERING_MIN)
}

/// Adds the scaled deltas to the steerings and clips each to [0, 100].
/// The action is assumed validated.
pub fn apply_action(s: Steerings, a: Action, k: &ScalingFactors) -> Steerings {
    Steerings {
        velocity: clip(s.velocity + k.d_v * a.delta_v),
        gain: clip(s.gain + k.d_g * a.delta_g),
        shift: clip(s.shift + k.d_h * a.delta_h),
    }
}

/// The six observable variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub setpoint: f64,
    pub velocity: f64,
    pub gain: f64,
    pub shift: f64,
    pub consumption: f64,
    pub fatigue: f64,
}

impl Observation {
    pub const FIELDS: [&'static str; 6] = ["p", "v", "g", "h", "c", "f"];

    /// Flat vector in the order (p, v, g, h, c, f).
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.setpoint,
            self.velocity,
            self.gain,
            self.shift,
            self.consumption,
            self.fatigue,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            setpoint: a[0],
            velocity: a[1],
            gain: a[2],
            shift: a[3],
            consumption: a[4],
            fatigue: a[5],
        }
    }

    pub fn steerings(&self) -> Steerings {
        Steerings {
            velocity: self.velocity,
            gain: self.gain,
            shift: self.shift,
        }
    }
}

/// Full latent state. The 20 canonical values are the observables, the
/// nine-step operational-cost history, the three mis-calibration latents
/// and the two fatigue latents; the setpoint segment is extra driver state
/// needed only in variable-setpoint mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovState {
    pub setpoint: f64,
    pub steerings: Steerings,
    pub consumption: f64,
    pub fatigue: f64,
    pub opcost_history: OpCostHistory,
    pub miscal: MiscalState,
    pub mu_v: f64,
    pub mu_g: f64,
    pub segment: Option<SegmentState>,
}

impl MarkovState {
    pub const DIM: usize = 20;

    pub fn observation(&self) -> Observation {
        Observation {
            setpoint: self.setpoint,
            velocity: self.steerings.velocity,
            gain: self.steerings.gain,
            shift: self.steerings.shift,
            consumption: self.consumption,
            fatigue: self.fatigue,
        }
    }

    /// The 20 canonical values: p, v, g, h, c, f, θ_{t-1..t-9}, δ, ψ, φ, μ_v, μ_g.
    pub fn to_vector(&self) -> [f64; Self::DIM] {
        let mut out = [0.0; Self::DIM];
        out[..6].copy_from_slice(&self.observation().to_array());
        out[6..15].copy_from_slice(self.opcost_history.as_slice());
        out[15] = self.miscal.domain as f64;
        out[16] = self.miscal.response as f64;
        out[17] = self.miscal.direction as f64;
        out[18] = self.mu_v;
        out[19] = self.mu_g;
        out
    }
}
