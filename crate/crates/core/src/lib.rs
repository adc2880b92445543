//! Deterministic, seedable simulator of the industrial benchmark dynamics
//! (operational cost, mis-calibration, fatigue and setpoint drive) with
//! batch-data generation and policy-evaluation tooling for offline RL.

pub mod datagen;
pub mod env;
pub mod error;
pub mod fatigue;
pub mod io;
pub mod miscal;
pub mod opcost;
pub mod rng;
pub mod setpoint;
pub mod state;

pub use datagen::{
    evaluate_policy, generate_batch, regenerate, rollout, transfer_layout, Batch, BatchMetadata,
    BehaviorPolicy, EvalSummary, InitMode, Policy, PolicyFactory, TransitionRecord,
};
pub use env::{EnvConfig, Environment, RewardConvention, StepLatents, StepResult};
pub use error::{Error, Result};
pub use io::{export_batch, import_batch, Format};
pub use miscal::{GoldstoneConstants, MiscalState};
pub use rng::{NoiseHook, SimRng};
pub use setpoint::{SegmentState, SetpointMode};
pub use state::{Action, ActionMode, MarkovState, Observation, ScalingFactors, Steerings};
