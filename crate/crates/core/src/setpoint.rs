//! External setpoint driver: constant, or piecewise-linear segments with
//! random length and rate that may reflect at the bounds.

use serde::{Deserialize, Serialize};

use crate::rng::SimRng;

pub const MAX_SEGMENT_LEN: u32 = 100;
/// Probability that a segment has zero rate.
pub const ZERO_RATE_PROB: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SetpointMode {
    Constant { value: f64 },
    Variable { initial: f64 },
}

impl SetpointMode {
    pub fn initial(&self) -> f64 {
        match *self {
            SetpointMode::Constant { value } => value,
            SetpointMode::Variable { initial } => initial,
        }
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, SetpointMode::Variable { .. })
    }
}

impl Default for SetpointMode {
    fn default() -> Self {
        SetpointMode::Constant { value: 50.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentState {
    pub steps_remaining: u32,
    pub rate: f64,
}

/// Samples a fresh segment. Always consumes four uniforms: length,
/// zero-rate mixture, magnitude, sign.
pub fn sample_segment(rng: &mut SimRng) -> SegmentState {
    let steps_remaining = rng.int_inclusive(1, MAX_SEGMENT_LEN);
    let zero = rng.uniform() < ZERO_RATE_PROB;
    let magnitude = rng.uniform();
    let negative = rng.uniform() < 0.5;
    let rate = if zero {
        0.0
    } else if negative {
        -magnitude
    } else {
        magnitude
    };
    SegmentState {
        steps_remaining,
        rate,
    }
}

/// Moves `p` by the (possibly flipped) rate, clamped to [0, 100].
pub fn move_setpoint(p: f64, rate: f64, flip: bool) -> (f64, f64) {
    let rate = if flip { -rate } else { rate };
    ((p + rate).clamp(0.0, 100.0), rate)
}

/// One driver step. At a bound the rate flips with probability 1/2 (one
/// uniform drawn only there); an exhausted segment is replaced afterwards.
pub fn step_setpoint(p: f64, seg: SegmentState, rng: &mut SimRng) -> (f64, SegmentState) {
    let at_bound = p == 0.0 || p == 100.0;
    let flip = at_bound && rng.uniform() < 0.5;
    let (p_next, rate) = move_setpoint(p, seg.rate, flip);
    let steps_remaining = seg.steps_remaining.saturating_sub(1);
    let seg_next = if steps_remaining == 0 {
        sample_segment(rng)
    } else {
        SegmentState {
            steps_remaining,
            rate,
        }
    };
    (p_next, seg_next)
}
