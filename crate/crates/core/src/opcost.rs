//! Operational cost and its delayed, blurred observation.

use serde::{Deserialize, Serialize};

pub const HISTORY_LEN: usize = 9;

/// Convolution weights over lags 1..=9. Lags 1..=4 carry no weight.
pub const KERNEL: [f64; HISTORY_LEN] = [
    0.0,
    0.0,
    0.0,
    0.0,
    1.0 / 9.0,
    2.0 / 9.0,
    3.0 / 9.0,
    2.0 / 9.0,
    1.0 / 9.0,
];

/// The nine most recent operational costs; index 0 holds θ_{t-1}, index 8
/// holds θ_{t-9}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpCostHistory([f64; HISTORY_LEN]);

impl OpCostHistory {
    pub fn filled(theta: f64) -> Self {
        Self([theta; HISTORY_LEN])
    }

    pub fn from_lags(lags: [f64; HISTORY_LEN]) -> Self {
        Self(lags)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// θ_{t-lag}, for `lag` in 1..=9.
    pub fn lag(&self, lag: usize) -> f64 {
        self.0[lag - 1]
    }

    /// Shifts every entry one step back, dropping θ_{t-9}; `theta` becomes θ_{t-1}.
    pub fn push(&mut self, theta: f64) {
        self.0.copy_within(0..HISTORY_LEN - 1, 1);
        self.0[0] = theta;
    }

    pub fn convolve(&self) -> f64 {
        // Integer weights over lags 5..=9, normalized once.
        let [.., t5, t6, t7, t8, t9] = self.0;
        (t5 + 2.0 * t6 + 3.0 * t7 + 2.0 * t8 + t9) / 9.0
    }
}

pub fn current_opcost(setpoint: f64, velocity: f64, gain: f64) -> f64 {
    ((2.0 * setpoint + 4.0 * velocity + 2.5 * gain) / 100.0).exp()
}
