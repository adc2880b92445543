//! Mis-calibration: the domain/response/direction rotation state machine
//! and the linearly biased Goldstone penalty it is scored against.

use std::f64::consts::PI;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

/// Largest absolute direction index.
pub const MAX_DIRECTION: i32 = 6;

/// Constants of the biased Goldstone potential plus the safe-zone half
/// width, all computed from their closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldstoneConstants {
    pub epsilon: f64,
    pub zeta: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub safe_zone: f64,
}

impl GoldstoneConstants {
    pub fn compute() -> Self {
        let epsilon = (1.0 + 2f64.sqrt()).cbrt() / 3f64.sqrt();
        let zeta = epsilon + 1.0 / (3.0 * epsilon);
        let c = 8.0 * (2.0f64 / 27.0).sqrt();
        let lambda = 2.0 * zeta.powi(2) - zeta.powi(4) + c * zeta;
        Self {
            epsilon,
            zeta,
            lambda,
            alpha: 2.0 / lambda,
            beta: 1.0 / lambda,
            kappa: -c / lambda,
            safe_zone: (PI * 15.0 / 180.0).sin() / 2.0,
        }
    }
}

pub static GOLDSTONE: LazyLock<GoldstoneConstants> = LazyLock::new(GoldstoneConstants::compute);

/// Half width of the safe zone around zero effective shift.
pub fn safe_zone() -> f64 {
    GOLDSTONE.safe_zone
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiscalState {
    /// +1 positive, -1 negative.
    pub domain: i8,
    /// +1 advantageous, -1 disadvantageous.
    pub response: i8,
    /// Rotation index in -6..=6.
    pub direction: i32,
}

impl Default for MiscalState {
    fn default() -> Self {
        Self::RESET
    }
}

impl MiscalState {
    pub const RESET: MiscalState = MiscalState {
        domain: 1,
        response: 1,
        direction: 0,
    };

    pub fn is_valid(&self) -> bool {
        matches!(self.domain, -1 | 1)
            && matches!(self.response, -1 | 1)
            && (-MAX_DIRECTION..=MAX_DIRECTION).contains(&self.direction)
    }
}

pub fn effective_shift(shift: f64, setpoint: f64) -> f64 {
    (shift / 20.0 - setpoint / 50.0 - 1.5).clamp(-1.5, 1.5)
}

fn sign_of(x: f64) -> i32 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// One transition of the rotation state machine for effective shift `he`.
pub fn step_rotation(m: MiscalState, he: f64) -> MiscalState {
    let in_safe_zone = he.abs() <= safe_zone();
    let domain = m.domain as i32;
    let response = m.response as i32;
    let phi = m.direction;

    let domain_hat = if in_safe_zone { domain } else { sign_of(he) };
    let response_hat = if domain != domain_hat { 1 } else { response };

    let delta_phi = if in_safe_zone {
        -phi.signum()
    } else if phi == -MAX_DIRECTION * domain_hat {
        0
    } else {
        response_hat * sign_of(he)
    };
    let phi_hat = phi + delta_phi;

    let (response_hh, phi_next) = if phi_hat.abs() >= MAX_DIRECTION {
        (-1, 12 - (phi_hat + 24).rem_euclid(24))
    } else {
        (response_hat, phi_hat)
    };

    if phi_next == 0 && in_safe_zone {
        MiscalState::RESET
    } else {
        MiscalState {
            domain: domain_hat as i8,
            response: response_hh as i8,
            direction: phi_next,
        }
    }
}

/// Sine of the direction angle.
pub fn direction_sine(direction: i32) -> f64 {
    (PI * direction as f64 / 12.0).sin()
}

/// Radius coordinate of the biased Goldstone potential for direction sine
/// `rho_s` and effective shift `he`. Piecewise: linear up to the optimum
/// radius, then a power-law stretch that maps |he| = 2 onto ω = 2.
pub fn goldstone_omega(rho_s: f64, he: f64) -> f64 {
    let k = &*GOLDSTONE;
    // sgn(0) := +1; with rho_s = 0 the bias term vanishes so the choice is
    // immaterial to the penalty.
    let rho = if rho_s >= 0.0 { 1.0 } else { -1.0 };
    let q = k.kappa * rho_s.abs() / (8.0 * k.beta);

    let r_min = if q < -(1.0f64 / 27.0).sqrt() {
        let u = (-rho * q + (q * q - 1.0 / 27.0).max(0.0).sqrt()).cbrt();
        u + 1.0 / (3.0 * u)
    } else {
        let arg = (-q * 27f64.sqrt()).clamp(-1.0, 1.0);
        rho * (4.0f64 / 3.0).sqrt() * (arg.acos() / 3.0).cos()
    };
    let r_opt = rho * rho_s.abs().max(2.0 * k.safe_zone);

    let (r_min, r_opt) = (r_min.abs(), r_opt.abs());
    if he.abs() <= r_opt {
        he * r_min / r_opt
    } else {
        let exponent = (2.0 - r_opt) / (2.0 - r_min);
        let stretched =
            r_min + (2.0 - r_min) / (2.0 - r_opt).powf(exponent) * (he.abs() - r_opt).powf(exponent);
        sign_of(he) as f64 * stretched
    }
}

/// Penalty for direction index `direction` at effective shift `he`.
pub fn miscal_penalty(direction: i32, he: f64) -> f64 {
    let k = &*GOLDSTONE;
    let rho_s = direction_sine(direction);
    let w = goldstone_omega(rho_s, he);
    -k.alpha * w * w + k.beta * w.powi(4) + k.kappa * rho_s * w
}

/// Penalty grid over all direction indices and `he` in [-1.5, 1.5] with the
/// given step, as (direction, he, penalty) rows.
pub fn penalty_landscape(step: f64) -> Vec<(i32, f64, f64)> {
    let n = (3.0 / step).round() as usize;
    let mut rows = Vec::with_capacity(13 * (n + 1));
    for phi in -MAX_DIRECTION..=MAX_DIRECTION {
        for i in 0..=n {
            let he = (-1.5 + i as f64 * step).min(1.5);
            rows.push((phi, he, miscal_penalty(phi, he)));
        }
    }
    rows
}
