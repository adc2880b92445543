//! Independent, straight-line transcription of the benchmark dynamics used
//! as a test oracle. Shares no code with the crate's dynamics.

#![allow(dead_code)]

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hook {
    Zeros,
    Means,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleState {
    pub p: f64,
    pub v: f64,
    pub g: f64,
    pub h: f64,
    /// theta[0] = θ_{t-1} … theta[8] = θ_{t-9}
    pub theta: [f64; 9],
    pub delta: i32,
    pub psi: i32,
    pub phi: i32,
    pub mu_v: f64,
    pub mu_g: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOutput {
    pub state: OracleState,
    pub c: f64,
    pub f: f64,
    pub r: f64,
    pub m: f64,
    pub theta_c: f64,
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn goldstone_constants() -> [f64; 7] {
    let eps = (1.0 + 2.0_f64.sqrt()).powf(1.0 / 3.0) / 3.0_f64.sqrt();
    let zeta = eps + 1.0 / (3.0 * eps);
    let lam = 2.0 * zeta * zeta - zeta * zeta * zeta * zeta + 8.0 * (2.0_f64 / 27.0).sqrt() * zeta;
    let alpha = 2.0 / lam;
    let beta = 1.0 / lam;
    let kappa = -8.0 * (2.0_f64 / 27.0).sqrt() / lam;
    let z = (PI * 15.0 / 180.0).sin() / 2.0;
    [eps, zeta, lam, alpha, beta, kappa, z]
}

pub fn penalty(phi: i32, he: f64) -> f64 {
    let [_, _, _, alpha, beta, kappa, z] = goldstone_constants();
    let rho_s = (PI / 12.0 * phi as f64).sin();
    let varrho = if rho_s < 0.0 { -1.0 } else { 1.0 };
    let q = kappa * rho_s.abs() / (8.0 * beta);
    let r_min = if q < -(1.0_f64 / 27.0).sqrt() {
        let radicand = -varrho * q + (q * q - 1.0 / 27.0).sqrt();
        let u = sgn(radicand) * radicand.abs().powf(1.0 / 3.0);
        u + 1.0 / (3.0 * u)
    } else {
        varrho * (4.0_f64 / 3.0).sqrt() * ((1.0 / 3.0) * (-q * 27.0_f64.sqrt()).min(1.0).max(-1.0).acos()).cos()
    };
    let r_opt = varrho * rho_s.abs().max(2.0 * z);
    let omega = if he.abs() <= r_opt.abs() {
        he * r_min.abs() / r_opt.abs()
    } else {
        let omega_hh = (2.0 - r_opt.abs()) / (2.0 - r_min.abs());
        let omega_h = r_min.abs()
            + (2.0 - r_min.abs()) / (2.0 - r_opt.abs()).powf(omega_hh)
                * (he.abs() - r_opt.abs()).powf(omega_hh);
        sgn(he) * omega_h
    };
    -alpha * omega * omega + beta * omega.powi(4) + kappa * rho_s * omega
}

/// One benchmark step with constant setpoint and suppressed noise.
pub fn step(s: &OracleState, a: [f64; 3], hook: Hook) -> OracleOutput {
    let z = goldstone_constants()[6];
    let p = s.p;

    // steering update
    let d_h = 20.0 * (15.0 * PI / 180.0).sin() / 0.9;
    let v = (s.v + 1.0 * a[0]).min(100.0).max(0.0);
    let g = (s.g + 10.0 * a[1]).min(100.0).max(0.0);
    let h = (s.h + d_h * a[2]).min(100.0).max(0.0);

    // fatigue
    let tv = |v: f64, g: f64| (g + p + 2.0) / (v - p + 101.0);
    let tg = |g: f64| 1.0 / (g + p + 1.0);
    let ve = (tv(v, g) - tv(0.0, 100.0)) / (tv(100.0, 0.0) - tv(0.0, 100.0));
    let ge = (tg(g) - tg(100.0)) / (tg(0.0) - tg(100.0));
    let (x_exp, b_v, b_g, u) = match hook {
        Hook::Zeros => (0.0, 0.0, 0.0, 0.0),
        Hook::Means => (0.05, ve.min(1.0).max(0.0), ge.min(1.0).max(0.0), 0.5),
    };
    let eta_ve = logistic(x_exp);
    let eta_ge = logistic(x_exp);
    let eta_v = eta_ve + (1.0 - eta_ve) * u * b_v * ve;
    let eta_g = eta_ge + (1.0 - eta_ge) * u * b_g * ge;
    let mu_v = if ve <= 0.05 {
        ve
    } else if s.mu_v >= 1.2 {
        (1.1 * s.mu_v).min(5.0)
    } else {
        0.9 * s.mu_v + eta_v / 3.0
    };
    let mu_g = if ge <= 0.05 {
        ge
    } else if s.mu_g >= 1.2 {
        (1.1 * s.mu_g).min(5.0)
    } else {
        0.9 * s.mu_g + eta_g / 3.0
    };
    let alpha = if mu_v.max(mu_g) >= 1.2 {
        let gauss: f64 = match hook {
            Hook::Zeros => 0.0,
            Hook::Means => 2.4,
        };
        1.0 / (1.0 + (-gauss).exp())
    } else {
        eta_v.max(eta_g)
    };
    let f_b = (30000.0 / (5.0 * v + 100.0) - 0.01 * g * g).max(0.0);
    let f = f_b * (1.0 + 2.0 * alpha) / 3.0;

    // operational cost
    let theta_now = ((2.0 * p + 4.0 * v + 2.5 * g) / 100.0).exp();
    let th = &s.theta;
    let theta_c = th[4] / 9.0 + 2.0 * th[5] / 9.0 + 3.0 * th[6] / 9.0 + 2.0 * th[7] / 9.0 + th[8] / 9.0;
    let mut theta = [0.0; 9];
    theta[0] = theta_now;
    theta[1..].copy_from_slice(&th[..8]);

    // mis-calibration
    let he = (h / 20.0 - p / 50.0 - 1.5).min(1.5).max(-1.5);
    let delta_hat = if he.abs() <= z { s.delta } else { sgn(he) as i32 };
    let psi_hat = if s.delta != delta_hat { 1 } else { s.psi };
    let dphi = if he.abs() <= z {
        -(sgn(s.phi as f64) as i32)
    } else if s.phi == -6 * delta_hat {
        0
    } else {
        psi_hat * sgn(he) as i32
    };
    let phi_hat = s.phi + dphi;
    let psi_hh = if phi_hat.abs() >= 6 { -1 } else { psi_hat };
    let phi = if phi_hat.abs() >= 6 {
        12 - (((phi_hat + 24) % 24) + 24) % 24
    } else {
        phi_hat
    };
    let (delta, psi) = if phi == 0 && he.abs() <= z {
        (1, 1)
    } else {
        (delta_hat, psi_hh)
    };
    let m = penalty(phi, he);

    let c_hat = theta_c + 25.0 * m;
    let c = c_hat; // Gaussian replaced by its mean (0) under both hooks
    let r = -c - 3.0 * f;

    OracleOutput {
        state: OracleState {
            p,
            v,
            g,
            h,
            theta,
            delta,
            psi,
            phi,
            mu_v,
            mu_g,
        },
        c,
        f,
        r,
        m,
        theta_c,
    }
}

pub fn from_markov(s: &indbench::MarkovState) -> OracleState {
    let mut theta = [0.0; 9];
    theta.copy_from_slice(s.opcost_history.as_slice());
    OracleState {
        p: s.setpoint,
        v: s.steerings.velocity,
        g: s.steerings.gain,
        h: s.steerings.shift,
        theta,
        delta: s.miscal.domain as i32,
        psi: s.miscal.response as i32,
        phi: s.miscal.direction,
        mu_v: s.mu_v,
        mu_g: s.mu_g,
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
