//! Fatigue: basic fatigue, effective velocity/gain, spike noise, the
//! self-amplifying latents and the amplification that scales fatigue.

use serde::{Deserialize, Serialize};

use crate::rng::Noise;

/// Latent level at which amplification bifurcates and latents self-amplify.
pub const BIFURCATION_LEVEL: f64 = 1.2;
pub const MU_CAP: f64 = 5.0;
/// Effective values at or below this reset the latent to the effective value.
pub const EFFECTIVE_FLOOR: f64 = 0.05;
pub const SPIKE_EXP_MEAN: f64 = 0.05;
pub const BIFURCATED_MEAN: f64 = 2.4;
pub const BIFURCATED_STD: f64 = 0.4;

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn basic_fatigue(velocity: f64, gain: f64) -> f64 {
    (30000.0 / (5.0 * velocity + 100.0) - 0.01 * gain * gain).max(0.0)
}

fn transform_velocity(v: f64, g: f64, p: f64) -> f64 {
    (g + p + 2.0) / (v - p + 101.0)
}

fn transform_gain(g: f64, p: f64) -> f64 {
    1.0 / (g + p + 1.0)
}

/// Setpoint-normalized velocity: 0 at (v, g) = (0, 100), 1 at (100, 0).
pub fn effective_velocity(v: f64, g: f64, p: f64) -> f64 {
    let lo = transform_velocity(0.0, 100.0, p);
    let hi = transform_velocity(100.0, 0.0, p);
    (transform_velocity(v, g, p) - lo) / (hi - lo)
}

/// Setpoint-normalized gain: 0 at g = 100, 1 at g = 0.
pub fn effective_gain(g: f64, p: f64) -> f64 {
    let lo = transform_gain(100.0, p);
    let hi = transform_gain(0.0, p);
    (transform_gain(g, p) - lo) / (hi - lo)
}

/// The six raw draws of one fatigue update and the two composed values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FatigueNoise {
    pub exp_v: f64,
    pub exp_g: f64,
    pub spike_v: f64,
    pub spike_g: f64,
    pub unif_v: f64,
    pub unif_g: f64,
    pub eta_v: f64,
    pub eta_g: f64,
}

/// Draws in the fixed order exp_v, exp_g, spike_v, spike_g, unif_v, unif_g.
pub fn sample_fatigue_noise(v_e: f64, g_e: f64, noise: &mut Noise<'_>) -> FatigueNoise {
    let exp_v = logistic(noise.exponential(SPIKE_EXP_MEAN));
    let exp_g = logistic(noise.exponential(SPIKE_EXP_MEAN));
    let spike_v = noise.bernoulli(v_e);
    let spike_g = noise.bernoulli(g_e);
    let unif_v = noise.uniform();
    let unif_g = noise.uniform();
    FatigueNoise {
        exp_v,
        exp_g,
        spike_v,
        spike_g,
        unif_v,
        unif_g,
        eta_v: exp_v + (1.0 - exp_v) * unif_v * spike_v * v_e,
        eta_g: exp_g + (1.0 - exp_g) * unif_g * spike_g * g_e,
    }
}

pub fn update_mu(mu_prev: f64, effective: f64, eta: f64) -> f64 {
    if effective <= EFFECTIVE_FLOOR {
        effective
    } else if mu_prev >= BIFURCATION_LEVEL {
        MU_CAP.min(1.1 * mu_prev)
    } else {
        0.9 * mu_prev + eta / 3.0
    }
}

pub fn is_bifurcated(mu_v: f64, mu_g: f64) -> bool {
    mu_v.max(mu_g) >= BIFURCATION_LEVEL
}

/// Fatigue amplification. The Gaussian is drawn only on the bifurcated branch.
pub fn amplification(mu_v: f64, mu_g: f64, eta_v: f64, eta_g: f64, noise: &mut Noise<'_>) -> f64 {
    if is_bifurcated(mu_v, mu_g) {
        logistic(noise.gaussian(BIFURCATED_MEAN, BIFURCATED_STD))
    } else {
        eta_v.max(eta_g)
    }
}

pub fn fatigue(basic: f64, alpha: f64) -> f64 {
    basic * (1.0 + 2.0 * alpha) / 3.0
}

/// Everything one fatigue update produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatigueOutcome {
    pub effective_velocity: f64,
    pub effective_gain: f64,
    pub noise: FatigueNoise,
    pub mu_v: f64,
    pub mu_g: f64,
    pub alpha: f64,
    pub basic: f64,
    pub fatigue: f64,
}

/// Full fatigue update from post-action steerings and the previous latents.
pub fn fatigue_step(
    setpoint: f64,
    velocity: f64,
    gain: f64,
    mu_v_prev: f64,
    mu_g_prev: f64,
    noise: &mut Noise<'_>,
) -> FatigueOutcome {
    let v_e = effective_velocity(velocity, gain, setpoint);
    let g_e = effective_gain(gain, setpoint);
    let draws = sample_fatigue_noise(v_e, g_e, noise);
    let mu_v = update_mu(mu_v_prev, v_e, draws.eta_v);
    let mu_g = update_mu(mu_g_prev, g_e, draws.eta_g);
    let alpha = amplification(mu_v, mu_g, draws.eta_v, draws.eta_g, noise);
    let basic = basic_fatigue(velocity, gain);
    FatigueOutcome {
        effective_velocity: v_e,
        effective_gain: g_e,
        noise: draws,
        mu_v,
        mu_g,
        alpha,
        basic,
        fatigue: fatigue(basic, alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{NoiseHook, SimRng};
    use approx::assert_relative_eq;

    #[test]
    fn basic_fatigue_examples() {
        assert_eq!(basic_fatigue(0.0, 0.0), 300.0);
        assert_relative_eq!(basic_fatigue(50.0, 50.0), 30000.0 / 350.0 - 25.0);
        assert_relative_eq!(basic_fatigue(50.0, 50.0), 60.714, epsilon = 1e-3);
        assert_eq!(basic_fatigue(100.0, 100.0), 0.0);
    }

    #[test]
    fn effective_value_anchors() {
        for p in [0.0, 25.0, 50.0, 100.0] {
            assert_relative_eq!(effective_velocity(0.0, 100.0, p), 0.0, epsilon = 1e-15);
            assert_relative_eq!(effective_velocity(100.0, 0.0, p), 1.0, epsilon = 1e-15);
            assert_relative_eq!(effective_gain(100.0, p), 0.0, epsilon = 1e-15);
            assert_relative_eq!(effective_gain(0.0, p), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn effective_value_examples() {
        let oracle_v = (102.0 / 101.0 - 152.0 / 51.0) / (52.0 / 151.0 - 152.0 / 51.0);
        assert_relative_eq!(effective_velocity(50.0, 50.0, 50.0), oracle_v, epsilon = 1e-14);
        assert_relative_eq!(oracle_v, 0.7475, epsilon = 1e-4);
        let oracle_g = (1.0 / 101.0 - 1.0 / 151.0) / (1.0 / 51.0 - 1.0 / 151.0);
        assert_relative_eq!(effective_gain(50.0, 50.0), oracle_g, epsilon = 1e-14);
        assert_relative_eq!(oracle_g, 0.2525, epsilon = 1e-4);
    }

    #[test]
    fn zero_effective_velocity_never_spikes() {
        let mut rng = SimRng::seed_from(11);
        for _ in 0..1000 {
            let n = sample_fatigue_noise(0.0, 0.5, &mut Noise::Live(&mut rng));
            assert_eq!(n.spike_v, 0.0);
            assert_eq!(n.eta_v, n.exp_v);
        }
    }

    #[test]
    fn full_spike_saturates() {
        // exp floor plus its full remainder.
        let exp_v = logistic(0.0);
        let eta = exp_v + (1.0 - exp_v) * 1.0 * 1.0 * 1.0;
        assert_eq!(eta, 1.0);
    }

    #[test]
    fn composed_noise_bounded() {
        let mut rng = SimRng::seed_from(5);
        for i in 0..5000 {
            let v_e = (i % 101) as f64 / 100.0;
            let n = sample_fatigue_noise(v_e, 1.0 - v_e, &mut Noise::Live(&mut rng));
            assert!(n.eta_v >= n.exp_v && n.eta_v <= 1.0);
            assert!(n.eta_g >= n.exp_g && n.eta_g <= 1.0);
        }
    }

    #[test]
    fn update_mu_examples() {
        assert_eq!(update_mu(3.3, 0.04, 0.9), 0.04);
        assert_relative_eq!(update_mu(1.3, 0.5, 0.0), 1.43, epsilon = 1e-15);
        assert_relative_eq!(update_mu(1.0, 0.5, 0.3), 1.0, epsilon = 1e-15);
        assert_eq!(update_mu(4.9, 0.5, 0.0), 5.0);
    }

    #[test]
    fn amplification_branches() {
        let mut hook = Noise::Suppressed(NoiseHook::Zeros);
        assert_eq!(amplification(1.0, 1.0, 0.2, 0.5, &mut hook), 0.5);
        // μ_v = 1.2 takes the bifurcated branch: with the Means hook the
        // Gaussian is its mean 2.4.
        let mut means = Noise::Suppressed(NoiseHook::Means);
        assert_eq!(amplification(1.2, 0.0, 0.2, 0.5, &mut means), logistic(2.4));
    }

    #[test]
    fn bifurcated_branch_draws_two_uniforms() {
        let mut rng = SimRng::seed_from(2);
        amplification(1.0, 0.0, 0.1, 0.1, &mut Noise::Live(&mut rng));
        assert_eq!(rng.draws(), 0);
        amplification(2.0, 0.0, 0.1, 0.1, &mut Noise::Live(&mut rng));
        assert_eq!(rng.draws(), 2);
    }

    #[test]
    fn fatigue_examples() {
        assert_eq!(fatigue(90.0, 1.0), 90.0);
        assert_eq!(fatigue(90.0, 0.5), 60.0);
        assert_eq!(fatigue(0.0, 0.7), 0.0);
    }

    #[test]
    fn opposing_objectives() {
        // Lowering velocity lowers operational cost but raises basic fatigue.
        let h = 1e-4;
        for vi in 1..20 {
            for gi in 0..=20 {
                let (v, g) = (vi as f64 * 5.0, gi as f64 * 5.0);
                let dfb = (basic_fatigue(v + h, g) - basic_fatigue(v - h, g)) / (2.0 * h);
                let dth = (crate::opcost::current_opcost(50.0, v + h, g)
                    - crate::opcost::current_opcost(50.0, v - h, g))
                    / (2.0 * h);
                assert!(dth > 0.0);
                if basic_fatigue(v, g) > 1e-3 && basic_fatigue(v + h, g) > 0.0 {
                    assert!(dfb < 0.0, "v={v} g={g}");
                }
            }
        }
    }
}
