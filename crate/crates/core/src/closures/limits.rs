//! Closed-form white-noise and large-time limits.

use crate::oscillator::Model;

/// White-noise limit of the closures, where the kernel acts as `(σ²/λ) δ(τ)`.
///
/// Markov: `J(t) = e^{−bt}` with `b = σ²/λ` (multiply by `e^{−νt}` for `G`).
/// Non-Markov: the exact inverse of `p/(p² + bp + ν)`,
/// `e^{−bt/2} [cos ωt − (b/2ω) sin ωt]` with `ω = √(ν − b²/4)`, or its
/// hyperbolic counterpart when `ν < b²/4`.
pub fn white_noise_solution(model: Model, sigma_b2: f64, lambda0: f64, nu: f64, t: f64) -> f64 {
    let b = sigma_b2 / lambda0;
    match model {
        Model::Markov => (-b * t).exp(),
        _ => damped_response(b, nu, t),
    }
}

/// Large-time forms: `e^{−(σ²/λ)t}` (Markov) and `cos √ν t` (non-Markov).
pub fn large_time_solution(model: Model, sigma_b2: f64, lambda0: f64, nu: f64, t: f64) -> f64 {
    match model {
        Model::Markov => white_noise_solution(Model::Markov, sigma_b2, lambda0, nu, t),
        _ => (nu.sqrt() * t).cos(),
    }
}

fn damped_response(b: f64, nu: f64, t: f64) -> f64 {
    let half = 0.5 * b;
    let disc = nu - half * half;
    if disc >= 0.0 {
        let w = disc.sqrt();
        // sin(ωt)/ω, continuous through ω = 0
        let sinc = if w * t < 1e-8 { t } else { (w * t).sin() / w };
        (-half * t).exp() * ((w * t).cos() - half * sinc)
    } else {
        let k = (-disc).sqrt();
        if k * t < 20.0 {
            let sinhc = if k * t < 1e-8 { t } else { (k * t).sinh() / k };
            (-half * t).exp() * ((k * t).cosh() - half * sinhc)
        } else {
            // e^{±kt} split so that neither factor overflows
            let grow = (1.0 - half / k) * ((k - half) * t).exp();
            let decay = (1.0 + half / k) * (-(k + half) * t).exp();
            0.5 * (grow + decay)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((white_noise_solution(Model::Markov, 2.0, 2.0, 0.0, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        for t in [0.0, 0.7, 3.0] {
            let undamped = white_noise_solution(Model::NonMarkov, 0.0, 1.0, 4.0, t);
            assert!((undamped - (2.0 * t).cos()).abs() < 1e-15);
        }
        assert!((large_time_solution(Model::NonMarkov, 1.0, 1.0, 1.0, std::f64::consts::TAU) - 1.0).abs() < 1e-15);
        assert_eq!(
            large_time_solution(Model::Markov, 3.0, 0.5, 0.0, 1.3),
            white_noise_solution(Model::Markov, 3.0, 0.5, 0.0, 1.3)
        );
    }

    #[test]
    fn branches_are_continuous() {
        // critically damped: e^{−t}(1 − t)
        for t in [0.5f64, 2.0, 7.0] {
            let crit = (-t).exp() * (1.0 - t);
            for nu in [1.0 - 1e-9, 1.0, 1.0 + 1e-9] {
                assert!((damped_response(2.0, nu, t) - crit).abs() < 1e-8);
            }
        }
        // overdamped branch agrees across the overflow guard
        let b = 10.0;
        let k = (25.0f64 - 1.0).sqrt();
        let t = 20.0 / k;
        let direct = (-5.0 * t).exp() * ((k * t).cosh() - 5.0 * (k * t).sinh() / k);
        assert!((damped_response(b, 1.0, t * (1.0 + 1e-12)) - direct).abs() < 1e-12);
    }
}
