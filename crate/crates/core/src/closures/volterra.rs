//! Trapezoidal stepping of the closure integro-differential equations.
//!
//! Writing `f(t) = −c ∫₀ᵗ y − ∫₀ᵗ w(t−s) y(s) ds` (perturbative) or
//! `f(t) = −c ∫₀ᵗ y − ∫₀ᵗ K(t−s) y(t−s) y(s) ds` (DIA), the scheme is
//! `y_n = y_{n−1} + dt/2 (f_{n−1} + f_n)` with every integral taken by the
//! trapezoid rule on the grid. In both cases `f_n` is affine in the unknown
//! `y_n`, so each step is one scalar division.

use crate::error::{Error, Result};
use crate::kernels::eval_kernel;
use crate::noise::TimeGrid;
use crate::oscillator::{GreenFunction, Model, Provenance};

use super::ClosureProblem;

/// Bound on `dt · max(λ₀, σ, √ν)`.
pub const MAX_STEP_PRODUCT: f64 = 0.25;

fn check(prob: &ClosureProblem, grid: &TimeGrid) -> Result<()> {
    let nu_rate = match prob.model() {
        Model::Markov => 0.0,
        _ => prob.nu().sqrt(),
    };
    let product = grid.dt() * prob.lambda().max(prob.sigma()).max(nu_rate);
    if product > MAX_STEP_PRODUCT {
        return Err(Error::StepSize(format!(
            "dt·max(lambda0, sigma, sqrt(nu)) = {product:.4} exceeds {MAX_STEP_PRODUCT}"
        )));
    }
    Ok(())
}

fn kernel_samples(prob: &ClosureProblem, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.times().map(|t| eval_kernel(prob.kernel(), t)).collect()
}

fn finish(prob: &ClosureProblem, grid: &TimeGrid, mut y: Vec<f64>) -> Result<GreenFunction> {
    if prob.model() == Model::Markov {
        for (i, v) in y.iter_mut().enumerate().skip(1) {
            *v *= (-prob.nu() * grid.t(i)).exp();
        }
    }
    GreenFunction::from_real(*grid, y, Provenance::Closure)
}

fn memory_rate(prob: &ClosureProblem) -> f64 {
    match prob.model() {
        Model::Markov => 0.0,
        _ => prob.nu(),
    }
}

/// Time-domain solution of the perturbative closure.
pub fn volterra_perturbative(prob: &ClosureProblem, grid: &TimeGrid) -> Result<GreenFunction> {
    check(prob, grid)?;
    let mut w = kernel_samples(prob, grid)?;
    if prob.model() != Model::Markov {
        let omega = prob.nu().sqrt();
        for (i, v) in w.iter_mut().enumerate() {
            *v *= (omega * grid.t(i)).cos();
        }
    }
    let c = memory_rate(prob);
    let dt = grid.dt();
    let mut y = Vec::with_capacity(grid.len());
    y.push(1.0);
    let (mut f_prev, mut area) = (0.0, 0.0);
    for n in 1..grid.len() {
        let history: f64 = (1..n).map(|j| w[n - j] * y[j]).sum();
        let a = -c * (area + 0.5 * dt * y[n - 1]) - dt * (0.5 * w[n] * y[0] + history);
        let b = -0.5 * dt * c - 0.5 * dt * w[0];
        let denom = 1.0 - 0.5 * dt * b;
        if denom.abs() < 1e-12 {
            return Err(Error::SingularStep { node: n });
        }
        let yn = (y[n - 1] + 0.5 * dt * (f_prev + a)) / denom;
        f_prev = a + b * yn;
        area += 0.5 * dt * (y[n - 1] + yn);
        y.push(yn);
    }
    finish(prob, grid, y)
}

/// Time-domain solution of the DIA closure.
///
/// Both trapezoid endpoints of the quadratic memory integral contain the
/// new value once, `K(t_n) y_n y_0` and `K(0) y_0 y_n`, so the step stays linear.
pub fn volterra_dia(prob: &ClosureProblem, grid: &TimeGrid) -> Result<GreenFunction> {
    check(prob, grid)?;
    let k = kernel_samples(prob, grid)?;
    let c = memory_rate(prob);
    let dt = grid.dt();
    let mut y = Vec::with_capacity(grid.len());
    y.push(1.0);
    let (mut f_prev, mut area) = (0.0, 0.0);
    for n in 1..grid.len() {
        let history: f64 = (1..n).map(|j| k[n - j] * y[n - j] * y[j]).sum();
        let a = -c * (area + 0.5 * dt * y[n - 1]) - dt * history;
        let b = -0.5 * dt * c - 0.5 * dt * (k[n] + k[0]) * y[0];
        let denom = 1.0 - 0.5 * dt * b;
        if denom.abs() < 1e-12 {
            return Err(Error::SingularStep { node: n });
        }
        let yn = (y[n - 1] + 0.5 * dt * (f_prev + a)) / denom;
        f_prev = a + b * yn;
        area += 0.5 * dt * (y[n - 1] + yn);
        y.push(yn);
    }
    finish(prob, grid, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closures::Method;
    use crate::kernels::NoiseKernel;
    use crate::oscillator::OscillatorConfig;

    fn problem(method: Method, kernel: NoiseKernel, cfg: OscillatorConfig) -> ClosureProblem {
        ClosureProblem::new(method, kernel, cfg).unwrap()
    }

    #[test]
    fn constant_kernel_gives_damped_cosine() {
        let k = NoiseKernel::linear_small_lambda(1.0, 0.0).unwrap();
        let prob = problem(Method::Perturbative, k, OscillatorConfig::markov(0.2).unwrap());
        let grid = TimeGrid::with_horizon(0.005, 10.0).unwrap();
        let g = volterra_perturbative(&prob, &grid).unwrap();
        for (i, v) in g.values().iter().enumerate() {
            let t = grid.t(i);
            assert!((v.re - (-0.2 * t).exp() * t.cos()).abs() < 1e-4, "t = {t}");
        }
    }

    #[test]
    fn vanishing_noise_non_markov_is_cosine() {
        let k = NoiseKernel::ou(1e-16, 0.1).unwrap();
        let prob = problem(Method::Perturbative, k, OscillatorConfig::non_markov(1.0).unwrap());
        let grid = TimeGrid::with_horizon(0.0005, 10.0).unwrap();
        let g = volterra_perturbative(&prob, &grid).unwrap();
        for (i, v) in g.values().iter().enumerate() {
            assert!((v.re - grid.t(i).cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn step_bound() {
        let k = NoiseKernel::ou(1.0, 10.0).unwrap();
        let prob = problem(Method::Dia, k, OscillatorConfig::markov(0.0).unwrap());
        let grid = TimeGrid::new(0.05, 10).unwrap();
        assert!(matches!(volterra_dia(&prob, &grid), Err(Error::StepSize(_))));
    }
}
