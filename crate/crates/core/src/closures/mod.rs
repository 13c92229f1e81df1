//! Perturbative (Keller) and DIA closures for the ensemble-averaged Green's
//! function, solved in the time domain and in the Laplace domain.
//!
//! For the Markov model the damping is factored out, `G = e^{−νt} J`, and
//! the closures are posed for `J`:
//!
//! * perturbative: `J′ + σ² ∫₀ᵗ g(t−t′) J(t′) dt′ = 0`,
//! * DIA: `J′ + σ² ∫₀ᵗ g(t−t′) J(t−t′) J(t′) dt′ = 0`.
//!
//! For the non-Markov model the closures are posed for `G` directly:
//!
//! * perturbative: `G′ + ν ∫₀ᵗ G + σ² ∫₀ᵗ g(t−t′) cos√ν(t−t′) G(t′) dt′ = 0`,
//! * DIA: `G′ + ν ∫₀ᵗ G + σ² ∫₀ᵗ g(t−t′) G(t−t′) G(t′) dt′ = 0`.
//!
//! In every case the impulse is absorbed into the initial value 1.

mod inversion;
mod laplace;
mod limits;
mod volterra;

pub use inversion::{invert_laplace, talbot, TalbotOptions, CONVERGENCE_TOL};
pub use laplace::{
    dia_depth, laplace_dia, laplace_perturbative, LaplacePoint, LaplaceSolution, FIXED_POINT_DAMPING, POLE_TOL,
};
pub use limits::{large_time_solution, white_noise_solution};
pub use volterra::{volterra_dia, volterra_perturbative, MAX_STEP_PRODUCT};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::{KernelKind, NoiseKernel};
use crate::noise::TimeGrid;
use crate::oscillator::{GreenFunction, Model, OscillatorConfig, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Perturbative,
    Dia,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Perturbative => "perturbative",
            Method::Dia => "dia",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureProblem {
    method: Method,
    kernel: NoiseKernel,
    cfg: OscillatorConfig,
}

impl ClosureProblem {
    pub fn new(method: Method, kernel: NoiseKernel, cfg: OscillatorConfig) -> Result<Self> {
        if cfg.model() == Model::FullKernel {
            return Err(invalid(
                "model",
                "closures are defined for the markov and non-markov models only",
            ));
        }
        Ok(Self { method, kernel, cfg })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn model(&self) -> Model {
        self.cfg.model()
    }

    pub fn kernel(&self) -> &NoiseKernel {
        &self.kernel
    }

    pub fn cfg(&self) -> &OscillatorConfig {
        &self.cfg
    }

    pub fn sigma2(&self) -> f64 {
        self.kernel.sigma_b2()
    }

    pub fn sigma(&self) -> f64 {
        self.kernel.sigma_b2().sqrt()
    }

    pub fn lambda(&self) -> f64 {
        self.kernel.lambda0()
    }

    pub fn nu(&self) -> f64 {
        self.cfg.nu()
    }

    /// Floor on the Talbot contour radius.
    ///
    /// `h` is the largest imaginary part of the singularities: `σ` and `2σ`
    /// for the Markov closures, `σ + √(σ² + ν)` for the non-Markov ones and
    /// `√ν` for the white-noise kernel. The pointwise-kernel singularities
    /// lie strictly left of the imaginary axis, so the floor `0.8h` already
    /// puts the axis crossing `±i·0.8hπ/2` a quarter clear of them.
    pub fn contour_radius(&self) -> f64 {
        let (s, nu) = (self.sigma(), self.nu());
        if self.kernel.kind() == KernelKind::White {
            return match self.model() {
                Model::Markov => 0.0,
                _ => nu.sqrt(),
            };
        }
        let h = match (self.model(), self.method) {
            (Model::Markov, Method::Perturbative) => s,
            (Model::Markov, Method::Dia) => 2.0 * s,
            _ => s + (s * s + nu).sqrt(),
        };
        CONTOUR_CLEARANCE * h
    }
}

/// Contour radius floor per unit singularity height for pointwise kernels.
pub const CONTOUR_CLEARANCE: f64 = 0.8;

/// Time-domain solution: Volterra stepping for pointwise kernels, the
/// closed form for the white-noise kernel.
pub fn solve_time_domain(prob: &ClosureProblem, grid: &TimeGrid) -> Result<GreenFunction> {
    if prob.kernel.kind() == KernelKind::White {
        let b = prob.sigma2() / prob.lambda();
        let values = grid
            .times()
            .map(|t| match prob.model() {
                Model::Markov => (-prob.nu() * t).exp() * white_noise_solution(Model::Markov, b, 1.0, 0.0, t),
                _ => white_noise_solution(Model::NonMarkov, b, 1.0, prob.nu(), t),
            })
            .collect();
        return GreenFunction::from_real(*grid, values, Provenance::Closure);
    }
    match prob.method {
        Method::Perturbative => volterra_perturbative(prob, grid),
        Method::Dia => volterra_dia(prob, grid),
    }
}

/// Transform of the closure at `p`: `𝒥(p)` for the Markov model, `𝒢(p)` otherwise.
pub fn transform(prob: &ClosureProblem, p: Complex64) -> Result<Complex64> {
    match prob.method {
        Method::Perturbative => laplace_perturbative(prob, p),
        Method::Dia => Ok(laplace_dia(prob, p, None)?.value),
    }
}

/// `G(t)` by Talbot inversion of the closure transform. The Markov damping
/// `e^{−νt}` is restored after inversion; `t = 0` returns the initial value 1.
pub fn laplace_inverted(prob: &ClosureProblem, times: &[f64]) -> Result<Vec<f64>> {
    let opts = TalbotOptions {
        omega: prob.contour_radius(),
        ..TalbotOptions::default()
    };
    times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(1.0);
            }
            let v = invert_laplace(|p| transform(prob, p), &[t], &opts)?[0];
            Ok(match prob.model() {
                Model::Markov => (-prob.nu() * t).exp() * v,
                _ => v,
            })
        })
        .collect()
}
