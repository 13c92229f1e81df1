//! Stochastic oscillators driven by noise with q-exponential (Tsallis)
//! correlations.
//!
//! The crate covers the whole chain from the noise statistics to the mean
//! Green's function of `dĜ/dt = −i b(t) Ĝ − (damping or memory)`:
//!
//! - [`qcore`]: q-exponential, q-logarithm, Tsallis entropy and escort
//!   distributions.
//! - [`gamma_compound`]: gamma-distributed rates whose compound
//!   autocovariance is a q-exponential with `q = 1 + 1/c`.
//! - [`kernels`]: noise autocorrelation kernels and the double integral
//!   `I_q(t)` that fixes the exact Markov mean.
//! - [`noise`]: seeded OU, superstatistical OU and Gaussian q-exponential
//!   paths, plus empirical autocovariances.
//! - [`oscillator`]: per-realization integration, reproducible ensemble
//!   means and exact Markov oracles.
//! - [`closures`]: perturbative and DIA closures in the time domain and in
//!   the Laplace domain, with Talbot inversion and closed-form limits.
//! - [`cli`]: JSON-configured experiments behind the `tsallis-dia` binary.
//!
//! Runnable examples live in `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `q_calculus` | q-exponentials, pseudo-additivity, maxent and escort distributions |
//! | `superstatistical_noise` | compound OU autocovariance against `(1 + aτ)^{-c}` |
//! | `iq_double_integral` | closed form vs quadrature for `I_q`, monotonicity scans |
//! | `markov_monte_carlo` | ensemble mean Green's function against the exact mean |
//! | `dia_closures` | Bessel solution at `λ = 0`, time vs Laplace domain |
//! | `white_noise_limit` | convergence of both closures as `λ → ∞` |
//! | `limit_paths` | delta limit of the gamma law and `(ℓ, λ)` limit paths |
//! | `run_config` | a JSON experiment driven through the library |
//!
//! ```
//! use tsallis_dia::kernels::{iq_closed_form, NoiseKernel};
//! use tsallis_dia::noise::TimeGrid;
//! use tsallis_dia::oscillator::exact_markov_mean;
//! use tsallis_dia::qcore::QIndex;
//!
//! let q = QIndex::new(1.25)?;
//! assert!((iq_closed_form(1.0, q, 1.0)? - 28.0 / 75.0).abs() < 1e-13);
//!
//! let kernel = NoiseKernel::tsallis(1.0, 1.0, q)?;
//! let grid = TimeGrid::with_horizon(0.1, 2.0)?;
//! let g = exact_markov_mean(&kernel, 0.5, &grid)?;
//! assert_eq!(g.values()[0].re, 1.0);
//! # Ok::<(), tsallis_dia::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closures;
pub mod error;
pub mod gamma_compound;
pub mod kernels;
pub mod noise;
pub mod oscillator;
pub mod qcore;
pub mod quad;

pub use error::{Error, Result};
pub use gamma_compound::GammaParams;
pub use kernels::NoiseKernel;
pub use noise::{EnsembleSpec, NoisePath, Sampler, TimeGrid};
pub use oscillator::{GreenFunction, Model, OscillatorConfig};
pub use qcore::QIndex;
