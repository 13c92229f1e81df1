//! The stochastic oscillator driven by `b(t)` and its ensemble average.
//!
//! Three models share the Green's-function convention `Ĝ(0) = 1`:
//!
//! * `markov`: `dĜ/dt = −(ν + i b) Ĝ`,
//! * `non-markov`: `dĜ/dt = −i b Ĝ − ν ∫₀ᵗ Ĝ`,
//! * `full-kernel`: `dĜ/dt = −i b Ĝ − ∫₀ᵗ ν e^{−μ(t−t′)} Ĝ(t′) dt′`.
//!
//! The memory integral `z` is carried as an auxiliary variable with
//! `z′ = −μ z + ν Ĝ`, so no history sums are needed.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gamma_compound::{gamma_expectation, GammaParams};
use crate::kernels::{iq, ou_phase_shape, KernelKind, NoiseKernel};
use crate::noise::{EnsembleSpec, NoisePath, PathGenerator, TimeGrid};
use crate::quad::QuadOptions;

/// Stability bound on `(max|b| + ν_eff)·dt`.
pub const MAX_STEP_PRODUCT: f64 = 0.1;

/// Realizations per reduction block.
pub const BLOCK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Markov,
    NonMarkov,
    FullKernel,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Markov => "markov",
            Model::NonMarkov => "non-markov",
            Model::FullKernel => "full-kernel",
        })
    }
}

/// Damping model. `nu` is a rate for `markov` and a squared rate otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorConfig {
    model: Model,
    nu: f64,
    mu: Option<f64>,
}

impl OscillatorConfig {
    pub fn new(model: Model, nu: f64, mu: Option<f64>) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(invalid("nu", format!("must be non-negative, got {nu}")));
        }
        match (model, mu) {
            (Model::FullKernel, Some(m)) if m.is_finite() && m > 0.0 => {}
            (Model::FullKernel, _) => return Err(invalid("mu", "full-kernel needs mu > 0")),
            (_, Some(_)) => return Err(invalid("mu", format!("mu only applies to full-kernel, not {model}"))),
            _ => {}
        }
        Ok(Self { model, nu, mu })
    }

    pub fn markov(nu: f64) -> Result<Self> {
        Self::new(Model::Markov, nu, None)
    }

    pub fn non_markov(nu: f64) -> Result<Self> {
        Self::new(Model::NonMarkov, nu, None)
    }

    pub fn full_kernel(nu: f64, mu: f64) -> Result<Self> {
        Self::new(Model::FullKernel, nu, Some(mu))
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    /// Rate scale entering the step-size bound.
    pub fn effective_rate(&self) -> f64 {
        match self.model {
            Model::Markov => self.nu,
            Model::NonMarkov => self.nu.sqrt(),
            Model::FullKernel => self.mu.unwrap_or(0.0) + self.nu.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    MonteCarlo,
    Closure,
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenFunction {
    grid: TimeGrid,
    values: Vec<Complex64>,
    stderr: Option<Vec<Complex64>>,
    provenance: Provenance,
}

impl GreenFunction {
    pub fn new(
        grid: TimeGrid,
        values: Vec<Complex64>,
        stderr: Option<Vec<Complex64>>,
        provenance: Provenance,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(se) = &stderr {
            if se.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "{} errors for {} nodes",
                    se.len(),
                    grid.len()
                )));
            }
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain("Green's function is not finite".into()));
        }
        if values[0] != Complex64::new(1.0, 0.0) {
            return Err(Error::Domain(format!("G(0) = {} instead of 1", values[0])));
        }
        Ok(Self {
            grid,
            values,
            stderr,
            provenance,
        })
    }

    pub(crate) fn from_real(grid: TimeGrid, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        Self::new(
            grid,
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            None,
            provenance,
        )
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn stderr(&self) -> Option<&[Complex64]> {
        self.stderr.as_deref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `t,re,im` rows, plus `stderr_re,stderr_im` when errors are present.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        match &self.stderr {
            Some(se) => {
                writeln!(w, "t,re,im,stderr_re,stderr_im")?;
                for (i, (v, e)) in self.values.iter().zip(se).enumerate() {
                    writeln!(w, "{},{},{},{},{}", self.grid.t(i), v.re, v.im, e.re, e.im)?;
                }
            }
            None => {
                writeln!(w, "t,re,im")?;
                for (i, v) in self.values.iter().enumerate() {
                    writeln!(w, "{},{},{}", self.grid.t(i), v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

fn check_step(b: &NoisePath, cfg: &OscillatorConfig) -> Result<()> {
    let product = (b.max_abs() + cfg.effective_rate()) * b.grid().dt();
    if product > MAX_STEP_PRODUCT {
        return Err(Error::StepSize(format!(
            "(max|b| + nu_eff)·dt = {product:.4} exceeds {MAX_STEP_PRODUCT}"
        )));
    }
    Ok(())
}

/// One realization `Ĝ(t)` for the given noise path.
///
/// The Markov model is integrated exactly: `Ĝ = e^{−νt − iΦ}` with the
/// phase `Φ` accumulated by the trapezoid rule, so `|Ĝ| = e^{−νt}` holds to
/// rounding. The memory models use the classical RK4 step on `(Ĝ, z)` with
/// linearly interpolated noise at the half step.
pub fn simulate_realization(b: &NoisePath, cfg: &OscillatorConfig) -> Result<GreenFunction> {
    check_step(b, cfg)?;
    let values = integrate_path(b, cfg);
    GreenFunction::new(*b.grid(), values, None, Provenance::MonteCarlo)
}

fn integrate_path(b: &NoisePath, cfg: &OscillatorConfig) -> Vec<Complex64> {
    let grid = b.grid();
    let dt = grid.dt();
    let bv = b.values();
    let mut out = Vec::with_capacity(grid.len());
    out.push(Complex64::new(1.0, 0.0));
    match cfg.model {
        Model::Markov => {
            let mut phase = 0.0;
            for i in 1..grid.len() {
                phase += 0.5 * dt * (bv[i - 1] + bv[i]);
                out.push(Complex64::from_polar((-cfg.nu * grid.t(i)).exp(), -phase));
            }
        }
        Model::NonMarkov | Model::FullKernel => {
            let mu = cfg.mu.unwrap_or(0.0);
            let nu = cfg.nu;
            let i_unit = Complex64::new(0.0, 1.0);
            let rhs = |g: Complex64, z: Complex64, bb: f64| (-i_unit * bb * g - z, -mu * z + nu * g);
            let (mut g, mut z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
            for i in 1..grid.len() {
                let (b0, b1) = (bv[i - 1], bv[i]);
                let bm = 0.5 * (b0 + b1);
                let (k1g, k1z) = rhs(g, z, b0);
                let (k2g, k2z) = rhs(g + 0.5 * dt * k1g, z + 0.5 * dt * k1z, bm);
                let (k3g, k3z) = rhs(g + 0.5 * dt * k2g, z + 0.5 * dt * k2z, bm);
                let (k4g, k4z) = rhs(g + dt * k3g, z + dt * k3z, b1);
                g += dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
                z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
                out.push(g);
            }
        }
    }
    out
}

/// Running mean and sum of squared deviations, mergeable in a fixed order.
#[derive(Debug, Clone)]
struct Moments {
    count: f64,
    mean: Vec<Complex64>,
    // componentwise sums of squared deviations (re, im)
    m2: Vec<Complex64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![Complex64::new(0.0, 0.0); len],
            m2: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    fn push(&mut self, x: &[Complex64]) {
        self.count += 1.0;
        for ((m, s), v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / self.count;
            let d2 = v - *m;
            s.re += d.re * d2.re;
            s.im += d.im * d2.im;
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        if other.count == 0.0 {
            return self;
        }
        let n = self.count + other.count;
        let w = other.count / n;
        let cross = self.count * other.count / n;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * w;
            self.m2[i].re += other.m2[i].re + d.re * d.re * cross;
            self.m2[i].im += other.m2[i].im + d.im * d.im * cross;
        }
        self.count = n;
        self
    }
}

/// Ensemble mean `G(t) = ⟨Ĝ(t)⟩` with per-node standard errors of the real
/// and imaginary parts.
///
/// Realizations are processed in fixed blocks of [`BLOCK`]; blocks run in
/// parallel and are merged in index order, so the result is bitwise
/// reproducible for a given seed regardless of the number of threads.
pub fn ensemble_mean_green(spec: &EnsembleSpec, cfg: &OscillatorConfig, grid: &TimeGrid) -> Result<GreenFunction> {
    let generator = PathGenerator::new(&spec.sampler, grid)?;
    let n = spec.n_realizations;
    let blocks: Vec<Moments> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|k| {
            let mut m = Moments::new(grid.len());
            for i in k * BLOCK..((k + 1) * BLOCK).min(n) {
                let path = generator.realization(spec.master_seed, i as u64);
                check_step(&path, cfg)?;
                m.push(&integrate_path(&path, cfg));
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let total = blocks.iter().fold(Moments::new(grid.len()), |acc, b| acc.merge(b));
    let r = total.count;
    let stderr = total
        .m2
        .iter()
        .map(|s| Complex64::new((s.re / (r - 1.0) / r).sqrt(), (s.im / (r - 1.0) / r).sqrt()))
        .collect();
    let mut mean = total.mean;
    mean[0] = Complex64::new(1.0, 0.0);
    GreenFunction::new(*grid, mean, Some(stderr), Provenance::MonteCarlo)
}

/// Exact `⟨Ĝ⟩` of the Markov model for Gaussian noise with a pointwise kernel:
/// `e^{−νt − σ_b² I(t)}`.
pub fn exact_markov_mean(k: &NoiseKernel, nu: f64, grid: &TimeGrid) -> Result<GreenFunction> {
    if !matches!(k.kind(), KernelKind::Tsallis | KernelKind::Ou) {
        return Err(invalid("kernel", format!("expected tsallis or ou, got {}", k.kind())));
    }
    let values = grid
        .times()
        .map(|t| Ok((-nu * t - k.sigma_b2() * iq(t, k)?).exp()))
        .collect::<Result<Vec<f64>>>()?;
    GreenFunction::from_real(*grid, values, Provenance::Oracle)
}

/// Exact `⟨Ĝ⟩` of the Markov model under superstatistical OU noise: the
/// conditional OU average `e^{−σ_b² t² φ(λt)}` integrated against the gamma
/// law of `λ`, times `e^{−νt}`.
pub fn exact_compound_markov_mean(g: GammaParams, sigma_b2: f64, nu: f64, grid: &TimeGrid) -> Result<GreenFunction> {
    if !(sigma_b2.is_finite() && sigma_b2 >= 0.0) {
        return Err(invalid("sigma_b2", format!("must be non-negative, got {sigma_b2}")));
    }
    let opts = QuadOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        max_intervals: 4000,
    };
    let values = grid
        .times()
        .map(|t| {
            if t == 0.0 || sigma_b2 == 0.0 {
                return Ok((-nu * t).exp());
            }
            let e = gamma_expectation(|l| (-sigma_b2 * t * t * ou_phase_shape(l * t)).exp(), g, opts)?;
            if e.error > 1e-8 {
                return Err(Error::Quadrature {
                    lo: 0.0,
                    hi: f64::INFINITY,
                    estimate: e.value,
                    error: e.error,
                });
            }
            Ok((-nu * t).exp() * e.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    GreenFunction::from_real(*grid, values, Provenance::Oracle)
}
