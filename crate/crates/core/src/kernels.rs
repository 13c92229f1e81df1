//! Autocovariance kernels of the driving noise and the double integral
//! `I(t) = ½∬₀ᵗ g(t′ − t″) dt′ dt″ = ∫₀ᵗ (t − τ) g(τ) dτ` of the
//! unit-variance kernel `g`.

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::qcore::{q_exp, QIndex};
use crate::quad::{integrate_pieces, Estimate, QuadOptions};

/// Half-width of the window around `q ∈ {3/2, 2}` in which the closed form
/// of `I_q` is replaced by quadrature.
pub const SINGULAR_Q_WINDOW: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `σ_b² e^{−λ₀τ}`
    Ou,
    /// `σ_b² e_q^{−λ₀τ}`
    Tsallis,
    /// `σ_b² max(0, 1 − λ₀τ)`
    LinearSmallLambda,
    /// `(σ_b²/λ₀) δ(τ)`
    White,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KernelKind::Ou => "ou",
            KernelKind::Tsallis => "tsallis",
            KernelKind::LinearSmallLambda => "linear-small-lambda",
            KernelKind::White => "white",
        };
        f.write_str(s)
    }
}

/// Stationary autocovariance of the noise `b(t)`.
///
/// `lambda0 = 0` is accepted for the pointwise kinds and describes frozen
/// noise (a constant kernel).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseKernel {
    kind: KernelKind,
    sigma_b2: f64,
    lambda0: f64,
    q: f64,
}

impl NoiseKernel {
    fn build(kind: KernelKind, sigma_b2: f64, lambda0: f64, q: f64) -> Result<Self> {
        if !(sigma_b2.is_finite() && sigma_b2 > 0.0) {
            return Err(invalid("sigma_b2", format!("must be positive, got {sigma_b2}")));
        }
        if !(lambda0.is_finite() && lambda0 >= 0.0) {
            return Err(invalid("lambda0", format!("must be non-negative, got {lambda0}")));
        }
        if kind == KernelKind::White && lambda0 == 0.0 {
            return Err(invalid("lambda0", "white-noise weight needs lambda0 > 0"));
        }
        QIndex::new(q)?;
        Ok(Self {
            kind,
            sigma_b2,
            lambda0,
            q,
        })
    }

    pub fn ou(sigma_b2: f64, lambda0: f64) -> Result<Self> {
        Self::build(KernelKind::Ou, sigma_b2, lambda0, 1.0)
    }

    pub fn tsallis(sigma_b2: f64, lambda0: f64, q: QIndex) -> Result<Self> {
        Self::build(KernelKind::Tsallis, sigma_b2, lambda0, q.q())
    }

    pub fn linear_small_lambda(sigma_b2: f64, lambda0: f64) -> Result<Self> {
        Self::build(KernelKind::LinearSmallLambda, sigma_b2, lambda0, 1.0)
    }

    pub fn white(sigma_b2: f64, lambda0: f64) -> Result<Self> {
        Self::build(KernelKind::White, sigma_b2, lambda0, 1.0)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn sigma_b2(&self) -> f64 {
        self.sigma_b2
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Entropic index; `q = 1` for every kind but `tsallis`.
    pub fn q(&self) -> QIndex {
        QIndex::new(self.q).expect("validated at construction")
    }

    pub fn is_pointwise(&self) -> bool {
        self.kind != KernelKind::White
    }

    /// Lag beyond which the kernel vanishes identically, if any.
    pub fn support_end(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Tsallis if self.q < 1.0 && self.lambda0 > 0.0 => Some(1.0 / (self.lambda0 * (1.0 - self.q))),
            KernelKind::LinearSmallLambda if self.lambda0 > 0.0 => Some(1.0 / self.lambda0),
            _ => None,
        }
    }

    /// Unit-variance kernel `g(|τ|)`.
    pub fn unit(&self, tau: f64) -> Result<f64> {
        let x = self.lambda0 * tau.abs();
        match self.kind {
            KernelKind::Ou => Ok((-x).exp()),
            KernelKind::Tsallis => Ok(q_exp(-x, self.q())),
            KernelKind::LinearSmallLambda => Ok((1.0 - x).max(0.0)),
            KernelKind::White => Err(Error::Distributional),
        }
    }
}

/// Autocovariance at lag `τ`; the kernel is extended evenly to `τ < 0`.
pub fn eval_kernel(k: &NoiseKernel, tau: f64) -> Result<f64> {
    Ok(k.sigma_b2 * k.unit(tau)?)
}

/// Coefficient of `δ(τ)` in the large-`λ₀` approximation, `σ_b²/λ₀`.
pub fn white_noise_weight(k: &NoiseKernel) -> Result<f64> {
    if !(k.lambda0 > 0.0) {
        return Err(invalid("lambda0", "white-noise weight needs lambda0 > 0"));
    }
    Ok(k.sigma_b2 / k.lambda0)
}

/// `(x − 1 + e^{−x})/x²`, accurate down to `x = 0`.
pub(crate) fn ou_phase_shape(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // alternating series Σ (−x)^k / (k+2)!
        let mut term = 0.5;
        let mut sum = 0.0;
        for k in 0..8 {
            sum += term;
            term *= -x / (k as f64 + 3.0);
        }
        sum
    } else {
        (x + (-x).exp_m1()) / (x * x)
    }
}

fn near_singular_q(q: f64) -> bool {
    (q - 2.0).abs() < SINGULAR_Q_WINDOW || (q - 1.5).abs() < SINGULAR_Q_WINDOW
}

/// Closed form of `I_q(t)` for the unit-variance q-exponential kernel.
///
/// Falls back to [`iq_quadrature`] within [`SINGULAR_Q_WINDOW`] of `q = 3/2`
/// and `q = 2`, where the denominators `1 + 2ℓ` and `1 + ℓ` vanish.
pub fn iq_closed_form(t: f64, q: QIndex, lambda0: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be non-negative, got {t}")));
    }
    if !(lambda0 >= 0.0) {
        return Err(invalid("lambda0", format!("must be non-negative, got {lambda0}")));
    }
    let x = lambda0 * t;
    if x == 0.0 {
        return Ok(0.5 * t * t);
    }
    if q.is_extensive() {
        return Ok(t * t * ou_phase_shape(x));
    }
    if near_singular_q(q.q()) {
        let k = NoiseKernel::tsallis(1.0, lambda0, q)?;
        return Ok(iq_quadrature(t, &k)?.value);
    }
    let ell = q.ell();
    if x < 1e-4 {
        // Taylor series; the closed form cancels catastrophically here
        return Ok(t * t * (0.5 - x / 6.0 + x * x * (1.0 - ell) / 24.0));
    }
    let base = 1.0 - ell * x;
    let power = if base <= 0.0 {
        0.0
    } else {
        ((1.0 / ell + 2.0) * (-ell * x).ln_1p()).exp()
    };
    let d1 = 1.0 + ell;
    let d2 = 1.0 + 2.0 * ell;
    Ok(t / (lambda0 * d1) + (power - 1.0) / (lambda0 * lambda0 * d1 * d2))
}

/// `∫₀ᵗ (t − τ) g(τ) dτ` for the unit-variance version of `kernel`, by
/// adaptive quadrature (absolute tolerance 1e-10 or better).
pub fn iq_quadrature(t: f64, kernel: &NoiseKernel) -> Result<Estimate> {
    if !kernel.is_pointwise() {
        return Err(Error::Distributional);
    }
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be non-negative, got {t}")));
    }
    let mut breaks = vec![0.0];
    if let Some(end) = kernel.support_end() {
        if end < t {
            breaks.push(end);
        }
    }
    breaks.push(t);
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 10_000,
    };
    let est = integrate_pieces(
        |tau| (t - tau) * kernel.unit(tau).expect("pointwise kernel"),
        &breaks,
        opts,
    )?;
    if est.error > 1e-10 {
        return Err(Error::Quadrature {
            lo: 0.0,
            hi: t,
            estimate: est.value,
            error: est.error,
        });
    }
    Ok(est)
}

/// `I(t)` for any pointwise kernel: closed forms where available, quadrature otherwise.
pub fn iq(t: f64, kernel: &NoiseKernel) -> Result<f64> {
    match kernel.kind() {
        KernelKind::Ou => iq_closed_form(t, QIndex::one(), kernel.lambda0()),
        KernelKind::Tsallis => iq_closed_form(t, kernel.q(), kernel.lambda0()),
        KernelKind::LinearSmallLambda => Ok(iq_quadrature(t, kernel)?.value),
        KernelKind::White => Err(Error::Distributional),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanParameter {
    /// vary `q` at fixed `λ₀` (expects increasing `I`, `q < 1`)
    Q,
    /// vary `λ₀` at fixed `q` (expects decreasing `I`, `q ≥ 1`)
    Lambda0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanAtTime {
    pub t: f64,
    pub values: Vec<f64>,
    pub monotone: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub parameter: ScanParameter,
    pub grid: Vec<f64>,
    pub fixed: f64,
    pub expected: Monotonicity,
    pub rows: Vec<ScanAtTime>,
    pub passed: bool,
}

/// Checks monotonicity of `I_q(t)` across `grid` at each sample time.
///
/// `fixed` is `λ₀` when scanning `q` and `q` when scanning `λ₀`.
pub fn iq_property_scan(parameter: ScanParameter, grid: &[f64], fixed: f64, times: &[f64]) -> Result<ScanReport> {
    if grid.len() < 2 {
        return Err(invalid("grid", "needs at least two points"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("grid", "must be strictly increasing"));
    }
    let expected = match parameter {
        ScanParameter::Q => {
            if grid.iter().any(|q| *q >= 1.0) {
                return Err(invalid("grid", "the q scan is defined for q < 1"));
            }
            Monotonicity::Increasing
        }
        ScanParameter::Lambda0 => {
            if fixed < 1.0 {
                return Err(invalid("q", "the lambda0 scan is defined for q >= 1"));
            }
            Monotonicity::Decreasing
        }
    };
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let values = grid
            .iter()
            .map(|&v| match parameter {
                ScanParameter::Q => iq_closed_form(t, QIndex::new(v)?, fixed),
                ScanParameter::Lambda0 => iq_closed_form(t, QIndex::new(fixed)?, v),
            })
            .collect::<Result<Vec<_>>>()?;
        let monotone = values.windows(2).all(|w| match expected {
            Monotonicity::Increasing => w[1] > w[0],
            Monotonicity::Decreasing => w[1] < w[0],
        });
        rows.push(ScanAtTime { t, values, monotone });
    }
    let passed = rows.iter().all(|r| r.monotone);
    Ok(ScanReport {
        parameter,
        grid: grid.to_vec(),
        fixed,
        expected,
        rows,
        passed,
    })
}

/// A joint path `N ↦ (ℓ(N), λ(N))` toward `ℓ → 0`, `λ → ∞`.
pub struct LimitPath {
    ell: Box<dyn Fn(u64) -> f64 + Send + Sync>,
    lambda: Box<dyn Fn(u64) -> f64 + Send + Sync>,
    description: String,
}

impl LimitPath {
    pub fn new(
        description: impl Into<String>,
        ell: impl Fn(u64) -> f64 + Send + Sync + 'static,
        lambda: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            ell: Box::new(ell),
            lambda: Box::new(lambda),
            description: description.into(),
        }
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn point(&self, n: u64) -> (f64, f64) {
        ((self.ell)(n), (self.lambda)(n))
    }
}

impl fmt::Debug for LimitPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LimitPath")
            .field("description", &self.description)
            .finish()
    }
}

/// `max{0, 1 − λ(N) ℓ(N) t}^{1/ℓ(N)}` at the path point `N`.
pub fn limit_path_value(path: &LimitPath, n: u64, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("N", "path index starts at 1"));
    }
    if !(t > 0.0) {
        return Err(invalid("t", format!("must be positive, got {t}")));
    }
    let (ell, lambda) = path.point(n);
    if ell == 0.0 {
        return Ok((-lambda * t).exp());
    }
    let shift = -lambda * ell * t;
    if 1.0 + shift <= 0.0 {
        return Ok(0.0);
    }
    Ok((shift.ln_1p() / ell).exp())
}
