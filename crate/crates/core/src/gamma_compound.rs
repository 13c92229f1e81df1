//! Gamma-distributed inverse autocorrelation time and superstatistical
//! compounding of the Ornstein-Uhlenbeck autocovariance.
//!
//! With the rate `λ ~ Gamma(shape c, scale a)` the conditional autocovariance
//! `σ_b² e^{−λτ}` averages to `σ_b² (1 + aτ)^{−c}`, which is exactly the
//! q-exponential `σ_b² e_q^{−λ₀τ}` with `λ₀ = ac` and `q = 1 + 1/c`.
//!
//! Two variances appear here and they are kept apart: `sigma_lambda2` is the
//! variance of the rate, `sigma_b2` the variance of the noise itself.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::qcore::{q_exp, QIndex};
use crate::quad::{integrate_pieces, Estimate, QuadOptions};

/// Half-width of the quadrature window, in standard deviations of the rate.
const WINDOW_SDS: f64 = 40.0;

/// Scale `a` (1/time) and shape `c` of the rate distribution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GammaParams {
    a: f64,
    c: f64,
}

impl GammaParams {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid("a", format!("scale must be positive, got {a}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid("c", format!("shape must be positive, got {c}")));
        }
        Ok(Self { a, c })
    }

    /// Gamma law whose compound autocovariance is `e_q^{−λ₀τ}`, for `q > 1`.
    pub fn from_tsallis(q: QIndex, lambda0: f64) -> Result<Self> {
        if q.q() <= 1.0 || q.is_extensive() {
            return Err(invalid("q", format!("compounding requires q > 1, got {}", q.q())));
        }
        let c = 1.0 / (q.q() - 1.0);
        Self::new(lambda0 / c, c)
    }

    pub fn scale(&self) -> f64 {
        self.a
    }

    pub fn shape(&self) -> f64 {
        self.c
    }

    /// `λ₀ = a c`.
    pub fn mean(&self) -> f64 {
        self.a * self.c
    }

    /// `a² c`.
    pub fn variance(&self) -> f64 {
        self.a * self.a * self.c
    }

    pub fn moments(&self) -> RateMoments {
        RateMoments {
            lambda0: self.mean(),
            sigma_lambda2: self.variance(),
        }
    }

    pub fn q_index(&self) -> QIndex {
        q_from_shape(self.c).expect("shape is validated positive")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateMoments {
    pub lambda0: f64,
    pub sigma_lambda2: f64,
}

impl RateMoments {
    pub fn new(lambda0: f64, sigma_lambda2: f64) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(invalid("lambda0", format!("must be positive, got {lambda0}")));
        }
        if !(sigma_lambda2.is_finite() && sigma_lambda2 > 0.0) {
            return Err(invalid(
                "sigma_lambda2",
                format!("must be positive, got {sigma_lambda2}"),
            ));
        }
        Ok(Self { lambda0, sigma_lambda2 })
    }
}

/// `a = σ_λ²/λ₀`, `c = λ₀²/σ_λ²`.
pub fn params_from_moments(m: RateMoments) -> Result<GammaParams> {
    GammaParams::new(m.sigma_lambda2 / m.lambda0, m.lambda0 * m.lambda0 / m.sigma_lambda2)
}

/// `q = 1 + 1/c`.
pub fn q_from_shape(c: f64) -> Result<QIndex> {
    if !(c > 0.0) {
        return Err(invalid("c", format!("shape must be positive, got {c}")));
    }
    QIndex::new(1.0 + 1.0 / c)
}

/// Remainder of Stirling's formula, `ln Γ(c) − [(c − ½) ln c − c + ½ ln 2π]`.
fn stirling_remainder(c: f64) -> f64 {
    if c >= 10.0 {
        let r = 1.0 / c;
        let r2 = r * r;
        r * (1.0 / 12.0
            - r2 * (1.0 / 360.0
                - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0 - r2 * 691.0 / 360_360.0)))))
    } else {
        ln_gamma(c) - ((c - 0.5) * c.ln() - c + 0.5 * (2.0 * std::f64::consts::PI).ln())
    }
}

/// Density of the rate, `(1/(aΓ(c))) (λ/a)^{c−1} e^{−λ/a}`.
///
/// Evaluated relative to the mean so that the large-`c` regime keeps full
/// relative precision.
pub fn gamma_pdf(lambda: f64, g: GammaParams) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Domain(format!("gamma_pdf requires λ ≥ 0, got {lambda}")));
    }
    let (a, c) = (g.a, g.c);
    if lambda == 0.0 {
        return Ok(match c.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => 1.0 / a,
            _ => 0.0,
        });
    }
    let lambda0 = g.mean();
    let u = lambda / lambda0;
    let d = u - 1.0;
    let log_f = 0.5 * c.ln() - lambda0.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - stirling_remainder(c) - u.ln()
        + c * (d.ln_1p() - d);
    Ok(log_f.exp())
}

/// Draws a rate from the gamma law.
pub fn sample_rate<R: Rng + ?Sized>(rng: &mut R, g: GammaParams) -> f64 {
    Gamma::new(g.c, g.a).expect("validated gamma parameters").sample(rng)
}

/// Chernoff bound on the gamma mass outside `[lo, hi]`.
fn tail_mass_bound(g: GammaParams, lo: f64, hi: f64) -> f64 {
    let lambda0 = g.mean();
    let side = |x: f64| {
        let u = x / lambda0;
        (g.c * (u.ln() - u + 1.0)).exp()
    };
    let upper = side(hi);
    let lower = if lo > 0.0 { side(lo) } else { 0.0 };
    upper + lower
}

/// `E[probe(λ)]` under the gamma law, by adaptive Gauss-Kronrod on
/// `[max(0, λ₀ − 40 sd), λ₀ + 40 sd]`.
///
/// For `c < 1` the substitution `λ = w^{1/c}` removes the integrable
/// singularity at the origin. The reported error includes the tail bound
/// scaled by the probe magnitude at the window edges.
pub fn gamma_expectation<F: Fn(f64) -> f64>(probe: F, g: GammaParams, opts: QuadOptions) -> Result<Estimate> {
    let lambda0 = g.mean();
    let sd = g.variance().sqrt();
    let hi = lambda0 + WINDOW_SDS * sd;
    let lo = (lambda0 - WINDOW_SDS * sd).max(0.0);

    let mut est = if g.c < 1.0 {
        let inv_c = 1.0 / g.c;
        let norm = (-(g.c * g.a.ln() + ln_gamma(g.c + 1.0))).exp();
        let w = |w: f64| {
            let lambda = w.powf(inv_c);
            probe(lambda) * norm * (-lambda / g.a).exp()
        };
        integrate_pieces(w, &[lo.powf(g.c), lambda0.powf(g.c), hi.powf(g.c)], opts)?
    } else {
        let f = |lambda: f64| probe(lambda) * gamma_pdf(lambda, g).expect("window is non-negative");
        integrate_pieces(f, &[lo, lambda0, hi], opts)?
    };
    let edge = probe(lo).abs().max(probe(hi).abs());
    est.error += tail_mass_bound(g, lo, hi) * edge;
    Ok(est)
}

/// Compound (marginal) autocovariance `σ_b² / (1 + aτ)^c`.
pub fn marginal_autocorr(tau: f64, sigma_b2: f64, g: GammaParams) -> f64 {
    sigma_b2 * (-g.c * (g.a * tau).ln_1p()).exp()
}

/// The same compound autocovariance written as `σ_b² e_q^{−λ₀τ}`.
pub fn marginal_autocorr_qexp(tau: f64, sigma_b2: f64, g: GammaParams) -> f64 {
    sigma_b2 * q_exp(-g.mean() * tau, g.q_index())
}

/// Compound autocovariance by direct quadrature of `∫ σ_b² e^{−λτ} f(λ) dλ`.
pub fn marginal_autocorr_quadrature(tau: f64, sigma_b2: f64, g: GammaParams) -> Result<Estimate> {
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        ..QuadOptions::default()
    };
    let e = gamma_expectation(|l| (-l * tau).exp(), g, opts)?;
    Ok(Estimate {
        value: sigma_b2 * e.value,
        error: sigma_b2 * e.error,
    })
}

/// `|∫ probe(λ) f(λ; c) dλ − probe(λ₀)|` for the gamma law of mean `λ₀` and shape `c`.
///
/// The difference `probe(λ) − probe(λ₀)` is integrated directly so that the
/// shrinking error is not swamped by cancellation against `probe(λ₀)`.
/// A secant slope `k` is also subtracted through the zero-mean control
/// variate `k(λ − λ₀)`, which removes the rounding bias of the odd part.
pub fn delta_limit_error<F: Fn(f64) -> f64>(lambda0: f64, c: f64, probe: F) -> Result<f64> {
    if !(lambda0 > 0.0) {
        return Err(invalid("lambda0", format!("must be positive, got {lambda0}")));
    }
    let g = GammaParams::new(lambda0 / c, c)?;
    let at_mean = probe(lambda0);
    let h = g.variance().sqrt();
    let slope = if h < lambda0 {
        (probe(lambda0 + h) - probe(lambda0 - h)) / (2.0 * h)
    } else {
        (probe(lambda0 + h) - at_mean) / h
    };
    let slope = if slope.is_finite() { slope } else { 0.0 };
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        max_intervals: 20_000,
    };
    let e = gamma_expectation(|l| probe(l) - at_mean - slope * (l - lambda0), g, opts)?;
    Ok(e.value.abs())
}
