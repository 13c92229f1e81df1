//! q-deformed calculus and Tsallis entropy.
//!
//! All functions take the entropic index as a [`QIndex`]. Near `q = 1`
//! (|1 − q| < [`Q_ONE_WINDOW`]) the ordinary exponential and logarithm are
//! used directly; elsewhere the q-functions are evaluated through
//! `ln_1p`/`exp_m1` so that they stay accurate as `q` approaches one.

use crate::error::{invalid, Error, Result};

/// Width of the window around `q = 1` in which the Boltzmann-Gibbs branch is used.
pub const Q_ONE_WINDOW: f64 = 1e-8;

/// Tolerance on `Σ p = 1` accepted by [`DiscreteDistribution::new`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Entropic index `q` together with `ell = 1 − q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QIndex {
    q: f64,
    ell: f64,
}

impl QIndex {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(invalid("q", format!("must be finite, got {q}")));
        }
        Ok(Self { q, ell: 1.0 - q })
    }

    /// The extensive (Boltzmann-Gibbs) index.
    pub const fn one() -> Self {
        Self { q: 1.0, ell: 0.0 }
    }

    pub fn q(self) -> f64 {
        self.q
    }

    /// `1 − q`.
    pub fn ell(self) -> f64 {
        self.ell
    }

    /// True when the Boltzmann-Gibbs branch is selected.
    pub fn is_extensive(self) -> bool {
        self.ell.abs() < Q_ONE_WINDOW
    }
}

/// A finite probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    p: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Degenerate("distribution has no states".into()));
        }
        if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(invalid(
                "p",
                format!("probabilities must be finite and non-negative, got {bad}"),
            ));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(invalid("p", format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { p })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(invalid(
                "weights",
                format!("must be finite and non-negative, got {bad}"),
            ));
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(Error::Degenerate("all weights vanish".into()));
        }
        Self::new(w.iter().map(|x| x / total).collect())
    }

    pub fn uniform(states: usize) -> Result<Self> {
        if states == 0 {
            return Err(Error::Degenerate("distribution has no states".into()));
        }
        Ok(Self {
            p: vec![1.0 / states as f64; states],
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Joint distribution of two independent systems, `p_ij = a_i b_j`.
    pub fn product(&self, other: &Self) -> Self {
        let p = self.p.iter().flat_map(|a| other.p.iter().map(move |b| a * b)).collect();
        Self { p }
    }
}

/// q-exponential `[1 + (1 − q) x]^{1/(1 − q)}`, cut off to zero where the base is non-positive.
pub fn q_exp(x: f64, q: QIndex) -> f64 {
    if q.is_extensive() {
        return x.exp();
    }
    let ell = q.ell();
    let shift = ell * x;
    if 1.0 + shift <= 0.0 {
        return 0.0;
    }
    (shift.ln_1p() / ell).exp()
}

/// q-logarithm `(x^{1 − q} − 1)/(1 − q)`.
pub fn q_log(x: f64, q: QIndex) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("q_log requires x > 0, got {x}")));
    }
    if q.is_extensive() {
        return Ok(x.ln());
    }
    let ell = q.ell();
    Ok((ell * x.ln()).exp_m1() / ell)
}

/// Tsallis entropy with `k_B = 1`, evaluated as the mean q-surprise `Σ p ln_q(1/p)`.
///
/// States with `p = 0` contribute nothing.
pub fn tsallis_entropy(d: &DiscreteDistribution, q: QIndex) -> f64 {
    let s: f64 = d
        .probabilities()
        .iter()
        .filter(|p| **p > 0.0)
        .map(|&p| p * q_log(1.0 / p, q).expect("1/p is positive"))
        .sum();
    // rounding can leave a -0.0 or -1e-17 for a certain outcome
    s.max(0.0)
}

/// Escort distribution `P_i = p_i^q / Σ_j p_j^q`.
pub fn escort_probabilities(d: &DiscreteDistribution, q: QIndex) -> Result<DiscreteDistribution> {
    if q.is_extensive() {
        return Ok(d.clone());
    }
    let weights: Vec<f64> = d
        .probabilities()
        .iter()
        .map(|&p| if p > 0.0 { p.powf(q.q()) } else { 0.0 })
        .collect();
    DiscreteDistribution::from_weights(&weights)
}

fn maxent_weights(energies: &[f64], beta: f64, q: QIndex) -> Result<Vec<f64>> {
    if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
        return Err(invalid("energies", format!("must be finite, got {e}")));
    }
    if !beta.is_finite() {
        return Err(invalid("beta", format!("must be finite, got {beta}")));
    }
    Ok(energies.iter().map(|&e| q_exp(-beta * e, q)).collect())
}

/// Partition value `Z_q = Σ_i e_q^{−β E_i}`.
pub fn partition_function(energies: &[f64], beta: f64, q: QIndex) -> Result<f64> {
    Ok(maxent_weights(energies, beta, q)?.iter().sum())
}

/// Maximum-entropy distribution `p̄_i ∝ [1 − (1 − q) β E_i]^{1/(1 − q)}`.
///
/// States whose base is non-positive are cut off (`p̄_i = 0`).
pub fn maxent_distribution(energies: &[f64], beta: f64, q: QIndex) -> Result<DiscreteDistribution> {
    let w = maxent_weights(energies, beta, q)?;
    if w.iter().all(|x| *x == 0.0) {
        return Err(Error::Degenerate("every state is cut off".into()));
    }
    DiscreteDistribution::from_weights(&w)
}
