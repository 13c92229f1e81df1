//! Fixed-Talbot numerical inversion of Laplace transforms.
//!
//! The contour `s(θ) = rθ(cot θ + i)`, `θ ∈ (−π, π)`, is sampled at
//! `θ_k = kπ/M`. The contour crosses the imaginary axis at `±irπ/2`, and
//! the radius is `r = max(2M/(5t), ω)`. The floor `ω` keeps oscillatory
//! singularities inside the contour once `t` exceeds roughly `2M/(5ω)`;
//! poles on the imaginary axis at `±ih` need `ω ≥ h`. A larger floor costs
//! accuracy, since rounding in the transform is amplified by `e^{rt}`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Agreement required between the two node counts: `|a − b| ≤ tol·(1 + |a|)`.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalbotOptions {
    pub nodes: usize,
    /// floor on the contour radius
    pub omega: f64,
    /// abscissa shift `a`: the transform is evaluated at `s + a`
    pub shift: f64,
}

impl Default for TalbotOptions {
    fn default() -> Self {
        Self {
            nodes: 32,
            omega: 0.0,
            shift: 0.0,
        }
    }
}

/// Talbot approximation of `f(t)` from its transform `F`.
pub fn talbot<F>(transform: &F, t: f64, opts: &TalbotOptions) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("inversion needs t > 0, got {t}")));
    }
    if opts.nodes < 2 {
        return Err(invalid("nodes", "need at least two contour nodes"));
    }
    let m = opts.nodes as f64;
    let r = (2.0 * m / (5.0 * t)).max(opts.omega);
    let a = Complex64::new(opts.shift, 0.0);
    let mut sum = 0.5 * (transform(Complex64::new(r, 0.0) + a)? * (r * t).exp()).re;
    for k in 1..opts.nodes {
        let theta = k as f64 * std::f64::consts::PI / m;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let slope = theta + (theta * cot - 1.0) * cot;
        sum += ((s * t).exp() * transform(s + a)? * Complex64::new(1.0, slope)).re;
    }
    Ok(r / m * sum * (opts.shift * t).exp())
}

/// Inverts `F` at each `t > 0` with `opts.nodes` nodes, cross-checked
/// against `1.5 × opts.nodes` nodes.
pub fn invert_laplace<F>(transform: F, times: &[f64], opts: &TalbotOptions) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let fine = TalbotOptions {
        nodes: opts.nodes * 3 / 2,
        ..*opts
    };
    times
        .iter()
        .map(|&t| {
            let coarse = talbot(&transform, t, opts)?;
            let check = talbot(&transform, t, &fine)?;
            if !((coarse - check).abs() <= CONVERGENCE_TOL * (1.0 + coarse.abs())) {
                return Err(Error::Inversion { t, coarse, fine: check });
            }
            Ok(coarse)
        })
        .collect()
}
