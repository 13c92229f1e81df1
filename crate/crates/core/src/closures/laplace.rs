//! Laplace-domain closures.
//!
//! The perturbative closures have closed forms,
//! `𝒥(p) = 1/(p + σ²/(p + λ))` and
//! `𝒢(p) = 1/(p + ν/p + σ²(p + λ)/((p + λ)² + ν))`.
//! The DIA closures are shifted functional equations,
//! `𝒥(p) = 1/(p + σ² 𝒥(p + λ))` and `𝒢(p) = 1/(p + ν/p + σ² 𝒢(p + λ))`,
//! evaluated as continued fractions from a deep tail seeded with the
//! noise-free transform. With a white-noise kernel both methods reduce to
//! `1/(p + σ²/λ)` and `p/(p² + (σ²/λ) p + ν)`.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelKind;
use crate::oscillator::Model;

use super::ClosureProblem;

/// Denominators smaller than this are reported as poles.
pub const POLE_TOL: f64 = 1e-12;

/// Relaxation weight of the `λ = 0` fixed-point iteration.
pub const FIXED_POINT_DAMPING: f64 = 0.5;

const FIXED_POINT_TOL: f64 = 1e-15;
const FIXED_POINT_MAX_ITER: usize = 100_000;

fn inv(d: Complex64, p: Complex64) -> Result<Complex64> {
    if d.norm() < POLE_TOL {
        return Err(Error::NearPole { p });
    }
    Ok(d.inv())
}

fn white_transform(prob: &ClosureProblem, p: Complex64) -> Result<Complex64> {
    let b = prob.sigma2() / prob.lambda();
    match prob.model() {
        Model::Markov => inv(p + b, p),
        _ => Ok(p * inv(p * p + b * p + prob.nu(), p)?),
    }
}

/// Closed-form perturbative transform: `𝒥(p)` (Markov) or `𝒢(p)` (non-Markov).
pub fn laplace_perturbative(prob: &ClosureProblem, p: Complex64) -> Result<Complex64> {
    if prob.kernel().kind() == KernelKind::White {
        return white_transform(prob, p);
    }
    let (s2, lam, nu) = (prob.sigma2(), prob.lambda(), prob.nu());
    let pl = p + lam;
    match prob.model() {
        Model::Markov => inv(p + s2 * inv(pl, p)?, p),
        _ => inv(p + nu * inv(p, p)? + s2 * pl * inv(pl * pl + nu, p)?, p),
    }
}

/// Truncation depth for the shifted recursion at `p`: the smallest count
/// that carries the argument past `10³ σ`.
pub fn dia_depth(prob: &ClosureProblem, p: Complex64) -> usize {
    let reach = 1e3 * prob.sigma() - p.re;
    ((reach / prob.lambda()).ceil().max(1.0)) as usize
}

/// One DIA transform value together with the recursion depth used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplacePoint {
    pub p: Complex64,
    pub value: Complex64,
    pub depth: usize,
}

/// DIA transform at `p`: `𝒥(p)` (Markov) or `𝒢(p)` (non-Markov).
///
/// `depth = None` uses [`dia_depth`]. For `λ = 0` the functional equation
/// is a fixed point, solved by damped iteration from the noise-free value;
/// the reported depth is then the iteration count.
pub fn laplace_dia(prob: &ClosureProblem, p: Complex64, depth: Option<usize>) -> Result<LaplacePoint> {
    if prob.kernel().kind() == KernelKind::White {
        return Ok(LaplacePoint {
            p,
            value: white_transform(prob, p)?,
            depth: 1,
        });
    }
    let (s2, lam, nu) = (prob.sigma2(), prob.lambda(), prob.nu());
    let free = |x: Complex64| -> Result<Complex64> {
        match prob.model() {
            Model::Markov => Ok(x),
            _ => Ok(x + nu * inv(x, p)?),
        }
    };

    if lam == 0.0 {
        let base = free(p)?;
        let mut x = inv(base + prob.sigma(), p)?;
        for it in 1..=FIXED_POINT_MAX_ITER {
            let next = (1.0 - FIXED_POINT_DAMPING) * x + FIXED_POINT_DAMPING * inv(base + s2 * x, p)?;
            if !(next.re.is_finite() && next.im.is_finite()) {
                break;
            }
            let done = (next - x).norm() <= FIXED_POINT_TOL * next.norm().max(1e-300);
            x = next;
            if done {
                return Ok(LaplacePoint { p, value: x, depth: it });
            }
        }
        return Err(Error::Divergence {
            p,
            iterations: FIXED_POINT_MAX_ITER,
        });
    }

    let depth = depth.unwrap_or_else(|| dia_depth(prob, p));
    if depth == 0 {
        return Err(invalid("depth", "recursion depth must be at least 1"));
    }
    let mut value = inv(free(p + depth as f64 * lam)?, p)?;
    for k in (0..depth).rev() {
        let pk = p + k as f64 * lam;
        value = inv(free(pk)? + s2 * value, pk)?;
    }
    Ok(LaplacePoint { p, value, depth })
}

/// Transform values on a set of abscissae.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceSolution {
    pub abscissae: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub depth: Vec<usize>,
}

impl LaplaceSolution {
    /// Evaluates the closure of `prob` at each abscissa.
    pub fn evaluate(prob: &ClosureProblem, abscissae: &[Complex64]) -> Result<Self> {
        let mut values = Vec::with_capacity(abscissae.len());
        let mut depth = Vec::with_capacity(abscissae.len());
        for &p in abscissae {
            let (v, d) = match prob.method() {
                super::Method::Perturbative => (laplace_perturbative(prob, p)?, 1),
                super::Method::Dia => {
                    let pt = laplace_dia(prob, p, None)?;
                    (pt.value, pt.depth)
                }
            };
            values.push(v);
            depth.push(d);
        }
        Ok(Self {
            abscissae: abscissae.to_vec(),
            values,
            depth,
        })
    }

    /// `max |p·value − 1|` over the two abscissae of largest modulus; the
    /// transforms all behave as `1/p` at infinity.
    pub fn asymptote_residual(&self) -> f64 {
        let mut idx: Vec<usize> = (0..self.abscissae.len()).collect();
        idx.sort_by(|a, b| self.abscissae[*b].norm().total_cmp(&self.abscissae[*a].norm()));
        idx.iter()
            .take(2)
            .map(|&i| (self.abscissae[i] * self.values[i] - 1.0).norm())
            .fold(0.0, f64::max)
    }

    /// CSV with header `re_p,im_p,re_val,im_val,depth`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "re_p,im_p,re_val,im_val,depth")?;
        for ((p, v), d) in self.abscissae.iter().zip(&self.values).zip(&self.depth) {
            writeln!(w, "{},{},{},{},{}", p.re, p.im, v.re, v.im, d)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closures::Method;
    use crate::kernels::NoiseKernel;
    use crate::oscillator::OscillatorConfig;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn problem(method: Method, s2: f64, lam: f64, cfg: OscillatorConfig) -> ClosureProblem {
        ClosureProblem::new(method, NoiseKernel::ou(s2, lam).unwrap(), cfg).unwrap()
    }

    #[test]
    fn perturbative_examples() {
        let markov = OscillatorConfig::markov(0.0).unwrap();
        let prob = problem(Method::Perturbative, 1.0, 0.0, markov);
        assert!((laplace_perturbative(&prob, c(1.0)).unwrap() - 0.5).norm() < 1e-15);
        let prob = problem(Method::Perturbative, 1.0, 0.3, markov);
        let v = laplace_perturbative(&prob, c(1e3)).unwrap();
        assert!((v * 1e3 - 1.0).norm() < 1e-5);

        let nm = OscillatorConfig::non_markov(2.0).unwrap();
        let prob = problem(Method::Perturbative, 1e-300, 0.0, nm);
        let p = Complex64::new(0.7, 1.3);
        assert!((laplace_perturbative(&prob, p).unwrap() - p / (p * p + 2.0)).norm() < 1e-15);
        assert!(matches!(
            laplace_perturbative(&prob, c(0.0)),
            Err(Error::NearPole { .. })
        ));
    }

    #[test]
    fn dia_fixed_point_at_origin() {
        let prob = problem(Method::Dia, 1.0, 0.0, OscillatorConfig::markov(0.0).unwrap());
        let v = laplace_dia(&prob, c(0.0), None).unwrap().value;
        assert!((v - 1.0).norm() < 1e-9);
        let p = Complex64::new(0.3, 1.1);
        let v = laplace_dia(&prob, p, None).unwrap().value;
        let exact = (-p + (p * p + 4.0).sqrt()) / 2.0;
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn dia_depth_convergence() {
        let prob = problem(Method::Dia, 1.0, 1.0, OscillatorConfig::markov(0.0).unwrap());
        let base = laplace_dia(&prob, c(1.0), None).unwrap();
        assert!(base.depth >= 40);
        let deeper = laplace_dia(&prob, c(1.0), Some(base.depth + 10)).unwrap();
        assert!((base.value - deeper.value).norm() <= 1e-10 * base.value.norm());
    }

    #[test]
    fn dia_noise_free_non_markov() {
        let prob = problem(Method::Dia, 1e-300, 0.5, OscillatorConfig::non_markov(3.0).unwrap());
        let p = Complex64::new(0.4, -2.0);
        let v = laplace_dia(&prob, p, None).unwrap().value;
        assert!((v - p / (p * p + 3.0)).norm() < 1e-14);
    }

    #[test]
    fn shift_identity_residual() {
        let prob = problem(Method::Dia, 1.0, 0.2, OscillatorConfig::markov(0.0).unwrap());
        for p in [c(0.5), Complex64::new(0.1, 2.0), Complex64::new(-1.0, 5.0)] {
            let a = laplace_dia(&prob, p, None).unwrap();
            let b = laplace_dia(&prob, p + 0.2, Some(a.depth - 1)).unwrap();
            assert!((a.value * (p + b.value) - 1.0).norm() <= 1e-9);
        }
    }

    #[test]
    fn solution_csv_and_asymptote() {
        let prob = problem(Method::Dia, 1.0, 0.5, OscillatorConfig::markov(0.0).unwrap());
        let ps = [c(1.0), c(1e3), c(1e4)];
        let sol = LaplaceSolution::evaluate(&prob, &ps).unwrap();
        assert!(sol.asymptote_residual() < 1e-5);
        assert!(sol.depth.iter().all(|d| *d >= 1));
        let mut buf = Vec::new();
        sol.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("re_p,im_p,re_val,im_val,depth\n1,0,"));
    }
}
