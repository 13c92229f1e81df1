//! Realizations of the driving noise `b(t)` on a uniform grid.
//!
//! Three generators are provided:
//!
//! * exact Ornstein-Uhlenbeck paths with a fixed rate,
//! * superstatistical paths: one gamma-distributed rate per realization,
//!   then an exact OU path with that rate,
//! * Gaussian paths whose covariance is exactly the q-exponential kernel at
//!   grid resolution, obtained from a factorization of the covariance matrix.
//!
//! Every realization owns an independent random stream derived from
//! `(master_seed, index)`, so ensembles are reproducible regardless of how
//! realizations are scheduled across threads.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gamma_compound::{sample_rate, GammaParams};
use crate::kernels::{KernelKind, NoiseKernel};

/// Largest covariance matrix the q-exponential sampler will factor.
pub const MAX_QEXP_NODES: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        if n == 0 {
            return Err(invalid("n", "grid needs at least one step"));
        }
        Ok(Self { dt, n })
    }

    /// Grid of step `dt` reaching (the nearest multiple of `dt` to) `t_max`.
    pub fn with_horizon(dt: f64, t_max: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(invalid("t_max", format!("must be positive, got {t_max}")));
        }
        Self::new(dt, (t_max / dt).round().max(1.0) as usize)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps; the grid has `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.n)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |i| self.t(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum PathMeta {
    Ou { lambda: f64, sigma_b2: f64 },
    CompoundOu { a: f64, c: f64, lambda: f64, sigma_b2: f64 },
    GaussianQexp { q: f64, lambda0: f64, sigma_b2: f64 },
    Supplied,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    grid: TimeGrid,
    values: Vec<f64>,
    meta: PathMeta,
}

impl NoisePath {
    /// Wraps externally produced samples.
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        Self::with_meta(grid, values, PathMeta::Supplied)
    }

    fn with_meta(grid: TimeGrid, values: Vec<f64>, meta: PathMeta) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "noise samples must be finite"));
        }
        Ok(Self { grid, values, meta })
    }

    /// The identically zero path.
    pub fn zero(grid: TimeGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            meta: PathMeta::Supplied,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &PathMeta {
        &self.meta
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes the path as CSV with header `t,b`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,b")?;
        for (t, b) in self.grid.times().zip(&self.values) {
            writeln!(w, "{t},{b}")?;
        }
        Ok(())
    }
}

/// Random stream of realization `index` under `master_seed`.
pub fn realization_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn check_rate(lambda: f64, sigma_b2: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    if !(sigma_b2.is_finite() && sigma_b2 >= 0.0) {
        return Err(invalid("sigma_b2", format!("must be non-negative, got {sigma_b2}")));
    }
    Ok(())
}

fn ou_values<R: Rng + ?Sized>(rng: &mut R, lambda: f64, sigma_b2: f64, grid: &TimeGrid) -> Vec<f64> {
    let sigma = sigma_b2.sqrt();
    let decay = (-lambda * grid.dt()).exp();
    let kick = sigma * (-(-2.0 * lambda * grid.dt()).exp_m1()).sqrt();
    let mut values = Vec::with_capacity(grid.len());
    let mut b = sigma * rng.sample::<f64, _>(StandardNormal);
    values.push(b);
    for _ in 0..grid.n() {
        b = b * decay + kick * rng.sample::<f64, _>(StandardNormal);
        values.push(b);
    }
    values
}

/// Stationary OU path by exact discretization:
/// `b_{i+1} = b_i e^{−λdt} + σ_b √(1 − e^{−2λdt}) ξ_i`, `b_0 ~ N(0, σ_b²)`.
pub fn ou_path<R: Rng + ?Sized>(rng: &mut R, lambda: f64, sigma_b2: f64, grid: &TimeGrid) -> Result<NoisePath> {
    check_rate(lambda, sigma_b2)?;
    let values = ou_values(rng, lambda, sigma_b2, grid);
    NoisePath::with_meta(*grid, values, PathMeta::Ou { lambda, sigma_b2 })
}

/// One superstatistical realization: `λ ~ Gamma(g)`, then an exact OU path.
pub fn compound_ou_path<R: Rng + ?Sized>(
    rng: &mut R,
    g: GammaParams,
    sigma_b2: f64,
    grid: &TimeGrid,
) -> Result<NoisePath> {
    check_rate(1.0, sigma_b2)?;
    let lambda = sample_rate(rng, g);
    // a vanishing draw is a frozen path; keep the decay formula finite
    let lambda = lambda.max(f64::MIN_POSITIVE);
    let values = ou_values(rng, lambda, sigma_b2, grid);
    NoisePath::with_meta(
        *grid,
        values,
        PathMeta::CompoundOu {
            a: g.scale(),
            c: g.shape(),
            lambda,
            sigma_b2,
        },
    )
}

/// Outcome of factoring the q-exponential covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorReport {
    /// diagonal jitter added before the Cholesky factorization succeeded
    pub jitter: f64,
    /// eigenvalues clipped to zero when the eigendecomposition fallback was needed
    pub clipped_eigenvalues: usize,
    pub used_eigen_fallback: bool,
    /// `max |C − F Fᵀ|`
    pub residual: f64,
}

#[derive(Debug, Clone)]
enum Factor {
    /// packed rows of a lower-triangular factor
    Lower(Vec<f64>),
    /// dense row-major `V √Λ`
    Dense(Vec<f64>),
}

/// Gaussian sampler with the exact q-exponential covariance at grid nodes.
///
/// The covariance factor is computed once and reused for every path.
#[derive(Debug, Clone)]
pub struct QExpSampler {
    kernel: NoiseKernel,
    grid: TimeGrid,
    factor: Factor,
    report: FactorReport,
}

impl QExpSampler {
    /// Builds the sampler. Kernels with `q < 1` are not guaranteed positive
    /// semi-definite and are rejected unless `allow_sub_unit_q` is set.
    pub fn new(kernel: &NoiseKernel, grid: &TimeGrid, allow_sub_unit_q: bool) -> Result<Self> {
        if !matches!(kernel.kind(), KernelKind::Tsallis | KernelKind::Ou) {
            return Err(invalid(
                "kernel",
                format!("expected a tsallis kernel, got {}", kernel.kind()),
            ));
        }
        let q = kernel.q().q();
        if q < 1.0 && !allow_sub_unit_q {
            return Err(invalid("q", format!("q = {q} < 1 needs the explicit override")));
        }
        let m = grid.len();
        if m > MAX_QEXP_NODES {
            return Err(invalid(
                "grid",
                format!("{m} nodes exceeds the limit of {MAX_QEXP_NODES}"),
            ));
        }
        let s2 = kernel.sigma_b2();
        let lags: Vec<f64> = (0..m)
            .map(|k| s2 * kernel.unit(grid.t(k)).expect("pointwise kernel"))
            .collect();
        let cov = DMatrix::from_fn(m, m, |i, j| lags[i.abs_diff(j)]);
        let fail = || Error::Factorization {
            q,
            lambda0: kernel.lambda0(),
            dt: grid.dt(),
            n: grid.n(),
        };

        let tol = 1e-8 * s2;
        let mut jitter = 0.0;
        loop {
            let mut shifted = cov.clone();
            for i in 0..m {
                shifted[(i, i)] += jitter;
            }
            if let Some(ch) = shifted.cholesky() {
                let l = ch.l();
                let mut packed = Vec::with_capacity(m * (m + 1) / 2);
                for i in 0..m {
                    for j in 0..=i {
                        packed.push(l[(i, j)]);
                    }
                }
                let residual = lower_residual(&packed, &lags, m);
                if residual <= tol {
                    return Ok(Self {
                        kernel: *kernel,
                        grid: *grid,
                        factor: Factor::Lower(packed),
                        report: FactorReport {
                            jitter,
                            clipped_eigenvalues: 0,
                            used_eigen_fallback: false,
                            residual,
                        },
                    });
                }
            }
            jitter = if jitter == 0.0 { 1e-12 * s2 } else { 2.0 * jitter };
            if jitter > 1e-8 * s2 {
                break;
            }
        }

        let eig = SymmetricEigen::new(cov);
        let clipped = eig.eigenvalues.iter().filter(|v| **v < 0.0).count();
        let roots: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
        let mut dense = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                dense[i * m + j] = eig.eigenvectors[(i, j)] * roots[j];
            }
        }
        let residual = dense_residual(&dense, &lags, m);
        if residual > tol {
            return Err(fail());
        }
        log::warn!("q-exponential covariance needed eigenvalue clipping ({clipped} clipped, q = {q})");
        Ok(Self {
            kernel: *kernel,
            grid: *grid,
            factor: Factor::Dense(dense),
            report: FactorReport {
                jitter: 0.0,
                clipped_eigenvalues: clipped,
                used_eigen_fallback: true,
                residual,
            },
        })
    }

    pub fn report(&self) -> &FactorReport {
        &self.report
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NoisePath {
        let m = self.grid.len();
        let xi: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let mut values = vec![0.0; m];
        match &self.factor {
            Factor::Lower(packed) => {
                let mut start = 0;
                for (i, v) in values.iter_mut().enumerate() {
                    let row = &packed[start..start + i + 1];
                    *v = row.iter().zip(&xi).map(|(a, b)| a * b).sum();
                    start += i + 1;
                }
            }
            Factor::Dense(dense) => {
                for (i, v) in values.iter_mut().enumerate() {
                    *v = dense[i * m..(i + 1) * m].iter().zip(&xi).map(|(a, b)| a * b).sum();
                }
            }
        }
        NoisePath {
            grid: self.grid,
            values,
            meta: PathMeta::GaussianQexp {
                q: self.kernel.q().q(),
                lambda0: self.kernel.lambda0(),
                sigma_b2: self.kernel.sigma_b2(),
            },
        }
    }
}

fn lower_residual(packed: &[f64], lags: &[f64], m: usize) -> f64 {
    let row = |i: usize| &packed[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let ri = row(i);
        for j in 0..=i {
            let rj = row(j);
            let dot: f64 = ri[..=j].iter().zip(rj).map(|(a, b)| a * b).sum();
            worst = worst.max((dot - lags[i - j]).abs());
        }
    }
    worst
}

fn dense_residual(dense: &[f64], lags: &[f64], m: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..=i {
            let dot: f64 = dense[i * m..(i + 1) * m]
                .iter()
                .zip(&dense[j * m..(j + 1) * m])
                .map(|(a, b)| a * b)
                .sum();
            worst = worst.max((dot - lags[i - j]).abs());
        }
    }
    worst
}

/// Gaussian path with the q-exponential covariance (one-shot; factors the
/// covariance on every call, so prefer [`QExpSampler`] for ensembles).
pub fn gaussian_qexp_path<R: Rng + ?Sized>(rng: &mut R, kernel: &NoiseKernel, grid: &TimeGrid) -> Result<NoisePath> {
    Ok(QExpSampler::new(kernel, grid, false)?.sample(rng))
}

/// Which generator an ensemble draws from, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampler {
    Ou {
        lambda: f64,
        sigma_b2: f64,
    },
    CompoundOu {
        gamma: GammaParams,
        sigma_b2: f64,
    },
    GaussianQexp {
        kernel: NoiseKernel,
        allow_sub_unit_q: bool,
    },
}

impl Sampler {
    pub fn sigma_b2(&self) -> f64 {
        match self {
            Sampler::Ou { sigma_b2, .. } | Sampler::CompoundOu { sigma_b2, .. } => *sigma_b2,
            Sampler::GaussianQexp { kernel, .. } => kernel.sigma_b2(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sampler::Ou { .. } => "ou",
            Sampler::CompoundOu { .. } => "compound-ou",
            Sampler::GaussianQexp { .. } => "gaussian-qexp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub n_realizations: usize,
    pub master_seed: u64,
    pub sampler: Sampler,
}

impl EnsembleSpec {
    pub fn new(n_realizations: usize, master_seed: u64, sampler: Sampler) -> Result<Self> {
        if n_realizations < 2 {
            return Err(invalid("n_realizations", "an ensemble needs at least two realizations"));
        }
        Ok(Self {
            n_realizations,
            master_seed,
            sampler,
        })
    }
}

/// A sampler prepared for one grid.
#[derive(Debug, Clone)]
pub struct PathGenerator {
    grid: TimeGrid,
    inner: Prepared,
}

#[derive(Debug, Clone)]
enum Prepared {
    Ou { lambda: f64, sigma_b2: f64 },
    Compound { gamma: GammaParams, sigma_b2: f64 },
    Qexp(Box<QExpSampler>),
}

impl PathGenerator {
    pub fn new(sampler: &Sampler, grid: &TimeGrid) -> Result<Self> {
        let inner = match *sampler {
            Sampler::Ou { lambda, sigma_b2 } => {
                check_rate(lambda, sigma_b2)?;
                Prepared::Ou { lambda, sigma_b2 }
            }
            Sampler::CompoundOu { gamma, sigma_b2 } => {
                check_rate(1.0, sigma_b2)?;
                Prepared::Compound { gamma, sigma_b2 }
            }
            Sampler::GaussianQexp {
                kernel,
                allow_sub_unit_q,
            } => Prepared::Qexp(Box::new(QExpSampler::new(&kernel, grid, allow_sub_unit_q)?)),
        };
        Ok(Self { grid: *grid, inner })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn factor_report(&self) -> Option<&FactorReport> {
        match &self.inner {
            Prepared::Qexp(s) => Some(s.report()),
            _ => None,
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> NoisePath {
        match &self.inner {
            Prepared::Ou { lambda, sigma_b2 } => ou_path(rng, *lambda, *sigma_b2, &self.grid).expect("validated rate"),
            Prepared::Compound { gamma, sigma_b2 } => {
                compound_ou_path(rng, *gamma, *sigma_b2, &self.grid).expect("validated rate")
            }
            Prepared::Qexp(s) => s.sample(rng),
        }
    }

    /// Realization `index` of the ensemble seeded by `master_seed`.
    pub fn realization(&self, master_seed: u64, index: u64) -> NoisePath {
        self.generate(&mut realization_rng(master_seed, index))
    }
}

/// All paths of an ensemble, in realization order.
pub fn generate_ensemble(spec: &EnsembleSpec, grid: &TimeGrid) -> Result<Vec<NoisePath>> {
    let generator = PathGenerator::new(&spec.sampler, grid)?;
    Ok((0..spec.n_realizations as u64)
        .into_par_iter()
        .map(|i| generator.realization(spec.master_seed, i))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AutocorrEstimate {
    pub lag: usize,
    pub tau: f64,
    pub estimate: f64,
    pub stderr: f64,
}

/// Across-realization autocovariance `Cov(b(t₀), b(t₀ + k dt))` with the
/// origin `t₀` at the first node, and jackknife standard errors.
///
/// Each realization contributes a single product per lag; there is no time
/// averaging along a path, which would converge to the conditional rather
/// than the compound autocovariance for superstatistical noise.
pub fn empirical_autocorr(paths: &[NoisePath], max_lag: usize) -> Result<Vec<AutocorrEstimate>> {
    if paths.len() < 2 {
        return Err(invalid("paths", "need at least two realizations"));
    }
    let grid = *paths[0].grid();
    if let Some(p) = paths.iter().find(|p| p.grid() != &grid) {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", p.grid(), grid)));
    }
    if max_lag > grid.n() {
        return Err(invalid(
            "max_lag",
            format!("{max_lag} exceeds the {} grid steps", grid.n()),
        ));
    }
    let r = paths.len() as f64;
    let mut out = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let xy: Vec<(f64, f64)> = paths.iter().map(|p| (p.values()[0], p.values()[lag])).collect();
        let sx: f64 = xy.iter().map(|v| v.0).sum();
        let sy: f64 = xy.iter().map(|v| v.1).sum();
        let sxy: f64 = xy.iter().map(|v| v.0 * v.1).sum();
        let estimate = sxy / r - (sx / r) * (sy / r);
        let m = r - 1.0;
        let leave_out: Vec<f64> = xy
            .iter()
            .map(|(x, y)| (sxy - x * y) / m - ((sx - x) / m) * ((sy - y) / m))
            .collect();
        let mean_lo = leave_out.iter().sum::<f64>() / r;
        let var = leave_out.iter().map(|v| (v - mean_lo).powi(2)).sum::<f64>() * m / r;
        out.push(AutocorrEstimate {
            lag,
            tau: grid.t(lag),
            estimate,
            stderr: var.sqrt(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::QIndex;

    #[test]
    fn grid_basics() {
        let g = TimeGrid::with_horizon(0.01, 5.0).unwrap();
        assert_eq!(g.n(), 500);
        assert!((g.t_max() - 5.0).abs() < 1e-12);
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(0.1, 0).is_err());
    }

    #[test]
    fn supplied_path_validation() {
        let g = TimeGrid::new(0.1, 3).unwrap();
        assert!(NoisePath::new(g, vec![0.0; 3]).is_err());
        assert!(NoisePath::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert_eq!(NoisePath::zero(g).max_abs(), 0.0);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let g = TimeGrid::new(0.1, 20).unwrap();
        let gen = PathGenerator::new(
            &Sampler::Ou {
                lambda: 1.0,
                sigma_b2: 1.0,
            },
            &g,
        )
        .unwrap();
        assert_eq!(gen.realization(42, 3), gen.realization(42, 3));
        assert_ne!(gen.realization(42, 3), gen.realization(42, 4));
        assert_ne!(gen.realization(42, 3), gen.realization(43, 3));
    }

    #[test]
    fn factorization_residual_and_sub_unit_override() {
        let g = TimeGrid::new(0.05, 120).unwrap();
        let k = NoiseKernel::tsallis(2.0, 1.0, QIndex::new(1.25).unwrap()).unwrap();
        let s = QExpSampler::new(&k, &g, false).unwrap();
        assert!(s.report().residual <= 1e-8 * 2.0);

        let k = NoiseKernel::tsallis(1.0, 1.0, QIndex::new(0.6).unwrap()).unwrap();
        assert!(QExpSampler::new(&k, &g, false).is_err());
        let s = QExpSampler::new(&k, &g, true).unwrap();
        assert!(s.report().residual <= 1e-8);
    }

    #[test]
    fn autocorr_rejects_mismatched_grids() {
        let a = NoisePath::zero(TimeGrid::new(0.1, 4).unwrap());
        let b = NoisePath::zero(TimeGrid::new(0.2, 4).unwrap());
        assert!(matches!(
            empirical_autocorr(&[a.clone(), b], 2),
            Err(Error::GridMismatch(_))
        ));
        assert!(empirical_autocorr(&[a], 2).is_err());
    }

    #[test]
    fn csv_dump() {
        let p = NoisePath::new(TimeGrid::new(0.5, 2).unwrap(), vec![1.0, -0.5, 0.25]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,b\n0,1\n0.5,-0.5\n1,0.25\n");
    }
}
