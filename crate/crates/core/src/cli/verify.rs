//! Built-in verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::gamma_compound::{
    delta_limit_error, gamma_pdf, marginal_autocorr, marginal_autocorr_qexp, marginal_autocorr_quadrature, GammaParams,
};
use crate::kernels::{
    eval_kernel, iq_closed_form, iq_property_scan, iq_quadrature, limit_path_value, white_noise_weight, LimitPath,
    NoiseKernel, ScanParameter,
};
use crate::qcore::{
    escort_probabilities, maxent_distribution, q_exp, q_log, tsallis_entropy, DiscreteDistribution, QIndex,
};
use crate::quad::{integrate, integrate_pieces, QuadOptions};

use super::report::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Qcore,
    Gamma,
    Kernels,
    AppendixB,
    AppendixC,
    AppendixD,
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Suite::Qcore => "qcore",
            Suite::Gamma => "gamma",
            Suite::Kernels => "kernels",
            Suite::AppendixB => "appendix-b",
            Suite::AppendixC => "appendix-c",
            Suite::AppendixD => "appendix-d",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl Check {
    /// Passes iff `measured ≤ tolerance`.
    fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail: None,
        }
    }

    /// A yes/no property; `measured` is 1 when it holds.
    fn holds(name: &str, ok: bool, detail: Value) -> Self {
        Self {
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
            passed: ok,
            detail: Some(detail),
        }
    }

    fn with(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Qcore => qcore_suite()?,
        Suite::Gamma => gamma_suite()?,
        Suite::Kernels => kernels_suite()?,
        Suite::AppendixB => appendix_b_suite()?,
        Suite::AppendixC => appendix_c_suite()?,
        Suite::AppendixD => appendix_d_suite()?,
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        schema_version: SCHEMA_VERSION,
        suite,
        checks,
        passed,
    })
}

fn qi(q: f64) -> QIndex {
    QIndex::new(q).expect("finite literal")
}

fn random_distribution(rng: &mut ChaCha8Rng, max_states: usize) -> DiscreteDistribution {
    let n = rng.random_range(1..=max_states);
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    DiscreteDistribution::from_weights(&w).expect("positive weights")
}

fn qcore_suite() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let qs = [0.3, 0.7, 1.0, 1.3, 2.0, 3.0];

    let mut inverse: f64 = 0.0;
    for &q in &qs {
        for i in 0..=40 {
            let x = -1.0 + 0.05 * i as f64;
            let e = q_exp(x, qi(q));
            if e > 0.0 {
                inverse = inverse.max((q_log(e, qi(q))? - x).abs());
            }
        }
    }

    let mut product: f64 = 0.0;
    for &q in &qs {
        for (x, y) in [(-0.4, 0.3), (0.2, 0.5), (-0.1, -0.6)] {
            // the rule holds inside the support of both factors
            if 1.0 + (1.0 - q) * x <= 0.0 || 1.0 + (1.0 - q) * y <= 0.0 {
                continue;
            }
            let lhs = q_exp(x, qi(q)) * q_exp(y, qi(q));
            let rhs = q_exp(x + y + (1.0 - q) * x * y, qi(q));
            product = product.max((lhs - rhs).abs() / rhs.abs().max(1e-300));
        }
    }

    let mut additivity: f64 = 0.0;
    let mut continuity: f64 = 0.0;
    let mut dominated = true;
    for _ in 0..200 {
        let a = random_distribution(&mut rng, 8);
        let b = random_distribution(&mut rng, 8);
        for &q in &[0.5, 1.5, 2.0, 3.0] {
            let (sa, sb) = (tsallis_entropy(&a, qi(q)), tsallis_entropy(&b, qi(q)));
            let joint = tsallis_entropy(&a.product(&b), qi(q));
            additivity = additivity.max((joint - (sa + sb + (1.0 - q) * sa * sb)).abs());
            let u = DiscreteDistribution::uniform(a.len())?;
            dominated &= tsallis_entropy(&a, qi(q)) <= tsallis_entropy(&u, qi(q)) + 1e-12;
        }
        let bg = tsallis_entropy(&a, QIndex::one());
        for q in [1.0 - 1e-6, 1.0 + 1e-6] {
            continuity = continuity.max((tsallis_entropy(&a, qi(q)) - bg).abs());
        }
    }

    let energies = [0.0, 0.5, 1.3, 2.0];
    let flat = maxent_distribution(&energies, 0.0, qi(1.7))?;
    let flat_err = flat
        .probabilities()
        .iter()
        .map(|p| (p - 0.25).abs())
        .fold(0.0, f64::max);
    let u = DiscreteDistribution::uniform(5)?;
    let escort_err = escort_probabilities(&u, qi(2.5))?
        .probabilities()
        .iter()
        .map(|p| (p - 0.2).abs())
        .fold(0.0, f64::max);

    Ok(vec![
        Check::at_most("q_log inverts q_exp", inverse, 1e-10),
        Check::at_most("q-product rule e_q(x) e_q(y) = e_q(x + y + (1-q)xy)", product, 1e-12),
        Check::at_most("pseudo-additivity residual", additivity, 1e-10),
        Check::at_most("entropy continuity at q = 1 +- 1e-6", continuity, 1e-5),
        Check::holds("uniform distribution maximizes S_q", dominated, json!({"samples": 200})),
        Check::at_most("maxent at beta = 0 is uniform", flat_err, 1e-15),
        Check::at_most("escort of uniform is uniform", escort_err, 1e-15),
    ])
}

fn gamma_suite() -> Result<Vec<Check>> {
    let cases = [(0.25, 4.0), (0.5, 2.0), (2.0, 0.5), (0.01, 100.0)];
    let mut closed_vs_quad: f64 = 0.0;
    let mut closed_vs_qexp: f64 = 0.0;
    let mut norm: f64 = 0.0;
    let mut moments: f64 = 0.0;
    for (a, c) in cases {
        let g = GammaParams::new(a, c)?;
        for tau in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let exact = marginal_autocorr(tau, 1.0, g);
            closed_vs_quad = closed_vs_quad.max((exact - marginal_autocorr_quadrature(tau, 1.0, g)?.value).abs());
            if c != 0.5 && g.q_index().q() != 1.0 {
                closed_vs_qexp = closed_vs_qexp.max((exact - marginal_autocorr_qexp(tau, 1.0, g)).abs());
            }
        }
        let opts = QuadOptions::default();
        let hi = g.mean() + 60.0 * g.variance().sqrt();
        let f = |l: f64| gamma_pdf(l, g).expect("non-negative");
        let mass = if c < 1.0 {
            // integrable singularity at the origin
            integrate_pieces(f, &[1e-300, g.mean(), hi], opts)?.value
        } else {
            integrate(f, 0.0, hi, opts)?.value
        };
        norm = norm.max((mass - 1.0).abs());
        if c >= 1.0 {
            let m1 = integrate(|l| l * f(l), 0.0, hi, opts)?.value;
            let m2 = integrate(|l| (l - g.mean()).powi(2) * f(l), 0.0, hi, opts)?.value;
            moments = moments
                .max((m1 / g.mean() - 1.0).abs())
                .max((m2 / g.variance() - 1.0).abs());
        }
    }
    let g = GammaParams::from_tsallis(qi(1.25), 2.0)?;
    let round_trip = (g.q_index().q() - 1.25).abs() + (g.mean() - 2.0).abs();
    Ok(vec![
        Check::at_most(
            "marginal autocovariance: closed form vs quadrature",
            closed_vs_quad,
            1e-8,
        ),
        Check::at_most("(1 + a tau)^-c equals e_q(-lambda0 tau)", closed_vs_qexp, 1e-12),
        Check::at_most("gamma pdf normalization", norm, 1e-8),
        Check::at_most("gamma pdf mean and variance (relative)", moments, 1e-8),
        Check::at_most("from_tsallis round trip", round_trip, 1e-14),
    ])
}

fn kernels_suite() -> Result<Vec<Check>> {
    let mut closed_vs_quad: f64 = 0.0;
    for q in [0.3, 0.6, 0.9, 1.0, 1.1, 1.25, 1.7, 2.5, 3.0] {
        for lambda0 in [0.1, 0.5, 1.0, 4.0] {
            let k = NoiseKernel::tsallis(1.0, lambda0, qi(q))?;
            for t in [0.01, 0.3, 1.0, 3.0, 10.0] {
                let d = (iq_closed_form(t, qi(q), lambda0)? - iq_quadrature(t, &k)?.value).abs();
                closed_vs_quad = closed_vs_quad.max(d);
            }
        }
    }

    let ou = NoiseKernel::ou(1.0, 1.0)?;
    let mut degeneration: f64 = 0.0;
    for q in [1.0 - 1e-7, 1.0 + 1e-7] {
        let k = NoiseKernel::tsallis(1.0, 1.0, qi(q))?;
        for i in 0..=200 {
            let tau = 0.1 * i as f64;
            degeneration = degeneration.max((eval_kernel(&k, tau)? - eval_kernel(&ou, tau)?).abs());
        }
    }

    let mut taylor = true;
    for q in [-1.0, 0.0, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0] {
        for i in 1..=20 {
            let x = 0.005 * i as f64;
            taylor &= (q_exp(-x, qi(q)) - (1.0 - x)).abs() <= x * x * f64::max(1.0, q.abs());
        }
    }

    let h = 1e-4;
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    for q in [0.5, 1.0, 1.25, 2.5] {
        let k = NoiseKernel::tsallis(1.0, 1.0, qi(q))?;
        let i = |t: f64| iq_quadrature(t, &k).map(|e| e.value);
        for t in [0.5, 1.0, 3.0] {
            let fd = (i(t + h)? - i(t - h)?) / (2.0 * h);
            let exact = integrate(|s| k.unit(s).expect("pointwise"), 0.0, t, QuadOptions::default())?.value;
            first = first.max((fd - exact).abs());
        }
        // one-sided second difference, exact through cubics
        let fd2 = (2.0 * i(0.0)? - 5.0 * i(h)? + 4.0 * i(2.0 * h)? - i(3.0 * h)?) / (h * h);
        second = second.max((fd2 - 1.0).abs());
    }

    let examples = [
        (eval_kernel(&NoiseKernel::tsallis(1.0, 1.0, qi(1.25))?, 0.0)?, 1.0),
        (eval_kernel(&NoiseKernel::tsallis(1.0, 1.0, qi(2.0))?, 1.0)?, 0.5),
        (eval_kernel(&NoiseKernel::tsallis(1.0, 1.0, qi(0.5))?, 3.0)?, 0.0),
        (
            iq_quadrature(1.0, &NoiseKernel::ou(1.0, 2.0)?)?.value,
            (1.0 + (-2.0f64).exp()) / 4.0,
        ),
    ];
    let example_err = examples.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    Ok(vec![
        Check::at_most("I_q closed form vs quadrature", closed_vs_quad, 1e-8),
        Check::at_most("tsallis kernel at q = 1 +- 1e-7 vs ou", degeneration, 1e-6),
        Check::holds(
            "small-lambda Taylor bound |e_q(-x) - (1 - x)| <= x^2 max(1, |q|)",
            taylor,
            json!({"x_max": 0.1}),
        ),
        Check::at_most("dI/dt equals integral of the kernel", first, 1e-6),
        Check::at_most("d2I/dt2 at 0 equals g(0) = 1", second, 1e-6),
        Check::at_most("kernel examples", example_err, 1e-12),
    ])
}

/// Error table of the delta limit for the smooth probes used by the suite.
pub fn delta_limit_table(shapes: &[f64]) -> Result<Vec<(&'static str, Vec<f64>)>> {
    type Probe = (&'static str, fn(f64) -> f64);
    let probes: [Probe; 4] = [
        ("lambda^2", |l| l * l),
        ("exp(-lambda)", |l| (-l).exp()),
        ("cos(lambda)", f64::cos),
        ("1/(1+lambda)", |l| 1.0 / (1.0 + l)),
    ];
    probes
        .iter()
        .map(|(name, p)| {
            Ok((
                *name,
                shapes
                    .iter()
                    .map(|&c| delta_limit_error(1.0, c, p))
                    .collect::<Result<Vec<_>>>()?,
            ))
        })
        .collect()
}

fn appendix_b_suite() -> Result<Vec<Check>> {
    let shapes = [10.0, 1e2, 1e3, 1e4];
    let table = delta_limit_table(&shapes)?;
    let mut checks = Vec::new();
    let square = &table[0].1;
    let rel = shapes
        .iter()
        .zip(square)
        .skip(1)
        .map(|(c, e)| (e * c - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(
        Check::at_most("E[lambda^2] - lambda0^2 = 1/c (relative)", rel, 1e-12)
            .with(json!({"c": shapes, "error": square})),
    );
    for (name, errs) in &table {
        let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
        checks.push(Check::holds(
            &format!("delta-limit error decreases in c for {name}"),
            decreasing,
            json!({"c": shapes, "error": errs}),
        ));
    }
    Ok(checks)
}

fn appendix_c_suite() -> Result<Vec<Check>> {
    let iterated = LimitPath::new("ell -> 0 first", |_| 0.0, |n| n as f64);
    let far = limit_path_value(&iterated, 1000, 1.0)?;

    let classical = LimitPath::new("ell = 1/N, lambda = 1", |n| 1.0 / n as f64, |_| 1.0);
    let classical_err = (limit_path_value(&classical, 1_000_000, 1.0)? - (-1.0f64).exp()).abs();
    let pinned = LimitPath::new("lambda ell = 1", |n| 1.0 / n as f64, |n| n as f64);
    let pinned_max = (1..=50)
        .map(|n| limit_path_value(&pinned, n, 1.0))
        .collect::<Result<Vec<_>>>()?;

    let mut taylor = true;
    for q in [-1.0, 0.0, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0] {
        for i in 1..=20 {
            let x = 0.005 * i as f64;
            taylor &= (q_exp(-x, qi(q)) - (1.0 - x)).abs() <= x * x * f64::max(1.0, q.abs());
        }
    }

    let mut weight: f64 = 0.0;
    let lambdas = [1.0, 10.0, 100.0, 1000.0];
    for &l in &lambdas {
        let e = integrate(|t| l * (-l * t).exp(), 0.0, 60.0 / l, QuadOptions::default())?;
        weight = weight.max((e.value - 1.0).abs());
    }
    let k = NoiseKernel::white(1.0, 50.0)?;
    let ratio =
        (white_noise_weight(&k)? - 0.02).abs() + (white_noise_weight(&NoiseKernel::white(4.0, 2.0)?)? - 2.0).abs();

    Ok(vec![
        Check::at_most("iterated limit: e^(-lambda t) at lambda = 1e3, t = 1", far, 1e-100),
        Check::at_most(
            "path ell = 1/N, lambda = 1 tends to e^-1 (N = 1e6)",
            classical_err,
            1e-6,
        ),
        Check::at_most(
            "path lambda ell = 1 is cut off for every N",
            pinned_max.iter().fold(0.0, |m: f64, v| m.max(*v)),
            0.0,
        ),
        Check::holds("small-lambda Taylor bound", taylor, json!({"x_max": 0.1})),
        Check::at_most("white-noise weight normalization", weight, 1e-10).with(json!({"lambda": lambdas})),
        Check::at_most("white-noise weight sigma_b2 / lambda0", ratio, 1e-15),
    ])
}

fn appendix_d_suite() -> Result<Vec<Check>> {
    let closed = iq_closed_form(1.0, qi(1.25), 1.0)?;
    let quad = iq_quadrature(1.0, &NoiseKernel::tsallis(1.0, 1.0, qi(1.25))?)?.value;
    let p1 = iq_property_scan(ScanParameter::Q, &[0.2, 0.4, 0.6, 0.8], 0.1, &[1.0, 5.0, 10.0])?;
    let p2 = iq_property_scan(ScanParameter::Lambda0, &[0.5, 1.0, 2.0, 4.0], 1.1, &[1.0, 5.0, 10.0])?;
    let ou = iq_property_scan(ScanParameter::Lambda0, &[0.5, 1.0, 2.0, 4.0], 1.0, &[1.0, 5.0, 10.0])?;
    Ok(vec![
        Check::at_most(
            "I_q(t=1; q=1.25, lambda0=1) closed form vs 0.3733333",
            (closed - 0.373_333_3).abs(),
            1e-7,
        ),
        Check::at_most(
            "I_q(t=1; q=1.25, lambda0=1) closed form vs quadrature",
            (closed - quad).abs(),
            1e-9,
        ),
        Check::holds(
            "Property 1: I_q increases with q (q < 1)",
            p1.passed,
            serde_json::to_value(&p1)?,
        ),
        Check::holds(
            "Property 2: I_q decreases with lambda0 (q > 1)",
            p2.passed,
            serde_json::to_value(&p2)?,
        ),
        Check::holds(
            "I_q decreases with lambda0 at q = 1",
            ou.passed,
            serde_json::to_value(&ou)?,
        ),
    ])
}
