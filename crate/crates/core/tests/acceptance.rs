//! Acceptance criteria AC1 through AC11, one PASS/FAIL line each.

use std::path::Path;
use std::process::Command;

use num_complex::Complex64;
use tsallis_dia::closures::{
    invert_laplace, laplace_dia, laplace_inverted, large_time_solution, solve_time_domain, volterra_dia,
    white_noise_solution, ClosureProblem, Method, TalbotOptions,
};
use tsallis_dia::gamma_compound::{delta_limit_error, marginal_autocorr, marginal_autocorr_quadrature, GammaParams};
use tsallis_dia::kernels::{
    eval_kernel, iq_closed_form, iq_property_scan, iq_quadrature, limit_path_value, LimitPath, NoiseKernel,
    ScanParameter,
};
use tsallis_dia::noise::{
    compound_ou_path, empirical_autocorr, generate_ensemble, ou_path, realization_rng, EnsembleSpec, Sampler, TimeGrid,
};
use tsallis_dia::oscillator::{ensemble_mean_green, simulate_realization, Model, OscillatorConfig};
use tsallis_dia::qcore::{q_exp, QIndex};
use tsallis_dia::quad::{integrate, QuadOptions};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn qi(q: f64) -> QIndex {
    QIndex::new(q).unwrap()
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `J₁(x) = (1/π) ∫₀^π cos(τ − x sin τ) dτ` by the trapezoid rule, which is
/// spectrally accurate for this periodic integrand.
fn bessel_j1(x: f64) -> f64 {
    let n = 400;
    let h = std::f64::consts::PI / n as f64;
    let f = |t: f64| (t - x * t.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(std::f64::consts::PI));
    for i in 1..n {
        s += f(i as f64 * h);
    }
    s * h / std::f64::consts::PI
}

fn ac1() -> Outcome {
    let (a, c) = (0.5, 2.0);
    let g = GammaParams::new(a, c).unwrap();
    let grid = TimeGrid::with_horizon(0.05, 5.0).unwrap();
    let spec = EnsembleSpec::new(
        100_000,
        1,
        Sampler::CompoundOu {
            gamma: g,
            sigma_b2: 1.0,
        },
    )
    .unwrap();
    let paths = generate_ensemble(&spec, &grid).unwrap();
    let est = empirical_autocorr(&paths, grid.n()).unwrap();
    let mut worst_z: f64 = 0.0;
    for e in &est {
        let exact = (1.0 + a * e.tau).powf(-c);
        worst_z = worst_z.max((e.estimate - exact).abs() / e.stderr);
    }
    let mut quad_gap: f64 = 0.0;
    for i in 0..=50 {
        let tau = 0.1 * i as f64;
        let q = marginal_autocorr_quadrature(tau, 1.0, g).unwrap().value;
        quad_gap = quad_gap.max((marginal_autocorr(tau, 1.0, g) - q).abs());
    }
    outcome(
        worst_z <= 3.0 && quad_gap <= 1e-8,
        format!(
            "max |z| = {worst_z:.3} over {} lags; closed form vs quadrature {quad_gap:.2e}",
            est.len()
        ),
    )
}

fn ac2() -> Outcome {
    let (q, nu) = (1.2, 0.5);
    let grid = TimeGrid::with_horizon(0.01, 5.0).unwrap();
    let kernel = NoiseKernel::tsallis(1.0, 1.0, qi(q)).unwrap();
    let spec = EnsembleSpec::new(
        20_000,
        2,
        Sampler::GaussianQexp {
            kernel,
            allow_sub_unit_q: false,
        },
    )
    .unwrap();
    let cfg = OscillatorConfig::markov(nu).unwrap();
    let mc = ensemble_mean_green(&spec, &cfg, &grid).unwrap();
    let se = mc.stderr().unwrap();
    let (mut within, mut total) = (0usize, 0usize);
    for (i, (v, e)) in mc.values().iter().zip(se).enumerate().skip(1) {
        let t = grid.t(i);
        let iq = simpson(|s| (t - s) * (1.0 + 0.2 * s).powi(-5), 0.0, t, 400);
        let exact = (-nu * t - iq).exp();
        for z in [(v.re - exact) / e.re, v.im / e.im] {
            total += 1;
            within += usize::from(z.abs() <= 3.0);
        }
    }
    let frac = within as f64 / total as f64;
    outcome(frac >= 0.99, format!("{:.4} of {total} z-scores within 3", frac))
}

fn ac3() -> Outcome {
    let nu = 0.5;
    let cfg = OscillatorConfig::markov(nu).unwrap();
    let g = GammaParams::new(0.5, 2.0).unwrap();
    let mut worst: f64 = 0.0;
    for dt in [0.01, 0.005, 0.002] {
        let grid = TimeGrid::with_horizon(dt, 5.0).unwrap();
        for i in 0..100u64 {
            let mut rng = realization_rng(3, i);
            let path = if i % 2 == 0 {
                ou_path(&mut rng, 1.0, 1.0, &grid).unwrap()
            } else {
                compound_ou_path(&mut rng, g, 1.0, &grid).unwrap()
            };
            let green = simulate_realization(&path, &cfg).unwrap();
            for (k, v) in green.values().iter().enumerate() {
                worst = worst.max((v.norm() - (-nu * grid.t(k)).exp()).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max ||G| - e^(-nu t)| = {worst:.2e}"))
}

fn ac4() -> Outcome {
    let kernel = NoiseKernel::ou(1.0, 0.0).unwrap();
    let prob = ClosureProblem::new(Method::Dia, kernel, OscillatorConfig::markov(0.0).unwrap()).unwrap();
    let grid = TimeGrid::with_horizon(0.005, 10.0).unwrap();
    let g = volterra_dia(&prob, &grid).unwrap();
    let mut worst: f64 = 0.0;
    for (i, v) in g.values().iter().enumerate() {
        let t = grid.t(i);
        let exact = if t == 0.0 { 1.0 } else { bessel_j1(2.0 * t) / t };
        worst = worst.max((v.re - exact).abs()).max(v.im.abs());
    }
    let at_zero = laplace_dia(&prob, Complex64::new(0.0, 0.0), None).unwrap().value;
    let zero_err = (at_zero - 1.0).norm();
    outcome(
        worst <= 1e-4 && zero_err <= 1e-9,
        format!("max |G - J1(2t)/t| = {worst:.2e}; |J(0) - 1| = {zero_err:.2e}"),
    )
}

fn ac5() -> Outcome {
    let grid = TimeGrid::with_horizon(0.005, 10.0).unwrap();
    let nodes: Vec<usize> = (0..grid.len()).step_by(10).collect();
    let times: Vec<f64> = nodes.iter().map(|&i| grid.t(i)).collect();
    let mut worst: f64 = 0.0;
    let mut label = String::new();
    for (model, nu) in [(Model::Markov, 0.5), (Model::NonMarkov, 1.0)] {
        for method in [Method::Perturbative, Method::Dia] {
            for lambda in [0.05, 0.1, 0.2] {
                let cfg = OscillatorConfig::new(model, nu, None).unwrap();
                let prob = ClosureProblem::new(method, NoiseKernel::ou(1.0, lambda).unwrap(), cfg).unwrap();
                let time = solve_time_domain(&prob, &grid).unwrap();
                let inverted = match laplace_inverted(&prob, &times) {
                    Ok(v) => v,
                    Err(e) => return outcome(false, format!("{model} {method} lambda={lambda}: {e}")),
                };
                for (&i, v) in nodes.iter().zip(&inverted) {
                    let d = (time.values()[i] - v).norm();
                    if d > worst {
                        worst = d;
                        label = format!("{model} {method} lambda={lambda}");
                    }
                }
            }
        }
    }
    outcome(worst <= 2e-3, format!("max-abs {worst:.2e} ({label})"))
}

fn ac6() -> Outcome {
    let grid = TimeGrid::with_horizon(0.0005, 5.0).unwrap();
    let omega = 0.75f64.sqrt();
    let damped = |t: f64| (-0.5 * t).exp() * ((omega * t).cos() - (omega * t).sin() / (2.0 * omega));
    let mut lines = Vec::new();
    let mut passed = true;
    for (model, nu) in [(Model::Markov, 0.0), (Model::NonMarkov, 1.0)] {
        let mut gaps = Vec::new();
        let mut limit_err: f64 = 0.0;
        for lambda in [10.0, 30.0, 100.0] {
            let kernel = NoiseKernel::ou(lambda, lambda).unwrap();
            let cfg = OscillatorConfig::new(model, nu, None).unwrap();
            let solve = |m| solve_time_domain(&ClosureProblem::new(m, kernel, cfg).unwrap(), &grid).unwrap();
            let (pert, dia) = (solve(Method::Perturbative), solve(Method::Dia));
            let mut gap: f64 = 0.0;
            for (i, (a, b)) in pert.values().iter().zip(dia.values()).enumerate() {
                gap = gap.max((a - b).norm());
                if lambda == 100.0 {
                    let t = grid.t(i);
                    let exact = if model == Model::Markov { (-t).exp() } else { damped(t) };
                    limit_err = limit_err.max((a.re - exact).abs()).max((b.re - exact).abs());
                }
            }
            gaps.push(gap);
        }
        let ok = gaps.windows(2).all(|w| w[1] < w[0]) && gaps[2] < 0.02 && limit_err < 0.02;
        passed &= ok;
        lines.push(format!(
            "{model}: gaps {:.2e}/{:.2e}/{:.2e}, limit error {limit_err:.2e}",
            gaps[0], gaps[1], gaps[2]
        ));
    }
    outcome(passed, lines.join("; "))
}

fn ac7() -> Outcome {
    let mut identical = true;
    for (s2, l0, nu) in [(1.0, 1.0, 0.0), (2.0, 0.5, 0.3), (50.0, 50.0, 1.0)] {
        for i in 0..=200 {
            let t = 0.1 * i as f64;
            identical &= large_time_solution(Model::Markov, s2, l0, nu, t).to_bits()
                == white_noise_solution(Model::Markov, s2, l0, nu, t).to_bits();
        }
    }
    let nu: f64 = 1.0;
    let times: Vec<f64> = (1..=400).map(|i| 0.05 * i as f64).collect();
    let opts = TalbotOptions {
        omega: nu.sqrt(),
        ..TalbotOptions::default()
    };
    let inverted = invert_laplace(|p| Ok(p / (p * p + nu)), &times, &opts);
    let worst = match inverted {
        Ok(v) => times
            .iter()
            .zip(v)
            .map(|(t, x)| (x - (nu.sqrt() * t).cos()).abs())
            .fold(0.0, f64::max),
        Err(e) => return outcome(false, e.to_string()),
    };
    outcome(
        identical && worst <= 1e-7,
        format!("markov forms identical: {identical}; max |inverse - cos t| on (0, 20] = {worst:.2e}"),
    )
}

fn ac8() -> Outcome {
    let mut rel: f64 = 0.0;
    for c in [1e2, 1e3, 1e4] {
        rel = rel.max((delta_limit_error(1.0, c, |l| l * l).unwrap() * c - 1.0).abs());
    }
    let shapes = [10.0, 30.0, 100.0, 300.0, 1e3, 3e3, 1e4];
    let probes: [fn(f64) -> f64; 3] = [|l| (-l).exp(), f64::cos, |l| 1.0 / (1.0 + l)];
    let monotone = probes.iter().all(|p| {
        let e: Vec<f64> = shapes.iter().map(|&c| delta_limit_error(1.0, c, p).unwrap()).collect();
        e.windows(2).all(|w| w[1] < w[0])
    });
    outcome(
        rel <= 1e-12 && monotone,
        format!("max relative error of 1/c: {rel:.2e}; smooth probes decreasing: {monotone}"),
    )
}

fn ac9() -> Outcome {
    let iterated = LimitPath::new("ell = 0", |_| 0.0, |n| n as f64);
    let far = limit_path_value(&iterated, 1000, 1.0).unwrap();
    let mut taylor = true;
    for q in [-1.0, 0.0, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0] {
        for i in 1..=100 {
            let x = 0.001 * i as f64;
            taylor &= (q_exp(-x, qi(q)) - (1.0 - x)).abs() <= x * x * f64::max(1.0, q.abs());
        }
    }
    let mut norm: f64 = 0.0;
    for lambda in [0.5, 1.0, 10.0, 100.0, 1000.0] {
        let k = NoiseKernel::ou(1.0, lambda).unwrap();
        let opts = QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            ..QuadOptions::default()
        };
        let v = integrate(|t| lambda * eval_kernel(&k, t).unwrap(), 0.0, 60.0 / lambda, opts).unwrap();
        norm = norm.max((v.value - 1.0).abs());
    }
    outcome(
        far < 1e-100 && taylor && norm <= 1e-10,
        format!("e^(-1000) = {far:e}; Taylor bound holds: {taylor}; weight normalization error {norm:.2e}"),
    )
}

fn ac10() -> Outcome {
    let closed = iq_closed_form(1.0, qi(1.25), 1.0).unwrap();
    let quad = iq_quadrature(1.0, &NoiseKernel::tsallis(1.0, 1.0, qi(1.25)).unwrap())
        .unwrap()
        .value;
    let simpson_value = simpson(|s| (1.0 - s) * (1.0 + 0.25 * s).powi(-4), 0.0, 1.0, 2000);
    let p1 = iq_property_scan(ScanParameter::Q, &[0.2, 0.4, 0.6, 0.8], 0.1, &[1.0, 5.0, 10.0]).unwrap();
    let p2 = iq_property_scan(ScanParameter::Lambda0, &[0.5, 1.0, 2.0, 4.0], 1.1, &[1.0, 5.0, 10.0]).unwrap();
    let err = (closed - 0.373_333_3)
        .abs()
        .max((closed - quad).abs())
        .max((closed - simpson_value).abs());
    outcome(
        err <= 1e-7 && p1.passed && p2.passed,
        format!(
            "I = {closed:.10} (quadrature {quad:.10}); property 1: {}, property 2: {}",
            p1.passed, p2.passed
        ),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_tsallis-dia"))
        .args(args)
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn same_tree(a: &Path, b: &Path) -> bool {
    let mut names: Vec<_> = walk(a)
        .into_iter()
        .map(|p| p.strip_prefix(a).unwrap().to_path_buf())
        .collect();
    names.sort();
    let mut other: Vec<_> = walk(b)
        .into_iter()
        .map(|p| p.strip_prefix(b).unwrap().to_path_buf())
        .collect();
    other.sort();
    !names.is_empty()
        && names == other
        && names
            .iter()
            .all(|n| std::fs::read(a.join(n)).ok() == std::fs::read(b.join(n)).ok())
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).into_iter().flatten().flatten() {
        let p = e.path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

fn ac11() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let mut checks = Vec::new();
    for (name, sampler, q) in [("qexp", "gaussian-qexp", 1.2), ("compound", "compound-ou", 1.5)] {
        let cfg = format!(
            r#"{{"model": "markov",
                "kernel": {{"kind": "tsallis", "q": {q}, "lambda0": 1.0, "sigma_b2": 1.0}},
                "oscillator": {{"nu": 0.5}},
                "grid": {{"dt": 0.01, "t_max": 3.0}},
                "ensemble": {{"n_realizations": 1000, "master_seed": 11, "sampler": "{sampler}"}},
                "output": {{"dump_paths": 2}}}}"#
        );
        let path = root.join(format!("{name}.json"));
        std::fs::write(&path, cfg).unwrap();
        let (one, four, replay) = (
            root.join(format!("{name}-1")),
            root.join(format!("{name}-4")),
            root.join(format!("{name}-r")),
        );
        let p = path.to_str().unwrap();
        let ran = run_cli(&[
            "simulate",
            p,
            "--threads",
            "1",
            "--out",
            one.to_str().unwrap(),
            "--seed",
            "99",
        ]) && run_cli(&[
            "simulate",
            p,
            "--threads",
            "4",
            "--out",
            four.to_str().unwrap(),
            "--seed",
            "99",
        ]);
        let threads_ok = ran && same_tree(&one, &four);
        let header = std::fs::read_to_string(one.join("green_monte_carlo.csv")).unwrap_or_default();
        let embedded = header
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("# config="))
            .unwrap_or("");
        let replay_cfg = root.join(format!("{name}-embedded.json"));
        std::fs::write(&replay_cfg, embedded).unwrap();
        let replay_ok = run_cli(&[
            "simulate",
            replay_cfg.to_str().unwrap(),
            "--out",
            replay.to_str().unwrap(),
        ]) && same_tree(&one, &replay);
        checks.push((name, threads_ok, replay_ok));
    }
    let passed = checks.iter().all(|c| c.1 && c.2);
    let detail = checks
        .iter()
        .map(|(n, t, r)| format!("{n}: threads 1 vs 4 identical {t}, replay identical {r}"))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(passed, detail)
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
        ("AC11", ac11),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = std::time::Instant::now();
        let o = f();
        failed += usize::from(!o.passed);
        println!(
            "{name} {} {} [{:.1} s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
