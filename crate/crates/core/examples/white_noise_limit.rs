//! As `λ → ∞` with `σ²/λ` fixed both closures approach the white-noise
//! forms: `e^{−(σ²/λ)t}` (Markov) and a damped oscillator (non-Markov).
//!
//! ```sh
//! cargo run --release --example white_noise_limit
//! ```

use tsallis_dia::closures::{solve_time_domain, white_noise_solution, ClosureProblem, Method};
use tsallis_dia::kernels::NoiseKernel;
use tsallis_dia::noise::TimeGrid;
use tsallis_dia::oscillator::{Model, OscillatorConfig};

fn main() -> tsallis_dia::Result<()> {
    let grid = TimeGrid::with_horizon(0.0005, 5.0)?;
    println!(
        "{:>10} {:>7} {:>14} {:>14} {:>14}",
        "model", "lambda", "|DIA - pert|", "|pert - white|", "|DIA - white|"
    );
    for (model, nu) in [(Model::Markov, 0.0), (Model::NonMarkov, 1.0)] {
        for lambda in [3.0, 10.0, 30.0, 100.0] {
            let kernel = NoiseKernel::ou(lambda, lambda)?;
            let cfg = OscillatorConfig::new(model, nu, None)?;
            let pert = solve_time_domain(&ClosureProblem::new(Method::Perturbative, kernel, cfg)?, &grid)?;
            let dia = solve_time_domain(&ClosureProblem::new(Method::Dia, kernel, cfg)?, &grid)?;
            let (mut gap, mut ep, mut ed) = (0.0f64, 0.0f64, 0.0f64);
            for (i, (p, d)) in pert.values().iter().zip(dia.values()).enumerate() {
                let t = grid.t(i);
                let mut w = white_noise_solution(model, lambda, lambda, nu, t);
                if model == Model::Markov {
                    w *= (-nu * t).exp();
                }
                gap = gap.max((p - d).norm());
                ep = ep.max((p.re - w).abs());
                ed = ed.max((d.re - w).abs());
            }
            println!("{model:>10} {lambda:>7} {gap:>14.3e} {ep:>14.3e} {ed:>14.3e}");
        }
    }
    Ok(())
}
