//! Perturbative and DIA closures in the time domain (Volterra stepping) and
//! in the Laplace domain (continued fraction plus Talbot inversion).
//!
//! ```sh
//! cargo run --release --example dia_closures
//! ```

use num_complex::Complex64;
use tsallis_dia::closures::{laplace_dia, laplace_inverted, solve_time_domain, ClosureProblem, Method};
use tsallis_dia::kernels::NoiseKernel;
use tsallis_dia::noise::TimeGrid;
use tsallis_dia::oscillator::{Model, OscillatorConfig};

fn main() -> tsallis_dia::Result<()> {
    // static noise: the DIA Markov solution is J₁(2σt)/(σt)
    let frozen = ClosureProblem::new(Method::Dia, NoiseKernel::ou(1.0, 0.0)?, OscillatorConfig::markov(0.0)?)?;
    let grid = TimeGrid::with_horizon(0.005, 10.0)?;
    let g = solve_time_domain(&frozen, &grid)?;
    println!("DIA, lambda = 0: G(t) at t = 0, 2, ..., 10");
    for i in (0..grid.len()).step_by(400) {
        println!("  {:>5.1} {:>12.8}", grid.t(i), g.values()[i].re);
    }
    println!(
        "  J(p = 0) = {}",
        laplace_dia(&frozen, Complex64::new(0.0, 0.0), None)?.value
    );

    println!("\nlambda = 0.1: time domain vs Laplace inversion, max-abs gap on [0, 10]");
    let nodes: Vec<usize> = (0..grid.len()).step_by(20).collect();
    let times: Vec<f64> = nodes.iter().map(|&i| grid.t(i)).collect();
    for (model, nu) in [(Model::Markov, 0.5), (Model::NonMarkov, 1.0)] {
        for method in [Method::Perturbative, Method::Dia] {
            let prob = ClosureProblem::new(
                method,
                NoiseKernel::ou(1.0, 0.1)?,
                OscillatorConfig::new(model, nu, None)?,
            )?;
            let time = solve_time_domain(&prob, &grid)?;
            let inverted = laplace_inverted(&prob, &times)?;
            let gap = nodes
                .iter()
                .zip(&inverted)
                .map(|(&i, v)| (time.values()[i] - v).norm())
                .fold(0.0, f64::max);
            println!("  {model:>10} {method:>12}: {gap:.2e}");
        }
    }
    Ok(())
}
