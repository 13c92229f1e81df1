//! Gamma-compounded Ornstein-Uhlenbeck noise has a q-exponential
//! autocovariance `σ_b² (1 + aτ)^{-c}` with `q = 1 + 1/c`.
//!
//! ```sh
//! cargo run --release --example superstatistical_noise
//! ```

use tsallis_dia::gamma_compound::{marginal_autocorr, marginal_autocorr_quadrature, GammaParams};
use tsallis_dia::noise::{empirical_autocorr, generate_ensemble, EnsembleSpec, Sampler, TimeGrid};

fn main() -> tsallis_dia::Result<()> {
    let g = GammaParams::new(0.5, 2.0)?;
    println!(
        "a = {}, c = {}: q = {}, mean rate = {}",
        g.scale(),
        g.shape(),
        g.q_index().q(),
        g.mean()
    );

    let grid = TimeGrid::with_horizon(0.1, 5.0)?;
    let spec = EnsembleSpec::new(
        50_000,
        42,
        Sampler::CompoundOu {
            gamma: g,
            sigma_b2: 1.0,
        },
    )?;
    let paths = generate_ensemble(&spec, &grid)?;
    let est = empirical_autocorr(&paths, grid.n())?;

    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>7} {:>10}",
        "tau", "estimate", "stderr", "closed", "z", "quadrature"
    );
    for e in est.iter().step_by(5) {
        let closed = marginal_autocorr(e.tau, 1.0, g);
        let quad = marginal_autocorr_quadrature(e.tau, 1.0, g)?.value;
        println!(
            "{:>5.2} {:>10.5} {:>10.5} {:>10.5} {:>7.2} {:>10.5}",
            e.tau,
            e.estimate,
            e.stderr,
            closed,
            (e.estimate - closed) / e.stderr,
            quad
        );
    }
    Ok(())
}
