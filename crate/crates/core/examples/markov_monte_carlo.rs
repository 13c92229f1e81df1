//! Ensemble mean Green's function of the Markov oscillator
//! `dĜ/dt = −(ν + i b(t)) Ĝ` against its exact mean `e^{−νt − σ_b² I_q(t)}`.
//!
//! ```sh
//! cargo run --release --example markov_monte_carlo
//! ```

use tsallis_dia::kernels::NoiseKernel;
use tsallis_dia::noise::{EnsembleSpec, Sampler, TimeGrid};
use tsallis_dia::oscillator::{ensemble_mean_green, exact_markov_mean, OscillatorConfig};
use tsallis_dia::qcore::QIndex;

fn main() -> tsallis_dia::Result<()> {
    let kernel = NoiseKernel::tsallis(1.0, 1.0, QIndex::new(1.2)?)?;
    let grid = TimeGrid::with_horizon(0.01, 5.0)?;
    let cfg = OscillatorConfig::markov(0.5)?;
    let spec = EnsembleSpec::new(
        10_000,
        2024,
        Sampler::GaussianQexp {
            kernel,
            allow_sub_unit_q: false,
        },
    )?;

    let mc = ensemble_mean_green(&spec, &cfg, &grid)?;
    let exact = exact_markov_mean(&kernel, cfg.nu(), &grid)?;
    let se = mc.stderr().expect("ensemble means carry standard errors");

    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>7}",
        "t", "Re G (MC)", "stderr", "exact", "z"
    );
    for i in (0..grid.len()).step_by(50) {
        let (m, e) = (mc.values()[i], exact.values()[i].re);
        let z = if se[i].re > 0.0 { (m.re - e) / se[i].re } else { 0.0 };
        println!(
            "{:>5.2} {:>10.6} {:>10.6} {:>10.6} {:>7.2}",
            grid.t(i),
            m.re,
            se[i].re,
            e,
            z
        );
    }
    Ok(())
}
