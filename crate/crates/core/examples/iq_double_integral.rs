//! The double integral `I_q(t) = ∫₀ᵗ (t − τ) e_q^{−λ₀τ} dτ` that sets the
//! exact Markov mean, and its monotonicity in `q` and `λ₀`.
//!
//! ```sh
//! cargo run --example iq_double_integral
//! ```

use tsallis_dia::kernels::{iq_closed_form, iq_property_scan, iq_quadrature, NoiseKernel, ScanParameter};
use tsallis_dia::qcore::QIndex;

fn main() -> tsallis_dia::Result<()> {
    println!(
        "{:>5} {:>5} {:>16} {:>16} {:>9}",
        "q", "t", "closed form", "quadrature", "gap"
    );
    for q in [0.5, 0.9, 1.0, 1.25, 1.5, 2.0, 2.5] {
        let qi = QIndex::new(q)?;
        let k = NoiseKernel::tsallis(1.0, 1.0, qi)?;
        for t in [0.5, 1.0, 5.0] {
            let closed = iq_closed_form(t, qi, 1.0)?;
            let quad = iq_quadrature(t, &k)?;
            println!(
                "{q:>5} {t:>5} {closed:>16.12} {:>16.12} {:>9.1e}",
                quad.value,
                (closed - quad.value).abs()
            );
        }
    }

    let increasing = iq_property_scan(ScanParameter::Q, &[0.2, 0.4, 0.6, 0.8], 0.1, &[1.0, 5.0, 10.0])?;
    let decreasing = iq_property_scan(ScanParameter::Lambda0, &[0.5, 1.0, 2.0, 4.0], 1.1, &[1.0, 5.0, 10.0])?;
    for r in [&increasing, &decreasing] {
        println!("\nscan over {:?} on {:?}: passed = {}", r.parameter, r.grid, r.passed);
        for row in &r.rows {
            println!("  t = {:>4}: {:?}", row.t, row.values);
        }
    }
    Ok(())
}
