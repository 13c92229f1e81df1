//! The delta limit of the gamma law and paths in the `(ℓ, λ)` plane.
//!
//! ```sh
//! cargo run --example limit_paths
//! ```

use tsallis_dia::cli::verify::delta_limit_table;
use tsallis_dia::kernels::{limit_path_value, LimitPath};

fn main() -> tsallis_dia::Result<()> {
    let shapes = [10.0, 100.0, 1e3, 1e4];
    println!("|E[f(lambda)] - f(lambda0)| for a gamma law of mean 1 and shape c");
    println!(
        "{:>14} {}",
        "probe",
        shapes.map(|c| format!("{:>12}", format!("c = {c}"))).join("")
    );
    for (name, errs) in delta_limit_table(&shapes)? {
        println!(
            "{name:>14} {}",
            errs.iter().map(|e| format!("{e:>12.3e}")).collect::<String>()
        );
    }

    let paths = [
        LimitPath::new("ell = 0, lambda = N", |_| 0.0, |n| n as f64),
        LimitPath::new("ell = 1/N, lambda = 1", |n| 1.0 / n as f64, |_| 1.0),
        LimitPath::new("ell = 1/N, lambda = N", |n| 1.0 / n as f64, |n| n as f64),
        LimitPath::new("ell = 1/N^2, lambda = N", |n| 1.0 / (n * n) as f64, |n| n as f64),
    ];
    println!("\ne_q^(-lambda t) at t = 1 with q = 1 - ell along each path");
    for p in &paths {
        let vals: Vec<String> = [1u64, 10, 100, 1000]
            .iter()
            .map(|&n| limit_path_value(p, n, 1.0).map(|v| format!("{v:>11.4e}")))
            .collect::<tsallis_dia::Result<_>>()?;
        println!("{:>26}: {}", p.description(), vals.join(" "));
    }
    Ok(())
}
