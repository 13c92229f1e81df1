//! Drives a JSON experiment the way the `tsallis-dia` binary does.
//!
//! ```sh
//! cargo run --release --example run_config -- crates/core/examples/configs/cross_domain.json
//! ```

use std::path::PathBuf;

use tsallis_dia::cli::{closure, compare, simulate, ExperimentConfig, Output};

fn main() -> tsallis_dia::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/configs/cross_domain.json"
        ))
    });
    let cfg = ExperimentConfig::load(&path)?;
    let out = Output::new(std::env::temp_dir().join("tsallis-dia-example"));
    if cfg.ensemble.is_some() {
        println!("simulate: {:?}", simulate(&cfg, &out)?);
    }
    if !cfg.methods.is_empty() {
        println!("closure: {:?}", closure(&cfg, &out)?);
    }
    if cfg.compare.is_some() {
        println!("compare: {:?}", compare(&cfg, &out)?);
    }
    println!("outputs in {}", out.dir().display());
    Ok(())
}
