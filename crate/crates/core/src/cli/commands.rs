//! `simulate`, `closure` and `compare`.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use tempfile::NamedTempFile;

use crate::closures::{laplace_inverted, large_time_solution, solve_time_domain, white_noise_solution};
use crate::error::{Error, Result};
use crate::noise::{PathGenerator, Sampler, TimeGrid};
use crate::oscillator::{ensemble_mean_green, exact_compound_markov_mean, exact_markov_mean, GreenFunction, Model};

use super::config::{CurveSource, Domain, ExperimentConfig, Format, Tolerances};
use super::report::{compare_all, compare_curves, Curve, SCHEMA_VERSION};
use super::Status;

/// Output directory; every file is written to a temporary sibling and renamed into place.
#[derive(Debug, Clone)]
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let target = self.dir.join(name);
        let parent = target.parent().unwrap_or(&self.dir);
        std::fs::create_dir_all(parent)?;
        let mut tmp = NamedTempFile::new_in(parent)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).map_err(|e| Error::Io(e.error))?;
        Ok(target)
    }
}

/// `# config=` and `# master_seed=` lines heading every CSV.
fn csv_header(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let mut h = format!("# config={}\n", serde_json::to_string(cfg)?);
    if let Some(e) = &cfg.ensemble {
        h.push_str(&format!("# master_seed={}\n", e.master_seed));
    }
    Ok(h.into_bytes())
}

fn write_curve(out: &Output, cfg: &ExperimentConfig, name: &str, curve: &Curve, files: &mut Vec<String>) -> Result<()> {
    if cfg.wants(Format::Csv) {
        let mut bytes = csv_header(cfg)?;
        curve.write_csv(&mut bytes)?;
        out.write(name, &bytes)?;
        files.push(name.to_string());
    }
    Ok(())
}

fn write_json<T: Serialize>(
    out: &Output,
    cfg: &ExperimentConfig,
    name: &str,
    value: &T,
    files: &mut Vec<String>,
) -> Result<()> {
    if cfg.wants(Format::Json) {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        out.write(name, text.as_bytes())?;
        files.push(name.to_string());
    }
    Ok(())
}

fn master_seed(cfg: &ExperimentConfig) -> Result<u64> {
    cfg.ensemble
        .as_ref()
        .map(|e| e.master_seed)
        .ok_or_else(|| Error::Config {
            path: "ensemble".into(),
            reason: "section required for Monte Carlo runs".into(),
        })
}

fn monte_carlo(cfg: &ExperimentConfig) -> Result<GreenFunction> {
    let spec = cfg.ensemble_spec(master_seed(cfg)?)?;
    ensemble_mean_green(&spec, &cfg.oscillator()?, &cfg.grid()?)
}

/// Exact ensemble mean, available for the Markov model.
fn oracle(cfg: &ExperimentConfig) -> Result<Option<GreenFunction>> {
    if cfg.model != Model::Markov {
        return Ok(None);
    }
    let grid = cfg.grid()?;
    let nu = cfg.oscillator.nu;
    let sampler = match &cfg.ensemble {
        Some(_) => Some(cfg.sampler()?),
        None => None,
    };
    match sampler {
        Some(Sampler::CompoundOu { gamma, sigma_b2 }) => {
            Ok(Some(exact_compound_markov_mean(gamma, sigma_b2, nu, &grid)?))
        }
        _ => {
            let k = cfg.noise_kernel()?;
            match exact_markov_mean(&k, nu, &grid) {
                Ok(g) => Ok(Some(g)),
                Err(Error::InvalidParameter { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        }
    }
}

fn laplace_nodes(cfg: &ExperimentConfig, grid: &TimeGrid) -> Vec<usize> {
    let stride = cfg.output.laplace_stride.unwrap_or((grid.n() / 200).max(1));
    (0..grid.len()).step_by(stride).collect()
}

fn closure_curve(cfg: &ExperimentConfig, source: CurveSource) -> Result<Curve> {
    let grid = cfg.grid()?;
    let name = source.to_string();
    match source {
        CurveSource::MonteCarlo => Ok(Curve::from_green(name, &monte_carlo(cfg)?)),
        CurveSource::Oracle => oracle(cfg)?
            .map(|g| Curve::from_green(name, &g))
            .ok_or_else(|| Error::Config {
                path: "compare.sources".into(),
                reason: "no exact oracle for this model and noise".into(),
            }),
        CurveSource::Closure { method, domain } => {
            let prob = cfg.closure_problem(method)?;
            match domain {
                Domain::Time => Ok(Curve::from_green(name, &solve_time_domain(&prob, &grid)?)),
                Domain::Laplace => {
                    let nodes = laplace_nodes(cfg, &grid);
                    let times: Vec<f64> = nodes.iter().map(|&i| grid.t(i)).collect();
                    Ok(Curve::from_real(name, grid, nodes, laplace_inverted(&prob, &times)?))
                }
            }
        }
        CurveSource::WhiteNoise | CurveSource::LargeTime => {
            if cfg.model == Model::FullKernel {
                return Err(Error::Config {
                    path: "compare.sources".into(),
                    reason: format!("{source} has no full-kernel form"),
                });
            }
            let k = cfg.noise_kernel()?;
            let (s2, l0, nu, model) = (k.sigma_b2(), k.lambda0(), cfg.oscillator.nu, cfg.model);
            let f = if source == CurveSource::WhiteNoise {
                white_noise_solution
            } else {
                large_time_solution
            };
            let values = grid
                .times()
                .map(|t| match model {
                    Model::Markov => (-nu * t).exp() * f(model, s2, l0, nu, t),
                    _ => f(model, s2, l0, nu, t),
                })
                .collect();
            Ok(Curve::from_real(name, grid, (0..grid.len()).collect(), values))
        }
    }
}

/// Runs the Monte Carlo ensemble and writes `green_monte_carlo.csv`,
/// `green_oracle.csv` when an oracle exists, and `summary.json`.
pub fn simulate(cfg: &ExperimentConfig, out: &Output) -> Result<Status> {
    let seed = master_seed(cfg)?;
    let spec = cfg.ensemble_spec(seed)?;
    let grid = cfg.grid()?;
    let generator = PathGenerator::new(&spec.sampler, &grid)?;
    let mc = ensemble_mean_green(&spec, &cfg.oscillator()?, &grid)?;
    let mut files = Vec::new();

    let mc_curve = Curve::from_green("monte-carlo", &mc);
    write_curve(out, cfg, "green_monte_carlo.csv", &mc_curve, &mut files)?;

    let comparison = match oracle(cfg)? {
        Some(g) => {
            let o = Curve::from_green("oracle", &g);
            write_curve(out, cfg, "green_oracle.csv", &o, &mut files)?;
            let tol = Tolerances {
                z_max: Some(3.0),
                z_fraction: Some(0.99),
                ..Tolerances::default()
            };
            Some(compare_curves(&mc_curve, &o, &tol)?)
        }
        None => None,
    };

    for i in 0..cfg.output.dump_paths.min(spec.n_realizations) {
        let mut bytes = csv_header(cfg)?;
        generator.realization(seed, i as u64).write_csv(&mut bytes)?;
        let name = format!("paths/path_{i:05}.csv");
        out.write(&name, &bytes)?;
        files.push(name);
    }

    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "config": cfg,
        "master_seed": seed,
        "n_realizations": spec.n_realizations,
        "sampler": spec.sampler.name(),
        "factorization": generator.factor_report(),
        "oracle_comparison": comparison,
        "files": files,
    });
    write_json(out, cfg, "summary.json", &summary, &mut files)?;
    Ok(Status::Passed)
}

/// Solves every configured closure in both domains and writes
/// `closure_<method>_time.csv`, `closure_<method>_laplace.csv` and `closure.json`.
pub fn closure(cfg: &ExperimentConfig, out: &Output) -> Result<Status> {
    if cfg.methods.is_empty() {
        return Err(Error::Config {
            path: "methods".into(),
            reason: "list at least one closure method".into(),
        });
    }
    let mut files = Vec::new();
    let mut agreement = Vec::new();
    for &method in &cfg.methods {
        let time = closure_curve(
            cfg,
            CurveSource::Closure {
                method,
                domain: Domain::Time,
            },
        )?;
        let laplace = closure_curve(
            cfg,
            CurveSource::Closure {
                method,
                domain: Domain::Laplace,
            },
        )?;
        write_curve(out, cfg, &format!("closure_{method}_time.csv"), &time, &mut files)?;
        write_curve(out, cfg, &format!("closure_{method}_laplace.csv"), &laplace, &mut files)?;
        agreement.push(compare_curves(&time, &laplace, &Tolerances::default())?);
    }
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "closure",
        "config": cfg,
        "time_vs_laplace": agreement,
        "files": files,
    });
    write_json(out, cfg, "closure.json", &summary, &mut files)?;
    Ok(Status::Passed)
}

/// Builds every configured curve, compares them against the first and
/// writes `report.json`; fails when any declared tolerance is exceeded.
pub fn compare(cfg: &ExperimentConfig, out: &Output) -> Result<Status> {
    let section = cfg.compare.as_ref().ok_or_else(|| Error::Config {
        path: "compare".into(),
        reason: "section required for comparisons".into(),
    })?;
    let curves = section
        .sources
        .iter()
        .map(|&s| closure_curve(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let report = compare_all(&curves, &section.tolerances)?;
    let mut files = Vec::new();
    for c in &curves {
        write_curve(out, cfg, &format!("curve_{}.csv", c.name), c, &mut files)?;
    }
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "compare",
        "config": cfg,
        "report": report,
        "files": files,
    });
    // report.json is always written: it is the product of the command
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    out.write("report.json", text.as_bytes())?;
    Ok(if report.passed { Status::Passed } else { Status::Failed })
}
