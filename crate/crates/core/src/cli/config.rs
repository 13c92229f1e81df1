//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::closures::{ClosureProblem, Method};
use crate::error::{Error, Result};
use crate::gamma_compound::GammaParams;
use crate::kernels::{KernelKind, NoiseKernel};
use crate::noise::{EnsembleSpec, Sampler, TimeGrid};
use crate::oscillator::{Model, OscillatorConfig};
use crate::qcore::QIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    #[serde(default)]
    pub methods: Vec<Method>,
    pub kernel: KernelSection,
    pub oscillator: OscillatorSection,
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub kind: KernelKind,
    #[serde(default = "one")]
    pub q: f64,
    pub lambda0: f64,
    pub sigma_b2: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSection {
    pub nu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dt: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Ou,
    CompoundOu,
    GaussianQexp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_realizations: usize,
    pub master_seed: u64,
    pub sampler: SamplerKind,
    #[serde(default)]
    pub allow_sub_unit_q: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Time,
    Laplace,
}

/// A curve that can be produced from the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveSource {
    MonteCarlo,
    Oracle,
    Closure { method: Method, domain: Domain },
    WhiteNoise,
    LargeTime,
}

impl std::fmt::Display for CurveSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveSource::MonteCarlo => f.write_str("monte-carlo"),
            CurveSource::Oracle => f.write_str("oracle"),
            CurveSource::Closure { method, domain } => {
                let d = match domain {
                    Domain::Time => "time",
                    Domain::Laplace => "laplace",
                };
                write!(f, "{method}-{d}")
            }
            CurveSource::WhiteNoise => f.write_str("white-noise"),
            CurveSource::LargeTime => f.write_str("large-time"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rms: Option<f64>,
    /// `|z|` bound applied when standard errors are available
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
    /// required fraction of z-scores within `z_max` (default 1)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    /// the first source is the reference
    pub sources: Vec<CurveSource>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// not embedded in artifacts, so that re-runs into another directory are byte-identical
    #[serde(default, skip_serializing)]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    /// number of noise realizations to dump as `t,b` CSV files
    #[serde(default)]
    pub dump_paths: usize,
    /// Laplace-domain curves are inverted at every `laplace_stride`-th node
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laplace_stride: Option<usize>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: None,
            formats: default_formats(),
            dump_paths: 0,
            laplace_stride: None,
        }
    }
}

fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Config {
        path: path.to_string(),
        reason: e.to_string(),
    })
}

fn config_error(path: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_error("<root>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_error(&path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    /// Re-checks every module invariant the configuration touches.
    pub fn validate(&self) -> Result<()> {
        self.noise_kernel()?;
        self.oscillator()?;
        self.grid()?;
        if let Some(e) = &self.ensemble {
            self.ensemble_spec(e.master_seed)?;
        }
        if self.model != Model::FullKernel && !self.methods.is_empty() {
            for m in &self.methods {
                self.closure_problem(*m)?;
            }
        }
        if let Some(c) = &self.compare {
            if c.sources.len() < 2 {
                return Err(config_error("compare.sources", "needs at least two curve sources"));
            }
            let t = &c.tolerances;
            for (name, v) in [("max_abs", t.max_abs), ("rms", t.rms), ("z_max", t.z_max)] {
                if let Some(v) = v {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(config_error(&format!("compare.tolerances.{name}"), "must be positive"));
                    }
                }
            }
            if let Some(f) = t.z_fraction {
                if !(0.0..=1.0).contains(&f) {
                    return Err(config_error("compare.tolerances.z_fraction", "must lie in [0, 1]"));
                }
            }
        }
        if self.output.laplace_stride == Some(0) {
            return Err(config_error("output.laplace_stride", "must be at least 1"));
        }
        if self.output.formats.is_empty() {
            return Err(config_error("output.formats", "needs at least one format"));
        }
        Ok(())
    }

    pub fn noise_kernel(&self) -> Result<NoiseKernel> {
        let k = &self.kernel;
        let q = at("kernel.q", QIndex::new(k.q))?;
        if k.kind != KernelKind::Tsallis && k.q != 1.0 {
            return Err(config_error(
                "kernel.q",
                format!("q applies to tsallis kernels only, not {}", k.kind),
            ));
        }
        at(
            "kernel",
            match k.kind {
                KernelKind::Ou => NoiseKernel::ou(k.sigma_b2, k.lambda0),
                KernelKind::Tsallis => NoiseKernel::tsallis(k.sigma_b2, k.lambda0, q),
                KernelKind::LinearSmallLambda => NoiseKernel::linear_small_lambda(k.sigma_b2, k.lambda0),
                KernelKind::White => NoiseKernel::white(k.sigma_b2, k.lambda0),
            },
        )
    }

    pub fn oscillator(&self) -> Result<OscillatorConfig> {
        at(
            "oscillator",
            OscillatorConfig::new(self.model, self.oscillator.nu, self.oscillator.mu),
        )
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        at("grid", TimeGrid::with_horizon(self.grid.dt, self.grid.t_max))
    }

    /// Gamma law whose compound autocovariance is the configured q-exponential.
    pub fn gamma(&self) -> Result<GammaParams> {
        at(
            "kernel.q",
            GammaParams::from_tsallis(QIndex::new(self.kernel.q)?, self.kernel.lambda0),
        )
    }

    pub fn sampler(&self) -> Result<Sampler> {
        let e = self
            .ensemble
            .as_ref()
            .ok_or_else(|| config_error("ensemble", "section required for Monte Carlo runs"))?;
        let kernel = self.noise_kernel()?;
        match e.sampler {
            SamplerKind::Ou => {
                if kernel.kind() != KernelKind::Ou {
                    return Err(config_error("ensemble.sampler", "the ou sampler needs an ou kernel"));
                }
                Ok(Sampler::Ou {
                    lambda: kernel.lambda0(),
                    sigma_b2: kernel.sigma_b2(),
                })
            }
            SamplerKind::CompoundOu => {
                if kernel.kind() != KernelKind::Tsallis {
                    return Err(config_error(
                        "ensemble.sampler",
                        "compound-ou needs a tsallis kernel with q > 1",
                    ));
                }
                Ok(Sampler::CompoundOu {
                    gamma: self.gamma()?,
                    sigma_b2: kernel.sigma_b2(),
                })
            }
            SamplerKind::GaussianQexp => {
                if !matches!(kernel.kind(), KernelKind::Tsallis | KernelKind::Ou) {
                    return Err(config_error(
                        "ensemble.sampler",
                        "gaussian-qexp needs a tsallis or ou kernel",
                    ));
                }
                Ok(Sampler::GaussianQexp {
                    kernel,
                    allow_sub_unit_q: e.allow_sub_unit_q,
                })
            }
        }
    }

    pub fn ensemble_spec(&self, master_seed: u64) -> Result<EnsembleSpec> {
        let e = self
            .ensemble
            .as_ref()
            .ok_or_else(|| config_error("ensemble", "section required for Monte Carlo runs"))?;
        let sampler = self.sampler()?;
        at(
            "ensemble.n_realizations",
            EnsembleSpec::new(e.n_realizations, master_seed, sampler),
        )
    }

    pub fn closure_problem(&self, method: Method) -> Result<ClosureProblem> {
        at(
            "model",
            ClosureProblem::new(method, self.noise_kernel()?, self.oscillator()?),
        )
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "model": "markov",
        "kernel": {"kind": "tsallis", "q": 1.2, "lambda0": 1.0, "sigma_b2": 1.0},
        "oscillator": {"nu": 0.5},
        "grid": {"dt": 0.01, "t_max": 5.0},
        "ensemble": {"n_realizations": 100, "master_seed": 7, "sampler": "gaussian-qexp"}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(cfg.grid().unwrap().n(), 500);
        let again = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace("\"nu\": 0.5", "\"nu\": 0.5, \"damping\": 1");
        assert!(matches!(ExperimentConfig::from_json(&text), Err(Error::Config { .. })));
    }

    #[test]
    fn errors_carry_key_paths() {
        let text = BASE.replace("\"dt\": 0.01", "\"dt\": -1");
        match ExperimentConfig::from_json(&text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "grid"),
            other => panic!("{other:?}"),
        }
        let text = BASE.replace("\"gaussian-qexp\"", "\"ou\"");
        match ExperimentConfig::from_json(&text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "ensemble.sampler"),
            other => panic!("{other:?}"),
        }
    }
}
