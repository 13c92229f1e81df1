//! Curves on a shared grid and their comparison reports.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::TimeGrid;
use crate::oscillator::GreenFunction;

use super::config::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;

/// Values at a subset of the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub grid: TimeGrid,
    pub nodes: Vec<usize>,
    pub values: Vec<Complex64>,
    pub stderr: Option<Vec<Complex64>>,
}

impl Curve {
    pub fn from_green(name: impl Into<String>, g: &GreenFunction) -> Self {
        Self {
            name: name.into(),
            grid: *g.grid(),
            nodes: (0..g.grid().len()).collect(),
            values: g.values().to_vec(),
            stderr: g.stderr().map(<[Complex64]>::to_vec),
        }
    }

    pub fn from_real(name: impl Into<String>, grid: TimeGrid, nodes: Vec<usize>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            grid,
            nodes,
            values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            stderr: None,
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        match &self.stderr {
            Some(se) => {
                writeln!(w, "t,re,im,stderr_re,stderr_im")?;
                for ((n, v), e) in self.nodes.iter().zip(&self.values).zip(se) {
                    writeln!(w, "{},{},{},{},{}", self.grid.t(*n), v.re, v.im, e.re, e.im)?;
                }
            }
            None => {
                writeln!(w, "t,re,im")?;
                for (n, v) in self.nodes.iter().zip(&self.values) {
                    writeln!(w, "{},{},{}", self.grid.t(*n), v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZScores {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// nodes skipped because both standard errors vanish
    pub skipped_nodes: usize,
    pub max_abs: f64,
    pub fraction_within: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveComparison {
    pub name: String,
    pub nodes: usize,
    pub max_abs: f64,
    pub rms: f64,
    pub z_scores: Option<ZScores>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub reference: String,
    pub tolerances: Tolerances,
    pub curves: Vec<CurveComparison>,
    pub passed: bool,
}

/// Compares `other` against `reference` on their common nodes.
pub fn compare_curves(reference: &Curve, other: &Curve, tol: &Tolerances) -> Result<CurveComparison> {
    if reference.grid != other.grid {
        return Err(Error::GridMismatch(format!(
            "{} is on {:?}, {} on {:?}",
            reference.name, reference.grid, other.name, other.grid
        )));
    }
    let mut pairs = Vec::new();
    let mut j = 0;
    for (i, n) in reference.nodes.iter().enumerate() {
        while j < other.nodes.len() && other.nodes[j] < *n {
            j += 1;
        }
        if j < other.nodes.len() && other.nodes[j] == *n {
            pairs.push((i, j));
        }
    }
    if pairs.is_empty() {
        return Err(Error::GridMismatch(format!(
            "{} and {} share no nodes",
            reference.name, other.name
        )));
    }
    let diffs: Vec<Complex64> = pairs
        .iter()
        .map(|&(i, j)| other.values[j] - reference.values[i])
        .collect();
    let max_abs = diffs.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let rms = (diffs.iter().map(|d| d.norm_sqr()).sum::<f64>() / diffs.len() as f64).sqrt();

    let zero = Complex64::new(0.0, 0.0);
    let z_scores = if reference.stderr.is_some() || other.stderr.is_some() {
        let se = |c: &Curve, k: usize| c.stderr.as_ref().map_or(zero, |s| s[k]);
        let (mut re, mut im, mut skipped) = (Vec::new(), Vec::new(), 0);
        for (&(i, j), d) in pairs.iter().zip(&diffs) {
            let (a, b) = (se(reference, i), se(other, j));
            let s_re = a.re.hypot(b.re);
            let s_im = a.im.hypot(b.im);
            if s_re > 0.0 && s_im > 0.0 {
                re.push(d.re / s_re);
                im.push(d.im / s_im);
            } else if s_re > 0.0 {
                re.push(d.re / s_re);
            } else {
                skipped += 1;
            }
        }
        let all = re.iter().chain(&im);
        let max_abs = all.clone().map(|z| z.abs()).fold(0.0, f64::max);
        let count = re.len() + im.len();
        let fraction_within = tol
            .z_max
            .filter(|_| count > 0)
            .map(|zm| all.filter(|z| z.abs() <= zm).count() as f64 / count as f64);
        Some(ZScores {
            re,
            im,
            skipped_nodes: skipped,
            max_abs,
            fraction_within,
        })
    } else {
        None
    };

    let mut passed = true;
    if let Some(m) = tol.max_abs {
        passed &= max_abs <= m;
    }
    if let Some(m) = tol.rms {
        passed &= rms <= m;
    }
    if let (Some(z), Some(_)) = (&z_scores, tol.z_max) {
        passed &= z.fraction_within.unwrap_or(1.0) >= tol.z_fraction.unwrap_or(1.0);
    }
    Ok(CurveComparison {
        name: other.name.clone(),
        nodes: pairs.len(),
        max_abs,
        rms,
        z_scores,
        passed,
    })
}

/// Compares every curve after the first against the first.
pub fn compare_all(curves: &[Curve], tol: &Tolerances) -> Result<ComparisonReport> {
    let (reference, rest) = curves
        .split_first()
        .ok_or_else(|| Error::GridMismatch("nothing to compare".into()))?;
    let curves = rest
        .iter()
        .map(|c| compare_curves(reference, c, tol))
        .collect::<Result<Vec<_>>>()?;
    let passed = curves.iter().all(|c| c.passed);
    Ok(ComparisonReport {
        schema_version: SCHEMA_VERSION,
        reference: reference.name.clone(),
        tolerances: *tol,
        curves,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::new(0.1, 4).unwrap()
    }

    #[test]
    fn identical_inputs_give_zero_error() {
        let c = Curve::from_real("a", grid(), (0..5).collect(), vec![1.0, 0.9, 0.8, 0.7, 0.6]);
        let tol = Tolerances {
            max_abs: Some(1e-12),
            ..Tolerances::default()
        };
        let r = compare_all(&[c.clone(), c], &tol).unwrap();
        assert_eq!(r.curves[0].max_abs, 0.0);
        assert_eq!(r.curves[0].rms, 0.0);
        assert!(r.passed);
        assert_eq!(r.schema_version, 1);
    }

    #[test]
    fn aligns_on_shared_nodes() {
        let full = Curve::from_real("full", grid(), (0..5).collect(), vec![1.0, 0.9, 0.8, 0.7, 0.6]);
        let sparse = Curve::from_real("sparse", grid(), vec![0, 2, 4], vec![1.0, 0.8, 0.5]);
        let r = compare_curves(&full, &sparse, &Tolerances::default()).unwrap();
        assert_eq!(r.nodes, 3);
        assert!((r.max_abs - 0.1).abs() < 1e-15);
    }

    #[test]
    fn z_scores_skip_exact_nodes() {
        let mut mc = Curve::from_real("mc", grid(), (0..5).collect(), vec![1.0, 0.9, 0.8, 0.7, 0.6]);
        mc.stderr = Some(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.01, 0.01),
            Complex64::new(0.01, 0.01),
            Complex64::new(0.01, 0.01),
            Complex64::new(0.01, 0.01),
        ]);
        let exact = Curve::from_real("exact", grid(), (0..5).collect(), vec![1.0, 0.91, 0.8, 0.74, 0.6]);
        let tol = Tolerances {
            z_max: Some(3.0),
            z_fraction: Some(0.99),
            ..Tolerances::default()
        };
        let r = compare_curves(&mc, &exact, &tol).unwrap();
        let z = r.z_scores.as_ref().unwrap();
        assert_eq!(z.skipped_nodes, 1);
        assert!((z.max_abs - 4.0).abs() < 1e-9);
        assert!(!r.passed);
    }

    #[test]
    fn mismatched_grids() {
        let a = Curve::from_real("a", grid(), vec![0], vec![1.0]);
        let b = Curve::from_real("b", TimeGrid::new(0.2, 4).unwrap(), vec![0], vec![1.0]);
        assert!(matches!(
            compare_curves(&a, &b, &Tolerances::default()),
            Err(Error::GridMismatch(_))
        ));
    }
}
