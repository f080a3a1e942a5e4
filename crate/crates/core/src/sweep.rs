//! Bound-versus-risk curves for `max(θ, 0)` under `N(θ, σ²)`.
//!
//! Rows are computed in parallel and returned in grid order, so the CSV
//! bytes depend only on the configuration.

use crate::bounds::{diffeo_bound_sup, two_point_hellinger_sup, vt_kepler_bound, Functional};
use crate::error::{Error, Result};
use crate::estimators::{constant_local_minimax_risk, local_minimax_risk, EstimatorSpec};
use crate::models::Family;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::io::{self, Write};

pub const CSV_HEADER: &str = "delta,n,bound_vt,bound_diffeo,bound_twopoint,risk_constant,risk_plugin,risk_pretest";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepMethod {
    Vt,
    Diffeo,
    TwoPoint,
}

impl SweepMethod {
    pub const ALL: [SweepMethod; 3] = [SweepMethod::Vt, SweepMethod::Diffeo, SweepMethod::TwoPoint];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vt" => Ok(SweepMethod::Vt),
            "diffeo" => Ok(SweepMethod::Diffeo),
            "twopoint" => Ok(SweepMethod::TwoPoint),
            other => Err(Error::invalid("method", format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepEstimator {
    Constant,
    Plugin,
    PreTest,
}

impl SweepEstimator {
    pub const ALL: [SweepEstimator; 3] = [SweepEstimator::Constant, SweepEstimator::Plugin, SweepEstimator::PreTest];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(SweepEstimator::Constant),
            "plugin" => Ok(SweepEstimator::Plugin),
            "pretest" => Ok(SweepEstimator::PreTest),
            other => Err(Error::invalid("estimator", format!("unknown estimator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepMode {
    /// Fixed `n`, one row per `δ`.
    VaryDelta { n: u64, deltas: Vec<f64> },
    /// Fixed `δ`, one row per `n`.
    VaryN { delta: f64, ns: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mode: SweepMode,
    pub sigma: f64,
    pub methods: BTreeSet<SweepMethod>,
    pub estimators: BTreeSet<SweepEstimator>,
}

impl SweepConfig {
    /// Every method and estimator at `σ = 1`.
    pub fn new(mode: SweepMode) -> Self {
        Self {
            mode,
            sigma: 1.0,
            methods: SweepMethod::ALL.into_iter().collect(),
            estimators: SweepEstimator::ALL.into_iter().collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("{} must be finite and > 0", self.sigma)));
        }
        match &self.mode {
            SweepMode::VaryDelta { n, deltas } => {
                if *n == 0 {
                    return Err(Error::invalid("n", "must be >= 1"));
                }
                strictly_increasing("delta grid", deltas)?;
                if deltas[0] <= 0.0 || !deltas[deltas.len() - 1].is_finite() {
                    return Err(Error::invalid("delta grid", "values must be finite and > 0"));
                }
            }
            SweepMode::VaryN { delta, ns } => {
                if !(*delta > 0.0 && delta.is_finite()) {
                    return Err(Error::invalid("delta", format!("{delta} must be finite and > 0")));
                }
                let as_f: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
                strictly_increasing("n grid", &as_f)?;
                if ns[0] == 0 {
                    return Err(Error::invalid("n grid", "values must be >= 1"));
                }
            }
        }
        Ok(())
    }

    fn points(&self) -> Vec<(f64, u64)> {
        match &self.mode {
            SweepMode::VaryDelta { n, deltas } => deltas.iter().map(|&d| (d, *n)).collect(),
            SweepMode::VaryN { delta, ns } => ns.iter().map(|&n| (*delta, n)).collect(),
        }
    }
}

fn strictly_increasing(name: &'static str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid(name, "must not be empty"));
    }
    if v.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(name, "must be strictly increasing"));
    }
    Ok(())
}

/// `points` values spaced evenly in `log10` from `lo` to `hi`, inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::invalid("grid", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    if points < 2 {
        return Err(Error::invalid("grid", "need at least 2 points"));
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..points)
        .map(|i| match i {
            0 => lo,
            i if i + 1 == points => hi,
            i => 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64),
        })
        .collect())
}

/// The default figure grid: 50 points in `[1e-2, 1e2]`.
pub fn default_delta_grid() -> Vec<f64> {
    log_grid(1e-2, 1e2, 50).expect("constant arguments")
}

/// One output line. Every value is `n`-scaled; `None` is an empty cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub delta: f64,
    pub n: u64,
    pub bound_vt: Option<f64>,
    pub bound_diffeo: Option<f64>,
    pub bound_twopoint: Option<f64>,
    pub risk_constant: Option<f64>,
    pub risk_plugin: Option<f64>,
    pub risk_pretest: Option<f64>,
}

impl CsvRow {
    pub fn bounds(&self) -> impl Iterator<Item = f64> {
        [self.bound_vt, self.bound_diffeo, self.bound_twopoint].into_iter().flatten()
    }

    pub fn risks(&self) -> impl Iterator<Item = f64> {
        [self.risk_constant, self.risk_plugin, self.risk_pretest].into_iter().flatten()
    }

    /// Smallest `risk - bound` over every pair in the row.
    pub fn dominance_margin(&self) -> Option<f64> {
        let lowest_risk = self.risks().reduce(f64::min)?;
        let highest_bound = self.bounds().reduce(f64::max)?;
        Some(lowest_risk - highest_bound)
    }

    /// Shortest round-trip decimal for every cell.
    pub fn to_csv_line(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.delta,
            self.n,
            cell(self.bound_vt),
            cell(self.bound_diffeo),
            cell(self.bound_twopoint),
            cell(self.risk_constant),
            cell(self.risk_plugin),
            cell(self.risk_pretest),
        )
    }
}

/// Computes one row; `σ` enters through `value_σ(δ) = σ² value₁(δ/σ)`.
/// The pre-test threshold is `σ n^{-1/4}`.
pub fn compute_row(config: &SweepConfig, delta: f64, n: u64) -> Result<CsvRow> {
    let s = config.sigma;
    let s2 = s * s;
    let unit = delta / s;
    let has_m = |m| config.methods.contains(&m);
    let has_e = |e| config.estimators.contains(&e);
    let family = Family::gaussian(s)?;
    Ok(CsvRow {
        delta,
        n,
        bound_vt: if has_m(SweepMethod::Vt) {
            Some(vt_kepler_bound(delta, n, 1.0 / s2)?.value)
        } else {
            None
        },
        bound_diffeo: if has_m(SweepMethod::Diffeo) {
            Some(s2 * diffeo_bound_sup(unit, n)?.value)
        } else {
            None
        },
        bound_twopoint: if has_m(SweepMethod::TwoPoint) {
            Some(two_point_hellinger_sup(family, n, Functional::MaxZero, 0.0, delta)?.value)
        } else {
            None
        },
        risk_constant: if has_e(SweepEstimator::Constant) {
            Some(constant_local_minimax_risk(delta, n)?)
        } else {
            None
        },
        risk_plugin: if has_e(SweepEstimator::Plugin) {
            Some(s2 * local_minimax_risk(EstimatorSpec::PluginMle, unit, n)?)
        } else {
            None
        },
        risk_pretest: if has_e(SweepEstimator::PreTest) {
            // Threshold σ n^{-1/4}, i.e. the default on the unit scale.
            Some(s2 * local_minimax_risk(EstimatorSpec::PreTest { threshold: None }, unit, n)?)
        } else {
            None
        },
    })
}

/// All rows of the sweep, in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<CsvRow>> {
    config.validate()?;
    config
        .points()
        .into_par_iter()
        .map(|(d, n)| compute_row(config, d, n))
        .collect()
}

/// Header plus one line per row, LF endings.
pub fn write_csv<W: Write>(rows: &[CsvRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv_line())?;
    }
    Ok(())
}

pub fn csv_string(rows: &[CsvRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ASCII output")
}
