//! Exact risks of reference estimators of `max(θ, 0)` from `n` draws of
//! `N(θ, 1)`. Every value is `n` times the mean squared error.

use crate::error::{Error, Result};
use crate::numerics::{big_phi, gaussian_partial_second_moment, maximize_1d};

/// Fraction of `δ` used for the open endpoint `θ = δ⁻`.
const OPEN_END: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorSpec {
    /// Ignores the data and reports `c`.
    Constant { c: f64 },
    /// `max(X̄, 0)`.
    PluginMle,
    /// `X̄ 1{X̄ ≥ threshold}`; `None` means `n^{-1/4}`.
    PreTest { threshold: Option<f64> },
}

impl EstimatorSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EstimatorSpec::Constant { c } if !c.is_finite() => Err(Error::NonFinite("c")),
            EstimatorSpec::PreTest { threshold: Some(t) } if !(t > 0.0 && t.is_finite()) => {
                Err(Error::invalid("threshold", format!("{t} must be finite and > 0")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorSpec::Constant { .. } => "constant",
            EstimatorSpec::PluginMle => "plugin",
            EstimatorSpec::PreTest { .. } => "pretest",
        }
    }
}

/// Default pre-test threshold `n^{-1/4}`.
pub fn default_threshold(n: u64) -> f64 {
    (n as f64).powf(-0.25)
}

/// Risk of one estimator at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskPoint {
    pub theta: f64,
    pub n: u64,
    pub value: f64,
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("n", "must be >= 1"))
    } else {
        Ok(())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta >= 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("theta", format!("{theta} must be finite and >= 0")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("delta", format!("{delta} must be finite and > 0")))
    }
}

/// Best constant over `|θ| < δ`: `c = δ/2` with risk `nδ²/4`.
pub fn constant_local_minimax_risk(delta: f64, n: u64) -> Result<f64> {
    check_delta(delta)?;
    check_n(n)?;
    Ok(n as f64 * delta * delta / 4.0)
}

/// `n (c - max(θ, 0))²`.
pub fn constant_risk_at(c: f64, theta: f64, n: u64) -> Result<RiskPoint> {
    check_n(n)?;
    if !c.is_finite() || !theta.is_finite() {
        return Err(Error::NonFinite("constant or theta"));
    }
    Ok(RiskPoint {
        theta,
        n,
        value: n as f64 * (c - theta.max(0.0)).powi(2),
    })
}

/// `E[Z² 1{Z ≥ -m}] + m² Φ(-m)` with `m = √n θ`.
pub fn plugin_risk_at(theta: f64, n: u64) -> Result<RiskPoint> {
    check_theta(theta)?;
    check_n(n)?;
    let m = (n as f64).sqrt() * theta;
    let tail = if m == 0.0 { 0.0 } else { m * m * big_phi(-m) };
    Ok(RiskPoint {
        theta,
        n,
        value: gaussian_partial_second_moment(-m) + tail,
    })
}

/// `E[Z² 1{Z ≥ c}] + nθ² Φ(c)` with cutoff `c = √n (c_n - θ)`.
pub fn pretest_risk_at(theta: f64, n: u64, c_n: f64) -> Result<RiskPoint> {
    check_theta(theta)?;
    check_n(n)?;
    if !(c_n > 0.0 && c_n.is_finite()) {
        return Err(Error::invalid("threshold", format!("{c_n} must be finite and > 0")));
    }
    let sn = (n as f64).sqrt();
    let cut = sn * (c_n - theta);
    let tail = if theta == 0.0 { 0.0 } else { (sn * theta).powi(2) * big_phi(cut) };
    Ok(RiskPoint {
        theta,
        n,
        value: gaussian_partial_second_moment(cut) + tail,
    })
}

/// `sup_{|θ| < δ}` of the `n`-scaled risk.
///
/// Negative `θ` never raises the sup, so only `[0, δ)` is searched. The
/// plug-in risk is non-decreasing in `θ`; the pre-test risk is searched
/// where it varies, up to about 12 standard errors past the threshold, and
/// compared against the endpoint.
pub fn local_minimax_risk(spec: EstimatorSpec, delta: f64, n: u64) -> Result<f64> {
    spec.validate()?;
    check_delta(delta)?;
    check_n(n)?;
    let edge = delta * OPEN_END;
    match spec {
        EstimatorSpec::Constant { c } => {
            // Convex in θ on each side of zero; the sup sits at an end.
            let nf = n as f64;
            Ok(nf * c.powi(2).max((c - delta).powi(2)))
        }
        EstimatorSpec::PluginMle => Ok(plugin_risk_at(edge, n)?.value),
        EstimatorSpec::PreTest { threshold } => {
            let c_n = threshold.unwrap_or_else(|| default_threshold(n));
            let reach = edge.min(c_n + 12.0 / (n as f64).sqrt());
            let at = |t: f64| pretest_risk_at(t, n, c_n).map(|r| r.value).unwrap_or(f64::NAN);
            let inner = maximize_1d(at, 0.0, reach)?;
            Ok(inner.value.max(at(edge)).max(at(0.0)))
        }
    }
}
