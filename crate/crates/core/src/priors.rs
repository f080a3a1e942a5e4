//! Prior densities on the real line and the constrained cosine prior.
//!
//! Among densities on `[-1, 1]` with `∫₀¹ q = a`, the minimal Fisher
//! information is reached by a squared cosine whose support width `w_a`
//! comes from the Kepler equation `y + sin(πy)/π = 2a - 1` through
//! `w_a = 2 / (|y| + 1)`. The minimum is `4π² / w_a²`.

use crate::error::{Error, Result};
use crate::models::DivergenceValue;
use crate::numerics::{find_root_bisect, phi};
use std::f64::consts::PI;

/// Bracket width used by [`min_fisher_constrained`] and friends.
pub const KEPLER_TOL: f64 = 1e-15;

/// Half-width, in prior standard deviations, of the window used to
/// integrate against a Gaussian prior.
const GAUSSIAN_SPAN: f64 = 40.0;

/// Support geometry of the constrained least-favorable cosine prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerSolution {
    pub a: f64,
    pub y_a: f64,
    pub w_a: f64,
    pub s_minus: f64,
    pub s_plus: f64,
    pub min_fisher: f64,
}

impl KeplerSolution {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.s_plus + self.s_minus)
    }

    /// Unit-scale density `(2/w) cos²(π(u - m)/w)` on `[s_minus, s_plus]`.
    pub fn density(&self, u: f64) -> f64 {
        if u < self.s_minus || u > self.s_plus {
            return 0.0;
        }
        let c = (PI * (u - self.midpoint()) / self.w_a).cos();
        2.0 / self.w_a * c * c
    }

    fn density_derivative(&self, u: f64) -> f64 {
        if u < self.s_minus || u > self.s_plus {
            return 0.0;
        }
        let x = PI * (u - self.midpoint()) / self.w_a;
        -2.0 * PI / (self.w_a * self.w_a) * (2.0 * x).sin()
    }

    /// `y + sin(πy)/π - (2a - 1)`.
    pub fn residual(&self) -> f64 {
        kepler_lhs(self.y_a) - (2.0 * self.a - 1.0)
    }
}

fn kepler_lhs(y: f64) -> f64 {
    y + (PI * y).sin() / PI
}

/// Solves the Kepler equation for `a ∈ [0, 1]` by bisection on `[-1, 1]`.
///
/// The map is flat at `y = ±1`, so Newton would stall there; bisection is
/// unaffected. Ties at `a = 1/2` take the symmetric support `[-1, 1]`.
pub fn solve_kepler(a: f64, tol: f64) -> Result<KeplerSolution> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::invalid("a", format!("{a} is outside [0, 1]")));
    }
    let target = 2.0 * a - 1.0;
    let y = if target >= 1.0 {
        1.0
    } else if target <= -1.0 {
        -1.0
    } else {
        find_root_bisect(|y| kepler_lhs(y) - target, -1.0, 1.0, tol)?
    };
    let w = 2.0 / (y.abs() + 1.0);
    let (s_minus, s_plus) = if a > 0.5 { (1.0 - w, 1.0) } else { (-1.0, w - 1.0) };
    Ok(KeplerSolution {
        a,
        y_a: y,
        w_a: w,
        s_minus,
        s_plus,
        min_fisher: 4.0 * PI * PI / (w * w),
    })
}

/// `inf { I(ν) : supp ν ⊆ [-1, 1], ν([0, 1]) = a } = 4π² / w_a²`.
pub fn min_fisher_constrained(a: f64) -> Result<f64> {
    Ok(solve_kepler(a, KEPLER_TOL)?.min_fisher)
}

/// Density of the constrained minimizer at `t` on the unit scale.
pub fn kepler_prior_density(a: f64, t: f64) -> Result<f64> {
    Ok(solve_kepler(a, KEPLER_TOL)?.density(t))
}

/// A prior density on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    /// `(1/hw) cos²(π(t - c)/(2 hw))` on `[c - hw, c + hw]`.
    Cosine { center: f64, halfwidth: f64 },
    /// The constrained cosine prior placed at `center + scale * u`.
    KeplerCosine { a: f64, solution: KeplerSolution, center: f64, scale: f64 },
    Gaussian { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
}

/// Reasons a prior fails the regularity needed by the mixture bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NicenessViolation {
    NotAbsolutelyContinuous,
    InfiniteFisherInformation,
    BoundaryDecay,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NicenessReport {
    pub is_nice: bool,
    pub reasons: Vec<NicenessViolation>,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be finite and > 0")))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

impl Prior {
    pub fn cosine(center: f64, halfwidth: f64) -> Result<Self> {
        finite("center", center)?;
        positive("halfwidth", halfwidth)?;
        Ok(Prior::Cosine { center, halfwidth })
    }

    pub fn kepler(a: f64, center: f64, scale: f64) -> Result<Self> {
        finite("center", center)?;
        positive("scale", scale)?;
        Ok(Prior::KeplerCosine {
            a,
            solution: solve_kepler(a, KEPLER_TOL)?,
            center,
            scale,
        })
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        finite("mu", mu)?;
        positive("sigma", sigma)?;
        Ok(Prior::Gaussian { mu, sigma })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        finite("lo", lo)?;
        finite("hi", hi)?;
        if !(lo < hi) {
            return Err(Error::invalid("uniform prior", format!("lo = {lo} must be < hi = {hi}")));
        }
        Ok(Prior::Uniform { lo, hi })
    }

    pub fn density(&self, t: f64) -> f64 {
        match *self {
            Prior::Cosine { center, halfwidth } => {
                let u = (t - center) / halfwidth;
                if u.abs() > 1.0 {
                    return 0.0;
                }
                let c = (0.5 * PI * u).cos();
                c * c / halfwidth
            }
            Prior::KeplerCosine { solution, center, scale, .. } => solution.density((t - center) / scale) / scale,
            Prior::Gaussian { mu, sigma } => phi((t - mu) / sigma) / sigma,
            Prior::Uniform { lo, hi } => {
                if (lo..=hi).contains(&t) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    /// Natural log of the density, `-inf` outside the support.
    pub fn log_density(&self, t: f64) -> f64 {
        match *self {
            Prior::Gaussian { mu, sigma } => {
                let z = (t - mu) / sigma;
                -0.5 * z * z - (sigma * (2.0 * PI).sqrt()).ln()
            }
            _ => self.density(t).ln(),
        }
    }

    /// Derivative of the density, zero outside the support. For the uniform
    /// prior this ignores the jumps at the endpoints.
    pub fn density_derivative(&self, t: f64) -> f64 {
        match *self {
            Prior::Cosine { center, halfwidth } => {
                let u = (t - center) / halfwidth;
                if u.abs() > 1.0 {
                    return 0.0;
                }
                -PI / (2.0 * halfwidth * halfwidth) * (PI * u).sin()
            }
            Prior::KeplerCosine { solution, center, scale, .. } => {
                solution.density_derivative((t - center) / scale) / (scale * scale)
            }
            Prior::Gaussian { mu, sigma } => -(t - mu) / (sigma * sigma) * self.density(t),
            Prior::Uniform { .. } => 0.0,
        }
    }

    /// Closed support; infinite ends for the Gaussian prior.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Prior::Cosine { center, halfwidth } => (center - halfwidth, center + halfwidth),
            Prior::KeplerCosine { solution, center, scale, .. } => {
                (center + scale * solution.s_minus, center + scale * solution.s_plus)
            }
            Prior::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Prior::Uniform { lo, hi } => (lo, hi),
        }
    }

    pub fn has_compact_support(&self) -> bool {
        !matches!(self, Prior::Gaussian { .. })
    }

    /// Finite window carrying all of the mass to double precision.
    pub fn integration_range(&self) -> (f64, f64) {
        match *self {
            Prior::Gaussian { mu, sigma } => (mu - GAUSSIAN_SPAN * sigma, mu + GAUSSIAN_SPAN * sigma),
            _ => self.support(),
        }
    }

    /// Points where the density is not smooth or changes scale, for
    /// splitting quadratures.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Prior::Gaussian { mu, sigma } => [-16.0, -8.0, -4.0, -1.0, 0.0, 1.0, 4.0, 8.0, 16.0]
                .iter()
                .map(|k| mu + k * sigma)
                .collect(),
            Prior::KeplerCosine { solution, center, scale, .. } => {
                let (lo, hi) = self.support();
                vec![lo, center + scale * solution.midpoint(), hi]
            }
            _ => {
                let (lo, hi) = self.support();
                vec![lo, 0.5 * (lo + hi), hi]
            }
        }
    }

    /// A typical length scale: half-width, scale or standard deviation.
    pub fn dispersion(&self) -> f64 {
        match *self {
            Prior::Cosine { halfwidth, .. } => halfwidth,
            Prior::KeplerCosine { solution, scale, .. } => 0.5 * solution.w_a * scale,
            Prior::Gaussian { sigma, .. } => sigma,
            Prior::Uniform { lo, hi } => 0.5 * (hi - lo),
        }
    }

    /// Location Fisher information `∫ q'² / q`.
    pub fn fisher_info(&self) -> DivergenceValue {
        match *self {
            Prior::Cosine { halfwidth, .. } => DivergenceValue::Finite(PI * PI / (halfwidth * halfwidth)),
            Prior::KeplerCosine { solution, scale, .. } => DivergenceValue::Finite(solution.min_fisher / (scale * scale)),
            Prior::Gaussian { sigma, .. } => DivergenceValue::Finite(1.0 / (sigma * sigma)),
            Prior::Uniform { .. } => DivergenceValue::Divergent,
        }
    }

    /// The prior of `center + scale * T` where `T` has this prior.
    pub fn dilate(&self, center: f64, scale: f64) -> Result<Self> {
        finite("center", center)?;
        positive("scale", scale)?;
        Ok(match *self {
            Prior::Cosine { center: c, halfwidth } => Prior::Cosine {
                center: center + scale * c,
                halfwidth: scale * halfwidth,
            },
            Prior::KeplerCosine { a, solution, center: c, scale: s } => Prior::KeplerCosine {
                a,
                solution,
                center: center + scale * c,
                scale: scale * s,
            },
            Prior::Gaussian { mu, sigma } => Prior::Gaussian {
                mu: center + scale * mu,
                sigma: scale * sigma,
            },
            Prior::Uniform { lo, hi } => Prior::Uniform {
                lo: center + scale * lo,
                hi: center + scale * hi,
            },
        })
    }

    pub fn check_nice(&self) -> NicenessReport {
        let reasons = match self {
            Prior::Uniform { .. } => vec![NicenessViolation::BoundaryDecay, NicenessViolation::InfiniteFisherInformation],
            _ => Vec::new(),
        };
        NicenessReport {
            is_nice: reasons.is_empty(),
            reasons,
        }
    }

    pub(crate) fn require_nice(&self) -> Result<()> {
        let report = self.check_nice();
        if report.is_nice {
            Ok(())
        } else {
            Err(Error::NotNice(format!("{:?}", report.reasons)))
        }
    }
}
