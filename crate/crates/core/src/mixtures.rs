//! Divergences between the joint laws `ℙ₀(dx, dθ) = P_θ(dx) Q(dθ)` and
//! `ℙ_h(dx, dθ) = P_{θ+h}(dx) Q(dθ + h)`.
//!
//! The primary path never integrates over the sample space of `n`
//! observations. It uses the decompositions
//!
//! ```text
//! H²(ℙ_h, ℙ₀) = H²(Q_h, Q) + ∫ H²(P^n_{t+h}, P^n_t) sqrt(q(t+h) q(t)) dt
//! χ²(ℙ_h ‖ ℙ₀) = χ²(Q_h ‖ Q) + ∫ χ²(P^n_{t+h} ‖ P^n_t) q(t+h)² / q(t) dt
//! ```
//!
//! with the tensorized closed forms from [`crate::models`]. Integrands are
//! divided by `h²` before quadrature so that absolute tolerances stay
//! meaningful for small shifts.

use crate::error::{Error, Result};
use crate::models::{DivergenceValue, Family};
use crate::numerics::{integrate_pieces, QuadratureSpec};
use crate::priors::Prior;
use rayon::prelude::*;
use std::cell::RefCell;

/// Inputs shared by the mixture divergences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureSpec {
    pub family: Family,
    pub n: u64,
    pub prior: Prior,
    pub h: f64,
    pub quad: QuadratureSpec,
}

impl MixtureSpec {
    pub fn new(family: Family, n: u64, prior: Prior, h: f64) -> Self {
        Self {
            family,
            n,
            prior,
            h,
            quad: QuadratureSpec::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        self.family.validate()?;
        self.quad.validate()?;
        if self.n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        if !self.h.is_finite() {
            return Err(Error::NonFinite("h"));
        }
        Ok(())
    }

    /// Range where both `q(t)` and `q(t + h)` can be positive, checked
    /// against the family's parameter space.
    fn overlap(&self) -> Result<Option<(f64, f64)>> {
        let (lo, hi) = self.prior.integration_range();
        let (a, b) = (lo.max(lo - self.h), hi.min(hi - self.h));
        if a >= b {
            return Ok(None);
        }
        if matches!(self.family, Family::UniformScale) && a.min(a + self.h) < 0.0 {
            return Err(Error::invalid("prior", "uniform family needs prior mass on theta > 0 only"));
        }
        Ok(Some((a, b)))
    }
}

/// Quadrature layout for a function of `q(t)` and `q(t + h)`.
fn shifted_layout(prior: &Prior, h: f64) -> (f64, f64, Vec<f64>) {
    let (lo, hi) = prior.integration_range();
    let mut breaks = prior.breakpoints();
    breaks.extend(prior.breakpoints().iter().map(|b| b - h));
    breaks.sort_by(f64::total_cmp);
    (lo.min(lo - h), hi.max(hi - h), breaks)
}

/// Carries the first error out of an integrand that must return `f64`.
struct Trap(RefCell<Option<Error>>);

impl Trap {
    fn new() -> Self {
        Trap(RefCell::new(None))
    }

    fn catch(&self, r: Result<f64>) -> f64 {
        r.unwrap_or_else(|e| {
            self.0.borrow_mut().get_or_insert(e);
            f64::NAN
        })
    }

    fn finish(self, r: Result<f64>) -> Result<f64> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

/// `H²(Q_h, Q) = ∫ (sqrt(q(t + h)) - sqrt(q(t)))² dt`.
pub fn prior_shift_hellinger_sq(prior: &Prior, h: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !h.is_finite() {
        return Err(Error::NonFinite("h"));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    let (lo, hi, breaks) = shifted_layout(prior, h);
    let f = |t: f64| ((prior.density(t + h).sqrt() - prior.density(t).sqrt()) / h).powi(2);
    let v = integrate_pieces(f, lo, hi, &breaks, quad)?;
    Ok((v * h * h).clamp(0.0, 2.0))
}

/// Squared Hellinger distance between `ℙ_h` and `ℙ₀` for `n` observations.
pub fn mixture_hellinger_sq(spec: &MixtureSpec) -> Result<f64> {
    spec.validate()?;
    let h = spec.h;
    if h == 0.0 {
        return Ok(0.0);
    }
    let prior_part = prior_shift_hellinger_sq(&spec.prior, h, &spec.quad)?;
    let Some((a, b)) = spec.overlap()? else {
        return Ok(prior_part);
    };
    let (_, _, breaks) = shifted_layout(&spec.prior, h);
    let f = |t: f64| {
        let w = (spec.prior.density(t) * spec.prior.density(t + h)).sqrt();
        if w == 0.0 {
            return 0.0;
        }
        w * spec.family.hellinger_sq_iid_unchecked(t, t + h, spec.n) / (h * h)
    };
    let model_part = integrate_pieces(f, a, b, &breaks, &spec.quad)? * h * h;
    Ok((prior_part + model_part).clamp(0.0, 2.0))
}

/// `χ²(ℙ_h ‖ ℙ₀)` for `n` observations.
///
/// Compactly supported priors give `Divergent` for every `h ≠ 0`, since
/// `Q_h` then puts mass where `Q` has none. Points with `q(t) = 0` are
/// dropped from the model term.
pub fn mixture_chi_sq(spec: &MixtureSpec) -> Result<DivergenceValue> {
    spec.validate()?;
    let h = spec.h;
    if h == 0.0 {
        return Ok(DivergenceValue::Finite(0.0));
    }
    if spec.prior.has_compact_support() {
        return Ok(DivergenceValue::Divergent);
    }
    spec.overlap()?;
    let prior = spec.prior;
    let (lo, hi, mut breaks) = shifted_layout(&prior, h);
    // q(t + h)² / q(t) is centred at t - 2h for a Gaussian prior.
    breaks.extend(prior.breakpoints().iter().map(|b| b - 2.0 * h));
    breaks.sort_by(f64::total_cmp);
    let (lo, hi) = (lo.min(lo - 2.0 * h), hi.max(hi - 2.0 * h));

    let prior_term = |t: f64| {
        let l0 = prior.log_density(t);
        let ratio_m1 = (prior.log_density(t + h) - l0).exp_m1() / h;
        if ratio_m1 == 0.0 || l0 == f64::NEG_INFINITY {
            0.0
        } else {
            (l0 + 2.0 * ratio_m1.abs().ln()).exp()
        }
    };
    let divergent = RefCell::new(false);
    let model_term = |t: f64| {
        let l0 = prior.log_density(t);
        if l0 == f64::NEG_INFINITY {
            return 0.0;
        }
        let weight = (2.0 * prior.log_density(t + h) - l0).exp();
        if weight == 0.0 {
            return 0.0;
        }
        match spec.family.chi_sq_iid_unchecked(t + h, t, spec.n) {
            DivergenceValue::Finite(c) => weight * c / (h * h),
            DivergenceValue::Divergent => {
                *divergent.borrow_mut() = true;
                0.0
            }
        }
    };
    let p = integrate_pieces(prior_term, lo, hi, &breaks, &spec.quad)?;
    let m = integrate_pieces(model_term, lo, hi, &breaks, &spec.quad)?;
    if divergent.into_inner() {
        return Ok(DivergenceValue::Divergent);
    }
    let v = (p + m) * h * h;
    Ok(if v.is_finite() {
        DivergenceValue::Finite(v.max(0.0))
    } else {
        DivergenceValue::Divergent
    })
}

/// `χ²(ℙ_h ‖ λℙ_h + (1 - λ)ℙ₀) = (1 - λ)² ∫∫ (γ_h - γ₀)² / (λγ_h + (1 - λ)γ₀)`.
///
/// `λ = 0` goes through [`mixture_chi_sq`]. For `λ > 0` there is no
/// tensorization identity, so only `n = 1` is supported; the double
/// integral is done by nested adaptive quadrature.
pub fn mixture_chi_sq_interpolated(spec: &MixtureSpec, lambda: f64) -> Result<DivergenceValue> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid("lambda", format!("{lambda} is outside [0, 1]")));
    }
    if lambda == 0.0 {
        return mixture_chi_sq(spec);
    }
    spec.validate()?;
    if spec.n != 1 {
        return Err(Error::Unsupported(format!(
            "interpolated chi-squared needs n = 1 when lambda > 0 (got n = {})",
            spec.n
        )));
    }
    let h = spec.h;
    if h == 0.0 || lambda == 1.0 {
        return Ok(DivergenceValue::Finite(0.0));
    }
    let family = spec.family;
    let prior = spec.prior;
    let (lo, hi, breaks) = shifted_layout(&prior, h);
    if matches!(family, Family::UniformScale) && lo.min(lo + h) < 0.0 {
        return Err(Error::invalid("prior", "uniform family needs prior mass on theta > 0 only"));
    }
    let trap = Trap::new();
    let inner = |t: f64| -> Result<f64> {
        let (q0, qh) = (prior.density(t), prior.density(t + h));
        if q0 == 0.0 && qh == 0.0 {
            return Ok(0.0);
        }
        let g = |x: f64| {
            let g0 = if q0 > 0.0 { family.density_unchecked(t, x) * q0 } else { 0.0 };
            let gh = if qh > 0.0 { family.density_unchecked(t + h, x) * qh } else { 0.0 };
            let mix = lambda * gh + (1.0 - lambda) * g0;
            if mix == 0.0 {
                0.0
            } else {
                ((gh - g0) / h).powi(2) / mix
            }
        };
        let (t0, t1) = (t.min(t + h), t.max(t + h));
        match family {
            Family::GaussianLocation { sigma } => integrate_pieces(g, t0 - 12.0 * sigma, t1 + 12.0 * sigma, &[t0, t1], &spec.quad),
            Family::UniformScale => integrate_pieces(g, 0.0, t1, &[t0], &spec.quad),
        }
    };
    let outer = integrate_pieces(|t| trap.catch(inner(t)), lo, hi, &breaks, &spec.quad);
    let v = trap.finish(outer)?;
    Ok(DivergenceValue::Finite((1.0 - lambda).powi(2) * v * h * h))
}

/// Trapezoid grid for the brute-force oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_lo: f64,
    pub t_hi: f64,
    pub t_points: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub x_points: usize,
}

impl GridSpec {
    pub fn new(t_lo: f64, t_hi: f64, x_lo: f64, x_hi: f64) -> Self {
        Self {
            t_lo,
            t_hi,
            t_points: 2001,
            x_lo,
            x_hi,
            x_points: 2001,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_lo < self.t_hi) || !(self.x_lo < self.x_hi) {
            return Err(Error::invalid("grid", "needs lo < hi on both axes"));
        }
        for p in [self.t_points, self.x_points] {
            if p < 11 || p % 2 == 0 {
                return Err(Error::invalid("grid", format!("{p} points; need an odd count >= 11")));
            }
        }
        Ok(())
    }

    fn nodes(lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
        let d = (hi - lo) / (points - 1) as f64;
        (0..points)
            .map(|i| {
                let w = if i == 0 || i + 1 == points { 0.5 * d } else { d };
                (lo + i as f64 * d, w)
            })
            .collect()
    }
}

/// Trapezoid value plus whether the grid covered the mass it should.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridIntegral {
    pub value: f64,
    pub covered: bool,
}

/// Brute-force `∫∫ (sqrt(γ_h) - sqrt(γ₀))² dx dt` on a trapezoid grid, for
/// a single observation. `covered` is false when the grid misses part of
/// the prior support or less than 8σ of the Gaussian sample space.
pub fn mixture_hellinger_oracle(family: Family, prior: &Prior, h: f64, grid: &GridSpec) -> Result<GridIntegral> {
    family.validate()?;
    grid.validate()?;
    if !h.is_finite() {
        return Err(Error::NonFinite("h"));
    }
    let ts = GridSpec::nodes(grid.t_lo, grid.t_hi, grid.t_points);
    let xs = GridSpec::nodes(grid.x_lo, grid.x_hi, grid.x_points);

    let (plo, phi_) = match prior {
        Prior::Gaussian { mu, sigma } => (mu - 8.0 * sigma, mu + 8.0 * sigma),
        _ => prior.support(),
    };
    let mut covered = grid.t_lo <= plo.min(plo - h) && grid.t_hi >= phi_.max(phi_ - h);
    let (mut used_lo, mut used_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(t, _) in &ts {
        if prior.density(t) > 0.0 || prior.density(t + h) > 0.0 {
            used_lo = used_lo.min(t.min(t + h));
            used_hi = used_hi.max(t.max(t + h));
        }
    }
    if used_lo <= used_hi {
        covered &= match family {
            Family::GaussianLocation { sigma } => grid.x_lo <= used_lo - 8.0 * sigma && grid.x_hi >= used_hi + 8.0 * sigma,
            Family::UniformScale => {
                if used_lo <= 0.0 {
                    return Err(Error::invalid("prior", "uniform family needs prior mass on theta > 0 only"));
                }
                grid.x_lo <= 0.0 && grid.x_hi >= used_hi
            }
        };
    }

    let rows: Vec<f64> = ts
        .par_iter()
        .map(|&(t, wt)| {
            let (q0, qh) = (prior.density(t), prior.density(t + h));
            if q0 == 0.0 && qh == 0.0 {
                return 0.0;
            }
            let row: f64 = xs
                .iter()
                .map(|&(x, wx)| {
                    let a = if qh > 0.0 { (family.density_unchecked(t + h, x) * qh).sqrt() } else { 0.0 };
                    let b = if q0 > 0.0 { (family.density_unchecked(t, x) * q0).sqrt() } else { 0.0 };
                    wx * (a - b).powi(2)
                })
                .sum();
            wt * row
        })
        .collect();
    Ok(GridIntegral {
        value: rows.iter().sum(),
        covered,
    })
}

/// Shared by the bounds: `∫ f(t) q(t) dt` split at the prior's breakpoints
/// and any extra kinks of `f`.
pub(crate) fn integrate_against_prior<F>(prior: &Prior, f: F, kinks: &[f64], quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (lo, hi) = prior.integration_range();
    let mut breaks = prior.breakpoints();
    breaks.extend_from_slice(kinks);
    breaks.sort_by(f64::total_cmp);
    integrate_pieces(
        |t| {
            let q = prior.density(t);
            if q == 0.0 {
                0.0
            } else {
                f(t) * q
            }
        },
        lo,
        hi,
        &breaks,
        quad,
    )
}
