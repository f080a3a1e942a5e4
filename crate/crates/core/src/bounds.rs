//! Lower bounds on local minimax risk.
//!
//! * mixture bounds built on the Hellinger and chi-squared divergences of
//!   [`crate::mixtures`];
//! * the classical van Trees value and its Kepler-prior optimization for
//!   `max(θ, 0)`;
//! * the Gaussian-prior / arctan-reparameterization bound for `max(θ, 0)`;
//! * the refined two-point Hellinger bound;
//! * scalar asymptotic constants, including the kernel density constant.
//!
//! Values returned by the `*_sup` helpers and by [`vt_kepler_bound`] and
//! [`diffeo_bound`] are multiplied by `n`.

use crate::error::{Error, Result};
use crate::mixtures::{integrate_against_prior, mixture_chi_sq_interpolated, mixture_hellinger_sq, MixtureSpec};
use crate::models::{DivergenceValue, Family};
use crate::numerics::{
    integrate_adaptive, integrate_pieces, maximize_1d, maximize_1d_in, maximize_2d, phi, Axis, Max1d, QuadratureSpec,
    SearchBox,
};
use crate::priors::{solve_kepler, Prior, KEPLER_TOL};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Below this the mixture Hellinger distance is treated as zero.
const DEGENERATE_H2: f64 = 1e-14;

/// The estimand `ψ(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    Identity,
    MaxZero,
    PowerMax { alpha: f64 },
}

impl Functional {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Functional::PowerMax { alpha } if !(alpha > 0.0 && alpha <= 1.0) => {
                Err(Error::invalid("alpha", format!("{alpha} is outside (0, 1]")))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match *self {
            Functional::Identity => theta,
            Functional::MaxZero => theta.max(0.0),
            Functional::PowerMax { alpha } => {
                if theta > 0.0 {
                    theta.powf(alpha)
                } else {
                    0.0
                }
            }
        }
    }

    /// Almost-everywhere derivative; the left derivative (zero) at the kink.
    pub fn derivative(&self, theta: f64) -> f64 {
        match *self {
            Functional::Identity => 1.0,
            Functional::MaxZero => {
                if theta > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Functional::PowerMax { alpha } => {
                if theta > 0.0 {
                    alpha * theta.powf(alpha - 1.0)
                } else {
                    0.0
                }
            }
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            Functional::Identity => Vec::new(),
            _ => vec![0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundMethod {
    HellingerMixture,
    ChiSquaredMixture,
    VanTrees,
    VanTreesKepler,
    Diffeo,
    TwoPoint,
    Constant,
}

impl BoundMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            BoundMethod::HellingerMixture => "hellinger",
            BoundMethod::ChiSquaredMixture => "chi2",
            BoundMethod::VanTrees => "vantrees",
            BoundMethod::VanTreesKepler => "vt",
            BoundMethod::Diffeo => "diffeo",
            BoundMethod::TwoPoint => "twopoint",
            BoundMethod::Constant => "constant",
        }
    }
}

/// A bound value with the arguments that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    pub argmax: BTreeMap<&'static str, f64>,
    pub method: BoundMethod,
}

impl BoundResult {
    fn new(method: BoundMethod, value: f64, args: &[(&'static str, f64)]) -> Self {
        Self {
            value: value.max(0.0),
            argmax: args.iter().copied().collect(),
            method,
        }
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("n", "must be >= 1"))
    } else {
        Ok(())
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be finite and > 0")))
    }
}

/// `∫ (ψ(t) - ψ(t - h)) dQ / h` and `∫ (ψ(t) - ψ(t - h))² dQ / h²`.
fn shift_moments(prior: &Prior, f: Functional, h: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    let mut kinks = f.kinks();
    kinks.extend(f.kinks().iter().map(|k| k + h));
    let d = |t: f64| (f.eval(t) - f.eval(t - h)) / h;
    let first = integrate_against_prior(prior, d, &kinks, quad)?;
    let second = integrate_against_prior(prior, |t| d(t).powi(2), &kinks, quad)?;
    Ok((first, second))
}

/// `[sqrt(A) - sqrt(B)]²₊` with `A = |∫Δψ dQ|² / (4 H²(ℙ₀, ℙ_h))` and
/// `B = ∫ Δψ² dQ`, where `Δψ(t) = ψ(t) - ψ(t - h)`.
pub fn hellinger_mixture_bound(spec: &MixtureSpec, f: Functional) -> Result<f64> {
    f.validate()?;
    spec.prior.require_nice()?;
    let h = spec.h;
    if h == 0.0 || !h.is_finite() {
        return Err(Error::invalid("h", "must be finite and nonzero"));
    }
    let h2 = mixture_hellinger_sq(spec)?;
    if h2 < DEGENERATE_H2 {
        return Err(Error::DegenerateDivergence { value: h2, h });
    }
    let (first, second) = shift_moments(&spec.prior, f, h, &spec.quad)?;
    let sqrt_a = first.abs() * h.abs() / (2.0 * h2.sqrt());
    let sqrt_b = second.sqrt() * h.abs();
    Ok(if sqrt_a > sqrt_b { (sqrt_a - sqrt_b).powi(2) } else { 0.0 })
}

/// Supremum of [`hellinger_mixture_bound`] over `|h| ∈ [h_lo, h_hi]`, both
/// signs, on a log-spaced search. `spec.h` is ignored.
pub fn hellinger_mixture_bound_sup(spec: &MixtureSpec, f: Functional, h_lo: f64, h_hi: f64) -> Result<BoundResult> {
    if !(h_lo > 0.0 && h_lo < h_hi && h_hi.is_finite()) {
        return Err(Error::invalid("h range", format!("need 0 < h_lo < h_hi, got [{h_lo}, {h_hi}]")));
    }
    let at = |h: f64| hellinger_mixture_bound(&MixtureSpec { h, ..*spec }, f);
    // Surfaces input errors before the search swallows them.
    at(h_hi)?;
    let region = SearchBox::new(vec![Axis::log(h_lo, h_hi)]);
    let mut best: Option<(f64, f64)> = None;
    for sign in [1.0, -1.0] {
        let m = maximize_1d_in(|h| at(sign * h).unwrap_or(f64::NAN), &region)?;
        if best.is_none_or(|(_, v)| m.value > v) {
            best = Some((sign * m.arg, m.value));
        }
    }
    let (h, value) = best.expect("two searches ran");
    let value = if value.is_finite() { value } else { 0.0 };
    Ok(BoundResult::new(BoundMethod::HellingerMixture, value, &[("h", h)]))
}

/// The chi-squared mixture bound, optimized in closed form over the
/// auxiliary constant of the proof:
/// `(sqrt((1-λ){A - λ(A+B)}) - sqrt(λ²B))²`, or zero when `(1-λ)²A ≤ λB`.
/// At `λ = 0` it is `A = |∫Δψ dQ|² / χ²(ℙ_h ‖ ℙ₀)`, and zero when that
/// divergence is infinite.
pub fn chi2_mixture_bound(spec: &MixtureSpec, f: Functional, lambda: f64) -> Result<f64> {
    f.validate()?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid("lambda", format!("{lambda} is outside [0, 1]")));
    }
    let h = spec.h;
    if h == 0.0 || !h.is_finite() {
        return Err(Error::invalid("h", "must be finite and nonzero"));
    }
    if lambda == 1.0 {
        return Ok(0.0);
    }
    let denom = match mixture_chi_sq_interpolated(spec, lambda)? {
        DivergenceValue::Divergent => return Ok(0.0),
        DivergenceValue::Finite(v) if v <= 0.0 => return Err(Error::DegenerateDivergence { value: v, h }),
        DivergenceValue::Finite(v) => v,
    };
    let (first, second) = shift_moments(&spec.prior, f, h, &spec.quad)?;
    let a = (first * h).powi(2) / denom;
    let b = second * h * h;
    Ok(chi2_closed_form(a, b, lambda))
}

pub(crate) fn chi2_closed_form(a: f64, b: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return a;
    }
    if (1.0 - lambda).powi(2) * a <= lambda * b {
        return 0.0;
    }
    let inner = (1.0 - lambda) * (a - lambda * (a + b));
    (inner.max(0.0).sqrt() - lambda * b.sqrt()).powi(2)
}

/// `(∫ψ' dQ)² / (I(Q) + n ∫ I(θ) dQ(θ))`.
pub fn van_trees_value(family: Family, n: u64, prior: &Prior, f: Functional, quad: &QuadratureSpec) -> Result<f64> {
    f.validate()?;
    check_n(n)?;
    prior.require_nice()?;
    let model_info = match family {
        Family::GaussianLocation { sigma } => {
            family.validate()?;
            1.0 / (sigma * sigma)
        }
        Family::UniformScale => {
            return Err(Error::Unsupported("van Trees needs finite Fisher information; the uniform family has none".into()))
        }
    };
    let prior_info = prior
        .fisher_info()
        .finite()
        .ok_or_else(|| Error::NotNice("prior Fisher information is infinite".into()))?;
    let numerator = match f {
        Functional::Identity => integrate_against_prior(prior, |_| 1.0, &[], quad)?,
        Functional::MaxZero => {
            let (lo, hi) = prior.integration_range();
            if hi <= 0.0 {
                0.0
            } else {
                integrate_pieces(|t| prior.density(t), lo.max(0.0), hi, &prior.breakpoints(), quad)?
            }
        }
        Functional::PowerMax { alpha } => {
            // ∫₀^∞ α t^(α-1) q(t) dt = ∫₀^∞ q(s^(1/α)) ds avoids the singularity at 0.
            let (_, hi) = prior.integration_range();
            if hi <= 0.0 {
                0.0
            } else {
                let breaks: Vec<f64> = prior.breakpoints().iter().filter(|b| **b > 0.0).map(|b| b.powf(alpha)).collect();
                integrate_pieces(|s| prior.density(s.powf(1.0 / alpha)), 0.0, hi.powf(alpha), &breaks, quad)?
            }
        }
    };
    Ok(numerator * numerator / (prior_info + n as f64 * model_info))
}

/// `sup_a n a² / (δ⁻² 4π²/w_a² + n sup_fisher)`, the van Trees bound for
/// `max(θ, 0)` over `|θ| < δ` with the constrained cosine prior.
pub fn vt_kepler_bound(delta: f64, n: u64, sup_fisher: f64) -> Result<BoundResult> {
    check_positive("delta", delta)?;
    check_positive("sup_fisher", sup_fisher)?;
    check_n(n)?;
    let nf = n as f64;
    let objective = |a: f64| match solve_kepler(a, KEPLER_TOL) {
        Ok(s) => nf * a * a / (s.min_fisher / (delta * delta) + nf * sup_fisher),
        Err(_) => f64::NAN,
    };
    let m = maximize_1d(objective, 0.0, 1.0)?;
    Ok(BoundResult::new(BoundMethod::VanTreesKepler, m.value, &[("a", m.arg)]))
}

/// `N = E[g(Z) 1{Z > -ξ₁/ξ₂}]` and `D = E[g(Z)²]` with
/// `g(z) = 1 / (1 + (ξ₁ + zξ₂)²)`.
///
/// Adaptive quadrature split at the indicator kink, which is also the peak
/// of `g`, and at a few multiples of the peak width `1/ξ₂`.
pub fn diffeo_moments(xi1: f64, xi2: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    check_positive("xi2", xi2)?;
    if !xi1.is_finite() {
        return Err(Error::NonFinite("xi1"));
    }
    const SPAN: f64 = 40.0;
    let g = |z: f64| 1.0 / (1.0 + (xi1 + z * xi2).powi(2));
    let z0 = -xi1 / xi2;
    let mut breaks = vec![-8.0, -4.0, 0.0, 4.0, 8.0, z0];
    for k in [1.0, 5.0, 25.0] {
        breaks.push(z0 - k / xi2);
        breaks.push(z0 + k / xi2);
    }
    breaks.sort_by(f64::total_cmp);
    let num = if z0 >= SPAN {
        0.0
    } else {
        integrate_pieces(|z| g(z) * phi(z), z0.max(-SPAN), SPAN, &breaks, quad)?
    };
    let den = integrate_pieces(|z| g(z).powi(2) * phi(z), -SPAN, SPAN, &breaks, quad)?;
    Ok((num, den))
}

/// `4nξ₂² N² / (π² δ⁻² + 4nξ₂² D)` for `max(θ, 0)` under `N(θ, 1)`, from a
/// Gaussian prior pushed through an arctan map. The `ξ₂²` on the second
/// denominator term follows from carrying `σ²/η²` through both sides.
pub fn diffeo_bound(delta: f64, n: u64, xi1: f64, xi2: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_positive("delta", delta)?;
    check_n(n)?;
    let (num, den) = diffeo_moments(xi1, xi2, quad)?;
    let c = 4.0 * n as f64 * xi2 * xi2;
    Ok(c * num * num / (PI * PI / (delta * delta) + c * den))
}

/// Search box for [`diffeo_bound_sup`].
pub fn diffeo_search_box() -> SearchBox {
    SearchBox::new(vec![Axis::linear(-10.0, 10.0), Axis::log(1e-3, 10.0)])
}

/// Supremum of [`diffeo_bound`] over `ξ₁ ∈ [-10, 10]`, `ξ₂ ∈ [1e-3, 10]`.
pub fn diffeo_bound_sup(delta: f64, n: u64) -> Result<BoundResult> {
    check_positive("delta", delta)?;
    check_n(n)?;
    let quad = QuadratureSpec::default();
    let m = maximize_2d(
        |x1, x2| diffeo_bound(delta, n, x1, x2, &quad).unwrap_or(f64::NAN),
        &diffeo_search_box(),
    )?;
    Ok(BoundResult::new(
        BoundMethod::Diffeo,
        m.value,
        &[("xi1", m.arg[0]), ("xi2", m.arg[1])],
    ))
}

/// `[(1 - H²(P^n_θ1, P^n_θ2)) / 4]₊ |ψ(θ1) - ψ(θ2)|²`.
pub fn two_point_hellinger_bound(family: Family, n: u64, f: Functional, theta1: f64, theta2: f64) -> Result<f64> {
    f.validate()?;
    let h2 = family.hellinger_sq_iid(theta1, theta2, n)?;
    let gap = f.eval(theta1) - f.eval(theta2);
    Ok(((1.0 - h2) / 4.0).max(0.0) * gap * gap)
}

/// `n` times the supremum of [`two_point_hellinger_bound`] over pairs in
/// the open window `(θ₀ - δ, θ₀ + δ)`.
///
/// Searched over the gap `d = θ₂ - θ₁` on a log axis and the position of
/// `θ₁` within what remains of the window, since the optimal gap shrinks
/// like `n^{-1/2}` while the window does not.
pub fn two_point_hellinger_sup(family: Family, n: u64, f: Functional, theta0: f64, delta: f64) -> Result<BoundResult> {
    check_positive("delta", delta)?;
    check_n(n)?;
    let r = delta * (1.0 - 1e-12);
    let lo = theta0 - r;
    let span = 2.0 * r;
    two_point_hellinger_bound(family, n, f, lo, theta0 + r)?;
    let pair = |u: f64, d: f64| (lo + u * (span - d), lo + u * (span - d) + d);
    let region = SearchBox::new(vec![Axis::linear(0.0, 1.0), Axis::log(span * 1e-9, span)]);
    let m = maximize_2d(
        |u, d| {
            let (a, b) = pair(u, d);
            two_point_hellinger_bound(family, n, f, a, b).unwrap_or(f64::NAN)
        },
        &region,
    )?;
    let (a, b) = pair(m.arg[0], m.arg[1]);
    Ok(BoundResult::new(BoundMethod::TwoPoint, n as f64 * m.value, &[("theta1", a), ("theta2", b)]))
}

/// `(-1/4 + e^{-x²/8}/2) x²`, whose maximum is the two-point constant for
/// regular models.
pub fn lam_regular_objective(x: f64) -> f64 {
    (-0.25 + 0.5 * (-x * x / 8.0).exp()) * x * x
}

/// `4 [-1/4 + e^{-η}/2]₊ η²`, the uniform-model two-point objective.
pub fn lam_uniform_twopoint_objective(eta: f64) -> f64 {
    4.0 * (-0.25 + 0.5 * (-eta).exp()).max(0.0) * eta * eta
}

/// `[C / (2 sqrt(2 - 2e^{-C/2})) - C]²₊`, the uniform-model
/// reparameterization objective.
pub fn lam_uniform_diffeo_objective(c: f64) -> f64 {
    let root = (-2.0 * (-c / 2.0).exp_m1()).sqrt();
    (c / (2.0 * root) - c).max(0.0).powi(2)
}

/// Maximum of [`lam_regular_objective`] on `[0, 10]`; about `0.28953`.
pub fn lam_constant_regular() -> Result<Max1d> {
    maximize_1d(lam_regular_objective, 0.0, 10.0)
}

/// Maximum of [`lam_uniform_twopoint_objective`] on `[0, 10]`; about `0.0558`.
pub fn lam_constant_uniform_twopoint() -> Result<Max1d> {
    maximize_1d(lam_uniform_twopoint_objective, 0.0, 10.0)
}

/// Maximum of [`lam_uniform_diffeo_objective`] on `(0, 10]`; about `0.0635²`.
pub fn lam_constant_uniform_diffeo() -> Result<Max1d> {
    maximize_1d(lam_uniform_diffeo_objective, 1e-12, 10.0)
}

/// A polynomial kernel on `[-1, 1]`; `coeffs[k]` multiplies `u^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyKernel {
    coeffs: Vec<f64>,
    order: u32,
}

impl PolyKernel {
    /// Checks `∫K = 1` and `∫u^k K = 0` for `0 < k < order`.
    pub fn new(coeffs: Vec<f64>, order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("order", "must be >= 1"));
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coeffs", "need at least one finite coefficient"));
        }
        let k = Self { coeffs, order };
        let quad = QuadratureSpec::default();
        let mass = k.moment(0, &quad)?;
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("kernel", format!("integrates to {mass}, not 1")));
        }
        for j in 1..order {
            let m = k.moment(j, &quad)?;
            if m.abs() > 1e-8 {
                return Err(Error::invalid("kernel", format!("moment {j} is {m}, not 0")));
            }
        }
        Ok(k)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `K^{(d)}(u)` on `[-1, 1]`, zero outside.
    pub fn derivative(&self, d: u32, u: f64) -> f64 {
        if u.abs() > 1.0 {
            return 0.0;
        }
        self.coeffs
            .iter()
            .enumerate()
            .skip(d as usize)
            .map(|(k, &c)| {
                let falling: f64 = (0..d).map(|i| (k as u32 - i) as f64).product();
                c * falling * u.powi((k as u32 - d) as i32)
            })
            .sum()
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.derivative(0, u)
    }

    fn integrate<F: Fn(f64) -> f64>(&self, f: F, quad: &QuadratureSpec) -> Result<f64> {
        integrate_pieces(f, -1.0, 1.0, &[0.0], quad)
    }

    fn moment(&self, j: u32, quad: &QuadratureSpec) -> Result<f64> {
        self.integrate(|u| u.powi(j as i32) * self.eval(u), quad)
    }
}

/// The kernel density local minimax constant `C(s, M, K)`.
pub fn density_lam_constant(s: u32, m: f64, kernel: &PolyKernel) -> Result<f64> {
    check_positive("M", m)?;
    if s != kernel.order() {
        return Err(Error::invalid("s", format!("{s} does not match the kernel order {}", kernel.order())));
    }
    let quad = QuadratureSpec::default();
    let ks0 = kernel.derivative(s, 0.0).abs();
    if ks0 == 0.0 {
        return Err(Error::DegenerateKernel);
    }
    let sf = s as f64;
    let k2 = kernel.integrate(|u| kernel.eval(u).powi(2), &quad)?;
    let ks_abs = integrate_adaptive(|u| kernel.derivative(s, u).abs(), -1.0, 1.0, &quad)
        .or_else(|e| match e {
            Error::ToleranceNotMet { estimate } => Ok(estimate),
            e => Err(e),
        })?;
    let factorial: f64 = (1..s).map(|i| i as f64).product();
    let bias = kernel.integrate(|u| kernel.eval(u) * u.abs().powi(s as i32), &quad)? / factorial;

    let p = 2.0 * sf / (2.0 * sf + 1.0);
    let lead = 8.0 * sf.powf(p) / (4.0 + 8.0 * sf)
        * PI.powf(-2.0 / (2.0 * sf + 1.0))
        * (ks0 / m).powf(4.0 * sf / (2.0 * sf + 1.0))
        * k2.powf(p);
    let bracket = m * k2 / ks0 - (PI * PI * (4.0 + 8.0 * sf)).sqrt() * (bias * (1.0 + m * ks_abs / ks0)).abs();
    Ok(lead * bracket.max(0.0).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const G1: Family = Family::GaussianLocation { sigma: 1.0 };

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn functional_values() {
        assert_eq!(Functional::MaxZero.eval(-1.0), 0.0);
        assert_eq!(Functional::MaxZero.eval(2.0), 2.0);
        assert_eq!(Functional::PowerMax { alpha: 0.5 }.eval(4.0), 2.0);
        assert_eq!(Functional::PowerMax { alpha: 0.5 }.eval(-4.0), 0.0);
        assert!(Functional::PowerMax { alpha: 1.5 }.validate().is_err());
        assert!(Functional::PowerMax { alpha: 0.0 }.validate().is_err());
        for i in -50..=50 {
            let t = i as f64 * 0.37;
            assert_eq!(Functional::MaxZero.eval(t), Functional::PowerMax { alpha: 1.0 }.eval(t));
        }
    }

    #[test]
    fn van_trees_closed_pieces() {
        let cos = Prior::cosine(0.0, 1.0).unwrap();
        let id = van_trees_value(G1, 1, &cos, Functional::Identity, &quad()).unwrap();
        assert!((id - 1.0 / (PI * PI + 1.0)).abs() < 1e-10);
        let mz = van_trees_value(G1, 1, &cos, Functional::MaxZero, &quad()).unwrap();
        assert!((mz - 0.25 / (PI * PI + 1.0)).abs() < 1e-10);
        let pm = van_trees_value(G1, 1, &cos, Functional::PowerMax { alpha: 1.0 }, &quad()).unwrap();
        assert!((pm - mz).abs() < 1e-10);
        // Dilating by δ scales I(Q) by δ⁻².
        let wide = cos.dilate(0.0, 3.0).unwrap();
        let v = van_trees_value(G1, 1, &wide, Functional::Identity, &quad()).unwrap();
        assert!((v - 1.0 / (PI * PI / 9.0 + 1.0)).abs() < 1e-10);
        assert!(van_trees_value(Family::UniformScale, 1, &cos, Functional::Identity, &quad()).is_err());
        let uni = Prior::uniform(-1.0, 1.0).unwrap();
        assert!(matches!(van_trees_value(G1, 1, &uni, Functional::Identity, &quad()), Err(Error::NotNice(_))));
    }

    #[test]
    fn power_max_numerator_by_direct_quadrature() {
        // ∫₀¹ α t^(α-1) q(t) dt computed on (ε, 1] with the singular piece
        // [0, ε] handled analytically since q ≈ q(0) there.
        let prior = Prior::cosine(0.2, 1.0).unwrap();
        let alpha = 0.5;
        let f = Functional::PowerMax { alpha };
        let eps = 1e-8;
        let body = integrate_pieces(|t| f.derivative(t) * prior.density(t), eps, 1.2, &[0.2], &quad()).unwrap();
        let head = prior.density(0.0) * eps.powf(alpha);
        let num = body + head;
        let want = num * num / (prior.fisher_info().finite().unwrap() + 4.0);
        let got = van_trees_value(G1, 4, &prior, f, &quad()).unwrap();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn hellinger_bound_near_van_trees() {
        let gp = Prior::gaussian(0.0, 1.0).unwrap();
        let spec = MixtureSpec::new(G1, 1, gp, 1e-4);
        let v = hellinger_mixture_bound(&spec, Functional::Identity).unwrap();
        // Leading correction is 2|h| sqrt(J) in relative terms.
        assert!((v / 0.5 - 1.0).abs() < 3.0 * 1e-4 * 2f64.sqrt());
        assert!(hellinger_mixture_bound(&MixtureSpec::new(G1, 1, gp, 0.0), Functional::Identity).is_err());
        let uni = Prior::uniform(-1.0, 1.0).unwrap();
        assert!(hellinger_mixture_bound(&MixtureSpec::new(G1, 1, uni, 0.1), Functional::Identity).is_err());
    }

    #[test]
    fn hellinger_bound_zero_when_functional_flat_on_support() {
        // MaxZero is identically zero on the support of a prior on [-3, -1].
        let spec = MixtureSpec::new(G1, 5, Prior::cosine(-2.0, 1.0).unwrap(), 0.2);
        assert_eq!(hellinger_mixture_bound(&spec, Functional::MaxZero).unwrap(), 0.0);
    }

    #[test]
    fn hellinger_sup_symmetry_and_ceiling() {
        let gp = Prior::gaussian(0.0, 1.0).unwrap();
        let spec = MixtureSpec::new(G1, 1, gp, 0.0);
        let r = hellinger_mixture_bound_sup(&spec, Functional::Identity, 1e-4, 10.0).unwrap();
        assert!(r.value <= 0.5 && r.value > 0.49);
        let pos = hellinger_mixture_bound(&MixtureSpec { h: 0.3, ..spec }, Functional::Identity).unwrap();
        let neg = hellinger_mixture_bound(&MixtureSpec { h: -0.3, ..spec }, Functional::Identity).unwrap();
        assert!((pos - neg).abs() < 1e-12);
        let delta_prior = Prior::cosine(0.0, 0.5).unwrap();
        let r = hellinger_mixture_bound_sup(&MixtureSpec::new(G1, 100, delta_prior, 0.0), Functional::MaxZero, 1e-4, 0.5)
            .unwrap();
        assert!(r.value > 0.0);
    }

    #[test]
    fn hellinger_sup_against_dense_grid() {
        let spec = MixtureSpec::new(G1, 1, Prior::gaussian(0.0, 1.0).unwrap(), 0.0);
        let r = hellinger_mixture_bound_sup(&spec, Functional::MaxZero, 1e-3, 3.0).unwrap();
        let mut best = 0.0f64;
        for i in 0..=400 {
            let h = 1e-3 * (3.0f64 / 1e-3).powf(i as f64 / 400.0);
            for s in [1.0, -1.0] {
                best = best.max(hellinger_mixture_bound(&MixtureSpec { h: s * h, ..spec }, Functional::MaxZero).unwrap());
            }
        }
        assert!(r.value >= best - 1e-9, "{} vs grid {best}", r.value);
    }

    #[test]
    fn chi2_bound_properties() {
        let gp = Prior::gaussian(0.0, 1.0).unwrap();
        let spec = MixtureSpec::new(G1, 3, gp, 0.4);
        let v0 = chi2_mixture_bound(&spec, Functional::Identity, 0.0).unwrap();
        let chi = crate::mixtures::mixture_chi_sq(&spec).unwrap().finite().unwrap();
        let num = integrate_against_prior(&gp, |t| 0.4 + 0.0 * t, &[], &quad()).unwrap();
        assert!((v0 - num * num / chi).abs() < 1e-12 * v0);
        assert_eq!(chi2_mixture_bound(&spec, Functional::Identity, 1.0).unwrap(), 0.0);
        assert!(chi2_mixture_bound(&spec, Functional::Identity, -0.1).is_err());
        let cos = MixtureSpec::new(G1, 3, Prior::cosine(0.0, 1.0).unwrap(), 0.4);
        assert_eq!(chi2_mixture_bound(&cos, Functional::Identity, 0.0).unwrap(), 0.0);
        let uni = MixtureSpec::new(Family::UniformScale, 1, Prior::cosine(3.0, 1.0).unwrap(), 0.1);
        assert_eq!(chi2_mixture_bound(&uni, Functional::Identity, 0.0).unwrap(), 0.0);
        assert!(chi2_mixture_bound(&uni, Functional::Identity, 0.3).unwrap() > 0.0);
    }

    #[test]
    fn chi2_closed_form_matches_brute_force_over_l() {
        // max over L ≥ 0 of (1-λ)²/(1+Lλ) [A - λ(1+1/L)B/(1-λ)²]₊.
        for &(a, b, lambda) in &[(1.0f64, 0.2f64, 0.1f64), (0.5, 0.01, 0.3), (2.0, 1.0, 0.05), (0.3, 0.3, 0.5)] {
            let mut best = 0.0f64;
            for i in 1..200_000 {
                let l = 1e-4 * (1e8f64).powf(i as f64 / 200_000.0);
                let v = (1.0 - lambda).powi(2) / (1.0 + l * lambda)
                    * (a - lambda * (1.0 + 1.0 / l) * b / (1.0 - lambda).powi(2)).max(0.0);
                best = best.max(v);
            }
            let closed = chi2_closed_form(a, b, lambda);
            assert!((closed - best).abs() < 1e-6 * best.max(1e-3), "{a} {b} {lambda}: {closed} vs {best}");
        }
        assert_eq!(chi2_closed_form(1.0, 1.0, 0.9), 0.0);
    }

    #[test]
    fn vt_kepler_properties() {
        let r = vt_kepler_bound(100.0, 10_000, 1.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-2);
        assert!(r.argmax["a"] > 0.99);
        let r = vt_kepler_bound(1.0, 100, 1.0).unwrap();
        let mut best = 0.0f64;
        for i in 0..=10_000 {
            let a = i as f64 / 10_000.0;
            let s = solve_kepler(a, KEPLER_TOL).unwrap();
            best = best.max(100.0 * a * a / (s.min_fisher + 100.0));
        }
        assert!((r.value - best).abs() < 1e-6 && r.value >= best - 1e-12);
        assert!(vt_kepler_bound(0.0, 1, 1.0).is_err());
        assert!(vt_kepler_bound(1.0, 0, 1.0).is_err());
    }

    #[test]
    fn vt_kepler_monotone_grid() {
        let deltas: Vec<f64> = (0..20).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 19.0)).collect();
        let ns: Vec<u64> = (0..20).map(|i| (10f64.powf(4.0 * i as f64 / 19.0)).round() as u64).collect();
        let table: Vec<Vec<f64>> = ns
            .iter()
            .map(|&n| deltas.iter().map(|&d| vt_kepler_bound(d, n, 1.0).unwrap().value).collect())
            .collect();
        for i in 0..20 {
            for j in 0..20 {
                if j > 0 {
                    assert!(table[i][j] >= table[i][j - 1] - 1e-12);
                }
                if i > 0 {
                    assert!(table[i][j] >= table[i - 1][j] - 1e-12);
                }
            }
        }
    }

    #[test]
    fn diffeo_moments_against_hermite() {
        let gh = crate::numerics::GaussHermite::new(400).unwrap();
        for &(x1, x2) in &[(0.0, 1.0), (1.0, 0.5), (-0.5, 0.3), (2.0, 0.1)] {
            let (num, den) = diffeo_moments(x1, x2, &quad()).unwrap();
            let g = |z: f64| 1.0 / (1.0 + (x1 + z * x2).powi(2));
            let gh_den = gh.expectation(|z| g(z).powi(2));
            assert!((den - gh_den).abs() < 1e-8, "D({x1},{x2})");
            // Dense trapezoid for N; the indicator rules out Gauss-Hermite.
            let z0 = (-x1 / x2).max(-40.0);
            let steps = 2_000_000;
            let dz = (40.0 - z0) / steps as f64;
            let mut tail = 0.0;
            for i in 0..=steps {
                let z = z0 + i as f64 * dz;
                let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
                tail += w * g(z) * phi(z);
            }
            tail *= dz;
            assert!((num - tail).abs() < 1e-9, "N({x1},{x2}): {num} vs {tail}");
        }
        // The δ = 1, n = 100, ξ = (0, 1) point from both oracles.
        let (num, den) = (0.5 * gh.expectation(|z| 1.0 / (1.0 + z * z)), gh.expectation(|z| (1.0 + z * z).powi(-2)));
        let want = 400.0 * num * num / (PI * PI + 400.0 * den);
        assert!((diffeo_bound(1.0, 100, 0.0, 1.0, &quad()).unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn diffeo_limits() {
        let q = quad();
        let v = diffeo_bound(1e6, 100, 30.0, 1e-3, &q).unwrap();
        assert!(v > 0.97 && v <= 1.0);
        assert!(diffeo_bound(1.0, 100, -60.0, 1.0, &q).unwrap() < 1e-12);
        assert!(diffeo_bound(1.0, 100, 0.0, 0.0, &q).is_err());
        let small = diffeo_bound_sup(1e-3, 100).unwrap().value;
        assert!(small > 0.0 && small <= 100.0 * 1e-6 / 4.0, "{small}");
    }

    #[test]
    fn diffeo_sup_against_dense_grid() {
        let r = diffeo_bound_sup(2.0, 100).unwrap();
        let q = quad();
        let g = 512;
        let best = (0..g)
            .flat_map(|i| (0..g).map(move |j| (i, j)))
            .map(|(i, j)| {
                let x1 = -10.0 + 20.0 * i as f64 / (g - 1) as f64;
                let x2 = 1e-3 * 1e4f64.powf(j as f64 / (g - 1) as f64);
                diffeo_bound(2.0, 100, x1, x2, &q).unwrap()
            })
            .fold(0.0f64, f64::max);
        assert!(r.value >= best - 1e-4, "{} vs {best}", r.value);
        assert!(r.value <= 1.0);
    }

    #[test]
    fn two_point_examples() {
        assert_eq!(two_point_hellinger_bound(G1, 10, Functional::Identity, 0.3, 0.3).unwrap(), 0.0);
        assert_eq!(two_point_hellinger_bound(G1, 10, Functional::Identity, 0.0, 10.0).unwrap(), 0.0);
        let a = two_point_hellinger_bound(G1, 3, Functional::MaxZero, -0.2, 0.5).unwrap();
        let b = two_point_hellinger_bound(G1, 3, Functional::MaxZero, 0.5, -0.2).unwrap();
        assert_eq!(a, b);
        let n = 1_000_000u64;
        for bb in [0.5f64, 1.0, 2.0] {
            let v = two_point_hellinger_bound(Family::UniformScale, n, Functional::Identity, 1.0, 1.0 + bb / n as f64).unwrap();
            let limit = (-0.25 + 0.5 * (-bb / 2.0).exp()).max(0.0) * bb * bb / (n as f64).powi(2);
            if limit == 0.0 {
                assert_eq!(v, 0.0);
            } else {
                assert!((v / limit - 1.0).abs() < 1e-4, "b = {bb}");
            }
        }
    }

    #[test]
    fn two_point_sup_for_max_zero() {
        // With θ₁ = 0 the objective is n d² (-1/4 + e^{-n d²/8}/2).
        let r = two_point_hellinger_sup(G1, 100, Functional::MaxZero, 0.0, 2.0).unwrap();
        assert!((r.value - 0.289_533_996_14).abs() < 1e-6, "{}", r.value);
        for delta in [1.0, 10.0, 100.0] {
            let r = two_point_hellinger_sup(G1, 100, Functional::MaxZero, 0.0, delta).unwrap();
            assert!((r.value - 0.289_533_996_14).abs() < 1e-6, "δ = {delta}: {}", r.value);
        }
        let small = two_point_hellinger_sup(G1, 100, Functional::MaxZero, 0.0, 0.01).unwrap();
        assert!((small.value - lam_regular_objective(0.1)).abs() < 1e-8);
    }

    #[test]
    fn scalar_constants() {
        let r = lam_constant_regular().unwrap();
        assert!((r.value - 0.289_533_996_14).abs() < 1e-9);
        assert!((r.value - 0.28953).abs() < 5e-4);
        assert_eq!(lam_regular_objective(0.0), 0.0);
        assert!(lam_regular_objective(10.0) < 0.0);
        let u = lam_constant_uniform_twopoint().unwrap();
        assert!((u.value - 0.055_776_81).abs() < 1e-7);
        assert!((u.value - 0.0558).abs() < 5e-4);
        assert_eq!(lam_uniform_twopoint_objective(0.0), 0.0);
        assert!(lam_uniform_twopoint_objective(std::f64::consts::LN_2).abs() < 1e-15);
        let d = lam_constant_uniform_diffeo().unwrap();
        assert!((d.value - 0.004_034_031).abs() < 1e-8);
        assert!((d.value - 0.0635f64.powi(2)).abs() < 1e-4);
        assert_eq!(lam_uniform_diffeo_objective(10.0), 0.0);
        // The bracket behaves like sqrt(C)/2 near zero.
        let c = 1e-6;
        assert!((lam_uniform_diffeo_objective(c) / (c / 4.0) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn kernel_constant() {
        let epan = PolyKernel::new(vec![0.75, 0.0, -0.75], 1).unwrap();
        assert!(matches!(density_lam_constant(1, 1.0, &epan), Err(Error::DegenerateKernel)));
        assert!(PolyKernel::new(vec![0.5, 0.0, -0.75], 1).is_err());
        assert!(PolyKernel::new(vec![0.5, 1.0], 2).is_err());

        // Independent 10⁶-point trapezoid for every integral.
        let oracle = |coeffs: [f64; 3], m: f64| {
            let kv = |u: f64| coeffs[0] + coeffs[1] * u + coeffs[2] * u * u;
            let kd = |u: f64| coeffs[1] + 2.0 * coeffs[2] * u;
            let n = 1_000_000;
            let du = 2.0 / n as f64;
            let (mut k2, mut kabs, mut bias) = (0.0, 0.0, 0.0);
            for i in 0..=n {
                let u = -1.0 + i as f64 * du;
                let w = if i == 0 || i == n { 0.5 * du } else { du };
                k2 += w * kv(u).powi(2);
                kabs += w * kd(u).abs();
                bias += w * kv(u) * u.abs();
            }
            let c = coeffs[1].abs();
            let lead = 8.0 / 12.0 * PI.powf(-2.0 / 3.0) * (c / m).powf(4.0 / 3.0) * k2.powf(2.0 / 3.0);
            let bracket = m * k2 / c - (PI * PI * 12.0).sqrt() * (bias * (1.0 + m * kabs / c)).abs();
            lead * bracket.max(0.0).powi(2)
        };
        for (coeffs, m) in [([0.75, 0.3, -0.75], 2.0), ([1.5, 0.3, -3.0], 2.0), ([1.5, -1.2, -3.0], 0.5)] {
            let k = PolyKernel::new(coeffs.to_vec(), 1).unwrap();
            let got = density_lam_constant(1, m, &k).unwrap();
            let want = oracle(coeffs, m);
            assert!(got >= 0.0);
            assert!((got - want).abs() < 1e-8 * want.max(1.0), "{coeffs:?}: {got} vs {want}");
        }
        // A positive bias integral forces the bracket negative here.
        let k = PolyKernel::new(vec![0.75, 0.3, -0.75], 1).unwrap();
        assert_eq!(density_lam_constant(1, 2.0, &k).unwrap(), 0.0);
        let flat = PolyKernel::new(vec![1.5, 0.3, -3.0], 1).unwrap();
        assert!(density_lam_constant(1, 2.0, &flat).unwrap() > 0.0);
        assert!(density_lam_constant(2, 1.0, &k).is_err());
    }

    #[test]
    fn kernel_derivatives() {
        let k = PolyKernel::new(vec![0.75, 0.3, -0.75], 1).unwrap();
        assert!((k.derivative(1, 0.2) - (0.3 - 1.5 * 0.2)).abs() < 1e-15);
        assert!((k.derivative(2, 0.7) + 1.5).abs() < 1e-15);
        assert_eq!(k.derivative(3, 0.1), 0.0);
        assert_eq!(k.eval(1.5), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn bounds_nonnegative(h in 0.01f64..2.0, n in 1u64..50, lam in 0.0f64..1.0, x1 in -10.0f64..10.0, x2 in 1e-3f64..10.0) {
            let spec = MixtureSpec::new(G1, n, Prior::cosine(0.0, 1.0).unwrap(), h);
            prop_assert!(hellinger_mixture_bound(&spec, Functional::MaxZero).unwrap() >= 0.0);
            let gs = MixtureSpec::new(G1, n, Prior::gaussian(0.0, 1.0).unwrap(), h);
            prop_assert!(chi2_mixture_bound(&gs, Functional::Identity, 0.0).unwrap() >= 0.0);
            prop_assert!(chi2_closed_form(1.0, h, lam) >= 0.0);
            let d = diffeo_bound(1.0 + h, n, x1, x2, &quad()).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn two_point_symmetric(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 1u64..100) {
            for f in [Functional::Identity, Functional::MaxZero, Functional::PowerMax { alpha: 0.5 }] {
                let x = two_point_hellinger_bound(G1, n, f, a, b).unwrap();
                prop_assert_eq!(x, two_point_hellinger_bound(G1, n, f, b, a).unwrap());
                prop_assert!(x >= 0.0);
            }
        }
    }
}
