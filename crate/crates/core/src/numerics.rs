//! Special functions, quadrature, root finding and derivative-free search.
//!
//! Everything here is deterministic: no randomized restarts and no
//! data-dependent thread scheduling, so repeated calls are bit-identical.

use crate::error::{Error, Result};
use std::f64::consts::{PI, SQRT_2};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Initial number of equal panels before adaptive refinement starts.
const INITIAL_PANELS: usize = 16;

pub(crate) fn phi(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

pub(crate) fn big_phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("x"));
    }
    Ok(phi(x))
}

/// Standard normal distribution function, computed from `erfc` so that
/// the lower tail keeps full relative precision.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("x"));
    }
    Ok(big_phi(x))
}

/// `E[Z^2 1{Z >= c}]` for a standard normal `Z`, i.e. `c φ(c) + 1 - Φ(c)`.
///
/// Infinite `c` is accepted as a sentinel: `-inf` gives the full second
/// moment, `+inf` gives zero.
pub fn gaussian_partial_second_moment(c: f64) -> f64 {
    if c == f64::NEG_INFINITY {
        return 1.0;
    }
    if c == f64::INFINITY {
        return 0.0;
    }
    c * phi(c) + big_phi(-c)
}

/// Tolerances for the interval and Gaussian quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
    pub hermite_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_depth: 60,
            hermite_order: 80,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::invalid("abs_tol", "must be > 0"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid("rel_tol", "must be > 0"));
        }
        if self.max_depth < 10 {
            return Err(Error::invalid("max_depth", "must be >= 10"));
        }
        if self.hermite_order < 10 {
            return Err(Error::invalid("hermite_order", "must be >= 10"));
        }
        Ok(())
    }
}

struct Simpson<'a, F> {
    f: &'a F,
    converged: bool,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || lm <= a || rm >= b {
            return left + right + delta / 15.0;
        }
        if depth == 0 {
            self.converged = false;
            return left + right + delta / 15.0;
        }
        self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// The interval is first cut into 16 equal panels; each is refined until
/// the Richardson error estimate drops below `max(abs_tol, rel_tol * |I|)`
/// (shared across panels). Hitting `max_depth` anywhere yields
/// [`Error::ToleranceNotMet`] with the best estimate attached.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("integration limit"));
    }
    if a > b {
        return Err(Error::invalid("interval", format!("a = {a} > b = {b}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut coarse = 0.0;
    let mut lo = a;
    let mut flo = f(a);
    for i in 0..INITIAL_PANELS {
        let hi = if i + 1 == INITIAL_PANELS {
            b
        } else {
            a + (i + 1) as f64 * width
        };
        let fm = f(0.5 * (lo + hi));
        let fhi = f(hi);
        let s = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
        coarse += s;
        panels.push((lo, hi, flo, fm, fhi, s));
        lo = hi;
        flo = fhi;
    }
    let tol = spec.abs_tol.max(spec.rel_tol * coarse.abs()) / INITIAL_PANELS as f64;
    let mut state = Simpson { f: &f, converged: true };
    let total: f64 = panels
        .into_iter()
        .map(|(lo, hi, flo, fm, fhi, s)| state.refine(lo, hi, flo, fm, fhi, s, tol, spec.max_depth))
        .sum();
    if !total.is_finite() {
        return Err(Error::NonFinite("integrand"));
    }
    if state.converged {
        Ok(total)
    } else {
        Err(Error::ToleranceNotMet { estimate: total })
    }
}

/// Integrates over consecutive pieces of `breaks`, which must be sorted.
/// Points outside `[a, b]` are ignored.
pub fn integrate_pieces<F>(f: F, a: f64, b: f64, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_adaptive(&f, w[0], w[1], spec)?;
    }
    Ok(total)
}

/// Gauss–Hermite rule rescaled to the standard normal weight.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Nodes from a sign-change scan of the orthonormal Hermite recurrence,
    /// polished by Newton steps kept inside each bracket.
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::invalid("order", "must be >= 2"));
        }
        let n = order;
        let pim4 = PI.powf(-0.25);
        // Returns (h_n(z), h_{n-1}(z)) without the Gaussian factor.
        let eval = |z: f64| {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j - 1) as f64 / j as f64).sqrt() * p3;
            }
            (p1, p2)
        };
        let weight = |z: f64| {
            let pp = (2.0 * n as f64).sqrt() * eval(z).1;
            2.0 / (pp * pp)
        };
        let edge = (2.0 * n as f64 + 1.0).sqrt();
        let step = PI / (8.0 * edge);
        let mut positive = Vec::with_capacity(n / 2);
        let mut a = step * 0.5;
        let mut fa = eval(a).0;
        while a < edge + 2.0 && positive.len() < n / 2 {
            let b = a + step;
            let fb = eval(b).0;
            if fa == 0.0 || fa.signum() != fb.signum() {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                let mut z = 0.5 * (a + b);
                for _ in 0..200 {
                    let (p, pm1) = eval(z);
                    if p == 0.0 {
                        break;
                    }
                    if p.signum() == flo.signum() {
                        lo = z;
                        flo = p;
                    } else {
                        hi = z;
                    }
                    let newton = z - p / ((2.0 * n as f64).sqrt() * pm1);
                    let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                    let done = (next - z).abs() <= 1e-15 * z.abs().max(1.0);
                    z = next;
                    if done {
                        break;
                    }
                }
                positive.push(z);
            }
            a = b;
            fa = fb;
        }
        if positive.len() != n / 2 {
            return Err(Error::ToleranceNotMet { estimate: positive.len() as f64 });
        }
        let mut x = Vec::with_capacity(n);
        x.extend(positive.iter().rev().map(|z| -z));
        if n % 2 == 1 {
            x.push(0.0);
        }
        x.extend(positive.iter().copied());
        let w: Vec<f64> = x.iter().map(|&z| weight(z)).collect();
        let norm = PI.sqrt();
        let mass: f64 = w.iter().sum::<f64>() / norm;
        if !((mass - 1.0).abs() < 1e-10) {
            return Err(Error::ToleranceNotMet { estimate: mass });
        }
        Ok(Self {
            nodes: x.iter().map(|v| v * SQRT_2).collect(),
            weights: w.iter().map(|v| v / norm).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `E[g(Z)]` for standard normal `Z`.
    pub fn expectation<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * g(z)).sum()
    }
}

/// One-shot `E[g(Z)]` with a freshly built rule.
pub fn gauss_hermite_expectation<G: Fn(f64) -> f64>(g: G, order: usize) -> Result<f64> {
    Ok(GaussHermite::new(order)?.expectation(g))
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops when the bracket is no wider than `tol` or can no longer be split
/// in floating point, and returns the bracket midpoint.
pub fn find_root_bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    if !(lo <= hi) {
        return Err(Error::invalid("bracket", format!("lo = {lo} > hi = {hi}")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(Error::Bracket { lo, hi });
    }
    let lo_negative = flo < 0.0;
    while hi - lo > tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

/// Coordinate spacing used by the coarse grid and the refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub scale: AxisScale,
}

impl Axis {
    pub fn linear(lo: f64, hi: f64) -> Self {
        Self { lo, hi, scale: AxisScale::Linear }
    }

    pub fn log(lo: f64, hi: f64) -> Self {
        Self { lo, hi, scale: AxisScale::Log }
    }

    fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::NonFinite("axis bound"));
        }
        if !(self.lo < self.hi) {
            return Err(Error::invalid("axis", format!("lo = {} must be < hi = {}", self.lo, self.hi)));
        }
        if self.scale == AxisScale::Log && self.lo <= 0.0 {
            return Err(Error::invalid("axis", "log axis needs lo > 0"));
        }
        Ok(())
    }

    /// Maps `u ∈ [0, 1]` onto the axis.
    fn at(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let x = match self.scale {
            AxisScale::Linear => self.lo + u * (self.hi - self.lo),
            AxisScale::Log => (self.lo.ln() + u * (self.hi.ln() - self.lo.ln())).exp(),
        };
        x.clamp(self.lo, self.hi)
    }
}

/// Search region for [`maximize_1d_in`] and [`maximize_2d`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    pub axes: Vec<Axis>,
    pub coarse_grid: usize,
    pub refine_iters: usize,
}

impl SearchBox {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self {
            axes,
            coarse_grid: 64,
            refine_iters: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::invalid("search box", "no axes"));
        }
        if self.coarse_grid < 3 {
            return Err(Error::invalid("coarse_grid", "must be >= 3"));
        }
        self.axes.iter().try_for_each(Axis::validate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Max1d {
    pub arg: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Max2d {
    pub arg: [f64; 2],
    pub value: f64,
}

fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Grid scan plus golden-section refinement on `[lo, hi]` with the default
/// 64-point grid and 200 refinement steps.
pub fn maximize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<Max1d> {
    maximize_1d_in(f, &SearchBox::new(vec![Axis::linear(lo, hi)]))
}

/// Same as [`maximize_1d`] on the first axis of `region`.
///
/// Golden-section search runs in the axis coordinate (log coordinate for
/// log axes) over the two grid cells adjacent to the best grid point. The
/// returned value is never below the best grid value.
pub fn maximize_1d_in<F: Fn(f64) -> f64>(f: F, region: &SearchBox) -> Result<Max1d> {
    region.validate()?;
    let axis = region.axes[0];
    let g = region.coarse_grid;
    let step = 1.0 / (g - 1) as f64;
    let mut best = Max1d {
        arg: axis.at(0.0),
        value: f64::NEG_INFINITY,
    };
    let mut best_u = 0.0;
    for i in 0..g {
        let u = i as f64 * step;
        let x = axis.at(u);
        let v = score(f(x));
        if v > best.value {
            best = Max1d { arg: x, value: v };
            best_u = u;
        }
    }

    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = (best_u - step).max(0.0);
    let mut b = (best_u + step).min(1.0);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = score(f(axis.at(c)));
    let mut fd = score(f(axis.at(d)));
    for _ in 0..region.refine_iters {
        if b - a < 1e-15 {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = score(f(axis.at(c)));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = score(f(axis.at(d)));
        }
    }
    for (u, v) in [(c, fc), (d, fd)] {
        if v > best.value {
            best = Max1d { arg: axis.at(u), value: v };
        }
    }
    Ok(best)
}

/// Grid scan followed by compass search on a two-axis box.
///
/// The four best grid points seed independent compass searches with steps
/// starting at one grid cell; steps halve whenever no axis move improves.
pub fn maximize_2d<F: Fn(f64, f64) -> f64>(f: F, region: &SearchBox) -> Result<Max2d> {
    region.validate()?;
    if region.axes.len() != 2 {
        return Err(Error::invalid("search box", "maximize_2d needs exactly two axes"));
    }
    let (ax, ay) = (region.axes[0], region.axes[1]);
    let eval = |u: [f64; 2]| score(f(ax.at(u[0]), ay.at(u[1])));
    let g = region.coarse_grid;
    let step = 1.0 / (g - 1) as f64;

    let mut grid = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            let u = [i as f64 * step, j as f64 * step];
            grid.push((u, eval(u)));
        }
    }
    // Stable sort keeps grid order among ties.
    grid.sort_by(|p, q| q.1.total_cmp(&p.1));

    let mut best = (grid[0].0, grid[0].1);
    for &(start, start_value) in grid.iter().take(4) {
        let mut u = start;
        let mut v = start_value;
        let mut s = [step, step];
        for _ in 0..region.refine_iters {
            if s[0] < 1e-14 && s[1] < 1e-14 {
                break;
            }
            let mut moved = None;
            for k in 0..2 {
                for sign in [1.0, -1.0] {
                    let mut trial = u;
                    trial[k] = (trial[k] + sign * s[k]).clamp(0.0, 1.0);
                    if trial == u {
                        continue;
                    }
                    let tv = eval(trial);
                    if tv > moved.map_or(v, |m: ([f64; 2], f64)| m.1) {
                        moved = Some((trial, tv));
                    }
                }
            }
            match moved {
                Some((nu, nv)) => {
                    u = nu;
                    v = nv;
                }
                None => {
                    s[0] *= 0.5;
                    s[1] *= 0.5;
                }
            }
        }
        if v > best.1 {
            best = (u, v);
        }
    }
    Ok(Max2d {
        arg: [ax.at(best.0[0]), ay.at(best.0[1])],
        value: best.1,
    })
}
