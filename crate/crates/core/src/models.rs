//! One-parameter families and their pairwise divergences.
//!
//! All divergences are closed forms. The n-fold versions go through the
//! log Bhattacharyya affinity (Hellinger) or `ln(1 + χ²)` (chi-squared) so
//! that tiny per-observation values survive large `n`.

use crate::error::{Error, Result};
use crate::numerics::phi;

/// A statistical model indexed by a real parameter `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `N(θ, σ²)` with known `σ`.
    GaussianLocation { sigma: f64 },
    /// `Unif(0, θ)` with `θ > 0`.
    UniformScale,
}

/// A divergence that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceValue {
    Finite(f64),
    Divergent,
}

impl DivergenceValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            DivergenceValue::Finite(v) => Some(v),
            DivergenceValue::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, DivergenceValue::Divergent)
    }
}

impl Family {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let f = Family::GaussianLocation { sigma };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::GaussianLocation { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::invalid("sigma", format!("{sigma} must be finite and > 0")))
            }
            _ => Ok(()),
        }
    }

    pub fn check_theta(&self, theta: f64) -> Result<()> {
        self.validate()?;
        if !theta.is_finite() {
            return Err(Error::NonFinite("theta"));
        }
        if matches!(self, Family::UniformScale) && theta <= 0.0 {
            return Err(Error::invalid("theta", format!("{theta} must be > 0 for the uniform family")));
        }
        Ok(())
    }

    /// Density of `P_θ` at `x`; zero outside the support.
    pub fn density(&self, theta: f64, x: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(self.density_unchecked(theta, x))
    }

    pub(crate) fn density_unchecked(&self, theta: f64, x: f64) -> f64 {
        match *self {
            Family::GaussianLocation { sigma } => phi((x - theta) / sigma) / sigma,
            Family::UniformScale => {
                if (0.0..=theta).contains(&x) {
                    1.0 / theta
                } else {
                    0.0
                }
            }
        }
    }

    /// Per-observation Fisher information. Divergent for the uniform family,
    /// which is not differentiable in quadratic mean.
    pub fn fisher_info(&self, theta: f64) -> Result<DivergenceValue> {
        self.check_theta(theta)?;
        Ok(match *self {
            Family::GaussianLocation { sigma } => DivergenceValue::Finite(1.0 / (sigma * sigma)),
            Family::UniformScale => DivergenceValue::Divergent,
        })
    }

    /// `ln ∫ sqrt(p_θ1 p_θ2)`, the log Bhattacharyya affinity.
    fn log_affinity(&self, theta1: f64, theta2: f64) -> f64 {
        match *self {
            Family::GaussianLocation { sigma } => {
                let d = theta1 - theta2;
                -d * d / (8.0 * sigma * sigma)
            }
            Family::UniformScale => {
                let (lo, hi) = if theta1 <= theta2 { (theta1, theta2) } else { (theta2, theta1) };
                -0.5 * ((hi - lo) / lo).ln_1p()
            }
        }
    }

    /// Squared Hellinger distance `∫ (sqrt(p1) - sqrt(p2))²`, in `[0, 2]`.
    pub fn hellinger_sq(&self, theta1: f64, theta2: f64) -> Result<f64> {
        self.hellinger_sq_iid(theta1, theta2, 1)
    }

    /// Squared Hellinger distance between the n-fold products.
    pub fn hellinger_sq_iid(&self, theta1: f64, theta2: f64, n: u64) -> Result<f64> {
        self.check_theta(theta1)?;
        self.check_theta(theta2)?;
        if n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        Ok(self.hellinger_sq_iid_unchecked(theta1, theta2, n))
    }

    pub(crate) fn hellinger_sq_iid_unchecked(&self, theta1: f64, theta2: f64, n: u64) -> f64 {
        (-2.0 * (n as f64 * self.log_affinity(theta1, theta2)).exp_m1()).clamp(0.0, 2.0)
    }

    /// `χ²(P_num ‖ P_den)`.
    pub fn chi_sq(&self, theta_num: f64, theta_den: f64) -> Result<DivergenceValue> {
        self.chi_sq_iid(theta_num, theta_den, 1)
    }

    /// `χ²` between n-fold products: `(1 + χ²)^n - 1`.
    pub fn chi_sq_iid(&self, theta_num: f64, theta_den: f64, n: u64) -> Result<DivergenceValue> {
        self.check_theta(theta_num)?;
        self.check_theta(theta_den)?;
        if n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        Ok(self.chi_sq_iid_unchecked(theta_num, theta_den, n))
    }

    pub(crate) fn chi_sq_iid_unchecked(&self, theta_num: f64, theta_den: f64, n: u64) -> DivergenceValue {
        let log1p_chi = match *self {
            Family::GaussianLocation { sigma } => {
                let d = (theta_num - theta_den) / sigma;
                d * d
            }
            Family::UniformScale => {
                if theta_num > theta_den {
                    return DivergenceValue::Divergent;
                }
                (theta_den / theta_num).ln()
            }
        };
        let v = (n as f64 * log1p_chi).exp_m1();
        if v.is_finite() {
            DivergenceValue::Finite(v.max(0.0))
        } else {
            DivergenceValue::Divergent
        }
    }

    /// `H²(θ, θ + h) / h²`.
    pub fn hellinger_local_ratio(&self, theta: f64, h: f64) -> Result<f64> {
        if h == 0.0 {
            return Err(Error::invalid("h", "must be nonzero"));
        }
        Ok(self.hellinger_sq(theta, theta + h)? / (h * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_pieces, QuadratureSpec};
    use proptest::prelude::*;

    const G1: Family = Family::GaussianLocation { sigma: 1.0 };
    const U: Family = Family::UniformScale;

    fn support(f: Family, t1: f64, t2: f64) -> (f64, f64, Vec<f64>) {
        match f {
            Family::GaussianLocation { sigma } => (t1.min(t2) - 15.0 * sigma, t1.max(t2) + 15.0 * sigma, vec![t1, t2]),
            Family::UniformScale => (0.0, t1.max(t2), vec![t1.min(t2)]),
        }
    }

    // Direct integrals of the defining formulas, independent of the closed forms.
    fn hellinger_oracle(f: Family, t1: f64, t2: f64) -> f64 {
        let (a, b, br) = support(f, t1, t2);
        let spec = QuadratureSpec { abs_tol: 1e-13, rel_tol: 1e-13, ..Default::default() };
        let g = |x: f64| (f.density(t1, x).unwrap().sqrt() - f.density(t2, x).unwrap().sqrt()).powi(2);
        integrate_pieces(g, a, b, &br, &spec).unwrap()
    }

    fn chi_oracle(f: Family, tn: f64, td: f64) -> f64 {
        let (a, b, br) = support(f, tn, td);
        let spec = QuadratureSpec { abs_tol: 1e-13, rel_tol: 1e-13, ..Default::default() };
        let g = |x: f64| {
            let pd = f.density(td, x).unwrap();
            if pd == 0.0 {
                0.0
            } else {
                (f.density(tn, x).unwrap() / pd - 1.0).powi(2) * pd
            }
        };
        integrate_pieces(g, a, b, &br, &spec).unwrap()
    }

    #[test]
    fn densities() {
        assert!((G1.density(0.0, 0.0).unwrap() - 0.3989422804014327).abs() < 1e-16);
        assert_eq!(U.density(2.0, 1.0).unwrap(), 0.5);
        assert_eq!(U.density(2.0, 3.0).unwrap(), 0.0);
        assert!(U.density(0.0, 1.0).is_err());
        assert!(U.density(-1.0, 1.0).is_err());
        assert!(Family::gaussian(0.0).is_err());
    }

    #[test]
    fn fisher_information() {
        assert_eq!(G1.fisher_info(3.0).unwrap(), DivergenceValue::Finite(1.0));
        assert_eq!(Family::gaussian(2.0).unwrap().fisher_info(0.0).unwrap(), DivergenceValue::Finite(0.25));
        assert_eq!(U.fisher_info(1.0).unwrap(), DivergenceValue::Divergent);
    }

    #[test]
    fn hellinger_examples() {
        assert_eq!(G1.hellinger_sq(0.7, 0.7).unwrap(), 0.0);
        assert_eq!(U.hellinger_sq(2.0, 2.0).unwrap(), 0.0);
        let u = U.hellinger_sq(1.0, 1.5).unwrap();
        assert!((u - 0.367_006_838_144_547_9).abs() < 1e-15);
        assert!((u - hellinger_oracle(U, 1.0, 1.5)).abs() < 1e-8);
        // 2 - 2 exp(-1/8); the quoted 0.23500371 elsewhere is an arithmetic slip.
        let g = G1.hellinger_sq(0.0, 1.0).unwrap();
        assert!((g - 0.235_006_194_830_809_2).abs() < 1e-15);
        assert!((g - hellinger_oracle(G1, 0.0, 1.0)).abs() < 1e-8);
    }

    #[test]
    fn chi_sq_examples() {
        assert_eq!(U.chi_sq(1.0, 1.0).unwrap(), DivergenceValue::Finite(0.0));
        assert_eq!(U.chi_sq(2.0, 1.0).unwrap(), DivergenceValue::Divergent);
        assert_eq!(U.chi_sq(1.0, 2.0).unwrap(), DivergenceValue::Finite(1.0));
        let g = G1.chi_sq(1.0, 0.0).unwrap().finite().unwrap();
        assert!((g - std::f64::consts::E + 1.0).abs() < 1e-15);
        assert!((g - chi_oracle(G1, 1.0, 0.0)).abs() < 1e-7);
        assert!((1.0 - chi_oracle(U, 1.0, 2.0)).abs() < 1e-7);
        let g10 = G1.chi_sq_iid(0.1, 0.0, 10).unwrap().finite().unwrap();
        assert!((g10 - 0.105_170_918_075_647_6).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_match_integral_oracle() {
        let g2 = Family::gaussian(2.0).unwrap();
        for (f, a, b) in [(G1, -0.3, 0.4), (g2, 1.0, -2.0), (U, 0.5, 0.9), (U, 3.0, 2.0)] {
            assert!((f.hellinger_sq(a, b).unwrap() - hellinger_oracle(f, a, b)).abs() < 1e-7);
            let lo_hi = if matches!(f, Family::UniformScale) { (a.min(b), a.max(b)) } else { (a, b) };
            let c = f.chi_sq(lo_hi.0, lo_hi.1).unwrap().finite().unwrap();
            assert!((c - chi_oracle(f, lo_hi.0, lo_hi.1)).abs() < 1e-7);
        }
    }

    #[test]
    fn tensorized_uniform_limit() {
        let n = 1_000_000;
        let v = U.hellinger_sq_iid(1.0, 1.0 + 1.0 / n as f64, n).unwrap();
        assert!((v - (2.0 - 2.0 * (-0.5f64).exp())).abs() < 1e-5);
    }

    #[test]
    fn local_ratio() {
        for h in [1e-2, 1e-3, 1e-4] {
            for sigma in [0.5, 1.0, 2.0] {
                let f = Family::gaussian(sigma).unwrap();
                let r = f.hellinger_local_ratio(0.0, h).unwrap();
                assert!((r - 0.25 / (sigma * sigma)).abs() <= 10.0 * h);
            }
        }
        assert!((G1.hellinger_local_ratio(0.0, 1e-3).unwrap() - 0.25).abs() < 1e-6);
        assert!((Family::gaussian(2.0).unwrap().hellinger_local_ratio(0.0, 1e-3).unwrap() - 1.0 / 16.0).abs() < 1e-6);
        // 2(1 - (1 + h)^(-1/2)) / h², about 1/h; not 4999.6 as sometimes quoted.
        let r = U.hellinger_local_ratio(1.0, 1e-4).unwrap();
        assert!((r - 9_999.250_062_494_53).abs() < 1e-6);
        assert!(G1.hellinger_local_ratio(0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn hellinger_symmetric_and_bounded(a in -50.0f64..50.0, b in -50.0f64..50.0, s in 0.1f64..5.0) {
            let f = Family::gaussian(s).unwrap();
            let h = f.hellinger_sq(a, b).unwrap();
            prop_assert_eq!(h, f.hellinger_sq(b, a).unwrap());
            prop_assert!((0.0..=2.0).contains(&h));
            let (ua, ub) = (a.abs() + 0.01, b.abs() + 0.01);
            let hu = U.hellinger_sq(ua, ub).unwrap();
            prop_assert_eq!(hu, U.hellinger_sq(ub, ua).unwrap());
            prop_assert!((0.0..=2.0).contains(&hu));
        }

        #[test]
        fn tensorization_composes(a in 0.1f64..3.0, b in 0.1f64..3.0, m in 1u64..50, n in 1u64..50) {
            for f in [G1, U] {
                prop_assert_eq!(f.hellinger_sq_iid(a, b, 1).unwrap(), f.hellinger_sq(a, b).unwrap());
                let bc = |k| 1.0 - f.hellinger_sq_iid(a, b, k).unwrap() / 2.0;
                let lhs = bc(m + n);
                let rhs = bc(m) * (1.0 - f.hellinger_sq(a, b).unwrap() / 2.0).powi(n as i32);
                prop_assert!((lhs - rhs).abs() <= 1e-12);
            }
        }

        #[test]
        fn chi_sq_nonnegative(a in 0.1f64..3.0, b in 0.1f64..3.0, n in 1u64..20) {
            for f in [G1, U] {
                if let DivergenceValue::Finite(v) = f.chi_sq_iid(a, b, n).unwrap() {
                    prop_assert!(v >= 0.0);
                }
                prop_assert_eq!(f.chi_sq_iid(a, a, n).unwrap(), DivergenceValue::Finite(0.0));
            }
        }
    }
}
