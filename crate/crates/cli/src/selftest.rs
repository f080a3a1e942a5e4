//! Invariant checks run by `minimax selftest`.

use minimax_core::bounds::{
    diffeo_bound_sup, lam_constant_regular, lam_constant_uniform_diffeo, lam_constant_uniform_twopoint,
    vt_kepler_bound,
};
use minimax_core::estimators::{local_minimax_risk, plugin_risk_at, EstimatorSpec};
use minimax_core::mixtures::{mixture_hellinger_oracle, mixture_hellinger_sq};
use minimax_core::priors::{min_fisher_constrained, solve_kepler, KEPLER_TOL};
use minimax_core::sweep::{log_grid, run_sweep};
use minimax_core::{DivergenceValue, Family, GridSpec, MixtureSpec, Prior, SweepConfig, SweepMode};
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

struct Check {
    name: &'static str,
    /// Observed error and the tolerance it is held to before scaling.
    measure: fn() -> minimax_core::Result<(f64, f64)>,
}

fn kepler_residuals() -> minimax_core::Result<(f64, f64)> {
    let mut worst = 0.0f64;
    for i in 0..=100 {
        worst = worst.max(solve_kepler(i as f64 / 100.0, KEPLER_TOL)?.residual().abs());
    }
    Ok((worst, 1e-12))
}

fn kepler_fisher() -> minimax_core::Result<(f64, f64)> {
    Ok(((min_fisher_constrained(0.5)? - PI * PI).abs(), 1e-9))
}

fn tensorization() -> minimax_core::Result<(f64, f64)> {
    let g = Family::gaussian(1.0)?;
    let mut worst = 0.0f64;
    for &(a, b, n) in &[(0.0, 0.3, 5u64), (1.0, 0.2, 40), (-0.5, 0.5, 2)] {
        let one = g.hellinger_sq(a, b)?;
        let many = g.hellinger_sq_iid(a, b, n)?;
        worst = worst.max((many - 2.0 * (1.0 - (1.0 - one / 2.0).powi(n as i32))).abs());
        if let (DivergenceValue::Finite(c1), DivergenceValue::Finite(cn)) = (g.chi_sq(a, b)?, g.chi_sq_iid(a, b, n)?) {
            worst = worst.max((cn - ((1.0 + c1).powi(n as i32) - 1.0)).abs() / cn.max(1.0));
        }
    }
    Ok((worst, 1e-12))
}

fn decomposition() -> minimax_core::Result<(f64, f64)> {
    let family = Family::gaussian(1.0)?;
    let prior = Prior::gaussian(0.0, 1.0)?;
    let h = 0.5;
    let exact = mixture_hellinger_sq(&MixtureSpec::new(family, 1, prior, h))?;
    let grid = mixture_hellinger_oracle(family, &prior, h, &GridSpec::new(-10.0, 10.0, -20.0, 20.0))?;
    Ok(((exact - grid.value).abs(), 1e-6))
}

fn constants() -> minimax_core::Result<(f64, f64)> {
    let r = (lam_constant_regular()?.value - 0.28953).abs();
    let u = (lam_constant_uniform_twopoint()?.value - 0.0558).abs();
    // This one is held to 1e-4; scaled onto the shared 5e-4 limit.
    let d = (lam_constant_uniform_diffeo()?.value - 0.0635f64.powi(2)).abs() * 5.0;
    Ok((r.max(u).max(d), 5e-4))
}

fn ceiling() -> minimax_core::Result<(f64, f64)> {
    let vt = vt_kepler_bound(100.0, 10_000, 1.0)?.value;
    let diffeo = diffeo_bound_sup(100.0, 10_000)?.value;
    // Distance outside [0.99, 1] and [0.95, 1.0001], on a common scale.
    let out = |v: f64, lo: f64, hi: f64| (lo - v).max(v - hi).max(0.0);
    Ok((out(vt, 0.99, 1.0).max(out(diffeo, 0.95, 1.0001)), 1e-12))
}

fn dominance() -> minimax_core::Result<(f64, f64)> {
    let deltas = log_grid(1e-2, 1e2, 12)?;
    let mut worst = 0.0f64;
    for n in [10, 100] {
        let rows = run_sweep(&SweepConfig::new(SweepMode::VaryDelta { n, deltas: deltas.clone() }))?;
        for r in rows {
            worst = worst.max(-r.dominance_margin().unwrap_or(0.0));
        }
    }
    Ok((worst, 1e-9))
}

fn estimators() -> minimax_core::Result<(f64, f64)> {
    let at_zero = (plugin_risk_at(0.0, 16)?.value - 0.5).abs();
    let mut drop = 0.0f64;
    let mut last = 0.0;
    for d in log_grid(1e-2, 1e2, 40)? {
        let v = local_minimax_risk(EstimatorSpec::PluginMle, d, 10)?;
        drop = drop.max(last - v);
        last = v;
    }
    Ok((at_zero.max(drop), 1e-12))
}

const CHECKS: [Check; 8] = [
    Check { name: "kepler_residuals", measure: kepler_residuals },
    Check { name: "kepler_min_fisher", measure: kepler_fisher },
    Check { name: "tensorization", measure: tensorization },
    Check { name: "decomposition_oracle", measure: decomposition },
    Check { name: "scalar_constants", measure: constants },
    Check { name: "asymptotic_ceiling", measure: ceiling },
    Check { name: "dominance", measure: dominance },
    Check { name: "estimator_risks", measure: estimators },
];

/// Prints one line per check; exit code 3 if any fails.
pub fn run(scale: f64) -> ExitCode {
    if !(scale >= 0.0 && scale.is_finite()) {
        eprintln!("error: tolerance scale must be finite and >= 0");
        return ExitCode::from(2);
    }
    let mut failed = 0;
    for c in CHECKS {
        let t = Instant::now();
        let line = match (c.measure)() {
            Ok((err, tol)) => {
                let limit = tol * scale;
                let ok = err <= limit;
                if !ok {
                    failed += 1;
                }
                format!(
                    "{} {}: error {err:.3e} limit {limit:.3e} ({:.2}s)",
                    if ok { "PASS" } else { "FAIL" },
                    c.name,
                    t.elapsed().as_secs_f64()
                )
            }
            Err(e) => {
                failed += 1;
                format!("FAIL {}: {e}", c.name)
            }
        };
        println!("{line}");
    }
    println!("{} of {} checks passed", CHECKS.len() - failed, CHECKS.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
