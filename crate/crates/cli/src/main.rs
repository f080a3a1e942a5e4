mod selftest;
mod svg;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use minimax_core::bounds::{
    chi2_mixture_bound, density_lam_constant, diffeo_bound, diffeo_bound_sup, hellinger_mixture_bound,
    hellinger_mixture_bound_sup, lam_constant_regular, lam_constant_uniform_diffeo, lam_constant_uniform_twopoint,
    two_point_hellinger_bound, two_point_hellinger_sup, van_trees_value, vt_kepler_bound,
};
use minimax_core::estimators::{local_minimax_risk, EstimatorSpec};
use minimax_core::mixtures::mixture_chi_sq_interpolated;
use minimax_core::priors::{solve_kepler, KEPLER_TOL};
use minimax_core::sweep::{csv_string, default_delta_grid, log_grid, run_sweep, CsvRow};
use minimax_core::{
    BoundMethod, BoundResult, DivergenceValue, Family, Functional, MixtureSpec, PolyKernel, Prior, QuadratureSpec,
    SweepConfig, SweepEstimator, SweepMethod, SweepMode,
};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use svg::{Plot, Series};

#[derive(Parser)]
#[command(name = "minimax", version, about = "Local minimax lower bounds and estimator risks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the constrained cosine prior over a.
    Kepler(KeplerArgs),
    /// Evaluate one lower bound.
    Bound(BoundArgs),
    /// Local minimax risk of a reference estimator.
    Risk(RiskArgs),
    /// Bounds and risks over a grid of δ or n.
    Sweep(SweepArgs),
    /// The scalar asymptotic constants.
    Constants(ConstantsArgs),
    /// Run the built-in invariant checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct KeplerArgs {
    /// A single a in [0, 1].
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Number of evenly spaced a values in [0, 1].
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Density for a (0.75 when no single a is given) and min Fisher information over a.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Hellinger,
    Chi2,
    Vantrees,
    Vt,
    Diffeo,
    Twopoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Gaussian,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionalArg {
    Identity,
    Maxzero,
    Powermax,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    family: FamilyArg,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "maxzero")]
    functional: FunctionalArg,
    /// Exponent for powermax.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    n: u64,
}

impl ModelArgs {
    fn family(&self) -> Result<Family> {
        Ok(match self.family {
            FamilyArg::Gaussian => Family::gaussian(self.sigma)?,
            FamilyArg::Uniform => Family::UniformScale,
        })
    }

    fn functional(&self) -> Result<Functional> {
        let f = match self.functional {
            FunctionalArg::Identity => Functional::Identity,
            FunctionalArg::Maxzero => Functional::MaxZero,
            FunctionalArg::Powermax => Functional::PowerMax { alpha: self.alpha },
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Args)]
struct BoundArgs {
    #[arg(value_enum)]
    method: MethodArg,
    #[command(flatten)]
    model: ModelArgs,
    /// cosine:CENTER,HALFWIDTH | gaussian:MU,SIGMA | uniform:LO,HI | kepler:A,CENTER,SCALE
    #[arg(long, allow_hyphen_values = true)]
    prior: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    /// Prior shift; the hellinger bound searches over h when omitted.
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, allow_hyphen_values = true)]
    xi1: Option<f64>,
    #[arg(long)]
    xi2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta2: Option<f64>,
    /// Window center for the two-point search.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta0: f64,
    /// Fisher information bound for vt; defaults to 1/σ².
    #[arg(long)]
    sup_fisher: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Constant,
    Plugin,
    Pretest,
}

#[derive(Args)]
struct RiskArgs {
    #[arg(value_enum)]
    estimator: EstimatorArg,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    n: u64,
    /// Pre-test threshold on the unit-variance scale; defaults to n^(-1/4).
    #[arg(long)]
    threshold: Option<f64>,
    /// The constant's value; defaults to δ/2.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Fixed n, δ on the grid.
    Delta,
    /// Fixed δ, n on the grid.
    N,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "delta")]
    mode: ModeArg,
    /// Fixed n for the delta mode.
    #[arg(long, default_value_t = 100)]
    n: u64,
    /// Fixed δ for the n mode.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// LO:HI:POINTS (log-spaced) or a comma list. Defaults to 1e-2:1e2:50 for δ and 1:1e4:20 for n.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_delimiter = ',', default_value = "vt,diffeo,twopoint")]
    methods: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "constant,plugin,pretest")]
    estimators: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Also evaluate the kernel density constant for these ascending coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    kernel: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    order: u32,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Multiplies every tolerance; 0 forces the tolerance checks to fail.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<minimax_core::Error>() {
        Some(core) if core.is_numerical() => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Kepler(a) => cmd_kepler(a)?,
        Command::Bound(a) => cmd_bound(a)?,
        Command::Risk(a) => cmd_risk(a)?,
        Command::Sweep(a) => cmd_sweep(a)?,
        Command::Constants(a) => cmd_constants(a)?,
        Command::Selftest(a) => return Ok(selftest::run(a.tolerance_scale)),
    }
    Ok(ExitCode::SUCCESS)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn parse_prior(spec: &str) -> Result<Prior> {
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("prior {spec:?} must look like KIND:ARGS"))?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in prior")))
        .collect::<Result<_>>()?;
    let need = |k: usize| {
        if nums.len() == k {
            Ok(())
        } else {
            Err(anyhow!("prior {kind} takes {k} numbers, got {}", nums.len()))
        }
    };
    Ok(match kind {
        "cosine" => {
            need(2)?;
            Prior::cosine(nums[0], nums[1])?
        }
        "gaussian" => {
            need(2)?;
            Prior::gaussian(nums[0], nums[1])?
        }
        "uniform" => {
            need(2)?;
            Prior::uniform(nums[0], nums[1])?
        }
        "kepler" => {
            need(3)?;
            Prior::kepler(nums[0], nums[1], nums[2])?
        }
        other => bail!("unknown prior kind {other:?}"),
    })
}

fn kepler_rows(values: &[f64]) -> Result<String> {
    let mut text = String::from("a,y_a,w_a,min_fisher\n");
    for &a in values {
        let s = solve_kepler(a, KEPLER_TOL)?;
        text.push_str(&format!("{},{},{},{}\n", s.a, s.y_a, s.w_a, s.min_fisher));
    }
    Ok(text)
}

fn cmd_kepler(args: KeplerArgs) -> Result<()> {
    let values: Vec<f64> = match (args.a, args.grid) {
        (Some(a), None) => vec![a],
        (None, Some(g)) if g >= 2 => (0..g).map(|i| i as f64 / (g - 1) as f64).collect(),
        (None, Some(_)) => bail!(minimax_core::Error::InvalidInput {
            name: "grid",
            reason: "need at least 2 points".into()
        }),
        (None, None) => (0..=100).map(|i| i as f64 / 100.0).collect(),
        (Some(_), Some(_)) => bail!(minimax_core::Error::InvalidInput {
            name: "a",
            reason: "give either --a or --grid".into()
        }),
    };
    emit(&kepler_rows(&values)?, args.out.as_deref())?;
    if let Some(path) = args.svg {
        let a = args.a.unwrap_or(0.75);
        let s = solve_kepler(a, KEPLER_TOL)?;
        let density: Vec<(f64, f64)> = (0..=400).map(|i| -1.0 + 2.0 * i as f64 / 400.0).map(|t| (t, s.density(t))).collect();
        let fisher: Vec<(f64, f64)> = (0..=200)
            .map(|i| i as f64 / 200.0)
            .map(|a| Ok((a, solve_kepler(a, KEPLER_TOL)?.min_fisher)))
            .collect::<Result<_>>()?;
        let left = Plot {
            title: format!("least favorable density, a = {a}"),
            x_label: "t".into(),
            y_label: "density".into(),
            log_x: false,
            y_range: None,
            series: vec![Series {
                label: format!("a = {a}"),
                points: density,
                dashed: false,
            }],
        };
        let right = Plot {
            title: "minimal Fisher information".into(),
            x_label: "a".into(),
            y_label: "min Fisher".into(),
            log_x: false,
            y_range: None,
            series: vec![Series {
                label: "4π²/w²".into(),
                points: fisher,
                dashed: false,
            }],
        };
        write_file(&path, &stack(&[left.render(), right.render()]))?;
    }
    Ok(())
}

/// Places standalone plots one under another in a single document.
fn stack(parts: &[String]) -> String {
    let mut body = String::new();
    let mut height = 0.0;
    let mut width: f64 = 0.0;
    for p in parts {
        let inner = p.lines().skip(1).collect::<Vec<_>>().join("\n");
        let w: f64 = attr(&inner, "width").unwrap_or(640.0);
        let h: f64 = attr(&inner, "height").unwrap_or(420.0);
        body.push_str(&format!("<g transform=\"translate(0 {height:.3})\">\n{inner}\n</g>\n"));
        height += h;
        width = width.max(w);
    }
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.3}\" height=\"{height:.3}\" viewBox=\"0 0 {width:.3} {height:.3}\">\n{body}</svg>\n"
    )
}

fn attr(svg: &str, name: &str) -> Option<f64> {
    let key = format!(" {name}=\"");
    let start = svg.find(&key)? + key.len();
    svg[start..].split('"').next()?.parse().ok()
}

fn print_bound(r: &BoundResult, notes: &[&str]) {
    println!("method={}", r.method.tag());
    println!("value={}", r.value);
    for (k, v) in &r.argmax {
        println!("{k}={v}");
    }
    for n in notes {
        println!("note={n}");
    }
    let keys: Vec<&str> = r.argmax.keys().copied().collect();
    let vals: Vec<String> = r.argmax.values().map(|v| v.to_string()).collect();
    let mut header = vec!["method", "value"];
    header.extend(keys);
    println!("{}", header.join(","));
    let mut row = vec![r.method.tag().to_string(), r.value.to_string()];
    row.extend(vals);
    println!("{}", row.join(","));
}

fn required<T>(v: Option<T>, name: &'static str) -> Result<T> {
    v.ok_or_else(|| {
        anyhow::Error::new(minimax_core::Error::InvalidInput {
            name,
            reason: "required for this method".into(),
        })
    })
}

fn point(method: BoundMethod, value: f64, args: &[(&'static str, f64)]) -> BoundResult {
    BoundResult {
        value,
        argmax: args.iter().copied().collect::<BTreeMap<_, _>>(),
        method,
    }
}

fn cmd_bound(args: BoundArgs) -> Result<()> {
    let family = args.model.family()?;
    let f = args.model.functional()?;
    let n = args.model.n;
    let sigma = args.model.sigma;
    let mut notes = Vec::new();
    let result = match args.method {
        MethodArg::Hellinger => {
            let prior = parse_prior(&required(args.prior, "prior")?)?;
            let spec = MixtureSpec::new(family, n, prior, args.h.unwrap_or(0.0));
            match args.h {
                Some(h) => point(BoundMethod::HellingerMixture, hellinger_mixture_bound(&spec, f)?, &[("h", h)]),
                None => {
                    let scale = prior.dispersion();
                    hellinger_mixture_bound_sup(&spec, f, 1e-4 * scale, 10.0 * scale)?
                }
            }
        }
        MethodArg::Chi2 => {
            let prior = parse_prior(&required(args.prior, "prior")?)?;
            let h = required(args.h, "h")?;
            let spec = MixtureSpec::new(family, n, prior, h);
            if args.lambda < 1.0 && matches!(mixture_chi_sq_interpolated(&spec, args.lambda), Ok(DivergenceValue::Divergent))
            {
                notes.push("divergent denominator");
            }
            let v = chi2_mixture_bound(&spec, f, args.lambda)?;
            point(BoundMethod::ChiSquaredMixture, v, &[("h", h), ("lambda", args.lambda)])
        }
        MethodArg::Vantrees => {
            let prior = parse_prior(&required(args.prior, "prior")?)?;
            let v = van_trees_value(family, n, &prior, f, &QuadratureSpec::default())?;
            point(BoundMethod::VanTrees, v, &[])
        }
        MethodArg::Vt => {
            let delta = required(args.delta, "delta")?;
            vt_kepler_bound(delta, n, args.sup_fisher.unwrap_or(1.0 / (sigma * sigma)))?
        }
        MethodArg::Diffeo => {
            let delta = required(args.delta, "delta")?;
            let s2 = sigma * sigma;
            match (args.xi1, args.xi2) {
                (Some(x1), Some(x2)) => {
                    let v = diffeo_bound(delta / sigma, n, x1, x2, &QuadratureSpec::default())?;
                    point(BoundMethod::Diffeo, s2 * v, &[("xi1", x1), ("xi2", x2)])
                }
                (None, None) => {
                    let mut r = diffeo_bound_sup(delta / sigma, n)?;
                    r.value *= s2;
                    r
                }
                _ => bail!(minimax_core::Error::InvalidInput {
                    name: "xi1/xi2",
                    reason: "give both or neither".into()
                }),
            }
        }
        MethodArg::Twopoint => match (args.theta1, args.theta2) {
            (Some(t1), Some(t2)) => {
                let v = n as f64 * two_point_hellinger_bound(family, n, f, t1, t2)?;
                point(BoundMethod::TwoPoint, v, &[("theta1", t1), ("theta2", t2)])
            }
            (None, None) => two_point_hellinger_sup(family, n, f, args.theta0, required(args.delta, "delta")?)?,
            _ => bail!(minimax_core::Error::InvalidInput {
                name: "theta1/theta2",
                reason: "give both or neither".into()
            }),
        },
    };
    print_bound(&result, &notes);
    Ok(())
}

fn cmd_risk(args: RiskArgs) -> Result<()> {
    let spec = match args.estimator {
        EstimatorArg::Constant => EstimatorSpec::Constant {
            c: args.c.unwrap_or(args.delta / 2.0),
        },
        EstimatorArg::Plugin => EstimatorSpec::PluginMle,
        EstimatorArg::Pretest => EstimatorSpec::PreTest {
            threshold: args.threshold,
        },
    };
    let v = local_minimax_risk(spec, args.delta, args.n)?;
    println!("estimator={}", spec.name());
    println!("value={v}");
    println!("estimator,delta,n,value");
    println!("{},{},{},{}", spec.name(), args.delta, args.n, v);
    Ok(())
}

fn invalid(name: &'static str, reason: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(minimax_core::Error::InvalidInput {
        name,
        reason: reason.into(),
    })
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [lo, hi, pts] => {
            let lo: f64 = lo.parse().map_err(|_| invalid("grid", format!("bad lower end {lo:?}")))?;
            let hi: f64 = hi.parse().map_err(|_| invalid("grid", format!("bad upper end {hi:?}")))?;
            let pts: usize = pts.parse().map_err(|_| invalid("grid", format!("bad point count {pts:?}")))?;
            Ok(log_grid(lo, hi, pts)?)
        }
        [list] => list
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| invalid("grid", format!("bad value {s:?}"))))
            .collect(),
        _ => Err(invalid("grid", "use LO:HI:POINTS or a comma list")),
    }
}

fn sweep_config(args: &SweepArgs) -> Result<SweepConfig> {
    let mode = match args.mode {
        ModeArg::Delta => SweepMode::VaryDelta {
            n: args.n,
            deltas: match &args.grid {
                Some(g) => parse_grid(g)?,
                None => default_delta_grid(),
            },
        },
        ModeArg::N => {
            let raw = parse_grid(args.grid.as_deref().unwrap_or("1:1e4:20"))?;
            let mut ns: Vec<u64> = Vec::with_capacity(raw.len());
            for v in raw {
                if !(v >= 1.0 && v.is_finite()) {
                    return Err(invalid("grid", format!("n value {v} must be >= 1")));
                }
                let k = v.round() as u64;
                if ns.last() != Some(&k) {
                    ns.push(k);
                }
            }
            SweepMode::VaryN { delta: args.delta, ns }
        }
    };
    let mut cfg = SweepConfig::new(mode);
    cfg.sigma = args.sigma;
    cfg.methods = args.methods.iter().map(|m| SweepMethod::parse(m.trim())).collect::<Result<_, _>>()?;
    cfg.estimators = args
        .estimators
        .iter()
        .map(|e| SweepEstimator::parse(e.trim()))
        .collect::<Result<_, _>>()?;
    cfg.validate()?;
    Ok(cfg)
}

fn sweep_plot(cfg: &SweepConfig, rows: &[CsvRow]) -> Plot {
    let (x_of, x_label, title): (fn(&CsvRow) -> f64, &str, String) = match &cfg.mode {
        SweepMode::VaryDelta { n, .. } => (|r| r.delta, "δ", format!("n = {n}, σ = {}", cfg.sigma)),
        SweepMode::VaryN { delta, .. } => (|r| r.n as f64, "n", format!("δ = {delta}, σ = {}", cfg.sigma)),
    };
    let columns: [(&str, fn(&CsvRow) -> Option<f64>, bool); 6] = [
        ("vt bound", |r| r.bound_vt, true),
        ("diffeo bound", |r| r.bound_diffeo, true),
        ("two-point bound", |r| r.bound_twopoint, true),
        ("constant", |r| r.risk_constant, false),
        ("plug-in", |r| r.risk_plugin, false),
        ("pre-test", |r| r.risk_pretest, false),
    ];
    let series: Vec<Series> = columns
        .iter()
        .filter(|(_, get, _)| rows.iter().any(|r| get(r).is_some()))
        .map(|(label, get, dashed)| Series {
            label: (*label).into(),
            points: rows.iter().filter_map(|r| get(r).map(|v| (x_of(r), v))).collect(),
            dashed: *dashed,
        })
        .collect();
    // The constant's risk grows like nδ²; cap the view near the other curves.
    let s2 = cfg.sigma * cfg.sigma;
    let top = rows
        .iter()
        .flat_map(|r| r.bounds().chain(r.risk_plugin))
        .fold(s2, f64::max);
    Plot {
        title: format!("n-scaled bounds and risks, {title}"),
        x_label: x_label.into(),
        y_label: "n · risk".into(),
        log_x: true,
        y_range: Some((0.0, 1.25 * top)),
        series,
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let cfg = sweep_config(&args)?;
    let rows = run_sweep(&cfg)?;
    emit(&csv_string(&rows), args.out.as_deref())?;
    if let Some(path) = &args.svg {
        write_file(path, &sweep_plot(&cfg, &rows).render())?;
    }
    Ok(())
}

fn cmd_constants(args: ConstantsArgs) -> Result<()> {
    let mut text = String::from("constant,value,argmax\n");
    for (name, m) in [
        ("regular_twopoint", lam_constant_regular()?),
        ("uniform_twopoint", lam_constant_uniform_twopoint()?),
        ("uniform_diffeo", lam_constant_uniform_diffeo()?),
    ] {
        text.push_str(&format!("{name},{},{}\n", m.value, m.arg));
    }
    if let Some(coeffs) = args.kernel {
        let k = PolyKernel::new(coeffs, args.order)?;
        let v = density_lam_constant(args.order, args.m, &k)?;
        text.push_str(&format!("density_kernel,{v},\n"));
    }
    emit(&text, args.out.as_deref())
}
