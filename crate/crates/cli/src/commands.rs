//! Subcommand arguments, resolved configurations and implementations.

use crate::config::{require, resolve, CliError, CliResult, Output, Overlay};
use clap::{Args, Subcommand, ValueEnum};
use opplab_core::dirichlet::{
    level_sets_from_samples, log_grid, mean_square, resolving_spacing, sample_abs, write_level_csv,
    write_scan_csv, zeta_critical_line, zeta_envelope, DirichletPoly, EpsteinSum, Evaluator,
    F2Squared,
};
use opplab_core::numeric::{fmt17, ln_dd};
use opplab_core::search::{
    count_band, delta_count, density_check, min_search, DensityQuery, Engine,
};
use opplab_core::spectral::{
    integrate_samples, smoothed_count_direct, split_main_oscillatory, write_spectrum_csv,
    SpectralGrid, SpectralProblem,
};
use opplab_core::sweep::{
    fit_exponent, fractions_by_n, gnuplot_script, run_sweep, write_sweep_csv, AlphaAxis, Statistic,
    SweepPlan, SweepRecord,
};
use opplab_core::windows::{Interval, TransformTable};
use opplab_core::{FormParams, WindowSpec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

/// Inputs shared by every command.
pub struct Ctx<'a> {
    pub file: Option<&'a Value>,
    pub seed: Option<u64>,
}

impl Ctx<'_> {
    fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[derive(Args, Debug, Default)]
pub struct FormArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha3: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    /// Search radius N (sup-norm |x| < N).
    #[arg(short = 'N', long = "n", allow_negative_numbers = true)]
    pub n: Option<i64>,
}

impl FormArgs {
    fn overlay(&self) -> Overlay {
        Overlay::new()
            .set("alpha2", self.alpha2)
            .set("alpha3", self.alpha3)
            .set("xi", self.xi)
            .set("n", self.n)
    }
}

fn default_alpha2() -> f64 {
    1.0
}

fn form_params(alpha2: f64, alpha3: Option<f64>, xi: f64, n: Option<i64>) -> CliResult<FormParams> {
    let alpha3 = require(alpha3, "alpha3")?;
    let n = require(n, "n")?;
    let n = u32::try_from(n)
        .map_err(|_| CliError::invalid(format!("n_bound: n_bound must be at least 2, got {n}")))?;
    Ok(FormParams::new(alpha2, alpha3, xi, n)?)
}

// ---------------------------------------------------------------- min

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EngineArg {
    TwoPointer,
    Brute,
}

#[derive(Args, Debug)]
pub struct MinArgs {
    #[command(flatten)]
    pub form: FormArgs,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinConfig {
    #[serde(default = "default_alpha2")]
    pub alpha2: f64,
    pub alpha3: Option<f64>,
    #[serde(default)]
    pub xi: f64,
    pub n: Option<i64>,
    #[serde(default = "default_engine")]
    pub engine: EngineArg,
}

fn default_engine() -> EngineArg {
    EngineArg::TwoPointer
}

pub fn cmd_min(args: &MinArgs, ctx: &Ctx) -> CliResult<Output> {
    let ov = args.form.overlay().set("engine", args.engine);
    let cfg: MinConfig = resolve(ctx.file, ov)?;
    let p = form_params(cfg.alpha2, cfg.alpha3, cfg.xi, cfg.n)?;
    let engine = match cfg.engine {
        EngineArg::TwoPointer => Engine::TwoPointer,
        EngineArg::Brute => Engine::BruteForce,
    };
    let r = min_search(&p, engine)?;
    let w = r.witness;
    let result = json!({
        "abs_value": w.abs_value,
        "value": w.value,
        "point": [w.point.x1, w.point.x2, w.point.x3],
        "orbit_size": w.point.orbit_size(),
        "engine": cfg.engine,
        "points_scanned": r.points_scanned,
    });
    Output::new("min", "min", &cfg, ctx.seed_or_default(), &result)
}

// ---------------------------------------------------------------- count

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub form: FormArgs,
    /// Count solutions of |Q(x) − ξ| < δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Weight solutions by w₁(x/N) instead of counting the sharp box.
    #[arg(long)]
    pub windowed: bool,
    /// Count |Q(x) − ξ| ≤ threshold over the box [N/4, N)³ instead.
    #[arg(long)]
    pub band: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountConfig {
    #[serde(default = "default_alpha2")]
    pub alpha2: f64,
    pub alpha3: Option<f64>,
    #[serde(default)]
    pub xi: f64,
    pub n: Option<i64>,
    pub delta: Option<f64>,
    #[serde(default)]
    pub windowed: bool,
    pub band: Option<f64>,
}

pub fn cmd_count(args: &CountArgs, ctx: &Ctx) -> CliResult<Output> {
    let ov = args
        .form
        .overlay()
        .set("delta", args.delta)
        .flag("windowed", args.windowed)
        .set("band", args.band);
    let cfg: CountConfig = resolve(ctx.file, ov)?;
    let p = form_params(cfg.alpha2, cfg.alpha3, cfg.xi, cfg.n)?;
    let result = match (cfg.delta, cfg.band) {
        (Some(_), Some(_)) => return Err(CliError::invalid("give either delta or band, not both")),
        (None, None) => return Err(CliError::invalid("delta is required (or band)")),
        (Some(d), None) => {
            let c = delta_count(&p, d, cfg.windowed, &WindowSpec::default())?;
            json!({ "count": c, "windowed": cfg.windowed })
        }
        (None, Some(thr)) => {
            if !(thr.is_finite() && thr >= 0.0) {
                return Err(CliError::invalid("band: threshold must be nonnegative"));
            }
            json!({ "count": count_band(&p, thr)? })
        }
    };
    Output::new("count", "count", &cfg, ctx.seed_or_default(), &result)
}

// ---------------------------------------------------------------- density

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha3: Option<f64>,
    #[arg(short = 'N', long = "n", allow_negative_numbers = true)]
    pub n: Option<i64>,
    /// Half-width A of the target range [−A, A].
    #[arg(short = 'A', long = "a", allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// ξ-grid step (defaults to δ).
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    #[serde(default = "default_alpha2")]
    pub alpha2: f64,
    pub alpha3: Option<f64>,
    pub n: Option<i64>,
    pub a: Option<f64>,
    pub delta: Option<f64>,
    pub step: Option<f64>,
}

pub fn cmd_density(args: &DensityArgs, ctx: &Ctx) -> CliResult<Output> {
    let ov = Overlay::new()
        .set("alpha2", args.alpha2)
        .set("alpha3", args.alpha3)
        .set("n", args.n)
        .set("a", args.a)
        .set("delta", args.delta)
        .set("step", args.step);
    let mut cfg: DensityConfig = resolve(ctx.file, ov)?;
    let q = DensityQuery {
        a: require(cfg.a, "a")?,
        delta: require(cfg.delta, "delta")?,
        params: form_params(cfg.alpha2, cfg.alpha3, 0.0, cfg.n)?,
    };
    q.validate()?;
    cfg.step = Some(cfg.step.unwrap_or(q.delta));
    let report = density_check(&q, cfg.step.unwrap_or(q.delta))?;
    Output::new("density", "density", &cfg, ctx.seed_or_default(), &report)
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxisArg {
    Alpha3,
    Alpha2,
    Both,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Option<AxisArg>,
    /// Sweep interval for the varied coefficient.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub interval: Option<Vec<f64>>,
    /// Grid points on the swept axis.
    #[arg(long = "grid")]
    pub grid_points: Option<usize>,
    /// Use exact midpoints instead of jittered cells.
    #[arg(long)]
    pub no_jitter: bool,
    /// δ(N) = delta · N^exponent; `auto` means N^{−1/2}.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_exponent: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub alpha3: Option<f64>,
    /// Extra coefficient values appended to the grid (controls).
    #[arg(long = "extra", value_delimiter = ',')]
    pub extra_points: Option<Vec<f64>>,
    /// `a..b` (doubling from a to b) or a comma list.
    #[arg(long)]
    pub nlist: Option<String>,
    /// Skip the per-record δ-count.
    #[arg(long)]
    pub no_count: bool,
    #[arg(long)]
    pub cf_qmax: Option<u64>,
}

fn parse_nlist(s: &str) -> CliResult<Vec<u32>> {
    let bad = || CliError::invalid(format!("n_values: cannot parse {s:?}; use a..b or a,b,c"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u32, u32) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        if a < 2 || b < a {
            return Err(CliError::invalid("n_values: need 2 <= a <= b in a..b"));
        }
        let mut v = Vec::new();
        let mut n = a as u64;
        while n <= b as u64 {
            v.push(n as u32);
            n *= 2;
        }
        Ok(v)
    } else {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect()
    }
}

pub fn cmd_sweep(args: &SweepArgs, ctx: &Ctx) -> CliResult<Output> {
    let (delta, exponent) = match args.delta.as_deref() {
        None => (None, args.delta_exponent),
        Some("auto") => (Some(1.0), Some(args.delta_exponent.unwrap_or(-0.5))),
        Some(d) => {
            let d: f64 = d.parse().map_err(|_| {
                CliError::invalid(format!("delta: expected a number or auto, got {d:?}"))
            })?;
            (Some(d), Some(args.delta_exponent.unwrap_or(0.0)))
        }
    };
    let axis = args.axis.map(|a| match a {
        AxisArg::Alpha3 => AlphaAxis::Alpha3,
        AxisArg::Alpha2 => AlphaAxis::Alpha2,
        AxisArg::Both => AlphaAxis::Both,
    });
    let interval = args.interval.as_ref().map(|v| Interval::new(v[0], v[1]));
    let ov = Overlay::new()
        .set("alpha_axis", axis)
        .set("interval", interval)
        .set("grid_points", args.grid_points)
        .set("jitter", args.no_jitter.then_some(false))
        .set("delta", delta)
        .set("delta_exponent", exponent)
        .set("xi", args.xi)
        .set("alpha2", args.alpha2)
        .set("alpha3", args.alpha3)
        .set("extra_points", args.extra_points.clone())
        .set(
            "n_values",
            args.nlist.as_deref().map(parse_nlist).transpose()?,
        )
        .set("seed", ctx.seed)
        .set("count", args.no_count.then_some(false))
        .set("cf_q_max", args.cf_qmax);
    let plan: SweepPlan = resolve(ctx.file, ov)?;
    plan.validate()?;
    let records = run_sweep(&plan)?;
    let fractions = fractions_by_n(&plan, &records)?;
    let distinct: std::collections::BTreeSet<u32> = records.iter().map(|r| r.n).collect();
    let fit = if distinct.len() >= 4 {
        fit_exponent(&records, Statistic::Median).ok()
    } else {
        None
    };
    let result = json!({
        "records": records.len(),
        "fractions": fractions,
        "median_fit": fit,
    });
    let mut csv = Vec::new();
    write_sweep_csv(&records, &mut csv)?;
    let mut out = Output::new("sweep", "sweep", &plan, plan.seed, &result)?.with_csv(csv);
    out.extra
        .push(("sweep.gp".into(), gnuplot_script("sweep.csv").into_bytes()));
    Ok(out)
}

// ---------------------------------------------------------------- fit

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatArg {
    Median,
    Mean,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Sweep CSV to fit.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub statistic: Option<StatArg>,
    /// Records with these α₃ values are fitted separately (controls).
    #[arg(long = "control", value_delimiter = ',')]
    pub controls: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub input: Option<PathBuf>,
    #[serde(default = "default_statistic")]
    pub statistic: Statistic,
    #[serde(default)]
    pub controls: Vec<f64>,
}

fn default_statistic() -> Statistic {
    Statistic::Median
}

#[derive(Deserialize)]
struct CsvRow {
    alpha2: f64,
    alpha3: f64,
    n: u32,
    min_abs: f64,
    count_delta: Option<u64>,
    exceptional: u8,
    cf_flag: u64,
}

pub fn read_sweep_csv(path: &std::path::Path) -> CliResult<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_path(path)
        .map_err(|e| CliError::invalid(format!("input {}: {e}", path.display())))?;
    rd.deserialize::<CsvRow>()
        .map(|row| {
            let r = row.map_err(|e| CliError::invalid(format!("input {}: {e}", path.display())))?;
            Ok(SweepRecord {
                alpha2: r.alpha2,
                alpha3: r.alpha3,
                n: r.n,
                min_abs: r.min_abs,
                count_delta: r.count_delta,
                exceptional: r.exceptional != 0,
                cf_flag: r.cf_flag,
            })
        })
        .collect()
}

pub fn cmd_fit(args: &FitArgs, ctx: &Ctx) -> CliResult<Output> {
    let stat = args.statistic.map(|s| match s {
        StatArg::Median => Statistic::Median,
        StatArg::Mean => Statistic::Mean,
    });
    let ov = Overlay::new()
        .set("input", args.input.clone())
        .set("statistic", stat)
        .set("controls", args.controls.clone());
    let cfg: FitConfig = resolve(ctx.file, ov)?;
    let input = require(cfg.input.clone(), "input")?;
    let records = read_sweep_csv(&input)?;
    let (ctrl, generic): (Vec<SweepRecord>, Vec<SweepRecord>) = records
        .into_iter()
        .partition(|r| cfg.controls.contains(&r.alpha3));
    let fit = fit_exponent(&generic, cfg.statistic)?;
    let controls = cfg
        .controls
        .iter()
        .map(|&a| {
            let rs: Vec<SweepRecord> = ctrl.iter().filter(|r| r.alpha3 == a).copied().collect();
            Ok(json!({ "alpha3": a, "fit": fit_exponent(&rs, cfg.statistic)? }))
        })
        .collect::<CliResult<Vec<Value>>>()?;
    let result = json!({ "fit": fit, "sane": fit.is_sane(), "controls": controls });
    Output::new("fit", "fit", &cfg, ctx.seed_or_default(), &result)
}

// ---------------------------------------------------------------- spectral

#[derive(Args, Debug)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub form: FormArgs,
    /// Smoothing scale T.
    #[arg(short = 'T', long = "t-scale")]
    pub t_scale: Option<f64>,
    /// Quadrature spacing (defaults to the alias-free rule).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Also evaluate the direct windowed sum and report the relative error.
    #[arg(long)]
    pub compare: bool,
    /// Emit the sampled spectrum as CSV.
    #[arg(long)]
    pub samples: bool,
    /// Split into main and oscillatory parts at this frequency scale.
    #[arg(long)]
    pub split: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default = "default_alpha2")]
    pub alpha2: f64,
    pub alpha3: Option<f64>,
    #[serde(default)]
    pub xi: f64,
    pub n: Option<i64>,
    pub t_scale: Option<f64>,
    pub dt: Option<f64>,
    #[serde(default)]
    pub compare: bool,
    #[serde(default)]
    pub samples: bool,
    pub split: Option<f64>,
    #[serde(default)]
    pub windows: WindowSpec,
}

pub fn cmd_spectral(args: &SpectralArgs, ctx: &Ctx) -> CliResult<Output> {
    let ov = args
        .form
        .overlay()
        .set("t_scale", args.t_scale)
        .set("dt", args.dt)
        .flag("compare", args.compare)
        .flag("samples", args.samples)
        .set("split", args.split);
    let cfg: SpectralConfig = resolve(ctx.file, ov)?;
    let p = form_params(cfg.alpha2, cfg.alpha3, cfg.xi, cfg.n)?;
    let w = cfg.windows;
    w.validate()?;
    let t_scale = require(cfg.t_scale, "t_scale")?;
    if !(t_scale.is_finite() && t_scale > 0.0) {
        return Err(CliError::invalid("t_scale: T must be positive"));
    }
    let problem = SpectralProblem::new(&p, &w)?;
    let grid = match cfg.dt {
        Some(dt) => SpectralGrid::with_spacing(t_scale, dt, &w)?,
        None => SpectralGrid::for_params(&p, &w, t_scale)?,
    };
    grid.validate(p.n_bound, &w)?;
    let samples = problem.samples(&grid);
    let spectral = integrate_samples(&samples, ln_dd(p.alpha3), t_scale)?;
    let mut result = json!({
        "spectral": spectral,
        "grid": { "dt": grid.dt, "t_max": grid.t_max, "nodes": grid.len() },
    });
    if cfg.compare {
        let direct = smoothed_count_direct(&p, &w, t_scale)?;
        result["direct"] = json!(direct);
        result["abs_error"] = json!((spectral - direct).abs());
        result["rel_error"] = json!((spectral - direct).abs() / direct.abs());
    }
    if let Some(ts) = cfg.split {
        let s = split_main_oscillatory(&p, &w, t_scale, ts)?;
        result["main"] = json!(s.main);
        result["oscillatory"] = json!(s.osc);
    }
    let mut out = Output::new("spectral", "spectral", &cfg, ctx.seed_or_default(), &result)?;
    if cfg.samples {
        let mut csv = Vec::new();
        write_spectrum_csv(&samples, &mut csv)?;
        out = out.with_csv(csv);
    }
    Ok(out)
}

// ---------------------------------------------------------------- dirichlet

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// aₙ ≡ 1 on [N, 2N).
    Ones,
    /// Seeded ±1 coefficients on [N, 2N).
    Rademacher,
    /// Σ_{m,n∼N} (m² + α n²)^{it}.
    Epstein,
    /// F₂(t)² over n ∼ N².
    F2sq,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(short = 'N', long = "n")]
    pub n: Option<u64>,
    /// Coefficient α of the Epstein family.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RangeArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub trange: Option<Vec<f64>>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Ascending thresholds (default: sup·2^{−k}, k = 7..0).
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct MeanSquareArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Half-width T of the integration range (−T, T).
    #[arg(short = 'T', long = "t-half")]
    pub t_half: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum DirichletCmd {
    /// |S(t)| on a grid, with one exceedance flag per threshold.
    Scan(RangeArgs),
    /// Level-set measure and 1-separated counts per threshold.
    Levels(RangeArgs),
    /// ∫_{|t|<T} |S(t)|² dt.
    Meansq(MeanSquareArgs),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletConfig {
    pub family: Option<Family>,
    pub n: Option<u64>,
    #[serde(default = "default_alpha2")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    pub t_range: Option<Interval>,
    pub t_half: Option<f64>,
    pub dt: Option<f64>,
    #[serde(default)]
    pub thresholds: Vec<f64>,
}

fn family_overlay(f: &FamilyArgs, seed: Option<u64>) -> Overlay {
    Overlay::new()
        .set("family", f.family)
        .set("n", f.n)
        .set("alpha", f.alpha)
        .set("seed", seed)
}

struct Built {
    eval: Box<dyn Evaluator>,
    energy: f64,
}

fn build_family(cfg: &DirichletConfig) -> CliResult<Built> {
    let family = require(cfg.family, "family")?;
    let n = require(cfg.n, "n")?;
    Ok(match family {
        Family::Ones | Family::Rademacher => {
            if n < 1 {
                return Err(CliError::invalid("n: N must be positive"));
            }
            let p = if family == Family::Ones {
                DirichletPoly::ones(n)?
            } else {
                DirichletPoly::rademacher(n, 2 * n, cfg.seed)?
            };
            let energy = p.coeff_energy();
            Built {
                eval: Box::new(p),
                energy,
            }
        }
        Family::Epstein => {
            let e = EpsteinSum::new(cfg.alpha, n)?;
            let energy = e.term_count() as f64;
            Built {
                eval: Box::new(e),
                energy,
            }
        }
        Family::F2sq => {
            let n = u32::try_from(n).map_err(|_| CliError::invalid("n: N is too large"))?;
            Built {
                eval: Box::new(F2Squared::new(&WindowSpec::default(), n)?),
                energy: f64::NAN,
            }
        }
    })
}

pub fn cmd_dirichlet(cmd: &DirichletCmd, ctx: &Ctx) -> CliResult<Output> {
    match cmd {
        DirichletCmd::Scan(a) | DirichletCmd::Levels(a) => {
            let ov = family_overlay(&a.family, ctx.seed)
                .set(
                    "t_range",
                    a.trange.as_ref().map(|v| Interval::new(v[0], v[1])),
                )
                .set("dt", a.dt)
                .set("thresholds", a.thresholds.clone());
            let mut cfg: DirichletConfig = resolve(ctx.file, ov)?;
            let built = build_family(&cfg)?;
            let range = require(cfg.t_range, "t_range")?;
            let dt = cfg
                .dt
                .unwrap_or_else(|| resolving_spacing(built.eval.as_ref()));
            cfg.dt = Some(dt);
            let abs = sample_abs(built.eval.as_ref(), range, dt)?;
            if cfg.thresholds.is_empty() {
                let sup = abs.iter().copied().fold(0.0, f64::max);
                if sup > 0.0 {
                    cfg.thresholds = (0..8).rev().map(|k| sup * 0.5f64.powi(k)).collect();
                }
            }
            let reports = level_sets_from_samples(&abs, range, dt, &cfg.thresholds)?;
            let seed = cfg.seed;
            if matches!(cmd, DirichletCmd::Scan(_)) {
                let mut csv = Vec::new();
                write_scan_csv(&abs, range, dt, &cfg.thresholds, &mut csv)?;
                let sup = abs.iter().copied().fold(0.0, f64::max);
                let result = json!({ "samples": abs.len(), "sup": sup, "levels": reports });
                Ok(Output::new("dirichlet scan", "scan", &cfg, seed, &result)?.with_csv(csv))
            } else {
                let mut csv = Vec::new();
                write_level_csv(&reports, &mut csv)?;
                let result = json!({ "levels": reports });
                Ok(Output::new("dirichlet levels", "levels", &cfg, seed, &result)?.with_csv(csv))
            }
        }
        DirichletCmd::Meansq(a) => {
            let ov = family_overlay(&a.family, ctx.seed)
                .set("t_half", a.t_half)
                .set("dt", a.dt);
            let mut cfg: DirichletConfig = resolve(ctx.file, ov)?;
            let built = build_family(&cfg)?;
            let t_half = require(cfg.t_half, "t_half")?;
            let dt = cfg
                .dt
                .unwrap_or_else(|| resolving_spacing(built.eval.as_ref()));
            cfg.dt = Some(dt);
            let m = mean_square(built.eval.as_ref(), t_half, dt)?;
            let result = json!({
                "mean_square": m,
                "coeff_energy": if built.energy.is_finite() { json!(built.energy) } else { Value::Null },
            });
            Output::new("dirichlet meansq", "meansq", &cfg, cfg.seed, &result)
        }
    }
}

// ---------------------------------------------------------------- zeta

#[derive(Args, Debug)]
pub struct ZetaArgs {
    /// Points t at which to evaluate ζ(½ + it).
    #[arg(long = "t", num_args = 1.., allow_negative_numbers = true, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Log-spaced scan over [LO, HI].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub scan: Option<Vec<f64>>,
    /// Points in the scan.
    #[arg(long)]
    pub count: Option<usize>,
    /// Also integrate the envelope |ζ(½ + i(y − t))| / (1 + |y|¹⁰) over |y| < Y.
    #[arg(long)]
    pub envelope: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZetaConfig {
    #[serde(default)]
    pub t: Vec<f64>,
    pub scan: Option<Interval>,
    #[serde(default = "default_scan_count")]
    pub count: usize,
    pub envelope: Option<f64>,
}

fn default_scan_count() -> usize {
    200
}

pub fn cmd_zeta(args: &ZetaArgs, ctx: &Ctx) -> CliResult<Output> {
    let ov = Overlay::new()
        .set("t", args.t.clone())
        .set(
            "scan",
            args.scan.as_ref().map(|v| Interval::new(v[0], v[1])),
        )
        .set("count", args.count)
        .set("envelope", args.envelope);
    let cfg: ZetaConfig = resolve(ctx.file, ov)?;
    let mut ts = cfg.t.clone();
    if let Some(s) = cfg.scan {
        if !(s.lo > 0.0 && s.lo < s.hi && cfg.count >= 2) {
            return Err(CliError::invalid("scan: need 0 < lo < hi and count >= 2"));
        }
        ts.extend(log_grid(s.lo, s.hi, cfg.count));
    }
    if ts.is_empty() {
        return Err(CliError::invalid("t is required (or scan)"));
    }
    let mut rows = Vec::with_capacity(ts.len());
    let mut csv = Vec::new();
    writeln!(csv, "t,re,im,abs,growth_ratio")?;
    for &t in &ts {
        let z = zeta_critical_line(t)?;
        let ratio = z.norm() / (1.0 + t.abs()).powf(1.0 / 6.0);
        writeln!(
            csv,
            "{},{},{},{},{}",
            fmt17(t),
            fmt17(z.re),
            fmt17(z.im),
            fmt17(z.norm()),
            fmt17(ratio)
        )?;
        let mut row =
            json!({ "t": t, "re": z.re, "im": z.im, "abs": z.norm(), "growth_ratio": ratio });
        if let Some(y) = cfg.envelope {
            row["envelope"] = serde_json::to_value(zeta_envelope(t, y)?).expect("serializable");
        }
        rows.push(row);
    }
    let max_ratio = rows
        .iter()
        .map(|r| r["growth_ratio"].as_f64().unwrap_or(0.0))
        .fold(0.0, f64::max);
    let result = json!({ "values": rows, "max_growth_ratio": max_ratio });
    let out = Output::new("zeta", "zeta", &cfg, ctx.seed_or_default(), &result)?;
    Ok(if cfg.scan.is_some() {
        out.with_csv(csv)
    } else {
        out
    })
}

// ---------------------------------------------------------------- windows

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    /// ŵ₂ on its cached grid.
    FourierW2,
    /// w̌₁(σ + iy) for |y| ≤ y_max.
    MellinW1,
}

#[derive(Subcommand, Debug)]
pub enum WindowsCmd {
    /// Write a transform table as CSV.
    Dump(DumpArgs),
}

#[derive(Args, Debug)]
pub struct DumpArgs {
    #[arg(long, value_enum)]
    pub kind: Option<TableKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub y_max: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpConfig {
    #[serde(default = "default_kind")]
    pub kind: TableKind,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_y_max")]
    pub y_max: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub windows: WindowSpec,
}

fn default_kind() -> TableKind {
    TableKind::FourierW2
}
fn default_sigma() -> f64 {
    1.0
}
fn default_y_max() -> f64 {
    64.0
}
fn default_step() -> f64 {
    1.0 / 64.0
}

pub fn cmd_windows(cmd: &WindowsCmd, ctx: &Ctx) -> CliResult<Output> {
    let WindowsCmd::Dump(a) = cmd;
    let ov = Overlay::new()
        .set("kind", a.kind)
        .set("sigma", a.sigma)
        .set("y_max", a.y_max)
        .set("step", a.step);
    let cfg: DumpConfig = resolve(ctx.file, ov)?;
    cfg.windows.validate()?;
    let table = match cfg.kind {
        TableKind::FourierW2 => cfg.windows.fourier_w2_table()?,
        TableKind::MellinW1 => {
            TransformTable::mellin_w1(&cfg.windows, cfg.sigma, cfg.y_max, cfg.step)?
        }
    };
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    let result = json!({
        "rows": csv.iter().filter(|&&b| b == b'\n').count() - 1,
        "tail_cutoff_1e-8": table.tail_cutoff(1e-8),
    });
    Ok(Output::new(
        "windows dump",
        "window_table",
        &cfg,
        ctx.seed_or_default(),
        &result,
    )?
    .with_csv(csv))
}
