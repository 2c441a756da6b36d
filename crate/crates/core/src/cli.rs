//! The `bergman` command line.
//!
//! Settings are layered: built-in defaults, then `--config <file>`
//! (`key = value` lines, see [`crate::config`]), then flags. Results go to
//! `--output` (standard output by default) as CSV or JSON, written once at
//! the end. Short summaries (fits, verdicts) go to standard error.
//!
//! Exit codes: [`EXIT_OK`], [`EXIT_VERDICT_FAILED`], [`EXIT_CONFIG`],
//! [`EXIT_NOT_CONVERGED`], [`EXIT_IO`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::averaging::{avg_ladder, box_ladder, carleson_mean, scaling_fit};
use crate::config::{ApplyOperator, Command, Format, RunConfig};
use crate::error::{Error, Result};
use crate::geometry::Decomposition;
use crate::operators::{
    limit_apply, series_apply, tensor_grid, transpose_apply, truncated_apply, FieldSample, LimitSchedule,
    OperatorKind, TestFunction,
};
use crate::report::{Cell, Table};
use crate::spectral::{growth_fit, SpectralSequence};
use crate::symbol::Symbol;

pub const EXIT_OK: i32 = 0;
/// `reproduce-prop15` ran but some verdict row failed.
pub const EXIT_VERDICT_FAILED: i32 = 1;
/// Bad flags, config file, symbol text or out-of-range values.
pub const EXIT_CONFIG: i32 = 2;
/// Some quantity missed its tolerance; the artifact is still written.
pub const EXIT_NOT_CONVERGED: i32 = 3;
/// Reading or writing files failed.
pub const EXIT_IO: i32 = 4;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "BERGMAN_THREADS";

/// Slack on the Carleson-mean slope around `-b`.
pub const CARLESON_SLOPE_SLACK: f64 = 0.05;
/// Slack below `3 - b` on the slope of `|D|·sup|â_D|`.
pub const AVERAGE_SLOPE_SLACK: f64 = 0.15;
/// A log–log slope whose growth is at most this counts as a bounded trend.
pub const BOUNDED_TREND_SLOPE: f64 = 0.05;
/// Slack on the eigenvalue growth exponent of `|a_b|` around `b`.
pub const GROWTH_SLOPE_SLACK: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "bergman", version, about = "Toeplitz and little Hankel operators on the Bergman space of the disc")]
struct Cli {
    /// `key = value` config file applied before the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; `-` or absent for standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<Format>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Print the effective configuration in canonical form and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// List the boxes of generations 1..=mmax.
    Decompose {
        #[arg(long = "mmax")]
        m_max: Option<u32>,
    },
    /// Sup of box averages along D(1-2δ, θ), δ = 2^-m.
    Avg(LadderArgs),
    /// Carleson means along D(1-2δ, θ).
    Carleson(LadderArgs),
    /// Apply a truncated or series operator to a test function on a grid.
    Apply(ApplyArgs),
    /// Radial limit ladder ρ_m = 1 - 2^-m with its convergence log.
    Converge(ConvergeArgs),
    /// Eigenvalues γ_n of a radial symbol.
    Spectrum(SpectrumArgs),
    /// Boundedness dichotomy for a_b: averaging slopes and eigenvalue growth.
    #[command(name = "reproduce-prop15")]
    ReproduceProp15(ReproduceArgs),
    /// Run whatever the config file names.
    Run,
}

#[derive(Debug, Args)]
struct LadderArgs {
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long = "mmin")]
    m_min: Option<u32>,
    #[arg(long = "mmax")]
    m_max: Option<u32>,
    #[arg(long)]
    theta: Option<f64>,
    /// Sample grid for ζ, e.g. 16x16.
    #[arg(long = "zeta-grid")]
    zeta_grid: Option<String>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Comma-separated radii of the evaluation grid.
    #[arg(long = "grid-radii")]
    grid_radii: Option<String>,
    #[arg(long = "grid-angles")]
    grid_angles: Option<usize>,
}

#[derive(Debug, Args)]
struct ApplyArgs {
    /// toeplitz, hankel or series.
    #[arg(long)]
    operator: Option<String>,
    #[arg(long)]
    symbol: Option<String>,
    /// Test function, e.g. poly:1,1 or mono:3.
    #[arg(long = "f")]
    test_function: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    /// Last generation summed by the series operator.
    #[arg(long)]
    generation: Option<u32>,
    /// Use the conjugate symbol.
    #[arg(long)]
    transpose: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[arg(long)]
    operator: Option<String>,
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long = "f")]
    test_function: Option<String>,
    #[arg(long = "steps")]
    ladder_steps: Option<u32>,
    #[arg(long = "cauchy-eps")]
    cauchy_eps: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long = "nmax")]
    n_max: Option<usize>,
    /// First index of the growth-fit window.
    #[arg(long = "fit-min")]
    fit_min: Option<usize>,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    #[arg(long)]
    b: Option<f64>,
    #[arg(long = "mmin")]
    m_min: Option<u32>,
    #[arg(long = "mmax")]
    m_max: Option<u32>,
    #[arg(long = "nmax")]
    n_max: Option<usize>,
    #[arg(long = "fit-min")]
    fit_min: Option<usize>,
    #[arg(long = "zeta-grid")]
    zeta_grid: Option<String>,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse()
}

/// Sets `key` from a flag value, reporting failures as parse errors on the
/// command line.
fn set(config: &mut RunConfig, key: &str, value: Option<String>) -> Result<()> {
    match value {
        Some(v) => config
            .set(key, &v)
            .map_err(|msg| Error::parse(1, 1, format!("--{}: {msg}", key.replace('_', "-")))),
        None => Ok(()),
    }
}

fn opt<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

impl GridArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<()> {
        set(c, "grid_radii", self.grid_radii.clone())?;
        set(c, "grid_angles", opt(&self.grid_angles))
    }
}

impl LadderArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<()> {
        set(c, "symbol", self.symbol.clone())?;
        set(c, "m_min", opt(&self.m_min))?;
        set(c, "m_max", opt(&self.m_max))?;
        set(c, "theta", opt(&self.theta))?;
        set(c, "zeta_grid", self.zeta_grid.clone())
    }
}

/// Builds the effective configuration from parsed flags.
fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)?;
        c.merge_text(&text)?;
    }
    let command = match &cli.command {
        Sub::Decompose { m_max } => {
            set(&mut c, "m_max", opt(m_max))?;
            Command::Decompose
        }
        Sub::Avg(a) => {
            a.apply(&mut c)?;
            Command::Avg
        }
        Sub::Carleson(a) => {
            a.apply(&mut c)?;
            Command::Carleson
        }
        Sub::Apply(a) => {
            set(&mut c, "operator", a.operator.clone())?;
            set(&mut c, "symbol", a.symbol.clone())?;
            set(&mut c, "test_function", a.test_function.clone())?;
            set(&mut c, "rho", opt(&a.rho))?;
            set(&mut c, "generation", opt(&a.generation))?;
            if a.transpose {
                c.transpose = true;
            }
            a.grid.apply(&mut c)?;
            Command::Apply
        }
        Sub::Converge(a) => {
            set(&mut c, "operator", a.operator.clone())?;
            set(&mut c, "symbol", a.symbol.clone())?;
            set(&mut c, "test_function", a.test_function.clone())?;
            set(&mut c, "ladder_steps", opt(&a.ladder_steps))?;
            set(&mut c, "cauchy_eps", opt(&a.cauchy_eps))?;
            a.grid.apply(&mut c)?;
            Command::Converge
        }
        Sub::Spectrum(a) => {
            set(&mut c, "symbol", a.symbol.clone())?;
            set(&mut c, "n_max", opt(&a.n_max))?;
            set(&mut c, "fit_min", opt(&a.fit_min))?;
            Command::Spectrum
        }
        Sub::ReproduceProp15(a) => {
            set(&mut c, "b", opt(&a.b))?;
            set(&mut c, "m_min", opt(&a.m_min))?;
            set(&mut c, "m_max", opt(&a.m_max))?;
            set(&mut c, "n_max", opt(&a.n_max))?;
            set(&mut c, "fit_min", opt(&a.fit_min))?;
            set(&mut c, "zeta_grid", a.zeta_grid.clone())?;
            Command::ReproduceProp15
        }
        Sub::Run => c.command,
    };
    c.command = command;
    if let Some(p) = &cli.output {
        set(&mut c, "output", Some(p.display().to_string()))?;
    }
    if let Some(f) = cli.format {
        c.format = f;
    }
    set(&mut c, "tol", opt(&cli.tol))?;
    c.validate()?;
    Ok(c)
}

/// The artifact of a run plus its status.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub table: Table,
    pub converged: bool,
    /// `Some` for commands that issue a pass/fail verdict.
    pub verdict: Option<bool>,
    /// Human-readable lines for standard error.
    pub summary: Vec<String>,
}

impl RunOutcome {
    fn table(table: Table, converged: bool) -> Self {
        RunOutcome {
            table,
            converged,
            verdict: None,
            summary: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => self.table.to_json_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if !self.converged {
            EXIT_NOT_CONVERGED
        } else if self.verdict == Some(false) {
            EXIT_VERDICT_FAILED
        } else {
            EXIT_OK
        }
    }
}

/// Executes a validated configuration.
pub fn run(c: &RunConfig) -> Result<RunOutcome> {
    c.validate()?;
    match c.command {
        Command::Decompose => decompose(c),
        Command::Avg => avg(c),
        Command::Carleson => carleson(c),
        Command::Apply => apply(c),
        Command::Converge => converge(c),
        Command::Spectrum => spectrum(c),
        Command::ReproduceProp15 => reproduce(c),
    }
}

fn decompose(c: &RunConfig) -> Result<RunOutcome> {
    let d = Decomposition::new(c.m_max)?;
    let mut t = Table::new(&["m", "mu", "r_in", "r_out", "theta_in", "theta_out", "area"]);
    for b in d.boxes() {
        let i = b.index.expect("decomposition boxes are indexed");
        t.push(vec![
            i.m.into(),
            i.mu.into(),
            b.r_in.into(),
            b.r_out.into(),
            b.theta_in.into(),
            b.theta_out.into(),
            b.area().into(),
        ]);
    }
    Ok(RunOutcome::table(t, true))
}

fn avg(c: &RunConfig) -> Result<RunOutcome> {
    let a = Symbol::parse(&c.symbol)?;
    let ladder = avg_ladder(&a, c.m_min..=c.m_max, c.theta, c.zeta_grid, c.tol)?;
    let mut t = Table::new(&[
        "m",
        "delta",
        "r_in",
        "theta_in",
        "area",
        "sup_avg",
        "area_times_sup",
        "argmax_rho",
        "argmax_phi",
        "carleson_mean",
        "tol",
        "err",
        "converged",
    ]);
    let mut converged = true;
    for rung in &ladder {
        let r = &rung.report;
        converged &= r.converged;
        t.push(vec![
            rung.m.into(),
            rung.delta.into(),
            r.r_in.into(),
            r.theta_in.into(),
            r.area.into(),
            r.sup_over_zeta.into(),
            (r.area * r.sup_over_zeta).into(),
            r.argmax_zeta.rho.into(),
            r.argmax_zeta.phi.into(),
            r.carleson_mean.into(),
            r.tol.into(),
            r.error_estimate.into(),
            r.converged.into(),
        ]);
    }
    let mut out = RunOutcome::table(t, converged);
    if ladder.len() >= 3 {
        let mass: Vec<_> = ladder.iter().map(|r| (r.delta, r.report.area * r.report.sup_over_zeta)).collect();
        if let Ok(fit) = scaling_fit(&mass) {
            out.summary.push(format!("slope of area*sup|avg| vs delta: {:.4}", fit.slope));
        }
    }
    Ok(out)
}

fn carleson(c: &RunConfig) -> Result<RunOutcome> {
    let a = Symbol::parse(&c.symbol)?;
    let mut t = Table::new(&["m", "delta", "r", "carleson_mean", "err", "converged"]);
    let mut points = Vec::new();
    let mut converged = true;
    for (k, (delta, b)) in box_ladder(c.m_min..=c.m_max, c.theta)?.into_iter().enumerate() {
        let m = carleson_mean(&a, &b, c.tol)?;
        converged &= m.converged;
        points.push((delta, m.value.re));
        t.push(vec![
            (c.m_min + k as u32).into(),
            delta.into(),
            b.r_in.into(),
            m.value.re.into(),
            m.error_estimate.into(),
            m.converged.into(),
        ]);
    }
    let mut out = RunOutcome::table(t, converged);
    if let Ok(fit) = scaling_fit(&points) {
        out.summary.push(format!("slope of Carleson mean vs delta: {:.4}", fit.slope));
    }
    Ok(out)
}

fn field_table(f: &FieldSample) -> Table {
    let mut t = Table::new(&["z_re", "z_im", "value_re", "value_im", "err", "converged"]);
    for i in 0..f.len() {
        let z = f.grid[i].to_complex();
        t.push(vec![
            z.re.into(),
            z.im.into(),
            f.values[i].re.into(),
            f.values[i].im.into(),
            f.per_point_error[i].into(),
            f.converged[i].into(),
        ]);
    }
    t
}

fn operator_kind(op: ApplyOperator) -> Result<OperatorKind> {
    match op {
        ApplyOperator::Toeplitz => Ok(OperatorKind::Toeplitz),
        ApplyOperator::Hankel => Ok(OperatorKind::Hankel),
        ApplyOperator::Series => Err(Error::domain("the series operator has no radial limit ladder")),
    }
}

fn apply(c: &RunConfig) -> Result<RunOutcome> {
    let a = Symbol::parse(&c.symbol)?;
    let f = TestFunction::parse(&c.test_function)?;
    let grid = tensor_grid(&c.grid_radii, c.grid_angles)?;
    let field = match c.operator {
        ApplyOperator::Series => {
            let a = if c.transpose { a.conjugate() } else { a };
            series_apply(OperatorKind::Toeplitz, &a, &f, c.generation, &grid, c.tol)?
        }
        op => {
            let kind = operator_kind(op)?;
            if c.transpose {
                transpose_apply(kind, &a, c.rho, &f, &grid, c.tol)?
            } else {
                truncated_apply(kind, &a, c.rho, &f, &grid, c.tol)?
            }
        }
    };
    Ok(RunOutcome::table(field_table(&field), field.all_converged()))
}

fn converge(c: &RunConfig) -> Result<RunOutcome> {
    let a = Symbol::parse(&c.symbol)?;
    let f = TestFunction::parse(&c.test_function)?;
    let grid = tensor_grid(&c.grid_radii, c.grid_angles)?;
    let schedule = LimitSchedule::dyadic(c.ladder_steps, c.cauchy_eps)?;
    let r = limit_apply(operator_kind(c.operator)?, &a, &f, &grid, &schedule, c.tol)?;
    let mut t = Table::new(&["m", "rho", "grid_l2_diff", "max_error"]);
    for s in &r.log {
        t.push(vec![s.step.into(), s.rho.into(), s.grid_l2_diff.into(), s.max_error.into()]);
    }
    let mut out = RunOutcome::table(t, r.converged && r.field.all_converged());
    out.summary.push(format!(
        "ladder {} after {} steps",
        if r.converged { "settled" } else { "did not settle" },
        r.log.len()
    ));
    Ok(out)
}

fn spectrum(c: &RunConfig) -> Result<RunOutcome> {
    let a = Symbol::parse(&c.symbol)?;
    let seq = SpectralSequence::compute(&a, c.n_max, c.tol)?;
    let mut t = Table::new(&["n", "gamma_re", "gamma_im", "err", "converged"]);
    for n in 0..=seq.n_max {
        t.push(vec![
            n.into(),
            seq.gamma[n].re.into(),
            seq.gamma[n].im.into(),
            seq.errors[n].into(),
            seq.converged[n].into(),
        ]);
    }
    let mut out = RunOutcome::table(t, seq.converged.iter().all(|&x| x));
    if c.fit_min < c.n_max {
        match growth_fit(&seq, c.fit_min..=c.n_max) {
            Ok(fit) => out.summary.push(format!(
                "growth slope on [{}, {}]: {:.4} ({} points, {} below resolution)",
                c.fit_min,
                c.n_max,
                fit.slope,
                fit.used,
                fit.excluded.len()
            )),
            Err(e) => out.summary.push(format!("no growth fit: {e}")),
        }
    }
    Ok(out)
}

/// One verdict row.
struct Check {
    name: &'static str,
    value: f64,
    threshold: String,
    pass: bool,
}

fn reproduce(c: &RunConfig) -> Result<RunOutcome> {
    let b = c.b;
    let a = Symbol::ab(b)?;
    let abs_a = a.modulus();
    let mut converged = true;

    let mut carleson_points = Vec::new();
    for (delta, bx) in box_ladder(c.m_min..=c.m_max, c.theta)? {
        let m = carleson_mean(&abs_a, &bx, c.tol)?;
        converged &= m.converged;
        carleson_points.push((delta, m.value.re));
    }
    let carleson_slope = scaling_fit(&carleson_points)?.slope;

    let ladder = avg_ladder(&a, c.m_min..=c.m_max, c.theta, c.zeta_grid, c.tol)?;
    converged &= ladder.iter().all(|r| r.report.converged);
    let mass: Vec<_> = ladder.iter().map(|r| (r.delta, r.report.area * r.report.sup_over_zeta)).collect();
    let sup: Vec<_> = ladder.iter().map(|r| (r.delta, r.report.sup_over_zeta)).collect();
    let mass_slope = scaling_fit(&mass)?.slope;
    let sup_slope = scaling_fit(&sup)?.slope;
    let sup_max = sup.iter().map(|p| p.1).fold(0.0, f64::max);

    let window = c.fit_min..=c.n_max;
    let seq_abs = SpectralSequence::compute(&abs_a, c.n_max, c.tol)?;
    let seq = SpectralSequence::compute(&a, c.n_max, c.tol)?;
    converged &= seq_abs.converged.iter().all(|&x| x) && seq.converged.iter().all(|&x| x);
    let abs_fit = growth_fit(&seq_abs, window.clone())?;
    let fit = growth_fit(&seq, window.clone())?;

    let checks = [
        Check {
            name: "carleson_slope_abs_symbol",
            value: carleson_slope,
            threshold: format!("[{}, {}]", -b - CARLESON_SLOPE_SLACK, -b + CARLESON_SLOPE_SLACK),
            pass: (carleson_slope + b).abs() <= CARLESON_SLOPE_SLACK,
        },
        Check {
            name: "area_times_sup_avg_slope",
            value: mass_slope,
            threshold: format!(">= {}", 3.0 - b - AVERAGE_SLOPE_SLACK),
            pass: mass_slope >= 3.0 - b - AVERAGE_SLOPE_SLACK,
        },
        Check {
            name: "sup_avg_bounded_trend",
            value: sup_slope,
            threshold: format!(">= {}", -BOUNDED_TREND_SLOPE),
            pass: sup_slope >= -BOUNDED_TREND_SLOPE && sup_max.is_finite(),
        },
        Check {
            name: "abs_symbol_eigenvalue_unbounded_trend",
            value: abs_fit.slope,
            threshold: format!("[{}, {}]", b - GROWTH_SLOPE_SLACK, b + GROWTH_SLOPE_SLACK),
            pass: (abs_fit.slope - b).abs() <= GROWTH_SLOPE_SLACK,
        },
        Check {
            name: "symbol_eigenvalue_bounded_trend",
            value: fit.slope,
            threshold: format!("<= {BOUNDED_TREND_SLOPE}"),
            pass: fit.slope <= BOUNDED_TREND_SLOPE,
        },
    ];
    let mut t = Table::new(&["check", "value", "threshold", "pass"]);
    for ch in &checks {
        t.push(vec![ch.name.into(), ch.value.into(), Cell::Text(ch.threshold.clone()), ch.pass.into()]);
    }
    let all = checks.iter().all(|ch| ch.pass);
    let unbounded = checks[3].pass;
    let bounded = checks[0].pass && checks[1].pass && checks[2].pass && checks[4].pass;
    Ok(RunOutcome {
        table: t,
        converged,
        verdict: Some(all),
        summary: vec![
            format!("T_|a| unbounded-trend {}", if unbounded { "TRUE" } else { "FALSE" }),
            format!("T_a bounded-trend {}", if bounded { "TRUE" } else { "FALSE" }),
            format!(
                "max sup|avg| over the ladder {sup_max:.4}; {} of {} eigenvalues of a_b below resolution in the fit window",
                fit.excluded.len(),
                c.n_max + 1 - c.fit_min
            ),
        ],
    })
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::parse(1, 1, format!("{THREADS_ENV} = '{v}' is not a positive integer")))?;
    // A pool may already exist when called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
        Error::Domain(_) | Error::Resource(_) | Error::Parse { .. } => EXIT_CONFIG,
    }
}

/// Parses `args`, runs, writes the artifact and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("bergman: {e}");
        return EXIT_CONFIG;
    }
    let config = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bergman: {e}");
            return error_code(&e);
        }
    };
    if cli.print_config {
        print!("{}", config.canonical());
        return EXIT_OK;
    }
    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("bergman: {e}");
            return error_code(&e);
        }
    };
    let written = outcome.render(config.format).and_then(|text| match &config.output {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    if let Err(e) = written {
        eprintln!("bergman: {e}");
        return error_code(&e);
    }
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    if !outcome.converged {
        eprintln!("bergman: some quantities did not reach the requested tolerance");
    }
    outcome.exit_code()
}
