//! The `polar-marginals` command line: evaluate both polar marginals of a
//! bivariate normal to CSV or JSON, compare the closed forms against brute
//! force quadrature, and time the two.
//!
//! Exit codes: 0 success, 1 I/O failure or `compare` outside tolerance,
//! 2 bad arguments or parameters, 3 numerical failure.

pub mod io;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use polar_marginals::bench::run_benchmark;
use polar_marginals::numeric::{numeric_r_density_par, numeric_theta_density_par};
use polar_marginals::{
    compare_curves, default_r_max, numeric_r_density, numeric_theta_density, BivariateNormalParams,
    CaseLabel, CurveComparison, DensityCurve, PolarGrid, PolarMarginals, SeriesControl,
};

use crate::io::{Format, MarginalsDoc};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "polar-marginals", version, about = "Polar marginal densities of bivariate normal distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write p(theta) and p(r) sampled on a polar grid.
    Marginalize(MarginalizeArgs),
    /// Evaluate both closed forms and quadrature, and report the deviation.
    Compare(CompareArgs),
    /// Time every closed form against quadrature.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DistributionArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mx: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub my: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub sx: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub sy: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    Auto,
    A,
    B,
    C,
    D,
    E,
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Analytic,
    Numeric,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub dist: DistributionArgs,
    /// Closed form to use; `auto` picks the most specific one that applies.
    #[arg(long, value_enum, default_value_t = CaseArg::Auto)]
    pub case: CaseArg,
    /// Apply the requested case even if its assumptions do not hold.
    #[arg(long)]
    pub force_general: bool,
    /// Angle samples over [-pi, pi).
    #[arg(long, default_value_t = 3600)]
    pub n_theta: usize,
    /// Radial panels over [0, r_max]; one more radius than panels is emitted.
    #[arg(long, default_value_t = 1000)]
    pub n_r: usize,
    /// Largest radius; defaults to |mu| + 12 principal standard deviations.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = SeriesControl::DEFAULT_TOL)]
    pub series_tol: f64,
    #[arg(long, default_value_t = SeriesControl::DEFAULT_K_MAX)]
    pub series_kmax: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Evaluate curves on this many threads; output is identical.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct MarginalizeArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Analytic)]
    pub method: MethodArg,
    /// Output stem: writes <stem>.theta.csv and <stem>.r.csv, or <stem>.json.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Also write both methods' curves under this stem.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = polar_marginals::bench::DEFAULT_N_SAMPLES)]
    pub n_samples: usize,
    #[arg(long, default_value_t = polar_marginals::bench::DEFAULT_REPEATS)]
    pub repeats: usize,
    #[arg(long, default_value_t = polar_marginals::bench::DEFAULT_WARMUP)]
    pub warmup: usize,
    /// Also write the table as CSV to this path.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(polar_marginals::Error),
    Io { path: PathBuf, source: std::io::Error },
    Format(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Model(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Model(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Format(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Format(msg) => write!(f, "malformed input: {msg}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Model(e) => Some(e),
            CliError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<polar_marginals::Error> for CliError {
    fn from(e: polar_marginals::Error) -> Self {
        CliError::Model(e)
    }
}

/// Parses `argv` and runs the command, printing results to stdout and
/// errors to stderr. Returns the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return u8::try_from(e.exit_code()).unwrap_or(EXIT_USAGE);
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli.command, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == EXIT_USAGE {
                eprintln!("see `polar-marginals --help` for usage");
            }
            e.exit_code()
        }
    }
}

/// Runs a parsed command, writing the human-readable report to `out`.
pub fn execute(command: &Command, out: &mut dyn Write) -> Result<u8, CliError> {
    match command {
        Command::Marginalize(args) => marginalize(args, out),
        Command::Compare(args) => compare(args, out),
        Command::Bench(args) => bench(args, out),
    }
}

fn report(out: &mut dyn Write, line: fmt::Arguments<'_>) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
}

/// Everything an evaluation needs, validated.
struct Setup {
    params: BivariateNormalParams,
    case: CaseLabel,
    marginals: PolarMarginals,
    grid: PolarGrid,
    ctl: SeriesControl,
    format: Format,
    pool: Option<rayon::ThreadPool>,
}

impl Setup {
    fn new(args: &EvalArgs) -> Result<Self, CliError> {
        let d = &args.dist;
        let params = BivariateNormalParams::new(d.mx, d.my, d.sx, d.sy, d.rho)?;
        let ctl = SeriesControl::new(args.series_tol, args.series_kmax)?;
        let marginals = match case_label(args.case) {
            None => PolarMarginals::new(&params)?,
            Some(case) if args.force_general => PolarMarginals::with_case_unchecked(&params, case)?,
            Some(case) => PolarMarginals::with_case(&params, case)?,
        };
        let r_max = match args.r_max {
            Some(r) => r,
            None => default_r_max(&params)?,
        };
        let grid = PolarGrid::new(args.n_theta, args.n_r, r_max)?;
        let pool = match args.threads {
            None => None,
            Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
            Some(n) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?,
            ),
        };
        let format = match args.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
        Ok(Setup { params, case: marginals.case(), marginals, grid, ctl, format, pool })
    }

    fn analytic(&self) -> Result<(DensityCurve, DensityCurve), CliError> {
        let (m, grid, ctl) = (&self.marginals, &self.grid, &self.ctl);
        Ok(match &self.pool {
            None => (m.theta_curve(grid.thetas())?, m.r_curve(grid.rs(), ctl)?),
            Some(pool) => pool.install(|| -> polar_marginals::Result<_> {
                Ok((m.theta_curve_par(grid.thetas())?, m.r_curve_par(grid.rs(), ctl)?))
            })?,
        })
    }

    fn numeric(&self) -> Result<(DensityCurve, DensityCurve), CliError> {
        let (p, grid) = (&self.params, &self.grid);
        Ok(match &self.pool {
            None => (numeric_theta_density(p, grid)?, numeric_r_density(p, grid)?),
            Some(pool) => pool.install(|| -> polar_marginals::Result<_> {
                Ok((numeric_theta_density_par(p, grid)?, numeric_r_density_par(p, grid)?))
            })?,
        })
    }

    /// Writes one method's curves under `stem`, tagging the file names with
    /// the method when `tag` is set. Returns the paths written.
    fn write(
        &self,
        stem: &Path,
        tag: Option<&str>,
        method: &str,
        curves: &(DensityCurve, DensityCurve),
    ) -> Result<Vec<PathBuf>, CliError> {
        let name = |suffix: &str| {
            let mut s = stem.as_os_str().to_owned();
            if let Some(tag) = tag {
                s.push(format!(".{tag}"));
            }
            s.push(suffix);
            PathBuf::from(s)
        };
        match self.format {
            Format::Csv => {
                let (theta_path, r_path) = (name(".theta.csv"), name(".r.csv"));
                io::write_csv_file(&theta_path, &curves.0)?;
                io::write_csv_file(&r_path, &curves.1)?;
                Ok(vec![theta_path, r_path])
            }
            Format::Json => {
                let path = name(".json");
                let doc = MarginalsDoc::new(&self.params, self.case, method, &curves.0, &curves.1, &self.grid, &self.ctl);
                io::write_json_file(&path, &doc)?;
                Ok(vec![path])
            }
        }
    }

    fn describe(&self) -> String {
        format!("case {}", self.case)
    }
}

pub fn case_label(case: CaseArg) -> Option<CaseLabel> {
    match case {
        CaseArg::Auto => None,
        CaseArg::A => Some(CaseLabel::ZeroMeanIsotropic),
        CaseArg::B => Some(CaseLabel::ZeroMeanAnisoDiagonal),
        CaseArg::C => Some(CaseLabel::ZeroMeanAnisoFull),
        CaseArg::D => Some(CaseLabel::MeanIsotropic),
        CaseArg::E => Some(CaseLabel::MeanAnisoDiagonal),
        CaseArg::F => Some(CaseLabel::MeanAnisoFull),
    }
}

fn joined(paths: &[PathBuf]) -> String {
    paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
}

fn marginalize(args: &MarginalizeArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let setup = Setup::new(&args.eval)?;
    let mut written = Vec::new();
    match args.method {
        MethodArg::Analytic => written.extend(setup.write(&args.output, None, "analytic", &setup.analytic()?)?),
        MethodArg::Numeric => written.extend(setup.write(&args.output, None, "numeric", &setup.numeric()?)?),
        MethodArg::Both => {
            written.extend(setup.write(&args.output, Some("analytic"), "analytic", &setup.analytic()?)?);
            written.extend(setup.write(&args.output, Some("numeric"), "numeric", &setup.numeric()?)?);
        }
    }
    report(out, format_args!("{}; wrote {}", setup.describe(), joined(&written)))?;
    Ok(EXIT_OK)
}

/// Largest tolerated max absolute deviation between the closed form and
/// quadrature for `case`.
pub fn compare_tolerance(case: CaseLabel) -> f64 {
    match case {
        CaseLabel::MeanAnisoDiagonal | CaseLabel::MeanAnisoFull => 1e-5,
        _ => 1e-6,
    }
}

fn compare(args: &CompareArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let setup = Setup::new(&args.eval)?;
    let analytic = setup.analytic()?;
    let numeric = setup.numeric()?;
    let theta = compare_curves(&analytic.0, &numeric.0)?;
    let r = compare_curves(&analytic.1, &numeric.1)?;
    // the case actually evaluated, which may be forced
    let tol = compare_tolerance(setup.case);
    let within = theta.max_abs <= tol && r.max_abs <= tol;
    if let Some(stem) = &args.output {
        let mut written = setup.write(stem, Some("analytic"), "analytic", &analytic)?;
        written.extend(setup.write(stem, Some("numeric"), "numeric", &numeric)?);
        report(out, format_args!("wrote {}", joined(&written)))?;
    }
    let line = |name: &str, c: &CurveComparison, curve: &DensityCurve| {
        format!("{name}: max_abs={:e} max_rel={:e} at {}", c.max_abs, c.max_rel, curve.abscissa().get(c.index).copied().unwrap_or(0.0))
    };
    report(
        out,
        format_args!(
            "{}; {}; {}; tolerance {:e}: {}",
            setup.describe(),
            line("p(theta)", &theta, &analytic.0),
            line("p(r)", &r, &analytic.1),
            tol,
            if within { "within" } else { "EXCEEDED" }
        ),
    )?;
    Ok(if within { EXIT_OK } else { EXIT_FAILURE })
}

fn bench(args: &BenchArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let report_ = run_benchmark(args.n_samples, args.repeats, args.warmup)?;
    if let Some(path) = &args.output {
        let mut w = io::create(path)?;
        w.write_all(report_.to_csv().as_bytes())
            .and_then(|_| w.flush())
            .map_err(|source| CliError::Io { path: path.clone(), source })?;
    }
    out.write_all(report_.to_table().as_bytes())
        .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })?;
    if let Some(w) = &report_.resolution_warning {
        eprintln!("warning: {w}");
    }
    Ok(EXIT_OK)
}

