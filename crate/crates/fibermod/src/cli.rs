//! Command-line front end.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fibermod_core::cerf::{classify_cobordism, trace_cerf};
use fibermod_core::family::{
    kde_family, nw_regression_family, EstimatorGrid, KernelKind, KernelSpec, PLFamily,
};
use fibermod_core::module3::{BuildOptions, ModuleContext};
use fibermod_core::rational::format_rational;
use fibermod_core::stability::{check_interleaving_necessary, sup_distance};
use fibermod_core::Field;
use serde_json::Value;

use crate::examples::{example_family, ExampleError};
use crate::io::{self, Strip};
use crate::verify::{run_suite, summary_json, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Precondition(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Precondition(_) => EXIT_PRECONDITION,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn precondition(e: impl std::fmt::Display) -> CliError {
    CliError::Precondition(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "fibermod", version, about = "Persistence modules of one-parameter function families")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Betti functions or a single-degree module on the grid.
    Module(ModuleArgs),
    /// Cerf diagram as JSON or SVG, optionally with a classified strip.
    Cerf(CerfArgs),
    /// H0 module of the kernel density estimate family of a sample.
    Kde(EstimatorArgs),
    /// H0 module of the Nadaraya-Watson regression family of (x, y) pairs.
    Regress(EstimatorArgs),
    /// Rank conditions of an interleaving between two families.
    Stability(StabilityArgs),
    /// Runs the built-in example checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Field characteristic.
    #[arg(long, default_value_t = 2)]
    pub field: u32,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Family JSON file.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Built-in family: hat, zigzag:n, cylinder:k or wrinkled-cylinder.
    #[arg(long)]
    pub example: Option<String>,
}

#[derive(Debug, Args)]
pub struct ModuleArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub common: Common,
    /// Emit the module of this degree with its edge ranks.
    #[arg(long, conflicts_with = "max_degree")]
    pub degree: Option<usize>,
    /// Emit Betti functions of degrees 0..=J (default: the prism dimension).
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include the one-dimensional summands (JSON, with --degree).
    #[arg(long)]
    pub summands: bool,
    /// Write the family itself as JSON and exit.
    #[arg(long)]
    pub emit_family: bool,
}

#[derive(Debug, Args)]
pub struct CerfArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Strip `a,b,c` to classify and overlay.
    #[arg(long)]
    pub strip: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kernel {
    Gaussian,
    Epanechnikov,
    Triangular,
}

impl From<Kernel> for KernelKind {
    fn from(k: Kernel) -> Self {
        match k {
            Kernel::Gaussian => KernelKind::Gaussian,
            Kernel::Epanechnikov => KernelKind::Epanechnikov,
            Kernel::Triangular => KernelKind::Triangular,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    /// CSV with one column (kde) or two columns x,y (regress).
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Kernel::Gaussian)]
    pub kernel: Kernel,
    /// Bandwidth range `amin:amax`.
    #[arg(long, default_value = "0.2:2")]
    pub bandwidth: String,
    #[arg(long, default_value_t = 16)]
    pub tres: usize,
    #[arg(long, default_value_t = 64)]
    pub xres: usize,
    /// Domain `xmin:xmax` (default: data range padded by 3 amax).
    #[arg(long = "box")]
    pub domain: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include the one-dimensional summands (JSON).
    #[arg(long)]
    pub summands: bool,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub source: Source,
    /// Second family JSON file.
    #[arg(long)]
    pub family2: PathBuf,
    #[command(flatten)]
    pub common: Common,
    /// Interleaving parameter, or `auto` for the sup distance.
    #[arg(long, default_value = "auto")]
    pub epsilon: String,
    #[arg(long, conflicts_with = "max_degree")]
    pub degree: Option<usize>,
    #[arg(long)]
    pub max_degree: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, hide = true)]
    pub tamper: bool,
}

fn field(p: u32) -> Result<Field, CliError> {
    Field::new(p).map_err(precondition)
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display()))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(input(e)),
            _ => Ok(()),
        },
    }
}

fn read_text(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_family_file(path: &PathBuf) -> Result<PLFamily, CliError> {
    let text = read_text(path)?;
    io::family_from_json(&text).map_err(|e| match e {
        io::FamilyFileError::Format(f) => input(format!("{}: {f}", path.display())),
        other => precondition(format!("{}: {other}", path.display())),
    })
}

fn load_family(s: &Source) -> Result<PLFamily, CliError> {
    match (&s.family, &s.example) {
        (Some(path), _) => load_family_file(path),
        (None, Some(name)) => example_family(name).map_err(|e| match e {
            ExampleError::Family(_) => precondition(e),
            _ => input(e),
        }),
        (None, None) => Err(input("either --family or --example is required")),
    }
}

fn unsupported(format: Format, command: &str) -> CliError {
    input(format!("format {format:?} is not available for {command}"))
}

fn run_module(args: &ModuleArgs) -> Result<i32, CliError> {
    let fam = load_family(&args.source)?;
    if args.emit_family {
        write_output(&args.common.out, &io::to_pretty(&io::family_to_json(&fam)))?;
        return Ok(EXIT_OK);
    }
    let f = field(args.common.field)?;
    let p = fam.prism().map_err(precondition)?;
    let ctx = ModuleContext::new(&p, f);
    let text = match args.degree {
        Some(j) => {
            let opts = BuildOptions {
                maps: args.summands,
                ..BuildOptions::default()
            };
            let m = ctx.build_module(j, opts);
            match args.format {
                Format::Json => io::to_pretty(&io::module_to_json(&m, &fam.label, args.summands)),
                Format::Csv => io::module_to_csv(&m),
                Format::Svg => return Err(unsupported(args.format, "module")),
            }
        }
        None => {
            let max = args.max_degree.unwrap_or_else(|| p.dim().unwrap_or(0));
            let report = ctx.betti_report(max).map_err(precondition)?;
            match args.format {
                Format::Json => io::to_pretty(&io::report_to_json(&report, &fam.label)),
                Format::Csv => io::report_to_csv(&report),
                Format::Svg => return Err(unsupported(args.format, "module")),
            }
        }
    };
    write_output(&args.common.out, &text)?;
    Ok(EXIT_OK)
}

fn parse_strip(text: &str) -> Result<[fibermod_core::Rational; 3], CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(input(format!("strip `{text}` must be a,b,c")));
    }
    let mut out = parts
        .iter()
        .map(|s| io::parse_rational_text(s).map_err(input));
    Ok([out.next().unwrap()?, out.next().unwrap()?, out.next().unwrap()?])
}

fn run_cerf(args: &CerfArgs) -> Result<i32, CliError> {
    let fam = load_family(&args.source)?;
    let f = field(args.common.field)?;
    let p = fam.prism().map_err(precondition)?;
    let d = trace_cerf(&p, f).map_err(precondition)?;
    let strip = match &args.strip {
        Some(text) => {
            let [a, b, c] = parse_strip(text)?;
            let classification = classify_cobordism(&d, &a, &b, &c);
            Some(Strip {
                a,
                b,
                c,
                classification,
            })
        }
        None => None,
    };
    let text = match args.format {
        Format::Json => io::to_pretty(&io::cerf_to_json(&d, &fam.label, strip.as_ref())),
        Format::Svg => io::cerf_to_svg(&d, strip.as_ref()),
        Format::Csv => return Err(unsupported(args.format, "cerf")),
    };
    write_output(&args.common.out, &text)?;
    Ok(EXIT_OK)
}

fn parse_range(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| input(format!("{what} `{text}` must be lo:hi")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| input(format!("{what} `{text}` is not numeric")))
    };
    Ok((parse(lo)?, parse(hi)?))
}

fn run_estimator(args: &EstimatorArgs, regression: bool) -> Result<i32, CliError> {
    let text = read_text(&args.input)?;
    let columns = if regression { 2 } else { 1 };
    let rows = io::read_numeric_csv(&text, columns)
        .map_err(|e| input(format!("{}: {e}", args.input.display())))?;
    let grid = EstimatorGrid {
        bandwidth: parse_range(&args.bandwidth, "bandwidth")?,
        domain: args.domain.as_deref().map(|d| parse_range(d, "box")).transpose()?,
        t_res: args.tres,
        x_res: args.xres,
    };
    let kernel = KernelSpec::new(args.kernel.into());
    let fam = if regression {
        let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
        nw_regression_family(&pairs, kernel, &grid)
    } else {
        let samples: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        kde_family(&samples, kernel, &grid)
    }
    .map_err(precondition)?;
    let f = field(args.common.field)?;
    let p = fam.prism().map_err(precondition)?;
    let ctx = ModuleContext::new(&p, f);
    let opts = BuildOptions {
        maps: args.summands,
        ..BuildOptions::default()
    };
    let m = ctx.build_module(0, opts);
    let out = match args.format {
        Format::Json => io::to_pretty(&io::module_to_json(&m, &fam.label, args.summands)),
        Format::Csv => io::module_to_csv(&m),
        Format::Svg => return Err(unsupported(args.format, "kde")),
    };
    write_output(&args.common.out, &out)?;
    Ok(EXIT_OK)
}

fn run_stability(args: &StabilityArgs) -> Result<i32, CliError> {
    let f = load_family(&args.source)?;
    let g = load_family_file(&args.family2)?;
    let fld = field(args.common.field)?;
    let eps = if args.epsilon == "auto" {
        sup_distance(&f, &g).map_err(precondition)?
    } else {
        io::parse_rational_text(&args.epsilon).map_err(input)?
    };
    let (pf, pg) = (
        f.prism().map_err(precondition)?,
        g.prism().map_err(precondition)?,
    );
    let degrees: Vec<usize> = match (args.degree, args.max_degree) {
        (Some(j), _) => vec![j],
        (None, Some(m)) => (0..=m).collect(),
        (None, None) => (0..=pf.dim().unwrap_or(0).max(pg.dim().unwrap_or(0))).collect(),
    };
    let mut reports = Vec::new();
    let mut overall = true;
    for j in degrees {
        let r = check_interleaving_necessary(&pf, &pg, j, &eps, fld).map_err(precondition)?;
        overall &= r.overall();
        reports.push(io::stability_to_json(&r, pf.times()));
    }
    let value = if args.degree.is_some() {
        reports.pop().expect("one report")
    } else {
        Value::Array(reports)
    };
    write_output(&args.common.out, &io::to_pretty(&value))?;
    if !overall {
        eprintln!(
            "interleaving rank conditions fail at epsilon {}",
            format_rational(&eps)
        );
    }
    Ok(if overall { EXIT_OK } else { EXIT_VERIFY })
}

fn run_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let opts = VerifyOptions {
        field: field(args.common.field)?,
        tamper: args.tamper,
    };
    let outcomes = run_suite(&opts);
    for o in &outcomes {
        eprintln!(
            "{} {} ({:.2} s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.seconds,
            o.detail
        );
    }
    write_output(&args.common.out, &io::to_pretty(&summary_json(&opts, &outcomes)))?;
    Ok(if outcomes.iter().all(|o| o.pass) {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

pub fn run(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Module(a) => run_module(a),
        Command::Cerf(a) => run_cerf(a),
        Command::Kde(a) => run_estimator(a, false),
        Command::Regress(a) => run_estimator(a, true),
        Command::Stability(a) => run_stability(a),
        Command::Verify(a) => run_verify(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
