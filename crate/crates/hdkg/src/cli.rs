//! Batch command-line front end. Every command resolves its inputs
//! (flags override config-file values), runs the whole computation in
//! memory, and only then writes outputs through a temp-file rename, so a
//! failing run leaves no partial files. Exit codes: 0 success, 2 validation
//! failure, 3 mathematical obstruction, 1 internal cross-check failure.

use crate::dynamics::{
    build_mode_ode, integrate, write_trajectory_csv, SpectrumReport, MAX_ODE_ORDER,
};
use crate::emt::{emt_closed_grid, emt_general, summarize, write_emt_csv, MAX_GENERAL_ORDER};
use crate::error::{Error, Result};
use crate::fieldops::residual_norm;
use crate::grid::{read_binary, to_bytes, GridSpec};
use crate::model::{mass_scale, ModelParams};
use crate::modes::{ModeField, PlaneWaveMode};
use crate::poly::{build_poly, MAX_POLY_ORDER};
use crate::propagator::{Contour, PropagatorSpec};
use crate::roots::{real_roots, RootReport};
use crate::solver::{
    homogeneous_solution, solve_sourced_odd, solve_sourced_spectral, SolveDiagnostics,
};
use crate::symbol::SymbolKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Epsilon used when a feynman contour is requested without --eps.
pub const DEFAULT_FEYNMAN_EPS: f64 = 1e-6;

fn long_version() -> String {
    format!(
        "{}\noperator family cap: N <= {MAX_POLY_ORDER}\nmode dynamics cap: N <= {MAX_ODE_ORDER}\n\
         stress tensor cap: N <= {MAX_GENERAL_ORDER} (closed grid forms: N <= 2)",
        env!("CARGO_PKG_VERSION")
    )
}

#[derive(Parser, Debug)]
#[command(
    name = "hdkg",
    version,
    long_version = long_version(),
    about = "Higher-derivative wave-operator toolkit: root reports, propagator scans, \
             spectral solves, stress tensors, and single-mode evolution"
)]
struct Cli {
    /// Flat `key = value` config file with `#` comments; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory receiving relative output paths (created if absent).
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Dispersion-root reports over a range of derivative orders.
    Roots(RootsArgs),
    /// Propagator values over a p_squared scan.
    Propagator(PropagatorArgs),
    /// Solve the field equation on a periodic grid.
    Solve(SolveArgs),
    /// Energy-momentum tensor of a field, with conservation diagnostics.
    Emt(EmtArgs),
    /// Integrate one spatial mode of the field in time.
    Evolve(EvolveArgs),
}

#[derive(Args, Debug)]
struct RootsArgs {
    /// First derivative order of the sweep.
    #[arg(long)]
    from: u32,
    /// Last derivative order of the sweep (inclusive).
    #[arg(long)]
    to: u32,
    /// Length scale a of the operator family.
    #[arg(long)]
    a: Option<f64>,
    /// Report format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PropagatorArgs {
    /// Derivative order N.
    #[arg(long)]
    n: Option<u32>,
    /// Length scale a.
    #[arg(long)]
    a: Option<f64>,
    /// Operator variant: the order-N truncation or the full exponential.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Lower end of the p_squared scan.
    #[arg(long, allow_hyphen_values = true)]
    p2_min: f64,
    /// Upper end of the p_squared scan.
    #[arg(long, allow_hyphen_values = true)]
    p2_max: f64,
    /// Number of scan points (endpoints inclusive).
    #[arg(long, default_value_t = 101)]
    steps: usize,
    /// Pole prescription for odd orders.
    #[arg(long, value_enum)]
    contour: Option<ContourArg>,
    /// Shift parameter for the feynman contour.
    #[arg(long)]
    eps: Option<f64>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Derivative order N.
    #[arg(long)]
    n: Option<u32>,
    /// Length scale a.
    #[arg(long)]
    a: Option<f64>,
    /// Operator variant: the order-N truncation or the full exponential.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Build the homogeneous plane-wave solution from --modes.
    #[arg(long)]
    homogeneous: bool,
    /// Mode list "re,im,k1[,k2..];..." (amplitude plus wavevector per mode).
    #[arg(long)]
    modes: Option<String>,
    /// Source field file (grid binary); fixes the grid geometry.
    #[arg(long)]
    source: Option<PathBuf>,
    /// Grid extents, e.g. "64,64" (time axis first).
    #[arg(long)]
    shape: Option<String>,
    /// Box lengths per axis, e.g. "6.2832,6.2832".
    #[arg(long = "box")]
    box_lengths: Option<String>,
    /// Pole prescription carrying an odd-order solve past the mass shell.
    #[arg(long, value_enum)]
    contour: Option<ContourArg>,
    /// Shift parameter for the feynman contour.
    #[arg(long)]
    eps: Option<f64>,
    /// Solution field output (grid binary).
    #[arg(long)]
    out_field: Option<PathBuf>,
    /// Diagnostics output (JSON).
    #[arg(long)]
    out_diagnostics: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EmtArgs {
    /// Derivative order N.
    #[arg(long)]
    n: Option<u32>,
    /// Length scale a.
    #[arg(long)]
    a: Option<f64>,
    /// Sampled field file (grid binary); orders 1 and 2.
    #[arg(long)]
    field: Option<PathBuf>,
    /// Mode list "re,im,omega,k1[,k2..];..."; each entry plus its conjugate.
    #[arg(long)]
    modes: Option<String>,
    /// Grid extents for the mode route, e.g. "64,64".
    #[arg(long)]
    shape: Option<String>,
    /// Box lengths for the mode route, e.g. "6.2832,6.2832".
    #[arg(long = "box")]
    box_lengths: Option<String>,
    /// Tensor components output (CSV).
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Integral summary output (JSON).
    #[arg(long)]
    out_summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    /// Derivative order N.
    #[arg(long)]
    n: Option<u32>,
    /// Length scale a.
    #[arg(long)]
    a: Option<f64>,
    /// Spatial wavenumber of the mode.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    k: f64,
    /// Initial state "psi,psi',...,psi^(2N-1)" as comma-separated numbers.
    #[arg(long, allow_hyphen_values = true)]
    initial: String,
    /// Integration end time.
    #[arg(long)]
    t_end: f64,
    /// Time step (must satisfy the stability guard).
    #[arg(long)]
    dt: f64,
    /// Trajectory output (CSV; stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Characteristic-spectrum report output (JSON).
    #[arg(long)]
    spectrum_out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Finite,
    Infinite,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ContourArg {
    None,
    PrincipalValue,
    Feynman,
}

/// Parses arguments, runs the selected command, and returns the process
/// exit code. Errors are printed to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("hdkg: {err}");
            exit_code(&err)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_)
        | Error::Range(_)
        | Error::Parity(_)
        | Error::Commensurability(_)
        | Error::Io(_) => 2,
        Error::PoleProximity(_) | Error::ShellCollision(_) | Error::Amplification(_) => 3,
        Error::Internal(_) => 1,
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let ctx = Ctx::resolve(cli)?;
    match &cli.command {
        Cmd::Roots(args) => cmd_roots(&ctx, args),
        Cmd::Propagator(args) => cmd_propagator(&ctx, args),
        Cmd::Solve(args) => cmd_solve(&ctx, args),
        Cmd::Emt(args) => cmd_emt(&ctx, args),
        Cmd::Evolve(args) => cmd_evolve(&ctx, args),
    }
}

/// Values read from the config file, all optional; flags take precedence.
#[derive(Debug, Default)]
struct FileConfig {
    n: Option<u32>,
    a: Option<f64>,
    dims: Option<usize>,
    shape: Option<Vec<usize>>,
    box_lengths: Option<Vec<f64>>,
    output_dir: Option<PathBuf>,
    format: Option<FormatArg>,
}

fn parse_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Validation(format!(
                "config line {} is not `key = value`: {raw:?}",
                idx + 1
            ))
        })?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        match key.as_str() {
            "n" => cfg.n = Some(parse_scalar(value, "n")?),
            "a" => cfg.a = Some(parse_scalar(value, "a")?),
            "d" | "dims" => cfg.dims = Some(parse_scalar(value, "dims")?),
            "shape" => cfg.shape = Some(parse_usize_list(value)?),
            "box" => cfg.box_lengths = Some(parse_f64_list(value)?),
            "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
            "format" => {
                cfg.format = Some(match value.to_ascii_lowercase().as_str() {
                    "json" => FormatArg::Json,
                    "csv" => FormatArg::Csv,
                    other => {
                        return Err(Error::Validation(format!(
                            "config format must be json or csv, got {other:?}"
                        )))
                    }
                })
            }
            other => {
                return Err(Error::Validation(format!(
                    "unknown config key {other:?} on line {}",
                    idx + 1
                )))
            }
        }
    }
    Ok(cfg)
}

fn parse_scalar<N: std::str::FromStr>(s: &str, what: &str) -> Result<N> {
    s.parse()
        .map_err(|_| Error::Validation(format!("cannot parse {what} from {s:?}")))
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| parse_scalar(t.trim(), "a number"))
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| parse_scalar(t.trim(), "a grid extent"))
        .collect()
}

/// Mode list for the homogeneous solve: "re,im,k1[,k2..];..." per mode.
fn parse_amp_k_list(s: &str) -> Result<Vec<(Complex64, Vec<f64>)>> {
    s.split(';')
        .map(|group| {
            let vals = parse_f64_list(group)?;
            if vals.len() < 3 {
                return Err(Error::Validation(format!(
                    "mode {group:?} needs at least re,im,k1"
                )));
            }
            Ok((Complex64::new(vals[0], vals[1]), vals[2..].to_vec()))
        })
        .collect()
}

/// Mode list for the stress tensor: "re,im,omega,k1[,k2..];..." per mode.
/// Every entry is paired with its conjugate so the field is real.
fn parse_full_mode_list(s: &str) -> Result<Vec<PlaneWaveMode>> {
    s.split(';')
        .map(|group| {
            let vals = parse_f64_list(group)?;
            if vals.len() < 4 {
                return Err(Error::Validation(format!(
                    "mode {group:?} needs at least re,im,omega,k1"
                )));
            }
            Ok(PlaneWaveMode {
                amplitude: Complex64::new(vals[0], vals[1]),
                omega: vals[2],
                k: vals[3..].to_vec(),
                conjugate_pair: true,
            })
        })
        .collect()
}

struct Ctx {
    cfg: FileConfig,
    output_dir: PathBuf,
}

impl Ctx {
    fn resolve(cli: &Cli) -> Result<Self> {
        let cfg = match &cli.config {
            Some(p) => parse_config(p)?,
            None => FileConfig::default(),
        };
        let output_dir = cli
            .output_dir
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { cfg, output_dir })
    }

    fn order(&self, flag: Option<u32>) -> Result<u32> {
        let n = flag.or(self.cfg.n).ok_or_else(|| {
            Error::Validation("derivative order not given; pass --n or set n in the config".into())
        })?;
        if n < 1 {
            return Err(Error::Range(format!(
                "derivative order must be at least 1, got {n}"
            )));
        }
        Ok(n)
    }

    fn scale(&self, flag: Option<f64>) -> f64 {
        flag.or(self.cfg.a).unwrap_or(1.0)
    }

    fn grid_spec(
        &self,
        shape_flag: &Option<String>,
        box_flag: &Option<String>,
    ) -> Result<GridSpec> {
        let shape = match shape_flag {
            Some(s) => parse_usize_list(s)?,
            None => self.cfg.shape.clone().ok_or_else(|| {
                Error::Validation(
                    "grid shape not given; pass --shape or set shape in the config".into(),
                )
            })?,
        };
        let box_lengths = match box_flag {
            Some(s) => parse_f64_list(s)?,
            None => self.cfg.box_lengths.clone().ok_or_else(|| {
                Error::Validation(
                    "box lengths not given; pass --box or set box in the config".into(),
                )
            })?,
        };
        if let Some(d) = self.cfg.dims {
            if d != shape.len() {
                return Err(Error::Validation(format!(
                    "config dims {d} disagrees with the shape rank {}",
                    shape.len()
                )));
            }
        }
        GridSpec::new(box_lengths, shape)
    }

    fn out_path(&self, given: Option<&PathBuf>, default_name: &str) -> PathBuf {
        let p = given
            .cloned()
            .unwrap_or_else(|| PathBuf::from(default_name));
        if p.is_absolute() {
            p
        } else {
            self.output_dir.join(p)
        }
    }

    /// File when a path is given, stdout otherwise.
    fn emit(&self, given: Option<&PathBuf>, bytes: &[u8]) -> Result<()> {
        match given {
            Some(p) => {
                let path = self.out_path(Some(p), "");
                write_atomic(&path, bytes)
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(bytes)?;
                stdout.flush()?;
                Ok(())
            }
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp_name = path.as_os_str().to_os_string();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn to_json_pretty<S: Serialize>(value: &S) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn resolve_contour(arg: Option<ContourArg>, eps: Option<f64>) -> Result<Contour> {
    match (arg.unwrap_or(ContourArg::None), eps) {
        (ContourArg::Feynman, e) => Ok(Contour::FeynmanEps(e.unwrap_or(DEFAULT_FEYNMAN_EPS))),
        (_, Some(_)) => Err(Error::Validation(
            "--eps applies only to the feynman contour".into(),
        )),
        (ContourArg::None, None) => Ok(Contour::None),
        (ContourArg::PrincipalValue, None) => Ok(Contour::PrincipalValue),
    }
}

fn symbol_kind(arg: Option<KindArg>) -> SymbolKind {
    match arg.unwrap_or(KindArg::Finite) {
        KindArg::Finite => SymbolKind::FiniteOrder,
        KindArg::Infinite => SymbolKind::InfiniteOrder,
    }
}

/// Worker count for sweeps: HDKG_THREADS when set (strictly parsed),
/// otherwise the available parallelism, never more than the job count.
fn worker_count(jobs: usize) -> Result<usize> {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = match std::env::var("HDKG_THREADS") {
        Ok(v) => {
            let parsed: usize = v.trim().parse().map_err(|_| {
                Error::Validation(format!(
                    "HDKG_THREADS must be a positive integer, got {v:?}"
                ))
            })?;
            if parsed == 0 {
                return Err(Error::Validation(
                    "HDKG_THREADS must be a positive integer, got \"0\"".into(),
                ));
            }
            parsed
        }
        Err(std::env::VarError::NotPresent) => available,
        Err(e) => {
            return Err(Error::Validation(format!(
                "HDKG_THREADS is unreadable: {e}"
            )))
        }
    };
    Ok(cap.min(jobs).max(1))
}

#[derive(Serialize)]
struct RootsEntry {
    #[serde(flatten)]
    report: RootReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass_scale: Option<f64>,
}

fn roots_entry(n: u32, a: f64) -> Result<RootsEntry> {
    let report = real_roots(&build_poly(n)?)?;
    let mass = if n % 2 == 1 {
        Some(mass_scale(&ModelParams::new(n, a)?)?)
    } else {
        None
    };
    Ok(RootsEntry {
        report,
        mass_scale: mass,
    })
}

fn cmd_roots(ctx: &Ctx, args: &RootsArgs) -> Result<()> {
    let a = ctx.scale(args.a);
    ModelParams::new(1, a)?;
    if args.from < 1 || args.from > args.to || args.to > MAX_POLY_ORDER {
        return Err(Error::Range(format!(
            "root reports cover 1 <= from <= to <= {MAX_POLY_ORDER}, got {}..={}",
            args.from, args.to
        )));
    }
    let orders: Vec<u32> = (args.from..=args.to).collect();
    let workers = worker_count(orders.len())?;

    let mut slots: Vec<Option<Result<RootsEntry>>> = Vec::new();
    slots.resize_with(orders.len(), || None);
    let slots = std::sync::Mutex::new(slots);
    std::thread::scope(|scope| {
        for w in 0..workers {
            let orders = &orders;
            let slots = &slots;
            scope.spawn(move || {
                let mut i = w;
                while i < orders.len() {
                    let entry = roots_entry(orders[i], a);
                    slots.lock().expect("sweep worker panicked")[i] = Some(entry);
                    i += workers;
                }
            });
        }
    });
    let mut entries = Vec::with_capacity(orders.len());
    for slot in slots.into_inner().expect("sweep worker panicked") {
        entries.push(slot.expect("every order visited")?);
    }

    let format = args.format.or(ctx.cfg.format).unwrap_or(FormatArg::Json);
    let bytes = match format {
        FormatArg::Json => to_json_pretty(&entries)?,
        FormatArg::Csv => {
            let mut out = Vec::new();
            writeln!(out, "order,sturm_count,q_N,mass_scale")?;
            for e in &entries {
                match (e.report.q_n, e.mass_scale) {
                    (Some(q), Some(m)) => {
                        writeln!(out, "{},{},{q},{m}", e.report.order, e.report.sturm_count)?
                    }
                    _ => writeln!(
                        out,
                        "{},{},no real root,no real root",
                        e.report.order, e.report.sturm_count
                    )?,
                }
            }
            out
        }
    };
    ctx.emit(args.out.as_ref(), &bytes)
}

fn cmd_propagator(ctx: &Ctx, args: &PropagatorArgs) -> Result<()> {
    let n = ctx.order(args.n)?;
    let a = ctx.scale(args.a);
    let params = ModelParams::new(n, a)?;
    let contour = resolve_contour(args.contour, args.eps)?;
    let spec = PropagatorSpec::new(params, symbol_kind(args.kind), contour)?;

    if args.steps == 0 {
        return Err(Error::Validation(
            "the scan needs at least one point".into(),
        ));
    }
    if !args.p2_min.is_finite() || !args.p2_max.is_finite() || args.p2_max < args.p2_min {
        return Err(Error::Validation(format!(
            "empty or invalid scan range [{}, {}]",
            args.p2_min, args.p2_max
        )));
    }

    let mut out = Vec::new();
    writeln!(out, "p_squared,re_D,im_D")?;
    if let Some(pole) = spec.pole_location() {
        if pole >= args.p2_min && pole <= args.p2_max {
            writeln!(out, "# mass shell pole inside scan: p_squared = {pole}")?;
        }
    }
    for i in 0..args.steps {
        let p2 = if args.steps == 1 {
            args.p2_min
        } else {
            args.p2_min + (args.p2_max - args.p2_min) * i as f64 / (args.steps - 1) as f64
        };
        match spec.value(p2) {
            Ok(v) => writeln!(out, "{p2},{},{}", v.re, v.im)?,
            Err(Error::PoleProximity(msg)) => {
                writeln!(out, "# pole row at p_squared = {p2}: {msg}")?
            }
            Err(e) => return Err(e),
        }
    }
    ctx.emit(args.out.as_ref(), &out)
}

#[derive(Serialize)]
struct HomogeneousReport {
    residual: f64,
    degenerate: bool,
    modes: usize,
    max_abs: f64,
}

#[derive(Serialize)]
struct ShiftedSolveReport {
    #[serde(flatten)]
    diagnostics: SolveDiagnostics,
    max_imag: f64,
}

fn cmd_solve(ctx: &Ctx, args: &SolveArgs) -> Result<()> {
    match (args.homogeneous, &args.source) {
        (true, Some(_)) => Err(Error::Validation(
            "--homogeneous and --source are mutually exclusive".into(),
        )),
        (false, None) => Err(Error::Validation(
            "pass --homogeneous with --modes, or --source FILE".into(),
        )),
        (true, None) => solve_homogeneous(ctx, args),
        (false, Some(src)) => solve_sourced(ctx, args, src),
    }
}

fn solve_homogeneous(ctx: &Ctx, args: &SolveArgs) -> Result<()> {
    if matches!(args.kind, Some(KindArg::Infinite)) {
        return Err(Error::Validation(
            "the full exponential operator has no mass shell; homogeneous plane waves \
             exist at odd finite orders"
                .into(),
        ));
    }
    if args.contour.is_some() || args.eps.is_some() {
        return Err(Error::Validation(
            "contours apply to the sourced solve, not the homogeneous one".into(),
        ));
    }
    let modes_str = args.modes.as_ref().ok_or_else(|| {
        Error::Validation("--homogeneous needs --modes \"re,im,k1[,k2..];...\"".into())
    })?;
    let n = ctx.order(args.n)?;
    let a = ctx.scale(args.a);
    let spec = ctx.grid_spec(&args.shape, &args.box_lengths)?;
    let params = ModelParams::with_dims(n, a, spec.dims())?;
    let spectrum = parse_amp_k_list(modes_str)?;
    let mode_field = homogeneous_solution(&params, &spectrum)?;
    let field = mode_field.sample(&spec)?;
    let resid = residual_norm(&params, &field)?;

    let report = HomogeneousReport {
        residual: resid.value,
        degenerate: resid.degenerate,
        modes: mode_field.modes().len(),
        max_abs: field.max_abs(),
    };
    let field_bytes = to_bytes(&field);
    let json = to_json_pretty(&report)?;
    write_atomic(
        &ctx.out_path(args.out_field.as_ref(), "phi.bin"),
        &field_bytes,
    )?;
    write_atomic(
        &ctx.out_path(args.out_diagnostics.as_ref(), "solve.json"),
        &json,
    )
}

fn solve_sourced(ctx: &Ctx, args: &SolveArgs, src: &Path) -> Result<()> {
    if args.modes.is_some() {
        return Err(Error::Validation(
            "--modes applies to the homogeneous solve".into(),
        ));
    }
    if args.shape.is_some() || args.box_lengths.is_some() {
        return Err(Error::Validation(
            "the source file fixes the grid; drop --shape/--box".into(),
        ));
    }
    let n = ctx.order(args.n)?;
    let a = ctx.scale(args.a);
    let j = read_binary(src)?;
    let params = ModelParams::with_dims(n, a, j.spec().dims())?;
    let kind = symbol_kind(args.kind);
    let contour = resolve_contour(args.contour, args.eps)?;

    let shifted = match contour {
        Contour::None => None,
        c => {
            if kind == SymbolKind::InfiniteOrder {
                return Err(Error::Validation(
                    "contours apply to the finite odd-order solve; the full exponential \
                     has no mass shell"
                        .into(),
                ));
            }
            Some(c)
        }
    };

    let (field_bytes, json) = match shifted {
        Some(c) => {
            let out = solve_sourced_odd(&params, &j, c)?;
            let max_imag = out
                .field
                .values()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.im.abs()));
            let report = ShiftedSolveReport {
                diagnostics: out.diagnostics,
                max_imag,
            };
            (to_bytes(&out.field.realize()), to_json_pretty(&report)?)
        }
        None => {
            let out = solve_sourced_spectral(&params, kind, &j)?;
            (to_bytes(&out.field), to_json_pretty(&out.diagnostics)?)
        }
    };
    write_atomic(
        &ctx.out_path(args.out_field.as_ref(), "phi.bin"),
        &field_bytes,
    )?;
    write_atomic(
        &ctx.out_path(args.out_diagnostics.as_ref(), "solve.json"),
        &json,
    )
}

fn cmd_emt(ctx: &Ctx, args: &EmtArgs) -> Result<()> {
    let n = ctx.order(args.n)?;
    let a = ctx.scale(args.a);
    let tensor = match (&args.field, &args.modes) {
        (Some(_), Some(_)) => {
            return Err(Error::Validation(
                "--field and --modes are mutually exclusive".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Validation(
                "pass --field FILE or --modes \"re,im,omega,k1[,k2..];...\"".into(),
            ))
        }
        (Some(path), None) => {
            if args.shape.is_some() || args.box_lengths.is_some() {
                return Err(Error::Validation(
                    "the field file fixes the grid; drop --shape/--box".into(),
                ));
            }
            let g = read_binary(path)?;
            let params = ModelParams::with_dims(n, a, g.spec().dims())?;
            emt_closed_grid(&params, &g)?
        }
        (None, Some(modes_str)) => {
            let spec = ctx.grid_spec(&args.shape, &args.box_lengths)?;
            let params = ModelParams::with_dims(n, a, spec.dims())?;
            let modes = parse_full_mode_list(modes_str)?;
            let field = ModeField::new(params.clone(), modes)?;
            emt_general(&params, &field, &spec)?
        }
    };

    let mut csv = Vec::new();
    write_emt_csv(&tensor, &mut csv)?;
    let summary = summarize(&tensor)?;
    let json = to_json_pretty(&summary)?;
    write_atomic(&ctx.out_path(args.out_csv.as_ref(), "emt.csv"), &csv)?;
    write_atomic(
        &ctx.out_path(args.out_summary.as_ref(), "emt_summary.json"),
        &json,
    )
}

fn cmd_evolve(ctx: &Ctx, args: &EvolveArgs) -> Result<()> {
    let n = ctx.order(args.n)?;
    let a = ctx.scale(args.a);
    let params = ModelParams::new(n, a)?;
    let ode = build_mode_ode(&params, args.k)?;
    let initial = parse_f64_list(&args.initial)?;
    let traj = integrate(&ode, &initial, args.t_end, args.dt)?;

    let mut csv = Vec::new();
    write_trajectory_csv(&traj, &mut csv)?;
    let spectrum_json = match &args.spectrum_out {
        Some(_) => Some(to_json_pretty(&SpectrumReport::new(&ode))?),
        None => None,
    };

    if traj.blow_up {
        let t_stop = traj.times.last().copied().unwrap_or(0.0);
        eprintln!(
            "note: trajectory stopped at t = {t_stop}; a state component passed the \
             blow-up threshold (expected with growing characteristic roots)"
        );
    }
    if let (Some(path), Some(bytes)) = (&args.spectrum_out, &spectrum_json) {
        write_atomic(&ctx.out_path(Some(path), ""), bytes)?;
    }
    ctx.emit(args.out.as_ref(), &csv)
}
