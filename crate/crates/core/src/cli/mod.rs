//! Command-line front end. [`run`] parses arguments, writes to the supplied
//! streams and returns the process exit code.

mod format;
mod pinned;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

pub use format::format_value;
pub use pinned::{pinned_values, PinnedValue};

use crate::closed_form::{frec, kround_lower_bound, FidelityReport, Method};
use crate::error::Error;
use crate::optimal::{
    frec_optimal, frec_optimal_qubit, resource_state_fidelity, resource_state_fidelity_qubit_angular, v_qubit_analytic,
    v_qubit_numeric, VCoefficients,
};
use crate::oracle::{optimize_channel_coefficients, verify_suite_with, Oracle, SearchOptions, VerifyOptions};
use crate::schur_weyl::partitions_bounded;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "pbt-recycle",
    version,
    about = "Recycling fidelity of port-based teleportation resource states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Recycling fidelity after one round.
    Frec(FrecArgs),
    /// CSV of fidelities over a range of port counts.
    Sweep(SweepArgs),
    /// Lower bound after k rounds.
    Bound(BoundArgs),
    /// Overlap between optimal and non-optimal resource states.
    ResourceFidelity(ResourceArgs),
    /// Brute-force oracle commands.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// List Young frames, one per line.
    Partitions(PartitionArgs),
    /// Write optimal-protocol coefficients to a file.
    Vcoeffs(VcoeffArgs),
    /// Regenerate the pinned-values table.
    Pinned(PinnedArgs),
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Check every closed form against explicit operators.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct FrecArgs {
    #[arg(long)]
    ports: u32,
    #[arg(long, default_value_t = 2)]
    dim: u32,
    /// Use the optimal protocol.
    #[arg(long)]
    optimal: bool,
    /// Coefficients for N ports (required with --optimal when d > 2).
    #[arg(long)]
    vfile: Option<PathBuf>,
    /// Coefficients for N-1 ports.
    #[arg(long)]
    vfile_prev: Option<PathBuf>,
    /// Evaluate with the dense-matrix oracle instead of the closed form.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 1)]
    ports_min: u32,
    #[arg(long)]
    ports_max: u32,
    #[arg(long, default_value_t = 2)]
    dim: u32,
    /// Require the optimal column (needs --vdir when d > 2).
    #[arg(long)]
    optimal: bool,
    /// Directory with coefficient files named v_N{N}_d{d}.json.
    #[arg(long)]
    vdir: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long)]
    ports: u32,
    #[arg(long, default_value_t = 2)]
    dim: u32,
    #[arg(long)]
    rounds: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ResourceMethod {
    Schur,
    Angular,
}

#[derive(Args, Debug)]
struct ResourceArgs {
    #[arg(long)]
    ports: u32,
    #[arg(long, default_value_t = 2)]
    dim: u32,
    #[arg(long, value_enum, default_value_t = ResourceMethod::Schur)]
    method: ResourceMethod,
    /// Coefficients (required when d > 2).
    #[arg(long)]
    vfile: Option<PathBuf>,
    /// Emit CSV for N = 1..=ports instead of a single value.
    #[arg(long)]
    sweep: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    ports: u32,
    #[arg(long, default_value_t = 2)]
    dim: u32,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Also report the rotated-signal measurement comparison.
    #[arg(long)]
    optimal: bool,
    #[arg(long)]
    vfile: Option<PathBuf>,
    #[arg(long)]
    vfile_prev: Option<PathBuf>,
    /// Largest matrix dimension the oracle may allocate.
    #[arg(long, default_value_t = crate::oracle::DEFAULT_MAX_DIM)]
    max_dim: usize,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    max_height: u32,
}

#[derive(Args, Debug)]
struct VcoeffArgs {
    #[arg(long)]
    ports: u32,
    #[arg(long, default_value_t = 2)]
    dim: u32,
    #[arg(long)]
    out: PathBuf,
    /// Qubit only: solve the teleportation matrix numerically.
    #[arg(long)]
    numeric: bool,
    /// Maximise the oracle channel fidelity (required when d > 2).
    #[arg(long)]
    optimize: bool,
}

#[derive(Args, Debug)]
struct PinnedArgs {
    #[arg(long)]
    out: PathBuf,
}

/// Failure of a subcommand, carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Coefficients(_) | Error::Io(_) => EXIT_DATA,
            Error::InvalidArgument(_)
            | Error::DimensionCap { .. }
            | Error::InvalidPartition { .. }
            | Error::FrameExceedsDimension { .. } => EXIT_USAGE,
            _ => EXIT_VERIFY,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parse `args` (program name first) and execute.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Frec(a) => cmd_frec(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Bound(a) => cmd_bound(a, out),
        Command::ResourceFidelity(a) => cmd_resource(a, out),
        Command::Oracle {
            command: OracleCommand::Verify(a),
        } => cmd_verify(a, out),
        Command::Partitions(a) => cmd_partitions(a, out),
        Command::Vcoeffs(a) => cmd_vcoeffs(a, out),
        Command::Pinned(a) => cmd_pinned(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn check_range(ports: u32, dim: u32) -> std::result::Result<(), Failure> {
    if ports < 1 {
        return Err(Failure::usage("--ports must be at least 1"));
    }
    if dim < 2 {
        return Err(Failure::usage("--dim must be at least 2"));
    }
    Ok(())
}

fn write_report(out: &mut dyn Write, name: &str, r: &FidelityReport, format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(r).expect("serializable")),
        Format::Text => writeln!(
            out,
            "{name}={} method={} N={} d={} log_space_used={}",
            format_value(r.value),
            r.method.as_str(),
            r.params.ports,
            r.params.d,
            r.log_space_used
        ),
    }
}

/// Coefficients for `(N, d)` and `(N-1, d)`, from files when given and from
/// the qubit closed form otherwise.
fn coefficient_pair(
    ports: u32,
    dim: u32,
    vfile: Option<&Path>,
    vfile_prev: Option<&Path>,
) -> std::result::Result<(VCoefficients, VCoefficients), Failure> {
    let load = |path: &Path, n: u32| -> std::result::Result<VCoefficients, Failure> {
        let v = VCoefficients::load(path)?;
        v.check_shape(n, dim).map_err(Error::from)?;
        Ok(v)
    };
    let v_n = match vfile {
        Some(p) => load(p, ports)?,
        None if dim == 2 => v_qubit_analytic(ports)?,
        None => {
            return Err(Failure::usage(format!(
                "--vfile is required for the optimal protocol at d = {dim}"
            )))
        }
    };
    let v_nm1 = match vfile_prev {
        Some(p) => load(p, ports - 1)?,
        None if ports == 1 => VCoefficients::uniform(0, dim),
        None if dim == 2 => v_qubit_analytic(ports - 1)?,
        None => {
            return Err(Failure::usage(format!(
                "--vfile-prev is required for the optimal protocol at d = {dim}"
            )))
        }
    };
    Ok((v_n, v_nm1))
}

fn cmd_frec(a: FrecArgs, out: &mut dyn Write) -> CmdResult {
    check_range(a.ports, a.dim)?;
    let report = if a.optimal {
        let (v_n, v_nm1) = coefficient_pair(a.ports, a.dim, a.vfile.as_deref(), a.vfile_prev.as_deref())?;
        if a.oracle {
            Oracle::default().frec_optimal_oracle(a.ports, a.dim, &v_n, &v_nm1)?
        } else if a.dim == 2 && a.vfile.is_none() && a.vfile_prev.is_none() {
            frec_optimal_qubit(a.ports)?
        } else {
            frec_optimal(a.ports, a.dim, &v_n, &v_nm1)?
        }
    } else if a.oracle {
        Oracle::default().frec_oracle(a.ports, a.dim)?
    } else {
        frec(a.ports, a.dim)?
    };
    write_report(out, "frec", &report, a.format)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct SweepRow {
    ports: u32,
    d: u32,
    frec: f64,
    frec_opt: Option<f64>,
    lower_bound_qubit: Option<f64>,
}

fn optimal_from_dir(dir: &Path, n: u32, d: u32) -> std::result::Result<Option<f64>, Failure> {
    // at most one port leaves a single frame, so no file is needed
    let load = |m: u32| -> std::result::Result<Option<VCoefficients>, Failure> {
        let path = dir.join(format!("v_N{m}_d{d}.json"));
        if path.exists() {
            let v = VCoefficients::load(&path)?;
            v.check_shape(m, d).map_err(Error::from)?;
            Ok(Some(v))
        } else if m <= 1 {
            Ok(Some(VCoefficients::uniform(m, d)))
        } else {
            Ok(None)
        }
    };
    match (load(n)?, load(n - 1)?) {
        (Some(v_n), Some(v_nm1)) => Ok(Some(frec_optimal(n, d, &v_n, &v_nm1)?.value)),
        _ => Ok(None),
    }
}

fn sweep_row(n: u32, d: u32, vdir: Option<&Path>) -> std::result::Result<SweepRow, Failure> {
    let frec_opt = if d == 2 {
        if n >= 2 {
            Some(frec_optimal_qubit(n)?.value)
        } else {
            None
        }
    } else {
        match vdir {
            Some(dir) => optimal_from_dir(dir, n, d)?,
            None => None,
        }
    };
    Ok(SweepRow {
        ports: n,
        d,
        frec: frec(n, d)?.value,
        frec_opt,
        lower_bound_qubit: (d == 2).then(|| 1.0 - 11.0 / (4.0 * n as f64)),
    })
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write) -> CmdResult {
    check_range(a.ports_min, a.dim)?;
    if a.ports_max < a.ports_min {
        return Err(Failure::usage("--ports-max must not be below --ports-min"));
    }
    if a.optimal && a.dim > 2 && a.vdir.is_none() {
        return Err(Failure::usage("--optimal at d > 2 needs --vdir"));
    }
    if a.threads < 1 {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads)
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let vdir = a.vdir.as_deref();
    let mut rows: Vec<SweepRow> = pool.install(|| {
        (a.ports_min..=a.ports_max)
            .into_par_iter()
            .map(|n| sweep_row(n, a.dim, vdir))
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;
    rows.sort_by_key(|r| r.ports);
    if a.optimal && rows.iter().any(|r| r.frec_opt.is_none() && r.ports > 1) {
        return Err(Failure {
            code: EXIT_DATA,
            message: "coefficient files missing for part of the range".into(),
        });
    }
    let csv = sweep_csv(&rows);
    match &a.out {
        Some(path) => std::fs::write(path, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |x: Option<f64>| x.map(format_value).unwrap_or_default();
    let mut s = String::from("N,d,frec,frec_opt,lower_bound_qubit\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.ports,
            r.d,
            format_value(r.frec),
            opt(r.frec_opt),
            opt(r.lower_bound_qubit)
        ));
    }
    s
}

#[derive(Serialize)]
struct BoundReport {
    one_round: FidelityReport,
    rounds: u32,
    lower_bound: f64,
}

fn cmd_bound(a: BoundArgs, out: &mut dyn Write) -> CmdResult {
    check_range(a.ports, a.dim)?;
    if a.rounds < 1 {
        return Err(Failure::usage("--rounds must be at least 1"));
    }
    let mut one = frec(a.ports, a.dim)?;
    // the closed form may overshoot 1 by round-off only
    let f1 = one.value.min(1.0);
    let bound = kround_lower_bound(f1, a.rounds)?;
    one.params.k = Some(1);
    match a.format {
        Format::Json => {
            let r = BoundReport {
                one_round: one,
                rounds: a.rounds,
                lower_bound: bound,
            };
            writeln!(out, "{}", serde_json::to_string(&r).expect("serializable"))?;
        }
        Format::Text => writeln!(
            out,
            "frec={} rounds={} lower_bound={} N={} d={}",
            format_value(one.value),
            a.rounds,
            format_value(bound),
            a.ports,
            a.dim
        )?,
    }
    Ok(EXIT_OK)
}

fn resource_value(n: u32, a: &ResourceArgs) -> std::result::Result<FidelityReport, Failure> {
    match a.method {
        ResourceMethod::Angular => {
            if a.dim != 2 {
                return Err(Failure::usage("the angular method is qubit only"));
            }
            let value = resource_state_fidelity_qubit_angular(n)?;
            Ok(FidelityReport::new(value, Method::Angular, n, 2, false))
        }
        ResourceMethod::Schur => {
            let v = match &a.vfile {
                Some(path) => VCoefficients::load(path)?,
                None if a.dim == 2 => v_qubit_analytic(n)?,
                None => return Err(Failure::usage(format!("--vfile is required at d = {}", a.dim))),
            };
            Ok(resource_state_fidelity(n, a.dim, &v)?)
        }
    }
}

fn cmd_resource(a: ResourceArgs, out: &mut dyn Write) -> CmdResult {
    check_range(a.ports, a.dim)?;
    if a.sweep {
        if a.vfile.is_some() {
            return Err(Failure::usage("--sweep uses built-in qubit coefficients; drop --vfile"));
        }
        if a.dim != 2 {
            return Err(Failure::usage("--sweep is available at d = 2 only"));
        }
        let mut s = String::from("N,resource_fidelity\n");
        for n in 1..=a.ports {
            s.push_str(&format!("{n},{}\n", format_value(resource_value(n, &a)?.value)));
        }
        out.write_all(s.as_bytes())?;
        return Ok(EXIT_OK);
    }
    let r = resource_value(a.ports, &a)?;
    write_report(out, "resource_fidelity", &r, a.format)?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    check_range(a.ports, a.dim)?;
    if a.tol.is_nan() || a.tol < 0.0 {
        return Err(Failure::usage("--tol must be a nonnegative number"));
    }
    let mut opts = VerifyOptions::new(a.tol);
    opts.compare_rotated = a.optimal;
    if a.vfile.is_some() || a.vfile_prev.is_some() {
        opts.coefficients = Some(coefficient_pair(
            a.ports,
            a.dim,
            a.vfile.as_deref(),
            a.vfile_prev.as_deref(),
        )?);
    }
    let report = verify_suite_with(&Oracle::new(a.max_dim), a.ports, a.dim, &opts)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
}

fn cmd_partitions(a: PartitionArgs, out: &mut dyn Write) -> CmdResult {
    if a.max_height < 1 {
        return Err(Failure::usage("--max-height must be at least 1"));
    }
    for p in partitions_bounded(a.n, a.max_height) {
        let line: Vec<String> = p.parts().iter().map(u32::to_string).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(EXIT_OK)
}

fn cmd_vcoeffs(a: VcoeffArgs, out: &mut dyn Write) -> CmdResult {
    if a.ports < 1 {
        return Err(Failure::usage("--ports must be at least 1"));
    }
    let v = if a.optimize {
        let r = optimize_channel_coefficients(&Oracle::default(), a.ports, a.dim, SearchOptions::default())?;
        writeln!(
            out,
            "channel_fidelity={} evaluations={}",
            format_value(r.channel_fidelity),
            r.evaluations
        )?;
        r.coefficients
    } else if a.dim == 2 {
        if a.numeric {
            v_qubit_numeric(a.ports)?
        } else {
            v_qubit_analytic(a.ports)?
        }
    } else {
        return Err(Failure::usage("coefficients for d > 2 need --optimize"));
    };
    v.save(&a.out)?;
    writeln!(out, "wrote {} entries to {}", v.len(), a.out.display())?;
    Ok(EXIT_OK)
}

fn cmd_pinned(a: PinnedArgs, out: &mut dyn Write) -> CmdResult {
    let values = pinned_values()?;
    let mut text = serde_json::to_string_pretty(&values).expect("serializable");
    text.push('\n');
    std::fs::write(&a.out, text)?;
    writeln!(out, "wrote {} pinned values to {}", values.len(), a.out.display())?;
    Ok(EXIT_OK)
}
