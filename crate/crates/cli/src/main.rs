use std::fs;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use saito_forge_core::export::{export_script, Cas};
use saito_forge_core::family::{
    DivisorInstance, FamilyParams, InstanceRecord, InstanceSampler, SampleMode, ValidationOptions,
};
use saito_forge_core::oracle;
use saito_forge_core::pipeline::{self, SweepConfig, VerifyOptions};
use saito_forge_core::saito::RouteChoice;
use saito_forge_core::{parse_poly, Field, Poly};

#[derive(Parser)]
#[command(name = "saito-forge", version, about = "Exact Saito matrices for a family of plane free divisors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a family member and print its instance JSON.
    Construct(ConstructArgs),
    /// Run every check on an instance; exit 0 iff all pass.
    Verify(VerifyArgs),
    /// Syzygy kernels of the Jacobian ideal and a Saito assembly search.
    Syzygies(OracleArgs),
    /// Hilbert function of S/J(F) against the predicted series.
    Hilbert(HilbertArgs),
    /// Verify every legal (d, alpha, beta) in the given ranges.
    Sweep(SweepArgs),
    /// Write a Macaulay2 or CoCoA-5 cross-check script.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    Explicit,
    Oracle,
}

impl From<RouteArg> for RouteChoice {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Auto => RouteChoice::Auto,
            RouteArg::Explicit => RouteChoice::Explicit,
            RouteArg::Oracle => RouteChoice::Oracle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CasArg {
    Cocoa,
    Macaulay2,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Instance JSON file (overrides the other instance flags).
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long, default_value_t = 0)]
    alpha: u32,
    #[arg(long, default_value_t = 0)]
    beta: u32,
    #[arg(long)]
    f1: Option<String>,
    #[arg(long)]
    f2: Option<String>,
    /// Field: `q` or `fp:P`.
    #[arg(long, default_value = "q")]
    field: String,
    /// Seed for random F1, F2 when they are not given.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample F1 with a repeated linear factor and skip the square-free test.
    #[arg(long)]
    drop_squarefree: bool,
    /// Replace the recorded F by this polynomial.
    #[arg(long)]
    poly: Option<String>,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, value_enum, default_value = "auto")]
    route: RouteArg,
    #[arg(long)]
    degree_bound: Option<u32>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long)]
    degree_bound: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HilbertArgs {
    #[command(flatten)]
    oracle: OracleArgs,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Degree or inclusive range such as `5..9`.
    #[arg(long)]
    d: String,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long, default_value_t = 1)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "q")]
    field: String,
    #[arg(long)]
    drop_squarefree: bool,
    #[arg(long, value_enum, default_value = "auto")]
    route: RouteArg,
    #[arg(long)]
    degree_bound: Option<u32>,
    #[arg(long)]
    timings: bool,
    /// Write the per-instance reports here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, value_enum)]
    cas: CasArg,
    #[arg(long, value_enum, default_value = "auto")]
    route: RouteArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Invalid input, reported with exit code 2.
#[derive(Debug)]
struct InvalidInput(String);

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InvalidInput(msg.into()).into()
}

fn parse_range(s: &str) -> Result<RangeInclusive<u32>> {
    let parse = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| invalid(format!("bad range `{s}`")))
    };
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            Ok(parse(a)?..=parse(b)?)
        }
        None => {
            let n = parse(s)?;
            Ok(n..=n)
        }
    }
}

fn parse_field(s: &str) -> Result<Field> {
    s.parse::<Field>().map_err(|e| invalid(e.to_string()))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

impl InstanceArgs {
    fn mode(&self) -> SampleMode {
        if self.drop_squarefree {
            SampleMode::RepeatedFactor
        } else {
            SampleMode::General
        }
    }

    /// Family parameters from explicit F1/F2 or from the seed.
    fn params(&self) -> Result<(FamilyParams, Option<u64>)> {
        let d = self.d.ok_or_else(|| invalid("--d is required without --instance"))?;
        let field = parse_field(&self.field)?;
        if let Some(e) = field.admits_degree(d).err() {
            return Err(invalid(e.to_string()));
        }
        match (&self.f1, &self.f2) {
            (Some(f1), Some(f2)) => {
                let parse = |s: &str| parse_poly(s, field).map_err(|e| invalid(format!("`{s}`: {e}")));
                Ok((
                    FamilyParams {
                        d,
                        alpha: self.alpha,
                        beta: self.beta,
                        f1: parse(f1)?,
                        f2: parse(f2)?,
                        field,
                    },
                    None,
                ))
            }
            (None, None) => {
                let p = InstanceSampler::new(self.seed, field)
                    .params(d, self.alpha, self.beta, self.mode())
                    .map_err(|e| invalid(e.to_string()))?;
                Ok((p, Some(self.seed)))
            }
            _ => Err(invalid("--f1 and --f2 must be given together")),
        }
    }

    /// The instance record; parameters are not validated here.
    fn record(&self) -> Result<InstanceRecord> {
        let mut rec = match &self.instance {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str::<InstanceRecord>(&text).map_err(|e| invalid(format!("instance JSON: {e}")))?
            }
            None => {
                let (p, seed) = self.params()?;
                InstanceRecord::new(&p, seed)
            }
        };
        if let Some(poly) = &self.poly {
            parse_poly(poly, rec.field).map_err(|e| invalid(format!("--poly: {e}")))?;
            rec.f = poly.clone();
        }
        rec.params().map_err(|e| invalid(e.to_string()))?;
        rec.polynomial().map_err(|e| invalid(e.to_string()))?;
        Ok(rec)
    }

    /// The polynomial under study: `--poly` alone, or the instance's F.
    fn polynomial(&self) -> Result<(Poly, u32)> {
        if let (Some(text), None, None) = (&self.poly, &self.instance, self.d) {
            let field = parse_field(&self.field)?;
            let f = parse_poly(text, field).map_err(|e| invalid(format!("--poly: {e}")))?;
            let d = f
                .homogeneous_degree()
                .ok()
                .flatten()
                .ok_or_else(|| invalid("--poly must be a nonzero homogeneous polynomial"))?;
            return Ok((f, d));
        }
        let rec = self.record()?;
        Ok((rec.polynomial()?, rec.d))
    }
}

fn cmd_construct(args: &ConstructArgs) -> Result<bool> {
    let (params, seed) = args.inst.params()?;
    let opts = ValidationOptions {
        require_squarefree: !args.inst.drop_squarefree,
    };
    if let Err(e) = DivisorInstance::build_with(params.clone(), opts) {
        if let saito_forge_core::family::FamilyError::InvalidParams(report) = &e {
            eprintln!("{}", to_json(report)?);
        }
        return Err(invalid(e.to_string()));
    }
    emit(&to_json(&InstanceRecord::new(&params, seed))?, args.out.as_ref())?;
    Ok(true)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let rec = args.inst.record()?;
    let opts = VerifyOptions {
        route: args.route.into(),
        degree_bound: args.degree_bound,
        timings: args.timings,
    };
    let report = pipeline::verify_record(&rec, opts).map_err(|e| invalid(e.to_string()))?;
    emit(&to_json(&report)?, args.out.as_ref())?;
    if !report.pass {
        eprintln!("FAIL: {}", report.failed_checks().join(", "));
    }
    Ok(report.pass)
}

#[derive(Serialize)]
struct KernelRow {
    t: u32,
    kernel_dim: usize,
}

#[derive(Serialize)]
struct SyzygyReport {
    degree: u32,
    kernels: Vec<KernelRow>,
    probe: oracle::ProbeReport,
    matrix: Option<Vec<Vec<Poly>>>,
}

fn cmd_syzygies(args: &OracleArgs) -> Result<bool> {
    let (f, d) = args.inst.polynomial()?;
    let bound = args.degree_bound.unwrap_or(3 * (d / 2) + 3);
    let kernels = (1..=bound)
        .map(|t| KernelRow {
            t,
            kernel_dim: oracle::syzygy_kernel(&f, t).basis.len(),
        })
        .collect();
    let probe = oracle::freeness_probe(&f, bound);
    let matrix = probe.matrix.as_ref().map(|m| m.iter().map(|r| r.to_vec()).collect());
    let report = SyzygyReport {
        degree: d,
        kernels,
        probe,
        matrix,
    };
    emit(&to_json(&report)?, args.out.as_ref())?;
    Ok(true)
}

fn cmd_hilbert(args: &HilbertArgs) -> Result<bool> {
    let (f, d) = args.oracle.inst.polynomial()?;
    let bound = args.oracle.degree_bound.unwrap_or(3 * (d / 2) + 3);
    let report = oracle::resolution_check(&f, d, bound);
    emit(&to_json(&report)?, args.oracle.out.as_ref())?;
    if let Some(path) = &args.csv {
        fs::write(path, oracle::hilbert_csv(&report)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report.pass)
}

#[derive(Serialize)]
struct SweepOverview<'a> {
    seed: u64,
    field: Field,
    exploratory: bool,
    total: usize,
    passed: usize,
    failed: usize,
    rows: &'a [pipeline::SweepRow],
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("SAITO_FORGE_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| invalid(format!("SAITO_FORGE_THREADS=`{s}` is not a number"))),
        Err(_) => Ok(None),
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    let field = parse_field(&args.field)?;
    let d = parse_range(&args.d)?;
    if *d.start() < 5 {
        return Err(invalid("sweep degrees must be at least 5"));
    }
    if let Some(e) = field.admits_degree(*d.end()).err() {
        return Err(invalid(e.to_string()));
    }
    let cfg = SweepConfig {
        d,
        alpha: args.alpha.as_deref().map(parse_range).transpose()?,
        beta: args.beta.as_deref().map(parse_range).transpose()?,
        trials: args.trials,
        seed: args.seed,
        field,
        drop_squarefree: args.drop_squarefree,
        verify: VerifyOptions {
            route: args.route.into(),
            degree_bound: args.degree_bound,
            timings: args.timings,
        },
        threads: threads_from_env()?,
    };
    let summary = pipeline::run_sweep(&cfg);
    let overview = SweepOverview {
        seed: summary.seed,
        field: summary.field,
        exploratory: summary.exploratory,
        total: summary.total,
        passed: summary.passed,
        failed: summary.failed,
        rows: &summary.rows,
    };
    println!("{}", to_json(&overview)?);
    if let Some(path) = &args.out {
        fs::write(path, to_json(&summary)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(summary.exit_ok())
}

fn cmd_export(args: &ExportArgs) -> Result<bool> {
    let rec = args.inst.record()?;
    let rows = pipeline::record_saito_rows(&rec, args.route.into()).map_err(|e| invalid(e.to_string()))?;
    let cas = match args.cas {
        CasArg::Cocoa => Cas::Cocoa,
        CasArg::Macaulay2 => Cas::Macaulay2,
    };
    emit(&export_script(cas, &rec, rows.as_ref()), args.out.as_ref())?;
    Ok(rows.is_some())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Syzygies(a) => cmd_syzygies(a),
        Command::Hilbert(a) => cmd_hilbert(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InvalidInput>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
