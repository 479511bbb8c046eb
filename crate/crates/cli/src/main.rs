use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wfootrule::estimation::{self, FootruleNorm};
use wfootrule::montecarlo::{self, TableRow};
use wfootrule::truth::{self, Method};
use wfootrule::{
    rank_data, Copula, EstimateReport, EstimationError, EstimationOptions, Execution,
    MonteCarloError, TiePolicy, TruthError, DEFAULT_SEED,
};

mod input;

use input::{parse_cols, ColumnRef};

/// W-footrule coefficient: truth values, rank estimates, inference and
/// Monte Carlo tables.
#[derive(Debug, Parser)]
#[command(name = "wfootrule", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate Φ, φ and γ from a two-column CSV file.
    Estimate(EstimateArgs),
    /// Population values of Φ, φ and γ for a copula.
    Truth(TruthArgs),
    /// Run a simulation manifest and print the table.
    Simulate(SimulateArgs),
    /// One-sided test of perfect negative dependence.
    Test(TestArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// CSV file with two numeric columns; a header row is optional.
    #[arg(long)]
    input: PathBuf,
    /// Columns to use, by header name or 1-based position.
    #[arg(long, value_parser = parse_cols)]
    cols: Option<(ColumnRef, ColumnRef)>,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Ties::Midrank)]
    ties: Ties,
    /// Finite-difference step for σ̂ (default n^-1/2 clipped to [1/n, 1/4]).
    #[arg(long, value_parser = parse_positive)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = estimation::DEFAULT_GRID, value_parser = parse_grid)]
    grid: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Footrule normalisation.
    #[arg(long, value_enum, default_value_t = Norm::Pseudo)]
    footrule: Norm,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Debug, Args)]
struct TruthArgs {
    /// e.g. `gaussian:rho=-0.9`, `clayton:theta=5`, `pi`, `twosegment`.
    #[arg(long)]
    copula: Copula,
    #[arg(long, default_value_t = truth::DEFAULT_TOL, value_parser = parse_tol)]
    tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario manifest; the built-in simulation grid when omitted.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Multiplies every replication count.
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    scale: f64,
    /// Worker threads: 0 uses all cores, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, env = "WFOOTRULE_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also report bias and SD ratios between consecutive sample sizes.
    #[arg(long)]
    decay: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Ties {
    Midrank,
    Error,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Norm {
    Pseudo,
    Classical,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 1), got {a}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t = parse_positive(s)?;
    if t >= truth::MIN_TOL {
        Ok(t)
    } else {
        Err(format!("tolerance must be at least {:e}", truth::MIN_TOL))
    }
}

fn parse_grid(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(g) if g >= 2 => Ok(g),
        _ => Err(format!("grid must be an integer ≥ 2, got `{s}`")),
    }
}

/// An error with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn numerical(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 2,
            error: error.into(),
        }
    }

    fn data(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 3,
            error: error.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr()
                || e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Estimate(args) => estimate(args),
        Command::Truth(args) => truth_cmd(args),
        Command::Simulate(args) => simulate(args),
        Command::Test(args) => test_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::data(anyhow!(e)))?;
    println!("{text}");
    Ok(())
}

fn estimation_failure(e: EstimationError, lines: &[u64]) -> Failure {
    let line = |row: usize| lines.get(row).copied().unwrap_or(0);
    match e {
        EstimationError::Ties { column, row } => Failure::data(anyhow!(
            "line {}: tied value in column {} (use --ties midrank)",
            line(row),
            column + 1
        )),
        EstimationError::NonFinite { row } => {
            Failure::data(anyhow!("line {}: non-finite value", line(row)))
        }
        EstimationError::LengthMismatch(..) | EstimationError::TooFewObservations(_) => {
            Failure::data(e)
        }
        other => Failure::numerical(other),
    }
}

fn run_estimate(data: &DataArgs, norm: FootruleNorm) -> Result<EstimateReport, Failure> {
    let cols = input::read_columns(&data.input, data.cols.as_ref()).map_err(Failure::data)?;
    let policy = match data.ties {
        Ties::Midrank => TiePolicy::MidRank,
        Ties::Error => TiePolicy::Error,
    };
    let rs =
        rank_data(&cols.xs, &cols.ys, policy).map_err(|e| estimation_failure(e, &cols.lines))?;
    if rs.has_ties() {
        eprintln!("warning: ties found; using mid-ranks");
    }
    let opts = EstimationOptions {
        alpha: data.alpha,
        bandwidth: data.bandwidth,
        grid: data.grid,
        footrule: norm,
        execution: Execution::Parallel,
    };
    estimation::estimate(&rs, &opts).map_err(|e| estimation_failure(e, &cols.lines))
}

fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let norm = match args.footrule {
        Norm::Pseudo => FootruleNorm::Pseudo,
        Norm::Classical => FootruleNorm::Classical,
    };
    let r = run_estimate(&args.data, norm)?;
    if args.data.json {
        return print_json(&r);
    }
    let f = montecarlo::fmt5;
    let level = format!("{}%", 100.0 * (1.0 - r.alpha));
    println!("n             {}", r.n);
    println!("phi_hat       {}", f(r.phi_hat));
    println!("footrule_hat  {}", f(r.footrule_hat));
    println!("gini_hat      {}", f(r.gini_hat));
    println!("sigma_hat     {}", f(r.sigma_hat));
    println!("ci {level:<9} [{}, {}]", f(r.ci_low), f(r.ci_high));
    println!("test_stat     {}", f(r.test_stat));
    println!("p_value       {}", f(r.p_value));
    Ok(())
}

fn test_cmd(args: TestArgs) -> Result<(), Failure> {
    let r = run_estimate(&args.data, FootruleNorm::Pseudo)?;
    let verdict = if r.boundary {
        "not rejected (sample is exactly countermonotone)"
    } else if r.reject {
        "rejected"
    } else {
        "not rejected"
    };
    if args.data.json {
        #[derive(Serialize)]
        struct Out {
            n: usize,
            phi_hat: f64,
            sigma_hat: f64,
            test_stat: f64,
            p_value: f64,
            alpha: f64,
            reject: bool,
            boundary: bool,
            verdict: &'static str,
        }
        return print_json(&Out {
            n: r.n,
            phi_hat: r.phi_hat,
            sigma_hat: r.sigma_hat,
            test_stat: r.test_stat,
            p_value: r.p_value,
            alpha: r.alpha,
            reject: r.reject,
            boundary: r.boundary,
            verdict,
        });
    }
    let f = montecarlo::fmt5;
    println!("H0 (C = W) {verdict} at alpha = {}", r.alpha);
    println!("T_n      {}", f(r.test_stat));
    println!("p_value  {}", f(r.p_value));
    Ok(())
}

#[derive(Serialize)]
struct TruthOut {
    copula: String,
    phi_w: f64,
    footrule: f64,
    gini: f64,
    method: Method,
    error_bound: f64,
}

fn round5(x: f64) -> f64 {
    montecarlo::fmt5(x).parse().unwrap_or(x)
}

fn truth_cmd(args: TruthArgs) -> Result<(), Failure> {
    let tv = truth::true_values(&args.copula, args.tol).map_err(|e| match e {
        TruthError::ToleranceTooSmall(_) => Failure {
            code: 1,
            error: e.into(),
        },
        other => Failure::numerical(other),
    })?;
    let r: fn(f64) -> f64 = if args.json { |x| x } else { round5 };
    print_json(&TruthOut {
        copula: args.copula.to_string(),
        phi_w: r(tv.phi_w),
        footrule: r(tv.footrule),
        gini: r(tv.gini),
        method: tv.method,
        error_bound: tv.abs_error_bound,
    })
}

#[derive(Serialize)]
struct SimRow {
    copula: String,
    n: usize,
    replications: u64,
    seed: u64,
    status: String,
    result: Option<wfootrule::McResult>,
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let text = match &args.manifest {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| Failure::data(anyhow!("cannot read {}: {e}", p.display())))?,
        None => montecarlo::DEFAULT_MANIFEST.to_string(),
    };
    let scenarios =
        montecarlo::parse_manifest(&text, args.seed, args.scale).map_err(Failure::data)?;
    let exec = Execution::from_jobs(args.jobs);
    let rows: Vec<TableRow> = scenarios
        .iter()
        .map(|s| {
            let row = TableRow {
                scenario: s.clone(),
                result: montecarlo::run_scenario(s, exec),
            };
            match &row.result {
                Ok(r) => eprintln!("{}: B = {}, {:.1}s", s.label(), s.replications, r.wall_time),
                Err(e) => eprintln!("{}: {e}", s.label()),
            }
            row
        })
        .collect();
    let results: Vec<_> = rows
        .iter()
        .filter_map(|r| r.result.as_ref().ok().cloned())
        .collect();
    let decay = montecarlo::bias_decay_report(&results);

    let body = if args.json {
        #[derive(Serialize)]
        struct Out {
            rows: Vec<SimRow>,
            #[serde(skip_serializing_if = "Option::is_none")]
            decay: Option<Vec<montecarlo::DecayRatios>>,
        }
        let out = Out {
            rows: rows
                .iter()
                .map(|r| SimRow {
                    copula: r.scenario.spec.to_string(),
                    n: r.scenario.n,
                    replications: r.scenario.replications,
                    seed: r.scenario.seed,
                    status: match &r.result {
                        Ok(_) => "ok".into(),
                        Err(e) => format!("failed: {e}"),
                    },
                    result: r.result.as_ref().ok().cloned(),
                })
                .collect(),
            decay: args.decay.then_some(decay.clone()),
        };
        serde_json::to_string_pretty(&out).map_err(|e| Failure::data(anyhow!(e)))? + "\n"
    } else {
        match args.format {
            Format::Csv => montecarlo::render_csv(&rows),
            Format::Md => montecarlo::render_markdown(&rows),
        }
    };
    match &args.out {
        Some(p) => fs::write(p, &body)
            .map_err(|e| Failure::data(anyhow!("cannot write {}: {e}", p.display())))?,
        None => {
            let _ = io::stdout().write_all(body.as_bytes());
        }
    }
    if args.decay && !args.json {
        let f = montecarlo::fmt5;
        eprintln!("copula, from_n, to_n, bias_ratio_phi, sd_ratio_phi, bias_ratio_footrule, sd_ratio_footrule");
        for d in &decay {
            eprintln!(
                "{}, {}, {}, {}, {}, {}, {}",
                d.copula,
                d.from_n,
                d.to_n,
                f(d.bias_ratio_phi),
                f(d.sd_ratio_phi),
                f(d.bias_ratio_footrule),
                f(d.sd_ratio_footrule)
            );
        }
    }
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    if failed > 0 {
        let first = rows.iter().find_map(|r| r.result.as_ref().err()).cloned();
        return Err(Failure::numerical(anyhow!(
            "{failed} scenario(s) failed; first: {}",
            first
                .map(|e: MonteCarloError| e.to_string())
                .unwrap_or_default()
        )));
    }
    Ok(())
}
