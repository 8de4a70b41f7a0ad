//! The `bdcut` command line.
//!
//! Exit codes: 0 success, 1 internal failure, 2 a verification check
//! failed, 3 bad input (arguments, files, specs, oracle refusals).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use bdcut_core::instance::{gen_random_regular, WeightLaw};
use bdcut_core::localsearch::DEFAULT_C;
use bdcut_core::oracle::{brute_force_opt_capped, DEFAULT_CAP};
use bdcut_core::sdp::TriangleMode;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::experiment::{self, ExperimentSpec};
use crate::format::{parse_instance, write_embedding, write_instance};
use crate::solve::{solve, SolveOptions};
use crate::verify::{self, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bdcut",
    version,
    about = "Max-Cut / Max-2LIN by relaxation, rounding and local flips"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relax, round `--trials` times and report the best assignment.
    Solve(SolveArgs),
    /// Exact optimum by enumeration.
    Oracle(OracleArgs),
    /// Run the numerical checks.
    Verify(VerifyArgs),
    /// Run a batch experiment described by a JSON spec.
    Experiment(ExperimentArgs),
    /// Write a random regular instance.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long = "epsilon-C", default_value_t = DEFAULT_C)]
    pub epsilon_c: f64,
    #[arg(long, default_value_t = TriangleMode::Neighborhood)]
    pub triangle_mode: TriangleMode,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also compute the exact optimum (skipped above the cap).
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub oracle_cap: usize,
    /// Greedy single-vertex improvement after the flip pass.
    #[arg(long)]
    pub polish: bool,
    /// Dump the relaxation vectors here.
    #[arg(long, value_name = "PATH")]
    pub embedding: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Monte-Carlo samples per check.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Random matrices per matrix check.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Truncation points for the gap-at-one check.
    #[arg(long, value_delimiter = ',', default_value = "100,400,1600")]
    pub taus: Vec<usize>,
    #[arg(long = "epsilon-C", default_value_t = DEFAULT_C)]
    pub epsilon_c: f64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub spec: PathBuf,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Overrides the CSV path of the spec.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Overrides the JSON path of the spec.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// Probability that an edge gets sign -1.
    #[arg(long, default_value_t = 1.0)]
    pub sign_bias: f64,
    /// `unit` or `uniform:LO:HI`.
    #[arg(long, default_value = "unit", value_parser = parse_weights)]
    pub weights: WeightLaw,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(short, long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn parse_weights(s: &str) -> Result<WeightLaw, String> {
    if s == "unit" {
        return Ok(WeightLaw::Unit);
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["uniform", lo, hi] => {
            let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
            let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err("need 0 < LO <= HI".into());
            }
            Ok(WeightLaw::Uniform { lo, hi })
        }
        _ => Err(format!("expected `unit` or `uniform:LO:HI`, got {s:?}")),
    }
}

/// Error tagged with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        error: e.into(),
    }
}

fn internal(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_INTERNAL,
        error: e.into(),
    }
}

type Outcome = Result<i32, Failure>;

fn read_instance(path: &Path) -> Result<bdcut_core::Max2LinInstance, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(input)?;
    parse_instance(&text)
        .with_context(|| format!("invalid instance {}", path.display()))
        .map_err(input)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(internal)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(internal)?;
    s.push('\n');
    Ok(s)
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Outcome {
    let inst = read_instance(&a.instance)?;
    let opts = SolveOptions {
        seed: a.common.seed,
        trials: a.trials,
        epsilon_c: a.epsilon_c,
        triangle_mode: a.triangle_mode,
        rank: a.rank,
        tol: a.tol,
        oracle: a.oracle,
        oracle_cap: a.oracle_cap,
        polish: a.polish,
    };
    let (rep, emb) = solve(&inst, &opts).map_err(input)?;
    let mut text = format!(
        "n={} m={} d={}\nsdp bound: {} ({})\nbest value: {} (trial {})\n",
        rep.instance.n,
        rep.instance.m,
        rep.instance.max_degree,
        rep.sdp.objective,
        if rep.sdp.converged {
            "converged"
        } else {
            "not converged"
        },
        rep.best_value,
        rep.best_trial,
    );
    if let Some(r) = rep.ratio_sdp {
        text += &format!("ratio vs sdp bound: {r}\n");
    }
    if let (Some(opt), Some(r)) = (rep.opt, rep.ratio_opt) {
        text += &format!("opt: {opt}\nratio vs opt: {r}\n");
    } else if let Some(opt) = rep.opt {
        text += &format!("opt: {opt}\n");
    }
    if let Some(why) = &rep.oracle_skipped {
        eprintln!("oracle skipped: {why}");
    }
    out.write_all(text.as_bytes()).map_err(internal)?;
    if let Some(p) = &a.common.json {
        write_file(p, &to_json(&rep)?)?;
    }
    if let Some(p) = &a.common.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (k, r) in rep.runs.iter().enumerate() {
            w.serialize(RunRow::new(k, r)).map_err(internal)?;
        }
        write_file(
            p,
            &String::from_utf8(w.into_inner().map_err(internal)?).map_err(internal)?,
        )?;
    }
    if let Some(p) = &a.embedding {
        write_file(p, &write_embedding(&emb))?;
    }
    Ok(EXIT_OK)
}

/// Flat per-trial record for the solve CSV.
#[derive(Serialize)]
struct RunRow {
    trial: usize,
    sdp_seed: u64,
    rounding_seed: u64,
    sdp_value: f64,
    rounded_value: f64,
    flipped_value: f64,
    polished_value: Option<f64>,
    gain: f64,
    guaranteed_gain: f64,
    s_size: usize,
    flip_count: usize,
    epsilon: f64,
    rho_window_fraction: f64,
    converged: bool,
}

impl RunRow {
    fn new(trial: usize, r: &bdcut_core::RunReport) -> Self {
        RunRow {
            trial,
            sdp_seed: r.seeds.sdp,
            rounding_seed: r.seeds.rounding,
            sdp_value: r.sdp_value,
            rounded_value: r.rounded_value,
            flipped_value: r.flipped_value,
            polished_value: r.polished_value,
            gain: r.gain,
            guaranteed_gain: r.guaranteed_gain,
            s_size: r.s_size,
            flip_count: r.flip_count,
            epsilon: r.epsilon,
            rho_window_fraction: r.rho_window_fraction,
            converged: r.converged,
        }
    }
}

#[derive(Serialize)]
struct OracleOutput {
    version: &'static str,
    n: usize,
    opt: f64,
    enumerated: u64,
    assignment: Vec<i8>,
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Outcome {
    let inst = read_instance(&a.instance)?;
    let res = brute_force_opt_capped(&inst, a.cap).map_err(input)?;
    let signs: Vec<&str> = res
        .argmax
        .as_slice()
        .iter()
        .map(|&x| if x > 0 { "+" } else { "-" })
        .collect();
    writeln!(out, "opt: {}\nassignment: {}", res.opt, signs.join(" ")).map_err(internal)?;
    if let Some(p) = &a.json {
        let o = OracleOutput {
            version: crate::VERSION,
            n: inst.n(),
            opt: res.opt,
            enumerated: res.enumerated,
            assignment: res.argmax.as_slice().to_vec(),
        };
        write_file(p, &to_json(&o)?)?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    let opts = VerifyOptions {
        seed: a.common.seed,
        samples: a.samples,
        matrix_trials: a.trials,
        gap_taus: a.taus.clone(),
        epsilon_c: a.epsilon_c,
        ..VerifyOptions::default()
    };
    let rep = verify::run(&opts).map_err(input)?;
    for c in &rep.checks {
        writeln!(out, "{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name).map_err(internal)?;
    }
    if let Some(p) = &a.common.json {
        write_file(p, &to_json(&rep)?)?;
    }
    Ok(if rep.pass { EXIT_OK } else { EXIT_VERIFY })
}

fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Outcome {
    let spec = ExperimentSpec::load(&a.spec).map_err(input)?;
    let res = experiment::run(&spec, a.workers).map_err(input)?;
    let csv = res.to_csv().map_err(internal)?;
    match a.csv.as_ref().or(spec.output.csv.as_ref()) {
        Some(p) => write_file(p, &csv)?,
        None => out.write_all(csv.as_bytes()).map_err(internal)?,
    }
    if let Some(p) = a.json.as_ref().or(spec.output.json.as_ref()) {
        write_file(p, &to_json(&res)?)?;
    }
    let errors = res.rows.iter().filter(|r| r.kind == "error").count();
    if errors > 0 {
        eprintln!("{errors} row(s) recorded errors");
    }
    Ok(EXIT_OK)
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Outcome {
    let inst = gen_random_regular(a.n, a.d, a.sign_bias, a.weights, a.seed).map_err(input)?;
    let text = write_instance(&inst);
    match &a.out {
        Some(p) => write_file(p, &text)?,
        None => out.write_all(text.as_bytes()).map_err(internal)?,
    }
    Ok(EXIT_OK)
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Experiment(a) => cmd_experiment(a, out),
        Command::Gen(a) => cmd_gen(a, out),
    }
}

/// Parses `args`, runs the command and returns the exit code. Usage errors
/// map to the input-error code rather than clap's default.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match dispatch(&cli, &mut lock) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}
