use std::collections::HashMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gmbench::bench::{
    fixed_target_times_from_records, parse_generate_spec, performance_profile, run_benchmark, write_outputs,
    BenchConfig, Suite,
};
use gmbench::dd_io;
use gmbench::solvers::{solve, SolverKind, SolverParams};
use gmbench::transforms::{self, Requirements, ShiftMode, TransformReport};
use gmbench::{Problem, RunRecord};

/// Graph matching solvers, cost transforms and benchmarks over dd files.
#[derive(Debug, Parser)]
#[command(name = "gmbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one instance and print its run record as JSON.
    Solve(SolveArgs),
    /// Rewrite the costs of an instance for a solver's requirements.
    Transform(TransformArgs),
    /// Parse, validate and rewrite a dd file in canonical form.
    Convert(ConvertArgs),
    /// Write a synthetic suite (dd files plus JSON sidecars).
    Generate(GenerateArgs),
    /// Run solvers on a suite and write tables and run records.
    Bench(BenchArgs),
    /// Performance profile from a directory of run records.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Time budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON file with solver parameters.
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Override one solver parameter, e.g. `--set fm_k=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_parser = parse_solver)]
    solver: SolverKind,
    #[command(flatten)]
    params: ParamArgs,
    /// Instance file, `-` for standard input.
    input: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Target {
    Bijective,
    Nonpositive,
    ZeroUnary,
    /// Read a bijective problem and reduce it to graph matching.
    Qap,
    Maximization,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shift {
    Unary,
    Full,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[arg(long, value_enum)]
    to: Target,
    /// Cost shift used by `--to qap`.
    #[arg(long, value_enum, default_value = "unary")]
    shift: Shift,
    input: PathBuf,
    /// Transformed instance; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Transform reports as JSON; printed to standard output when the
    /// instance goes to `--out` and this is absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// Only check the file and print a summary.
    #[arg(long)]
    validate: bool,
    input: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// `house:COUNT:N`, `caltech:COUNT:NV:NL:OUTLIERS` or `random:COUNT:NV:NL`.
    spec: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of dd files with optional JSON sidecars.
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    suite: Option<PathBuf>,
    /// Generator spec, as for `generate`; seeded by `--seed`.
    #[arg(long)]
    generate: Option<String>,
    /// Comma-separated solver names; all quadratic solvers by default.
    #[arg(long, value_delimiter = ',', value_parser = parse_solver)]
    solvers: Vec<SolverKind>,
    /// Comma-separated fixed-time budgets in seconds.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    budgets: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Worker threads; half the physical cores by default.
    #[arg(long)]
    threads: Option<usize>,
    /// Relative tolerance of the fixed-target protocol.
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    /// Directory of run records (searched recursively for `*.json`).
    runs: PathBuf,
    /// Suite whose known optima refine the reference values.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    /// Comma-separated ratio thresholds; `2^(k/4)`, `k = 0..=40` by default.
    #[arg(long, value_delimiter = ',')]
    taus: Vec<f64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Bad flag values found after argument parsing; exits like a usage error.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse::<SolverKind>().map_err(|e| e.to_string())
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading standard input")?;
        Ok(buf)
    } else {
        fs::read(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn read_problem(path: &Path) -> Result<Problem> {
    let bytes = read_input(path)?;
    dd_io::parse_bytes(&bytes).with_context(|| format!("{}", path.display()))
}

fn instance_name(path: &Path) -> String {
    if path == Path::new("-") {
        return "stdin".to_string();
    }
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing standard output"),
    }
}

fn json_line(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn solver_params(args: &ParamArgs) -> Result<SolverParams> {
    merge_params(args).map_err(|e| Usage(format!("{e:#}")).into())
}

/// Defaults, then the params file, then `--set`, then `--seed`/`--budget`.
fn merge_params(args: &ParamArgs) -> Result<SolverParams> {
    let mut value = serde_json::to_value(SolverParams::default())?;
    if let Some(path) = &args.params {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?;
        let Some(fields) = file.as_object() else {
            bail!("{}: expected a JSON object", path.display());
        };
        for (k, v) in fields {
            value[k] = v.clone();
        }
    }
    for item in &args.set {
        let Some((key, raw)) = item.split_once('=') else {
            bail!("--set expects KEY=VALUE, got `{item}`");
        };
        if value.get(key).is_none() {
            bail!("unknown solver parameter `{key}`");
        }
        value[key] = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    }
    value["seed"] = args.seed.into();
    if let Some(b) = args.budget {
        value["budget"] = b.into();
    }
    let params: SolverParams = serde_json::from_value(value).context("invalid solver parameters")?;
    params.validate()?;
    Ok(params)
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let params = solver_params(&args.params)?;
    let problem = read_problem(&args.input)?;
    let record = solve(args.solver, &problem, &params, &instance_name(&args.input))?;
    emit(args.out.as_deref(), &json_line(&serde_json::to_value(&record)?))
}

fn cmd_transform(args: TransformArgs) -> Result<()> {
    let problem = read_problem(&args.input)?;
    let (result, chain): (Problem, Vec<TransformReport>) = match args.to {
        Target::Bijective | Target::Nonpositive | Target::ZeroUnary => {
            let req = Requirements {
                bijective: true,
                non_positive: matches!(args.to, Target::Nonpositive),
                zero_unary: matches!(args.to, Target::ZeroUnary),
            };
            let prepared = transforms::prepare(&problem, req)?;
            (prepared.problem, prepared.chain)
        }
        Target::Qap => {
            let mode = match args.shift {
                Shift::Unary => ShiftMode::UnaryOnly,
                Shift::Full => ShiftMode::Full,
            };
            let (p, r) = transforms::qap_to_gm(&problem, mode)?;
            (p, vec![r])
        }
        Target::Maximization => {
            let (p, r) = transforms::negate_with_report(&problem);
            (p, vec![r])
        }
    };
    let report = json_line(&serde_json::to_value(&chain)?);
    emit(args.out.as_deref(), &dd_io::write(&result))?;
    match (&args.report, &args.out) {
        (Some(path), _) => emit(Some(path), &report),
        (None, Some(_)) => emit(None, &report),
        (None, None) => Ok(()),
    }
}

fn cmd_convert(args: ConvertArgs) -> Result<()> {
    let problem = read_problem(&args.input)?;
    if args.validate {
        let summary = serde_json::json!({
            "valid": true,
            "nodes": problem.num_nodes(),
            "labels": problem.num_labels(),
            "assignments": problem.num_assignments(),
            "edges": problem.edges().len(),
        });
        return emit(args.out.as_deref(), &json_line(&summary));
    }
    emit(args.out.as_deref(), &dd_io::write(&problem))
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let suite = parse_generate_spec(&args.spec)?.generate(args.seed)?;
    suite.save_dir(&args.out)?;
    eprintln!("wrote {} instances to {}", suite.instances.len(), args.out.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let params = solver_params(&args.params)?;
    let suite = match (&args.suite, &args.generate) {
        (Some(dir), _) => Suite::load_dir(dir)?,
        (None, Some(spec)) => parse_generate_spec(spec)?.generate(args.params.seed)?,
        (None, None) => bail!("either --suite or --generate is required"),
    };
    if suite.instances.is_empty() {
        bail!("the suite has no instances");
    }
    let mut config = BenchConfig {
        budgets: args.budgets,
        trials: args.trials,
        params,
        tolerance: args.tolerance,
        ..BenchConfig::default()
    };
    if !args.solvers.is_empty() {
        config.solvers = args.solvers;
    }
    if let Some(t) = args.threads {
        config.threads = t;
    }
    if config.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let output = run_benchmark(&suite, &config)?;
    write_outputs(&args.out, &output)?;
    print!("{}", output.fixed_time.to_csv());
    Ok(())
}

fn collect_json(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.is_dir() {
            collect_json(&path, out)?;
        } else if path.extension().is_some_and(|x| x == "json") {
            out.push(path);
        }
    }
    Ok(())
}

fn cmd_profile(args: ProfileArgs) -> Result<()> {
    let mut files = Vec::new();
    collect_json(&args.runs, &mut files)?;
    files.sort();
    let mut records = Vec::with_capacity(files.len());
    for path in &files {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let record: RunRecord =
            serde_json::from_str(&text).with_context(|| format!("{}: not a run record", path.display()))?;
        records.push(record);
    }
    if records.is_empty() {
        bail!("no run records under {}", args.runs.display());
    }
    let mut optima = HashMap::new();
    if let Some(dir) = &args.suite {
        for inst in Suite::load_dir(dir)?.instances {
            if let Some(o) = inst.optimum {
                optima.insert(inst.name, o);
            }
        }
    }
    let table = fixed_target_times_from_records(&records, &optima, args.tolerance);
    let taus = if args.taus.is_empty() {
        gmbench::bench::default_taus()
    } else {
        args.taus
    };
    let profile = performance_profile(&table, &taus)?;
    emit(args.out.as_deref(), &profile.to_csv())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Profile(a) => cmd_profile(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
