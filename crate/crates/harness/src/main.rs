use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use malign_core::estimators::{
    anneal_er, anneal_gaussian, ball_optimal, greedy_er, greedy_gaussian, map_exhaustive, score, EstimatorResult,
    Schedule,
};
use malign_core::metrics::Metric;
use malign_core::{gibbs_er, gibbs_gaussian, sample_er, sample_gaussian, Alignment, ErParams, GaussianParams, PosteriorTable};
use malign_harness::config::ExperimentConfig;
use malign_harness::error::{HarnessError, Result};
use malign_harness::free_energy::{run_free_energy_probe, write_free_energy_outputs, FreeEnergyConfig};
use malign_harness::phase::{run_phase, unix_now, write_phase_outputs};
use malign_harness::sample_io::{LoadedSample, SampleFile};
use malign_harness::threads::{build_pool, resolve_threads, THREADS_ENV};
use malign_harness::verify::{run_verify, write_verify_csv, write_verify_outputs, Suite, VerifyOptions};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "malign", version, about = "Simulate, estimate and verify multi-graph alignment")]
struct Cli {
    /// Master seed; overrides the seed in a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per CPU). MALIGN_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; stdout when omitted (phase and free-energy need a path).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw one instance and write it as JSON.
    Sample(SampleArgs),
    /// Energy of an alignment on a sampled instance.
    Energy(EnergyArgs),
    /// Run an estimator on a sampled instance and score it.
    Map(MapArgs),
    /// Exhaustive posterior table as CSV.
    Posterior(PosteriorArgs),
    /// Phase-diagram sweep from a JSON config.
    Phase(PhaseArgs),
    /// Exact log-partition probe over a ρ grid.
    FreeEnergy(FreeEnergyArgs),
    /// Oracle verification sweep; exits 1 when a gating check fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Gaussian,
    Er,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, required_if_eq("model", "gaussian"))]
    rho: Option<f64>,
    #[arg(long, required_if_eq("model", "er"))]
    lambda: Option<f64>,
    #[arg(long, required_if_eq("model", "er"))]
    s: Option<f64>,
}

#[derive(Debug, Args)]
struct EnergyArgs {
    #[arg(long)]
    sample: PathBuf,
    /// Compact alignment such as `[1 2 3];[3 1 2]`; the stored truth when omitted.
    #[arg(long)]
    alignment: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Exhaustive,
    Ball,
    Anneal,
    Greedy,
}

#[derive(Debug, Args)]
struct MapArgs {
    #[arg(long)]
    sample: PathBuf,
    #[arg(long, value_enum, default_value = "exhaustive")]
    method: MethodArg,
    /// Ball radius for `--method ball`.
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    #[arg(long, default_value = "d")]
    metric: Metric,
    #[arg(long, default_value_t = malign_core::DEFAULT_ENUMERATION_CAP)]
    cap: u64,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    moves: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    restarts: Option<u32>,
}

#[derive(Debug, Args)]
struct PosteriorArgs {
    #[arg(long)]
    sample: PathBuf,
    #[arg(long, default_value_t = malign_core::DEFAULT_ENUMERATION_CAP)]
    cap: u64,
}

#[derive(Debug, Args)]
struct PhaseArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct FreeEnergyArgs {
    /// JSON config; otherwise the flags below.
    #[arg(long, conflicts_with_all = ["n", "p", "rho", "trials"])]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    p: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 0.9])]
    rho: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    trials: u64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    p_max: Option<usize>,
    #[arg(long)]
    instances: Option<u64>,
    #[arg(long)]
    cross_check: Option<u64>,
    #[arg(long)]
    repetitions: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(path) => malign_harness::phase::write_json(path, value),
        None => {
            let text = serde_json::to_string_pretty(value)?;
            println!("{text}");
            Ok(())
        }
    }
}

fn with_output(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            malign_harness::phase::create_parent(path)?;
            let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
            let mut w = std::io::BufWriter::new(file);
            write(&mut w)?;
            w.flush().map_err(|e| HarnessError::io(path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    }
}

fn sample(cli: &Cli, args: &SampleArgs) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let file = match args.model {
        ModelArg::Gaussian => {
            let params = GaussianParams::new(args.n, args.p, args.rho.unwrap_or_default())?;
            SampleFile::from_gaussian(&sample_gaussian(params, seed)?, seed)
        }
        ModelArg::Er => {
            let params = ErParams::new(args.n, args.p, args.lambda.unwrap_or_default(), args.s.unwrap_or_default())?;
            SampleFile::from_er(&sample_er(params, seed)?, seed)
        }
    };
    emit_json(cli.out.as_deref(), &file)
}

fn energy(cli: &Cli, args: &EnergyArgs) -> Result<()> {
    let loaded = SampleFile::read(&args.sample)?;
    let sigma = match &args.alignment {
        Some(text) => Alignment::parse_compact(text)?,
        None => loaded.truth().clone(),
    };
    #[derive(Serialize)]
    struct Report<T: Serialize> {
        alignment: String,
        #[serde(flatten)]
        energy: T,
    }
    #[derive(Serialize)]
    struct GaussianEnergy {
        hamiltonian: f64,
    }
    let alignment = sigma.to_compact_string();
    match &loaded {
        LoadedSample::Gaussian { obs, .. } => emit_json(
            cli.out.as_deref(),
            &Report {
                alignment,
                energy: GaussianEnergy {
                    hamiltonian: gibbs_gaussian::hamiltonian(&obs.observed, &sigma)?,
                },
            },
        ),
        LoadedSample::Er { obs, .. } => emit_json(
            cli.out.as_deref(),
            &Report {
                alignment,
                energy: gibbs_er::er_log_posterior(&obs.observed, &sigma, &obs.params)?,
            },
        ),
    }
}

fn table(loaded: &LoadedSample, cap: u64) -> Result<PosteriorTable> {
    Ok(match loaded {
        LoadedSample::Gaussian { obs, .. } => gibbs_gaussian::posterior_table(obs, None, cap)?,
        LoadedSample::Er { obs, .. } => gibbs_er::posterior_table(obs, cap)?,
    })
}

fn map(cli: &Cli, args: &MapArgs) -> Result<()> {
    let loaded = SampleFile::read(&args.sample)?;
    let defaults = Schedule::default();
    let schedule = Schedule {
        t0: args.t0.or(defaults.t0),
        moves: args.moves.unwrap_or(defaults.moves),
        gamma: args.gamma.unwrap_or(defaults.gamma),
        restarts: args.restarts.unwrap_or(defaults.restarts),
        ..defaults
    };
    let seed = cli.seed.unwrap_or(0);
    let result: EstimatorResult = match (args.method, &loaded) {
        (MethodArg::Exhaustive, _) => map_exhaustive(&table(&loaded, args.cap)?)?,
        (MethodArg::Ball, _) => ball_optimal(&table(&loaded, args.cap)?, args.r, args.metric)?,
        (MethodArg::Anneal, LoadedSample::Gaussian { obs, .. }) => anneal_gaussian(obs, &schedule, seed)?.result,
        (MethodArg::Greedy, LoadedSample::Gaussian { obs, .. }) => greedy_gaussian(obs, &schedule, seed)?.result,
        (MethodArg::Anneal, LoadedSample::Er { obs, .. }) => anneal_er(obs, &schedule, seed)?.result,
        (MethodArg::Greedy, LoadedSample::Er { obs, .. }) => greedy_er(obs, &schedule, seed)?.result,
    };
    let overlap = score(&result.estimate, loaded.truth())?;
    #[derive(Serialize)]
    struct Report {
        method: String,
        estimate: String,
        score: f64,
        ties: u64,
        iterations: u64,
        exact_hit: bool,
        overlap: malign_core::metrics::OverlapReport,
    }
    emit_json(
        cli.out.as_deref(),
        &Report {
            method: result.method.to_string(),
            estimate: result.estimate.to_compact_string(),
            score: result.score,
            ties: result.ties,
            iterations: result.iterations,
            exact_hit: &result.estimate == loaded.truth(),
            overlap,
        },
    )
}

fn posterior(cli: &Cli, args: &PosteriorArgs) -> Result<()> {
    let loaded = SampleFile::read(&args.sample)?;
    let t = table(&loaded, args.cap)?;
    let target = cli.out.as_deref();
    with_output(target, |w| {
        t.write_csv(w).map_err(|e| HarnessError::io(target.unwrap_or(Path::new("<stdout>")), e))
    })
}

fn required_out<'a>(cli: &'a Cli, fallback: Option<&'a Path>, what: &str) -> Result<&'a Path> {
    cli.out
        .as_deref()
        .or(fallback)
        .ok_or_else(|| HarnessError::Config(format!("{what} needs --out or an `output` path in the config")))
}

fn phase(cli: &Cli, args: &PhaseArgs, threads: usize) -> Result<()> {
    let mut config = ExperimentConfig::from_path(&args.config)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out = required_out(cli, config.output.as_deref(), "phase")?.to_path_buf();
    let started = unix_now();
    let clock = Instant::now();
    let run = run_phase(&config)?;
    write_phase_outputs(&out, &config, &run, threads, started, clock.elapsed().as_secs_f64())?;
    eprintln!(
        "{} trials, {} failed; overlap trend {}",
        run.records.len(),
        run.records.iter().filter(|r| !r.is_ok()).count(),
        if run.trend.ok { "nondecreasing" } else { "violated" }
    );
    Ok(())
}

fn free_energy(cli: &Cli, args: &FreeEnergyArgs) -> Result<bool> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            serde_json::from_str(&text)?
        }
        None => FreeEnergyConfig {
            n: args.n,
            p: args.p,
            rho: args.rho.clone(),
            trials: args.trials,
            seed: 0,
            cap: malign_core::DEFAULT_ENUMERATION_CAP,
        },
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out = required_out(cli, None, "free-energy")?;
    let run = run_free_energy_probe(&config)?;
    write_free_energy_outputs(out, &run)?;
    Ok(run.ok)
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<bool> {
    let opts = VerifyOptions {
        n: args.n,
        p: args.p,
        p_max: args.p_max,
        instances: args.instances,
        cross_check: args.cross_check,
        repetitions: args.repetitions,
        samples: args.samples,
        dim: args.dim,
        radius: args.radius,
        lambda: args.lambda,
        s: args.s,
        seed: cli.seed.unwrap_or(0),
    };
    let report = run_verify(args.suite, &opts)?;
    match cli.out.as_deref() {
        Some(path) => write_verify_outputs(path, &report)?,
        None => write_verify_csv(std::io::stdout().lock(), &report)?,
    }
    eprintln!("{} rows, {} gating failures", report.rows.len(), report.gating_failures());
    Ok(report.passed())
}

fn run(cli: &Cli) -> Result<bool> {
    let env = std::env::var(THREADS_ENV).ok();
    let threads = resolve_threads(cli.threads, env.as_deref())?;
    let pool = build_pool(threads)?;
    pool.install(|| match &cli.command {
        Command::Sample(a) => sample(cli, a).map(|_| true),
        Command::Energy(a) => energy(cli, a).map(|_| true),
        Command::Map(a) => map(cli, a).map(|_| true),
        Command::Posterior(a) => posterior(cli, a).map(|_| true),
        Command::Phase(a) => phase(cli, a, threads).map(|_| true),
        Command::FreeEnergy(a) => free_energy(cli, a),
        Command::Verify(a) => verify(cli, a),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
