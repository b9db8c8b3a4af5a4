//! `orthokalman`: run the bundled examples, scenario files, the performance
//! harness and the oracle check from the command line.
//!
//! Exit status: 0 on success, 1 on usage, parse or I/O errors, 2 when the
//! filter or the oracle rejects the problem (the step index is reported on
//! standard error).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orthokalman::scenarios::{self, PerfConfig, Scenario, VarianceMode};
use orthokalman::Error;

/// Relative `--out` paths are resolved against this directory when it is set.
const OUT_DIR_ENV: &str = "ORTHOKALMAN_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "orthokalman",
    version,
    about = "Kalman filtering and smoothing by orthogonal transformations"
)]
struct Cli {
    /// Print run summaries to standard error.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate and run one of the bundled examples.
    Example {
        #[command(subcommand)]
        example: Example,
    },
    /// Run a scenario file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Time filtering with random orthogonal models.
    Perftest(PerftestArgs),
    /// Filter and smooth a scenario file with the engine and the dense
    /// oracle, and print the largest relative discrepancy.
    OracleCheck { file: PathBuf },
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Result CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
    /// Also write the generated scenario as JSON.
    #[arg(long)]
    scenario_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Example {
    /// A rotating 2-D state.
    Rotation {
        /// Rows of the observation matrix; the first two are the identity.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=6))]
        obs_rows: u8,
        /// Exact dynamics and near-exact observations.
        #[arg(long)]
        noiseless: bool,
        #[command(flatten)]
        common: Common,
    },
    /// A scalar with noisy observations and one precise one.
    Variance {
        #[arg(long, value_enum, default_value_t = Mode::Slope)]
        mode: Mode,
        /// Observe step 50 with standard deviation 0.25 instead of 10.
        #[arg(long)]
        precise_at_50: bool,
        #[command(flatten)]
        common: Common,
    },
    /// A state that gains and loses a component.
    AddRemove {
        #[command(flatten)]
        common: Common,
    },
    /// A projectile observed in steps 400 to 600 only.
    Projectile {
        #[command(flatten)]
        common: Common,
    },
    /// Relative offsets of clocks from beacon arrival times.
    ClockOffsets {
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u16).range(1..))]
        clocks: u16,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        packets: u32,
        /// Leave out the pseudo-observation that fixes the common offset.
        #[arg(long)]
        no_pseudo: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Mode {
    RandomWalk,
    Slope,
}

#[derive(Args, Debug)]
struct PerftestArgs {
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    dim: u32,
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    /// Forget steps older than this many; 0 keeps every step.
    #[arg(long, default_value_t = 16)]
    window: usize,
    /// Steps per timing group.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..))]
    group: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smooth the whole run at the end and report its duration.
    #[arg(long)]
    smooth: bool,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Usage(String),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Io(_) | Error::Scenario(_) => {
                Failure::Usage(e.to_string())
            }
            e => Failure::Engine(e),
        }
    }
}

fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(output: &Output, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(p) => {
            let p = resolve(p);
            std::fs::write(&p, text)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(format!("cannot write to standard output: {e}"))),
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Scenario::from_json(&text).map_err(|e| match e {
        Error::Parse { .. } => Failure::Usage(format!("{}: {e}", path.display())),
        e => e.into(),
    })
}

fn run_scenario(scenario: &Scenario, output: &Output, verbose: u8) -> Result<(), Failure> {
    let result = scenarios::run(scenario)?;
    if verbose > 0 {
        let total: f64 = result.steps.iter().map(|s| s.seconds).sum();
        eprintln!(
            "{}: {} steps, {:.3} ms filtering",
            scenario.name,
            result.steps.len(),
            total * 1e3
        );
    }
    emit(output, &result.to_csv())
}

fn example(example: Example, verbose: u8) -> Result<(), Failure> {
    let (scenario, common) = match example {
        Example::Rotation {
            obs_rows,
            noiseless,
            common,
        } => {
            let gen = if noiseless {
                scenarios::gen_rotation_noiseless
            } else {
                scenarios::gen_rotation
            };
            (gen(common.seed, obs_rows as usize), common)
        }
        Example::Variance {
            mode,
            precise_at_50,
            common,
        } => {
            let mode = match mode {
                Mode::RandomWalk => VarianceMode::RandomWalk,
                Mode::Slope => VarianceMode::Slope,
            };
            (
                scenarios::gen_variance(common.seed, mode, precise_at_50),
                common,
            )
        }
        Example::AddRemove { common } => (scenarios::gen_add_remove(common.seed), common),
        Example::Projectile { common } => (scenarios::gen_projectile(common.seed), common),
        Example::ClockOffsets {
            clocks,
            packets,
            no_pseudo,
            common,
        } => (
            scenarios::gen_clock_offsets(
                common.seed,
                clocks as usize,
                packets as usize,
                !no_pseudo,
            ),
            common,
        ),
    };
    if let Some(p) = &common.scenario_out {
        let p = resolve(p);
        std::fs::write(&p, scenario.to_json())
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?;
    }
    run_scenario(&scenario, &common.output, verbose)
}

fn perftest(args: PerftestArgs, verbose: u8) -> Result<(), Failure> {
    let config = PerfConfig {
        dim: args.dim as usize,
        steps: args.steps,
        window: (args.window > 0).then_some(args.window),
        group: args.group as usize,
        seed: args.seed,
        smooth: args.smooth,
    };
    let report = scenarios::perftest(config)?;
    if verbose > 0 || args.smooth {
        eprintln!("max retained steps: {}", report.max_retained);
        if let Some(s) = report.smooth_seconds {
            eprintln!("smoothing: {s:.3} s");
        }
    }
    emit(&args.output, &report.to_csv())
}

fn oracle_check(path: &Path) -> Result<(), Failure> {
    let scenario = load(path)?;
    let r = scenarios::oracle_check(&scenario)?;
    println!("steps: {}", r.steps);
    println!("condition number: {:.3e}", r.condition);
    println!("smoothed estimates: {:.3e}", r.smoothed_state);
    println!("smoothed covariances: {:.3e}", r.smoothed_covariance);
    println!("latest filtered estimate: {:.3e}", r.filtered_latest);
    println!("max relative discrepancy: {:.3e}", r.max());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let verbose = cli.verbose;
    let outcome = match cli.command {
        Command::Example { example: ex } => example(ex, verbose),
        Command::Run { file, output } => {
            load(&file).and_then(|s| run_scenario(&s, &output, verbose))
        }
        Command::Perftest(args) => perftest(args, verbose),
        Command::OracleCheck { file } => oracle_check(&file),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Engine(e)) => {
            // Runner errors carry their step index in the message.
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
