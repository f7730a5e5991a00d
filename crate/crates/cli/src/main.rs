use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use extsum::trace::Algorithm;
use extsum_cli::commands;
use extsum_cli::config::{parse_real, OutputFormat, PartialConfig, Real, ScheduleFields, StrategyName, SEED_ENV};

#[derive(Parser)]
#[command(version, about = "Extended forward-backward splitting runs and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more configurations and write their traces
    Run(RunArgs),
    /// Check the step-size relations of a power schedule
    ValidateSchedule {
        #[arg(long, default_value = "1", allow_negative_numbers = true, value_parser = parse_real)]
        c: f64,
        #[arg(long, allow_negative_numbers = true, value_parser = parse_real)]
        p: f64,
        #[arg(long, allow_negative_numbers = true, value_parser = parse_real)]
        q: f64,
    },
    /// Check the hypotheses on a trace file and print the report as JSON
    Diagnose {
        trace: PathBuf,
        /// Builtin problem the trace belongs to (read from JSON metadata otherwise)
        #[arg(long)]
        problem: Option<String>,
    },
    /// List builtin problems
    ListProblems {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Efb,
    ProjectedEpsSubgrad,
    Passty,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    MinNorm,
    Boundary,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; repeat to run a sweep
    #[arg(long = "config")]
    configs: Vec<PathBuf>,
    /// Number of configs run concurrently
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmArg>,
    #[arg(long, allow_negative_numbers = true, value_parser = parse_real)]
    c: Option<f64>,
    #[arg(long, allow_negative_numbers = true, value_parser = parse_real)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true, value_parser = parse_real)]
    q: Option<f64>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Run even if the schedule fails validation
    #[arg(long)]
    unsafe_schedule: bool,
    #[arg(long, allow_negative_numbers = true, value_parser = parse_real)]
    early_stop_tol: Option<f64>,
}

impl RunArgs {
    fn overrides(&self) -> PartialConfig {
        let schedule = (self.c.is_some() || self.p.is_some() || self.q.is_some()).then(|| ScheduleFields {
            c: self.c.map(Real),
            p: self.p.map(Real),
            q: self.q.map(Real),
        });
        PartialConfig {
            problem_id: self.problem.clone(),
            algorithm: self.algorithm.map(|a| match a {
                AlgorithmArg::Efb => Algorithm::Efb,
                AlgorithmArg::ProjectedEpsSubgrad => Algorithm::ProjectedEpsSubgrad,
                AlgorithmArg::Passty => Algorithm::Passty,
            }),
            schedule,
            strategy: self.strategy.map(|s| match s {
                StrategyArg::MinNorm => StrategyName::MinNorm,
                StrategyArg::Boundary => StrategyName::Boundary,
                StrategyArg::Random => StrategyName::Random,
            }),
            seed: self.seed,
            max_iter: self.max_iter,
            record_every: self.record_every,
            output_path: self.output.clone(),
            output_format: self.format.map(|f| match f {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            }),
            unsafe_schedule: self.unsafe_schedule.then_some(true),
            early_stop_tol: self.early_stop_tol.map(Real),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match cli.command {
        Command::Run(args) => commands::cmd_run(&args.configs, args.overrides(), args.jobs, &mut out, &mut err),
        Command::ValidateSchedule { c, p, q } => commands::cmd_validate_schedule(c, p, q, &mut out, &mut err),
        Command::Diagnose { trace, problem } => commands::cmd_diagnose(&trace, problem.as_deref(), &mut out, &mut err),
        Command::ListProblems { json } => commands::cmd_list_problems(json, &mut out),
    };
    ExitCode::from(code)
}
