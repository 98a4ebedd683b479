use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use aigsynth::aiger::{
    parse_ascii, partition_inputs, serialize_ascii, validate_spec, AigCircuit,
};
use aigsynth::game::{build_game, solve, SolverOptions};
use aigsynth::harness::{
    judge, load_configs, load_library, render_scoreboard, run_matrix, score,
    write_results_csv, BuiltinVerifier, RunLimits, DEFAULT_TIME_LIMIT_SECONDS,
};
use aigsynth::harness::{emit_report, read_results_csv};
use aigsynth::strategy::{build_solution, ExtractOptions};
use aigsynth::verify::{
    check_invariant, check_syntactic, model_check_forward, Verdict, VerifyLimits,
};

#[derive(Parser)]
#[command(name = "aigsynth", version, about = "Safety synthesis for AIGER specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a controller can keep the error output low forever
    Solve {
        /// Specification in ASCII AIGER, controllable inputs marked by name
        spec: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Solve and write a controller circuit plus a winning-region witness
    Synth {
        spec: PathBuf,
        /// Solution file to write
        #[arg(short, long)]
        output: PathBuf,
        /// Witness file to write (default: <output stem>-witness.aag)
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Skip don't-care minimization of the extracted moves
        #[arg(long)]
        no_restrict: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Check a solution circuit against its specification
    Verify {
        spec: PathBuf,
        solution: PathBuf,
        /// Witness file (default: the solution's `witness:` comment, if any)
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Budget for the fallback model check, in seconds
        #[arg(long)]
        time_limit: Option<u64>,
        /// Node budget for the fallback model check
        #[arg(long)]
        node_limit: Option<usize>,
    },
    /// Run every configured solver over a benchmark directory
    Run {
        /// TOML file with [[config]] tables: id, command, mode
        #[arg(long)]
        configs: PathBuf,
        /// Directory of .aag benchmarks, optionally with benchmarks.toml
        #[arg(long)]
        benchmarks: PathBuf,
        /// Per-run CPU budget in seconds
        #[arg(long, default_value_t = DEFAULT_TIME_LIMIT_SECONDS)]
        cpu_limit: u64,
        /// Per-run wall-clock budget in seconds
        #[arg(long, default_value_t = DEFAULT_TIME_LIMIT_SECONDS)]
        wall_limit: u64,
        /// Per-run address-space cap in megabytes
        #[arg(long)]
        memory_mb: Option<u64>,
        /// Judged records file to write
        #[arg(short, long, default_value = "results.csv")]
        output: PathBuf,
        /// Directory for solution files (default: <output stem>-solutions)
        #[arg(long)]
        scratch: Option<PathBuf>,
    },
    /// Print the scoreboard for a records file
    Score { records: PathBuf },
    /// Write scoreboard, cactus, category, and size tables as CSV
    Report {
        records: PathBuf,
        /// Directory for the CSV files
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct EngineArgs {
    /// Budget for the fixpoint computation, in seconds
    #[arg(long)]
    time_limit: Option<u64>,
    /// Abort once the node table holds more live nodes than this
    #[arg(long)]
    node_limit: Option<usize>,
    /// Quantify and conjoin in separate passes instead of one fused pass
    #[arg(long)]
    no_and_exists: bool,
    /// Disable automatic variable reordering
    #[arg(long)]
    no_reorder: bool,
    /// Keep dead intermediates referenced between fixpoint rounds
    #[arg(long)]
    no_eager_deref: bool,
}

impl EngineArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            use_and_exists: !self.no_and_exists,
            reorder: !self.no_reorder,
            eager_deref: !self.no_eager_deref,
            deadline: self
                .time_limit
                .map(|seconds| Instant::now() + Duration::from_secs(seconds)),
            node_limit: self.node_limit,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("aigsynth: {error:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Solve { spec, engine } => cmd_solve(&spec, &engine),
        Command::Synth { spec, output, witness, no_restrict, engine } => {
            cmd_synth(&spec, &output, witness, no_restrict, &engine)
        }
        Command::Verify { spec, solution, witness, time_limit, node_limit } => {
            cmd_verify(&spec, &solution, witness, time_limit, node_limit)
        }
        Command::Run {
            configs,
            benchmarks,
            cpu_limit,
            wall_limit,
            memory_mb,
            output,
            scratch,
        } => cmd_run(&configs, &benchmarks, cpu_limit, wall_limit, memory_mb, &output, scratch),
        Command::Score { records } => cmd_score(&records),
        Command::Report { records, output } => cmd_report(&records, &output),
    }
}

fn load_circuit(path: &Path) -> Result<AigCircuit> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let circuit =
        parse_ascii(&text).with_context(|| format!("parsing {}", path.display()))?;
    let violations = validate_spec(&circuit);
    if !violations.is_empty() {
        let mut message = format!("{} is not a valid circuit:", path.display());
        for violation in violations {
            message.push_str("\n  ");
            message.push_str(&violation.to_string());
        }
        bail!(message);
    }
    Ok(circuit)
}

fn answer(realizable: bool) -> &'static str {
    if realizable {
        "REALIZABLE"
    } else {
        "UNREALIZABLE"
    }
}

fn cmd_solve(spec_path: &Path, engine: &EngineArgs) -> Result<ExitCode> {
    let circuit = load_circuit(spec_path)?;
    let partition = partition_inputs(&circuit);
    let options = engine.options();
    let mut manager = options.manager();
    let game = build_game(&mut manager, &circuit, &partition);
    match solve(&mut manager, &game, &options) {
        Ok(result) => {
            println!("{}", answer(result.realizable));
            Ok(ExitCode::SUCCESS)
        }
        Err(error) => {
            eprintln!("aigsynth: {error}");
            Ok(ExitCode::from(2))
        }
    }
}

fn default_witness_path(solution: &Path) -> PathBuf {
    let stem = solution
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "solution".to_owned());
    solution.with_file_name(format!("{stem}-witness.aag"))
}

fn cmd_synth(
    spec_path: &Path,
    output: &Path,
    witness: Option<PathBuf>,
    no_restrict: bool,
    engine: &EngineArgs,
) -> Result<ExitCode> {
    let circuit = load_circuit(spec_path)?;
    let partition = partition_inputs(&circuit);
    let options = engine.options();
    let mut manager = options.manager();
    let game = build_game(&mut manager, &circuit, &partition);
    let result = match solve(&mut manager, &game, &options) {
        Ok(result) => result,
        Err(error) => {
            eprintln!("aigsynth: {error}");
            return Ok(ExitCode::from(2));
        }
    };
    if !result.realizable {
        println!("UNREALIZABLE");
        return Ok(ExitCode::SUCCESS);
    }

    let extract = ExtractOptions { use_restrict: !no_restrict };
    let mut solution = build_solution(
        &mut manager,
        &circuit,
        &partition,
        &game,
        result.winning_region,
        &extract,
    );
    let witness_path = witness.unwrap_or_else(|| default_witness_path(output));
    fs::write(&witness_path, serialize_ascii(&solution.witness))
        .with_context(|| format!("writing {}", witness_path.display()))?;
    // Verifiers resolve the comment against the solution's directory, so a
    // sibling witness is named bare and anything else gets an absolute path.
    let reference = if witness_path.parent() == output.parent() {
        witness_path.file_name().unwrap_or_default().to_string_lossy().into_owned()
    } else {
        witness_path
            .canonicalize()
            .with_context(|| format!("resolving {}", witness_path.display()))?
            .display()
            .to_string()
    };
    solution.circuit.comments.push(format!("witness: {reference}"));
    fs::write(output, serialize_ascii(&solution.circuit))
        .with_context(|| format!("writing {}", output.display()))?;
    println!("REALIZABLE");
    eprintln!(
        "wrote {} ({} strategy gates) and {}",
        output.display(),
        solution.strategy_size,
        witness_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn witness_from_comment(solution_path: &Path, solution: &AigCircuit) -> Option<PathBuf> {
    let base = solution_path.parent().unwrap_or_else(|| Path::new("."));
    solution.comments.iter().find_map(|line| {
        let (key, value) = line.split_once(':')?;
        (key.trim() == "witness").then(|| base.join(value.trim()))
    })
}

fn cmd_verify(
    spec_path: &Path,
    solution_path: &Path,
    witness: Option<PathBuf>,
    time_limit: Option<u64>,
    node_limit: Option<usize>,
) -> Result<ExitCode> {
    let spec = load_circuit(spec_path)?;
    let solution = load_circuit(solution_path)?;

    let report = check_syntactic(&spec, &solution);
    if !report.is_clean() {
        for violation in &report.violations {
            eprintln!("aigsynth: interface: {violation}");
        }
        println!("FALSIFIED");
        return Ok(ExitCode::from(1));
    }

    let witness_path = witness.or_else(|| witness_from_comment(solution_path, &solution));
    if let Some(path) = witness_path {
        match fs::read_to_string(&path) {
            Ok(text) => match parse_ascii(&text) {
                Ok(witness) => match check_invariant(&solution, &witness) {
                    Ok(Verdict::Verified) => {
                        println!("VERIFIED");
                        return Ok(ExitCode::SUCCESS);
                    }
                    Ok(Verdict::Inconclusive(reason)) => {
                        eprintln!("aigsynth: witness check: {reason}");
                    }
                    Ok(Verdict::Falsified(_)) => {}
                    Err(error) => eprintln!("aigsynth: witness check: {error}"),
                },
                Err(error) => {
                    eprintln!("aigsynth: witness {}: {error}", path.display());
                }
            },
            Err(error) => {
                eprintln!("aigsynth: witness {}: {error}", path.display());
            }
        }
        eprintln!("aigsynth: falling back to model checking");
    }

    let limits = VerifyLimits {
        deadline: time_limit.map(|seconds| Instant::now() + Duration::from_secs(seconds)),
        node_limit,
    };
    match model_check_forward(&solution, &limits) {
        Verdict::Verified => {
            println!("VERIFIED");
            Ok(ExitCode::SUCCESS)
        }
        Verdict::Falsified(trace) => {
            println!("FALSIFIED");
            print!("{}", trace.render(&solution));
            Ok(ExitCode::from(1))
        }
        Verdict::Inconclusive(reason) => {
            println!("INCONCLUSIVE");
            eprintln!("aigsynth: {reason}");
            Ok(ExitCode::from(2))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    configs_path: &Path,
    benchmarks_dir: &Path,
    cpu_limit: u64,
    wall_limit: u64,
    memory_mb: Option<u64>,
    output: &Path,
    scratch: Option<PathBuf>,
) -> Result<ExitCode> {
    let configs = load_configs(configs_path)
        .with_context(|| format!("loading {}", configs_path.display()))?;
    if configs.is_empty() {
        bail!("{} defines no solver configurations", configs_path.display());
    }
    let library = load_library(benchmarks_dir)
        .with_context(|| format!("loading {}", benchmarks_dir.display()))?;
    if library.is_empty() {
        bail!("no .aag benchmarks under {}", benchmarks_dir.display());
    }

    let limits = RunLimits {
        cpu_limit: Duration::from_secs(cpu_limit),
        wall_limit: Duration::from_secs(wall_limit),
        memory_bytes: memory_mb.map(|mb| mb * 1024 * 1024),
    };
    let scratch = scratch.unwrap_or_else(|| {
        let stem = output
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "results".to_owned());
        output.with_file_name(format!("{stem}-solutions"))
    });
    fs::create_dir_all(&scratch)
        .with_context(|| format!("creating {}", scratch.display()))?;

    let records = run_matrix(&configs, &library, &limits, &scratch);
    let mut verifier = BuiltinVerifier {
        time_budget: Duration::from_secs(wall_limit),
        node_limit: None,
    };
    let judged = judge(records, &library, &mut verifier);
    write_results_csv(&judged, output)
        .with_context(|| format!("writing {}", output.display()))?;
    let board = score(judged);
    print!("{}", render_scoreboard(&board));
    eprintln!("records: {}", output.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_score(records_path: &Path) -> Result<ExitCode> {
    let judged = read_results_csv(records_path)
        .with_context(|| format!("reading {}", records_path.display()))?;
    let board = score(judged);
    print!("{}", render_scoreboard(&board));
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(records_path: &Path, out_dir: &Path) -> Result<ExitCode> {
    let judged = read_results_csv(records_path)
        .with_context(|| format!("reading {}", records_path.display()))?;
    let board = score(judged);
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    emit_report(&board, out_dir)
        .with_context(|| format!("writing report to {}", out_dir.display()))?;
    println!("report written to {}", out_dir.display());
    Ok(ExitCode::SUCCESS)
}
