//! Benchmark campaign machinery.
//!
//! A campaign takes a metadata-carrying benchmark library, a set of named
//! solver configurations, and a time budget; it runs every configuration on
//! every instance in an isolated worker process, judges the collected
//! answers, scores them, and renders CSV reports. Selection, judging, and
//! scoring are deterministic so campaigns can be replayed byte-for-byte.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::aiger::{parse_ascii, AigCircuit};
use crate::verify::{check_invariant, check_syntactic, model_check_forward, Verdict, VerifyLimits};

/// Per-job time budget, in seconds, applied to CPU time in sequential mode
/// and wall time in parallel mode.
pub const DEFAULT_TIME_LIMIT_SECONDS: u64 = 3600;

// ---- benchmark library ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnownStatus {
    Realizable,
    Unrealizable,
    Unknown,
}

impl fmt::Display for KnownStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            KnownStatus::Realizable => "realizable",
            KnownStatus::Unrealizable => "unrealizable",
            KnownStatus::Unknown => "unknown",
        };
        f.write_str(text)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRecord {
    pub path: PathBuf,
    pub category: String,
    pub known_status: KnownStatus,
    /// Fraction of prior solvers that solved the instance, in [0, 1].
    pub difficulty: f64,
}

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("manifest error: {0}")]
    Manifest(#[from] toml::de::Error),
    #[error("{path}: difficulty {value} is outside [0, 1]")]
    Difficulty { path: PathBuf, value: f64 },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Deserialize)]
struct Manifest {
    #[serde(default)]
    benchmark: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct ManifestEntry {
    path: PathBuf,
    category: String,
    status: Option<KnownStatus>,
    difficulty: Option<f64>,
}

/// Metadata carried in AIGER comment lines of the form `key: value`.
/// Unrecognized lines and out-of-range values are ignored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommentMetadata {
    pub status: Option<KnownStatus>,
    pub difficulty: Option<f64>,
    pub category: Option<String>,
}

pub fn comment_metadata(circuit: &AigCircuit) -> CommentMetadata {
    let mut metadata = CommentMetadata::default();
    for line in &circuit.comments {
        let Some((key, value)) = line.split_once(':') else { continue };
        let value = value.trim();
        match key.trim() {
            "status" => {
                metadata.status = match value.to_ascii_lowercase().as_str() {
                    "realizable" => Some(KnownStatus::Realizable),
                    "unrealizable" => Some(KnownStatus::Unrealizable),
                    "unknown" => Some(KnownStatus::Unknown),
                    _ => metadata.status,
                }
            }
            "difficulty" => {
                if let Ok(parsed) = value.parse::<f64>() {
                    if (0.0..=1.0).contains(&parsed) {
                        metadata.difficulty = Some(parsed);
                    }
                }
            }
            "category" => metadata.category = Some(value.to_string()),
            _ => {}
        }
    }
    metadata
}

/// Loads a benchmark library from a directory. A `benchmarks.toml` manifest
/// takes precedence; without one, every `*.aag` file is parsed and its
/// comment-embedded metadata imported. Missing metadata defaults to unknown
/// status and difficulty 0.5.
pub fn load_library(dir: &Path) -> Result<Vec<BenchmarkRecord>, LibraryError> {
    let manifest_path = dir.join("benchmarks.toml");
    if manifest_path.exists() {
        let text = fs::read_to_string(&manifest_path)?;
        let manifest: Manifest = toml::from_str(&text)?;
        let mut records = Vec::with_capacity(manifest.benchmark.len());
        for entry in manifest.benchmark {
            let difficulty = entry.difficulty.unwrap_or(0.5);
            if !(0.0..=1.0).contains(&difficulty) {
                return Err(LibraryError::Difficulty { path: entry.path, value: difficulty });
            }
            records.push(BenchmarkRecord {
                path: dir.join(entry.path),
                category: entry.category,
                known_status: entry.status.unwrap_or(KnownStatus::Unknown),
                difficulty,
            });
        }
        return Ok(records);
    }

    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| path.extension().is_some_and(|ext| ext == "aag"))
        .collect();
    paths.sort();
    let mut records = Vec::with_capacity(paths.len());
    for path in paths {
        let text = fs::read_to_string(&path)?;
        let circuit = parse_ascii(&text)
            .map_err(|e| LibraryError::Parse { path: path.clone(), message: e.to_string() })?;
        let metadata = comment_metadata(&circuit);
        records.push(BenchmarkRecord {
            path,
            category: metadata.category.unwrap_or_else(|| "default".to_string()),
            known_status: metadata.status.unwrap_or(KnownStatus::Unknown),
            difficulty: metadata.difficulty.unwrap_or(0.5),
        });
    }
    Ok(records)
}

// ---- benchmark selection ----

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SelectionError {
    #[error("category {category}: quota {quota} exceeds the {available} available instances")]
    QuotaExceedsAvailability { category: String, quota: usize, available: usize },
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &byte in bytes {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Picks `quota[category]` instances per category, spread evenly over the
/// difficulty range: the category pool is sorted by difficulty (ties broken
/// by a seeded shuffle), cut into as many quantile buckets as the quota
/// asks for, and drained round-robin across buckets until the quota is met.
/// Deterministic for a fixed seed; each category draws from its own stream
/// so quotas can be changed independently.
pub fn select_benchmarks(
    library: &[BenchmarkRecord],
    quota: &BTreeMap<String, usize>,
    seed: u64,
) -> Result<Vec<BenchmarkRecord>, SelectionError> {
    let mut selected = Vec::new();
    for (category, &count) in quota {
        if count == 0 {
            continue;
        }
        let mut pool: Vec<&BenchmarkRecord> =
            library.iter().filter(|b| &b.category == category).collect();
        if pool.len() < count {
            return Err(SelectionError::QuotaExceedsAvailability {
                category: category.clone(),
                quota: count,
                available: pool.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(category.as_bytes()));
        pool.shuffle(&mut rng);
        pool.sort_by(|a, b| a.difficulty.total_cmp(&b.difficulty));
        let n = pool.len();
        let mut taken = 0;
        let mut depth = 0;
        while taken < count {
            for bucket in 0..count {
                let start = bucket * n / count;
                let end = (bucket + 1) * n / count;
                if start + depth < end {
                    selected.push(pool[start + depth].clone());
                    taken += 1;
                    if taken == count {
                        break;
                    }
                }
            }
            depth += 1;
        }
    }
    Ok(selected)
}

// ---- solver configurations ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    Sequential,
    Parallel,
}

impl fmt::Display for ExecutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExecutionMode::Sequential => "sequential",
            ExecutionMode::Parallel => "parallel",
        })
    }
}

/// A named solver command line. `{input}` expands to the benchmark path and
/// `{output}` to a scratch path where the worker may write its solution.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct SolverConfig {
    pub id: String,
    pub command: Vec<String>,
    pub mode: ExecutionMode,
}

pub fn load_configs(path: &Path) -> Result<Vec<SolverConfig>, LibraryError> {
    #[derive(Deserialize)]
    struct ConfigFile {
        #[serde(default)]
        config: Vec<SolverConfig>,
    }
    let text = fs::read_to_string(path)?;
    let file: ConfigFile = toml::from_str(&text)?;
    Ok(file.config)
}

// ---- matrix execution ----

#[derive(Clone, Copy, Debug)]
pub struct RunLimits {
    /// Budget charged in sequential mode.
    pub cpu_limit: Duration,
    /// Budget charged in parallel mode.
    pub wall_limit: Duration,
    /// Address-space cap per worker, if any.
    pub memory_bytes: Option<u64>,
}

impl Default for RunLimits {
    fn default() -> RunLimits {
        RunLimits {
            cpu_limit: Duration::from_secs(DEFAULT_TIME_LIMIT_SECONDS),
            wall_limit: Duration::from_secs(DEFAULT_TIME_LIMIT_SECONDS),
            memory_bytes: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunOutcome {
    Answered { realizable: bool, solution: Option<PathBuf> },
    Timeout,
    Crash,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub config_id: String,
    pub benchmark: PathBuf,
    pub mode: ExecutionMode,
    pub cpu_seconds: f64,
    pub wall_seconds: f64,
    pub outcome: RunOutcome,
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '-' })
        .collect()
}

/// Runs every configuration on every benchmark, one isolated worker process
/// at a time. Solution files land in `scratch`. Workers that cannot be
/// spawned or crash produce crash records; the campaign always completes.
#[cfg(unix)]
pub fn run_matrix(
    configs: &[SolverConfig],
    benchmarks: &[BenchmarkRecord],
    limits: &RunLimits,
    scratch: &Path,
) -> Vec<RunRecord> {
    let mut records = Vec::with_capacity(configs.len() * benchmarks.len());
    for config in configs {
        for (index, benchmark) in benchmarks.iter().enumerate() {
            let solution_path =
                scratch.join(format!("{}-{index:04}.aag", sanitize(&config.id)));
            records.push(exec::run_one(config, &benchmark.path, limits, &solution_path));
        }
    }
    records
}

#[cfg(unix)]
mod exec {
    use super::*;
    use std::os::unix::process::CommandExt;
    use std::process::{Command, Stdio};

    /// Scans captured stdout for the first `REALIZABLE`/`UNREALIZABLE` line;
    /// anything else the worker printed is ignored.
    fn classify(stdout: &str, solution_path: &Path) -> RunOutcome {
        for line in stdout.lines() {
            match line.trim() {
                "REALIZABLE" => {
                    let solution =
                        solution_path.exists().then(|| solution_path.to_path_buf());
                    return RunOutcome::Answered { realizable: true, solution };
                }
                "UNREALIZABLE" => {
                    return RunOutcome::Answered { realizable: false, solution: None }
                }
                _ => {}
            }
        }
        RunOutcome::Crash
    }

    /// CPU seconds used so far by a still-running process, from procfs.
    /// Returns 0 when the stat file is gone (the process just exited).
    fn cpu_seconds_running(pid: libc::pid_t) -> f64 {
        let Ok(stat) = fs::read_to_string(format!("/proc/{pid}/stat")) else { return 0.0 };
        // Fields after the parenthesized command name: state is the first,
        // utime and stime are the 12th and 13th.
        let Some(after_comm) = stat.rsplit_once(')').map(|(_, rest)| rest) else { return 0.0 };
        let fields: Vec<&str> = after_comm.split_whitespace().collect();
        let (Some(utime), Some(stime)) = (fields.get(11), fields.get(12)) else { return 0.0 };
        let ticks: f64 = utime.parse::<f64>().unwrap_or(0.0) + stime.parse::<f64>().unwrap_or(0.0);
        let hz = unsafe { libc::sysconf(libc::_SC_CLK_TCK) };
        if hz <= 0 {
            return 0.0;
        }
        ticks / hz as f64
    }

    /// Non-blocking reap; `Some` once the child has exited, with its rusage.
    fn try_reap(pid: libc::pid_t) -> Option<libc::rusage> {
        let mut status = 0i32;
        let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
        let reaped = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut usage) };
        (reaped == pid).then_some(usage)
    }

    fn reap_blocking(pid: libc::pid_t) -> libc::rusage {
        loop {
            let mut status = 0i32;
            let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
            let reaped = unsafe { libc::wait4(pid, &mut status, 0, &mut usage) };
            if reaped == pid {
                return usage;
            }
            if reaped == -1 && io::Error::last_os_error().kind() != io::ErrorKind::Interrupted {
                return unsafe { std::mem::zeroed() };
            }
        }
    }

    fn rusage_cpu_seconds(usage: &libc::rusage) -> f64 {
        let user = usage.ru_utime.tv_sec as f64 + usage.ru_utime.tv_usec as f64 * 1e-6;
        let system = usage.ru_stime.tv_sec as f64 + usage.ru_stime.tv_usec as f64 * 1e-6;
        user + system
    }

    pub(super) fn run_one(
        config: &SolverConfig,
        benchmark: &Path,
        limits: &RunLimits,
        solution_path: &Path,
    ) -> RunRecord {
        let crash = |cpu: f64, wall: f64| RunRecord {
            config_id: config.id.clone(),
            benchmark: benchmark.to_path_buf(),
            mode: config.mode,
            cpu_seconds: cpu,
            wall_seconds: wall,
            outcome: RunOutcome::Crash,
        };
        let argv: Vec<String> = config
            .command
            .iter()
            .map(|part| {
                part.replace("{input}", &benchmark.to_string_lossy())
                    .replace("{output}", &solution_path.to_string_lossy())
            })
            .collect();
        let Some((program, args)) = argv.split_first() else { return crash(0.0, 0.0) };

        let mut command = Command::new(program);
        command.args(args).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::null());
        let memory_bytes = limits.memory_bytes;
        unsafe {
            // Workers get their own process group so a timeout kill reaches
            // any helpers they spawned.
            command.pre_exec(move || {
                libc::setpgid(0, 0);
                if let Some(bytes) = memory_bytes {
                    let cap = libc::rlimit { rlim_cur: bytes, rlim_max: bytes };
                    libc::setrlimit(libc::RLIMIT_AS, &cap);
                }
                Ok(())
            });
        }

        let start = Instant::now();
        let mut child = match command.spawn() {
            Ok(child) => child,
            Err(_) => return crash(0.0, start.elapsed().as_secs_f64()),
        };
        let pid = child.id() as libc::pid_t;
        let mut stdout_pipe = child.stdout.take().expect("stdout was piped");
        let reader = std::thread::spawn(move || {
            let mut buffer = String::new();
            let _ = stdout_pipe.read_to_string(&mut buffer);
            buffer
        });

        let limit = match config.mode {
            ExecutionMode::Sequential => limits.cpu_limit,
            ExecutionMode::Parallel => limits.wall_limit,
        };
        let mut killed = false;
        let usage = loop {
            if let Some(usage) = try_reap(pid) {
                break usage;
            }
            let spent = match config.mode {
                ExecutionMode::Sequential => cpu_seconds_running(pid),
                ExecutionMode::Parallel => start.elapsed().as_secs_f64(),
            };
            if spent >= limit.as_secs_f64() {
                killed = true;
                unsafe { libc::kill(-pid, libc::SIGKILL) };
                break reap_blocking(pid);
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let wall_seconds = start.elapsed().as_secs_f64();
        let cpu_seconds = rusage_cpu_seconds(&usage);
        let stdout = reader.join().unwrap_or_default();

        let spent = match config.mode {
            ExecutionMode::Sequential => cpu_seconds,
            ExecutionMode::Parallel => wall_seconds,
        };
        let outcome = if killed || spent >= limit.as_secs_f64() {
            RunOutcome::Timeout
        } else {
            classify(&stdout, solution_path)
        };
        RunRecord {
            config_id: config.id.clone(),
            benchmark: benchmark.to_path_buf(),
            mode: config.mode,
            cpu_seconds,
            wall_seconds,
            outcome,
        }
    }
}

// ---- judging ----

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictSummary {
    Verified,
    Falsified,
    Inconclusive,
}

impl fmt::Display for VerdictSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictSummary::Verified => "verified",
            VerdictSummary::Falsified => "falsified",
            VerdictSummary::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Judgment {
    Correct,
    Wrong,
    Unsolved,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Judgment::Correct => "correct",
            Judgment::Wrong => "wrong",
            Judgment::Unsolved => "unsolved",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JudgedRecord {
    pub run: RunRecord,
    pub category: String,
    pub judgment: Judgment,
    pub verdict: Option<VerdictSummary>,
    pub strategy_size: Option<usize>,
}

pub struct VerificationOutcome {
    pub verdict: VerdictSummary,
    pub strategy_size: Option<usize>,
}

/// Checks a claimed solution against its specification.
pub trait SolutionVerifier {
    fn verify(&mut self, specification: &Path, solution: &Path) -> VerificationOutcome;
}

/// In-process verifier: interface check, then the witness-based invariant
/// check when the solution names one, with full forward model checking as
/// the fallback.
pub struct BuiltinVerifier {
    pub time_budget: Duration,
    pub node_limit: Option<usize>,
}

impl Default for BuiltinVerifier {
    fn default() -> BuiltinVerifier {
        BuiltinVerifier {
            time_budget: Duration::from_secs(DEFAULT_TIME_LIMIT_SECONDS),
            node_limit: None,
        }
    }
}

fn witness_path(solution_path: &Path, solution: &AigCircuit) -> Option<PathBuf> {
    let base = solution_path.parent().unwrap_or_else(|| Path::new("."));
    solution.comments.iter().find_map(|line| {
        let (key, value) = line.split_once(':')?;
        (key.trim() == "witness").then(|| base.join(value.trim()))
    })
}

impl SolutionVerifier for BuiltinVerifier {
    fn verify(&mut self, specification: &Path, solution: &Path) -> VerificationOutcome {
        let failed = VerificationOutcome {
            verdict: VerdictSummary::Falsified,
            strategy_size: None,
        };
        let Ok(spec_text) = fs::read_to_string(specification) else { return failed };
        let Ok(solution_text) = fs::read_to_string(solution) else { return failed };
        let (Ok(spec), Ok(circuit)) = (parse_ascii(&spec_text), parse_ascii(&solution_text))
        else {
            return failed;
        };
        let strategy_size = Some(circuit.ands.len().saturating_sub(spec.ands.len()));
        if !check_syntactic(&spec, &circuit).is_clean() {
            return VerificationOutcome { verdict: VerdictSummary::Falsified, strategy_size };
        }
        let deadline = Instant::now() + self.time_budget;

        if let Some(witness_file) = witness_path(solution, &circuit) {
            if let Ok(witness_text) = fs::read_to_string(&witness_file) {
                if let Ok(witness) = parse_ascii(&witness_text) {
                    if matches!(check_invariant(&circuit, &witness), Ok(Verdict::Verified)) {
                        return VerificationOutcome {
                            verdict: VerdictSummary::Verified,
                            strategy_size,
                        };
                    }
                }
            }
        }
        let limits = VerifyLimits { deadline: Some(deadline), node_limit: self.node_limit };
        let verdict = match model_check_forward(&circuit, &limits) {
            Verdict::Verified => VerdictSummary::Verified,
            Verdict::Falsified(_) => VerdictSummary::Falsified,
            Verdict::Inconclusive(_) => VerdictSummary::Inconclusive,
        };
        VerificationOutcome { verdict, strategy_size }
    }
}

/// Strict majority over the answering configurations; `None` on a tie or
/// when nothing answered.
fn majority(votes: &(usize, usize)) -> Option<bool> {
    let (realizable, unrealizable) = *votes;
    let total = realizable + unrealizable;
    if 2 * realizable > total {
        Some(true)
    } else if 2 * unrealizable > total {
        Some(false)
    } else {
        None
    }
}

/// Judges every record. Realizability claims are checked against the stored
/// status when present, else against the strict majority of answering
/// configurations. Claims carrying a solution must have it verified: a
/// verified solution is correct on its own, a failed verification leaves the
/// instance unsolved. A claim is wrong only when ground truth or a majority
/// contradicts it.
pub fn judge(
    records: Vec<RunRecord>,
    library: &[BenchmarkRecord],
    verifier: &mut dyn SolutionVerifier,
) -> Vec<JudgedRecord> {
    let by_path: HashMap<&Path, &BenchmarkRecord> =
        library.iter().map(|b| (b.path.as_path(), b)).collect();
    let mut votes: HashMap<PathBuf, (usize, usize)> = HashMap::new();
    for record in &records {
        if let RunOutcome::Answered { realizable, .. } = record.outcome {
            let entry = votes.entry(record.benchmark.clone()).or_default();
            if realizable {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    let truth_of = |path: &Path| -> Option<bool> {
        match by_path.get(path).map(|b| b.known_status) {
            Some(KnownStatus::Realizable) => Some(true),
            Some(KnownStatus::Unrealizable) => Some(false),
            _ => votes.get(path).and_then(majority),
        }
    };

    let mut judged = Vec::with_capacity(records.len());
    for run in records {
        let category = by_path
            .get(run.benchmark.as_path())
            .map(|b| b.category.clone())
            .unwrap_or_else(|| "default".to_string());
        let truth = truth_of(&run.benchmark);
        let (judgment, verdict, strategy_size) = match &run.outcome {
            RunOutcome::Timeout | RunOutcome::Crash => (Judgment::Unsolved, None, None),
            RunOutcome::Answered { realizable, solution } => {
                if truth == Some(!realizable) {
                    (Judgment::Wrong, None, None)
                } else if !realizable {
                    let judgment =
                        if truth == Some(false) { Judgment::Correct } else { Judgment::Unsolved };
                    (judgment, None, None)
                } else if let Some(solution_file) = solution {
                    let outcome = verifier.verify(&run.benchmark, solution_file);
                    let judgment = if outcome.verdict == VerdictSummary::Verified {
                        Judgment::Correct
                    } else {
                        Judgment::Unsolved
                    };
                    (judgment, Some(outcome.verdict), outcome.strategy_size)
                } else {
                    let judgment =
                        if truth == Some(true) { Judgment::Correct } else { Judgment::Unsolved };
                    (judgment, None, None)
                }
            }
        };
        judged.push(JudgedRecord { run, category, judgment, verdict, strategy_size });
    }
    judged
}

// ---- scoring ----

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigScore {
    pub config_id: String,
    pub mode: ExecutionMode,
    pub solved: usize,
    /// Correct answers no other configuration produced.
    pub unique: usize,
    pub wrong: usize,
    /// solved − 4·wrong.
    pub points: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategorySolved {
    pub config_id: String,
    pub category: String,
    pub solved: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CactusPoint {
    pub config_id: String,
    pub rank: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scoreboard {
    /// Sorted by points descending, ties by configuration id.
    pub configs: Vec<ConfigScore>,
    pub categories: Vec<CategorySolved>,
    pub cactus: Vec<CactusPoint>,
    pub records: Vec<JudgedRecord>,
}

/// The time a record is charged: CPU seconds in sequential mode, wall
/// seconds in parallel mode.
pub fn charged_seconds(record: &RunRecord) -> f64 {
    match record.mode {
        ExecutionMode::Sequential => record.cpu_seconds,
        ExecutionMode::Parallel => record.wall_seconds,
    }
}

pub fn score(judged: Vec<JudgedRecord>) -> Scoreboard {
    let mut modes: BTreeMap<String, ExecutionMode> = BTreeMap::new();
    let mut solved: BTreeMap<String, usize> = BTreeMap::new();
    let mut wrong: BTreeMap<String, usize> = BTreeMap::new();
    let mut solvers_of: BTreeMap<&Path, Vec<&str>> = BTreeMap::new();
    let mut categories: BTreeSet<String> = BTreeSet::new();
    let mut per_category: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut times: BTreeMap<String, Vec<f64>> = BTreeMap::new();

    for record in &judged {
        let id = record.run.config_id.clone();
        modes.entry(id.clone()).or_insert(record.run.mode);
        solved.entry(id.clone()).or_default();
        wrong.entry(id.clone()).or_default();
        categories.insert(record.category.clone());
        match record.judgment {
            Judgment::Correct => {
                *solved.get_mut(&id).unwrap() += 1;
                solvers_of.entry(record.run.benchmark.as_path()).or_default().push(&record.run.config_id);
                *per_category.entry((id.clone(), record.category.clone())).or_default() += 1;
                times.entry(id).or_default().push(charged_seconds(&record.run));
            }
            Judgment::Wrong => *wrong.get_mut(&id).unwrap() += 1,
            Judgment::Unsolved => {}
        }
    }

    let mut unique: BTreeMap<&str, usize> = BTreeMap::new();
    for solvers in solvers_of.values() {
        if let [only] = solvers.as_slice() {
            *unique.entry(only).or_default() += 1;
        }
    }

    let mut configs: Vec<ConfigScore> = modes
        .iter()
        .map(|(id, &mode)| {
            let solved = solved[id];
            let wrong = wrong[id];
            ConfigScore {
                config_id: id.clone(),
                mode,
                solved,
                unique: unique.get(id.as_str()).copied().unwrap_or(0),
                wrong,
                points: solved as i64 - 4 * wrong as i64,
            }
        })
        .collect();
    configs.sort_by(|a, b| b.points.cmp(&a.points).then_with(|| a.config_id.cmp(&b.config_id)));

    let category_rows = configs
        .iter()
        .flat_map(|config| {
            categories.iter().map(|category| CategorySolved {
                config_id: config.config_id.clone(),
                category: category.clone(),
                solved: per_category
                    .get(&(config.config_id.clone(), category.clone()))
                    .copied()
                    .unwrap_or(0),
            })
        })
        .collect();

    let mut cactus = Vec::new();
    for config in &configs {
        if let Some(series) = times.get_mut(&config.config_id) {
            series.sort_by(f64::total_cmp);
            for (rank, &seconds) in series.iter().enumerate() {
                cactus.push(CactusPoint {
                    config_id: config.config_id.clone(),
                    rank: rank + 1,
                    seconds,
                });
            }
        }
    }

    Scoreboard { configs, categories: category_rows, cactus, records: judged }
}

// ---- reports ----

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{file}:{line}: {message}")]
    BadRow { file: PathBuf, line: usize, message: String },
}

fn seconds_field(value: f64) -> String {
    format!("{value:.3}")
}

const RESULTS_HEADER: [&str; 12] = [
    "config",
    "benchmark",
    "category",
    "mode",
    "cpu_seconds",
    "wall_seconds",
    "outcome",
    "answer",
    "solution",
    "judgment",
    "verdict",
    "strategy_size",
];

pub fn write_results_csv(records: &[JudgedRecord], path: &Path) -> Result<(), ReportError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(RESULTS_HEADER)?;
    for record in records {
        let (outcome, answer, solution) = match &record.run.outcome {
            RunOutcome::Answered { realizable, solution } => (
                "answered",
                if *realizable { "realizable" } else { "unrealizable" }.to_string(),
                solution.as_ref().map(|p| p.to_string_lossy().into_owned()).unwrap_or_default(),
            ),
            RunOutcome::Timeout => ("timeout", String::new(), String::new()),
            RunOutcome::Crash => ("crash", String::new(), String::new()),
        };
        writer.write_record([
            record.run.config_id.as_str(),
            &record.run.benchmark.to_string_lossy(),
            &record.category,
            &record.run.mode.to_string(),
            &seconds_field(record.run.cpu_seconds),
            &seconds_field(record.run.wall_seconds),
            outcome,
            &answer,
            &solution,
            &record.judgment.to_string(),
            &record.verdict.map(|v| v.to_string()).unwrap_or_default(),
            &record.strategy_size.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    writer.flush().map_err(io::Error::from)?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<JudgedRecord>, ReportError> {
    let bad = |line: usize, message: &str| ReportError::BadRow {
        file: path.to_path_buf(),
        line,
        message: message.to_string(),
    };
    let mut reader = csv::Reader::from_path(path)?;
    let mut records = Vec::new();
    for (index, row) in reader.records().enumerate() {
        let line = index + 2;
        let row = row?;
        if row.len() != RESULTS_HEADER.len() {
            return Err(bad(line, "wrong column count"));
        }
        let field = |i: usize| row.get(i).unwrap_or_default();
        let mode = match field(3) {
            "sequential" => ExecutionMode::Sequential,
            "parallel" => ExecutionMode::Parallel,
            other => return Err(bad(line, &format!("unknown mode {other:?}"))),
        };
        let cpu_seconds =
            field(4).parse::<f64>().map_err(|_| bad(line, "bad cpu_seconds"))?;
        let wall_seconds =
            field(5).parse::<f64>().map_err(|_| bad(line, "bad wall_seconds"))?;
        let outcome = match field(6) {
            "timeout" => RunOutcome::Timeout,
            "crash" => RunOutcome::Crash,
            "answered" => {
                let realizable = match field(7) {
                    "realizable" => true,
                    "unrealizable" => false,
                    other => return Err(bad(line, &format!("unknown answer {other:?}"))),
                };
                let solution = match field(8) {
                    "" => None,
                    text => Some(PathBuf::from(text)),
                };
                RunOutcome::Answered { realizable, solution }
            }
            other => return Err(bad(line, &format!("unknown outcome {other:?}"))),
        };
        let judgment = match field(9) {
            "correct" => Judgment::Correct,
            "wrong" => Judgment::Wrong,
            "unsolved" => Judgment::Unsolved,
            other => return Err(bad(line, &format!("unknown judgment {other:?}"))),
        };
        let verdict = match field(10) {
            "" => None,
            "verified" => Some(VerdictSummary::Verified),
            "falsified" => Some(VerdictSummary::Falsified),
            "inconclusive" => Some(VerdictSummary::Inconclusive),
            other => return Err(bad(line, &format!("unknown verdict {other:?}"))),
        };
        let strategy_size = match field(11) {
            "" => None,
            text => Some(text.parse::<usize>().map_err(|_| bad(line, "bad strategy_size"))?),
        };
        records.push(JudgedRecord {
            run: RunRecord {
                config_id: field(0).to_string(),
                benchmark: PathBuf::from(field(1)),
                mode,
                cpu_seconds,
                wall_seconds,
                outcome,
            },
            category: field(2).to_string(),
            judgment,
            verdict,
            strategy_size,
        });
    }
    Ok(records)
}

/// Writes `results.csv`, `scoreboard.csv`, `cactus.csv`, `categories.csv`,
/// and `sizes.csv` into `out_dir`. Output is deterministic: the same board
/// produces identical bytes.
pub fn emit_report(board: &Scoreboard, out_dir: &Path) -> Result<(), ReportError> {
    fs::create_dir_all(out_dir)?;
    write_results_csv(&board.records, &out_dir.join("results.csv"))?;

    let mut scoreboard = csv::Writer::from_path(out_dir.join("scoreboard.csv"))?;
    scoreboard.write_record(["config", "mode", "solved", "unique", "wrong", "points"])?;
    for config in &board.configs {
        scoreboard.write_record([
            config.config_id.as_str(),
            &config.mode.to_string(),
            &config.solved.to_string(),
            &config.unique.to_string(),
            &config.wrong.to_string(),
            &config.points.to_string(),
        ])?;
    }
    scoreboard.flush().map_err(io::Error::from)?;

    let mut cactus = csv::Writer::from_path(out_dir.join("cactus.csv"))?;
    cactus.write_record(["config", "rank", "seconds"])?;
    for point in &board.cactus {
        cactus.write_record([
            point.config_id.as_str(),
            &point.rank.to_string(),
            &seconds_field(point.seconds),
        ])?;
    }
    cactus.flush().map_err(io::Error::from)?;

    let mut categories = csv::Writer::from_path(out_dir.join("categories.csv"))?;
    categories.write_record(["config", "category", "solved"])?;
    for row in &board.categories {
        categories.write_record([
            row.config_id.as_str(),
            &row.category,
            &row.solved.to_string(),
        ])?;
    }
    categories.flush().map_err(io::Error::from)?;

    let mut sizes = csv::Writer::from_path(out_dir.join("sizes.csv"))?;
    sizes.write_record(["config", "benchmark", "strategy_size"])?;
    for record in &board.records {
        let realizable_answer = matches!(
            record.run.outcome,
            RunOutcome::Answered { realizable: true, .. }
        );
        if record.judgment == Judgment::Correct && realizable_answer {
            if let Some(size) = record.strategy_size {
                sizes.write_record([
                    record.run.config_id.as_str(),
                    &record.run.benchmark.to_string_lossy(),
                    &size.to_string(),
                ])?;
            }
        }
    }
    sizes.flush().map_err(io::Error::from)?;
    Ok(())
}

/// Renders the scoreboard as an aligned text table.
pub fn render_scoreboard(board: &Scoreboard) -> String {
    let mut out = String::new();
    let _ = writeln!(
        &mut out,
        "{:<24} {:>10} {:>7} {:>7} {:>6} {:>7}",
        "config", "mode", "solved", "unique", "wrong", "points"
    );
    for config in &board.configs {
        let _ = writeln!(
            &mut out,
            "{:<24} {:>10} {:>7} {:>7} {:>6} {:>7}",
            config.config_id,
            config.mode.to_string(),
            config.solved,
            config.unique,
            config.wrong,
            config.points
        );
    }
    out
}
