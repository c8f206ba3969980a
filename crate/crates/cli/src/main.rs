//! `qcopt` command-line front end.
//!
//! Exit status: 0 on success, 1 on input errors, 2 when an internal
//! consistency check fails.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qcopt::analysis::{format_bitstring, parse_bitstring, sample_counts_from, simulate_with_cap, ThresholdPolicy, DEFAULT_QUBIT_CAP};
use qcopt::bench::{self, BenchmarkSpec, Family, Manifest, Placement};
use qcopt::circuit::Circuit;
use qcopt::dag::build_dag;
use qcopt::metrics::{build_report, f_meas, f_sim, MetricsError};
use qcopt::passes::{
    optimize, AnalysisTiming, Backend, ControlRemoval, OptLevel, OptimizationConfig, PassError, RsgSettings,
};
use qcopt::patterns::{mine_patterns, patterns_report_json, MatchLevel};
use qcopt::qasm_io::{emit_circuit_json, emit_qasm, parse_circuit, parse_noise_model, NoiseModel};

#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    fn input(e: impl Display) -> CliError {
        CliError::Input(e.to_string())
    }
}

impl From<PassError> for CliError {
    fn from(e: PassError) -> Self {
        match e {
            PassError::Assertion(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::CostMismatch { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "qcopt", version, about = "Quantum circuit optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the optimization pipeline on a circuit.
    Optimize(OptimizeArgs),
    /// Mine recurring gate sets and print the class report.
    Patterns(PatternArgs),
    /// Classical fidelity between an original and an optimized circuit.
    Fidelity(FidelityArgs),
    /// Print the final measurement distribution of a circuit.
    Simulate(SimulateArgs),
    /// Generate a benchmark circuit or rebuild a corpus directory.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    ExactTracking,
    ExactSv,
    Shots,
}

#[derive(Clone, Copy, ValueEnum)]
enum RemovalArg {
    TwoControl,
    SubsetSearch,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimingArg {
    UpFront,
    Incremental,
}

#[derive(Args)]
struct MiningArgs {
    /// Matching level: 1 types, 2 roles, 3 qubit indices.
    #[arg(long = "rsg-level", value_parser = clap::value_parser!(u8).range(1..=3), default_value_t = 2)]
    level: u8,
    #[arg(long, default_value_t = 5)]
    min_size: usize,
    #[arg(long, default_value_t = 7)]
    max_size: usize,
    /// Longest path allowed inside a pattern, in gates.
    #[arg(long, default_value_t = 7)]
    max_path: usize,
    #[arg(long, default_value_t = 4)]
    min_rep: usize,
    #[arg(long, default_value_t = 2)]
    top_k: usize,
}

impl MiningArgs {
    fn settings(&self) -> RsgSettings {
        RsgSettings {
            level: MatchLevel::from_number(self.level).expect("range checked by clap"),
            min_size: self.min_size,
            max_size: self.max_size,
            max_path: self.max_path,
            min_repetitions: self.min_rep,
            top_k: self.top_k,
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    /// Input circuit (OpenQASM 2.0 or JSON).
    #[arg(long = "in")]
    input: PathBuf,
    /// Initial basis state; character i is qubit i. Defaults to all zeros.
    #[arg(long = "init", default_value = "")]
    init: String,
    #[arg(long, value_enum, default_value = "exact-tracking")]
    backend: BackendArg,
    /// Shots per analysed gate (shots backend only).
    #[arg(long)]
    shots: Option<u64>,
    /// Zero-noise extrapolation on sampled runs.
    #[arg(long)]
    zne: bool,
    /// Readout-error mitigation on sampled runs.
    #[arg(long)]
    mitigate: bool,
    /// static:F, dyn:low|med|high, with optional :cap=X and :floor=Y.
    #[arg(long, default_value = "dyn:med:cap=0.2")]
    threshold: String,
    /// Noise model JSON; defaults to noiseless.
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 1 optimizes everything, 2 protects mined gate sets.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), default_value_t = 1)]
    opt_level: u8,
    #[arg(long, value_enum, default_value = "two-control")]
    control_removal: RemovalArg,
    #[arg(long, value_enum, default_value = "up-front")]
    timing: TimingArg,
    /// Record decisions without rewriting gates.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    mining: MiningArgs,
    /// Output circuit; `.json` writes JSON, anything else OpenQASM.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report JSON path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PatternArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), default_value_t = 2)]
    level: u8,
    #[arg(long, default_value_t = 5)]
    min_size: usize,
    #[arg(long, default_value_t = 7)]
    max_size: usize,
    #[arg(long, default_value_t = 7)]
    max_path: usize,
    #[arg(long, default_value_t = 4)]
    min_rep: usize,
    #[arg(long, default_value_t = 2)]
    top_k: usize,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FidelityArgs {
    #[arg(long)]
    orig: PathBuf,
    #[arg(long)]
    opt: PathBuf,
    #[arg(long = "init", default_value = "")]
    init: String,
    /// Original qubit carried by each optimized qubit, `-` for ancillas
    /// (e.g. `0,2,-`). Defaults to the identity.
    #[arg(long)]
    layout: Option<String>,
    /// Also sample the optimized circuit and print F_meas.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "init", default_value = "")]
    init: String,
    /// Sample instead of computing exact probabilities.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    ControlledHeavy,
    SparseSupport,
    RandomClifford,
    RandomUniversal,
    RepeatedMotif,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlacementArg {
    L2,
    L3,
}

#[derive(Args)]
struct BenchArgs {
    /// Rebuild the corpus in this directory, keeping existing snapshots.
    #[arg(long, conflicts_with_all = ["family", "out"])]
    corpus: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "corpus")]
    family: Option<FamilyArg>,
    #[arg(long, default_value_t = 6)]
    n_qubits: usize,
    /// Gate count (motif size for repeated-motif).
    #[arg(long, default_value_t = 40)]
    n_gates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    reps: usize,
    #[arg(long, value_enum, default_value = "l3")]
    placement: PlacementArg,
    #[arg(long, default_value_t = 0.0)]
    min_amp: f64,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> CliResult<Circuit> {
    parse_circuit(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_noise(path: Option<&Path>) -> CliResult<NoiseModel> {
    match path {
        Some(p) => parse_noise_model(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(NoiseModel::new()),
    }
}

fn emit_for(path: &Path, c: &Circuit) -> CliResult<String> {
    if path.extension().is_some_and(|e| e == "json") {
        Ok(emit_circuit_json(c))
    } else {
        emit_qasm(c).map_err(CliError::input)
    }
}

/// Write every file through a temporary sibling, renaming only once all
/// temporaries are complete.
fn write_all(files: &[(PathBuf, String)]) -> CliResult<()> {
    let mut staged = Vec::new();
    for (path, text) in files {
        let name = path.file_name().ok_or_else(|| CliError::Input(format!("{}: not a file path", path.display())))?;
        let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
        if let Err(e) = fs::write(&tmp, text) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(CliError::Input(format!("{}: {e}", path.display())));
        }
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        fs::rename(&tmp, path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn backend(args: &OptimizeArgs) -> CliResult<Backend> {
    match (args.backend, args.shots) {
        (BackendArg::Shots, Some(shots)) => Ok(Backend::Shots { shots, zne: args.zne, mitigate: args.mitigate }),
        (BackendArg::Shots, None) => Err(CliError::Input("--backend shots requires --shots".into())),
        (_, Some(_)) => Err(CliError::Input("--shots only applies to --backend shots".into())),
        (_, None) if args.zne || args.mitigate => {
            Err(CliError::Input("--zne and --mitigate only apply to --backend shots".into()))
        }
        (BackendArg::ExactTracking, None) => Ok(Backend::ExactTracking),
        (BackendArg::ExactSv, None) => Ok(Backend::ExactStatevector),
    }
}

fn run_optimize(args: OptimizeArgs) -> CliResult<()> {
    let circuit = load_circuit(&args.input)?;
    let threshold: ThresholdPolicy = args.threshold.parse().map_err(CliError::Input)?;
    let cfg = OptimizationConfig {
        opt_level: if args.opt_level == 2 { OptLevel::ProtectRsgs } else { OptLevel::Full },
        backend: backend(&args)?,
        threshold,
        initial_state: args.init.clone(),
        seed: args.seed,
        noise: load_noise(args.noise.as_deref())?,
        control_removal: match args.control_removal {
            RemovalArg::TwoControl => ControlRemoval::TwoControl,
            RemovalArg::SubsetSearch => ControlRemoval::SubsetSearch,
        },
        timing: match args.timing {
            TimingArg::UpFront => AnalysisTiming::UpFront,
            TimingArg::Incremental => AnalysisTiming::Incremental,
        },
        verification: args.verify,
        rsg: args.mining.settings(),
        rsg_protection: None,
    };
    let out = optimize(&circuit, &cfg)?;
    let mut files = Vec::new();
    let text = match &args.out {
        Some(path) => {
            files.push((path.clone(), emit_for(path, &out.circuit)?));
            None
        }
        None => Some(emit_qasm(&out.circuit).unwrap_or_else(|_| emit_circuit_json(&out.circuit))),
    };
    if let Some(path) = &args.report {
        files.push((path.clone(), build_report(&circuit, &out, &cfg)?.to_json()));
    }
    write_all(&files)?;
    if let Some(t) = text {
        print!("{t}");
    }
    Ok(())
}

fn run_patterns(args: PatternArgs) -> CliResult<()> {
    let circuit = load_circuit(&args.input)?;
    let settings = RsgSettings {
        level: MatchLevel::from_number(args.level).expect("range checked by clap"),
        min_size: args.min_size,
        max_size: args.max_size,
        max_path: args.max_path,
        min_repetitions: args.min_rep,
        top_k: args.top_k,
    };
    if settings.min_size < 2 || settings.max_size < settings.min_size || settings.max_path < 1 {
        return Err(CliError::Input("need 2 <= min-size <= max-size and max-path >= 1".into()));
    }
    let classes = mine_patterns(
        &build_dag(&circuit),
        settings.enumeration(),
        settings.level,
        settings.min_repetitions,
        settings.top_k,
    );
    let report = patterns_report_json(&classes);
    match args.out {
        Some(path) => write_all(&[(path, report)]),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

fn parse_layout(s: &str) -> CliResult<Vec<Option<usize>>> {
    s.split(',')
        .map(|t| match t.trim() {
            "-" => Ok(None),
            v => v.parse().map(Some).map_err(|_| CliError::Input(format!("bad layout entry {v:?}"))),
        })
        .collect()
}

fn run_fidelity(args: FidelityArgs) -> CliResult<()> {
    let orig = load_circuit(&args.orig)?;
    let opt = load_circuit(&args.opt)?;
    let layout = match &args.layout {
        Some(s) => parse_layout(s)?,
        None if opt.n_qubits() == orig.n_qubits() => (0..opt.n_qubits()).map(Some).collect(),
        None => {
            return Err(CliError::Input(format!(
                "qubit counts differ ({} vs {}); pass --layout",
                orig.n_qubits(),
                opt.n_qubits()
            )))
        }
    };
    if args.noise.is_some() && args.shots.is_none() {
        return Err(CliError::Input("--noise requires --shots".into()));
    }
    let fs = f_sim(&orig, &opt, &layout, &args.init)?;
    let mut lines = format!("F_sim {fs:.9}\n");
    if let Some(shots) = args.shots {
        let noise = load_noise(args.noise.as_deref())?;
        let fm = f_meas(&orig, &opt, &layout, &args.init, shots, &noise, args.seed)?;
        lines.push_str(&format!("F_meas {fm:.9}\n"));
    }
    print!("{lines}");
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> CliResult<()> {
    let circuit = load_circuit(&args.input)?;
    let n = circuit.n_qubits();
    if !args.init.is_empty() && args.init.len() != n {
        return Err(CliError::Input(format!("--init has {} bits, circuit has {n} qubits", args.init.len())));
    }
    let init = parse_bitstring(&args.init).map_err(CliError::input)?;
    if args.noise.is_some() && args.shots.is_none() {
        return Err(CliError::Input("--noise requires --shots".into()));
    }
    let unitary = circuit.unitary_part();
    let dist: BTreeMap<u64, f64> = match args.shots {
        None => simulate_with_cap(&unitary, init, DEFAULT_QUBIT_CAP)
            .map_err(CliError::input)?
            .probabilities()
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > 1e-12)
            .map(|(i, p)| (i as u64, p))
            .collect(),
        Some(shots) => {
            let noise = load_noise(args.noise.as_deref())?;
            let all: Vec<usize> = (0..n).collect();
            sample_counts_from(&unitary, init, &all, shots, &noise, args.seed)
                .map_err(CliError::input)?
                .frequencies()
        }
    };
    let mut text = String::new();
    for (k, p) in dist {
        text.push_str(&format!("{} {p:.9}\n", format_bitstring(k, n)));
    }
    print!("{text}");
    Ok(())
}

fn run_bench(args: BenchArgs) -> CliResult<()> {
    if let Some(dir) = &args.corpus {
        let previous = Manifest::load(dir).ok();
        let manifest = bench::write_corpus(dir, &bench::default_corpus(), previous.as_ref(), |c| {
            bench::exact_snapshot(c).ok()
        })
        .map_err(CliError::input)?;
        println!("{} entries written to {}", manifest.entries.len(), dir.display());
        return Ok(());
    }
    let family = match args.family.expect("required by clap") {
        FamilyArg::ControlledHeavy => Family::ControlledHeavy,
        FamilyArg::SparseSupport => Family::SparseSupport,
        FamilyArg::RandomClifford => Family::RandomClifford,
        FamilyArg::RandomUniversal => Family::RandomUniversal,
        FamilyArg::RepeatedMotif => Family::RepeatedMotif,
    };
    let spec = BenchmarkSpec {
        motif_repetitions: args.reps,
        min_support_amplitude: args.min_amp,
        placement: match args.placement {
            PlacementArg::L2 => Placement::Level2,
            PlacementArg::L3 => Placement::Level3,
        },
        ..BenchmarkSpec::new(family, args.n_qubits, args.n_gates, args.seed)
    };
    let circuit = bench::generate(&spec).map_err(CliError::input)?;
    match args.out {
        Some(path) => {
            let text = emit_for(&path, &circuit)?;
            write_all(&[(path, text)])
        }
        None => {
            print!("{}", bench::emit(&circuit).map_err(CliError::input)?.0);
            Ok(())
        }
    }
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
    let result = match cli.command {
        Command::Optimize(a) => run_optimize(a),
        Command::Patterns(a) => run_patterns(a),
        Command::Fidelity(a) => run_fidelity(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn internal_failures_map_to_exit_two() {
        assert!(matches!(CliError::from(PassError::Assertion("x".into())), CliError::Internal(_)));
        assert!(matches!(
            CliError::from(MetricsError::CostMismatch { expected: 1, actual: 2 }),
            CliError::Internal(_)
        ));
        assert!(matches!(CliError::from(PassError::Config("x".into())), CliError::Input(_)));
    }

    #[test]
    fn layout_parsing() {
        assert_eq!(parse_layout("0,2,-").unwrap(), vec![Some(0), Some(2), None]);
        assert!(parse_layout("0,,1").is_err());
    }
}
