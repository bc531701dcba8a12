//! Command-line front end: exact evaluation, Hadamard-test sampling,
//! bracket comparison and circuit sizing for plat-closed colored braids.

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use platjones_core::braid::{self, BraidError, ColoredBraidWord};
use platjones_core::circuitsim::{
    approximate_colored_jones, compile_braid, layout, CircuitError, SampleReport, SimOptions,
};
use platjones_core::invariant::{evaluate, qdim_product, InvariantError};
use platjones_core::kaulrep::enumerate_basis;
use platjones_core::oracle::{compare, OracleError};
use platjones_core::qarith::{Cplx, Level};

const MAX_QUBITS_ENV: &str = "PLATJONES_MAX_QUBITS";

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Mode {
    /// Evaluate the invariant exactly with the dense engine.
    Exact,
    /// Estimate it by Hadamard-test sampling of the compiled circuit.
    Sampled,
    /// Cross-check |V| against the Kauffman-bracket state sum.
    Compare,
    /// Report register and gate counts without simulating.
    CircuitInfo,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

/// Colored Jones polynomials of plat-closed braids at q = exp(2πi/(k+2)).
#[derive(Parser, Debug)]
#[command(name = "platjones", version, about)]
struct Cli {
    /// What to compute.
    #[arg(long, value_enum)]
    mode: Mode,

    /// Level k >= 1; the root of unity is q = exp(2πi/(k+2)).
    #[arg(long)]
    k: u32,

    /// Inline braid, e.g. "strands=4 colors=1/2,1/2,1/2,1/2 word=2 2 2"
    /// (JSON input is accepted too).
    #[arg(long)]
    braid: Option<String>,

    /// Read the braid from a file instead ("-" for stdin).
    #[arg(long, conflicts_with = "braid")]
    braid_file: Option<String>,

    /// Additive precision target for sampled mode.
    #[arg(long)]
    delta: Option<f64>,

    /// Override the Chernoff sample count per axis.
    #[arg(long)]
    samples: Option<u64>,

    /// RNG seed; identical seeds reproduce reports byte for byte.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output format; JSON is canonical, csv emits the convergence trace in
    /// sampled mode.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Number of independently seeded sampling trials (sampled mode).
    #[arg(long, default_value_t = 1)]
    trials: u64,
}

#[derive(Serialize)]
struct ValueOut {
    re: f64,
    im: f64,
    abs: f64,
}

impl From<Cplx> for ValueOut {
    fn from(z: Cplx) -> Self {
        ValueOut { re: z.re, im: z.im, abs: z.norm() }
    }
}

#[derive(Serialize)]
struct ErrorOut {
    code: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ExactReport {
    mode: &'static str,
    k: u32,
    braid: String,
    value: ValueOut,
    qdim_product: f64,
    basis_dimension: usize,
}

#[derive(Serialize)]
struct TrialOut {
    seed: u64,
    estimate: ValueOut,
    abs_error: f64,
}

#[derive(Serialize)]
struct SampledOut {
    mode: &'static str,
    k: u32,
    braid: String,
    value: ValueOut,
    qdim_product: f64,
    basis_dimension: usize,
    delta: f64,
    seed: u64,
    trials: u64,
    estimate: ValueOut,
    abs_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    success_rate: Option<f64>,
    sample_report: SampleReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    trial_estimates: Vec<TrialOut>,
}

#[derive(Serialize)]
struct CompareOut {
    mode: &'static str,
    k: u32,
    braid: String,
    kaul_abs: f64,
    bracket_abs: f64,
    difference: f64,
    pass: bool,
}

#[derive(Serialize)]
struct LetterGates {
    letter: i32,
    q6j_gates: usize,
    phase_gates: usize,
}

#[derive(Serialize)]
struct CircuitInfoOut {
    mode: &'static str,
    k: u32,
    braid: String,
    strands: usize,
    pairs: usize,
    blocks: usize,
    block_width: usize,
    register_qubits: usize,
    qubits_with_ancilla: usize,
    q6j_gates: usize,
    phase_gates: usize,
    per_letter: Vec<LetterGates>,
}

enum Failure {
    Parse(String),
    Admissibility(String),
    SizeGuard(String),
}

impl Failure {
    fn code(&self) -> (&'static str, u8) {
        match self {
            Failure::Parse(_) => ("parse", 1),
            Failure::Admissibility(_) => ("admissibility", 2),
            Failure::SizeGuard(_) => ("size-guard", 3),
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Admissibility(m) | Failure::SizeGuard(m) => m,
        }
    }
}

impl From<BraidError> for Failure {
    fn from(e: BraidError) -> Self {
        match e {
            BraidError::Plat(_) => Failure::Admissibility(e.to_string()),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

impl From<InvariantError> for Failure {
    fn from(e: InvariantError) -> Self {
        Failure::Admissibility(e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Size { .. } => Failure::SizeGuard(e.to_string()),
            other => Failure::Admissibility(other.to_string()),
        }
    }
}

impl From<CircuitError> for Failure {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::TooManyQubits { .. } => Failure::SizeGuard(e.to_string()),
            CircuitError::Domain(_) => Failure::Parse(e.to_string()),
            other => Failure::Admissibility(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (code, exit) = failure.code();
            let error =
                serde_json::json!({ "error": ErrorOut { code, message: failure.message().to_string() } });
            println!("{error}");
            ExitCode::from(exit)
        }
    }
}

fn read_braid(cli: &Cli) -> Result<ColoredBraidWord, Failure> {
    let text = match (&cli.braid, &cli.braid_file) {
        (Some(inline), None) => inline.clone(),
        (None, Some(path)) if path == "-" => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Failure::Parse(format!("cannot read stdin: {e}")))?;
            buf
        }
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| Failure::Parse(format!("cannot read {path}: {e}")))?,
        _ => {
            return Err(Failure::Parse(
                "provide the braid with --braid or --braid-file".to_string(),
            ))
        }
    };
    Ok(braid::parse(&text)?)
}

fn sim_options() -> SimOptions {
    let mut opts = SimOptions::default();
    if let Ok(value) = std::env::var(MAX_QUBITS_ENV) {
        if let Ok(limit) = value.trim().parse::<usize>() {
            opts.max_qubits = limit;
        }
    }
    opts
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let level = Level::new(cli.k.max(1));
    if cli.k < 1 {
        return Err(Failure::Parse("level must satisfy k >= 1".to_string()));
    }
    let braid = read_braid(cli)?;

    match cli.mode {
        Mode::Exact => run_exact(cli, level, &braid),
        Mode::Sampled => run_sampled(cli, level, &braid),
        Mode::Compare => run_compare(cli, level, &braid),
        Mode::CircuitInfo => run_circuit_info(cli, level, &braid),
    }
}

fn run_exact(cli: &Cli, level: Level, braid: &ColoredBraidWord) -> Result<(), Failure> {
    let value = evaluate(level, braid)?;
    let basis = enumerate_basis(level, &braid.bottom_slice());
    let report = ExactReport {
        mode: "exact",
        k: cli.k,
        braid: braid.render(),
        value: value.value.into(),
        qdim_product: qdim_product(level, braid)?,
        basis_dimension: basis.dim(),
    };
    emit(cli, &report, |fmt| match fmt {
        Format::Text => format!(
            "V = {:.12} + {:.12}i  (|V| = {:.12})\nqdim product = {:.12}, basis dimension = {}",
            report.value.re,
            report.value.im,
            report.value.abs,
            report.qdim_product,
            report.basis_dimension
        ),
        Format::Csv => format!(
            "re,im,abs,qdim_product,basis_dimension\n{},{},{},{},{}",
            report.value.re,
            report.value.im,
            report.value.abs,
            report.qdim_product,
            report.basis_dimension
        ),
        Format::Json => unreachable!(),
    });
    Ok(())
}

fn run_sampled(cli: &Cli, level: Level, braid: &ColoredBraidWord) -> Result<(), Failure> {
    if cli.delta.unwrap_or(0.0) <= 0.0 && cli.samples.is_none() {
        return Err(Failure::Parse(
            "sampled mode needs --delta > 0 or --samples".to_string(),
        ));
    }
    let delta = cli.delta.unwrap_or(0.0);
    let opts = sim_options();
    let trials = cli.trials.max(1);
    let mut reports: Vec<(u64, SampleReport)> = Vec::new();
    for t in 0..trials {
        // two RNG streams per trial: the x and y axes consume seed, seed+1
        let seed = cli.seed.wrapping_add(2 * t);
        let report = approximate_colored_jones(level, braid, delta, seed, cli.samples, opts)?;
        reports.push((seed, report));
    }
    let exact = reports[0].1.exact;
    let success_rate = if delta > 0.0 {
        let successes = reports
            .iter()
            .filter(|(_, r)| (r.estimate - r.exact).norm() <= delta)
            .count();
        Some(successes as f64 / trials as f64)
    } else {
        None
    };
    let trial_estimates: Vec<TrialOut> = if trials > 1 {
        reports
            .iter()
            .map(|(seed, r)| TrialOut {
                seed: *seed,
                estimate: r.estimate.into(),
                abs_error: (r.estimate - r.exact).norm(),
            })
            .collect()
    } else {
        Vec::new()
    };
    let basis = enumerate_basis(level, &braid.bottom_slice());
    let first = reports.swap_remove(0).1;
    let report = SampledOut {
        mode: "sampled",
        k: cli.k,
        braid: braid.render(),
        value: exact.into(),
        qdim_product: qdim_product(level, braid)?,
        basis_dimension: basis.dim(),
        delta,
        seed: cli.seed,
        trials,
        estimate: first.estimate.into(),
        abs_error: (first.estimate - exact).norm(),
        success_rate,
        sample_report: first,
        trial_estimates,
    };
    emit(cli, &report, |fmt| match fmt {
        Format::Text => format!(
            "exact V = {:.9} + {:.9}i\nestimate Z = {:.9} + {:.9}i  (|Z - V| = {:.9})\nn = {} samples per axis, delta = {}, seed = {}, trials = {}",
            report.value.re,
            report.value.im,
            report.estimate.re,
            report.estimate.im,
            report.abs_error,
            report.sample_report.n_samples,
            report.delta,
            report.seed,
            report.trials
        ),
        Format::Csv => {
            let mut out = String::from("sample_index,running_re,running_im\n");
            let n = report.sample_report.n_samples;
            let points = report.sample_report.per_batch_means.len() as u64;
            let batch = n.div_ceil(points.max(1));
            for (i, z) in report.sample_report.per_batch_means.iter().enumerate() {
                let idx = (batch * (i as u64 + 1)).min(n);
                out.push_str(&format!("{idx},{},{}\n", z.re, z.im));
            }
            out.pop();
            out
        }
        Format::Json => unreachable!(),
    });
    Ok(())
}

fn run_compare(cli: &Cli, level: Level, braid: &ColoredBraidWord) -> Result<(), Failure> {
    let record = compare(level, braid)?;
    let report = CompareOut {
        mode: "compare",
        k: cli.k,
        braid: braid.render(),
        kaul_abs: record.kaul_abs,
        bracket_abs: record.bracket_abs,
        difference: record.difference,
        pass: record.pass,
    };
    emit(cli, &report, |fmt| match fmt {
        Format::Text => format!(
            "|V| kaul = {:.12}\n|V| bracket = {:.12}\ndifference = {:.3e} -> {}",
            report.kaul_abs,
            report.bracket_abs,
            report.difference,
            if report.pass { "PASS" } else { "FAIL" }
        ),
        Format::Csv => format!(
            "kaul_abs,bracket_abs,difference,pass\n{},{},{},{}",
            report.kaul_abs, report.bracket_abs, report.difference, report.pass
        ),
        Format::Json => unreachable!(),
    });
    Ok(())
}

fn run_circuit_info(cli: &Cli, level: Level, braid: &ColoredBraidWord) -> Result<(), Failure> {
    let circuit = compile_braid(level, braid)?;
    let lay = layout(braid.pairs(), level);
    let per_letter: Vec<LetterGates> = circuit
        .per_letter
        .iter()
        .map(|&(letter, q6j, phase)| LetterGates { letter, q6j_gates: q6j, phase_gates: phase })
        .collect();
    let report = CircuitInfoOut {
        mode: "circuit-info",
        k: cli.k,
        braid: braid.render(),
        strands: braid.strands(),
        pairs: braid.pairs(),
        blocks: lay.blocks.len(),
        block_width: lay.block_width,
        register_qubits: lay.total_qubits(),
        qubits_with_ancilla: lay.qubits_with_ancilla(),
        q6j_gates: per_letter.iter().map(|l| l.q6j_gates).sum(),
        phase_gates: per_letter.iter().map(|l| l.phase_gates).sum(),
        per_letter,
    };
    emit(cli, &report, |fmt| match fmt {
        Format::Text => {
            let mut out = format!(
                "register: {} blocks x {} qubits = {} qubits (+1 ancilla = {})\nq6j gates = {}, phase gates = {}",
                report.blocks,
                report.block_width,
                report.register_qubits,
                report.qubits_with_ancilla,
                report.q6j_gates,
                report.phase_gates
            );
            for l in &report.per_letter {
                out.push_str(&format!(
                    "\nletter {:>3}: {} q6j + {} phase",
                    l.letter, l.q6j_gates, l.phase_gates
                ));
            }
            out
        }
        Format::Csv => {
            let mut out = String::from("letter,q6j_gates,phase_gates\n");
            for l in &report.per_letter {
                out.push_str(&format!("{},{},{}\n", l.letter, l.q6j_gates, l.phase_gates));
            }
            out.pop();
            out
        }
        Format::Json => unreachable!(),
    });
    Ok(())
}

fn emit<T: Serialize>(cli: &Cli, report: &T, render: impl Fn(Format) -> String) {
    match cli.format {
        Format::Json => {
            println!("{}", serde_json::to_string(report).expect("report serialization"))
        }
        other => println!("{}", render(other)),
    }
}
