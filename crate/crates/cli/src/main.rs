use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bswl_core::circle::WitnessConstants;
use bswl_core::construction::{
    cyclic_pair, truncation_defect_report, LatticePoint, Truncation, TruncationMode, Window,
};
use bswl_core::experiment::{persist_records, probe_states, run_directory, run_protocol, LabeledState, ProtocolStep};
use bswl_core::io::{read_matrix, write_matrix};
use bswl_core::operator::{defect_report, NormKind, StateVector, UnitaryPair};
use bswl_core::search::{optimize, scan_to_csv, tightness_scan, SearchConfig};
use bswl_core::witness::{verify_exact_implication, verify_quantitative_at};

mod config;
mod manifest;

use manifest::{write_atomic, FileDigest, RunManifest};

const SUBCOMMANDS: &[&str] = &["nd", "verify", "construct", "search", "scan", "experiment"];

#[derive(Parser, Debug)]
#[command(
    name = "bswl",
    version,
    about = "Dimension witnesses from V^-1 U^2 V = U^3",
    args_override_self = true
)]
struct Cli {
    /// Seed for every random draw of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory; defaults to $BSWL_RUNS_DIR (or ./runs)/<timestamp>-<seed>.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// N_d, the relation-defect threshold and the bound coefficient.
    Nd(NdArgs),
    /// Check a pair of matrix files.
    Verify(VerifyArgs),
    /// Build an exact cyclic pair or a truncated lattice pair.
    Construct(ConstructArgs),
    /// Pattern search for large commutator defect at small relation defect.
    Search(SearchArgs),
    /// Best commutator defect under a grid of relation-defect budgets.
    Scan(ScanArgs),
    /// Simulated swap-test protocol.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug, Serialize)]
struct NdArgs {
    #[arg(long, default_value_t = 1)]
    from: i64,
    #[arg(long, default_value_t = 6)]
    to: i64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VerifyMode {
    Exact,
    Quantitative,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    u: PathBuf,
    #[arg(long)]
    v: PathBuf,
    #[arg(long, value_enum, default_value_t = VerifyMode::Quantitative)]
    mode: VerifyMode,
    /// Relation-defect tolerance for exact mode.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Dimension bound for quantitative mode; defaults to the matrix size.
    #[arg(long)]
    d: Option<u32>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Cyclic,
    Lattice,
    Files,
}

#[derive(Args, Debug, Serialize)]
struct PairArgs {
    #[arg(long, value_enum, default_value_t = Kind::Cyclic)]
    kind: Kind,
    /// Cyclic group order, coprime to 6.
    #[arg(long, default_value_t = 7)]
    length: u64,
    #[arg(long, default_value_t = 3)]
    cols: u64,
    #[arg(long, default_value_t = 6)]
    half_height: i64,
    #[arg(long, default_value = "composed")]
    mode: TruncationMode,
    /// Matrix files for `--kind files`.
    #[arg(long)]
    u: Option<PathBuf>,
    #[arg(long)]
    v: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ConstructArgs {
    #[command(flatten)]
    pair: PairArgs,
}

#[derive(Args, Debug, Serialize)]
struct SearchParams {
    #[arg(long, default_value_t = 2000)]
    max_evaluations: usize,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 0.25)]
    initial_step: f64,
    #[arg(long, default_value_t = 0.5)]
    shrink: f64,
    #[arg(long, default_value_t = 1e-9)]
    min_step: f64,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Switches to constrained mode: maximize δ subject to ε ≤ budget.
    #[arg(long)]
    epsilon_budget: Option<f64>,
    #[command(flatten)]
    params: SearchParams,
}

#[derive(Args, Debug, Serialize)]
struct ScanArgs {
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Comma-separated budgets; defaults to multiples of the threshold.
    #[arg(long)]
    grid: Option<String>,
    #[command(flatten)]
    params: SearchParams,
}

#[derive(Args, Debug, Serialize)]
struct ExperimentArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Swap tests per record.
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Random states added to the computational basis for step (i).
    #[arg(long, default_value_t = 10)]
    random_states: usize,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Nd(_) => "nd",
            Command::Verify(_) => "verify",
            Command::Construct(_) => "construct",
            Command::Search(_) => "search",
            Command::Scan(_) => "scan",
            Command::Experiment(_) => "experiment",
        }
    }
}

/// Files read and written by one invocation.
struct Run {
    dir: PathBuf,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn create(out: Option<PathBuf>, seed: u64) -> Result<Self> {
        let dir = match out {
            Some(d) => d,
            None => {
                let base = std::env::var_os("BSWL_RUNS_DIR")
                    .map(PathBuf::from)
                    .unwrap_or_else(|| "runs".into());
                let first = run_directory(&base, Utc::now(), seed);
                let mut dir = first.clone();
                let mut k = 1;
                while dir.exists() {
                    dir = PathBuf::from(format!("{}-{k}", first.display()));
                    k += 1;
                }
                dir
            }
        };
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Run {
            dir,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, s: &str) -> Result<()> {
        let p = self.path(name);
        write_atomic(&p, s.as_bytes())?;
        self.outputs.push(p);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        self.text(name, &(serde_json::to_string_pretty(v)? + "\n"))
    }

    fn pair(&mut self, pair: &UnitaryPair) -> Result<()> {
        for (name, m) in [("u.json", pair.u()), ("v.json", pair.v())] {
            let p = self.path(name);
            write_matrix(&p, m)?;
            self.outputs.push(p);
        }
        Ok(())
    }

    fn read_pair(&mut self, u: &Path, v: &Path) -> Result<UnitaryPair> {
        let (mu, mv) = (read_matrix(u)?, read_matrix(v)?);
        self.inputs.extend([u.to_path_buf(), v.to_path_buf()]);
        Ok(UnitaryPair::new(mu, mv)?)
    }
}

enum Outcome {
    Pass,
    Violation,
}

fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(v)? + "\n"));
    Ok(())
}

fn cmd_nd(a: &NdArgs, run: &mut Run) -> Result<Outcome> {
    if a.from < 1 {
        bail!("--from must be at least 1");
    }
    let table = (a.from..=a.to)
        .map(|d| Ok(WitnessConstants::compute(d)?.to_record()))
        .collect::<Result<Vec<_>>>()?;
    run.json("nd.json", &table)?;
    print_json(&table)?;
    Ok(Outcome::Pass)
}

fn cmd_verify(a: &VerifyArgs, run: &mut Run) -> Result<Outcome> {
    let pair = run.read_pair(&a.u, &a.v)?;
    match a.mode {
        VerifyMode::Exact => {
            let v = verify_exact_implication(&pair, a.tol)?;
            run.json("verdict.json", &v)?;
            print_json(&v)?;
            Ok(if v.passed { Outcome::Pass } else { Outcome::Violation })
        }
        VerifyMode::Quantitative => {
            let v = verify_quantitative_at(&pair, a.d.unwrap_or(pair.dim() as u32))?;
            run.json("verdict.json", &v)?;
            print_json(&v)?;
            Ok(if v.consistent() {
                Outcome::Pass
            } else {
                Outcome::Violation
            })
        }
    }
}

fn window(p: &PairArgs) -> Result<Window> {
    Ok(Window::new(p.cols, p.half_height)?)
}

fn build_pair(p: &PairArgs, run: &mut Run) -> Result<UnitaryPair> {
    match p.kind {
        Kind::Cyclic => Ok(cyclic_pair(p.length)?),
        Kind::Lattice => Ok(Truncation::new(window(p)?, p.mode).pair()),
        Kind::Files => {
            let (Some(u), Some(v)) = (&p.u, &p.v) else {
                bail!("--kind files needs --u and --v")
            };
            run.read_pair(u, v)
        }
    }
}

fn cmd_construct(a: &ConstructArgs, run: &mut Run) -> Result<Outcome> {
    let pair = build_pair(&a.pair, run)?;
    run.pair(&pair)?;
    match a.pair.kind {
        Kind::Lattice => {
            let r = truncation_defect_report(window(&a.pair)?, a.pair.mode);
            run.json("report.json", &r)?;
            print_json(&r)?;
        }
        _ => {
            let r = defect_report(&pair, NormKind::Operator);
            run.json("report.json", &r)?;
            print_json(&r)?;
        }
    }
    Ok(Outcome::Pass)
}

fn config_from(d: usize, gamma: f64, budget: Option<f64>, p: &SearchParams, seed: u64) -> SearchConfig {
    SearchConfig {
        d,
        gamma,
        max_evaluations: p.max_evaluations,
        restarts: p.restarts,
        seed,
        initial_step: p.initial_step,
        shrink: p.shrink,
        min_step: p.min_step,
        epsilon_budget: budget,
    }
}

fn cmd_search(a: &SearchArgs, seed: u64, run: &mut Run) -> Result<Outcome> {
    let cfg = config_from(a.d, a.gamma, a.epsilon_budget, &a.params, seed);
    let (best, trace) = optimize(&cfg)?;
    run.json("best.json", &best)?;
    run.text("trace.jsonl", &trace.to_jsonl())?;
    run.json("frontier.json", &trace.frontier)?;
    run.json("restarts.json", &trace.restarts)?;
    run.pair(&best.pair())?;
    print_json(&serde_json::json!({
        "epsilon": best.epsilon,
        "delta": best.delta,
        "objective": best.objective,
        "evaluations": trace.total_evaluations(),
    }))?;
    Ok(Outcome::Pass)
}

fn default_grid(d: usize) -> Result<Vec<f64>> {
    let t = WitnessConstants::compute(d as i64)?.epsilon_threshold;
    Ok([1e-3, 1e-2, 1e-1, 0.5, 2.0, 10.0].iter().map(|k| k * t).collect())
}

fn cmd_scan(a: &ScanArgs, seed: u64, run: &mut Run) -> Result<Outcome> {
    let grid = match &a.grid {
        Some(g) => g
            .split(',')
            .map(|s| s.trim().parse::<f64>().with_context(|| format!("grid entry `{s}`")))
            .collect::<Result<Vec<_>>>()?,
        None => default_grid(a.d)?,
    };
    let cfg = config_from(a.d, 0.0, None, &a.params, seed);
    let rows = tightness_scan(a.d, &grid, &cfg)?;
    run.text("frontier.csv", &scan_to_csv(&rows))?;
    run.json("scan.json", &rows)?;
    emit(&scan_to_csv(&rows));
    let violated = rows.iter().any(|r| r.in_regime && r.ratio >= 1.0);
    Ok(if violated { Outcome::Violation } else { Outcome::Pass })
}

fn cmd_experiment(a: &ExperimentArgs, seed: u64, run: &mut Run) -> Result<Outcome> {
    let pair = build_pair(&a.pair, run)?;
    let d = pair.dim();
    let states = probe_states(d, a.random_states, seed);
    let witness = match a.pair.kind {
        Kind::Lattice => {
            let w = window(&a.pair)?;
            let i = w.index(LatticePoint::ORIGIN).expect("window contains the origin");
            LabeledState::new("e(0,0)", StateVector::basis(d, i))
        }
        _ => LabeledState::new("e0", StateVector::basis(d, 0)),
    };
    let records = run_protocol(&pair, &states, &[witness], a.n, seed)?;
    let path = persist_records(&run.dir, &records)?;
    run.outputs.push(path);
    let summary = |step: ProtocolStep| {
        let v: Vec<f64> = records
            .iter()
            .filter(|r| r.step == step)
            .map(|r| r.estimate.overlap_sq_estimate)
            .collect();
        serde_json::json!({
            "records": v.len(),
            "min_estimate": v.iter().copied().reduce(f64::min),
            "max_estimate": v.iter().copied().reduce(f64::max),
        })
    };
    print_json(&serde_json::json!({
        "step_i": summary(ProtocolStep::Relation),
        "step_ii": summary(ProtocolStep::Commutator),
    }))?;
    Ok(Outcome::Pass)
}

fn execute(cli: &Cli, run: &mut Run) -> Result<Outcome> {
    match &cli.command {
        Command::Nd(a) => cmd_nd(a, run),
        Command::Verify(a) => cmd_verify(a, run),
        Command::Construct(a) => cmd_construct(a, run),
        Command::Search(a) => cmd_search(a, cli.seed, run),
        Command::Scan(a) => cmd_scan(a, cli.seed, run),
        Command::Experiment(a) => cmd_experiment(a, cli.seed, run),
    }
}

fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
    paths.iter().map(|p| FileDigest::of(p)).collect()
}

fn run_cli(cli: Cli) -> Result<i32> {
    let started = Utc::now();
    let clock = Instant::now();
    let mut run = Run::create(cli.out.clone(), cli.seed)?;
    let code = match execute(&cli, &mut run) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Violation) => 2,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        flags: serde_json::to_value(&cli.command)?,
        seed: cli.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started: started.to_rfc3339(),
        duration_seconds: clock.elapsed().as_secs_f64(),
        inputs: digests(&run.inputs)?,
        outputs: digests(&run.outputs)?,
        exit_code: code,
    };
    let path = manifest.write(&run.dir)?;
    eprintln!("manifest: {}", path.display());
    Ok(code)
}

fn main() -> ExitCode {
    let args: Vec<OsString> = std::env::args_os().collect();
    let args = match config::expand_config(args, SUBCOMMANDS) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run_cli(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
