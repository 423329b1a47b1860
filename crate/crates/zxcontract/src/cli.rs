//! `zxcontract run | bench | eval`.
//!
//! Exit codes: 0 on success, 2 when `--verify` finds a mismatch, 1 for usage,
//! input and IO errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use zxcontract_core::circuit::{parse_bits, random_grid_circuit, to_zx, Circuit};
use zxcontract_core::engine::execute_plan;
use zxcontract_core::oracle::{eval_zx_diagram, statevector_amplitude, MAX_STATEVECTOR_QUBITS};
use zxcontract_core::orderfinder::{best_of_trials, ContractionPlan, DEFAULT_TARGET_RANK};
use zxcontract_core::simplify::{prepare_network, AnnealConfig, AnnealMode, CostFn, GraphStats, Method, Prepared};
use zxcontract_core::Complex64;

use crate::parallel::{parallel_execute, parallel_trials, BudgetSpec};
use crate::qcfile::read_circuit_file;
use crate::report::*;

/// Largest allowed `|pipeline - oracle|` under `--verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "zxcontract",
    version,
    about = "Lower tensor-network contraction cost of quantum circuits with ZX rewriting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one pipeline and write a report.
    Run(RunArgs),
    /// Compare standard, zx-unoptimized and zx-optimized over several depths.
    Bench(BenchArgs),
    /// Print the oracle amplitude only.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Anneal,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostFnArg {
    Quicktw,
    Minfill,
    Flops,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Standard,
    ZxUnoptimized,
    ZxOptimized,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Standard => Method::Standard,
            MethodArg::ZxUnoptimized => Method::ZxUnoptimized,
            MethodArg::ZxOptimized => Method::ZxOptimized,
        }
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or("expected RxC, e.g. 3x3")?;
    let r: usize = r.trim().parse().map_err(|_| format!("bad row count `{r}`"))?;
    let c: usize = c.trim().parse().map_err(|_| format!("bad column count `{c}`"))?;
    if r == 0 || c == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok((r, c))
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Circuit file.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["grid", "depth"], required_unless_present = "grid")]
    pub circuit: Option<PathBuf>,
    /// Random grid circuit of R rows and C columns, seeded by --seed.
    #[arg(long, value_name = "RxC", value_parser = parse_grid, requires = "depth")]
    pub grid: Option<(usize, usize)>,
    /// Number of layers of the grid circuit.
    #[arg(long, value_name = "D")]
    pub depth: Option<usize>,
    /// Output bitstring, qubit 0 first. Defaults to all zeros.
    #[arg(long)]
    pub bits: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Single source of randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Annealing steps.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Anneal)]
    pub mode: ModeArg,
    #[arg(long = "cost-fn", value_enum, default_value_t = CostFnArg::Quicktw)]
    pub cost_fn: CostFnArg,
    /// Independent order-finding trials.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Budget of each branch-and-bound search.
    #[arg(long = "bb-budget-ms", default_value_t = 100)]
    pub bb_budget_ms: u64,
    /// Slice until no intermediate tensor exceeds this rank.
    #[arg(long = "target-rank", default_value_t = DEFAULT_TARGET_RANK)]
    pub target_rank: usize,
    /// Single worker and expansion-count budgets instead of wall clock.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::ZxOptimized)]
    pub method: MethodArg,
    /// Compare against the state-vector oracle; exit 2 on mismatch.
    #[arg(long)]
    pub verify: bool,
    /// Stop after planning.
    #[arg(long = "plan-only", conflicts_with = "verify")]
    pub plan_only: bool,
    #[arg(long, value_name = "DIR", default_value = "zxcontract-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_name = "RxC", value_parser = parse_grid)]
    pub grid: (usize, usize),
    /// Comma-separated depths.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub depths: Vec<usize>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_name = "DIR", default_value = "zxcontract-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Everything that decides a plan, resolved from the flags.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub anneal: AnnealConfig,
    pub trial_seeds: Vec<u64>,
    pub target_rank: usize,
    pub budget: BudgetSpec,
    pub deterministic: bool,
}

impl PipelineOptions {
    pub fn from_args(a: &PipelineArgs) -> Self {
        let anneal = AnnealConfig {
            nb_steps: a.steps,
            seed: a.seed,
            cost_fn: match a.cost_fn {
                CostFnArg::Quicktw => CostFn::QuickTw,
                CostFnArg::Minfill => CostFn::MinFillTw,
                CostFnArg::Flops => CostFn::FlopEstimate,
            },
            mode: match a.mode {
                ModeArg::Anneal => AnnealMode::Anneal,
                ModeArg::Greedy => AnnealMode::Greedy,
            },
        };
        PipelineOptions {
            anneal,
            trial_seeds: (0..a.trials).map(|i| a.seed.wrapping_add(i)).collect(),
            target_rank: a.target_rank,
            budget: BudgetSpec::from_millis(a.bb_budget_ms, a.deterministic),
            deterministic: a.deterministic,
        }
    }

    fn echo(&self, method: Method, verify: bool, execute: bool) -> ConfigEcho {
        ConfigEcho {
            method: method.name().into(),
            mode: match self.anneal.mode {
                AnnealMode::Anneal => "anneal",
                AnnealMode::Greedy => "greedy",
            }
            .into(),
            cost_fn: match self.anneal.cost_fn {
                CostFn::QuickTw => "quicktw",
                CostFn::MinFillTw => "minfill",
                CostFn::FlopEstimate => "flops",
            }
            .into(),
            steps: self.anneal.nb_steps,
            seed: self.anneal.seed,
            trial_seeds: self.trial_seeds.clone(),
            bb_budget: match self.budget {
                BudgetSpec::WallClock(d) => format!("{}ms", d.as_millis()),
                BudgetSpec::Expansions(n) => format!("{n} expansions"),
            },
            target_rank: self.target_rank,
            deterministic: self.deterministic,
            verify,
            execute,
        }
    }
}

/// `match`, `mismatch`, or `not-executed` when nothing was contracted.
pub fn oracle_verdict(abs_error: Option<f64>) -> &'static str {
    match abs_error {
        None => "not-executed",
        Some(err) if err <= VERIFY_TOLERANCE => "match",
        // NaN lands here too
        Some(_) => "mismatch",
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Prepares the network for `method` and picks the best plan over the trials.
pub fn plan_circuit(
    c: &Circuit,
    bits: &[bool],
    method: Method,
    opts: &PipelineOptions,
    timings: &mut BTreeMap<String, f64>,
) -> anyhow::Result<(Prepared, ContractionPlan)> {
    let t = Instant::now();
    let prepared = prepare_network(c, bits, method, &opts.anneal)?;
    timings.insert("prepare".into(), ms_since(t));
    let t = Instant::now();
    let plan = if opts.deterministic {
        let budget = opts.budget;
        best_of_trials(&prepared.network.net_graph(), &opts.trial_seeds, opts.target_rank, &|| budget.make())?
    } else {
        parallel_trials(&prepared.network, &opts.trial_seeds, opts.target_rank, opts.budget)?
    };
    timings.insert("plan".into(), ms_since(t));
    Ok((prepared, plan))
}

fn final_stats(p: &Prepared) -> GraphStats {
    GraphStats::of_network(&p.network)
}

/// Files produced by one `run`.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub plan_text: String,
    pub stages_csv: String,
    pub anneal_csv: String,
    /// Set when the oracle disagreed.
    pub mismatch: bool,
}

/// The work behind `zxcontract run`, without touching the filesystem.
#[allow(clippy::too_many_arguments)]
pub fn run_circuit(
    c: &Circuit,
    bits: &[bool],
    source: String,
    depth: Option<usize>,
    method: Method,
    opts: &PipelineOptions,
    verify: bool,
    execute: bool,
) -> anyhow::Result<RunOutcome> {
    let oracle_sized = c.num_qubits <= MAX_STATEVECTOR_QUBITS;
    if verify && !oracle_sized {
        bail!("--verify needs at most {MAX_STATEVECTOR_QUBITS} qubits, the circuit has {}", c.num_qubits);
    }
    let mut timings = BTreeMap::new();
    let (prepared, plan) = plan_circuit(c, bits, method, opts, &mut timings)?;

    let execution = if execute {
        let t = Instant::now();
        let e = if opts.deterministic {
            execute_plan(&prepared.network, &plan)?
        } else {
            parallel_execute(&prepared.network, &plan)?
        };
        timings.insert("execute".into(), ms_since(t));
        Some(e)
    } else {
        None
    };

    let oracle = if oracle_sized {
        let t = Instant::now();
        let want = statevector_amplitude(c, bits)?;
        timings.insert("oracle".into(), ms_since(t));
        let abs_error = execution.map(|e| (e.amplitude - want).norm());
        let verdict = oracle_verdict(abs_error);
        Some(OracleRecord { amplitude: want.into(), abs_error, tolerance: VERIFY_TOLERANCE, verdict: verdict.into() })
    } else {
        None
    };
    let mismatch = verify && oracle.as_ref().is_some_and(|o| o.verdict == "mismatch");

    let seed = opts.anneal.seed;
    let mut rows: Vec<CsvRow> = prepared
        .stages
        .iter()
        .map(|(name, s)| CsvRow {
            stage: (*name).into(),
            depth,
            method: method.name().into(),
            seed,
            cost: None,
            width: None,
            nodes: s.nodes,
            edges: s.edges,
        })
        .collect();
    let fs = final_stats(&prepared);
    rows.push(CsvRow {
        stage: "plan".into(),
        depth,
        method: method.name().into(),
        seed,
        cost: Some(plan.predicted_cost),
        width: Some(plan.max_rank),
        nodes: fs.nodes,
        edges: fs.edges,
    });

    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").into(),
        input: InputInfo {
            source,
            digest: input_digest(c, bits),
            qubits: c.num_qubits,
            gates: c.gates.len(),
            bits: bits_string(bits),
        },
        config: opts.echo(method, verify, execute),
        stages: prepared
            .stages
            .iter()
            .map(|(n, s)| StageRecord::new(n, *s))
            .chain(std::iter::once(StageRecord::new("network", fs)))
            .collect(),
        anneal: prepared.anneal.as_ref().map(AnnealSummary::of),
        rewrite_trace: prepared.trace.to_text().lines().map(String::from).collect(),
        plan: PlanRecord::of(&plan),
        execution: execution.map(|e| ExecutionRecord {
            amplitude: e.amplitude.into(),
            probability: e.amplitude.norm_sqr(),
            cost: e.cost,
            max_rank: e.max_rank,
        }),
        oracle,
        timings_ms: timings,
    };
    Ok(RunOutcome {
        report,
        plan_text: plan.to_text(),
        stages_csv: rows_to_csv(&rows),
        anneal_csv: anneal_csv(prepared.anneal.as_ref()),
        mismatch,
    })
}

/// One CSV row per `(depth, method)` for grid circuits seeded by `--seed`.
pub fn bench_rows(rows: usize, cols: usize, depths: &[usize], opts: &PipelineOptions) -> anyhow::Result<Vec<CsvRow>> {
    let seed = opts.anneal.seed;
    let bits = vec![false; rows * cols];
    let mut out = Vec::new();
    for &depth in depths {
        let c = random_grid_circuit(rows, cols, depth, seed)?;
        for method in Method::ALL {
            let (prepared, plan) = plan_circuit(&c, &bits, method, opts, &mut BTreeMap::new())?;
            let fs = final_stats(&prepared);
            out.push(CsvRow {
                stage: "plan".into(),
                depth: Some(depth),
                method: method.name().into(),
                seed,
                cost: Some(plan.predicted_cost),
                width: Some(plan.max_rank),
                nodes: fs.nodes,
                edges: fs.edges,
            });
        }
    }
    Ok(out)
}

struct Input {
    circuit: Circuit,
    bits: Vec<bool>,
    source: String,
    depth: Option<usize>,
}

fn load_input(a: &InputArgs, seed: u64) -> anyhow::Result<Input> {
    let (circuit, source, depth) = match (&a.circuit, a.grid) {
        (Some(path), _) => (read_circuit_file(path)?, format!("file {}", path.display()), None),
        (None, Some((r, c))) => {
            let d = a.depth.context("--grid needs --depth")?;
            (random_grid_circuit(r, c, d, seed)?, format!("grid {r}x{c} depth {d} seed {seed}"), Some(d))
        }
        (None, None) => bail!("one of --circuit or --grid is required"),
    };
    let bits = match &a.bits {
        None => vec![false; circuit.num_qubits],
        Some(s) => {
            let b = parse_bits(s)?;
            if b.len() != circuit.num_qubits {
                bail!("--bits has {} digits, the circuit has {} qubits", b.len(), circuit.num_qubits);
            }
            b
        }
    };
    Ok(Input { circuit, bits, source, depth })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, contents).with_context(|| format!("cannot write {}", p.display()))
}

fn fmt_complex(z: Complex64) -> String {
    format!("{:?} {:?}", z.re, z.im)
}

fn cmd_run(a: &RunArgs) -> anyhow::Result<ExitCode> {
    let opts = PipelineOptions::from_args(&a.pipeline);
    let input = load_input(&a.input, a.pipeline.seed)?;
    let method = Method::from(a.method);
    let out =
        run_circuit(&input.circuit, &input.bits, input.source, input.depth, method, &opts, a.verify, !a.plan_only)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    write_file(&a.out, "report.json", &out.report.to_json())?;
    write_file(&a.out, "plan.txt", &out.plan_text)?;
    write_file(&a.out, "stages.csv", &out.stages_csv)?;
    write_file(&a.out, "anneal.csv", &out.anneal_csv)?;

    let r = &out.report;
    println!("method {}", method.name());
    println!("predicted_cost {}", r.plan.predicted_cost);
    println!("max_rank {}", r.plan.max_rank);
    println!("slices {}", r.plan.slices.len());
    if let Some(e) = &r.execution {
        println!("amplitude {}", fmt_complex(Complex64::new(e.amplitude.re, e.amplitude.im)));
    }
    if let Some(o) = &r.oracle {
        match o.abs_error {
            Some(err) => println!("oracle {} abs_error {err:e}", o.verdict),
            None => println!("oracle {}", o.verdict),
        }
    }
    println!("report {}", a.out.join("report.json").display());
    if out.mismatch {
        eprintln!("error: verification failed, pipeline and oracle differ by more than {VERIFY_TOLERANCE:e}");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(a: &BenchArgs) -> anyhow::Result<ExitCode> {
    let opts = PipelineOptions::from_args(&a.pipeline);
    let (r, c) = a.grid;
    let rows = bench_rows(r, c, &a.depths, &opts)?;
    let csv = rows_to_csv(&rows);
    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    write_file(&a.out, "bench.csv", &csv)?;
    print!("{csv}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(a: &EvalArgs) -> anyhow::Result<ExitCode> {
    let input = load_input(&a.input, a.seed)?;
    let amp = statevector_amplitude(&input.circuit, &input.bits)?;
    println!("statevector {}", fmt_complex(amp));
    match to_zx(&input.circuit, &input.bits).and_then(|d| eval_zx_diagram(&d)) {
        Ok(z) => println!("zx-diagram {}", fmt_complex(z)),
        Err(e) => println!("zx-diagram skipped: {e}"),
    }
    println!("probability {:?}", amp.norm_sqr());
    Ok(ExitCode::SUCCESS)
}

/// Entry point shared by the binary and the tests.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("3x4"), Ok((3, 4)));
        assert!(parse_grid("3").is_err());
        assert!(parse_grid("0x2").is_err());
    }

    #[test]
    fn verdicts() {
        assert_eq!(oracle_verdict(None), "not-executed");
        assert_eq!(oracle_verdict(Some(1e-12)), "match");
        assert_eq!(oracle_verdict(Some(VERIFY_TOLERANCE)), "match");
        assert_eq!(oracle_verdict(Some(2e-9)), "mismatch");
        assert_eq!(oracle_verdict(Some(f64::NAN)), "mismatch");
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
