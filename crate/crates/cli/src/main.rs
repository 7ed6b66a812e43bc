use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use slsid_core::experiment::{run_grid, write_csv, ExperimentConfig, ReproReport, ReproTarget, ScenarioSpec};
use slsid_core::io::{load_dataset, load_model, save_dataset, save_model, write_dataset_csv};
use slsid_core::pe::{min_samples_table, sample_counts};
use slsid_core::{
    bcd_solve, consistency_sweep, fixtures, generate_random_scenario, oracle_global, pe_report,
    select_order, Assignment, ConsistencyScenario, Error, NoiseSpec, OracleOptions,
    OrderSelectConfig, PeLimits, PeTolerances, Penalty, SolveReport, SolverConfig,
};

const EXIT_USAGE: u8 = 1;
const EXIT_MISMATCH: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "slsid", version, about = "Switched linear system identification toolkit")]
struct Cli {
    /// Write results into this directory instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Flat JSON file with default option values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a built-in example or a random scenario.
    Simulate(SimulateArgs),
    /// Fit a model with a known number of subsystems.
    Fit(FitArgs),
    /// Enumerate all assignments to find the global optimum.
    Oracle(OracleArgs),
    /// Check persistence-of-excitation conditions for labeled data.
    PeCheck(PeCheckArgs),
    /// Minimum sample counts of the three excitation conditions.
    MinSamples(MinSamplesArgs),
    /// Estimate the number of subsystems.
    SelectOrder(SelectOrderArgs),
    /// Recovery rate of the order estimate across sample sizes.
    ConsistencySweep(SweepArgs),
    /// Monte Carlo benchmark over a grid of scenarios.
    Bench(BenchArgs),
    /// Regenerate a reference result and compare with stored values.
    Repro(ReproArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    example: Option<u8>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "S", default_value_t = 2)]
    s: usize,
    #[arg(long = "N", default_value_t = 500)]
    samples: usize,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    low: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    high: f64,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Objective-decrease stopping threshold.
    #[arg(long)]
    tol: Option<f64>,
}

impl SolverArgs {
    fn config(&self, s: usize, cfg: &ExperimentConfig) -> SolverConfig {
        let mut c = SolverConfig::new(s);
        c.restarts = self.restarts.or(cfg.restarts).unwrap_or(c.restarts);
        c.max_iters = self.max_iters.or(cfg.max_iters).unwrap_or(c.max_iters);
        c.seed = self.seed.or(cfg.seed).unwrap_or(c.seed);
        c.obj_tol = self.tol.or(cfg.obj_tol).unwrap_or(c.obj_tol);
        c.rank_tol = cfg.rank_tol.unwrap_or(c.rank_tol);
        c
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "S")]
    s: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// Also emit the per-iteration table as `trace.csv`.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "S")]
    s: usize,
    #[arg(long)]
    limit: Option<u128>,
}

#[derive(Args)]
struct PeCheckArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// `from-data` or a JSON assignment file.
    #[arg(long, default_value = "from-data")]
    labels: String,
    /// Relative rank tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_block_size: Option<usize>,
}

#[derive(Args)]
struct MinSamplesArgs {
    #[arg(long, default_value_t = 10)]
    n: u64,
    #[arg(long = "S", default_value_t = 7)]
    s: u64,
    /// Emit the full table for `1..=n` x `1..=S` as CSV.
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct SelectOrderArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    s_bar: Option<usize>,
    /// `auto`, `logn` or a positive number.
    #[arg(long, default_value = "auto")]
    lambda: String,
    /// Constant multiplying the automatic penalty.
    #[arg(long)]
    c: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "S", default_value_t = 2)]
    s: usize,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    s_bar: Option<usize>,
    #[arg(long = "N-list", value_delimiter = ',', default_value = "200,1000,5000")]
    sizes: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value = "auto")]
    lambda: String,
    #[arg(long)]
    c: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Cells as `n,S,N`; repeat for a grid.
    #[arg(long = "cell", value_parser = parse_cell, default_values = ["2,2,500", "3,2,1000", "2,3,1000"])]
    cells: Vec<(usize, usize, usize)>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReproArgs {
    /// table1, example2-fit, example2-seven, example1-oracle or all.
    target: String,
}

fn parse_cell(s: &str) -> Result<(usize, usize, usize), String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p}: {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [n, s, big_n] => Ok((*n, *s, *big_n)),
        _ => Err(format!("expected n,S,N, got '{s}'")),
    }
}

struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn emit(&self, name: &str, content: &str) -> Result<(), Error> {
        match &self.dir {
            Some(d) => {
                fs::create_dir_all(d)?;
                fs::write(d.join(name), content)?;
            }
            None => print!("{content}"),
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Error> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.emit(name, &s)
    }

    fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<(), Error> {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf)?;
        self.emit(name, &String::from_utf8_lossy(&buf))
    }
}

fn penalty(kind: &str, c: Option<f64>, cfg: &ExperimentConfig) -> Result<Penalty, Error> {
    let c = c.or(cfg.lambda_c).unwrap_or(1.0);
    match kind {
        "auto" => Ok(Penalty::NoiseScaled { c }),
        "logn" => Ok(Penalty::LogN { c }),
        v => v
            .parse::<f64>()
            .ok()
            .filter(|l| *l > 0.0 && l.is_finite())
            .map(|lambda| Penalty::Fixed { lambda })
            .ok_or_else(|| Error::InvalidArgument(format!("lambda must be auto, logn or a positive number, got '{v}'"))),
    }
}

fn trace_csv(report: &SolveReport) -> String {
    let s = report.model.subsystems();
    let n = report.model.dim();
    let mut header = vec!["iteration".to_string()];
    for j in 1..=s {
        for i in 1..=n {
            header.push(format!("theta{j}_{i}"));
        }
    }
    header.push("zeta".into());
    header.push("obj".into());
    let mut out = header.join(",") + "\n";
    for rec in &report.history {
        let mut row = vec![rec.iteration.to_string()];
        match &rec.params {
            Some(p) => row.extend(p.iter().flatten().map(|v| format!("{v:?}"))),
            None => row.extend(std::iter::repeat_n(String::new(), s * n)),
        }
        row.push(
            rec.labels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        row.push(rec.objective.map(|o| format!("{o:?}")).unwrap_or_default());
        out += &(row.join(",") + "\n");
    }
    out
}

fn load_labels(spec: &str, data: &slsid_core::Dataset) -> Result<Assignment, Error> {
    if spec == "from-data" {
        return data
            .truth()
            .cloned()
            .ok_or_else(|| Error::InvalidArgument("dataset has no zeta column; pass --labels FILE".into()));
    }
    let text = fs::read_to_string(Path::new(spec))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Serialize)]
struct SimulateSummary {
    n: usize,
    #[serde(rename = "S")]
    s: usize,
    #[serde(rename = "N")]
    samples: usize,
    sigma: f64,
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<u8, Error> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let sink = Sink { dir: cli.output.clone() };
    match cli.command {
        Command::Simulate(a) => {
            let sigma = a.sigma.or(cfg.sigma).unwrap_or(0.0);
            let seed = a.seed.or(cfg.seed).unwrap_or(0);
            let (model, data, summary_seed) = match a.example {
                Some(1) => {
                    let (m, d) = fixtures::example1();
                    (m, d, None)
                }
                Some(_) => {
                    let (m, d) = fixtures::example2();
                    (m, d, None)
                }
                None => {
                    let noise = NoiseSpec::gaussian(sigma, slsid_core::derive_seed(seed, &[1]))?;
                    let (m, d) = generate_random_scenario(a.n, a.s, a.samples, (a.low, a.high), &noise, seed)?;
                    (m, d, Some(seed))
                }
            };
            let summary = SimulateSummary {
                n: model.dim(),
                s: model.subsystems(),
                samples: data.len(),
                sigma: if a.example.is_some() { 0.0 } else { sigma },
                seed: summary_seed,
            };
            match &cli.output {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    save_dataset(&data, &dir.join("data.csv"))?;
                    save_model(&model, &dir.join("model.json"))?;
                    let truth = data.truth().expect("simulated data carry labels");
                    fs::write(dir.join("truth.json"), serde_json::to_string_pretty(truth)? + "\n")?;
                    println!("{}", serde_json::to_string(&summary)?);
                }
                None => {
                    let mut out = std::io::stdout().lock();
                    write_dataset_csv(&data, &mut out)?;
                }
            }
        }
        Command::Fit(a) => {
            let data = load_dataset(&a.data)?;
            let solver = a.solver.config(a.s, &cfg).with_history(a.trace);
            let report = bcd_solve(&data, &solver)?;
            sink.json("report.json", &report)?;
            if a.trace {
                sink.emit("trace.csv", &trace_csv(&report))?;
            }
        }
        Command::Oracle(a) => {
            let data = load_dataset(&a.data)?;
            let opts = OracleOptions {
                limit: a.limit.or(cfg.limit).unwrap_or(OracleOptions::default().limit),
                rank_tol: cfg.rank_tol.unwrap_or(OracleOptions::default().rank_tol),
                ..OracleOptions::default()
            };
            let r = oracle_global(&data, a.s, &opts)?;
            sink.json("oracle.json", &r)?;
        }
        Command::PeCheck(a) => {
            let data = load_dataset(&a.data)?;
            let model = load_model(&a.model)?;
            let labels = load_labels(&a.labels, &data)?;
            let mut tol = PeTolerances::default();
            tol.rank = a.tol.or(cfg.rank_tol).unwrap_or(tol.rank);
            let mut limits = PeLimits::default();
            limits.max_block_size = a.max_block_size.or(cfg.max_block_size).unwrap_or(limits.max_block_size);
            let r = pe_report(&data, &model, &labels, &tol, &limits)?;
            sink.json("pe.json", &r)?;
        }
        Command::MinSamples(a) => {
            if a.table {
                sink.csv("min_samples.csv", &min_samples_table(a.n, a.s)?)?;
            } else {
                sink.json("min_samples.json", &sample_counts(a.n, a.s)?)?;
            }
        }
        Command::SelectOrder(a) => {
            let data = load_dataset(&a.data)?;
            let s_bar = a.s_bar.or(cfg.s_bar).unwrap_or(4);
            let c = OrderSelectConfig::new(s_bar)
                .with_penalty(penalty(&a.lambda, a.c, &cfg)?)
                .with_solver(a.solver.config(1, &cfg));
            sink.json("select_order.json", &select_order(&data, &c)?)?;
        }
        Command::ConsistencySweep(a) => {
            let scenario = ConsistencyScenario {
                dim: a.n,
                subsystems: a.s,
                sigma: a.sigma.or(cfg.sigma).unwrap_or(0.1),
                range: (-5.0, 5.0),
            };
            let s_bar = a.s_bar.or(cfg.s_bar).unwrap_or(4);
            let c = OrderSelectConfig::new(s_bar)
                .with_penalty(penalty(&a.lambda, a.c, &cfg)?)
                .with_solver(a.solver.config(1, &cfg));
            let trials = a.trials.or(cfg.trials).unwrap_or(20);
            let seed = a.solver.seed.or(cfg.seed).unwrap_or(0);
            let rows = consistency_sweep(&scenario, &a.sizes, trials, &c, seed)?;
            #[derive(Serialize)]
            struct Row {
                #[serde(rename = "N")]
                samples: usize,
                trials: usize,
                recovery_rate: f64,
            }
            let rows: Vec<Row> = rows
                .iter()
                .map(|r| Row {
                    samples: r.samples,
                    trials: r.trials,
                    recovery_rate: r.recovery_rate,
                })
                .collect();
            sink.csv("consistency.csv", &rows)?;
        }
        Command::Bench(a) => {
            let specs: Vec<ScenarioSpec> = a
                .cells
                .iter()
                .map(|&(n, s, big_n)| {
                    let mut spec = ScenarioSpec::new(n, s, big_n);
                    spec.repetitions = a.repetitions.or(cfg.repetitions).unwrap_or(spec.repetitions);
                    spec.sigma = a.sigma.or(cfg.sigma).unwrap_or(spec.sigma);
                    spec.restarts = a.restarts.or(cfg.restarts).unwrap_or(spec.restarts);
                    spec.max_iters = a.max_iters.or(cfg.max_iters).unwrap_or(spec.max_iters);
                    spec.seed = a.seed.or(cfg.seed).unwrap_or(spec.seed);
                    spec.nmse_success = cfg.nmse_success.unwrap_or(spec.nmse_success);
                    spec
                })
                .collect();
            let (summary, raw) = run_grid(&specs)?;
            sink.csv("bench.csv", &summary)?;
            if cli.output.is_some() {
                sink.csv("bench_raw.csv", &raw)?;
            }
        }
        Command::Repro(a) => {
            let targets: Vec<ReproTarget> = if a.target == "all" {
                ReproTarget::ALL.to_vec()
            } else {
                vec![a.target.parse()?]
            };
            let reports: Vec<ReproReport> = targets
                .into_iter()
                .map(slsid_core::experiment::repro)
                .collect::<Result<_, _>>()?;
            let mut passed = true;
            for r in &reports {
                let ok = r.checks.iter().filter(|c| c.ok).count();
                println!("{}: {}/{} checks match", r.target, ok, r.checks.len());
                for c in r.checks.iter().filter(|c| !c.ok) {
                    println!("  MISMATCH {}: expected {}, got {}", c.name, c.expected, c.actual);
                }
                passed &= r.passed;
            }
            if cli.output.is_some() {
                sink.json("repro.json", &reports)?;
            }
            if !passed {
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::EnumerationLimit { .. } => EXIT_LIMIT,
                _ => EXIT_USAGE,
            })
        }
    }
}
