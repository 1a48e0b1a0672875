//! Command-line front end for robust time-slot template design.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error. Domain errors also
//! emit a machine-readable JSON object on standard error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use slotplan_core::data::{self, GenConfig};
use slotplan_core::domain::{check_feasibility, CostParams, Feasibility, ModeSet};
use slotplan_core::eval::{allocate_slots, count_overrides, empirical_cost};
use slotplan_core::heuristics::{self, ClusterMethod, FeatureSpec};
use slotplan_core::io::{
    mode_document, parse_demand_csv, parse_mode_document, parse_samples_csv, samples_to_csv,
    solution_doc, SolutionDoc,
};
use slotplan_core::oracle::{worst_case_discrete, OracleConfig};
use slotplan_core::piecewise;
use slotplan_core::solver;

#[derive(Parser)]
#[command(
    name = "slotplan",
    version,
    about = "Design robust appointment time-slot templates",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CostArgs {
    /// Unit overtime cost per minute.
    #[arg(long, default_value_t = 30.0)]
    q: f64,
    /// Unit idle-time cost per minute.
    #[arg(long, default_value_t = 20.0)]
    b: f64,
    /// Activation cost per opened group.
    #[arg(long, default_value_t = 80.0)]
    c: f64,
    /// Upper bound of the slot duration range, minutes.
    #[arg(long, default_value_t = 720.0)]
    horizon: f64,
    /// Total-variation radius of the mode-probability ambiguity set.
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
}

impl CostArgs {
    fn build(&self) -> Result<CostParams, slotplan_core::Error> {
        CostParams::new(self.q, self.b, self.c, self.horizon, self.rho)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicArg {
    Kmeans,
    Kmedoids,
}

#[derive(Subcommand)]
enum Command {
    /// Check that each mode's moment triple is realizable.
    Feasibility { modes: PathBuf },
    /// Solve for the optimal grouping and slot durations.
    Solve {
        modes: PathBuf,
        /// Exhaustive search over all groupings (default).
        #[arg(long, conflicts_with = "heuristic")]
        exact: bool,
        /// Clustering heuristic instead of exhaustive search.
        #[arg(long, value_enum)]
        heuristic: Option<HeuristicArg>,
        /// Feature components for clustering, e.g. "m,s" or "m,sigma,s".
        #[arg(long)]
        features: Option<String>,
        /// Cluster features on their raw scales instead of z-scores.
        #[arg(long)]
        raw_features: bool,
        /// Group count for the heuristic: a number or "auto"
        /// (cross-validated; requires --samples).
        #[arg(long, default_value = "auto")]
        k: String,
        /// Training samples CSV for cross-validating K.
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Worker threads for the exact enumeration (or
        /// SLOTPLAN_THREADS; 1 = serial).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        costs: CostArgs,
    },
    /// Emit the worst-case cost curve of one mode as CSV.
    PiCurve {
        modes: PathBuf,
        /// 1-based mode index.
        #[arg(long, default_value_t = 1)]
        index: usize,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        /// Right end of the grid; defaults to the horizon.
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[command(flatten)]
        costs: CostArgs,
    },
    /// Compare the closed-form cost against the discretized oracle.
    OracleCheck {
        modes: PathBuf,
        /// 1-based mode index.
        #[arg(long, default_value_t = 1)]
        index: usize,
        /// Number of evaluation points across the duration range.
        #[arg(long, default_value_t = 15)]
        points: usize,
        #[arg(long, default_value_t = 2000.0)]
        support_max: f64,
        #[arg(long, default_value_t = 1.0)]
        grid_step: f64,
        /// Multiplicative moment band of the oracle.
        #[arg(long, default_value_t = 1e-3)]
        band: f64,
        #[command(flatten)]
        costs: CostArgs,
    },
    /// Generate a synthetic instance: sample CSVs plus ground truth.
    Datagen {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        modes: usize,
        #[arg(long, default_value_t = 100)]
        n_train: usize,
        #[arg(long, default_value_t = 1000)]
        n_test: usize,
        #[arg(long, default_value_t = 720.0)]
        clip_max: f64,
        /// Misspecification of the test distribution: log-mean and log-std
        /// scaled by (1 + eps).
        #[arg(long, default_value_t = 0.0)]
        mis_eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a solved template on held-out samples.
    Eval {
        modes: PathBuf,
        /// Solution JSON produced by `solve`.
        #[arg(long)]
        solution: PathBuf,
        /// Per-type samples CSV.
        #[arg(long)]
        samples: PathBuf,
        #[command(flatten)]
        costs: CostArgs,
    },
    /// Allocate daily slots and count overrides against realized demand.
    Overrides {
        modes: PathBuf,
        /// Solution JSON produced by `solve`.
        #[arg(long)]
        solution: PathBuf,
        /// Daily demand CSV (date,group_id,count).
        #[arg(long)]
        demand: PathBuf,
        /// Daily capacity in minutes.
        #[arg(long)]
        capacity: f64,
        /// Comma-separated per-group minute shares; defaults to nominal
        /// probability mass per group.
        #[arg(long)]
        shares: Option<String>,
        /// Count days with any shortfall instead of shortfall units.
        #[arg(long)]
        per_day: bool,
    },
    /// Time the exact solver across instance sizes.
    Bench {
        #[arg(long, default_value_t = 3)]
        min_modes: usize,
        #[arg(long, default_value_t = 8)]
        max_modes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        costs: CostArgs,
    },
}

/// Reproducibility header attached to every output.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    config_digest: String,
    seed: Option<u64>,
    tool_version: String,
    wall_time_ms: u128,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

struct ManifestBuilder {
    command: String,
    digest_input: Vec<u8>,
    seed: Option<u64>,
    start: Instant,
}

impl ManifestBuilder {
    fn new(command: &str) -> Self {
        let mut digest_input = Vec::new();
        for arg in std::env::args().skip(1) {
            digest_input.extend_from_slice(arg.as_bytes());
            digest_input.push(0);
        }
        Self {
            command: command.to_string(),
            digest_input,
            seed: None,
            start: Instant::now(),
        }
    }

    fn absorb(&mut self, bytes: &[u8]) {
        self.digest_input.extend_from_slice(bytes);
        self.digest_input.push(0);
    }

    fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    fn finish(&self) -> RunManifest {
        RunManifest {
            command: self.command.clone(),
            config_digest: format!("{:016x}", fnv1a(&self.digest_input)),
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: self.start.elapsed().as_millis(),
        }
    }
}

enum CliError {
    Domain(String),
}

impl From<slotplan_core::Error> for CliError {
    fn from(e: slotplan_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn read_to_string(manifest: &mut ManifestBuilder, path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    manifest.absorb(text.as_bytes());
    Ok(text)
}

fn load_modes(
    manifest: &mut ManifestBuilder,
    path: &Path,
) -> Result<(ModeSet, Vec<String>), CliError> {
    let text = read_to_string(manifest, path)?;
    Ok(parse_mode_document(&text)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(message)) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": message, "kind": "domain" })
            );
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Feasibility { modes } => cmd_feasibility(&modes),
        Command::Solve {
            modes,
            exact,
            heuristic,
            features,
            raw_features,
            k,
            samples,
            threads,
            seed,
            costs,
        } => cmd_solve(
            &modes,
            exact,
            heuristic,
            features,
            raw_features,
            &k,
            samples.as_deref(),
            threads,
            seed,
            &costs,
        ),
        Command::PiCurve {
            modes,
            index,
            from,
            to,
            step,
            costs,
        } => cmd_pi_curve(&modes, index, from, to, step, &costs),
        Command::OracleCheck {
            modes,
            index,
            points,
            support_max,
            grid_step,
            band,
            costs,
        } => cmd_oracle_check(&modes, index, points, support_max, grid_step, band, &costs),
        Command::Datagen {
            out,
            modes,
            n_train,
            n_test,
            clip_max,
            mis_eps,
            seed,
        } => cmd_datagen(&out, modes, n_train, n_test, clip_max, mis_eps, seed),
        Command::Eval {
            modes,
            solution,
            samples,
            costs,
        } => cmd_eval(&modes, &solution, &samples, &costs),
        Command::Overrides {
            modes,
            solution,
            demand,
            capacity,
            shares,
            per_day,
        } => cmd_overrides(&modes, &solution, &demand, capacity, shares.as_deref(), per_day),
        Command::Bench {
            min_modes,
            max_modes,
            seed,
            costs,
        } => cmd_bench(min_modes, max_modes, seed, &costs),
    }
}

#[derive(Serialize)]
struct FeasibilityRow {
    name: String,
    ok: bool,
    semivariance_floor: Option<f64>,
    violations: Vec<String>,
}

fn cmd_feasibility(modes_path: &Path) -> CliResult {
    let mut manifest = ManifestBuilder::new("feasibility");
    let text = read_to_string(&mut manifest, modes_path)?;
    // Parse rows directly so that infeasible rows can be reported instead
    // of rejected at mode-set construction.
    let records: Vec<slotplan_core::io::ModeRecord> =
        serde_json::from_str(&text).map_err(|e| CliError::Domain(e.to_string()))?;
    let mut rows = Vec::new();
    let mut all_ok = true;
    for r in &records {
        let stats = slotplan_core::domain::ModeStats::new(r.mean, r.std, r.semivariance, r.prob);
        match check_feasibility(&stats) {
            Feasibility::Feasible { semivariance_floor } => rows.push(FeasibilityRow {
                name: r.name.clone(),
                ok: true,
                semivariance_floor: Some(semivariance_floor),
                violations: vec![],
            }),
            Feasibility::Infeasible(violations) => {
                all_ok = false;
                rows.push(FeasibilityRow {
                    name: r.name.clone(),
                    ok: false,
                    semivariance_floor: None,
                    violations: violations
                        .iter()
                        .map(|v| format!("{} (slack {:.6})", v.constraint, v.slack))
                        .collect(),
                });
            }
        }
    }
    #[derive(Serialize)]
    struct Output {
        manifest: RunManifest,
        all_ok: bool,
        modes: Vec<FeasibilityRow>,
    }
    let out = Output {
        manifest: manifest.finish(),
        all_ok,
        modes: rows,
    };
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Domain("some modes are infeasible".into()))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    modes_path: &Path,
    _exact: bool,
    heuristic: Option<HeuristicArg>,
    features: Option<String>,
    raw_features: bool,
    k: &str,
    samples_path: Option<&Path>,
    threads: Option<usize>,
    seed: u64,
    cost_args: &CostArgs,
) -> CliResult {
    let mut manifest = ManifestBuilder::new("solve");
    manifest.seed(seed);
    let (mode_set, _names) = load_modes(&mut manifest, modes_path)?;
    let costs = cost_args.build()?;

    let solution = match heuristic {
        None => {
            let threads = threads
                .or_else(|| {
                    std::env::var("SLOTPLAN_THREADS")
                        .ok()
                        .and_then(|v| v.parse().ok())
                })
                .unwrap_or(1);
            solver::solve_exact_threads(&mode_set, &costs, threads.max(1))?
        }
        Some(method_arg) => {
            let method = match method_arg {
                HeuristicArg::Kmeans => ClusterMethod::KMeans,
                HeuristicArg::Kmedoids => ClusterMethod::KMedoids,
            };
            let spec = match &features {
                Some(text) => FeatureSpec::parse(text, !raw_features)?,
                None => {
                    let mut spec = method.default_features();
                    spec.standardize = !raw_features;
                    spec
                }
            };
            if k == "auto" {
                let samples_path = samples_path.ok_or_else(|| {
                    CliError::Domain("--k auto needs --samples for cross-validation".into())
                })?;
                let text = read_to_string(&mut manifest, samples_path)?;
                let train = parse_samples_csv(&text)?;
                if train.len() != mode_set.len() {
                    return Err(CliError::Domain(format!(
                        "sample file covers {} types, mode set has {}",
                        train.len(),
                        mode_set.len()
                    )));
                }
                let sample_set = data::SampleSet {
                    nominal_probs: mode_set.nominal_probs(),
                    truth: vec![],
                    train,
                    test: vec![],
                    clip_max: costs.horizon,
                };
                let (_k, solution) =
                    heuristics::solve_heuristic_cv(&sample_set, &costs, &spec, method, 5, seed)?;
                solution
            } else {
                let k: usize = k
                    .parse()
                    .map_err(|_| CliError::Domain(format!("bad --k value {k:?}")))?;
                heuristics::solve_heuristic(&mode_set, &costs, &spec, method, k, seed)?
            }
        }
    };

    #[derive(Serialize)]
    struct Output {
        manifest: RunManifest,
        #[serde(flatten)]
        solution: SolutionDoc,
    }
    let out = Output {
        manifest: manifest.finish(),
        solution: solution_doc(&solution, &mode_set, &costs),
    };
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(())
}

fn cmd_pi_curve(
    modes_path: &Path,
    index: usize,
    from: f64,
    to: Option<f64>,
    step: f64,
    cost_args: &CostArgs,
) -> CliResult {
    let mut manifest = ManifestBuilder::new("pi-curve");
    let (mode_set, _) = load_modes(&mut manifest, modes_path)?;
    let costs = cost_args.build()?;
    if index == 0 || index > mode_set.len() {
        return Err(CliError::Domain(format!(
            "mode index {index} outside 1..={}",
            mode_set.len()
        )));
    }
    if step.is_nan() || step <= 0.0 {
        return Err(CliError::Domain("step must be positive".into()));
    }
    let to = to.unwrap_or(costs.horizon).min(costs.horizon);
    let pw = piecewise::build(mode_set.get(index - 1), &costs)?;
    println!("t,pi,slope_left,slope_right");
    let mut t = from.max(0.0);
    while t <= to + 1e-12 {
        let at = t.min(to);
        let value = pw.cost(at)?;
        let (left, right) = pw.slopes(at)?;
        println!("{at},{value},{left},{right}");
        t += step;
    }
    eprintln!("{}", serde_json::to_string(&manifest.finish()).unwrap());
    Ok(())
}

fn cmd_oracle_check(
    modes_path: &Path,
    index: usize,
    points: usize,
    support_max: f64,
    grid_step: f64,
    band: f64,
    cost_args: &CostArgs,
) -> CliResult {
    let mut manifest = ManifestBuilder::new("oracle-check");
    let (mode_set, _) = load_modes(&mut manifest, modes_path)?;
    let costs = cost_args.build()?;
    if index == 0 || index > mode_set.len() {
        return Err(CliError::Domain(format!(
            "mode index {index} outside 1..={}",
            mode_set.len()
        )));
    }
    let stats = mode_set.get(index - 1);
    let config = OracleConfig {
        support_max,
        grid_step,
        moment_band: band,
    };
    let pw = piecewise::build(stats, &costs)?;
    println!("t,closed_form,oracle,relative_gap");
    let mut max_gap = 0.0f64;
    let points = points.max(2);
    for i in 0..points {
        let t = costs.horizon * (i as f64 + 0.5) / points as f64;
        let closed = pw.cost(t)?;
        let (oracle, _) = worst_case_discrete(stats, &costs, t, &config)?;
        let gap = (oracle - closed).abs() / closed.max(1e-9);
        max_gap = max_gap.max(gap);
        println!("{t},{closed},{oracle},{gap}");
    }
    eprintln!(
        "{}",
        serde_json::json!({
            "manifest": manifest.finish(),
            "max_relative_gap": max_gap,
        })
    );
    Ok(())
}

fn cmd_datagen(
    out_dir: &Path,
    modes: usize,
    n_train: usize,
    n_test: usize,
    clip_max: f64,
    mis_eps: f64,
    seed: u64,
) -> CliResult {
    let mut manifest = ManifestBuilder::new("datagen");
    manifest.seed(seed);
    let config = GenConfig {
        modes,
        n_train,
        n_test,
        clip_max,
        seed,
        ..GenConfig::default()
    };
    let mut sample_set = data::generate(&config)?;
    if mis_eps != 0.0 {
        let perturbed = data::perturb(&sample_set.truth, mis_eps);
        sample_set.test = data::generate_test(
            &perturbed,
            &sample_set.nominal_probs,
            n_test,
            clip_max,
            seed.wrapping_add(1),
        );
    }
    std::fs::create_dir_all(out_dir)?;
    let train_path = out_dir.join("train.csv");
    let test_path = out_dir.join("test.csv");
    let truth_path = out_dir.join("truth.json");
    std::fs::write(&train_path, samples_to_csv(&sample_set.train))?;
    std::fs::write(&test_path, samples_to_csv(&sample_set.test))?;
    #[derive(Serialize)]
    struct Truth<'a> {
        config: &'a GenConfig,
        mis_eps: f64,
        nominal_probs: &'a [f64],
        truth: &'a [data::ModeTruth],
        realized_train_counts: Vec<usize>,
    }
    std::fs::write(
        &truth_path,
        serde_json::to_string_pretty(&Truth {
            config: &config,
            mis_eps,
            nominal_probs: &sample_set.nominal_probs,
            truth: &sample_set.truth,
            realized_train_counts: sample_set.train.iter().map(|v| v.len()).collect(),
        })
        .unwrap(),
    )?;
    // Mode-set document estimated from the training samples, ready for
    // `solve`.
    let mode_set = sample_set.estimate_mode_set()?;
    let names: Vec<String> = (1..=modes).map(|i| format!("mode-{i}")).collect();
    let modes_path = out_dir.join("modes.json");
    std::fs::write(
        &modes_path,
        serde_json::to_string_pretty(&mode_document(&mode_set, &names)).unwrap(),
    )?;
    println!(
        "{}",
        serde_json::json!({
            "manifest": manifest.finish(),
            "train": train_path,
            "test": test_path,
            "truth": truth_path,
            "modes": modes_path,
        })
    );
    Ok(())
}

fn read_solution(
    manifest: &mut ManifestBuilder,
    path: &Path,
    mode_set: &ModeSet,
) -> Result<solver::Solution, CliError> {
    let text = read_to_string(manifest, path)?;
    let doc: SolutionDoc = serde_json::from_str(&text)?;
    let groups: Vec<Vec<usize>> = doc
        .partition
        .iter()
        .map(|g| {
            g.iter()
                .map(|&l| {
                    l.checked_sub(1)
                        .ok_or_else(|| CliError::Domain("mode indices are 1-based".into()))
                })
                .collect::<Result<Vec<usize>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    let partition = slotplan_core::domain::Partition::new(groups, mode_set.len())
        .map_err(|e| CliError::Domain(e.to_string()))?;
    // Durations follow the canonical group order of the document.
    let group_solutions = doc
        .per_group
        .iter()
        .map(|g| solver::GroupSolution {
            duration: g.duration,
            worst_cost: g.worst_cost,
            interval_id: 0,
        })
        .collect();
    Ok(solver::Solution {
        partition,
        group_solutions,
        objective: doc.objective,
    })
}

fn cmd_eval(
    modes_path: &Path,
    solution_path: &Path,
    samples_path: &Path,
    cost_args: &CostArgs,
) -> CliResult {
    let mut manifest = ManifestBuilder::new("eval");
    let (mode_set, _) = load_modes(&mut manifest, modes_path)?;
    let costs = cost_args.build()?;
    let solution = read_solution(&mut manifest, solution_path, &mode_set)?;
    let text = read_to_string(&mut manifest, samples_path)?;
    let samples = parse_samples_csv(&text)?;
    let report = empirical_cost(&solution, &samples, &mode_set.nominal_probs(), &costs)?;
    // Aligned table for humans on stderr, JSON on stdout.
    eprintln!(
        "{:>6} {:>10} {:>12} {:>10} {:>10}",
        "group", "duration", "mean cost", "idle", "overtime"
    );
    for (i, g) in report.per_group.iter().enumerate() {
        eprintln!(
            "{:>6} {:>10.2} {:>12.2} {:>10.2} {:>10.2}",
            i + 1,
            g.duration,
            g.mean_cost,
            g.idle_minutes,
            g.overtime_minutes
        );
    }
    eprintln!(
        "{:>6} {:>10} {:>12.2} {:>10.2} {:>10.2}  (total incl. activation {:.2})",
        "avg",
        "",
        report.total_cost - report.activation_cost,
        report.idle_minutes_mean,
        report.overtime_minutes_mean,
        report.total_cost
    );
    #[derive(Serialize)]
    struct Output {
        manifest: RunManifest,
        #[serde(flatten)]
        report: slotplan_core::eval::EvalReport,
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&Output {
            manifest: manifest.finish(),
            report,
        })
        .unwrap()
    );
    Ok(())
}

fn cmd_overrides(
    modes_path: &Path,
    solution_path: &Path,
    demand_path: &Path,
    capacity: f64,
    shares: Option<&str>,
    per_day: bool,
) -> CliResult {
    let mut manifest = ManifestBuilder::new("overrides");
    let (mode_set, _) = load_modes(&mut manifest, modes_path)?;
    let solution = read_solution(&mut manifest, solution_path, &mode_set)?;
    let durations: Vec<f64> = solution.group_solutions.iter().map(|g| g.duration).collect();
    let shares: Vec<f64> = match shares {
        Some(text) => text
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Domain(format!("bad share {v:?}")))
            })
            .collect::<Result<_, _>>()?,
        None => solution
            .partition
            .groups()
            .iter()
            .map(|g| g.iter().map(|&l| mode_set.get(l).nominal_prob).sum())
            .collect(),
    };
    let allocation = allocate_slots(capacity, &durations, &shares)?;
    let text = read_to_string(&mut manifest, demand_path)?;
    let demand = parse_demand_csv(&text, allocation.slots.len())?;
    let report = count_overrides(&allocation, &demand, per_day)?;
    #[derive(Serialize)]
    struct Output {
        manifest: RunManifest,
        capacity_minutes: f64,
        used_minutes: f64,
        slots: Vec<(f64, usize)>,
        per_day_indicator: bool,
        total_overrides: u64,
        per_group_overrides: Vec<u64>,
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&Output {
            manifest: manifest.finish(),
            capacity_minutes: allocation.capacity_minutes,
            used_minutes: allocation.used_minutes(),
            slots: allocation.slots.clone(),
            per_day_indicator: per_day,
            total_overrides: report.total,
            per_group_overrides: report.per_group,
        })
        .unwrap()
    );
    Ok(())
}

fn cmd_bench(min_modes: usize, max_modes: usize, seed: u64, cost_args: &CostArgs) -> CliResult {
    let mut manifest = ManifestBuilder::new("bench");
    manifest.seed(seed);
    let costs = cost_args.build()?;
    println!(
        "{:>5} {:>12} {:>12} {:>14}",
        "modes", "partitions", "seconds", "objective"
    );
    for l in min_modes..=max_modes.min(12) {
        let config = GenConfig {
            modes: l,
            n_train: (40 * l).max(100),
            n_test: l,
            seed,
            ..GenConfig::default()
        };
        let sample_set = data::generate(&config)?;
        let mode_set = sample_set.estimate_mode_set()?;
        let partitions = solver::enumerate_partitions(l)?.count();
        let start = Instant::now();
        let solution = solver::solve_exact(&mode_set, &costs)?;
        let elapsed = start.elapsed();
        println!(
            "{l:>5} {partitions:>12} {:>12.3} {:>14.2}",
            elapsed.as_secs_f64(),
            solution.objective
        );
    }
    eprintln!("{}", serde_json::to_string(&manifest.finish()).unwrap());
    Ok(())
}
