mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use flpg_core::dynamics::{cce_gap, empirical_regret, flpg_loss_tables, run_dynamics,
    NormalizationConstants, RepeatedGameSpec};
use flpg_core::equilibrium::{linspace, region_scan, robust_equilibrium, scan_csv};
use flpg_core::game::{
    attacker_payoff_bounds, defender_payoff_bounds, model_utility_bounds, privacy_leakage_bounds,
    GameConfig, Interval, LeakageBounds, RobustOperator, StrategyProfile,
};
use flpg_core::oracle::{coefficients, solve_oracle_lp, CorrelatedGame2x2, Family, OracleSolution};
use flpg_core::sandbox::{fit_constants, simulate_attack, validate_bounds, FitReport, LinearTask};
use manifest::ManifestBuilder;

const EXIT_VALIDATION: u8 = 1;
const EXIT_REGULARITY: u8 = 2;

#[derive(Parser)]
#[command(name = "flpg", version, about = "Federated-learning privacy game toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Payoff and leakage bounds at one strategy profile.
    Bounds(BoundsArgs),
    /// Robust-equilibrium report for a config.
    Equilibrium(EquilibriumArgs),
    /// Attacker-payoff sign scan over a (delta, rounds) grid, as CSV.
    Scan(ScanArgs),
    /// Correlation-oracle LP on a 2x2 robust payoff instance.
    Oracle(OracleArgs),
    /// Repeated-game no-regret dynamics.
    Dynamics(DynamicsArgs),
    /// Gradient-inversion sandbox with leakage-bound containment checks.
    Sandbox(SandboxArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    WorstCase,
    UniformExpectation,
}

impl From<OpArg> for RobustOperator {
    fn from(op: OpArg) -> Self {
        match op {
            OpArg::WorstCase => RobustOperator::WorstCase,
            OpArg::UniformExpectation => RobustOperator::UniformExpectation,
        }
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated protection extents; a single value broadcasts to all
    /// defenders.
    #[arg(long)]
    deltas: String,
    /// Attacking extent (real-valued rounds).
    #[arg(long)]
    rounds: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquilibriumArgs {
    #[arg(long)]
    config: PathBuf,
    /// Threshold for the tau-equilibrium classification.
    #[arg(long)]
    tau: Option<u32>,
    #[arg(long, value_enum, default_value = "worst-case")]
    op: OpArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 101)]
    delta_steps: usize,
    #[arg(long, default_value_t = 101)]
    rounds_steps: usize,
    /// CSV destination; stdout when omitted. A `<out>.manifest.json` file is
    /// written alongside.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// JSON instance: {defender_payoff, attacker_payoff, cost, margin?}.
    #[arg(long)]
    input: PathBuf,
    /// Overrides the instance margin (default 1e-6).
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DynamicsArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 20_000)]
    rounds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 17)]
    delta_levels: usize,
    #[arg(long, default_value_t = 16)]
    attacker_actions: usize,
    #[arg(long, value_enum, default_value = "worst-case")]
    op: OpArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional per-round CSV `t,player,action,loss`.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SandboxArgs {
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long)]
    delta: f64,
    /// Horizon of the validated trace.
    #[arg(long)]
    rounds: u32,
    /// Comma-separated task seeds, one task per seed.
    #[arg(long, default_value = "1")]
    seeds: String,
    /// Comma-separated fitting horizons (at least three distinct).
    #[arg(long, default_value = "50,100,200,400")]
    horizons: String,
    #[arg(long, default_value_t = 0.95)]
    sigma_min: f64,
    #[arg(long, default_value_t = 1.25)]
    sigma_max: f64,
    #[arg(long, default_value_t = 4.0)]
    d_bound: f64,
    /// Private-vector norm as a fraction of the data bound. Small fractions
    /// keep the fitted residual constants inside the bound-validity
    /// inequalities.
    #[arg(long, default_value_t = 0.05)]
    s_norm_frac: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-trace CSVs `t,distance,residual`.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_VALIDATION),
            };
        }
    };
    if let Ok(threads) = std::env::var("FLPG_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

fn classify(err: &anyhow::Error) -> u8 {
    if let Some(core) = err.downcast_ref::<flpg_core::Error>() {
        match core {
            flpg_core::Error::Regularity(_) | flpg_core::Error::SingularSystem { .. } => {
                EXIT_REGULARITY
            }
            _ => EXIT_VALIDATION,
        }
    } else if err.downcast_ref::<InfeasibleOracle>().is_some() {
        EXIT_REGULARITY
    } else {
        EXIT_VALIDATION
    }
}

#[derive(Debug)]
struct InfeasibleOracle(Vec<usize>);

impl std::fmt::Display for InfeasibleOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "oracle constraint set infeasible; violated constraints at the least-infeasible \
             basic solution: {:?} (0-3 follow constraints, 4-7 nonnegativity)",
            self.0
        )
    }
}

impl std::error::Error for InfeasibleOracle {}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Bounds(args) => run_bounds(args),
        Command::Equilibrium(args) => run_equilibrium(args),
        Command::Scan(args) => run_scan(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Dynamics(args) => run_dynamics_cmd(args),
        Command::Sandbox(args) => run_sandbox(args),
    }
}

fn load_config(path: &Path) -> anyhow::Result<GameConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    let (cfg, warnings) = GameConfig::from_json(&text)?;
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
    Ok(cfg)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("invalid {what} entry {s:?}: {e}"))
        })
        .collect()
}

fn emit_json<T: Serialize>(report: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => fs::write(path, text.as_bytes())
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsReport {
    manifest: manifest::RunManifest,
    deltas: Vec<f64>,
    rounds: f64,
    leakage: Vec<LeakageBounds>,
    model_utility: Vec<Interval>,
    defender_payoffs: Vec<Interval>,
    attacker_payoff: Interval,
}

fn run_bounds(args: BoundsArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.config)?;
    let mut deltas: Vec<f64> = parse_list(&args.deltas, "delta")?;
    if deltas.len() == 1 && cfg.num_defenders > 1 {
        deltas = vec![deltas[0]; cfg.num_defenders];
    }
    let profile = StrategyProfile::new(deltas.clone(), args.rounds, &cfg)?;
    let leakage = deltas
        .iter()
        .map(|&d| privacy_leakage_bounds(d, args.rounds, &cfg))
        .collect::<flpg_core::Result<Vec<_>>>()?;
    let model_utility = (0..cfg.num_defenders)
        .map(|k| model_utility_bounds(profile.delta_mean(), cfg.baseline_perf[k]))
        .collect();
    let defender_payoffs = (0..cfg.num_defenders)
        .map(|k| defender_payoff_bounds(&profile, k, &cfg))
        .collect::<flpg_core::Result<Vec<_>>>()?;
    let attacker_payoff = attacker_payoff_bounds(&profile, &cfg)?;
    let manifest = ManifestBuilder::new("bounds")
        .config_path(Some(&args.config))
        .output(args.out.as_deref())
        .finish();
    emit_json(
        &BoundsReport {
            manifest,
            deltas,
            rounds: args.rounds,
            leakage,
            model_utility,
            defender_payoffs,
            attacker_payoff,
        },
        args.out.as_deref(),
    )
}

#[derive(Serialize)]
struct EquilibriumCliReport {
    manifest: manifest::RunManifest,
    #[serde(flatten)]
    report: flpg_core::equilibrium::EquilibriumReport,
}

fn run_equilibrium(args: EquilibriumArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.config)?;
    let report = robust_equilibrium(&cfg, args.op.into(), args.tau)?;
    let manifest = ManifestBuilder::new("equilibrium")
        .config_path(Some(&args.config))
        .output(args.out.as_deref())
        .finish();
    emit_json(&EquilibriumCliReport { manifest, report }, args.out.as_deref())
}

fn run_scan(args: ScanArgs) -> anyhow::Result<()> {
    if args.delta_steps == 0 || args.rounds_steps == 0 {
        anyhow::bail!("scan grids need at least one step in each direction");
    }
    let cfg = load_config(&args.config)?;
    let delta_grid = linspace(cfg.d, args.delta_steps);
    let rounds_grid = linspace(cfg.round_cap as f64, args.rounds_steps);
    let cells = region_scan(&cfg, &delta_grid, &rounds_grid)?;
    let csv = scan_csv(&cells);
    let manifest = ManifestBuilder::new("scan")
        .config_path(Some(&args.config))
        .output(args.out.as_deref())
        .finish();
    match &args.out {
        Some(path) => {
            fs::write(path, csv.as_bytes())
                .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
            let manifest_path = path.with_extension("manifest.json");
            fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
            println!("{}", serde_json::to_string_pretty(&manifest)?);
        }
        None => print!("{csv}"),
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleInput {
    defender_payoff: [[f64; 2]; 2],
    attacker_payoff: [[f64; 2]; 2],
    cost: [f64; 4],
    #[serde(default)]
    margin: Option<f64>,
}

#[derive(Serialize)]
struct OracleReport {
    manifest: manifest::RunManifest,
    margin: f64,
    #[serde(flatten)]
    solution: OracleSolution,
}

fn run_oracle(args: OracleArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", args.input.display()))?;
    let input: OracleInput = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("invalid oracle instance: {e}"))?;
    let margin = args.margin.or(input.margin).unwrap_or(1e-6);
    if margin <= 0.0 {
        anyhow::bail!("margin must be positive, got {margin}");
    }
    let game = CorrelatedGame2x2 {
        defender_payoff: input.defender_payoff,
        attacker_payoff: input.attacker_payoff,
        cost: input.cost,
    };
    let solution = solve_oracle_lp(&coefficients(&game), game.cost, margin);
    let infeasible = solution.family == Family::Infeasible;
    let certificate = solution.infeasibility_certificate.clone();
    let manifest = ManifestBuilder::new("oracle")
        .config_path(Some(&args.input))
        .output(args.out.as_deref())
        .finish();
    emit_json(&OracleReport { manifest, margin, solution }, args.out.as_deref())?;
    if infeasible {
        return Err(InfeasibleOracle(certificate.unwrap_or_default()).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct JointEntry {
    actions: Vec<usize>,
    count: u64,
}

#[derive(Serialize)]
struct DynamicsReport {
    manifest: manifest::RunManifest,
    per_player_regret: Vec<f64>,
    cce_gap: f64,
    empirical_joint: Vec<JointEntry>,
    normalization_constants: NormalizationConstants,
    delta_levels: Vec<f64>,
    attacker_actions: Vec<f64>,
}

fn run_dynamics_cmd(args: DynamicsArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.config)?;
    let (tables, normalization) =
        flpg_loss_tables(&cfg, args.op.into(), args.delta_levels, args.attacker_actions)?;
    let spec = RepeatedGameSpec::new(tables, args.rounds, args.seed);
    let trace = run_dynamics(&spec)?;
    let regret = empirical_regret(&trace, &spec.tables);
    let gap = cce_gap(&trace.joint_counts, &spec.tables);

    if let Some(csv_path) = &args.csv {
        let mut csv = String::from("t,player,action,loss\n");
        for (t, (actions, losses)) in
            trace.actions.iter().zip(&trace.realized_losses).enumerate()
        {
            for (player, (&action, &loss)) in actions.iter().zip(losses).enumerate() {
                csv.push_str(&format!("{},{},{},{:.8e}\n", t + 1, player, action, loss));
            }
        }
        fs::write(csv_path, csv.as_bytes())
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", csv_path.display()))?;
    }

    let empirical_joint: Vec<JointEntry> = trace
        .joint_counts
        .iter()
        .map(|(&joint, &count)| JointEntry {
            actions: spec.tables.joint_actions(joint),
            count,
        })
        .collect();
    let manifest = ManifestBuilder::new("dynamics")
        .config_path(Some(&args.config))
        .seed(Some(args.seed))
        .output(args.out.as_deref())
        .output(args.csv.as_deref())
        .finish();
    emit_json(
        &DynamicsReport {
            manifest,
            per_player_regret: regret,
            cce_gap: gap,
            empirical_joint,
            normalization_constants: normalization,
            delta_levels: spec.tables.action_labels[0].clone(),
            attacker_actions: spec.tables.action_labels[cfg.num_defenders].clone(),
        },
        args.out.as_deref(),
    )
}

#[derive(Serialize)]
struct SandboxSeedReport {
    seed: u64,
    empirical_vp: f64,
    lower: f64,
    upper: f64,
    contained: bool,
    mean_distance_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
    fitted_constants: FitReport,
}

#[derive(Serialize)]
struct SandboxReport {
    manifest: manifest::RunManifest,
    dim: usize,
    delta: f64,
    rounds: u32,
    contained_count: usize,
    total: usize,
    per_seed: Vec<SandboxSeedReport>,
}

fn run_sandbox(args: SandboxArgs) -> anyhow::Result<()> {
    let seeds: Vec<u64> = parse_list(&args.seeds, "seed")?;
    let horizons: Vec<u32> = parse_list(&args.horizons, "horizon")?;
    if let Some(dir) = &args.csv_dir {
        fs::create_dir_all(dir)
            .map_err(|e| anyhow::anyhow!("cannot create {}: {e}", dir.display()))?;
    }
    let mut per_seed = Vec::new();
    let mut contained_count = 0usize;
    for &seed in &seeds {
        let task = LinearTask::random(
            args.dim,
            args.sigma_min,
            args.sigma_max,
            args.d_bound,
            args.s_norm_frac,
            4,
            seed,
        )?;
        let fitting: Vec<_> = horizons
            .iter()
            .enumerate()
            .map(|(i, &h)| simulate_attack(&task, args.delta, h, seed.wrapping_add(i as u64 + 1)))
            .collect::<flpg_core::Result<_>>()?;
        let fit = fit_constants(&fitting)?;
        let trace = simulate_attack(&task, args.delta, args.rounds, seed.wrapping_mul(31).wrapping_add(7))?;
        let report = validate_bounds(&trace, args.delta, &fit, &task)?;
        if report.contained {
            contained_count += 1;
        }
        if let Some(dir) = &args.csv_dir {
            let mut csv = String::from("t,distance,residual\n");
            for (t, (d, r)) in trace.distances.iter().zip(&trace.residuals).enumerate() {
                csv.push_str(&format!("{},{:.8e},{:.8e}\n", t + 1, d, r));
            }
            fs::write(dir.join(format!("trace_{seed}.csv")), csv.as_bytes())?;
        }
        per_seed.push(SandboxSeedReport {
            seed,
            empirical_vp: report.empirical,
            lower: report.lower,
            upper: report.upper,
            contained: report.contained,
            mean_distance_ok: report.mean_distance_ok,
            skipped: report.skipped,
            fitted_constants: fit,
        });
    }
    let manifest = ManifestBuilder::new("sandbox")
        .seed(seeds.first().copied())
        .output(args.out.as_deref())
        .finish();
    emit_json(
        &SandboxReport {
            manifest,
            dim: args.dim,
            delta: args.delta,
            rounds: args.rounds,
            contained_count,
            total: seeds.len(),
            per_seed,
        },
        args.out.as_deref(),
    )
}
