use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use submdp::env::{self, NavMap};
use submdp::harness::render::{render_cells, trajectory_cells, RenderFormat};
use submdp::harness::{
    self, algorithm_seed, build_instance, repetition_seed, AlgSpec, EnvSpec, ExperimentConfig,
    GradientChoice, Rounding,
};
use submdp::mdp::read_mdp;
use submdp::{DeterministicPolicy, LeveledMdp};

#[derive(Parser)]
#[command(
    name = "submdp",
    version,
    about = "Planning with submodular objectives over visited state-action pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one instance, run one algorithm, print its value and path.
    Plan(PlanArgs),
    /// Run an experiment config and write its result tables.
    Bench(BenchArgs),
    /// Draw a trajectory on a navigation map.
    Render(RenderArgs),
    /// Check an MDP file or a map file.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvKind {
    Synthetic,
    Nav,
    Cardinality,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgKind {
    Cg,
    Dp,
    Greedy,
}

#[derive(Args)]
struct EnvArgs {
    #[arg(long, value_enum, default_value = "synthetic")]
    env: EnvKind,
    /// Grid side (synthetic) or item count (cardinality).
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Pairs per sparse coordinate (synthetic).
    #[arg(long, default_value_t = 2)]
    t: usize,
    /// Reward matrix dimension (synthetic).
    #[arg(long, default_value_t = 10)]
    d: usize,
    #[arg(long, default_value_t = 1e-5)]
    lambda: f64,
    /// Map file (nav).
    #[arg(long)]
    map: Option<PathBuf>,
    /// Redraw this many targets among navigable cells (nav).
    #[arg(long)]
    targets: Option<usize>,
    /// Budget (cardinality).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Coverage file (cardinality); random items otherwise.
    #[arg(long)]
    objective: Option<PathBuf>,
}

impl EnvArgs {
    fn spec(&self) -> Result<EnvSpec, String> {
        Ok(match self.env {
            EnvKind::Synthetic => EnvSpec::Synthetic {
                id: None,
                n: self.n,
                t: self.t,
                d: self.d,
                lambda: self.lambda,
            },
            EnvKind::Nav => EnvSpec::Nav {
                id: None,
                map: self.map.clone().ok_or("--env nav needs --map")?,
                lambda: self.lambda,
                targets: self.targets,
            },
            EnvKind::Cardinality => EnvSpec::Cardinality {
                id: None,
                n: self.n,
                k: self.k,
                objective: self.objective.clone(),
                universe: 20,
                density: 0.2,
            },
        })
    }
}

#[derive(Args)]
struct AlgArgs {
    #[arg(long, value_enum, default_value = "cg")]
    alg: AlgKind,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Monte-Carlo samples per gradient estimate.
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, value_enum, default_value = "high")]
    rounding: RoundingArg,
    /// Use closed-form gradients where the objective has them.
    #[arg(long)]
    exact_gradient: bool,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Augmentation level for dp and greedy.
    #[arg(long, default_value_t = 1)]
    l: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundingArg {
    None,
    High,
    Sub,
}

impl AlgArgs {
    fn spec(&self) -> AlgSpec {
        match self.alg {
            AlgKind::Cg => AlgSpec::Cg {
                id: None,
                delta: self.delta,
                samples: self.samples,
                rounding: match self.rounding {
                    RoundingArg::None => Rounding::None,
                    RoundingArg::High => Rounding::High,
                    RoundingArg::Sub => Rounding::Sub,
                },
                restarts: self.restarts,
                gradient: if self.exact_gradient {
                    GradientChoice::Exact
                } else {
                    GradientChoice::MonteCarlo
                },
                round_samples: 100,
                final_samples: 1000,
            },
            AlgKind::Dp => AlgSpec::Dp {
                id: None,
                l: self.l,
            },
            AlgKind::Greedy => AlgSpec::Greedy {
                id: None,
                l: self.l,
            },
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    alg: AlgArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repetition index; the instance is the one `bench` builds for it.
    #[arg(long, default_value_t = 0)]
    rep: usize,
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    /// Worker threads; overrides the config (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Write results CSV here instead of the config's path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Ppm,
}

#[derive(Args)]
struct RenderArgs {
    /// Map file.
    map: PathBuf,
    /// Explicit moves such as `RRDD...`; otherwise the chosen algorithm plans one.
    #[arg(long)]
    moves: Option<String>,
    #[command(flatten)]
    alg: AlgArgs,
    #[arg(long, default_value_t = 1e-5)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "ascii")]
    format: Format,
    /// Pixels per cell in PPM output.
    #[arg(long, default_value_t = 8)]
    scale: usize,
    /// Output file; stdout otherwise.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileKind {
    Auto,
    Mdp,
    Map,
}

#[derive(Args)]
struct ValidateArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    kind: FileKind,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Plan(a) => plan(a),
        Command::Bench(a) => bench(a),
        Command::Render(a) => render(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn path_labels(mdp: &LeveledMdp, policy: &DeterministicPolicy) -> Result<String, String> {
    let traj = mdp.follow(policy).map_err(|e| e.to_string())?;
    Ok(traj
        .pairs(mdp)
        .iter()
        .map(|&e| mdp.pair_label(e))
        .collect::<Vec<_>>()
        .join(" "))
}

fn plan(a: PlanArgs) -> Result<(), String> {
    let spec = a.env.spec()?;
    let inst = build_instance(&spec, a.seed, a.rep).map_err(|e| e.to_string())?;
    let alg = a.alg.spec();
    let rep_seed = repetition_seed(a.seed, a.rep);
    let out = harness::run_algorithm(
        &inst.mdp,
        inst.objective.as_ref(),
        &alg,
        algorithm_seed(rep_seed),
    )
    .map_err(|e| e.to_string())?;
    println!("env {}", spec.id());
    println!("algorithm {}", alg.id());
    println!("value {}", harness::emit::fmt_g(out.value));
    if let Some(policy) = &out.policy {
        println!("path {}", path_labels(&inst.mdp, policy)?);
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), String> {
    let mut cfg = ExperimentConfig::load(&a.config).map_err(|e| e.to_string())?;
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    if let Some(csv) = a.csv {
        cfg.output.csv = Some(csv);
    }
    let exp = harness::run_experiment(&cfg).map_err(|e| e.to_string())?;
    exp.write(&cfg.output).map_err(|e| e.to_string())?;
    for row in exp.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "{} {} rep {}: {}",
            row.env,
            row.algorithm,
            row.repetition,
            row.error.as_deref().unwrap_or_default()
        );
    }
    print!("{}", exp.summary_csv());
    Ok(())
}

fn apply_moves(mdp: &LeveledMdp, moves: &str) -> Result<DeterministicPolicy, String> {
    let mut policy = DeterministicPolicy::lowest(mdp);
    let mut s = mdp.initial();
    for m in moves.chars().filter(|c| !c.is_whitespace()) {
        if !mdp.is_acting(s) {
            return Err(format!("move {m} after the goal"));
        }
        let a = mdp
            .actions(s)
            .iter()
            .position(|act| act.label == m.to_string())
            .ok_or_else(|| format!("move {m} not available at {}", mdp.state(s).name))?;
        policy.set(s, a);
        s = mdp.next_state(s, a);
    }
    if mdp.is_acting(s) {
        return Err(format!(
            "moves stop at {} before the goal",
            mdp.state(s).name
        ));
    }
    Ok(policy)
}

fn render(a: RenderArgs) -> Result<(), String> {
    let map: NavMap = env::read_map(&a.map).map_err(|e| e.to_string())?;
    let (mdp, obj) = env::build_nav(&map, a.lambda).map_err(|e| e.to_string())?;
    let policy = match &a.moves {
        Some(m) => apply_moves(&mdp, m)?,
        None => harness::run_algorithm(&mdp, &obj, &a.alg.spec(), a.seed)
            .map_err(|e| e.to_string())?
            .policy
            .ok_or("rendering needs a deterministic policy; pick a rounding")?,
    };
    let traj = mdp.follow(&policy).map_err(|e| e.to_string())?;
    let cells = trajectory_cells(&mdp, &traj).map_err(|e| e.to_string())?;
    let format = match a.format {
        Format::Ascii => RenderFormat::Ascii,
        Format::Ppm => RenderFormat::Ppm { scale: a.scale },
    };
    let bytes = render_cells(&map, &cells, format).map_err(|e| e.to_string())?;
    match &a.out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| e.to_string()),
    }
}

fn looks_like_mdp(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with(';'))
        .is_some_and(|l| {
            l.starts_with("levels") || l.starts_with("state") || l.starts_with("initial")
        })
}

fn validate(a: ValidateArgs) -> Result<(), String> {
    let text =
        std::fs::read_to_string(&a.file).map_err(|e| format!("{}: {e}", a.file.display()))?;
    let is_mdp = match a.kind {
        FileKind::Mdp => true,
        FileKind::Map => false,
        FileKind::Auto => looks_like_mdp(&text),
    };
    if is_mdp {
        validate_mdp(&a.file)
    } else {
        validate_map(&a.file)
    }
}

fn validate_mdp(path: &Path) -> Result<(), String> {
    let mdp = read_mdp(path).map_err(|e| e.to_string())?;
    let report = mdp.validate();
    if report.is_empty() {
        println!(
            "ok: {} states, {} levels, {} pairs",
            mdp.num_states(),
            mdp.levels(),
            mdp.ground_size()
        );
        return Ok(());
    }
    for v in &report {
        println!("{v}");
    }
    Err(format!("{} violations", report.len()))
}

fn validate_map(path: &Path) -> Result<(), String> {
    let map = env::read_map(path).map_err(|e| e.to_string())?;
    let (mdp, _) = env::build_nav(&map, 1e-5).map_err(|e| e.to_string())?;
    println!(
        "ok: {}x{} map, {} targets, {} reachable states, {} pairs",
        map.n,
        map.n,
        map.targets.len(),
        mdp.num_states(),
        mdp.ground_size()
    );
    Ok(())
}
