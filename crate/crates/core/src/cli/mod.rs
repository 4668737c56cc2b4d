//! The `farmopt` command line: `run`, `taylor-test`, `gen-wake-table`, `render`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

pub mod config;
pub mod render;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::flowfield::linear_gradient_flow;
use crate::layout::{random_layout, Layout, RngSeed, Site, TurbineSpec};
use crate::objective::oracles::Quadratic;
use crate::objective::Objective;
use crate::pipeline::{run_hybrid, HybridPlan, PlanSettings, Scenario};
use crate::power::{random_direction, taylor_remainder_test, PowerFunctional};
use crate::wake::{default_table, synth_swe_like_table, ReductionTable, SynthWakeParams, TableExtent, WakeSet};

pub use config::{load_config, RunConfig, TaylorConfig, OUT_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "farmopt", version, about = "Turbine array layout optimization over an analytical wake model")]
pub struct Cli {
    /// RNG seed (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides FARMOPT_OUT and the config file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize a scenario and write a run directory.
    Run(RunArgs),
    /// Check the power gradient with a Taylor remainder test.
    TaylorTest(TaylorArgs),
    /// Write a synthetic wake reduction table.
    GenWakeTable(WakeTableArgs),
    /// Draw a run directory as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config; flags override its keys.
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long = "n")]
    pub n_turbines: Option<usize>,
    /// local, hybrid-ga or hybrid-bh.
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long)]
    pub stage1_iterations: Option<usize>,
    #[arg(long)]
    pub stage2_iterations: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub wake_table: Option<PathBuf>,
    /// Record wall-clock seconds in report.csv.
    #[arg(long)]
    pub timing: bool,
    /// Write layout snapshots at every tenth of each stage.
    #[arg(long)]
    pub snapshots: bool,
}

#[derive(Debug, Args)]
pub struct TaylorArgs {
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub h0: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub directions: Option<usize>,
    #[arg(long = "n")]
    pub n_turbines: Option<usize>,
    #[arg(long)]
    pub wake_table: Option<PathBuf>,
    /// Scale the gradient by 1.1 so the test must fail.
    #[arg(long)]
    pub corrupt_gradient: bool,
    /// Test `||m||^2` instead of the power functional.
    #[arg(long)]
    pub quadratic: bool,
}

#[derive(Debug, Args)]
pub struct WakeTableArgs {
    /// Rotor diameter (m).
    #[arg(long, default_value_t = 20.0)]
    pub diameter: f64,
    /// Thrust coefficient.
    #[arg(long, default_value_t = 0.84)]
    pub ct: f64,
    /// Node spacing (m), used when --nx/--ny are absent.
    #[arg(long, default_value_t = 5.0)]
    pub spacing: f64,
    #[arg(long, requires = "ny")]
    pub nx: Option<usize>,
    #[arg(long, requires = "nx")]
    pub ny: Option<usize>,
    /// `x_min,x_max,y_min,y_max` in the turbine frame (m); defaults to [-5D,45D] x [-10D,10D].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub extent: Option<Vec<f64>>,
    /// Output file; defaults to `<out>/wake_table.txt`.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub run_dir: PathBuf,
    /// Output file; defaults to `<run_dir>/layout.svg`.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::TooFewTurbines { .. } | Error::InvalidTurbine(_) | Error::InvalidSite(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("farmopt: {f}");
            f.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> CmdResult {
    let Cli { seed, out, jobs, command } = cli;
    let out = out.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from));
    match command {
        Command::Run(args) => cmd_run(args, seed, out, jobs),
        Command::TaylorTest(args) => with_jobs(jobs.unwrap_or(0), || cmd_taylor_test(args, seed))?,
        Command::GenWakeTable(args) => cmd_gen_wake_table(args, out),
        Command::Render(args) => cmd_render(args),
    }
}

fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> std::result::Result<R, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Config file (or defaults) with command-line overrides applied.
pub fn effective_run_config(
    args: &RunArgs,
    seed: Option<u64>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
) -> crate::Result<RunConfig> {
    let mut cfg: RunConfig = match &args.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &args.scenario {
        cfg.scenario = v.clone();
    }
    if let Some(v) = args.n_turbines {
        cfg.n_turbines = v;
    }
    if let Some(v) = &args.optimizer {
        cfg.optimizer = v.clone();
    }
    if let Some(v) = args.stage1_iterations {
        cfg.stage1_iterations = v;
    }
    if let Some(v) = args.stage2_iterations {
        cfg.stage2_iterations = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = &args.wake_table {
        cfg.wake_table = Some(v.clone());
    }
    cfg.timing |= args.timing;
    cfg.snapshots |= args.snapshots;
    if let Some(v) = seed {
        cfg.seed = v;
    }
    if let Some(v) = out {
        cfg.out = v;
    }
    if let Some(v) = jobs {
        cfg.jobs = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Scenario and plan described by `cfg`.
pub fn build_run(cfg: &RunConfig) -> crate::Result<(Scenario, HybridPlan)> {
    let scenario = Scenario::preset(&cfg.scenario, cfg.n_turbines)?;
    let settings = PlanSettings {
        optimizer: cfg.optimizer_kind()?,
        stage1_budget: cfg.stage1_iterations,
        stage2_iterations: cfg.stage2_iterations,
        alpha: cfg.alpha,
        stage1_table_spacing: cfg.stage1_table_spacing,
        stage2_table_spacing: cfg.stage2_table_spacing,
        ..PlanSettings::default()
    };
    let mut plan = HybridPlan::wake_model(&scenario, &settings)?;
    if let Some(path) = &cfg.wake_table {
        let table = ReductionTable::load(path)?;
        let objective: Arc<dyn Objective<f64>> =
            Arc::new(PowerFunctional::new(cfg.alpha, scenario.ambient.clone(), WakeSet::shared(table), scenario.site)?);
        plan.stage1_objective = objective.clone();
        plan.stage2_objective = objective;
    }
    Ok((scenario, plan))
}

fn cmd_run(args: RunArgs, seed: Option<u64>, out: Option<PathBuf>, jobs: Option<usize>) -> CmdResult {
    let cfg = effective_run_config(&args, seed, out, jobs)?;
    let (scenario, plan) = build_run(&cfg)?;
    let report = with_jobs(cfg.jobs, || run_hybrid(&scenario, &plan, RngSeed(cfg.seed)))?;
    let (report, failure) = match report {
        Ok(r) => (r, None),
        Err(f) => (*f.partial.clone(), Some(f)),
    };
    report.write_dir(&cfg.out, cfg.timing, cfg.snapshots)?;
    let echo = config::to_toml(&cfg)?;
    let echo_path = cfg.out.join("config.toml");
    fs::write(&echo_path, echo).map_err(|e| Failure::Runtime(format!("{}: {e}", echo_path.display())))?;
    if let Some(f) = failure {
        return Err(Failure::Runtime(format!("{f} (partial results in {})", cfg.out.display())));
    }
    println!(
        "{} {} N={} seed={}: J_initial={:.6e} J_intermediate={:.6e} J_final={:.6e} -> {}",
        scenario.name,
        cfg.optimizer,
        cfg.n_turbines,
        cfg.seed,
        report.j_initial(),
        report.j_intermediate(),
        report.j_final(),
        cfg.out.display()
    );
    Ok(())
}

/// Gradient scaled by a constant; a deliberately wrong gradient for the test harness.
struct ScaledGradient<O> {
    inner: O,
    factor: f64,
}

impl<O: Objective<f64>> Objective<f64> for ScaledGradient<O> {
    fn value(&self, layout: &Layout<f64>) -> crate::Result<f64> {
        self.inner.value(layout)
    }
    fn has_gradient(&self) -> bool {
        true
    }
    fn gradient(&self, layout: &Layout<f64>) -> crate::Result<Vec<f64>> {
        Ok(self.inner.gradient(layout)?.into_iter().map(|g| g * self.factor).collect())
    }
}

fn taylor_objective(cfg: &TaylorConfig, site: Site<f64>, quadratic: bool) -> crate::Result<Arc<dyn Objective<f64>>> {
    if quadratic {
        return Ok(Arc::new(Quadratic::<f64>::norm_squared(2 * cfg.n_turbines)));
    }
    let table = match &cfg.wake_table {
        Some(p) => ReductionTable::load(p)?,
        None => default_table(&TurbineSpec::default(), cfg.table_spacing)?,
    };
    Ok(Arc::new(PowerFunctional::new(cfg.alpha, Arc::new(linear_gradient_flow()), WakeSet::shared(table), site)?))
}

fn cmd_taylor_test(args: TaylorArgs, seed: Option<u64>) -> CmdResult {
    let mut cfg: TaylorConfig = match &args.config {
        Some(p) => load_config(p)?,
        None => TaylorConfig::default(),
    };
    if let Some(v) = seed {
        cfg.seed = v;
    }
    if let Some(v) = args.h0 {
        cfg.h0 = v;
    }
    if let Some(v) = args.levels {
        cfg.levels = v;
    }
    if let Some(v) = args.directions {
        cfg.directions = v;
    }
    if let Some(v) = args.n_turbines {
        cfg.n_turbines = v;
    }
    if let Some(v) = args.wake_table {
        cfg.wake_table = Some(v);
    }
    if cfg.n_turbines == 0 || cfg.directions == 0 || !(cfg.h0 > 0.0) {
        return Err(Failure::Usage("taylor-test needs n_turbines, directions and h0 positive".into()));
    }

    let site = Site::new(0.0, 640.0, 0.0, 320.0)?;
    let seed = RngSeed(cfg.seed);
    let layout = random_layout(cfg.n_turbines, &site, &mut seed.derive(0).rng());
    let base = taylor_objective(&cfg, site, args.quadratic)?;
    let objective: Arc<dyn Objective<f64>> =
        if args.corrupt_gradient { Arc::new(ScaledGradient { inner: base, factor: 1.1 }) } else { base };

    let mut all_pass = true;
    for k in 0..cfg.directions {
        let direction = random_direction::<f64>(layout.len(), seed.derive(100 + k as u64));
        let report = taylor_remainder_test(objective.as_ref(), &layout, &direction, cfg.h0, cfg.levels)?;
        println!("# direction {}", k + 1);
        print!("{}", report.to_csv());
        all_pass &= report.passes((0.9, 1.1), (1.9, 2.1));
    }
    if all_pass {
        println!("# PASS");
        Ok(())
    } else {
        println!("# FAIL");
        Err(Failure::Runtime("Taylor remainder slopes outside [0.9, 1.1] / [1.9, 2.1]".into()))
    }
}

fn cmd_gen_wake_table(args: WakeTableArgs, out: Option<PathBuf>) -> CmdResult {
    let spec = TurbineSpec::new(args.diameter, args.ct)?;
    let extent = match &args.extent {
        Some(v) if v.len() == 4 => TableExtent { x_min: v[0], x_max: v[1], y_min: v[2], y_max: v[3] },
        Some(v) => return Err(Failure::Usage(format!("--extent needs 4 values, got {}", v.len()))),
        None => TableExtent::for_diameter(spec.diameter),
    };
    let (nx, ny) = match (args.nx, args.ny) {
        (Some(nx), Some(ny)) => (nx, ny),
        _ => {
            if !(args.spacing > 0.0) {
                return Err(Failure::Usage(format!("--spacing must be positive, got {}", args.spacing)));
            }
            let n = |len: f64| (len / args.spacing).round() as usize + 1;
            (n(extent.x_max - extent.x_min), n(extent.y_max - extent.y_min))
        }
    };
    let table = synth_swe_like_table(&spec, &SynthWakeParams::for_turbine(&spec), nx, ny, extent)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let path = args.table.unwrap_or_else(|| out.unwrap_or_else(|| PathBuf::from(".")).join("wake_table.txt"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    table.save(&path)?;
    let back = ReductionTable::<f64>::load(&path)?;
    if back.grid().values() != table.grid().values() || back.spec() != table.spec() {
        return Err(Failure::Runtime(format!("{}: reloaded table differs from the generated one", path.display())));
    }
    println!(
        "{}: {nx}x{ny} nodes, r in [{:.6}, {:.6}], edge deviation {:.3e}",
        path.display(),
        table.min_value(),
        table.max_value(),
        table.boundary_deviation()
    );
    Ok(())
}

fn cmd_render(args: RenderArgs) -> CmdResult {
    let svg_path = args.svg.unwrap_or_else(|| args.run_dir.join("layout.svg"));
    let svg = render::render_run_dir(&args.run_dir).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_text(&svg_path, &svg)
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}
