//! Scenario presets and the two-stage pipeline: a global optimizer on a cheap
//! objective, then local ascent on the (possibly dearer) final objective.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::flowfield::{
    channel_continuity_flow, gridded_flow, headland_field, island_field, uniform_flow, AmbientFlow, BathymetryProfile,
    Blend, DepthScaledFlow, Headland, Island,
};
use crate::layout::{
    factor_pairs, layout_to_csv, project_to_site, random_layout, regular_grid_layout, seeded_layouts, Layout, RngSeed,
    Site, TurbineSpec,
};
use crate::objective::Objective;
use crate::optimize::{
    basin_hopping, ga_run, local_ascent, BasinHopConfig, ConvergenceTrace, GaConfig, LocalOptConfig, OptimizeResult,
};
use crate::power::{default_alpha, PowerFunctional};
use crate::wake::{default_table, WakeSet};

/// Inflow speed of every preset (m/s).
pub const INFLOW_SPEED: f64 = 2.0;
/// Preset names accepted by [`Scenario::preset`].
pub const PRESETS: &[&str] =
    &["channel-1", "headland-3", "island-4", "bathymetry-1", "bathymetry-2", "bathymetry-3", "double-basin"];

/// Where the first layout of a run comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialRecipe {
    /// Cell-centred grid over the site, shaped closest to the site's aspect ratio.
    Grid,
    /// Uniform random positions inside a sub-box, drawn from the run seed.
    RandomIn(Site<f64>),
    Fixed(Layout<f64>),
}

#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub site: Site<f64>,
    pub ambient: Arc<dyn AmbientFlow<f64>>,
    pub spec: TurbineSpec<f64>,
    pub n_turbines: usize,
    pub initial: InitialRecipe,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("site", &self.site)
            .field("spec", &self.spec)
            .field("n_turbines", &self.n_turbines)
            .field("initial", &self.initial)
            .finish_non_exhaustive()
    }
}

fn channel_site() -> Site<f64> {
    Site { x_min: 160.0, x_max: 480.0, y_min: 80.0, y_max: 240.0 }
}

fn bumps(seed: u64) -> BathymetryProfile<f64> {
    BathymetryProfile::random_bumps(25.0, 6, 5.0, [0.0, 0.0], [640.0, 320.0], RngSeed(seed))
}

fn headland_flow() -> Result<Arc<dyn AmbientFlow<f64>>> {
    let land = Headland { centre_x: 320.0, half_length: 160.0, height: 60.0 };
    Ok(Arc::new(gridded_flow(headland_field(640.0, 320.0, INFLOW_SPEED, land, 5.0)?)))
}

impl Scenario {
    /// Named analogue of one of the idealised test cases, all driven by a
    /// 2 m/s inflow along `x`:
    ///
    /// * `channel-1` (`scenario-1`): straight 640 x 320 m channel, uniform flow.
    /// * `headland-3` (`scenario-3`): the channel squeezed by a headland on the lower coast.
    /// * `island-4` (`scenario-4`): 960 x 480 m channel with an island; the site sits in the
    ///   faster gap between the island and the lower coast.
    /// * `bathymetry-1`: channel deepening linearly 25 to 30 m up to mid-channel, then
    ///   dropping back to 25 m.
    /// * `bathymetry-2`: channel over six seeded random depth bumps.
    /// * `bathymetry-3`: headland over six different random bumps.
    /// * `double-basin`: [`make_double_basin_scenario`] at 2.5 / 1.5 / 1.0 m/s.
    pub fn preset(name: &str, n_turbines: usize) -> Result<Scenario> {
        if n_turbines == 0 {
            return Err(Error::TooFewTurbines { needed: 1, got: 0 });
        }
        let canonical = match name {
            "scenario-1" => "channel-1",
            "scenario-3" => "headland-3",
            "scenario-4" => "island-4",
            other => other,
        };
        let mut site = channel_site();
        let ambient: Arc<dyn AmbientFlow<f64>> = match canonical {
            "channel-1" => Arc::new(uniform_flow([INFLOW_SPEED, 0.0])?),
            "headland-3" => headland_flow()?,
            "island-4" => {
                let island = Island { centre: [480.0, 300.0], half_length: 240.0, half_width: 120.0 };
                site = Site { x_min: 320.0, x_max: 640.0, y_min: 10.0, y_max: 170.0 };
                Arc::new(gridded_flow(island_field(960.0, 480.0, INFLOW_SPEED, island, 5.0)?))
            }
            "bathymetry-1" => {
                let profile = BathymetryProfile::channel_ramp(640.0, 25.0, 30.0, 20.0);
                Arc::new(channel_continuity_flow(profile, INFLOW_SPEED, 25.0, [1.0, 0.0])?)
            }
            "bathymetry-2" => Arc::new(channel_continuity_flow(bumps(2), INFLOW_SPEED, 25.0, [1.0, 0.0])?),
            "bathymetry-3" => {
                Arc::new(DepthScaledFlow { inner: headland_flow()?, profile: bumps(3), reference_depth: 25.0 })
            }
            "double-basin" => {
                let mut s = make_double_basin_scenario(2.5, 1.5, 1.0)?;
                s.n_turbines = n_turbines;
                return Ok(s);
            }
            _ => return Err(Error::Config(format!("unknown scenario `{name}` (known: {})", PRESETS.join(", ")))),
        };
        Ok(Scenario {
            name: canonical.to_string(),
            site,
            ambient,
            spec: TurbineSpec::default(),
            n_turbines,
            initial: InitialRecipe::Grid,
        })
    }

    pub fn initial_layout(&self, seed: RngSeed) -> Result<Layout<f64>> {
        let n = self.n_turbines;
        let layout = match &self.initial {
            InitialRecipe::Grid => {
                let aspect = self.site.width() / self.site.height();
                let (rows, cols) = factor_pairs(n)
                    .into_iter()
                    .min_by(|a, b| {
                        let miss = |(r, c): (usize, usize)| ((c as f64 / r as f64) / aspect).ln().abs();
                        miss(*a).total_cmp(&miss(*b))
                    })
                    .unwrap_or((1, n));
                regular_grid_layout(rows, cols, &self.site)
            }
            InitialRecipe::RandomIn(region) => random_layout(n, region, &mut seed.derive(0).rng()),
            InitialRecipe::Fixed(l) => {
                if l.n_turbines() != n {
                    return Err(Error::LengthMismatch { left: l.len(), right: 2 * n });
                }
                l.clone()
            }
        };
        Ok(project_to_site(&layout, &self.site))
    }

    /// Power functional of this scenario with a synthetic wake table at `table_spacing`.
    pub fn wake_objective(&self, alpha: f64, table_spacing: f64) -> Result<PowerFunctional<f64>> {
        let table = default_table(&self.spec, table_spacing)?;
        PowerFunctional::new(alpha, self.ambient.clone(), WakeSet::shared(table), self.site)
    }

    /// GA seed population: the initial layout, then the deterministic seed family
    /// and `n_random` random layouts.
    pub fn seed_population(&self, seed: RngSeed, n_random: usize) -> Result<Vec<Layout<f64>>> {
        let mut out = vec![self.initial_layout(seed)?];
        out.extend(seeded_layouts(self.n_turbines, &self.site, seed.derive(1), n_random, self.spec.diameter)?);
        Ok(out)
    }
}

/// Channel along `x` on a 600 x 160 m site: a slow plateau (`x < 200`) where
/// turbines start, a slower barrier band peaking at `x = 300` and a fast
/// plateau (`x > 400`). Speeds follow from depth by continuity.
pub fn make_double_basin_scenario(fast: f64, slow: f64, barrier: f64) -> Result<Scenario> {
    if !(fast >= slow && slow >= barrier && barrier > 0.0) {
        return Err(Error::Config(format!(
            "double basin needs fast >= slow >= barrier > 0, got {fast}/{slow}/{barrier}"
        )));
    }
    let h_in = 25.0;
    let depth = |speed: f64| h_in * fast / speed;
    let profile = BathymetryProfile::AlongAxis {
        origin: [0.0, 0.0],
        axis: [1.0, 0.0],
        knots: vec![(200.0, depth(slow)), (300.0, depth(barrier)), (400.0, depth(fast))],
        blends: vec![Blend::Smooth, Blend::Smooth],
    };
    let site = Site::new(0.0, 600.0, 0.0, 160.0)?;
    Ok(Scenario {
        name: "double-basin".into(),
        site,
        ambient: Arc::new(channel_continuity_flow(profile, fast, h_in, [1.0, 0.0])?),
        spec: TurbineSpec::default(),
        n_turbines: 3,
        initial: InitialRecipe::RandomIn(Site::new(20.0, 180.0, 20.0, 140.0)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GlobalStage {
    Genetic(GaConfig),
    BasinHopping(BasinHopConfig<f64>),
}

impl GlobalStage {
    pub fn budget(&self) -> usize {
        match self {
            GlobalStage::Genetic(c) => c.max_iterations,
            GlobalStage::BasinHopping(c) => c.n_hops,
        }
    }
}

/// Which optimizer a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Local,
    HybridGa,
    HybridBh,
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(OptimizerKind::Local),
            "hybrid-ga" => Ok(OptimizerKind::HybridGa),
            "hybrid-bh" => Ok(OptimizerKind::HybridBh),
            _ => Err(Error::Config(format!("unknown optimizer `{s}` (local, hybrid-ga, hybrid-bh)"))),
        }
    }
}

#[derive(Clone)]
pub struct HybridPlan {
    /// `None` or a zero budget skips the global stage.
    pub stage1: Option<GlobalStage>,
    pub stage2: LocalOptConfig<f64>,
    pub stage1_objective: Arc<dyn Objective<f64>>,
    pub stage2_objective: Arc<dyn Objective<f64>>,
    /// Random layouts added to the GA seed population.
    pub n_random_seeds: usize,
}

impl fmt::Debug for HybridPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HybridPlan")
            .field("stage1", &self.stage1)
            .field("stage2", &self.stage2)
            .field("n_random_seeds", &self.n_random_seeds)
            .finish_non_exhaustive()
    }
}

/// Budgets and fidelity of the wake-model plans built by [`HybridPlan::wake_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanSettings {
    pub optimizer: OptimizerKind,
    /// GA generations or basin-hopping hops.
    pub stage1_budget: usize,
    pub stage2_iterations: usize,
    pub alpha: f64,
    pub stage1_table_spacing: f64,
    pub stage2_table_spacing: f64,
    /// Per-hop cap on the inner local ascent of basin-hopping.
    pub hop_local_iterations: usize,
    pub hop_local_evaluations: usize,
}

impl Default for PlanSettings {
    fn default() -> Self {
        PlanSettings {
            optimizer: OptimizerKind::HybridGa,
            stage1_budget: 100,
            stage2_iterations: 200,
            alpha: default_alpha(10.0),
            stage1_table_spacing: 5.0,
            stage2_table_spacing: 2.5,
            hop_local_iterations: 50,
            hop_local_evaluations: 200,
        }
    }
}

impl HybridPlan {
    /// Wake objective at a coarse table for stage 1 and a finer one for stage 2.
    pub fn wake_model(scenario: &Scenario, settings: &PlanSettings) -> Result<HybridPlan> {
        let stage1_objective = Arc::new(scenario.wake_objective(settings.alpha, settings.stage1_table_spacing)?);
        let stage2_objective = Arc::new(scenario.wake_objective(settings.alpha, settings.stage2_table_spacing)?);
        let stage2 = LocalOptConfig { max_iterations: settings.stage2_iterations, ..Default::default() };
        let stage1 = match settings.optimizer {
            OptimizerKind::Local => None,
            OptimizerKind::HybridGa => {
                Some(GlobalStage::Genetic(GaConfig { max_iterations: settings.stage1_budget, ..Default::default() }))
            }
            OptimizerKind::HybridBh => Some(GlobalStage::BasinHopping(BasinHopConfig {
                n_hops: settings.stage1_budget,
                local: LocalOptConfig {
                    max_iterations: settings.hop_local_iterations,
                    max_evaluations: Some(settings.hop_local_evaluations),
                    ..Default::default()
                },
                ..Default::default()
            })),
        };
        Ok(HybridPlan { stage1, stage2, stage1_objective, stage2_objective, n_random_seeds: 10 })
    }

    pub fn validate(&self) -> Result<()> {
        self.stage2.validate()?;
        match &self.stage1 {
            Some(GlobalStage::Genetic(c)) => c.validate(),
            Some(GlobalStage::BasinHopping(c)) => c.validate(),
            None => Ok(()),
        }
    }

    fn active_stage1(&self) -> Option<&GlobalStage> {
        self.stage1.as_ref().filter(|s| s.budget() > 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageSummary {
    pub iterations: usize,
    pub evaluations: usize,
    /// Stage-2 objective at the stage's start.
    pub j_initial: f64,
    /// Stage-2 objective at the stage's result.
    pub j_final: f64,
    pub seconds: f64,
}

/// Everything a run produced. All `J` values, trace values included, are
/// scored with the stage-2 objective so stages compare directly.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub stage1: StageSummary,
    pub stage2: StageSummary,
    pub trace_stage1: ConvergenceTrace<f64>,
    pub trace_stage2: ConvergenceTrace<f64>,
    pub initial: Layout<f64>,
    pub intermediate: Layout<f64>,
    pub final_layout: Layout<f64>,
}

impl RunReport {
    pub fn j_initial(&self) -> f64 {
        self.stage1.j_initial
    }

    pub fn j_intermediate(&self) -> f64 {
        self.stage2.j_initial
    }

    pub fn j_final(&self) -> f64 {
        self.stage2.j_final
    }

    /// `stage,iterations,evaluations,J_initial,J_final,seconds`; the seconds
    /// column stays empty unless `timing` is set, so reruns are byte-identical.
    pub fn report_csv(&self, timing: bool) -> String {
        let mut out = String::from("stage,iterations,evaluations,J_initial,J_final,seconds\n");
        for (name, s) in [("stage1", &self.stage1), ("stage2", &self.stage2)] {
            let secs = if timing { format!("{:.6}", s.seconds) } else { String::new() };
            out.push_str(&format!("{name},{},{},{},{},{secs}\n", s.iterations, s.evaluations, s.j_initial, s.j_final));
        }
        out
    }

    /// Writes the run directory and returns the files written.
    pub fn write_dir(&self, dir: &Path, timing: bool, snapshots: bool) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files: Vec<(PathBuf, String)> = vec![
            (dir.join("report.csv"), self.report_csv(timing)),
            (dir.join("trace_stage1.csv"), self.trace_stage1.to_csv()),
            (dir.join("trace_stage2.csv"), self.trace_stage2.to_csv()),
            (dir.join("layout_initial.csv"), layout_to_csv(&self.initial)),
            (dir.join("layout_intermediate.csv"), layout_to_csv(&self.intermediate)),
            (dir.join("layout_final.csv"), layout_to_csv(&self.final_layout)),
        ];
        if snapshots {
            let snap = dir.join("snapshots");
            fs::create_dir_all(&snap).map_err(|e| Error::io(&snap, e))?;
            for (stage, trace) in [(1, &self.trace_stage1), (2, &self.trace_stage2)] {
                for r in trace.decile_snapshots() {
                    let name = format!("stage{stage}_iter{:06}.csv", r.iteration);
                    files.push((snap.join(name), layout_to_csv(&r.best_layout)));
                }
            }
        }
        for (path, text) in &files {
            fs::write(path, text).map_err(|e| Error::io(path, e))?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}

/// A stage that failed, with what the run had produced up to that point.
#[derive(Debug)]
pub struct StageFailure {
    pub stage: u8,
    pub error: Error,
    pub partial: Box<RunReport>,
}

impl fmt::Display for StageFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {} failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

fn rescore(trace: &ConvergenceTrace<f64>, objective: &dyn Objective<f64>) -> Result<ConvergenceTrace<f64>> {
    let mut out = ConvergenceTrace::default();
    for r in &trace.records {
        out.push(r.iteration, r.evaluations, objective.value(&r.best_layout)?, &r.best_layout);
    }
    Ok(out)
}

/// Stage-1 global search from the scenario's seeds, then local ascent from its
/// winner under the stage-2 objective.
pub fn run_hybrid(
    scenario: &Scenario,
    plan: &HybridPlan,
    seed: RngSeed,
) -> std::result::Result<RunReport, StageFailure> {
    let initial = scenario.initial_layout(seed).map_err(|error| StageFailure {
        stage: 1,
        error,
        partial: Box::new(empty_report(scenario, Layout::pack(&[]))),
    })?;
    let mut report = empty_report(scenario, initial.clone());
    let fail =
        |stage: u8, error: Error, report: &RunReport| StageFailure { stage, error, partial: Box::new(report.clone()) };
    if let Err(e) = plan.validate() {
        return Err(fail(1, e, &report));
    }
    let final_objective = plan.stage2_objective.as_ref();

    let j0 = final_objective.value(&initial).map_err(|e| fail(1, e, &report))?;
    report.stage1 = StageSummary { j_initial: j0, j_final: j0, ..Default::default() };

    if let Some(stage) = plan.active_stage1() {
        let clock = Instant::now();
        let result = stage1(scenario, plan, stage, &initial, seed).map_err(|e| fail(1, e, &report))?;
        let seconds = clock.elapsed().as_secs_f64();
        let intermediate = project_to_site(&result.layout, &scenario.site);
        let j1 = final_objective.value(&intermediate).map_err(|e| fail(1, e, &report))?;
        report.trace_stage1 = rescore(&result.trace, final_objective).map_err(|e| fail(1, e, &report))?;
        report.stage1 = StageSummary {
            iterations: result.iterations,
            evaluations: result.evaluations,
            j_initial: j0,
            j_final: j1,
            seconds,
        };
        report.intermediate = intermediate.clone();
        report.final_layout = intermediate;
    }

    let start = report.intermediate.clone();
    let clock = Instant::now();
    let local = local_ascent(final_objective, &start, &scenario.site, &plan.stage2).map_err(|e| fail(2, e, &report))?;
    report.stage2 = StageSummary {
        iterations: local.iterations,
        evaluations: local.evaluations,
        j_initial: report.stage1.j_final,
        j_final: local.value,
        seconds: clock.elapsed().as_secs_f64(),
    };
    report.trace_stage2 = local.trace;
    report.final_layout = local.layout;
    Ok(report)
}

/// Plain local ascent from the scenario's initial layout: [`run_hybrid`] with
/// the global stage dropped.
pub fn run_local_only(
    scenario: &Scenario,
    plan: &HybridPlan,
    seed: RngSeed,
) -> std::result::Result<RunReport, StageFailure> {
    let local_plan = HybridPlan { stage1: None, ..plan.clone() };
    run_hybrid(scenario, &local_plan, seed)
}

fn stage1(
    scenario: &Scenario,
    plan: &HybridPlan,
    stage: &GlobalStage,
    initial: &Layout<f64>,
    seed: RngSeed,
) -> Result<OptimizeResult<f64>> {
    let objective = plan.stage1_objective.as_ref();
    match stage {
        GlobalStage::Genetic(cfg) => {
            let cfg = GaConfig { seed: seed.derive(2), ..*cfg };
            let seeds = scenario.seed_population(seed, plan.n_random_seeds)?;
            ga_run(objective, scenario.n_turbines, &scenario.site, &cfg, &seeds)
        }
        GlobalStage::BasinHopping(cfg) => {
            let cfg = BasinHopConfig { seed: seed.derive(3), ..*cfg };
            basin_hopping(objective, initial, &scenario.site, &cfg)
        }
    }
}

fn empty_report(scenario: &Scenario, initial: Layout<f64>) -> RunReport {
    RunReport {
        scenario: scenario.name.clone(),
        stage1: StageSummary::default(),
        stage2: StageSummary::default(),
        trace_stage1: ConvergenceTrace::default(),
        trace_stage2: ConvergenceTrace::default(),
        intermediate: initial.clone(),
        final_layout: initial.clone(),
        initial,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::min_pairwise_distance;

    fn untimed(mut r: RunReport) -> RunReport {
        r.stage1.seconds = 0.0;
        r.stage2.seconds = 0.0;
        r
    }

    fn quick(optimizer: OptimizerKind, budget: usize) -> PlanSettings {
        PlanSettings { optimizer, stage1_budget: budget, stage2_iterations: 60, alpha: 1.0, ..Default::default() }
    }

    #[test]
    fn presets_build_and_start_inside() {
        for name in PRESETS.iter().chain(&["scenario-1", "scenario-3", "scenario-4"]) {
            let s = Scenario::preset(name, 8).unwrap();
            let l = s.initial_layout(RngSeed(1)).unwrap();
            assert_eq!(l.n_turbines(), 8);
            assert!(l.positions().all(|p| s.site.contains(p)), "{name}");
            for p in l.positions() {
                let u = s.ambient.velocity(p);
                assert!(u[0] > 0.5 && u[0].is_finite(), "{name}: {u:?}");
            }
        }
        assert!(Scenario::preset("nowhere", 4).is_err());
        assert!(Scenario::preset("channel-1", 0).is_err());
    }

    #[test]
    fn channel_grid_is_four_by_two() {
        let s = Scenario::preset("channel-1", 8).unwrap();
        let l = s.initial_layout(RngSeed(0)).unwrap();
        assert_eq!(min_pairwise_distance(&l).unwrap(), 80.0);
        assert_eq!(l.position(0), [200.0, 120.0]);
        assert_eq!(l.position(7), [440.0, 200.0]);
    }

    #[test]
    fn double_basin_shape() {
        let s = make_double_basin_scenario(2.5, 1.5, 1.0).unwrap();
        let speed = |x: f64| s.ambient.speed([x, 80.0]);
        assert!((speed(100.0) - 1.5).abs() < 1e-12);
        assert!((speed(300.0) - 1.0).abs() < 1e-12);
        assert!((speed(500.0) - 2.5).abs() < 1e-12);
        // gradient inside the barrier points away from the fast side
        assert!(s.ambient.jacobian([250.0, 80.0])[0][0] < 0.0);
        let flat = make_double_basin_scenario(2.0, 2.0, 2.0).unwrap();
        for x in [0.0, 150.0, 300.0, 450.0, 600.0] {
            assert!((flat.ambient.speed([x, 40.0]) - 2.0).abs() < 1e-12);
        }
        assert!(make_double_basin_scenario(1.0, 1.5, 0.5).is_err());
    }

    #[test]
    fn zero_budget_is_plain_local() {
        let s = Scenario::preset("channel-1", 4).unwrap();
        let mut plan = HybridPlan::wake_model(&s, &quick(OptimizerKind::HybridGa, 0)).unwrap();
        plan.stage1_objective = plan.stage2_objective.clone();
        let hybrid = untimed(run_hybrid(&s, &plan, RngSeed(3)).unwrap());
        let local = untimed(run_local_only(&s, &plan, RngSeed(3)).unwrap());
        assert_eq!(hybrid, local);
        assert_eq!(hybrid.stage1.iterations, 0);
        assert!(hybrid.trace_stage1.is_empty());
    }

    #[test]
    fn local_only_improves_channel_and_is_repeatable() {
        let s = Scenario::preset("channel-1", 8).unwrap();
        let plan = HybridPlan::wake_model(&s, &quick(OptimizerKind::Local, 0)).unwrap();
        let a = untimed(run_local_only(&s, &plan, RngSeed(1)).unwrap());
        assert!(a.j_final() > a.j_initial());
        let b = untimed(run_local_only(&s, &plan, RngSeed(1)).unwrap());
        assert_eq!(a, b);

        let mut frozen = plan.clone();
        frozen.stage2.max_iterations = 0;
        let r = run_local_only(&s, &frozen, RngSeed(1)).unwrap();
        assert_eq!(r.final_layout, r.initial);
    }

    #[test]
    fn hybrid_report_invariants() {
        let s = Scenario::preset("headland-3", 4).unwrap();
        for kind in [OptimizerKind::HybridGa, OptimizerKind::HybridBh] {
            let plan = HybridPlan::wake_model(&s, &quick(kind, 5)).unwrap();
            let r = run_hybrid(&s, &plan, RngSeed(2)).unwrap();
            assert!(r.j_final() >= r.j_intermediate());
            assert_eq!(r.stage2.j_initial, r.stage1.j_final);
            let j = plan.stage2_objective.value(&r.final_layout).unwrap();
            assert_eq!(j, r.j_final());
            assert!(r.final_layout.positions().all(|p| s.site.contains(p)));
            if kind == OptimizerKind::HybridGa {
                assert!(r.stage1.evaluations <= (5 + 1) * 100);
            }
        }
    }

    #[test]
    fn run_dir_manifest() {
        let s = Scenario::preset("channel-1", 2).unwrap();
        let plan = HybridPlan::wake_model(&s, &quick(OptimizerKind::HybridGa, 2)).unwrap();
        let r = run_hybrid(&s, &plan, RngSeed(5)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = r.write_dir(dir.path(), false, true).unwrap();
        for name in [
            "report.csv",
            "trace_stage1.csv",
            "trace_stage2.csv",
            "layout_initial.csv",
            "layout_intermediate.csv",
            "layout_final.csv",
        ] {
            assert!(dir.path().join(name).is_file(), "{name}");
        }
        assert!(files.iter().any(|f| f.starts_with(dir.path().join("snapshots"))));
        let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert!(report.lines().nth(1).unwrap().ends_with(','));
        assert!(r.report_csv(true).lines().nth(2).unwrap().split(',').nth(5).unwrap().parse::<f64>().is_ok());
    }
}
