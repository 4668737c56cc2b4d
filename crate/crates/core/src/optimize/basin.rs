use rand::Rng;

use crate::error::{Error, Result};
use crate::layout::{project_in_place, Layout, RngSeed, Site};
use crate::objective::Objective;
use crate::real::Real;

use super::{local_ascent, ConvergenceTrace, LocalOptConfig, OptimizeResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasinHopConfig<T> {
    pub n_hops: usize,
    /// Half-width of the uniform perturbation (m). `None` means a quarter
    /// of the site diagonal.
    pub step: Option<T>,
    pub target_acceptance: f64,
    /// Step multiplier (> 1) applied after every hop.
    pub adaptation: T,
    /// Metropolis temperature (W). `None` means `|J_0| / 10`.
    pub temperature: Option<T>,
    pub seed: RngSeed,
    pub local: LocalOptConfig<T>,
}

impl<T: Real> Default for BasinHopConfig<T> {
    fn default() -> Self {
        BasinHopConfig {
            n_hops: 50,
            step: None,
            target_acceptance: 0.5,
            adaptation: T::lit(1.1),
            temperature: None,
            seed: RngSeed(0),
            local: LocalOptConfig::default(),
        }
    }
}

impl<T: Real> BasinHopConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.step.is_none_or(|s| s > T::zero())
            && self.temperature.is_none_or(|t| t > T::zero())
            && self.adaptation > T::one()
            && self.target_acceptance > 0.0
            && self.target_acceptance < 1.0;
        if !ok {
            return Err(Error::Config(format!("invalid basin-hopping settings: {self:?}")));
        }
        self.local.validate()
    }
}

/// Improvements always pass; a drop `delta < 0` passes when `u < exp(delta / T)`.
pub fn metropolis_accept(delta: f64, temperature: f64, u: f64) -> bool {
    delta >= 0.0 || u < (delta / temperature).exp()
}

/// Basin-hopping around [`local_ascent`].
///
/// Each hop perturbs the current layout uniformly in `[-s, s]` per coordinate,
/// projects it, runs a local ascent and applies the Metropolis test. After
/// every hop `s` grows by `adaptation` while the running acceptance rate is
/// above target and shrinks otherwise. The best layout ever seen is returned.
///
/// RNG order per hop: one draw per coordinate for the perturbation, then one
/// draw for the acceptance test.
pub fn basin_hopping<T: Real, O: Objective<T> + ?Sized>(
    objective: &O,
    start: &Layout<T>,
    site: &Site<T>,
    cfg: &BasinHopConfig<T>,
) -> Result<OptimizeResult<T>> {
    cfg.validate()?;
    let mut rng = cfg.seed.rng();
    let diag = site.diagonal();
    let max_step = diag;
    let min_step = diag * T::lit(1e-6);
    let mut step = cfg.step.unwrap_or(diag * T::lit(0.25)).min(max_step);

    let first = local_ascent(objective, start, site, &cfg.local)?;
    let mut evaluations = first.evaluations;
    let temperature = match cfg.temperature {
        Some(t) => t,
        None => {
            let j0 = first.trace.records[0].best_value;
            (j0.abs() / T::lit(10.0)).max(T::min_positive_value())
        }
    };
    let (mut current, mut current_value) = (first.layout, first.value);
    let (mut best, mut best_value) = (current.clone(), current_value);
    let mut trace = ConvergenceTrace::default();
    trace.push(0, evaluations, best_value, &best);

    let mut accepted = 0usize;
    for hop in 1..=cfg.n_hops {
        let mut trial = current.clone();
        for c in trial.coords_mut() {
            let u: f64 = rng.gen();
            *c = *c + step * T::lit(2.0 * u - 1.0);
        }
        project_in_place(trial.coords_mut(), site);
        let local = local_ascent(objective, &trial, site, &cfg.local)?;
        evaluations += local.evaluations;

        let u: f64 = rng.gen();
        let delta = (local.value - current_value).to_f64_lossy();
        if metropolis_accept(delta, temperature.to_f64_lossy(), u) {
            accepted += 1;
            current = local.layout;
            current_value = local.value;
            if current_value > best_value {
                best = current.clone();
                best_value = current_value;
            }
        }
        let rate = accepted as f64 / hop as f64;
        step = if rate > cfg.target_acceptance { step * cfg.adaptation } else { step / cfg.adaptation };
        step = step.max(min_step).min(max_step);
        trace.push(hop, evaluations, best_value, &best);
    }

    let acceptance_rate = (cfg.n_hops > 0).then(|| accepted as f64 / cfg.n_hops as f64);
    Ok(OptimizeResult { layout: best, value: best_value, trace, iterations: cfg.n_hops, evaluations, acceptance_rate })
}
