use crate::error::{Error, Result};
use crate::layout::{project_in_place, Layout, Site};
use crate::objective::Objective;
use crate::real::Real;

use super::{ConvergenceTrace, Counted, OptimizeResult};

/// Projected gradient ascent with Armijo backtracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOptConfig<T> {
    pub max_iterations: usize,
    /// Projected-gradient norm (W/m) below which the ascent stops.
    /// `None` means `1e-6 * |J_0| / L_ref`, `L_ref` the site diagonal.
    pub gradient_tolerance: Option<T>,
    pub shrink: T,
    pub armijo: T,
    /// Backtracking steps before the line search is declared stalled.
    pub max_backtracks: usize,
    /// Hard cap on objective calls, gradient calls included.
    pub max_evaluations: Option<usize>,
}

impl<T: Real> Default for LocalOptConfig<T> {
    fn default() -> Self {
        LocalOptConfig {
            max_iterations: 200,
            gradient_tolerance: None,
            shrink: T::lit(0.5),
            armijo: T::lit(1e-4),
            max_backtracks: 40,
            max_evaluations: None,
        }
    }
}

impl<T: Real> LocalOptConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.shrink > T::zero()
            && self.shrink < T::one()
            && self.armijo > T::zero()
            && self.armijo < T::one()
            && self.gradient_tolerance.is_none_or(|g| g >= T::zero())
            && self.max_backtracks > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid local ascent settings: {self:?}")))
        }
    }
}

/// Gradient with the components that push against an active bound zeroed.
pub fn projected_gradient<T: Real>(layout: &Layout<T>, gradient: &[T], site: &Site<T>) -> Vec<T> {
    layout
        .coords()
        .iter()
        .zip(gradient)
        .enumerate()
        .map(|(k, (&m, &g))| {
            let (lo, hi) = site.axis_bounds(k);
            if (m <= lo && g < T::zero()) || (m >= hi && g > T::zero()) {
                T::zero()
            } else {
                g
            }
        })
        .collect()
}

fn l2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn finite_all<T: Real>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Maximise `objective` from `start` inside `site`.
///
/// Each iteration tries `m + sigma * g` projected onto the site and halves
/// `sigma` until the Armijo condition holds; an accepted step doubles the
/// next trial step. The returned value is never below the start's value.
pub fn local_ascent<T: Real, O: Objective<T> + ?Sized>(
    objective: &O,
    start: &Layout<T>,
    site: &Site<T>,
    cfg: &LocalOptConfig<T>,
) -> Result<OptimizeResult<T>> {
    cfg.validate()?;
    if !objective.has_gradient() {
        return Err(Error::NoGradient);
    }
    let obj = Counted::new(objective);
    let budget_left = |obj: &Counted<T, O>| cfg.max_evaluations.is_none_or(|cap| obj.calls() < cap);

    let mut m = start.clone();
    project_in_place(m.coords_mut(), site);
    let (mut value, mut grad) = obj.value_and_gradient(&m)?;
    if !value.is_finite() || !finite_all(&grad) {
        return Err(Error::NonFinite { what: "objective at start", iteration: 0 });
    }
    let mut trace = ConvergenceTrace::default();
    trace.push(0, obj.calls(), value, &m);

    let diag = site.diagonal();
    let gtol = cfg.gradient_tolerance.unwrap_or_else(|| T::lit(1e-6) * value.abs() / diag).max(T::min_positive_value());
    let g_inf = grad.iter().fold(T::zero(), |a, g| a.max(g.abs()));
    let mut sigma = if g_inf > T::zero() { T::lit(0.1) * diag / g_inf } else { T::one() };

    let mut iterations = 0;
    'outer: while iterations < cfg.max_iterations {
        let pg = projected_gradient(&m, &grad, site);
        if l2(&pg) < gtol {
            break;
        }
        let mut backtracks = 0;
        let (trial, trial_value, trial_grad) = loop {
            if !budget_left(&obj) || backtracks >= cfg.max_backtracks {
                break 'outer;
            }
            let mut trial = m.clone();
            for (t, &g) in trial.coords_mut().iter_mut().zip(&grad) {
                *t = *t + sigma * g;
            }
            project_in_place(trial.coords_mut(), site);
            let slope: T = trial.coords().iter().zip(m.coords()).zip(&grad).map(|((&a, &b), &g)| (a - b) * g).sum();
            if slope > T::zero() {
                let v = obj.value(&trial)?;
                if !v.is_finite() {
                    return Err(Error::NonFinite { what: "objective in line search", iteration: iterations + 1 });
                }
                let resolvable = v - value > T::lit(1e-12) * value.abs();
                if resolvable && v >= value + cfg.armijo * slope {
                    break (trial, v, None);
                }
                if !resolvable && v >= value && budget_left(&obj) {
                    // J cannot resolve the step; judge it by the trapezoid rule on the gradients
                    let g = obj.gradient(&trial)?;
                    if !finite_all(&g) {
                        return Err(Error::NonFinite { what: "gradient", iteration: iterations + 1 });
                    }
                    let gain: T = trial
                        .coords()
                        .iter()
                        .zip(m.coords())
                        .zip(grad.iter().zip(&g))
                        .map(|((&a, &b), (&g0, &g1))| (a - b) * (g0 + g1))
                        .sum::<T>()
                        * T::lit(0.5);
                    if gain >= cfg.armijo * slope {
                        break (trial, v, Some(g));
                    }
                }
            }
            sigma = sigma * cfg.shrink;
            backtracks += 1;
        };
        let g = match trial_grad {
            Some(g) => g,
            None if !budget_left(&obj) => {
                // accept the step but skip the gradient we cannot afford
                m = trial;
                value = trial_value;
                iterations += 1;
                trace.push(iterations, obj.calls(), value, &m);
                break;
            }
            None => {
                let g = obj.gradient(&trial)?;
                if !finite_all(&g) {
                    return Err(Error::NonFinite { what: "gradient", iteration: iterations + 1 });
                }
                g
            }
        };
        m = trial;
        value = trial_value;
        grad = g;
        iterations += 1;
        sigma = sigma * T::lit(2.0);
        trace.push(iterations, obj.calls(), value, &m);
    }

    Ok(OptimizeResult { layout: m, value, trace, iterations, evaluations: obj.calls(), acceptance_rate: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::oracles::Quadratic;
    use crate::RngSeed;
    use proptest::prelude::*;

    fn site() -> Site<f64> {
        Site::default()
    }

    fn tight() -> LocalOptConfig<f64> {
        LocalOptConfig { gradient_tolerance: Some(1e-10), ..Default::default() }
    }

    #[test]
    fn stationary_start_returns_start() {
        let peak = vec![100.0, 50.0, 200.0, 120.0];
        let q = Quadratic::concave(peak.clone());
        let start = Layout::from_coords(peak).unwrap();
        let r = local_ascent(&q, &start, &site(), &LocalOptConfig::default()).unwrap();
        assert!(r.iterations <= 1);
        assert_eq!(r.layout, start);
    }

    #[test]
    fn interior_peak_recovered() {
        let peak = vec![100.0, 50.0, 200.0, 120.0, 10.0, 150.0];
        let q = Quadratic::concave(peak.clone());
        let start = Layout::pack(&[[300.0, 10.0], [20.0, 20.0], [160.0, 80.0]]);
        let r = local_ascent(&q, &start, &site(), &tight()).unwrap();
        for (a, b) in r.layout.coords().iter().zip(&peak) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn outside_peak_goes_to_box_projection() {
        let q = Quadratic::concave(vec![-40.0, 80.0, 500.0, 400.0]);
        let start = Layout::pack(&[[160.0, 80.0], [100.0, 20.0]]);
        let r = local_ascent(&q, &start, &site(), &tight()).unwrap();
        let want = [0.0, 80.0, 320.0, 160.0];
        for (a, b) in r.layout.coords().iter().zip(&want) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn mixed_bound_and_interior_peak() {
        // J is dominated by the clamped coordinates, far above the interior residual
        let q = Quadratic::concave(vec![-40.0, 80.0, 500.0, 400.0, 120.0, 60.0]);
        let start = Layout::pack(&[[160.0, 80.0], [100.0, 20.0], [10.0, 150.0]]);
        let r = local_ascent(&q, &start, &site(), &tight()).unwrap();
        let want = [0.0, 80.0, 320.0, 160.0, 120.0, 60.0];
        for (a, b) in r.layout.coords().iter().zip(&want) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_iterations_returns_projected_start() {
        let q = Quadratic::concave(vec![100.0, 50.0]);
        let cfg = LocalOptConfig { max_iterations: 0, ..Default::default() };
        let r = local_ascent(&q, &Layout::pack(&[[400.0, 50.0]]), &site(), &cfg).unwrap();
        assert_eq!(r.layout.coords(), &[320.0, 50.0]);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn evaluation_cap_respected() {
        let q = Quadratic::concave(vec![100.0, 50.0, 3.0, 4.0]);
        let cfg = LocalOptConfig { max_evaluations: Some(7), gradient_tolerance: Some(0.0), ..Default::default() };
        let r = local_ascent(&q, &Layout::pack(&[[300.0, 150.0], [200.0, 100.0]]), &site(), &cfg).unwrap();
        assert!(r.evaluations <= 7, "{}", r.evaluations);
    }

    #[test]
    fn rejects_gradient_free_objective() {
        struct Flat;
        impl Objective<f64> for Flat {
            fn value(&self, _: &Layout<f64>) -> Result<f64> {
                Ok(1.0)
            }
        }
        assert!(matches!(
            local_ascent(&Flat, &Layout::pack(&[[1.0, 1.0]]), &site(), &LocalOptConfig::default()),
            Err(Error::NoGradient)
        ));
    }

    #[test]
    fn non_finite_aborts() {
        struct Blowup;
        impl Objective<f64> for Blowup {
            fn value(&self, l: &Layout<f64>) -> Result<f64> {
                Ok(if l.coords()[0] > 150.0 { f64::NAN } else { l.coords()[0] })
            }
            fn has_gradient(&self) -> bool {
                true
            }
            fn gradient(&self, _: &Layout<f64>) -> Result<Vec<f64>> {
                Ok(vec![1.0, 0.0])
            }
        }
        let r = local_ascent(&Blowup, &Layout::pack(&[[100.0, 1.0]]), &site(), &LocalOptConfig::default());
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn monotone_and_contained(seed in any::<u64>(), px in -100.0..420.0f64, py in -100.0..260.0f64) {
            let q = Quadratic::concave(vec![px, py, 320.0 - px, 160.0 - py]);
            let mut rng = RngSeed(seed).rng();
            let start = crate::layout::random_layout(2, &site(), &mut rng);
            let r = local_ascent(&q, &start, &site(), &LocalOptConfig::default()).unwrap();
            let vals = r.trace.best_values();
            prop_assert!(vals.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(r.value >= q.value(&start).unwrap());
            prop_assert!(r.layout.positions().all(|p| site().contains(p)));
        }
    }
}
