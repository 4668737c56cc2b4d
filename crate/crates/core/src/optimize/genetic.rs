use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::layout::{project_to_site, random_layout, uniform_in, Layout, RngSeed, Site};
use crate::objective::Objective;
use crate::real::Real;

use super::{ConvergenceTrace, Counted, OptimizeResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub survival_rate: f64,
    pub max_mutation_probability: f64,
    pub max_iterations: usize,
    /// Stop once `best - median < tol * |best|`.
    pub convergence_tolerance: f64,
    pub seed: RngSeed,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            survival_rate: 0.70,
            max_mutation_probability: 0.07,
            max_iterations: 10_000,
            convergence_tolerance: 1e-6,
            seed: RngSeed(0),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.population_size >= 2
            && self.survival_rate > 0.0
            && self.survival_rate < 1.0
            && self.max_mutation_probability > 0.0
            && self.max_mutation_probability < 1.0
            && self.convergence_tolerance >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid genetic algorithm settings: {self:?}")))
        }
    }

    pub fn n_survivors(&self) -> usize {
        survivor_count(self.population_size, self.survival_rate)
    }
}

fn survivor_count(m: usize, rate: f64) -> usize {
    ((rate * m as f64 - 1e-9).ceil() as usize).clamp(1, m)
}

/// Indices of the `ceil(rate * M)` fittest, best first; ties go to the lower index.
pub fn ga_select<T: Real>(fitness: &[T], survival_rate: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (fitness[a].to_f64_lossy(), fitness[b].to_f64_lossy());
        fb.total_cmp(&fa)
    });
    if fitness.is_empty() {
        return order;
    }
    order.truncate(survivor_count(fitness.len(), survival_rate));
    order
}

/// Child taking gene `k` from `a` where `mask[k]` is set, from `b` otherwise.
pub fn uniform_crossover_mask<T: Real>(a: &Layout<T>, b: &Layout<T>, mask: &[bool]) -> Result<Layout<T>> {
    if a.len() != b.len() || a.len() != mask.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len().min(mask.len()) });
    }
    let coords = a.coords().iter().zip(b.coords()).zip(mask).map(|((&x, &y), &from_a)| if from_a { x } else { y });
    Layout::from_coords(coords.collect())
}

/// Per-coordinate uniform crossover; one `bool` draw per gene.
pub fn ga_crossover_uniform<T: Real, R: Rng + ?Sized>(a: &Layout<T>, b: &Layout<T>, rng: &mut R) -> Result<Layout<T>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    let mask: Vec<bool> = (0..a.len()).map(|_| rng.gen()).collect();
    uniform_crossover_mask(a, b, &mask)
}

/// Each gene mutates with probability `p_max * (1 - rank_fraction)` and is then
/// redrawn uniformly on its site axis. One uniform draw per gene, plus one more
/// for each gene that mutates.
pub fn ga_mutate_fitness_proportionate<T: Real, R: Rng + ?Sized>(
    child: &Layout<T>,
    rank_fraction: f64,
    p_max: f64,
    site: &Site<T>,
    rng: &mut R,
) -> Layout<T> {
    let p = p_max * (1.0 - rank_fraction.clamp(0.0, 1.0));
    let mut out = child.clone();
    for (k, c) in out.coords_mut().iter_mut().enumerate() {
        let u: f64 = rng.gen();
        if u < p {
            let (lo, hi) = site.axis_bounds(k);
            *c = uniform_in(rng, lo, hi);
        }
    }
    out
}

/// Member of the next generation; `fitness` is kept when the chromosome is unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Offspring<T> {
    pub layout: Layout<T>,
    pub fitness: Option<T>,
}

/// One generation of selection, crossover and mutation.
///
/// Survivors come first, best first, followed by the children. RNG order:
/// for each child, the two parent picks then its crossover mask; then
/// mutation over the whole new population in order. Survivor `r` (0 = best)
/// of `n` has rank fraction `1 - r / (n - 1)`; children have fraction 0.
pub fn ga_breed<T: Real, R: Rng + ?Sized>(
    population: &[Layout<T>],
    fitness: &[T],
    cfg: &GaConfig,
    site: &Site<T>,
    rng: &mut R,
) -> Result<Vec<Offspring<T>>> {
    if population.is_empty() || population.len() != fitness.len() {
        return Err(Error::LengthMismatch { left: population.len(), right: fitness.len() });
    }
    let m = cfg.population_size;
    let survivors = ga_select(fitness, cfg.survival_rate);
    let n_s = survivors.len();

    let mut next: Vec<(Layout<T>, Option<T>, f64)> = survivors
        .iter()
        .enumerate()
        .map(|(r, &i)| {
            let frac = if n_s == 1 { 1.0 } else { 1.0 - r as f64 / (n_s - 1) as f64 };
            (population[i].clone(), Some(fitness[i]), frac)
        })
        .collect();
    while next.len() < m {
        let a = survivors[rng.gen_range(0..n_s)];
        let b = survivors[rng.gen_range(0..n_s)];
        let child = ga_crossover_uniform(&population[a], &population[b], rng)?;
        next.push((child, None, 0.0));
    }
    Ok(next
        .into_iter()
        .map(|(layout, fitness, frac)| {
            let mutated = ga_mutate_fitness_proportionate(&layout, frac, cfg.max_mutation_probability, site, rng);
            let fitness = if mutated == layout { fitness } else { None };
            Offspring { layout: mutated, fitness }
        })
        .collect())
}

fn median<T: Real>(values: &[T]) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|x| x.to_f64_lossy()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn argmax<T: Real>(values: &[T]) -> usize {
    ga_select(values, 1e-12)[0]
}

/// Genetic algorithm over layouts; never calls the gradient.
///
/// The initial population is `seeds` (projected, at most `M`) padded with
/// uniform random layouts. A chromosome whose evaluation fails scores `-inf`.
/// Evaluations run in parallel; all random draws happen on the calling thread
/// so results do not depend on the thread count.
pub fn ga_run<T: Real, O: Objective<T> + ?Sized>(
    objective: &O,
    n_turbines: usize,
    site: &Site<T>,
    cfg: &GaConfig,
    seeds: &[Layout<T>],
) -> Result<OptimizeResult<T>> {
    cfg.validate()?;
    if n_turbines == 0 {
        return Err(Error::TooFewTurbines { needed: 1, got: 0 });
    }
    if let Some(bad) = seeds.iter().find(|s| s.n_turbines() != n_turbines) {
        return Err(Error::LengthMismatch { left: bad.len(), right: 2 * n_turbines });
    }
    let obj = Counted::new(objective);
    let score = |l: &Layout<T>| obj.value(l).ok().filter(|v| !v.is_nan()).unwrap_or(T::neg_infinity());

    let mut rng = cfg.seed.rng();
    let mut population: Vec<Layout<T>> =
        seeds.iter().take(cfg.population_size).map(|s| project_to_site(s, site)).collect();
    while population.len() < cfg.population_size {
        population.push(random_layout(n_turbines, site, &mut rng));
    }
    let mut fitness: Vec<T> = population.par_iter().map(score).collect();

    let b = argmax(&fitness);
    let (mut best, mut best_value) = (population[b].clone(), fitness[b]);
    let mut trace = ConvergenceTrace::default();
    trace.push(0, obj.calls(), best_value, &best);

    let mut generations = 0;
    while generations < cfg.max_iterations {
        let top = best_value.to_f64_lossy();
        if top.is_finite() && top - median(&fitness) < cfg.convergence_tolerance * top.abs() {
            break;
        }
        let next = ga_breed(&population, &fitness, cfg, site, &mut rng)?;
        fitness = next.par_iter().map(|o| o.fitness.unwrap_or_else(|| score(&o.layout))).collect();
        population = next.into_iter().map(|o| o.layout).collect();
        generations += 1;

        let b = argmax(&fitness);
        if fitness[b] > best_value {
            best = population[b].clone();
            best_value = fitness[b];
        }
        trace.push(generations, obj.calls(), best_value, &best);
    }

    Ok(OptimizeResult {
        layout: best,
        value: best_value,
        trace,
        iterations: generations,
        evaluations: obj.calls(),
        acceptance_rate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::oracles::{Quadratic, TwoGaussians};
    use proptest::prelude::*;
    use rand::Rng;

    fn site() -> Site<f64> {
        Site::default()
    }

    #[test]
    fn select_examples() {
        let kept = ga_select(&[5.0, 3.0, 9.0, 1.0], 0.5);
        assert_eq!(kept, vec![2, 0]);
        assert_eq!(ga_select(&[1.0, 1.0, 1.0], 0.5), vec![0, 1]);
        assert_eq!(ga_select(&(0..100).map(|i| i as f64).collect::<Vec<_>>(), 0.7).len(), 70);
        let all = ga_select(&[2.0, 7.0, 4.0], 0.999);
        assert_eq!(all, vec![1, 2, 0]);
        assert_eq!(ga_select(&[f64::NEG_INFINITY, 1.0], 0.5), vec![1]);
    }

    #[test]
    fn crossover_examples() {
        let a = Layout::pack(&[[1.0, 2.0], [3.0, 4.0]]);
        let b = Layout::pack(&[[10.0, 20.0], [30.0, 40.0]]);
        assert_eq!(uniform_crossover_mask(&a, &b, &[true; 4]).unwrap(), a);
        assert_eq!(
            uniform_crossover_mask(&a, &b, &[true, false, false, true]).unwrap().coords(),
            &[1.0, 20.0, 30.0, 4.0]
        );
        let mut rng = RngSeed(1).rng();
        assert_eq!(ga_crossover_uniform(&a, &a, &mut rng).unwrap(), a);
        let short = Layout::pack(&[[0.0, 0.0]]);
        assert!(ga_crossover_uniform(&a, &short, &mut rng).is_err());
    }

    #[test]
    fn crossover_gene_frequency() {
        let a = Layout::from_coords(vec![0.0; 6]).unwrap();
        let b = Layout::from_coords(vec![1.0; 6]).unwrap();
        let mut rng = RngSeed(2).rng();
        let mut from_b = [0usize; 6];
        let trials = 10_000;
        for _ in 0..trials {
            let c = ga_crossover_uniform(&a, &b, &mut rng).unwrap();
            for (k, &g) in c.coords().iter().enumerate() {
                from_b[k] += g as usize;
            }
        }
        for f in from_b {
            assert!((f as f64 / trials as f64 - 0.5).abs() <= 0.02);
        }
    }

    #[test]
    fn mutation_rates() {
        let child = Layout::pack(&[[-1.0, -1.0]; 5]);
        let mut rng = RngSeed(3).rng();
        assert_eq!(ga_mutate_fitness_proportionate(&child, 1.0, 0.07, &site(), &mut rng), child);

        let trials = 10_000;
        let mut mutated = 0usize;
        for _ in 0..trials {
            let m = ga_mutate_fitness_proportionate(&child, 0.0, 0.07, &site(), &mut rng);
            for (k, &g) in m.coords().iter().enumerate() {
                if g != -1.0 {
                    mutated += 1;
                    let (lo, hi) = site().axis_bounds(k);
                    assert!((lo..=hi).contains(&g));
                }
            }
        }
        let rate = mutated as f64 / (trials * 10) as f64;
        assert!((rate - 0.07).abs() < 0.005, "{rate}");
    }

    #[test]
    fn breed_transcript_by_hand() {
        let cfg = GaConfig { population_size: 4, survival_rate: 0.5, seed: RngSeed(42), ..Default::default() };
        let pop: Vec<Layout<f64>> = (0..4).map(|i| Layout::pack(&[[10.0 * i as f64, 5.0 * i as f64]])).collect();
        let fit = [3.0, 1.0, 4.0, 2.0];
        let got = ga_breed(&pop, &fit, &cfg, &site(), &mut cfg.seed.rng()).unwrap();

        let mut rng = cfg.seed.rng();
        let survivors = [2usize, 0];
        let mut want = vec![(pop[2].clone(), 1.0), (pop[0].clone(), 0.0)];
        for _ in 0..2 {
            let a = survivors[rng.gen_range(0..2)];
            let b = survivors[rng.gen_range(0..2)];
            let mask: Vec<bool> = (0..2).map(|_| rng.gen()).collect();
            want.push((uniform_crossover_mask(&pop[a], &pop[b], &mask).unwrap(), 0.0));
        }
        for (k, (l, frac)) in want.iter().enumerate() {
            let mut mutated = l.clone();
            for (g, c) in mutated.coords_mut().iter_mut().enumerate() {
                if rng.gen::<f64>() < 0.07 * (1.0 - frac) {
                    let (lo, hi) = site().axis_bounds(g);
                    *c = lo + (hi - lo) * rng.gen::<f64>();
                }
            }
            assert_eq!(got[k].layout, mutated, "member {k}");
        }
        assert_eq!(got[0].fitness, Some(4.0));
        assert_eq!(got[0].layout, pop[2]);
    }

    #[test]
    fn one_generation_reproducible() {
        let target = Quadratic::concave(vec![100.0, 40.0, 220.0, 130.0]);
        let cfg = GaConfig { population_size: 4, max_iterations: 1, seed: RngSeed(8), ..Default::default() };
        let a = ga_run(&target, 2, &site(), &cfg, &[]).unwrap();
        let b = ga_run(&target, 2, &site(), &cfg, &[]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iterations, 1);
    }

    #[test]
    fn elitism_and_budget() {
        let target = Quadratic::concave(vec![100.0, 40.0, 220.0, 130.0, 30.0, 30.0]);
        let cfg = GaConfig { max_iterations: 60, seed: RngSeed(4), ..Default::default() };
        let r = ga_run(&target, 3, &site(), &cfg, &[]).unwrap();
        assert!(r.trace.best_values().windows(2).all(|w| w[1] >= w[0]));
        assert!(r.evaluations <= (cfg.max_iterations + 1) * cfg.population_size);
        assert!(r.layout.positions().all(|p| site().contains(p)));
    }

    #[test]
    fn failing_chromosomes_score_minus_infinity() {
        struct LeftOnly;
        impl Objective<f64> for LeftOnly {
            fn value(&self, l: &Layout<f64>) -> Result<f64> {
                let x = l.coords()[0];
                if x > 160.0 {
                    Err(Error::NoGradient)
                } else {
                    Ok(x)
                }
            }
        }
        let cfg = GaConfig { max_iterations: 30, seed: RngSeed(6), ..Default::default() };
        let r = ga_run(&LeftOnly, 1, &site(), &cfg, &[]).unwrap();
        assert!(r.value.is_finite() && r.value <= 160.0 && r.value > 120.0);
    }

    #[test]
    fn finds_global_peak() {
        let obj = TwoGaussians::new(vec![70.0, 60.0], 1.0, 25.0, vec![250.0, 110.0], 2.0, 20.0);
        // brute-force scan at 1 m
        let mut top = f64::NEG_INFINITY;
        for i in 0..=320 {
            for j in 0..=160 {
                top = top.max(obj.value(&Layout::pack(&[[i as f64, j as f64]])).unwrap());
            }
        }
        let mut found = 0;
        for s in 0..20 {
            let cfg = GaConfig { max_iterations: 200, seed: RngSeed(s), ..Default::default() };
            let r = ga_run(&obj, 1, &site(), &cfg, &[Layout::pack(&[[70.0, 60.0]])]).unwrap();
            if r.value >= 0.95 * top {
                found += 1;
            }
        }
        assert!(found >= 19, "{found}/20");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn select_keeps_the_best(fit in prop::collection::vec(-1e3..1e3f64, 1..40), rate in 0.01..0.99f64) {
            let kept = ga_select(&fit, rate);
            prop_assert_eq!(kept.len(), survivor_count(fit.len(), rate));
            let worst_kept = kept.iter().map(|&i| fit[i]).fold(f64::INFINITY, f64::min);
            for (i, &f) in fit.iter().enumerate() {
                if !kept.contains(&i) {
                    prop_assert!(f <= worst_kept);
                }
            }
            prop_assert!(kept.windows(2).all(|w| fit[w[0]] > fit[w[1]] || (fit[w[0]] == fit[w[1]] && w[0] < w[1])));
        }

        #[test]
        fn mutation_stays_in_site(seed in any::<u64>(), frac in 0.0..1.0f64) {
            let mut rng = RngSeed(seed).rng();
            let child = random_layout(4, &site(), &mut rng);
            let m = ga_mutate_fitness_proportionate(&child, frac, 0.5, &site(), &mut rng);
            prop_assert!(m.positions().all(|p| site().contains(p)));
        }
    }
}
