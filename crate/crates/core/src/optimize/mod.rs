//! Layout optimizers: projected gradient ascent, basin-hopping and a genetic
//! algorithm, all maximising an [`Objective`].

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::Result;
use crate::layout::Layout;
use crate::objective::Objective;
use crate::real::Real;

mod basin;
mod genetic;
mod local;

pub use basin::{basin_hopping, metropolis_accept, BasinHopConfig};
pub use genetic::{
    ga_breed, ga_crossover_uniform, ga_mutate_fitness_proportionate, ga_run, ga_select, uniform_crossover_mask,
    GaConfig, Offspring,
};
pub use local::{local_ascent, projected_gradient, LocalOptConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub iteration: usize,
    /// Objective calls so far, gradients included.
    pub evaluations: usize,
    pub best_value: T,
    pub best_layout: Layout<T>,
}

/// One record per iteration (generation, hop, accepted step).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace<T> {
    pub records: Vec<TraceRecord<T>>,
}

impl<T> Default for ConvergenceTrace<T> {
    fn default() -> Self {
        ConvergenceTrace { records: Vec::new() }
    }
}

impl<T: Real> ConvergenceTrace<T> {
    pub fn push(&mut self, iteration: usize, evaluations: usize, best_value: T, best_layout: &Layout<T>) {
        self.records.push(TraceRecord { iteration, evaluations, best_value, best_layout: best_layout.clone() });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord<T>> {
        self.records.last()
    }

    pub fn best_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_value.to_f64_lossy()).collect()
    }

    /// `iteration,evaluations,best_J`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,evaluations,best_J\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{}", r.iteration, r.evaluations, r.best_value.to_f64_lossy());
        }
        out
    }

    /// Records at each tenth of the run (first and last included), deduplicated.
    pub fn decile_snapshots(&self) -> Vec<&TraceRecord<T>> {
        let n = self.records.len();
        if n == 0 {
            return Vec::new();
        }
        let mut picks: Vec<usize> = (0..=10).map(|k| k * (n - 1) / 10).collect();
        picks.dedup();
        picks.into_iter().map(|i| &self.records[i]).collect()
    }
}

/// What every optimizer hands back.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult<T> {
    pub layout: Layout<T>,
    pub value: T,
    pub trace: ConvergenceTrace<T>,
    pub iterations: usize,
    pub evaluations: usize,
    /// Basin-hopping only.
    pub acceptance_rate: Option<f64>,
}

/// Counts objective calls; safe to share across GA worker threads.
pub(crate) struct Counted<'a, T: Real, O: Objective<T> + ?Sized> {
    inner: &'a O,
    calls: AtomicUsize,
    _scalar: std::marker::PhantomData<T>,
}

impl<'a, T: Real, O: Objective<T> + ?Sized> Counted<'a, T, O> {
    pub(crate) fn new(inner: &'a O) -> Self {
        Counted { inner, calls: AtomicUsize::new(0), _scalar: std::marker::PhantomData }
    }

    pub(crate) fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<T: Real, O: Objective<T> + ?Sized> Objective<T> for Counted<'_, T, O> {
    fn value(&self, layout: &Layout<T>) -> Result<T> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.value(layout)
    }
    fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }
    fn gradient(&self, layout: &Layout<T>) -> Result<Vec<T>> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(layout)
    }
    fn value_and_gradient(&self, layout: &Layout<T>) -> Result<(T, Vec<T>)> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.value_and_gradient(layout)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_csv_and_deciles() {
        let mut t = ConvergenceTrace::default();
        let l = Layout::pack(&[[1.0, 2.0]]);
        for i in 0..25 {
            t.push(i, 3 * i, i as f64 * 0.5, &l);
        }
        let csv = t.to_csv();
        assert!(csv.starts_with("iteration,evaluations,best_J\n0,0,0\n1,3,0.5\n"));
        assert_eq!(csv.lines().count(), 26);
        let d = t.decile_snapshots();
        assert_eq!(d.first().unwrap().iteration, 0);
        assert_eq!(d.last().unwrap().iteration, 24);
        assert_eq!(d.len(), 11);
        assert!(ConvergenceTrace::<f64>::default().decile_snapshots().is_empty());
    }
}
