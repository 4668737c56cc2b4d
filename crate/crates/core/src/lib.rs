//! Turbine array layout optimization over an analytical wake model.
//!
//! The crate evaluates the power of a turbine array with a cheap product-of-
//! wake-factors model on top of an ambient flow field, differentiates it
//! exactly with respect to the turbine coordinates, and optimizes layouts
//! with projected gradient ascent, basin-hopping and a genetic algorithm,
//! alone or chained into a two-stage global/local pipeline.
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the scalar to `f64`, which is what the pipeline and CLI use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod flowfield;
pub mod grid;
pub mod layout;
pub mod objective;
pub mod optimize;
pub mod pipeline;
pub mod power;
pub mod real;
pub mod wake;

pub use error::{Error, Result};
pub use layout::{Layout, RngSeed, Site, TurbineSpec};
pub use objective::Objective;
pub use optimize::{GaConfig, OptimizeResult};
pub use pipeline::{HybridPlan, RunReport, Scenario};
pub use power::{PowerFunctional, TaylorReport};
pub use real::Real;
pub use wake::{ReductionTable, WakeModel, WakeSet};

pub type Layout64 = layout::Layout<f64>;
pub type Layout32 = layout::Layout<f32>;
pub type Site64 = layout::Site<f64>;
pub type TurbineSpec64 = layout::TurbineSpec<f64>;
pub type GriddedField64 = grid::GriddedField<f64>;
pub type ReductionTable64 = wake::ReductionTable<f64>;
pub type ReductionTable32 = wake::ReductionTable<f32>;
pub type WakeSet64 = wake::WakeSet<f64>;
pub type PowerFunctional64 = power::PowerFunctional<f64>;
pub type PowerFunctional32 = power::PowerFunctional<f32>;
pub type LocalOptConfig64 = optimize::LocalOptConfig<f64>;
pub type BasinHopConfig64 = optimize::BasinHopConfig<f64>;
pub type OptimizeResult64 = optimize::OptimizeResult<f64>;
pub type ConvergenceTrace64 = optimize::ConvergenceTrace<f64>;
