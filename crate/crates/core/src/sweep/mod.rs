//! Parallel parameter sweeps over flux, pump/loss rates, source frequency
//! and coupling geometry.
//!
//! Every sweep evaluates independent grid points on a dedicated thread pool
//! and collects them in grid order, so tables do not depend on the worker
//! count.

mod coupling;
mod flux;
mod hausdorff;
mod multires;
mod table;

pub use coupling::{controllability, effective_coupling_sweep, phase_diagram, robustness_map, PhaseDiagram, MAX_PHOTON_RATIO};
pub use flux::{flux_noise_sensitivity, flux_sweep, single_reservoir};
pub use hausdorff::{hausdorff, hausdorff_map, CurveDistance, HausdorffMap, HausdorffOptions};
pub use multires::{base_truncation, multires_map, multires_point, MultiresOptions};
pub use table::{Axis, Column, PointResult, PointStatus, PointValues, SweepRow, SweepTable};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitError, CouplingConvention};
use crate::hilbert::DEFAULT_DIMENSION_CAP;
use crate::lindblad::SolverOptions;
use crate::maser::SolveError;
use crate::units;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub solver: SolverOptions,
    /// Worker cap; 0 uses every available core.
    #[serde(skip)]
    pub threads: usize,
    pub convention: CouplingConvention,
    /// Retune the dressed source onto the dressed target reservoir at every
    /// flux point.
    pub resonant_source: bool,
    pub target_reservoir: usize,
    /// Reservoir truncation; `None` uses ⌈Γ/2κ⌉ + 50.
    pub truncation: Option<usize>,
    pub dimension_cap: usize,
    /// Keep the Fock distribution of every point.
    pub keep_distributions: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            threads: 0,
            convention: CouplingConvention::Full,
            resonant_source: true,
            target_reservoir: 0,
            truncation: None,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            keep_distributions: false,
        }
    }
}

/// Maps `f` over `points` on a pool of `threads` workers, preserving order.
pub fn run_points<T, R, F>(points: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(|| points.par_iter().map(&f).collect())
}

pub(crate) fn failed(kind: &str, err: impl std::fmt::Display) -> PointStatus {
    PointStatus::Failed { kind: kind.into(), message: err.to_string() }
}

impl From<SolveError> for PointStatus {
    fn from(e: SolveError) -> Self {
        let kind = match &e {
            SolveError::Lindblad(_) => "solver",
            SolveError::Hilbert(_) => "dimension",
            SolveError::Observable(_) => "observable",
            SolveError::Truncation { .. } => "truncation",
        };
        failed(kind, e)
    }
}

impl From<CircuitError> for PointStatus {
    fn from(e: CircuitError) -> Self {
        failed("circuit", e)
    }
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` log-spaced values from `start` to `stop` inclusive.
pub fn logspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    linspace(start.ln(), stop.ln(), n).into_iter().map(f64::exp).collect()
}

pub(crate) fn to_mhz(angular: f64) -> f64 {
    units::to_linear_mhz(angular)
}
