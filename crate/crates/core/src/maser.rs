//! Open-system model of the reduced maser: pump on the source, loss on every
//! reservoir, solved for its steady state.

use serde::Serialize;

use crate::circuit::EffectiveModel;
use crate::hilbert::{
    build_effective_hamiltonian, embed, ladder, sigma_minus, sigma_plus, sigma_z, CompositeSpace, HilbertError, SparseOperator,
    DEFAULT_DIMENSION_CAP,
};
use crate::lindblad::{build_liouvillian, steady_state, LindbladError, Liouvillian, SolverOptions, SteadyStateSolution};
use crate::observables::{photon_stats, ObservableError, PhotonStats};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error("expected {expected} truncations, got {found}")]
    Truncation { expected: usize, found: usize },
}

/// Reservoir truncation N = ⌈Γ/2κ⌉ + 50.
pub fn default_truncation(gamma: f64, kappa: f64) -> usize {
    (gamma / (2.0 * kappa) - 1e-9).ceil().max(0.0) as usize + 50
}

/// Pump √Γ σ⁺, loss √κ_i a_i, and the optional source relaxation and pure
/// dephasing channels.
pub fn collapse_operators(model: &EffectiveModel, space: &CompositeSpace) -> Result<Vec<(SparseOperator, f64)>, HilbertError> {
    let mut out = vec![(embed(&sigma_plus(), space, 0)?, model.pump_rate)];
    for (i, kappa) in model.loss_rates.iter().enumerate() {
        out.push((embed(&ladder(space.dims()[i + 1])?, space, i + 1)?, *kappa));
    }
    if model.source_relaxation > 0.0 {
        out.push((embed(&sigma_minus(), space, 0)?, model.source_relaxation));
    }
    if model.source_dephasing > 0.0 {
        // D[σ_z] at rate γ_φ/2 damps the source coherence at γ_φ.
        out.push((embed(&sigma_z(), space, 0)?, 0.5 * model.source_dephasing));
    }
    Ok(out)
}

/// Liouvillian on [2, N_1, …], in the frame rotating at the first dressed
/// reservoir frequency.
pub fn effective_liouvillian(model: &EffectiveModel, truncations: &[usize], cap: usize) -> Result<Liouvillian, SolveError> {
    let r = model.reservoir_count();
    if truncations.len() != r {
        return Err(SolveError::Truncation { expected: r, found: truncations.len() });
    }
    let mut dims = vec![2];
    dims.extend_from_slice(truncations);
    let space = CompositeSpace::with_cap(dims, cap)?;
    let frame = model.rotating_frame(model.lamb_shifted_reservoirs[0]);
    let h = build_effective_hamiltonian(&frame, &space)?;
    let collapses = collapse_operators(&frame, &space)?;
    Ok(build_liouvillian(&h, &collapses)?)
}

#[derive(Debug, Clone)]
pub struct MaserState {
    pub solution: SteadyStateSolution,
    /// Photon statistics per reservoir.
    pub reservoirs: Vec<PhotonStats>,
    /// Steady-state excited population of the source.
    pub source_excited: f64,
}

pub fn solve_effective(model: &EffectiveModel, truncations: &[usize], options: &SolverOptions) -> Result<MaserState, SolveError> {
    solve_effective_capped(model, truncations, options, DEFAULT_DIMENSION_CAP)
}

pub fn solve_effective_capped(model: &EffectiveModel, truncations: &[usize], options: &SolverOptions, cap: usize) -> Result<MaserState, SolveError> {
    let l = effective_liouvillian(model, truncations, cap)?;
    let solution = steady_state(&l, options)?;
    let reservoirs = (1..=truncations.len())
        .map(|slot| Ok(photon_stats(&solution.rho.partial_trace(slot)?)?))
        .collect::<Result<Vec<_>, SolveError>>()?;
    let source = solution.rho.partial_trace(0)?;
    Ok(MaserState { source_excited: source.get(1, 1).re, reservoirs, solution })
}

/// Resonant single-reservoir model solved at truncation `n`.
pub fn jaynes_cummings_state(gamma: f64, kappa: f64, g_eff: f64, n: usize, options: &SolverOptions) -> Result<MaserState, SolveError> {
    solve_effective(&EffectiveModel::jaynes_cummings(gamma, kappa, g_eff, 0.0), &[n], options)
}

/// Serializable digest of a solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub residual: f64,
    pub trace_error: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub method: crate::lindblad::SolverMethod,
    pub system_size: usize,
    pub used_symmetry: bool,
}

impl From<&SteadyStateSolution> for SolveSummary {
    fn from(s: &SteadyStateSolution) -> Self {
        Self {
            residual: s.residual,
            trace_error: s.trace_error,
            hermiticity_defect: s.hermiticity_defect,
            min_eigenvalue: s.min_eigenvalue,
            method: s.diagnostics.method,
            system_size: s.diagnostics.system_size,
            used_symmetry: s.diagnostics.used_symmetry,
        }
    }
}
