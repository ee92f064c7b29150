//! Lindblad superoperators and steady-state solvers.
//!
//! Vectorization is column stacking: `vec(ρ)[i + d·j] = ρ_ij`, so
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)` and the generator reads
//!
//! ```text
//! L = −i(I⊗H − Hᵀ⊗I) + Σ_k γ_k [c̄_k⊗c_k − ½(I⊗c_k†c_k + (c_k†c_k)ᵀ⊗I)]
//! ```
//!
//! Rows are assembled from the non-Hermitian operator `K = H − (i/2) Σ γ c†c`
//! as `Lρ = −iKρ + iρK† + Σ γ cρc†`.

mod evolve;
mod krylov;
mod sector;
mod solve;

pub use evolve::{evolve_to_steady, propagate};
pub use sector::Sector;
pub use solve::{steady_state, SolverDiagnostics, SteadyStateSolution};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

use crate::hilbert::{CompositeSpace, DensityMatrix, HilbertError, SparseOperator};
use crate::sparse::CsrMatrix;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LindbladError {
    #[error("collapse operator {index} has invalid rate {rate}")]
    InvalidRate { index: usize, rate: f64 },
    #[error("Hamiltonian is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("singular steady-state system: {0}")]
    SingularSystem(String),
    #[error("{method} did not converge: {detail}")]
    NonConvergence { method: SolverMethod, detail: String },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    #[default]
    DirectBordered,
    IterativeKrylov,
    EvolveFallback,
}

impl std::fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::DirectBordered => "direct-bordered",
            Self::IterativeKrylov => "iterative-krylov",
            Self::EvolveFallback => "evolve-fallback",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub method: SolverMethod,
    /// Bound on ‖L vec(ρ)‖_∞ (rad·MHz).
    pub residual_tol: f64,
    /// Largest superoperator system solved by sparse LU; bigger systems
    /// switch to the Krylov path.
    pub max_dim_direct: usize,
    /// Restrict to the zero-difference excitation sector when the generator
    /// is covariant under the excitation-number U(1).
    pub use_symmetry: bool,
    pub gmres_restart: usize,
    pub gmres_max_iterations: usize,
    pub evolve_max_steps: usize,
    /// μs
    pub evolve_max_time: f64,
    /// Retry with time evolution when the requested method fails.
    pub fallback: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::DirectBordered,
            residual_tol: 1e-10,
            max_dim_direct: 90_000,
            use_symmetry: true,
            gmres_restart: 200,
            gmres_max_iterations: 20_000,
            evolve_max_steps: 2_000_000,
            evolve_max_time: 1e4,
            fallback: false,
        }
    }
}

impl SolverOptions {
    pub fn with_method(method: SolverMethod) -> Self {
        Self { method, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), LindbladError> {
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(LindbladError::InvalidOptions(format!("residual_tol must be positive, got {}", self.residual_tol)));
        }
        if !(self.evolve_max_time > 0.0) {
            return Err(LindbladError::InvalidOptions("evolve_max_time must be positive".into()));
        }
        if self.max_dim_direct == 0 || self.gmres_restart == 0 || self.gmres_max_iterations == 0 || self.evolve_max_steps == 0 {
            return Err(LindbladError::InvalidOptions("dimension and iteration caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Collapse {
    pub operator: SparseOperator,
    pub rate: f64,
}

/// Lindblad generator on a composite space.
#[derive(Debug)]
pub struct Liouvillian {
    space: CompositeSpace,
    hamiltonian: SparseOperator,
    collapses: Vec<Collapse>,
    /// K = H − (i/2) Σ γ c†c
    effective: CsrMatrix,
    matrix: OnceLock<CsrMatrix>,
}

pub fn build_liouvillian(hamiltonian: &SparseOperator, collapses: &[(SparseOperator, f64)]) -> Result<Liouvillian, LindbladError> {
    let space = hamiltonian.space().clone();
    let defect = hamiltonian.hermiticity_defect();
    if defect > 1e-9 * hamiltonian.matrix().max_abs().max(1.0) {
        return Err(LindbladError::NotHermitian(defect));
    }
    let mut effective = hamiltonian.matrix().clone();
    let mut list = Vec::with_capacity(collapses.len());
    for (index, (op, rate)) in collapses.iter().enumerate() {
        if !(rate.is_finite() && *rate >= 0.0) {
            return Err(LindbladError::InvalidRate { index, rate: *rate });
        }
        if op.space() != &space {
            return Err(HilbertError::SpaceMismatch { left: space.dims().to_vec(), right: op.space().dims().to_vec() }.into());
        }
        if *rate == 0.0 {
            continue;
        }
        let cdc = op.dagger().mul(op)?;
        effective = effective.add(&cdc.matrix().scale(C64::new(0.0, -0.5 * rate)));
        list.push(Collapse { operator: op.clone(), rate: *rate });
    }
    Ok(Liouvillian { space, hamiltonian: hamiltonian.clone(), collapses: list, effective, matrix: OnceLock::new() })
}

impl Liouvillian {
    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn hamiltonian(&self) -> &SparseOperator {
        &self.hamiltonian
    }

    /// Collapse operators with nonzero rates.
    pub fn collapses(&self) -> &[Collapse] {
        &self.collapses
    }

    pub fn dim(&self) -> usize {
        self.space.total()
    }

    /// Full d²×d² superoperator, assembled on first use.
    pub fn matrix(&self) -> &CsrMatrix {
        self.matrix.get_or_init(|| {
            let d = self.dim();
            let rows: Vec<(usize, usize)> = (0..d).flat_map(|j| (0..d).map(move |i| (i, j))).collect();
            self.assemble(&rows, |k, l| Some(k + d * l)).expect("full index map is total")
        })
    }

    /// vec(Lρ) for a column-stacked ρ.
    pub fn apply(&self, vec_rho: &[C64]) -> Vec<C64> {
        self.matrix().matvec(vec_rho)
    }

    /// Superoperator rows for the listed (i, j) pairs. `column` maps a pair
    /// (k, l) to its position in the reduced vector; `None` means the
    /// coupling leaves the index set and assembly fails.
    pub(crate) fn assemble(&self, rows: &[(usize, usize)], column: impl Fn(usize, usize) -> Option<usize>) -> Option<CsrMatrix> {
        let n = rows.len();
        let mut triplets = Vec::new();
        let ops: Vec<(&CsrMatrix, f64)> = self.collapses.iter().map(|c| (c.operator.matrix(), c.rate)).collect();
        let k = &self.effective;
        for (r, &(i, j)) in rows.iter().enumerate() {
            // −i K_ik ρ_kj
            let (ki, kv) = k.row(i);
            for (kk, v) in ki.iter().zip(kv) {
                triplets.push((r, column(*kk, j)?, -I * v));
            }
            // +i ρ_il conj(K_jl)
            let (li, lv) = k.row(j);
            for (l, v) in li.iter().zip(lv) {
                triplets.push((r, column(i, *l)?, I * v.conj()));
            }
            // γ c_ik ρ_kl conj(c_jl)
            for (c, rate) in &ops {
                let (ci, cv) = c.row(i);
                let (cj, cw) = c.row(j);
                for (kk, a) in ci.iter().zip(cv) {
                    for (l, b) in cj.iter().zip(cw) {
                        triplets.push((r, column(*kk, *l)?, a * b.conj() * *rate));
                    }
                }
            }
        }
        Some(CsrMatrix::from_triplets(n, n, triplets))
    }
}

/// Column-stacked vec(ρ).
pub fn vectorize(rho: &DensityMatrix) -> Vec<C64> {
    let d = rho.dim();
    let mut v = vec![ZERO; d * d];
    for (i, j, x) in rho.entries() {
        v[i + d * j] = x;
    }
    v
}

pub fn unvectorize(space: &CompositeSpace, v: &[C64]) -> DensityMatrix {
    let d = space.total();
    let t = v
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != ZERO)
        .map(|(r, x)| (r % d, r / d, *x))
        .collect();
    DensityMatrix::from_triplets(space.clone(), t)
}
