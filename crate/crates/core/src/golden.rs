//! Golden steady-state cases produced by an independent reference solver.
//!
//! Each file holds one resonant source–reservoir case: the rates and coupling
//! in rad·MHz, the reservoir truncation `n`, the dense joint density matrix in
//! the Kronecker basis (source digit most significant, |g⟩ = 0) and the
//! expected reservoir n̄ and g²(0).

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{CompositeSpace, DensityMatrix};
use crate::lindblad::SolverOptions;
use crate::maser::{jaynes_cummings_state, MaserState, SolveError};

#[derive(Debug, Error)]
pub enum GoldenError {
    #[error("cannot read golden {path}: {message}")]
    Read { path: String, message: String },
    #[error("golden {case}: {message}")]
    Malformed { case: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenParameters {
    pub gamma: f64,
    pub kappa: f64,
    pub g_eff: f64,
    /// Reservoir Fock levels.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseMatrix {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenCase {
    pub case_id: String,
    pub generator_version: String,
    pub basis: String,
    pub units: String,
    pub parameters: GoldenParameters,
    pub rho: DenseMatrix,
    pub n_mean: f64,
    pub variance: f64,
    /// Absent when n̄ vanishes.
    pub g2: Option<f64>,
}

/// Largest entrywise deviations of a computed steady state from a golden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenComparison {
    pub max_rho: f64,
    pub n_mean: f64,
    pub g2: Option<f64>,
}

impl GoldenCase {
    pub fn load(path: &Path) -> Result<Self, GoldenError> {
        let read = |message: String| GoldenError::Read { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| read(e.to_string()))?;
        let case: Self = serde_json::from_str(&text).map_err(|e| read(e.to_string()))?;
        case.check()?;
        Ok(case)
    }

    /// Loads every `*.json` in `dir`, sorted by file name.
    pub fn load_dir(dir: &Path) -> Result<Vec<Self>, GoldenError> {
        let read = |message: String| GoldenError::Read { path: dir.display().to_string(), message };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| read(e.to_string()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths.iter().map(|p| Self::load(p)).collect()
    }

    pub fn dim(&self) -> usize {
        2 * self.parameters.n
    }

    fn check(&self) -> Result<(), GoldenError> {
        let bad = |message: String| Err(GoldenError::Malformed { case: self.case_id.clone(), message });
        let d = self.dim();
        let square = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
        if !square(&self.rho.re) || !square(&self.rho.im) {
            return bad(format!("rho must be {d}x{d}"));
        }
        let trace: f64 = (0..d).map(|i| self.rho.re[i][i]).sum();
        if (trace - 1.0).abs() > 1e-9 {
            return bad(format!("trace {trace} differs from 1"));
        }
        for i in 0..d {
            for j in 0..d {
                if (self.rho.re[i][j] - self.rho.re[j][i]).abs() > 1e-9 || (self.rho.im[i][j] + self.rho.im[j][i]).abs() > 1e-9 {
                    return bad(format!("rho is not Hermitian at ({i}, {j})"));
                }
            }
        }
        Ok(())
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let d = self.dim();
        let space = CompositeSpace::new(vec![2, self.parameters.n]).expect("golden dimensions are small");
        let rows: Vec<Vec<Complex64>> =
            (0..d).map(|i| (0..d).map(|j| Complex64::new(self.rho.re[i][j], self.rho.im[i][j])).collect()).collect();
        DensityMatrix::from_dense(space, &rows).expect("golden dimensions match")
    }

    pub fn solve(&self, options: &SolverOptions) -> Result<MaserState, SolveError> {
        let p = &self.parameters;
        jaynes_cummings_state(p.gamma, p.kappa, p.g_eff, p.n, options)
    }

    pub fn compare(&self, state: &MaserState) -> GoldenComparison {
        let expected = self.density_matrix();
        let stats = &state.reservoirs[0];
        GoldenComparison {
            max_rho: state.solution.rho.max_abs_diff(&expected),
            n_mean: (stats.mean - self.n_mean).abs(),
            g2: match (stats.g2, self.g2) {
                (Some(a), Some(b)) => Some((a - b).abs()),
                (None, None) => None,
                _ => Some(f64::INFINITY),
            },
        }
    }
}
