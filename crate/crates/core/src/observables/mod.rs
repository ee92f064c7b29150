//! Photon statistics of reduced single-mode states.

mod wigner;

pub use wigner::{wigner, GridSpec, WignerGrid};

use serde::Serialize;
use thiserror::Error;

use crate::circuit::coupling_for_ratio;
use crate::hilbert::DensityMatrix;
use crate::lindblad::SolverOptions;
use crate::maser::{jaynes_cummings_state, SolveError};
use crate::sweep::SweepTable;

/// Below this mean occupation g²(0) is reported as absent.
pub const G2_MIN_MEAN: f64 = 1e-6;
/// Top-level population above which the truncation is considered too small.
pub const TAIL_MASS_LIMIT: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("expected a single-mode state, got subsystem dimensions {0:?}")]
    NotSingleMode(Vec<usize>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonStats {
    pub mean: f64,
    pub variance: f64,
    /// Absent when the mean occupation is below [`G2_MIN_MEAN`].
    pub g2: Option<f64>,
    pub fock: Vec<f64>,
    /// P(N−1)
    pub tail_mass: f64,
    pub under_truncated: bool,
}

impl PhotonStats {
    /// variance / n̄
    pub fn fano(&self) -> Option<f64> {
        (self.mean > G2_MIN_MEAN).then(|| self.variance / self.mean)
    }
}

pub fn photon_stats(rho: &DensityMatrix) -> Result<PhotonStats, ObservableError> {
    let dims = rho.space().dims();
    if dims.len() != 1 {
        return Err(ObservableError::NotSingleMode(dims.to_vec()));
    }
    let fock = rho.diagonal();
    let (mut mean, mut second, mut falling) = (0.0, 0.0, 0.0);
    for (n, p) in fock.iter().enumerate() {
        let n = n as f64;
        mean += n * p;
        second += n * n * p;
        falling += n * (n - 1.0) * p;
    }
    let variance = (second - mean * mean).max(0.0);
    let g2 = (mean >= G2_MIN_MEAN).then(|| falling / (mean * mean));
    let tail_mass = *fock.last().unwrap_or(&0.0);
    Ok(PhotonStats { mean, variance, g2, tail_mass, under_truncated: tail_mass >= TAIL_MASS_LIMIT, fock })
}

/// Δg²(0) = g²(0)|λ_max − g²(0)|λ_min for the resonant single-reservoir
/// model at truncation `n`.
pub fn g2_variation(gamma: f64, kappa: f64, lambda_min: f64, lambda_max: f64, n: usize, options: &SolverOptions) -> Result<f64, SolveError> {
    if !(lambda_min > 0.0 && lambda_min <= lambda_max) {
        return Err(ObservableError::InvalidArgument(format!("need 0 < lambda_min <= lambda_max, got {lambda_min}, {lambda_max}")).into());
    }
    let g2_at = |lambda: f64| -> Result<f64, SolveError> {
        let s = jaynes_cummings_state(gamma, kappa, coupling_for_ratio(gamma, kappa, lambda), n, options)?;
        s.reservoirs[0]
            .g2
            .ok_or_else(|| ObservableError::InvalidArgument(format!("g2 undefined at lambda = {lambda}")).into())
    };
    let low = g2_at(lambda_min)?;
    if lambda_min == lambda_max {
        return Ok(0.0);
    }
    Ok(g2_at(lambda_max)? - low)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRow {
    pub n_mean: f64,
    pub variance: f64,
    /// Poisson reference, variance = n̄.
    pub poisson: f64,
    /// variance / n̄, absent at n̄ = 0.
    pub fano: Option<f64>,
}

/// Variance against mean photon number for every successful point of a flux
/// sweep, sorted by n̄.
pub fn variance_profile(table: &SweepTable) -> Vec<VarianceRow> {
    let means = table.column("n_mean");
    let vars = table.column("variance");
    let mut rows: Vec<VarianceRow> = means
        .iter()
        .zip(&vars)
        .filter_map(|(m, v)| Some((m.as_ref()?, v.as_ref()?)))
        .map(|(&n_mean, &variance)| VarianceRow {
            n_mean,
            variance,
            poisson: n_mean,
            fano: (n_mean > G2_MIN_MEAN).then(|| variance / n_mean),
        })
        .collect();
    rows.sort_by(|a, b| a.n_mean.total_cmp(&b.n_mean));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn coherent_state_is_poissonian() {
        let s = photon_stats(&DensityMatrix::coherent(60, C64::new(2.0, 0.0)).unwrap()).unwrap();
        assert!((s.mean - 4.0).abs() < 1e-9);
        assert!((s.variance - 4.0).abs() < 1e-9);
        assert!((s.g2.unwrap() - 1.0).abs() < 1e-9);
        assert!(!s.under_truncated);
    }

    #[test]
    fn thermal_state_is_bunched() {
        let s = photon_stats(&DensityMatrix::thermal(400, 3.0).unwrap()).unwrap();
        assert!((s.mean - 3.0).abs() < 1e-9);
        assert!((s.variance - 12.0).abs() < 1e-8);
        assert!((s.g2.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fock_one_is_antibunched() {
        let s = photon_stats(&DensityMatrix::fock(5, 1).unwrap()).unwrap();
        assert_eq!(s.g2, Some(0.0));
        assert_eq!(s.variance, 0.0);
    }

    #[test]
    fn vacuum_has_no_g2() {
        let s = photon_stats(&DensityMatrix::fock(5, 0).unwrap()).unwrap();
        assert_eq!(s.g2, None);
        assert_eq!(s.fano(), None);
    }

    #[test]
    fn under_truncation_flag() {
        let s = photon_stats(&DensityMatrix::thermal(5, 3.0).unwrap()).unwrap();
        assert!(s.under_truncated);
    }

    #[test]
    fn multimode_state_rejected() {
        let rho = DensityMatrix::fock(3, 0).unwrap().tensor(&DensityMatrix::fock(3, 0).unwrap()).unwrap();
        assert!(matches!(photon_stats(&rho), Err(ObservableError::NotSingleMode(_))));
    }

    #[test]
    fn equal_endpoints_give_zero_variation() {
        let d = g2_variation(5.0, 0.5, 0.3, 0.3, 12, &SolverOptions::default()).unwrap();
        assert_eq!(d, 0.0);
    }
}
