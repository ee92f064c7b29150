use std::time::Instant;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::krylov::{gmres, Ilu0};
use super::sector::Sector;
use super::{evolve, vectorize, LindbladError, Liouvillian, SolverMethod, SolverOptions};
use crate::hilbert::DensityMatrix;
use crate::sparse::CsrMatrix;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverDiagnostics {
    pub method: SolverMethod,
    /// Krylov iterations, accepted time steps or refinement sweeps.
    pub iterations: usize,
    /// Seconds; excluded from serialized artifacts.
    #[serde(skip)]
    pub wall_time: f64,
    /// Rows of the linear system actually solved.
    pub system_size: usize,
    pub used_symmetry: bool,
}

#[derive(Debug, Clone)]
pub struct SteadyStateSolution {
    /// Re-Hermitized steady state.
    pub rho: DensityMatrix,
    /// ‖L vec(ρ)‖_∞
    pub residual: f64,
    /// |Tr ρ − 1|
    pub trace_error: f64,
    /// ‖ρ − ρ†‖_max before re-Hermitization.
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub diagnostics: SolverDiagnostics,
}

/// The generator restricted to the index set that is actually solved.
pub(crate) struct System<'a> {
    pub l: &'a Liouvillian,
    pub sector: Option<Sector>,
    pub matrix: CsrMatrix,
}

impl<'a> System<'a> {
    pub fn new(l: &'a Liouvillian, use_symmetry: bool) -> Self {
        if use_symmetry {
            let sector = Sector::zero_difference(l.space());
            if sector.is_covariant(l) {
                if let Some(matrix) = sector.assemble(l) {
                    return Self { l, sector: Some(sector), matrix };
                }
            }
            log::debug!("generator is not excitation-covariant, solving the full Liouville space");
        }
        Self::full(l)
    }

    pub fn full(l: &'a Liouvillian) -> Self {
        Self { l, sector: None, matrix: l.matrix().clone() }
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace_positions(&self) -> Vec<usize> {
        let d = self.l.dim();
        match &self.sector {
            Some(s) => (0..d).map(|i| s.position(i, i).unwrap()).collect(),
            None => (0..d).map(|i| i + d * i).collect(),
        }
    }

    pub fn to_rho(&self, x: &[C64]) -> DensityMatrix {
        let space = self.l.space().clone();
        let d = self.l.dim();
        let t = match &self.sector {
            Some(s) => s.pairs().iter().zip(x).filter(|(_, v)| **v != ZERO).map(|(&(i, j), v)| (i, j, *v)).collect(),
            None => x.iter().enumerate().filter(|(_, v)| **v != ZERO).map(|(r, v)| (r % d, r / d, *v)).collect(),
        };
        DensityMatrix::from_triplets(space, t)
    }

    /// `None` when ρ has weight outside the solved index set.
    pub fn gather(&self, rho: &DensityMatrix) -> Option<Vec<C64>> {
        match &self.sector {
            None => Some(vectorize(rho)),
            Some(s) => {
                let mut x = vec![ZERO; s.len()];
                for (i, j, v) in rho.entries() {
                    x[s.position(i, j)?] = v;
                }
                Some(x)
            }
        }
    }

    pub fn residual(&self, x: &[C64]) -> f64 {
        self.matrix.matvec(x).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn used_symmetry(&self) -> bool {
        self.sector.is_some()
    }

    /// Trace functional in row 0.
    fn bordered(&self) -> CsrMatrix {
        let row: Vec<(usize, C64)> = self.trace_positions().into_iter().map(|p| (p, ONE)).collect();
        self.matrix.with_row(0, &row)
    }

    /// Hermitizes, measures and checks the candidate solution.
    pub fn finish(&self, x: &[C64], method: SolverMethod, iterations: usize, start: Instant, tol: f64) -> Result<SteadyStateSolution, LindbladError> {
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LindbladError::SingularSystem("solution has non-finite entries".into()));
        }
        let raw = self.to_rho(x);
        let hermiticity_defect = raw.hermiticity_defect();
        let rho = raw.hermitize();
        let xh = self.gather(&rho).expect("Hermitization stays inside the sector");
        let residual = self.residual(&xh);
        let trace_error = (rho.trace() - ONE).norm();
        let min_eigenvalue = rho.min_eigenvalue()?;
        let diagnostics = SolverDiagnostics {
            method,
            iterations,
            wall_time: start.elapsed().as_secs_f64(),
            system_size: self.len(),
            used_symmetry: self.used_symmetry(),
        };
        if !(residual < tol) {
            return Err(LindbladError::NonConvergence {
                method,
                detail: format!("residual {residual:e} exceeds tolerance {tol:e}"),
            });
        }
        Ok(SteadyStateSolution { rho, residual, trace_error, hermiticity_defect, min_eigenvalue, diagnostics })
    }
}

pub fn steady_state(l: &Liouvillian, options: &SolverOptions) -> Result<SteadyStateSolution, LindbladError> {
    options.validate()?;
    let start = Instant::now();
    let system = System::new(l, options.use_symmetry);
    let mut method = options.method;
    if method == SolverMethod::DirectBordered && system.len() > options.max_dim_direct {
        log::info!("system size {} exceeds max_dim_direct {}, using the Krylov path", system.len(), options.max_dim_direct);
        method = SolverMethod::IterativeKrylov;
    }
    let result = match method {
        SolverMethod::DirectBordered => direct(&system, options, start),
        SolverMethod::IterativeKrylov => iterative(&system, options, start),
        SolverMethod::EvolveFallback => evolve_from_mixed(&system, options, start),
    };
    match result {
        Err(err @ (LindbladError::NonConvergence { .. } | LindbladError::SingularSystem(_)))
            if options.fallback && method != SolverMethod::EvolveFallback =>
        {
            log::warn!("{err}; retrying with time evolution");
            evolve_from_mixed(&system, options, start)
        }
        other => other,
    }
}

fn evolve_from_mixed(system: &System, options: &SolverOptions, start: Instant) -> Result<SteadyStateSolution, LindbladError> {
    let d = system.l.dim();
    let mixed = DensityMatrix::from_triplets(system.l.space().clone(), (0..d).map(|i| (i, i, C64::new(1.0 / d as f64, 0.0))).collect());
    let x0 = system.gather(&mixed).expect("diagonal states lie in every sector");
    let (x, steps) = evolve::integrate_to_steady(system, x0, options)?;
    system.finish(&x, SolverMethod::EvolveFallback, steps, start, options.residual_tol)
}

fn to_faer(m: &CsrMatrix) -> Result<SparseColMat<usize, C64>, LindbladError> {
    let triplets: Vec<Triplet<usize, usize, C64>> = m.iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    SparseColMat::try_new_from_triplets(m.rows(), m.cols(), &triplets)
        .map_err(|e| LindbladError::SingularSystem(format!("could not build sparse matrix: {e:?}")))
}

fn direct(system: &System, options: &SolverOptions, start: Instant) -> Result<SteadyStateSolution, LindbladError> {
    let n = system.len();
    let bordered = system.bordered();
    let lu = to_faer(&bordered)?
        .sp_lu()
        .map_err(|e| LindbladError::SingularSystem(format!("sparse LU failed: {e:?}")))?;
    let mut rhs = vec![ZERO; n];
    rhs[0] = ONE;
    let solve = |b: &[C64]| -> Vec<C64> {
        let mut col = Mat::<C64>::from_fn(n, 1, |i, _| b[i]);
        lu.solve_in_place(col.as_mut());
        (0..n).map(|i| col[(i, 0)]).collect()
    };
    let mut x = solve(&rhs);
    let bordered_residual = |x: &[C64]| -> Vec<C64> {
        let bx = bordered.matvec(x);
        rhs.iter().zip(&bx).map(|(p, q)| p - q).collect()
    };
    let mut sweeps = 0;
    for _ in 0..3 {
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            break;
        }
        if system.residual(&x) < 0.01 * options.residual_tol {
            break;
        }
        let r = bordered_residual(&x);
        let dx = solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        sweeps += 1;
    }
    let defect = bordered_residual(&x).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !defect.is_finite() || defect > 1e-6 {
        return Err(LindbladError::SingularSystem(format!(
            "bordered system residual {defect:e}; the steady state is not unique"
        )));
    }
    system.finish(&x, SolverMethod::DirectBordered, sweeps, start, options.residual_tol)
}

fn iterative(system: &System, options: &SolverOptions, start: Instant) -> Result<SteadyStateSolution, LindbladError> {
    let n = system.len();
    let bordered = system.bordered();
    let precond = Ilu0::new(&bordered);
    let mut rhs = vec![ZERO; n];
    rhs[0] = ONE;
    let out = gmres(&bordered, &rhs, &precond, 0.01 * options.residual_tol, options.gmres_restart, options.gmres_max_iterations);
    if !out.converged {
        return Err(LindbladError::NonConvergence {
            method: SolverMethod::IterativeKrylov,
            detail: format!("relative residual {:e} after {} iterations", out.relative_residual, out.iterations),
        });
    }
    system.finish(&out.x, SolverMethod::IterativeKrylov, out.iterations, start, options.residual_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{embed, ladder, sigma_plus, CompositeSpace, SparseOperator};
    use crate::lindblad::build_liouvillian;

    #[test]
    fn pure_decay_reaches_vacuum() {
        let a = ladder(2).unwrap();
        let h = SparseOperator::zero(a.space());
        let l = build_liouvillian(&h, &[(a, 1.3)]).unwrap();
        for method in [SolverMethod::DirectBordered, SolverMethod::IterativeKrylov, SolverMethod::EvolveFallback] {
            let s = steady_state(&l, &SolverOptions::with_method(method)).unwrap();
            assert!((s.rho.get(0, 0).re - 1.0).abs() < 1e-10, "{method}");
            assert!(s.rho.get(1, 1).norm() < 1e-10);
        }
    }

    #[test]
    fn pure_pumping_reaches_excited_state() {
        let sp = sigma_plus();
        let h = SparseOperator::zero(sp.space());
        let l = build_liouvillian(&h, &[(sp, 2.0)]).unwrap();
        let s = steady_state(&l, &SolverOptions::default()).unwrap();
        assert!((s.rho.get(1, 1).re - 1.0).abs() < 1e-12);
    }

    // Closed-form thermal occupation κ'/(κ − κ') of a mode with loss κ and gain κ'.
    #[test]
    fn detailed_balance_gives_thermal_state() {
        let (kappa, gain) = (1.0, 0.25);
        let a = ladder(60).unwrap();
        let n_op = a.dagger().mul(&a).unwrap();
        let h = n_op.scale(0.7);
        let l = build_liouvillian(&h, &[(a.clone(), kappa), (a.dagger(), gain)]).unwrap();
        let s = steady_state(&l, &SolverOptions::default()).unwrap();
        let n = s.rho.expectation(&n_op).unwrap().re;
        assert!((n - gain / (kappa - gain)).abs() < 1e-9, "{n}");
    }

    #[test]
    fn zero_generator_is_singular() {
        let a = ladder(3).unwrap();
        let h = SparseOperator::zero(a.space());
        let l = build_liouvillian(&h, &[]).unwrap();
        let err = steady_state(&l, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, LindbladError::SingularSystem(_)), "{err:?}");
    }

    #[test]
    fn sector_and_full_solves_agree() {
        let space = CompositeSpace::new(vec![2, 6]).unwrap();
        let sp = embed(&sigma_plus(), &space, 0).unwrap();
        let a = embed(&ladder(6).unwrap(), &space, 1).unwrap();
        let x = sp.mul(&a).unwrap();
        let h = x.add(&x.dagger()).unwrap().scale(0.8).add(&a.dagger().mul(&a).unwrap().scale(0.3)).unwrap();
        let l = build_liouvillian(&h, &[(sp, 2.0), (a, 0.5)]).unwrap();
        let with = steady_state(&l, &SolverOptions::default()).unwrap();
        let without = steady_state(&l, &SolverOptions { use_symmetry: false, ..Default::default() }).unwrap();
        assert!(with.diagnostics.used_symmetry);
        assert!(!without.diagnostics.used_symmetry);
        assert!(with.diagnostics.system_size < without.diagnostics.system_size);
        assert!(with.rho.max_abs_diff(&without.rho) < 1e-12);
    }

    #[test]
    fn invalid_options_rejected() {
        let a = ladder(2).unwrap();
        let l = build_liouvillian(&SparseOperator::zero(a.space()), &[(a, 1.0)]).unwrap();
        let opts = SolverOptions { residual_tol: 0.0, ..Default::default() };
        assert!(matches!(steady_state(&l, &opts), Err(LindbladError::InvalidOptions(_))));
    }
}
