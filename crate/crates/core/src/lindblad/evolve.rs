//! Adaptive Dormand–Prince 5(4) propagation of dρ/dt = Lρ.

use std::time::Instant;

use num_complex::Complex64 as C64;

use super::solve::{System, SteadyStateSolution};
use super::{LindbladError, Liouvillian, SolverMethod, SolverOptions};
use crate::hilbert::DensityMatrix;
use crate::sparse::CsrMatrix;

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stepper<'a> {
    a: &'a CsrMatrix,
    atol: f64,
    rtol: f64,
    h: f64,
    /// f(x) at the current point (first-same-as-last)
    k1: Vec<C64>,
}

impl<'a> Stepper<'a> {
    fn new(a: &'a CsrMatrix, x: &[C64], atol: f64, rtol: f64) -> Self {
        let mut row_max = 0.0_f64;
        for r in 0..a.rows() {
            let (_, v) = a.row(r);
            row_max = row_max.max(v.iter().map(|z| z.norm()).sum());
        }
        let h = if row_max > 0.0 { 0.1 / row_max } else { 1.0 };
        Self { a, atol, rtol, h, k1: a.matvec(x) }
    }

    /// Attempts one step of at most `h_max`; returns the step taken.
    fn step(&mut self, x: &mut Vec<C64>, h_max: f64) -> Option<f64> {
        let n = x.len();
        let h = self.h.min(h_max);
        let mut k: Vec<Vec<C64>> = Vec::with_capacity(7);
        k.push(self.k1.clone());
        let mut tmp = vec![C64::new(0.0, 0.0); n];
        for stage in 0..6 {
            for i in 0..n {
                let mut s = x[i];
                for (j, kj) in k.iter().enumerate() {
                    let c = A[stage][j];
                    if c != 0.0 {
                        s += kj[i] * (h * c);
                    }
                }
                tmp[i] = s;
            }
            k.push(self.a.matvec(&tmp));
        }
        // tmp now holds the fifth-order solution (last row of A).
        let mut err = 0.0_f64;
        for i in 0..n {
            let mut e = C64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                let b5 = if j < 6 { A[5][j] } else { 0.0 };
                e += kj[i] * (h * (b5 - B4[j]));
            }
            let scale = self.atol + self.rtol * x[i].norm().max(tmp[i].norm());
            err = err.max(e.norm() / scale);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            *x = tmp;
            self.k1 = k.pop().unwrap();
            self.h = if h < h_max { h * factor } else { self.h.max(h * factor) };
            Some(h)
        } else {
            self.h = h * factor;
            None
        }
    }

    fn derivative_norm(&self) -> f64 {
        self.k1.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn excitation(system: &System, x: &[C64]) -> f64 {
    let q = system.l.space().excitation_numbers();
    system.trace_positions().iter().zip(&q).map(|(&p, &qi)| x[p].re * qi as f64).sum()
}

/// Propagates until ‖L vec ρ‖_∞ < tol and the mean excitation changes by
/// less than 1e-6 between accepted steps.
pub(crate) fn integrate_to_steady(system: &System, mut x: Vec<C64>, options: &SolverOptions) -> Result<(Vec<C64>, usize), LindbladError> {
    let mut stepper = Stepper::new(&system.matrix, &x, 1e-13, 1e-9);
    let mut t = 0.0;
    let mut steps = 0;
    let mut last = excitation(system, &x);
    if stepper.derivative_norm() < options.residual_tol {
        return Ok((x, 0));
    }
    for _ in 0..options.evolve_max_steps {
        if t >= options.evolve_max_time {
            break;
        }
        if let Some(h) = stepper.step(&mut x, options.evolve_max_time - t) {
            t += h;
            steps += 1;
            let now = excitation(system, &x);
            if stepper.derivative_norm() < options.residual_tol && (now - last).abs() < 1e-6 {
                return Ok((x, steps));
            }
            last = now;
        }
    }
    Err(LindbladError::NonConvergence {
        method: SolverMethod::EvolveFallback,
        detail: format!("‖Lρ‖ = {:e} at t = {t} μs after {steps} steps", stepper.derivative_norm()),
    })
}

fn system_for<'a>(l: &'a Liouvillian, rho0: &DensityMatrix, use_symmetry: bool) -> Result<(System<'a>, Vec<C64>), LindbladError> {
    if rho0.space() != l.space() {
        return Err(crate::hilbert::HilbertError::SpaceMismatch {
            left: l.space().dims().to_vec(),
            right: rho0.space().dims().to_vec(),
        }
        .into());
    }
    let system = System::new(l, use_symmetry);
    if let Some(x) = system.gather(rho0) {
        return Ok((system, x));
    }
    let full = System::full(l);
    let x = full.gather(rho0).expect("full space holds every state");
    Ok((full, x))
}

pub fn evolve_to_steady(l: &Liouvillian, rho0: &DensityMatrix, options: &SolverOptions) -> Result<SteadyStateSolution, LindbladError> {
    options.validate()?;
    let start = Instant::now();
    let (system, x0) = system_for(l, rho0, options.use_symmetry)?;
    let (x, steps) = integrate_to_steady(&system, x0, options)?;
    system.finish(&x, SolverMethod::EvolveFallback, steps, start, options.residual_tol)
}

/// States at the requested (ascending) times, starting from ρ0 at t = 0.
pub fn propagate(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64], options: &SolverOptions) -> Result<Vec<DensityMatrix>, LindbladError> {
    options.validate()?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(LindbladError::InvalidOptions("times must be non-negative and ascending".into()));
    }
    let (system, mut x) = system_for(l, rho0, options.use_symmetry)?;
    let mut stepper = Stepper::new(&system.matrix, &x, 1e-14, 1e-11);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let mut steps = 0;
    for &target in times {
        while t < target {
            if steps >= options.evolve_max_steps {
                return Err(LindbladError::NonConvergence {
                    method: SolverMethod::EvolveFallback,
                    detail: format!("step cap reached at t = {t} μs"),
                });
            }
            let remaining = target - t;
            if let Some(h) = stepper.step(&mut x, remaining) {
                t = if h >= remaining { target } else { t + h };
                steps += 1;
            }
        }
        out.push(system.to_rho(&x));
    }
    Ok(out)
}
