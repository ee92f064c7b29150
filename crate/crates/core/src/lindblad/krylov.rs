//! Restarted GMRES with an ILU(0) right preconditioner.

use num_complex::Complex64 as C64;

use crate::sparse::CsrMatrix;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Incomplete LU on the sparsity pattern of `a`.
pub(crate) struct Ilu0 {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Self {
        let n = a.rows();
        let (indptr, indices, values) = a.raw_parts();
        let (indptr, indices) = (indptr.to_vec(), indices.to_vec());
        let mut values = values.to_vec();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            if let Ok(k) = indices[indptr[i]..indptr[i + 1]].binary_search(&i) {
                diag[i] = indptr[i] + k;
            }
        }
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in indptr[i]..indptr[i + 1] {
                pos[indices[k]] = k;
            }
            for k in indptr[i]..indptr[i + 1] {
                let col = indices[k];
                if col >= i {
                    break;
                }
                let pivot = if diag[col] == usize::MAX { ZERO } else { values[diag[col]] };
                let pivot = if pivot.norm() < 1e-14 * scale { C64::new(1e-14 * scale, 0.0) } else { pivot };
                let factor = values[k] / pivot;
                values[k] = factor;
                for m in (diag[col].saturating_add(1))..indptr[col + 1] {
                    if diag[col] == usize::MAX {
                        break;
                    }
                    let p = pos[indices[m]];
                    if p != usize::MAX {
                        let upd = factor * values[m];
                        values[p] -= upd;
                    }
                }
            }
            for k in indptr[i]..indptr[i + 1] {
                pos[indices[k]] = usize::MAX;
            }
            if diag[i] != usize::MAX && values[diag[i]].norm() < 1e-14 * scale {
                values[diag[i]] = C64::new(1e-14 * scale, 0.0);
            }
        }
        Self { n, indptr, indices, values, diag }
    }

    /// Solves (LU) x = b in place.
    pub fn apply(&self, x: &mut [C64]) {
        for i in 0..self.n {
            let mut s = x[i];
            for k in self.indptr[i]..self.indptr[i + 1] {
                if self.indices[k] >= i {
                    break;
                }
                s -= self.values[k] * x[self.indices[k]];
            }
            x[i] = s;
        }
        for i in (0..self.n).rev() {
            let mut s = x[i];
            let start = if self.diag[i] == usize::MAX { self.indptr[i] } else { self.diag[i] + 1 };
            for k in start..self.indptr[i + 1] {
                if self.indices[k] > i {
                    s -= self.values[k] * x[self.indices[k]];
                }
            }
            x[i] = if self.diag[i] == usize::MAX { s } else { s / self.values[self.diag[i]] };
        }
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) struct GmresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves A x = b with right preconditioning, stopping at ‖b − Ax‖ ≤ tol‖b‖.
pub(crate) fn gmres(a: &CsrMatrix, b: &[C64], precond: &Ilu0, tol: f64, restart: usize, max_iterations: usize) -> GmresOutcome {
    let n = b.len();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut x = vec![ZERO; n];
    let mut iterations = 0;
    while iterations < max_iterations {
        let ax = a.matvec(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= tol {
            return GmresOutcome { x, iterations, relative_residual: rel, converged: true };
        }
        let m = restart.min(max_iterations - iterations);
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![ZERO; m]; m + 1];
        let (mut cs, mut sn) = (vec![ZERO; m], vec![ZERO; m]);
        let mut g = vec![ZERO; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            let mut z = basis[k].clone();
            precond.apply(&mut z);
            let mut w = a.matvec(&z);
            for (jdx, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[jdx][k] = hij;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= hij * vi;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = C64::new(hn, 0.0);
            for jdx in 0..k {
                let t = cs[jdx].conj() * h[jdx][k] + sn[jdx].conj() * h[jdx + 1][k];
                h[jdx + 1][k] = -sn[jdx] * h[jdx][k] + cs[jdx] * h[jdx + 1][k];
                h[jdx][k] = t;
            }
            let (p, q) = (h[k][k], h[k + 1][k]);
            let rr = (p.norm_sqr() + q.norm_sqr()).sqrt();
            if rr == 0.0 {
                cs[k] = C64::new(1.0, 0.0);
                sn[k] = ZERO;
            } else {
                cs[k] = p / rr;
                sn[k] = q / rr;
            }
            h[k][k] = C64::new(rr, 0.0);
            h[k + 1][k] = ZERO;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            iterations += 1;
            k_used = k + 1;
            if g[k + 1].norm() / bnorm <= tol || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let mut y = vec![ZERO; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for jdx in (i + 1)..k_used {
                s -= h[i][jdx] * y[jdx];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![ZERO; n];
        for (v, yi) in basis.iter().zip(&y) {
            for (u, vi) in update.iter_mut().zip(v) {
                *u += yi * vi;
            }
        }
        precond.apply(&mut update);
        for (xi, u) in x.iter_mut().zip(&update) {
            *xi += u;
        }
    }
    let ax = a.matvec(&x);
    let r: Vec<C64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let rel = norm(&r) / bnorm;
    GmresOutcome { converged: rel <= tol, x, iterations, relative_residual: rel }
}
