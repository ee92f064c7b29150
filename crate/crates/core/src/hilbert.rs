//! Composite Hilbert spaces, sparse operators, Hamiltonian assembly and
//! density matrices.
//!
//! Basis ordering follows the Kronecker product: slot 0 is the most
//! significant digit of the flat index. The two-level source uses |g⟩ = 0 and
//! |e⟩ = 1, so the digit sum of a basis index is its excitation number.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{bare_couplings, CircuitDesign, EffectiveModel};
use crate::sparse::CsrMatrix;

pub const DEFAULT_DIMENSION_CAP: usize = 4096;
/// Density matrices at or above this dimension are stored sparse.
pub const DENSE_LIMIT: usize = 512;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("invalid dimension {0}, every subsystem needs at least 2 levels")]
    InvalidDimension(usize),
    #[error("total dimension {total} exceeds the cap {cap}")]
    DimensionCap { total: usize, cap: usize },
    #[error("slot {slot} out of range for a space with {count} slots")]
    SlotOutOfRange { slot: usize, count: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operators act on different spaces: {left:?} vs {right:?}")]
    SpaceMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("eigen-decomposition failed")]
    Eigen,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompositeSpace {
    dims: Vec<usize>,
}

impl CompositeSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self, HilbertError> {
        Self::with_cap(dims, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(dims: Vec<usize>, cap: usize) -> Result<Self, HilbertError> {
        if dims.is_empty() {
            return Err(HilbertError::InvalidDimension(0));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(HilbertError::InvalidDimension(d));
        }
        let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
        if total > cap {
            return Err(HilbertError::DimensionCap { total, cap });
        }
        Ok(Self { dims })
    }

    pub fn single(dim: usize) -> Result<Self, HilbertError> {
        Self::new(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn slots(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, d) in self.dims.iter().enumerate().rev() {
            out[slot] = index % d;
            index /= d;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (x, d)| acc * d + x)
    }

    /// Digit sum of every basis index.
    pub fn excitation_numbers(&self) -> Vec<usize> {
        (0..self.total()).map(|i| self.digits(i).iter().sum()).collect()
    }

    fn check_slot(&self, slot: usize) -> Result<(), HilbertError> {
        if slot >= self.dims.len() {
            return Err(HilbertError::SlotOutOfRange { slot, count: self.dims.len() });
        }
        Ok(())
    }
}

/// Sparse matrix tagged with the space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    space: CompositeSpace,
    matrix: CsrMatrix,
}

impl SparseOperator {
    pub fn new(space: CompositeSpace, matrix: CsrMatrix) -> Result<Self, HilbertError> {
        let n = space.total();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(HilbertError::DimensionMismatch { expected: n, found: matrix.rows().max(matrix.cols()) });
        }
        Ok(Self { space, matrix })
    }

    pub fn zero(space: &CompositeSpace) -> Self {
        let n = space.total();
        Self { space: space.clone(), matrix: CsrMatrix::zeros(n, n) }
    }

    pub fn identity(space: &CompositeSpace) -> Self {
        Self { space: space.clone(), matrix: CsrMatrix::identity(space.total()) }
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.total()
    }

    fn same_space(&self, other: &Self) -> Result<(), HilbertError> {
        if self.space != other.space {
            return Err(HilbertError::SpaceMismatch {
                left: self.space.dims.clone(),
                right: other.space.dims.clone(),
            });
        }
        Ok(())
    }

    pub fn dagger(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, HilbertError> {
        self.same_space(other)?;
        Ok(Self { space: self.space.clone(), matrix: self.matrix.matmul(&other.matrix) })
    }

    pub fn add(&self, other: &Self) -> Result<Self, HilbertError> {
        self.same_space(other)?;
        Ok(Self { space: self.space.clone(), matrix: self.matrix.add(&other.matrix) })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.scale(real(s)) }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.scale(s) }
    }

    /// [A, B] = AB − BA
    pub fn commutator(&self, other: &Self) -> Result<Self, HilbertError> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        Ok(Self { space: self.space.clone(), matrix: ab.matrix.sub(&ba.matrix) })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.hermiticity_defect()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Dense eigenvalues of a Hermitian operator, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, HilbertError> {
        hermitian_eigenvalues(&self.matrix.to_dense())
    }
}

fn hermitian_eigenvalues(dense: &[Vec<C64>]) -> Result<Vec<f64>, HilbertError> {
    let n = dense.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = Mat::<C64>::from_fn(n, n, |i, j| dense[i][j]);
    m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| HilbertError::Eigen)
}

fn single(dim: usize, matrix: CsrMatrix) -> Result<SparseOperator, HilbertError> {
    if dim < 2 {
        return Err(HilbertError::InvalidDimension(dim));
    }
    SparseOperator::new(CompositeSpace::with_cap(vec![dim], usize::MAX)?, matrix)
}

/// Annihilation operator a|n⟩ = √n|n−1⟩ on a `dim`-level mode.
pub fn ladder(dim: usize) -> Result<SparseOperator, HilbertError> {
    let t = (1..dim.max(1)).map(|n| (n - 1, n, real((n as f64).sqrt()))).collect();
    single(dim, CsrMatrix::from_triplets(dim, dim, t))
}

pub fn number(dim: usize) -> Result<SparseOperator, HilbertError> {
    let diag: Vec<C64> = (0..dim).map(|n| real(n as f64)).collect();
    single(dim, CsrMatrix::diagonal(&diag))
}

/// σ⁻ = |g⟩⟨e|
pub fn sigma_minus() -> SparseOperator {
    single(2, CsrMatrix::from_triplets(2, 2, vec![(0, 1, ONE)])).unwrap()
}

/// σ⁺ = |e⟩⟨g|
pub fn sigma_plus() -> SparseOperator {
    single(2, CsrMatrix::from_triplets(2, 2, vec![(1, 0, ONE)])).unwrap()
}

/// σ_z = |e⟩⟨e| − |g⟩⟨g|
pub fn sigma_z() -> SparseOperator {
    single(2, CsrMatrix::diagonal(&[real(-1.0), ONE])).unwrap()
}

/// I ⊗ … ⊗ op ⊗ … ⊗ I with `op` in `slot`.
pub fn embed(op: &SparseOperator, space: &CompositeSpace, slot: usize) -> Result<SparseOperator, HilbertError> {
    space.check_slot(slot)?;
    if op.dim() != space.dims[slot] {
        return Err(HilbertError::DimensionMismatch { expected: space.dims[slot], found: op.dim() });
    }
    let mut m = CsrMatrix::identity(1);
    for (k, &d) in space.dims.iter().enumerate() {
        let factor = if k == slot { op.matrix.clone() } else { CsrMatrix::identity(d) };
        m = m.kron(&factor);
    }
    SparseOperator::new(space.clone(), m)
}

fn embedded_ladder(space: &CompositeSpace, slot: usize) -> Result<SparseOperator, HilbertError> {
    space.check_slot(slot)?;
    embed(&ladder(space.dims[slot])?, space, slot)
}

fn exchange(a: &SparseOperator, b: &SparseOperator, g: f64) -> Result<SparseOperator, HilbertError> {
    // g (a† b + a b†)
    let t = a.dagger().mul(b)?;
    Ok(t.add(&t.dagger())?.scale(g))
}

/// Total excitation number σ⁺σ⁻ + Σ a†a over every slot.
pub fn excitation_operator(space: &CompositeSpace) -> SparseOperator {
    let diag: Vec<C64> = space.excitation_numbers().into_iter().map(|q| real(q as f64)).collect();
    SparseOperator { space: space.clone(), matrix: CsrMatrix::diagonal(&diag) }
}

/// H = ω̃_s σ_z/2 + Σ ω̃_i a_i†a_i + Σ g_i (σ⁺a_i + σ⁻a_i†) + Σ_{i<j} g̃_ij (a_i a_j† + a_i† a_j)
/// on the space [2, N_1, …, N_r].
pub fn build_effective_hamiltonian(model: &EffectiveModel, space: &CompositeSpace) -> Result<SparseOperator, HilbertError> {
    let r = model.reservoir_count();
    if space.slots() != r + 1 {
        return Err(HilbertError::DimensionMismatch { expected: r + 1, found: space.slots() });
    }
    if space.dims[0] != 2 {
        return Err(HilbertError::DimensionMismatch { expected: 2, found: space.dims[0] });
    }
    let sm = embed(&sigma_minus(), space, 0)?;
    let mut h = embed(&sigma_z(), space, 0)?.scale(0.5 * model.lamb_shifted_source);
    let modes: Vec<SparseOperator> = (1..=r).map(|k| embedded_ladder(space, k)).collect::<Result<_, _>>()?;
    for i in 0..r {
        let a = &modes[i];
        h = h.add(&a.dagger().mul(a)?.scale(model.lamb_shifted_reservoirs[i]))?;
        h = h.add(&exchange(&sm, a, model.g_eff[i])?)?;
        for j in (i + 1)..r {
            let g = model.cross_couplings[i][j];
            if g != 0.0 {
                h = h.add(&exchange(a, &modes[j], g)?)?;
            }
        }
    }
    Ok(h)
}

/// Three-body Hamiltonian with the coupler kept as an n_c-level Duffing
/// oscillator ω_c b†b + (α_c/2) b†b†bb on [2, n_c, N_1, …, N_r].
pub fn build_full_hamiltonian(design: &CircuitDesign, flux: f64, space: &CompositeSpace) -> Result<SparseOperator, HilbertError> {
    let r = design.reservoirs.len();
    if space.slots() != r + 2 {
        return Err(HilbertError::DimensionMismatch { expected: r + 2, found: space.slots() });
    }
    if space.dims[0] != 2 {
        return Err(HilbertError::DimensionMismatch { expected: 2, found: space.dims[0] });
    }
    let set = bare_couplings(design, flux);
    let sm = embed(&sigma_minus(), space, 0)?;
    let b = embedded_ladder(space, 1)?;
    let bd = b.dagger();
    let nb = bd.mul(&b)?;

    let mut h = embed(&sigma_z(), space, 0)?.scale(0.5 * design.source_frequency);
    h = h.add(&nb.scale(set.coupler_frequency))?;
    h = h.add(&bd.mul(&bd)?.mul(&b)?.mul(&b)?.scale(0.5 * set.coupler_anharmonicity))?;
    h = h.add(&exchange(&sm, &b, set.g_sc)?)?;

    let modes: Vec<SparseOperator> = (0..r).map(|k| embedded_ladder(space, k + 2)).collect::<Result<_, _>>()?;
    for i in 0..r {
        let a = &modes[i];
        h = h.add(&a.dagger().mul(a)?.scale(design.reservoirs[i].frequency))?;
        h = h.add(&exchange(a, &b, set.g_rc[i])?)?;
        h = h.add(&exchange(&sm, a, set.g_sr[i])?)?;
        for j in (i + 1)..r {
            h = h.add(&exchange(a, &modes[j], set.g_rr[i][j])?)?;
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Row-major d×d
    Dense(Vec<C64>),
    Sparse(CsrMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: CompositeSpace,
    storage: Storage,
}

impl DensityMatrix {
    /// Picks dense storage below [`DENSE_LIMIT`], sparse otherwise.
    pub fn from_triplets(space: CompositeSpace, triplets: Vec<(usize, usize, C64)>) -> Self {
        let d = space.total();
        if d < DENSE_LIMIT {
            let mut data = vec![ZERO; d * d];
            for (i, j, v) in triplets {
                data[i * d + j] += v;
            }
            Self { space, storage: Storage::Dense(data) }
        } else {
            Self { space, storage: Storage::Sparse(CsrMatrix::from_triplets(d, d, triplets)) }
        }
    }

    pub fn from_dense(space: CompositeSpace, rows: &[Vec<C64>]) -> Result<Self, HilbertError> {
        let d = space.total();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(HilbertError::DimensionMismatch { expected: d, found: rows.len() });
        }
        let t = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, v)| (i, j, *v)))
            .filter(|t| t.2 != ZERO)
            .collect();
        Ok(Self::from_triplets(space, t))
    }

    /// |ψ⟩⟨ψ| (ψ is normalized here).
    pub fn pure(space: CompositeSpace, psi: &[C64]) -> Result<Self, HilbertError> {
        let d = space.total();
        if psi.len() != d {
            return Err(HilbertError::DimensionMismatch { expected: d, found: psi.len() });
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mut t = Vec::new();
        for (i, a) in psi.iter().enumerate() {
            for (j, b) in psi.iter().enumerate() {
                let v = a * b.conj() / (norm * norm);
                if v != ZERO {
                    t.push((i, j, v));
                }
            }
        }
        Ok(Self::from_triplets(space, t))
    }

    pub fn fock(dim: usize, n: usize) -> Result<Self, HilbertError> {
        if n >= dim {
            return Err(HilbertError::DimensionMismatch { expected: dim, found: n + 1 });
        }
        Ok(Self::from_triplets(CompositeSpace::single(dim)?, vec![(n, n, ONE)]))
    }

    /// Truncated coherent state |α⟩, renormalized on the kept levels.
    pub fn coherent(dim: usize, alpha: C64) -> Result<Self, HilbertError> {
        let mut psi = Vec::with_capacity(dim);
        let mut amp = real((-0.5 * alpha.norm_sqr()).exp());
        for n in 0..dim {
            if n > 0 {
                amp = amp * alpha / (n as f64).sqrt();
            }
            psi.push(amp);
        }
        Self::pure(CompositeSpace::single(dim)?, &psi)
    }

    /// Truncated thermal state with Bose occupation `mean`, renormalized.
    pub fn thermal(dim: usize, mean: f64) -> Result<Self, HilbertError> {
        let ratio = mean / (1.0 + mean);
        let p: Vec<f64> = (0..dim).map(|n| ratio.powi(n as i32)).collect();
        let total: f64 = p.iter().sum();
        let t = p.iter().enumerate().map(|(n, x)| (n, n, real(x / total))).collect();
        Ok(Self::from_triplets(CompositeSpace::single(dim)?, t))
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total()
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.storage {
            Storage::Dense(data) => data[i * self.dim() + j],
            Storage::Sparse(m) => m.get(i, j),
        }
    }

    /// Nonzero (or all, when dense) entries.
    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        let d = self.dim();
        match &self.storage {
            Storage::Dense(data) => data
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != ZERO)
                .map(|(k, v)| (k / d, k % d, *v))
                .collect(),
            Storage::Sparse(m) => m.to_triplets(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let d = self.dim();
        let mut out = vec![vec![ZERO; d]; d];
        for (i, j, v) in self.entries() {
            out[i][j] = v;
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// ‖ρ − ρ†‖_max
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries()
            .into_iter()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// (ρ + ρ†)/2
    pub fn hermitize(&self) -> Self {
        let mut t = Vec::new();
        for (i, j, v) in self.entries() {
            t.push((i, j, v * 0.5));
            t.push((j, i, v.conj() * 0.5));
        }
        Self::from_triplets(self.space.clone(), t)
    }

    /// Eigenvalues, ascending. Sparse matrices are split into connected
    /// blocks of their sparsity pattern first.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, HilbertError> {
        let d = self.dim();
        let mut parent: Vec<usize> = (0..d).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let entries = self.entries();
        for &(i, j, _) in &entries {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..d {
            let root = find(&mut parent, i);
            blocks.entry(root).or_default().push(i);
        }
        let mut local = vec![0usize; d];
        for members in blocks.values() {
            for (k, &i) in members.iter().enumerate() {
                local[i] = k;
            }
        }
        let mut dense_blocks: std::collections::BTreeMap<usize, Vec<Vec<C64>>> = blocks
            .iter()
            .map(|(root, members)| (*root, vec![vec![ZERO; members.len()]; members.len()]))
            .collect();
        for (i, j, v) in entries {
            let root = find(&mut parent, i);
            dense_blocks.get_mut(&root).unwrap()[local[i]][local[j]] = v;
        }
        let mut out = Vec::with_capacity(d);
        for block in dense_blocks.values() {
            out.extend(hermitian_eigenvalues(block)?);
        }
        out.sort_by(|a, b| a.total_cmp(b));
        Ok(out)
    }

    pub fn min_eigenvalue(&self) -> Result<f64, HilbertError> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    /// Tr(A ρ)
    pub fn expectation(&self, op: &SparseOperator) -> Result<C64, HilbertError> {
        if op.space() != &self.space {
            return Err(HilbertError::SpaceMismatch { left: op.space.dims.clone(), right: self.space.dims.clone() });
        }
        let mut s = ZERO;
        for (i, j, v) in op.matrix.iter() {
            s += v * self.get(j, i);
        }
        Ok(s)
    }

    /// Reduced state of `keep_slot`.
    pub fn partial_trace(&self, keep_slot: usize) -> Result<DensityMatrix, HilbertError> {
        self.space.check_slot(keep_slot)?;
        let dk = self.space.dims[keep_slot];
        let mut out = vec![ZERO; dk * dk];
        for (i, j, v) in self.entries() {
            let (di, dj) = (self.space.digits(i), self.space.digits(j));
            let traced_equal = di
                .iter()
                .zip(&dj)
                .enumerate()
                .all(|(slot, (a, b))| slot == keep_slot || a == b);
            if traced_equal {
                out[di[keep_slot] * dk + dj[keep_slot]] += v;
            }
        }
        let space = CompositeSpace::with_cap(vec![dk], usize::MAX)?;
        let t = out
            .into_iter()
            .enumerate()
            .filter(|(_, v)| *v != ZERO)
            .map(|(k, v)| (k / dk, k % dk, v))
            .collect();
        Ok(DensityMatrix::from_triplets(space, t))
    }

    /// ρ ⊗ σ
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix, HilbertError> {
        let mut dims = self.space.dims.clone();
        dims.extend_from_slice(&other.space.dims);
        let space = CompositeSpace::with_cap(dims, usize::MAX)?;
        let db = other.dim();
        let mut t = Vec::new();
        for (i, j, a) in self.entries() {
            for (k, l, b) in other.entries() {
                t.push((i * db + k, j * db + l, a * b));
            }
        }
        Ok(DensityMatrix::from_triplets(space, t))
    }

    /// max |ρ_ij − σ_ij|
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        let mut worst = 0.0_f64;
        for (i, j, v) in self.entries() {
            worst = worst.max((v - other.get(i, j)).norm());
        }
        for (i, j, v) in other.entries() {
            worst = worst.max((v - self.get(i, j)).norm());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(dims: &[usize]) -> CompositeSpace {
        CompositeSpace::new(dims.to_vec()).unwrap()
    }

    #[test]
    fn ladder_definition() {
        let a = ladder(2).unwrap();
        assert_eq!(a.matrix().to_dense(), vec![vec![ZERO, ONE], vec![ZERO, ZERO]]);
        let n = ladder(6).unwrap().dagger().mul(&ladder(6).unwrap()).unwrap();
        for k in 0..6 {
            assert!((n.matrix().get(k, k).re - k as f64).abs() < 1e-14);
        }
        assert!(matches!(ladder(1), Err(HilbertError::InvalidDimension(1))));
    }

    #[test]
    fn truncated_commutator() {
        let a = ladder(7).unwrap();
        let c = a.commutator(&a.dagger()).unwrap();
        for k in 0..6 {
            assert!((c.matrix().get(k, k) - ONE).norm() < 1e-14);
        }
        assert!((c.matrix().get(6, 6).re + 6.0).abs() < 1e-14);
    }

    #[test]
    fn embed_sigma_z_spectrum() {
        let s = space(&[2, 3]);
        let z = embed(&sigma_z(), &s, 0).unwrap();
        let ev = z.eigenvalues().unwrap();
        assert_eq!(ev.iter().filter(|x| (**x + 1.0).abs() < 1e-12).count(), 3);
        assert_eq!(ev.iter().filter(|x| (**x - 1.0).abs() < 1e-12).count(), 3);
    }

    #[test]
    fn embed_errors() {
        let s = space(&[2, 3]);
        assert!(matches!(embed(&sigma_z(), &s, 2), Err(HilbertError::SlotOutOfRange { .. })));
        assert!(matches!(embed(&sigma_z(), &s, 1), Err(HilbertError::DimensionMismatch { .. })));
    }

    #[test]
    fn embedding_trace() {
        let s = space(&[2, 3, 4]);
        let n = number(3).unwrap();
        let e = embed(&n, &s, 1).unwrap();
        assert!((e.trace() - n.trace() * 8.0).norm() < 1e-12);
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let a = SparseOperator::identity(&space(&[2, 3]));
        let b = SparseOperator::identity(&space(&[3, 2]));
        assert!(matches!(a.mul(&b), Err(HilbertError::SpaceMismatch { .. })));
    }

    #[test]
    fn dimension_cap() {
        assert!(matches!(
            CompositeSpace::new(vec![2, 64, 64]),
            Err(HilbertError::DimensionCap { total: 8192, cap: 4096 })
        ));
        assert!(CompositeSpace::with_cap(vec![2, 64, 64], 10_000).is_ok());
    }

    #[test]
    fn digits_round_trip() {
        let s = space(&[2, 3, 4]);
        for i in 0..s.total() {
            assert_eq!(s.index(&s.digits(i)), i);
        }
        assert_eq!(s.digits(23), vec![1, 2, 3]);
        assert_eq!(s.excitation_numbers()[23], 6);
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let s = space(&[2, 2]);
        let h = 1.0 / 2f64.sqrt();
        let rho = DensityMatrix::pure(s, &[real(h), ZERO, ZERO, real(h)]).unwrap();
        for slot in 0..2 {
            let r = rho.partial_trace(slot).unwrap();
            assert!((r.get(0, 0).re - 0.5).abs() < 1e-15);
            assert!((r.get(1, 1).re - 0.5).abs() < 1e-15);
            assert!(r.get(0, 1).norm() < 1e-15);
        }
    }

    #[test]
    fn product_state_partial_trace() {
        let a = DensityMatrix::coherent(5, C64::new(0.3, -0.2)).unwrap();
        let b = DensityMatrix::thermal(4, 0.7).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert!(ab.partial_trace(0).unwrap().max_abs_diff(&a) < 1e-15);
        assert!(ab.partial_trace(1).unwrap().max_abs_diff(&b) < 1e-15);
        assert!(matches!(ab.partial_trace(2), Err(HilbertError::SlotOutOfRange { .. })));
    }

    #[test]
    fn sparse_storage_above_limit() {
        let rho = DensityMatrix::fock(DENSE_LIMIT, 3).unwrap();
        assert!(rho.is_sparse());
        assert!(!DensityMatrix::fock(DENSE_LIMIT - 1, 3).unwrap().is_sparse());
        let ev = rho.eigenvalues().unwrap();
        assert_eq!(ev.len(), DENSE_LIMIT);
        assert!((ev[DENSE_LIMIT - 1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn block_eigenvalues_match_dense() {
        let rho = DensityMatrix::coherent(6, C64::new(0.8, 0.1)).unwrap();
        let rho = rho.tensor(&DensityMatrix::thermal(3, 0.5).unwrap()).unwrap();
        let ev = rho.eigenvalues().unwrap();
        let dense = hermitian_eigenvalues(&rho.to_dense()).unwrap();
        for (a, b) in ev.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
