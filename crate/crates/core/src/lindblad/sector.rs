//! Zero-difference excitation sector of the Liouville space.
//!
//! When H conserves the total excitation number and every collapse operator
//! shifts it by a fixed amount, L maps the pairs (i, j) with equal excitation
//! onto themselves. The steady state lives there.

use crate::hilbert::CompositeSpace;
use crate::sparse::CsrMatrix;

use super::Liouvillian;

#[derive(Debug, Clone)]
pub struct Sector {
    d: usize,
    charge: Vec<usize>,
    /// Position of each basis state inside its charge class.
    rank: Vec<usize>,
    /// First sector position of column j.
    offset: Vec<usize>,
    pairs: Vec<(usize, usize)>,
}

impl Sector {
    pub fn zero_difference(space: &CompositeSpace) -> Self {
        let charge = space.excitation_numbers();
        let d = charge.len();
        let top = charge.iter().copied().max().unwrap_or(0);
        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
        let mut rank = vec![0; d];
        for (i, &q) in charge.iter().enumerate() {
            rank[i] = classes[q].len();
            classes[q].push(i);
        }
        let mut offset = Vec::with_capacity(d);
        let mut pairs = Vec::new();
        for j in 0..d {
            offset.push(pairs.len());
            for &i in &classes[charge[j]] {
                pairs.push((i, j));
            }
        }
        Self { d, charge, rank, offset, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// (i, j) pairs in ascending column-stacked order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        (self.charge[i] == self.charge[j]).then(|| self.offset[j] + self.rank[i])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// True when H conserves the charge and every collapse operator shifts it
    /// by one fixed amount.
    pub fn is_covariant(&self, l: &Liouvillian) -> bool {
        let conserves = |m: &CsrMatrix| m.iter().all(|(r, c, _)| self.charge[r] == self.charge[c]);
        if !conserves(l.hamiltonian().matrix()) {
            return false;
        }
        l.collapses().iter().all(|c| {
            let mut shift: Option<i64> = None;
            c.operator.matrix().iter().all(|(r, col, _)| {
                let s = self.charge[r] as i64 - self.charge[col] as i64;
                *shift.get_or_insert(s) == s
            })
        })
    }

    pub fn assemble(&self, l: &Liouvillian) -> Option<CsrMatrix> {
        l.assemble(&self.pairs, |k, m| self.position(k, m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_positions() {
        let space = CompositeSpace::new(vec![2, 3]).unwrap();
        let s = Sector::zero_difference(&space);
        // charges: 0,1,2,1,2,3 -> classes of size 1,2,2,1
        assert_eq!(s.len(), 1 + 4 + 4 + 1);
        assert_eq!(s.pairs()[0], (0, 0));
        for (p, &(i, j)) in s.pairs().iter().enumerate() {
            assert_eq!(s.position(i, j), Some(p));
        }
        let keys: Vec<usize> = s.pairs().iter().map(|&(i, j)| i + 6 * j).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s.position(0, 1), None);
    }
}
