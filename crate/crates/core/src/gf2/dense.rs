//! Bit-packed Gaussian elimination for rank, kernels and quotient spaces.

use super::{BinaryMatrix, BitVector};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
struct PackedRow {
    words: Vec<u64>,
}

impl PackedRow {
    fn zeros(len: usize) -> Self {
        PackedRow {
            words: vec![0; len.div_ceil(64)],
        }
    }

    fn from_support(len: usize, support: &[usize]) -> Self {
        let mut row = Self::zeros(len);
        for &i in support {
            row.flip(i);
        }
        row
    }

    fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &PackedRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    fn leading(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    fn to_bitvector(&self, len: usize) -> BitVector {
        let support = (0..len).filter(|&i| self.get(i)).collect::<Vec<_>>();
        BitVector::from_indices(len, support).expect("indices below len")
    }
}

/// Incrementally built GF(2) basis kept in reduced echelon form.
#[derive(Clone, Debug)]
pub struct PackedBasis {
    len: usize,
    // (pivot column, row) with every row zero at every other pivot.
    rows: Vec<(usize, PackedRow)>,
}

impl PackedBasis {
    pub fn new(len: usize) -> Self {
        PackedBasis {
            len,
            rows: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, row: &mut PackedRow) {
        for (pivot, basis_row) in &self.rows {
            if row.get(*pivot) {
                row.xor_assign(basis_row);
            }
        }
    }

    /// Adds `v` to the basis. Returns `false` when `v` was already in the span.
    pub fn insert(&mut self, v: &BitVector) -> Result<bool> {
        if v.len() != self.len {
            return Err(Error::DimensionMismatch {
                context: "basis insert",
                expected: self.len,
                found: v.len(),
            });
        }
        let mut row = PackedRow::from_support(self.len, v.support());
        self.reduce(&mut row);
        let Some(pivot) = row.leading() else {
            return Ok(false);
        };
        for (_, other) in self.rows.iter_mut() {
            if other.get(pivot) {
                other.xor_assign(&row);
            }
        }
        self.rows.push((pivot, row));
        Ok(true)
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        if v.len() != self.len {
            return false;
        }
        let mut row = PackedRow::from_support(self.len, v.support());
        self.reduce(&mut row);
        row.leading().is_none()
    }
}

/// GF(2) rank by elimination over the rows of `m`.
pub fn rank_mod2(m: &BinaryMatrix) -> usize {
    let mut basis = PackedBasis::new(m.cols());
    for r in 0..m.rows() {
        basis
            .insert(&m.row_vector(r))
            .expect("row length equals column count");
    }
    basis.dim()
}

/// Basis of `{v : M v = 0}`, one vector per free column of the reduced echelon form.
pub fn kernel_basis_mod2(m: &BinaryMatrix) -> Vec<BitVector> {
    let cols = m.cols();
    let mut basis = PackedBasis::new(cols);
    for r in 0..m.rows() {
        basis
            .insert(&m.row_vector(r))
            .expect("row length equals column count");
    }
    let mut is_pivot = vec![false; cols];
    for (p, _) in &basis.rows {
        is_pivot[*p] = true;
    }
    (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|free| {
            let mut v = PackedRow::zeros(cols);
            v.flip(free);
            for (pivot, row) in &basis.rows {
                if row.get(free) {
                    v.flip(*pivot);
                }
            }
            v.to_bitvector(cols)
        })
        .collect()
}

/// Whether `v` lies in the span of `vectors`.
pub fn span_contains(vectors: &[BitVector], v: &BitVector) -> Result<bool> {
    let mut basis = PackedBasis::new(v.len());
    for u in vectors {
        basis.insert(u)?;
    }
    Ok(basis.contains(v))
}

/// Vectors from `span_large` that complete a basis of `span(span_small)` to a
/// basis of `span(span_large)`.
pub fn quotient_basis(span_small: &[BitVector], span_large: &[BitVector]) -> Result<Vec<BitVector>> {
    let Some(len) = span_large.first().or(span_small.first()).map(BitVector::len) else {
        return Ok(Vec::new());
    };
    let mut large = PackedBasis::new(len);
    for v in span_large {
        large.insert(v)?;
    }
    let mut current = PackedBasis::new(len);
    for v in span_small {
        if !large.contains(v) {
            return Err(Error::NotInSpan);
        }
        current.insert(v)?;
    }
    let mut out = Vec::new();
    for v in span_large {
        if current.insert(v)? {
            out.push(v.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_small_cases() {
        assert_eq!(rank_mod2(&BinaryMatrix::identity(2)), 2);
        let ones = BinaryMatrix::from_dense(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(rank_mod2(&ones), 1);
        assert_eq!(rank_mod2(&BinaryMatrix::zeros(3, 4)), 0);
    }

    #[test]
    fn kernel_small_cases() {
        assert!(kernel_basis_mod2(&BinaryMatrix::identity(3)).is_empty());
        let m = BinaryMatrix::from_dense(&[vec![1, 1]]).unwrap();
        let k = kernel_basis_mod2(&m);
        assert_eq!(k, vec![BitVector::from_dense(&[1, 1])]);
    }

    #[test]
    fn kernel_spans_beyond_word_boundary() {
        // 1 x 130 row of ones: kernel has dimension 129.
        let m = BinaryMatrix::from_entries(1, 130, (0..130).map(|c| (0, c))).unwrap();
        let k = kernel_basis_mod2(&m);
        assert_eq!(k.len(), 129);
        for v in &k {
            assert!(m.mat_vec_mod2(v).unwrap().is_zero());
        }
    }

    #[test]
    fn quotient_small_cases() {
        let e0 = BitVector::from_dense(&[1, 0]);
        assert!(quotient_basis(&[e0.clone()], &[e0.clone()]).unwrap().is_empty());
        assert_eq!(quotient_basis(&[], &[e0.clone()]).unwrap(), vec![e0.clone()]);
        let e1 = BitVector::from_dense(&[0, 1]);
        assert!(matches!(quotient_basis(&[e1], &[e0]), Err(Error::NotInSpan)));
    }

    #[test]
    fn span_membership() {
        let a = BitVector::from_dense(&[1, 1, 0]);
        let b = BitVector::from_dense(&[0, 1, 1]);
        let c = BitVector::from_dense(&[1, 0, 1]);
        let d = BitVector::from_dense(&[1, 0, 0]);
        assert!(span_contains(&[a.clone(), b.clone()], &c).unwrap());
        assert!(!span_contains(&[a, b], &d).unwrap());
    }
}
