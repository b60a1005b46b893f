//! Sparse linear algebra over GF(2).
//!
//! [`BinaryMatrix`] keeps both row-major and column-major adjacency lists so
//! decoders can walk from a check to its mechanisms and back without any
//! transposition. Rank, kernel and quotient computations go through a dense
//! bit-packed elimination in [`dense`].

mod dense;
mod io;

pub use dense::{kernel_basis_mod2, quotient_basis, rank_mod2, span_contains, PackedBasis};
pub use io::{read_sparse_matrix, write_sparse_matrix};

use crate::error::{Error, Result};

/// A binary vector stored as the sorted list of its nonzero positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    support: Vec<usize>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            support: Vec::new(),
        }
    }

    /// Builds a vector from arbitrary indices. Repeated indices cancel in pairs.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut support: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = support.iter().find(|&&i| i >= len) {
            return Err(Error::IndexOutOfRange { index: bad, len });
        }
        support.sort_unstable();
        let mut reduced = Vec::with_capacity(support.len());
        for i in support {
            if reduced.last() == Some(&i) {
                reduced.pop();
            } else {
                reduced.push(i);
            }
        }
        Ok(BitVector {
            len,
            support: reduced,
        })
    }

    pub fn from_dense(bits: &[u8]) -> Self {
        BitVector {
            len: bits.len(),
            support: bits
                .iter()
                .enumerate()
                .filter(|(_, &b)| b & 1 == 1)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len];
        for &i in &self.support {
            out[i] = 1;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn get(&self, index: usize) -> bool {
        self.support.binary_search(&index).is_ok()
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                context: "vector xor",
                expected: self.len,
                found: other.len,
            });
        }
        let (a, b) = (&self.support, &other.support);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Ok(BitVector {
            len: self.len,
            support: out,
        })
    }

    /// Parity of the overlap of the two supports.
    pub fn dot(&self, other: &BitVector) -> bool {
        let (a, b) = (&self.support, &other.support);
        let (mut i, mut j, mut parity) = (0, 0, false);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    parity = !parity;
                    i += 1;
                    j += 1;
                }
            }
        }
        parity
    }
}

/// Sparse binary matrix. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
}

impl BinaryMatrix {
    /// Builds a matrix from a set of nonzero positions. Repeated positions are
    /// stored once.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut row_adj = vec![Vec::new(); rows];
        for (r, c) in entries {
            if r >= rows {
                return Err(Error::IndexOutOfRange { index: r, len: rows });
            }
            if c >= cols {
                return Err(Error::IndexOutOfRange { index: c, len: cols });
            }
            row_adj[r].push(c);
        }
        let mut col_adj = vec![Vec::new(); cols];
        for (r, row) in row_adj.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            for &c in row.iter() {
                col_adj[c].push(r);
            }
        }
        Ok(BinaryMatrix {
            rows,
            cols,
            row_adj,
            col_adj,
        })
    }

    /// Builds a matrix whose column `j` has ones at the rows listed in `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[Vec<usize>]) -> Result<Self> {
        Self::from_entries(
            rows,
            columns.len(),
            columns
                .iter()
                .enumerate()
                .flat_map(|(c, rs)| rs.iter().map(move |&r| (r, c))),
        )
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                context: "dense matrix row",
                expected: cols,
                found: bad.len(),
            });
        }
        Self::from_entries(
            rows.len(),
            cols,
            rows.iter().enumerate().flat_map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &b)| b & 1 == 1)
                    .map(move |(c, _)| (r, c))
            }),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            rows,
            cols,
            row_adj: vec![Vec::new(); rows],
            col_adj: vec![Vec::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_entries(n, n, (0..n).map(|i| (i, i))).expect("diagonal is in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Column indices of the nonzeros in row `r`, ascending.
    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_adj[r]
    }

    /// Row indices of the nonzeros in column `c`, ascending.
    pub fn col(&self, c: usize) -> &[usize] {
        &self.col_adj[c]
    }

    pub fn nnz(&self) -> usize {
        self.row_adj.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_adj[r].binary_search(&c).is_ok()
    }

    /// Nonzero positions in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_adj
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&c| (r, c)))
    }

    pub fn row_vector(&self, r: usize) -> BitVector {
        BitVector {
            len: self.cols,
            support: self.row_adj[r].clone(),
        }
    }

    pub fn col_vector(&self, c: usize) -> BitVector {
        BitVector {
            len: self.rows,
            support: self.col_adj[c].clone(),
        }
    }

    pub fn row_vectors(&self) -> Vec<BitVector> {
        (0..self.rows).map(|r| self.row_vector(r)).collect()
    }

    pub fn transpose(&self) -> BinaryMatrix {
        BinaryMatrix {
            rows: self.cols,
            cols: self.rows,
            row_adj: self.col_adj.clone(),
            col_adj: self.row_adj.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.row_adj.iter().all(Vec::is_empty)
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                context: "hstack",
                expected: self.rows,
                found: other.rows,
            });
        }
        let shift = self.cols;
        Self::from_entries(
            self.rows,
            self.cols + other.cols,
            self.entries()
                .chain(other.entries().map(|(r, c)| (r, c + shift))),
        )
    }

    /// Entrywise sum mod 2.
    pub fn add(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix add",
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let mut row_adj = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let a = BitVector {
                len: self.cols,
                support: self.row_adj[r].clone(),
            };
            let b = BitVector {
                len: self.cols,
                support: other.row_adj[r].clone(),
            };
            row_adj.push(a.xor(&b)?.support);
        }
        Self::from_entries(
            self.rows,
            self.cols,
            row_adj
                .iter()
                .enumerate()
                .flat_map(|(r, row)| row.iter().map(move |&c| (r, c))),
        )
    }

    /// Matrix product mod 2.
    pub fn mul(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut entries = Vec::new();
        let mut acc = vec![0u8; other.cols];
        for r in 0..self.rows {
            for &k in &self.row_adj[r] {
                for &c in &other.row_adj[k] {
                    acc[c] ^= 1;
                }
            }
            for (c, bit) in acc.iter_mut().enumerate() {
                if *bit == 1 {
                    entries.push((r, c));
                    *bit = 0;
                }
            }
        }
        Self::from_entries(self.rows, other.cols, entries)
    }

    /// `s = M v mod 2`.
    pub fn mat_vec_mod2(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut acc = vec![0u8; self.rows];
        for &c in v.support() {
            for &r in &self.col_adj[c] {
                acc[r] ^= 1;
            }
        }
        Ok(BitVector::from_dense(&acc))
    }

    /// Dense form of [`mat_vec_mod2`](Self::mat_vec_mod2) for the hot paths.
    /// `v` must have length `cols`.
    pub fn mat_vec_dense(&self, v: &[u8]) -> Vec<u8> {
        debug_assert_eq!(v.len(), self.cols);
        let mut acc = vec![0u8; self.rows];
        for (c, &bit) in v.iter().enumerate() {
            if bit & 1 == 1 {
                for &r in &self.col_adj[c] {
                    acc[r] ^= 1;
                }
            }
        }
        acc
    }

    pub fn rank(&self) -> usize {
        rank_mod2(self)
    }

    pub fn kernel_basis(&self) -> Vec<BitVector> {
        kernel_basis_mod2(self)
    }
}

/// `s = M v mod 2`; free-function form of [`BinaryMatrix::mat_vec_mod2`].
pub fn mat_vec_mod2(m: &BinaryMatrix, v: &BitVector) -> Result<BitVector> {
    m.mat_vec_mod2(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mat_vec_small_cases() {
        let one = BinaryMatrix::identity(1);
        let v = BitVector::from_dense(&[1]);
        assert_eq!(one.mat_vec_mod2(&v).unwrap().to_dense(), vec![1]);

        let id2 = BinaryMatrix::identity(2);
        let v = BitVector::from_dense(&[1, 0]);
        assert_eq!(id2.mat_vec_mod2(&v).unwrap().to_dense(), vec![1, 0]);
    }

    #[test]
    fn mat_vec_rejects_wrong_length() {
        let id2 = BinaryMatrix::identity(2);
        let v = BitVector::zeros(3);
        assert!(matches!(
            id2.mat_vec_mod2(&v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn entries_out_of_range_are_rejected() {
        assert!(BinaryMatrix::from_entries(2, 2, [(2, 0)]).is_err());
        assert!(BinaryMatrix::from_entries(2, 2, [(0, 5)]).is_err());
    }

    #[test]
    fn row_and_column_views_agree() {
        let m = BinaryMatrix::from_entries(3, 4, [(0, 1), (2, 3), (1, 1), (0, 0), (0, 1)]).unwrap();
        assert_eq!(m.nnz(), 4);
        for (r, c) in m.entries() {
            assert!(m.col(c).contains(&r));
        }
        let from_cols: usize = (0..m.cols()).map(|c| m.col(c).len()).sum();
        assert_eq!(from_cols, m.nnz());
        assert_eq!(m.col(1), &[0, 1]);
    }

    #[test]
    fn bitvector_indices_cancel_in_pairs() {
        let v = BitVector::from_indices(5, [3, 1, 3, 4, 3]).unwrap();
        assert_eq!(v.support(), &[1, 3, 4]);
        assert!(BitVector::from_indices(2, [2]).is_err());
    }

    #[test]
    fn xor_and_dot() {
        let a = BitVector::from_indices(6, [0, 2, 4]).unwrap();
        let b = BitVector::from_indices(6, [2, 3]).unwrap();
        assert_eq!(a.xor(&b).unwrap().support(), &[0, 3, 4]);
        assert!(a.dot(&b));
        assert!(!a.dot(&a.xor(&a).unwrap()));
    }

    #[test]
    fn product_and_transpose() {
        let a = BinaryMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let prod = a.mul(&a.transpose()).unwrap();
        // [[2,1],[1,2]] mod 2
        assert_eq!(prod, BinaryMatrix::from_dense(&[vec![0, 1], vec![1, 0]]).unwrap());
    }
}
