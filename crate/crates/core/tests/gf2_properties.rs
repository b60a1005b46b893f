use cbdecode::gf2::{
    kernel_basis_mod2, quotient_basis, rank_mod2, read_sparse_matrix, span_contains, write_sparse_matrix, BinaryMatrix,
    BitVector,
};
use proptest::prelude::*;

fn dense_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BinaryMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(prop::bool::weighted(0.3).prop_map(u8::from), c), r)
            .prop_map(|rows| BinaryMatrix::from_dense(&rows).unwrap())
    })
}

/// Rank by exhaustive span enumeration, for matrices with few rows.
fn rank_by_enumeration(m: &BinaryMatrix) -> usize {
    let rows = m.row_vectors();
    let mut span = std::collections::HashSet::new();
    for mask in 0u32..(1 << rows.len()) {
        let mut v = BitVector::zeros(m.cols());
        for (i, r) in rows.iter().enumerate() {
            if mask >> i & 1 == 1 {
                v = v.xor(r).unwrap();
            }
        }
        span.insert(v.support().to_vec());
    }
    span.len().trailing_zeros() as usize
}

proptest! {
    #[test]
    fn rank_nullity(m in dense_matrix(10, 70)) {
        let kernel = kernel_basis_mod2(&m);
        prop_assert_eq!(rank_mod2(&m) + kernel.len(), m.cols());
        for v in &kernel {
            prop_assert!(m.mat_vec_mod2(v).unwrap().is_zero());
        }
    }

    #[test]
    fn rank_matches_enumeration(m in dense_matrix(8, 12)) {
        prop_assert_eq!(m.rank(), rank_by_enumeration(&m));
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn kernel_is_independent(m in dense_matrix(6, 20)) {
        let kernel = m.kernel_basis();
        let as_rows: Vec<Vec<usize>> = kernel.iter().map(|v| v.support().to_vec()).collect();
        if !kernel.is_empty() {
            let k = BinaryMatrix::from_entries(
                kernel.len(),
                m.cols(),
                as_rows.iter().enumerate().flat_map(|(r, cs)| cs.iter().map(move |&c| (r, c))),
            ).unwrap();
            prop_assert_eq!(k.rank(), kernel.len());
        }
    }

    #[test]
    fn mat_vec_is_linear(m in dense_matrix(8, 16), a in prop::collection::vec(0u8..2, 16), b in prop::collection::vec(0u8..2, 16)) {
        let n = m.cols();
        let va = BitVector::from_dense(&a[..n]);
        let vb = BitVector::from_dense(&b[..n]);
        let lhs = m.mat_vec_mod2(&va.xor(&vb).unwrap()).unwrap();
        let rhs = m.mat_vec_mod2(&va).unwrap().xor(&m.mat_vec_mod2(&vb).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn transpose_is_an_involution(m in dense_matrix(8, 16)) {
        prop_assert_eq!(m.transpose().transpose(), m.clone());
        prop_assert_eq!(m.transpose().rows(), m.cols());
    }

    #[test]
    fn quotient_extends_small_span(m in dense_matrix(6, 24)) {
        let small: Vec<BitVector> = m.row_vectors().into_iter().take(2).collect();
        let large = m.row_vectors();
        let q = quotient_basis(&small, &large).unwrap();
        prop_assert_eq!(q.len() + rank_mod2(&BinaryMatrix::from_entries(
            small.len(), m.cols(),
            small.iter().enumerate().flat_map(|(r, v)| v.support().iter().map(move |&c| (r, c))),
        ).unwrap()), m.rank());
        for v in &q {
            prop_assert!(span_contains(&large, v).unwrap());
            prop_assert!(!span_contains(&small, v).unwrap());
        }
    }

    #[test]
    fn sparse_text_round_trip(m in dense_matrix(10, 20)) {
        let mut buf = Vec::new();
        write_sparse_matrix(&m, &mut buf).unwrap();
        let back = read_sparse_matrix(buf.as_slice(), "buf").unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn rank_of_identity_and_zero() {
    assert_eq!(BinaryMatrix::identity(130).rank(), 130);
    assert_eq!(BinaryMatrix::zeros(5, 9).rank(), 0);
    assert_eq!(BinaryMatrix::zeros(5, 9).kernel_basis().len(), 9);
}
