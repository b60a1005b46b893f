//! The closed-branch decoder.
//!
//! A branch starts from a single mechanism that touches at least one
//! nontrivial check and grows through the trivial checks it leaves
//! unbalanced. Growth is breadth-first over the open branches of one seed:
//! at every step each open branch is extended through its frontier check by
//! the candidates that leave the fewest unbalanced checks, and the first
//! branch to balance every check it touches is closed. The seed is rejected
//! when more than `max_br` branches are open at once or when every branch
//! runs out of budget.
//!
//! Closed branches are collected in a [`Cluster`]; the decoder succeeds when
//! the cluster explains the whole syndrome.

mod cluster;
mod growth;

pub use cluster::{ClosedBranch, Cluster, GrowthMode};
pub use growth::{Branch, CbEngine, GrowthOutcome};

use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};

/// Complexity caps of the closed-branch decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CbParams {
    /// Largest growth budget tried.
    pub max_gr: usize,
    /// Most branches a single branch instance may keep open.
    pub max_br: usize,
    /// Most trivial checks a seed mechanism may touch.
    pub max_tcts: usize,
}

impl CbParams {
    pub fn new(max_gr: usize, max_br: usize, max_tcts: usize) -> Result<Self> {
        let params = CbParams {
            max_gr,
            max_br,
            max_tcts,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_gr == 0 || self.max_br == 0 || self.max_tcts == 0 {
            return Err(Error::InvalidParameter(format!(
                "max_gr, max_br and max_tcts must all be at least 1 (got {}, {}, {})",
                self.max_gr, self.max_br, self.max_tcts
            )));
        }
        Ok(())
    }
}

/// Counters collected while decoding.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GrowthStats {
    pub weight_iterations: u64,
    pub branch_instances: u64,
    pub closed: u64,
    pub rejected_branching: u64,
    pub rejected_budget: u64,
    pub dismantled: u64,
    /// Largest number of simultaneously open branches of any instance.
    pub max_spawned: usize,
    /// Largest number of growths (mechanisms beyond the seed) of any branch.
    pub max_growths: usize,
}

impl GrowthStats {
    pub fn merge(&mut self, other: &GrowthStats) {
        self.weight_iterations += other.weight_iterations;
        self.branch_instances += other.branch_instances;
        self.closed += other.closed;
        self.rejected_branching += other.rejected_branching;
        self.rejected_budget += other.rejected_budget;
        self.dismantled += other.dismantled;
        self.max_spawned = self.max_spawned.max(other.max_spawned);
        self.max_growths = self.max_growths.max(other.max_growths);
    }
}

/// Checks the closed-branch conditions for `columns` against `syndrome`:
/// every row touched an odd number of times is nontrivial and every row
/// touched an even number of times is trivial.
pub fn verify_closed_branch(columns: &[usize], syndrome: &BitVector, m: &BinaryMatrix) -> bool {
    if columns.is_empty() || syndrome.len() != m.rows() || columns.iter().any(|&c| c >= m.cols()) {
        return false;
    }
    let mut rows: Vec<usize> = columns.iter().flat_map(|&c| m.col(c).iter().copied()).collect();
    rows.sort_unstable();
    rows.chunk_by(|a, b| a == b)
        .all(|run| (run.len() % 2 == 1) == syndrome.get(run[0]))
}

fn check_syndrome(syndrome: &BitVector, m: &BinaryMatrix) -> Result<()> {
    if syndrome.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            context: "syndrome length vs matrix rows",
            expected: m.rows(),
            found: syndrome.len(),
        });
    }
    Ok(())
}

/// Runs the closed-branch schedule. Returns the zero vector when no growth
/// budget up to `max_gr` produces a cluster matching the syndrome.
pub fn cb_decode(syndrome: &BitVector, params: CbParams, m: &BinaryMatrix) -> Result<BitVector> {
    cb_decode_with_stats(syndrome, params, m).map(|(e, _)| e)
}

pub fn cb_decode_with_stats(
    syndrome: &BitVector,
    params: CbParams,
    m: &BinaryMatrix,
) -> Result<(BitVector, GrowthStats)> {
    check_syndrome(syndrome, m)?;
    params.validate()?;
    let mut engine = CbEngine::new(m, params);
    let found = engine.decode(&syndrome.to_dense());
    let error = match found {
        Some(e) => BitVector::from_dense(&e),
        None => BitVector::zeros(m.cols()),
    };
    Ok((error, engine.into_stats()))
}
