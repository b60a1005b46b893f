use crate::gf2::BitVector;

/// How a closed branch was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GrowthMode {
    /// Checks explained by earlier closed branches count as trivial.
    NonDestructive,
    /// Touching a check explained by a non-destructively closed branch
    /// dismantles that branch.
    Destructive,
}

/// A set of mechanisms whose odd-touched checks are nontrivial and whose
/// even-touched checks are trivial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedBranch {
    /// Sorted mechanism indices.
    pub mechanisms: Vec<usize>,
    /// Sorted rows touched an odd number of times.
    pub checks_flipped: Vec<usize>,
    pub mode: GrowthMode,
}

pub(crate) const NONE: u32 = u32::MAX;

/// Closed branches accumulated during one weight iteration.
///
/// Flip sets of live branches are pairwise disjoint subsets of the syndrome,
/// so each row and each mechanism has at most one owning branch.
#[derive(Clone, Debug)]
pub struct Cluster {
    syndrome: Vec<u8>,
    effective: Vec<u8>,
    error: Vec<u8>,
    slots: Vec<Option<ClosedBranch>>,
    row_owner: Vec<u32>,
    mech_owner: Vec<u32>,
    remaining: usize,
}

impl Cluster {
    pub fn new(syndrome: &[u8], num_mechanisms: usize) -> Self {
        let syndrome: Vec<u8> = syndrome.iter().map(|b| b & 1).collect();
        let remaining = syndrome.iter().filter(|&&b| b == 1).count();
        Cluster {
            effective: syndrome.clone(),
            row_owner: vec![NONE; syndrome.len()],
            syndrome,
            error: vec![0; num_mechanisms],
            slots: Vec::new(),
            mech_owner: vec![NONE; num_mechanisms],
            remaining,
        }
    }

    pub fn syndrome(&self) -> &[u8] {
        &self.syndrome
    }

    /// Syndrome with the checks of every closed branch switched off.
    pub fn effective_syndrome(&self) -> &[u8] {
        &self.effective
    }

    pub fn is_nontrivial(&self, row: usize) -> bool {
        self.effective[row] == 1
    }

    /// Number of nontrivial checks not yet explained.
    pub fn remaining(&self) -> usize {
        self.remaining
    }

    /// Whether the cluster's flipped checks equal the syndrome.
    pub fn is_resolved(&self) -> bool {
        self.remaining == 0
    }

    pub fn flipped_checks(&self) -> BitVector {
        let flipped: Vec<u8> = self
            .syndrome
            .iter()
            .zip(&self.effective)
            .map(|(s, e)| s ^ e)
            .collect();
        BitVector::from_dense(&flipped)
    }

    pub fn error(&self) -> BitVector {
        BitVector::from_dense(&self.error)
    }

    pub(crate) fn error_dense(&self) -> &[u8] {
        &self.error
    }

    pub fn nd_branches(&self) -> impl Iterator<Item = &ClosedBranch> {
        self.branches().filter(|b| b.mode == GrowthMode::NonDestructive)
    }

    pub fn d_branches(&self) -> impl Iterator<Item = &ClosedBranch> {
        self.branches().filter(|b| b.mode == GrowthMode::Destructive)
    }

    pub fn branches(&self) -> impl Iterator<Item = &ClosedBranch> {
        self.slots.iter().flatten()
    }

    pub(crate) fn row_owner(&self, row: usize) -> u32 {
        self.row_owner[row]
    }

    pub(crate) fn mech_owner(&self, mech: usize) -> u32 {
        self.mech_owner[mech]
    }

    pub(crate) fn slot_mode(&self, slot: u32) -> Option<GrowthMode> {
        self.slots
            .get(slot as usize)
            .and_then(Option::as_ref)
            .map(|b| b.mode)
    }

    /// Records a closed branch. Its flipped checks must currently be nontrivial
    /// and its mechanisms unowned.
    pub(crate) fn insert(&mut self, branch: ClosedBranch) {
        let slot = self.slots.len() as u32;
        for &r in &branch.checks_flipped {
            debug_assert_eq!(self.effective[r], 1);
            self.effective[r] = 0;
            self.row_owner[r] = slot;
            self.remaining -= 1;
        }
        for &m in &branch.mechanisms {
            debug_assert_eq!(self.mech_owner[m], NONE);
            self.error[m] ^= 1;
            self.mech_owner[m] = slot;
        }
        self.slots.push(Some(branch));
    }

    /// Removes a closed branch; its checks become nontrivial again.
    pub(crate) fn dismantle(&mut self, slot: u32) -> Option<ClosedBranch> {
        let branch = self.slots.get_mut(slot as usize)?.take()?;
        for &r in &branch.checks_flipped {
            self.effective[r] = 1;
            self.row_owner[r] = NONE;
            self.remaining += 1;
        }
        for &m in &branch.mechanisms {
            self.error[m] ^= 1;
            self.mech_owner[m] = NONE;
        }
        Some(branch)
    }
}
