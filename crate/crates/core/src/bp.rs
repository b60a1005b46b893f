//! Sum-product belief propagation on the Tanner graph of a noise parity-check
//! matrix, and the BP-assisted closed-branch decoder.
//!
//! Check nodes are rows, variable nodes are columns. Messages are
//! log-likelihood ratios `log(P[no flip] / P[flip])` and the check rule is
//! conditioned on the syndrome bit. The schedule is flooding.

use crate::cb::{CbEngine, CbParams, GrowthStats};
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};
use crate::noise::DetectorModel;

/// Output llrs are clamped to `[-LLR_CLAMP, LLR_CLAMP]`.
pub const LLR_CLAMP: f64 = 25.0;
pub const DEFAULT_MAX_ITERS: usize = 30;

const TANH_LIMIT: f64 = 1.0 - 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct BpResult {
    /// Posterior probability that each mechanism fired.
    pub marginals: Vec<f64>,
    /// Clamped posterior llrs.
    pub llrs: Vec<f64>,
    pub hard_decision: BitVector,
    /// Whether the hard decision reproduces the syndrome.
    pub converged: bool,
    pub iterations: usize,
}

/// Per-mechanism costs for weighted growth, shifted so the minimum is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct EventWeights {
    pub weights: Vec<f64>,
}

/// `w_i = llr_i - min(llr) + 1`.
pub fn event_weights(llrs: &[f64]) -> Result<EventWeights> {
    if llrs.is_empty() {
        return Err(Error::InvalidParameter("event weights need at least one llr".into()));
    }
    if let Some(bad) = llrs.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite llr {bad}")));
    }
    let min = llrs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EventWeights {
        weights: llrs.iter().map(|&l| l - min + 1.0).collect(),
    })
}

/// Precomputed Tanner graph plus channel llrs, reusable across syndromes.
#[derive(Clone, Debug)]
pub struct BeliefPropagation {
    rows: usize,
    cols: usize,
    // Edges sorted by check; check r owns edges check_start[r]..check_start[r+1].
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    // Edge indices per variable.
    var_edges: Vec<Vec<usize>>,
    channel: Vec<f64>,
    pub max_iters: usize,
    /// Stop as soon as the hard decision matches the syndrome.
    pub early_stop: bool,
}

impl BeliefPropagation {
    pub fn new(m: &BinaryMatrix, priors: &[f64], max_iters: usize) -> Result<Self> {
        if priors.len() != m.cols() {
            return Err(Error::DimensionMismatch {
                context: "priors vs matrix columns",
                expected: m.cols(),
                found: priors.len(),
            });
        }
        for &p in priors {
            if !(p > 0.0 && p <= 0.5) {
                return Err(Error::InvalidProbability(p, "(0, 0.5]"));
            }
        }
        let mut check_start = Vec::with_capacity(m.rows() + 1);
        let mut edge_var = Vec::with_capacity(m.nnz());
        let mut var_edges = vec![Vec::new(); m.cols()];
        for r in 0..m.rows() {
            check_start.push(edge_var.len());
            for &c in m.row(r) {
                var_edges[c].push(edge_var.len());
                edge_var.push(c);
            }
        }
        check_start.push(edge_var.len());
        Ok(BeliefPropagation {
            rows: m.rows(),
            cols: m.cols(),
            check_start,
            edge_var,
            var_edges,
            channel: priors.iter().map(|&p| ((1.0 - p) / p).ln()).collect(),
            max_iters,
            early_stop: true,
        })
    }

    fn matches(&self, hard: &[u8], syndrome: &[u8]) -> bool {
        (0..self.rows).all(|r| {
            let parity = self.edge_var[self.check_start[r]..self.check_start[r + 1]]
                .iter()
                .fold(0u8, |acc, &c| acc ^ hard[c]);
            parity == syndrome[r] & 1
        })
    }

    fn finish(&self, posterior: &[f64], hard: Vec<u8>, converged: bool, iterations: usize) -> BpResult {
        BpResult {
            marginals: posterior.iter().map(|&l| 1.0 / (1.0 + l.exp())).collect(),
            llrs: posterior.iter().map(|&l| l.clamp(-LLR_CLAMP, LLR_CLAMP)).collect(),
            hard_decision: BitVector::from_dense(&hard),
            converged,
            iterations,
        }
    }

    /// Decodes a dense 0/1 syndrome of length `rows`.
    pub fn decode_dense(&self, syndrome: &[u8]) -> BpResult {
        assert_eq!(syndrome.len(), self.rows, "syndrome length");
        let mut posterior = self.channel.clone();
        let mut hard: Vec<u8> = posterior.iter().map(|&l| u8::from(l < 0.0)).collect();
        let mut converged = self.matches(&hard, syndrome);
        if converged && (self.early_stop || self.max_iters == 0) {
            return self.finish(&posterior, hard, true, 0);
        }

        let n_edges = self.edge_var.len();
        let mut to_check: Vec<f64> = self.edge_var.iter().map(|&c| self.channel[c]).collect();
        let mut to_var = vec![0.0f64; n_edges];
        let mut tanhs = Vec::new();
        let mut suffix = Vec::new();
        let mut iterations = 0;

        for it in 1..=self.max_iters {
            iterations = it;
            for r in 0..self.rows {
                let (lo, hi) = (self.check_start[r], self.check_start[r + 1]);
                tanhs.clear();
                tanhs.extend(to_check[lo..hi].iter().map(|&q| (0.5 * q).tanh()));
                // Leave-one-out products via prefix/suffix sweeps.
                suffix.clear();
                suffix.resize(tanhs.len() + 1, 1.0);
                for i in (0..tanhs.len()).rev() {
                    suffix[i] = suffix[i + 1] * tanhs[i];
                }
                let sign = if syndrome[r] & 1 == 1 { -1.0 } else { 1.0 };
                let mut prefix = 1.0;
                for (i, e) in (lo..hi).enumerate() {
                    let prod = (prefix * suffix[i + 1]).clamp(-TANH_LIMIT, TANH_LIMIT);
                    to_var[e] = sign * 2.0 * prod.atanh();
                    prefix *= tanhs[i];
                }
            }
            for c in 0..self.cols {
                let total = self.channel[c] + self.var_edges[c].iter().map(|&e| to_var[e]).sum::<f64>();
                posterior[c] = total;
                for &e in &self.var_edges[c] {
                    to_check[e] = total - to_var[e];
                }
            }
            for (h, &l) in hard.iter_mut().zip(&posterior) {
                *h = u8::from(l < 0.0);
            }
            if self.matches(&hard, syndrome) {
                converged = true;
                if self.early_stop {
                    break;
                }
            } else {
                converged = false;
            }
        }
        self.finish(&posterior, hard, converged, iterations)
    }

    pub fn decode(&self, syndrome: &BitVector) -> Result<BpResult> {
        if syndrome.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "syndrome length vs matrix rows",
                expected: self.rows,
                found: syndrome.len(),
            });
        }
        Ok(self.decode_dense(&syndrome.to_dense()))
    }
}

/// One-shot sum-product decode with early stopping.
pub fn bp_decode(m: &BinaryMatrix, syndrome: &BitVector, priors: &[f64], max_iters: usize) -> Result<BpResult> {
    BeliefPropagation::new(m, priors, max_iters)?.decode(syndrome)
}

/// How a BP+CB decode finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BpCbPath {
    /// BP's hard decision matched the syndrome.
    Bp,
    /// Weighted closed-branch growth matched the syndrome.
    ClosedBranch,
    /// Nothing matched; the zero vector was returned.
    Failed,
}

#[derive(Clone, Debug)]
pub struct BpCbOutcome {
    pub error: Vec<u8>,
    pub path: BpCbPath,
    pub stats: GrowthStats,
}

/// BP followed, when BP's answer does not match, by closed-branch growth
/// weighted by BP's posterior llrs.
#[derive(Clone, Debug)]
pub struct BpCbDecoder {
    matrix: BinaryMatrix,
    bp: BeliefPropagation,
    params: CbParams,
}

impl BpCbDecoder {
    pub fn new(matrix: BinaryMatrix, priors: &[f64], params: CbParams, max_iters: usize) -> Result<Self> {
        params.validate()?;
        let bp = BeliefPropagation::new(&matrix, priors, max_iters)?;
        Ok(BpCbDecoder { matrix, bp, params })
    }

    pub fn from_model(model: &DetectorModel, params: CbParams, max_iters: usize) -> Result<Self> {
        Self::new(model.noise_matrix.clone(), &model.priors, params, max_iters)
    }

    pub fn matrix(&self) -> &BinaryMatrix {
        &self.matrix
    }

    pub fn decode_dense(&self, syndrome: &[u8]) -> BpCbOutcome {
        let bp = self.bp.decode_dense(syndrome);
        if bp.converged {
            return BpCbOutcome {
                error: bp.hard_decision.to_dense(),
                path: BpCbPath::Bp,
                stats: GrowthStats::default(),
            };
        }
        let weights = event_weights(&bp.llrs).expect("clamped llrs are finite and nonempty");
        let mut engine = CbEngine::weighted(&self.matrix, self.params, &weights.weights);
        let found = engine.decode(syndrome);
        let stats = engine.into_stats();
        match found {
            Some(error) => BpCbOutcome {
                error,
                path: BpCbPath::ClosedBranch,
                stats,
            },
            None => BpCbOutcome {
                error: vec![0; self.matrix.cols()],
                path: BpCbPath::Failed,
                stats,
            },
        }
    }
}

/// BP+CB on a detector model. Returns the zero vector on failure.
pub fn bp_cb_decode(
    syndrome: &BitVector,
    params: CbParams,
    model: &DetectorModel,
    max_iters: usize,
) -> Result<BitVector> {
    if syndrome.len() != model.num_detectors() {
        return Err(Error::DimensionMismatch {
            context: "syndrome length vs detectors",
            expected: model.num_detectors(),
            found: syndrome.len(),
        });
    }
    let decoder = BpCbDecoder::from_model(model, params, max_iters)?;
    Ok(BitVector::from_dense(&decoder.decode_dense(&syndrome.to_dense()).error))
}
