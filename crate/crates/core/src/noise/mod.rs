//! Noise models: depolarizing sampling, noise parity-check matrices for data
//! qubit and phenomenological noise, and externally generated detector models.

mod dem;

pub use dem::{load_detector_model, parse_detector_model, save_detector_model, write_detector_model};

use rand::Rng;

use crate::bb::CssCode;
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};

/// An `n`-qubit Pauli operator in symplectic form. `Y` sets both parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliError {
    pub n: usize,
    pub x_part: BitVector,
    pub z_part: BitVector,
}

impl PauliError {
    pub fn identity(n: usize) -> Self {
        PauliError {
            n,
            x_part: BitVector::zeros(n),
            z_part: BitVector::zeros(n),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x_part.is_zero() && self.z_part.is_zero()
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        let mut support: Vec<usize> = self
            .x_part
            .support()
            .iter()
            .chain(self.z_part.support())
            .copied()
            .collect();
        support.sort_unstable();
        support.dedup();
        support.len()
    }
}

fn check_probability(p: f64, upper: f64, label: &'static str) -> Result<()> {
    if !(0.0..=upper).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability(p, label));
    }
    Ok(())
}

/// Independent depolarizing noise: each qubit is hit by X, Y or Z with
/// probability `p/3` each.
pub fn sample_depolarizing<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<PauliError> {
    check_probability(p, 1.0, "[0, 1]")?;
    let mut x = Vec::new();
    let mut z = Vec::new();
    for q in 0..n {
        let u: f64 = rng.random();
        if u < p {
            match rng.random_range(0..3u8) {
                0 => x.push(q),
                1 => {
                    x.push(q);
                    z.push(q);
                }
                _ => z.push(q),
            }
        }
    }
    Ok(PauliError {
        n,
        x_part: BitVector::from_indices(n, x)?,
        z_part: BitVector::from_indices(n, z)?,
    })
}

/// Independent error mechanisms with priors, the detectors they flip and the
/// logical observables they flip.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorModel {
    /// Rows are detectors, columns are error mechanisms.
    pub noise_matrix: BinaryMatrix,
    pub priors: Vec<f64>,
    /// Rows are logical observables, columns are error mechanisms.
    pub observables: BinaryMatrix,
}

impl DetectorModel {
    pub fn new(noise_matrix: BinaryMatrix, priors: Vec<f64>, observables: BinaryMatrix) -> Result<Self> {
        if priors.len() != noise_matrix.cols() {
            return Err(Error::DimensionMismatch {
                context: "priors vs noise matrix columns",
                expected: noise_matrix.cols(),
                found: priors.len(),
            });
        }
        if observables.cols() != noise_matrix.cols() {
            return Err(Error::DimensionMismatch {
                context: "observables vs noise matrix columns",
                expected: noise_matrix.cols(),
                found: observables.cols(),
            });
        }
        for &p in &priors {
            check_probability(p, 0.5, "[0, 0.5]")?;
        }
        Ok(DetectorModel {
            noise_matrix,
            priors,
            observables,
        })
    }

    pub fn num_detectors(&self) -> usize {
        self.noise_matrix.rows()
    }

    pub fn num_mechanisms(&self) -> usize {
        self.noise_matrix.cols()
    }

    pub fn num_observables(&self) -> usize {
        self.observables.rows()
    }

    /// Draws which mechanisms fire, as a dense 0/1 vector.
    pub fn sample_mechanisms<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        self.priors
            .iter()
            .map(|&p| u8::from(p > 0.0 && rng.random::<f64>() < p))
            .collect()
    }

    /// Builds the shot produced by a given set of fired mechanisms.
    pub fn shot_from_mechanisms(&self, mechanisms: BitVector) -> Result<Shot> {
        let syndrome = self.noise_matrix.mat_vec_mod2(&mechanisms)?;
        let observable_flips = self.observables.mat_vec_mod2(&mechanisms)?;
        Ok(Shot {
            mechanisms,
            syndrome,
            observable_flips,
        })
    }
}

/// One sampled fault configuration with its syndrome and observable flips.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shot {
    pub mechanisms: BitVector,
    pub syndrome: BitVector,
    pub observable_flips: BitVector,
}

pub fn sample_shot<R: Rng + ?Sized>(model: &DetectorModel, rng: &mut R) -> Shot {
    let mechanisms = BitVector::from_dense(&model.sample_mechanisms(rng));
    model
        .shot_from_mechanisms(mechanisms)
        .expect("sampled vector has one entry per mechanism")
}

/// Data-qubit noise under depolarizing probability `p`.
///
/// Returns `(x_model, z_model)`. The X-error model decodes with `hz` and flags
/// logical failure through `logical_z`; the Z-error model uses `hx` and
/// `logical_x`. Each mechanism has the marginal prior `2p/3`.
pub fn data_qubit_model(code: &CssCode, p: f64) -> Result<(DetectorModel, DetectorModel)> {
    check_probability(p, 0.75, "[0, 0.75]")?;
    let prior = 2.0 * p / 3.0;
    let x_model = DetectorModel::new(
        code.hz.clone(),
        vec![prior; code.n],
        CssCode::logical_matrix(&code.logical_z, code.n),
    )?;
    let z_model = DetectorModel::new(
        code.hx.clone(),
        vec![prior; code.n],
        CssCode::logical_matrix(&code.logical_x, code.n),
    )?;
    Ok((x_model, z_model))
}

/// Column layout of a phenomenological model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhenomenologicalColumn {
    /// X flip on data qubit `qubit` just before the measurement of `round`.
    Data { round: usize, qubit: usize },
    /// Flipped outcome of Z-check `check` in `round`.
    Measurement { round: usize, check: usize },
}

/// Index helper for the columns and detectors of a phenomenological model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhenomenologicalLayout {
    pub qubits: usize,
    pub checks: usize,
    pub rounds: usize,
}

impl PhenomenologicalLayout {
    pub fn num_detectors(&self) -> usize {
        self.checks * self.rounds
    }

    pub fn num_mechanisms(&self) -> usize {
        self.qubits * self.rounds + self.checks * (self.rounds - 1)
    }

    pub fn detector(&self, round: usize, check: usize) -> usize {
        round * self.checks + check
    }

    pub fn column(&self, col: PhenomenologicalColumn) -> usize {
        match col {
            PhenomenologicalColumn::Data { round, qubit } => round * self.qubits + qubit,
            PhenomenologicalColumn::Measurement { round, check } => {
                self.qubits * self.rounds + round * self.checks + check
            }
        }
    }

    pub fn describe(&self, index: usize) -> PhenomenologicalColumn {
        let data = self.qubits * self.rounds;
        if index < data {
            PhenomenologicalColumn::Data {
                round: index / self.qubits,
                qubit: index % self.qubits,
            }
        } else {
            let rest = index - data;
            PhenomenologicalColumn::Measurement {
                round: rest / self.checks,
                check: rest % self.checks,
            }
        }
    }
}

/// X-error phenomenological model over `rounds` detector layers.
///
/// Layer `t` holds the difference of Z-check outcomes between rounds `t` and
/// `t-1` (layer 0 is the raw first round). The last round's outcomes come from
/// the transversal Z-basis readout of the data and are noiseless, so
/// measurement-error columns exist for rounds `0..rounds-1` only. Each
/// measurement error flips the same check in two consecutive layers, which
/// gives bulk rows of weight `w + 2` and boundary rows of weight `w + 1` for a
/// check of weight `w`.
pub fn phenomenological_model(code: &CssCode, p: f64, q: f64, rounds: usize) -> Result<DetectorModel> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be at least 1".into()));
    }
    check_probability(p, 0.75, "[0, 0.75]")?;
    check_probability(q, 0.5, "[0, 0.5]")?;
    let layout = PhenomenologicalLayout {
        qubits: code.n,
        checks: code.hz.rows(),
        rounds,
    };
    let mut columns = Vec::with_capacity(layout.num_mechanisms());
    let mut priors = Vec::with_capacity(layout.num_mechanisms());
    let mut obs_entries = Vec::new();
    let logical = CssCode::logical_matrix(&code.logical_z, code.n);
    for round in 0..rounds {
        for qubit in 0..code.n {
            let col = layout.column(PhenomenologicalColumn::Data { round, qubit });
            debug_assert_eq!(col, columns.len());
            columns.push(
                code.hz
                    .col(qubit)
                    .iter()
                    .map(|&c| layout.detector(round, c))
                    .collect::<Vec<_>>(),
            );
            priors.push(2.0 * p / 3.0);
            obs_entries.extend(logical.col(qubit).iter().map(|&o| (o, col)));
        }
    }
    for round in 0..rounds - 1 {
        for check in 0..layout.checks {
            columns.push(vec![layout.detector(round, check), layout.detector(round + 1, check)]);
            priors.push(q);
        }
    }
    let noise_matrix = BinaryMatrix::from_columns(layout.num_detectors(), &columns)?;
    let observables = BinaryMatrix::from_entries(code.k, columns.len(), obs_entries)?;
    DetectorModel::new(noise_matrix, priors, observables)
}
