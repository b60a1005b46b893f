//! Monte Carlo estimation of logical error rates.
//!
//! Every shot draws from its own ChaCha8 stream `(seed, shot_index)`, so
//! results do not depend on the number of worker threads. Shots run in
//! fixed-size chunks on the rayon pool and are accumulated in index order;
//! with a failure target the run stops at the shot that reaches it.

use std::fmt;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bb::{build_bb_code, BbCodeSpec, CssCode};
use crate::bp::{BpCbDecoder, DEFAULT_MAX_ITERS};
use crate::cb::{CbEngine, CbParams, GrowthStats};
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};
use crate::noise::{data_qubit_model, load_detector_model, phenomenological_model, sample_depolarizing, DetectorModel};

/// Priors handed to BP are floored here so that noiseless mechanisms
/// (for example every mechanism at `p = 0`) keep finite llrs.
pub const MIN_BP_PRIOR: f64 = 1e-12;

/// Failure count at which runs stop by default.
pub const DEFAULT_TARGET_FAILURES: u64 = 100;

const CHUNK: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    DataQubit,
    Phenomenological,
    CircuitFile,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::DataQubit => "data-qubit",
            NoiseKind::Phenomenological => "phenomenological",
            NoiseKind::CircuitFile => "circuit-file",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecoderKind {
    #[serde(rename = "cb")]
    Cb,
    #[serde(rename = "bp+cb")]
    BpCb,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Cb => "cb",
            DecoderKind::BpCb => "bp+cb",
        })
    }
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

fn default_max_tcts() -> usize {
    3
}

/// One Monte Carlo experiment.
///
/// `code` is a preset name (`bb72`, `bb108`, `bb144`) or the path of a code
/// spec file; `dem` is the path of a detector-model file. Exactly one of the
/// two is set, matching `noise`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dem: Option<PathBuf>,
    pub noise: NoiseKind,
    #[serde(default)]
    pub p: f64,
    /// Measurement error probability; defaults to `p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Syndrome rounds. Data-qubit noise uses 1; phenomenological noise
    /// defaults to the code distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    pub decoder: DecoderKind,
    pub max_gr: usize,
    pub max_br: usize,
    #[serde(default = "default_max_tcts")]
    pub max_tcts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Shot cap; defaults to `required_shots(p)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    /// Stop once this many logical failures are seen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_failures: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a config file; relative `code` and `dem` paths are resolved
    /// against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        config.resolve_paths(path.parent().unwrap_or(Path::new("")));
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub(crate) fn resolve_paths(&mut self, base: &Path) {
        if let Some(dem) = &self.dem {
            if dem.is_relative() {
                self.dem = Some(base.join(dem));
            }
        }
        if let Some(code) = &self.code {
            if preset(code).is_none() && Path::new(code).is_relative() {
                self.code = Some(base.join(code).to_string_lossy().into_owned());
            }
        }
    }

    pub fn params(&self) -> Result<CbParams> {
        CbParams::new(self.max_gr, self.max_br, self.max_tcts)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.noise, &self.code, &self.dem) {
            (NoiseKind::CircuitFile, None, Some(_)) => {}
            (NoiseKind::CircuitFile, _, _) => {
                return Err(Error::Config("circuit-file noise needs `dem` and no `code`".into()));
            }
            (_, Some(_), None) => {}
            (kind, _, _) => return Err(Error::Config(format!("{kind} noise needs `code` and no `dem`"))),
        }
        if !(0.0..=0.75).contains(&self.p) {
            return Err(Error::InvalidProbability(self.p, "[0, 0.75]"));
        }
        if let Some(q) = self.q {
            if !(0.0..=0.5).contains(&q) {
                return Err(Error::InvalidProbability(q, "[0, 0.5]"));
            }
        }
        if self.shots == Some(0) {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.shots.is_none() && self.p <= 0.0 && self.noise != NoiseKind::CircuitFile {
            return Err(Error::Config("shots must be given when p = 0".into()));
        }
        if self.rounds == Some(0) {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        if self.noise == NoiseKind::DataQubit && self.rounds.is_some_and(|r| r != 1) {
            return Err(Error::Config("data-qubit noise has a single round".into()));
        }
        if self.max_iters == 0 && self.decoder == DecoderKind::BpCb {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        self.params()?;
        Ok(())
    }
}

fn preset(name: &str) -> Option<BbCodeSpec> {
    match name {
        "bb72" => Some(BbCodeSpec::bb72()),
        "bb108" => Some(BbCodeSpec::bb108()),
        "bb144" => Some(BbCodeSpec::bb144()),
        _ => None,
    }
}

/// Resolves a preset name or code spec path.
pub fn load_code_spec(name_or_path: &str) -> Result<BbCodeSpec> {
    match preset(name_or_path) {
        Some(spec) => Ok(spec),
        None => BbCodeSpec::load(name_or_path),
    }
}

/// `ceil(100 / target)`: shots needed to see about 100 failures.
pub fn required_shots(target_pl: f64) -> Result<u64> {
    if !(target_pl > 0.0 && target_pl <= 1.0) {
        return Err(Error::InvalidProbability(target_pl, "(0, 1]"));
    }
    Ok((100.0 / target_pl).ceil() as u64)
}

/// How logical failure is decided for one decoding problem.
#[derive(Clone, Copy, Debug)]
pub enum FailureCheck<'a> {
    /// Data-qubit noise: the residual must lie in the kernel of `checks`;
    /// it is a logical error when it overlaps some row of `logicals` oddly.
    Residual {
        checks: &'a BinaryMatrix,
        logicals: &'a BinaryMatrix,
    },
    /// Detector models: compare observable flips of actual and recovered.
    Observables(&'a BinaryMatrix),
}

pub fn logical_failure(check: FailureCheck<'_>, actual: &BitVector, recovered: &BitVector) -> Result<bool> {
    match check {
        FailureCheck::Residual { checks, logicals } => {
            let residual = actual.xor(recovered)?;
            if !checks.mat_vec_mod2(&residual)?.is_zero() {
                return Err(Error::ResidualNotInKernel);
            }
            Ok(!logicals.mat_vec_mod2(&residual)?.is_zero())
        }
        FailureCheck::Observables(obs) => Ok(obs.mat_vec_mod2(actual)? != obs.mat_vec_mod2(recovered)?),
    }
}

/// Result of decoding one syndrome.
#[derive(Clone, Debug, Default)]
pub struct DecodeOutcome {
    pub error: Vec<u8>,
    pub stats: GrowthStats,
}

/// A decoder usable by the harness. Outputs that do not reproduce the
/// syndrome count as logical failures.
pub trait SyndromeDecoder: Send + Sync {
    fn decode(&self, syndrome: &[u8]) -> DecodeOutcome;
}

/// Plain closed-branch decoding.
#[derive(Clone, Debug)]
pub struct CbDecoder {
    pub matrix: BinaryMatrix,
    pub params: CbParams,
}

impl SyndromeDecoder for CbDecoder {
    fn decode(&self, syndrome: &[u8]) -> DecodeOutcome {
        let mut engine = CbEngine::new(&self.matrix, self.params);
        let error = engine
            .decode(syndrome)
            .unwrap_or_else(|| vec![0; self.matrix.cols()]);
        DecodeOutcome {
            error,
            stats: engine.into_stats(),
        }
    }
}

impl SyndromeDecoder for BpCbDecoder {
    fn decode(&self, syndrome: &[u8]) -> DecodeOutcome {
        let out = self.decode_dense(syndrome);
        DecodeOutcome {
            error: out.error,
            stats: out.stats,
        }
    }
}

/// Builds the configured decoder for one detector model.
pub fn build_decoder(
    kind: DecoderKind,
    model: &DetectorModel,
    params: CbParams,
    max_iters: usize,
) -> Result<Box<dyn SyndromeDecoder>> {
    Ok(match kind {
        DecoderKind::Cb => Box::new(CbDecoder {
            matrix: model.noise_matrix.clone(),
            params,
        }),
        DecoderKind::BpCb => {
            let priors: Vec<f64> = model.priors.iter().map(|&p| p.max(MIN_BP_PRIOR)).collect();
            Box::new(BpCbDecoder::new(model.noise_matrix.clone(), &priors, params, max_iters)?)
        }
    })
}

enum Source {
    /// Depolarizing noise on the data qubits; X parts go to the X-error
    /// model and Z parts to the Z-error model.
    DataQubit {
        n: usize,
        x: DetectorModel,
        z: DetectorModel,
        logical_z: BinaryMatrix,
        logical_x: BinaryMatrix,
    },
    Model(DetectorModel),
}

/// A prepared experiment: sampled noise, failure rule and labels.
pub struct Experiment {
    pub label: String,
    pub noise: NoiseKind,
    pub p: f64,
    pub rounds: usize,
    source: Source,
}

impl Experiment {
    pub fn data_qubit(label: impl Into<String>, code: &CssCode, p: f64) -> Result<Self> {
        let (x, z) = data_qubit_model(code, p)?;
        Ok(Experiment {
            label: label.into(),
            noise: NoiseKind::DataQubit,
            p,
            rounds: 1,
            source: Source::DataQubit {
                n: code.n,
                logical_z: CssCode::logical_matrix(&code.logical_z, code.n),
                logical_x: CssCode::logical_matrix(&code.logical_x, code.n),
                x,
                z,
            },
        })
    }

    pub fn detector_model(label: impl Into<String>, noise: NoiseKind, model: DetectorModel, p: f64, rounds: usize) -> Self {
        Experiment {
            label: label.into(),
            noise,
            p,
            rounds,
            source: Source::Model(model),
        }
    }

    pub fn from_config(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        match config.noise {
            NoiseKind::CircuitFile => {
                let path = config.dem.as_ref().expect("validated");
                let model = load_detector_model(path)?;
                let label = path
                    .file_stem()
                    .map_or_else(|| "dem".to_string(), |s| s.to_string_lossy().into_owned());
                Ok(Self::detector_model(label, NoiseKind::CircuitFile, model, config.p, config.rounds.unwrap_or(1)))
            }
            kind => {
                let name = config.code.as_deref().expect("validated");
                let spec = load_code_spec(name)?;
                let label = spec.name.clone().unwrap_or_else(|| name.to_string());
                let code = build_bb_code(&spec)?;
                if kind == NoiseKind::DataQubit {
                    return Self::data_qubit(label, &code, config.p);
                }
                let rounds = match config.rounds.or(code.distance) {
                    Some(r) => r,
                    None => {
                        return Err(Error::Config(
                            "phenomenological noise needs `rounds` when the code distance is unknown".into(),
                        ))
                    }
                };
                let model = phenomenological_model(&code, config.p, config.q.unwrap_or(config.p), rounds)?;
                Ok(Self::detector_model(label, kind, model, config.p, rounds))
            }
        }
    }

    /// Detector models decoded per shot, in order.
    pub fn models(&self) -> Vec<&DetectorModel> {
        match &self.source {
            Source::DataQubit { x, z, .. } => vec![x, z],
            Source::Model(m) => vec![m],
        }
    }

    pub fn build_decoders(&self, kind: DecoderKind, params: CbParams, max_iters: usize) -> Result<Vec<Box<dyn SyndromeDecoder>>> {
        self.models()
            .into_iter()
            .map(|m| build_decoder(kind, m, params, max_iters))
            .collect()
    }

    fn failure_checks(&self) -> Vec<FailureCheck<'_>> {
        match &self.source {
            Source::DataQubit {
                x,
                z,
                logical_z,
                logical_x,
                ..
            } => vec![
                FailureCheck::Residual {
                    checks: &x.noise_matrix,
                    logicals: logical_z,
                },
                FailureCheck::Residual {
                    checks: &z.noise_matrix,
                    logicals: logical_x,
                },
            ],
            Source::Model(m) => vec![FailureCheck::Observables(&m.observables)],
        }
    }

    /// Fired mechanisms of every decoding problem in one shot.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
        match &self.source {
            Source::DataQubit { n, .. } => {
                let e = sample_depolarizing(*n, self.p, rng).expect("probability validated");
                vec![e.x_part.to_dense(), e.z_part.to_dense()]
            }
            Source::Model(m) => vec![m.sample_mechanisms(rng)],
        }
    }
}

fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Summary of per-shot decode times in microseconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DecodeTimeStats {
    pub mean_us: f64,
    pub p50_us: f64,
    pub p90_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

impl DecodeTimeStats {
    pub fn from_samples(samples: &mut [f64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        samples.sort_by(f64::total_cmp);
        let pct = |q: f64| samples[((samples.len() - 1) as f64 * q).round() as usize];
        DecodeTimeStats {
            mean_us: samples.iter().sum::<f64>() / samples.len() as f64,
            p50_us: pct(0.5),
            p90_us: pct(0.9),
            p99_us: pct(0.99),
            max_us: samples[samples.len() - 1],
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub code: String,
    pub noise: NoiseKind,
    pub p: f64,
    pub rounds: usize,
    pub params: CbParams,
    pub decoder: String,
    pub shots: u64,
    pub failures: u64,
    /// Shots where some decoder output did not reproduce its syndrome.
    pub declared_failures: u64,
    pub pl_total: f64,
    pub pl_per_cycle: f64,
    pub wall_time: Duration,
    pub decode_time: DecodeTimeStats,
    pub growth: GrowthStats,
}

/// Shot-count controls of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunLimits {
    pub max_shots: u64,
    pub target_failures: Option<u64>,
    pub seed: u64,
}

struct ShotRecord {
    failed: bool,
    declared: bool,
    micros: f64,
    stats: GrowthStats,
}

fn run_shot(exp: &Experiment, decoders: &[Box<dyn SyndromeDecoder>], checks: &[FailureCheck<'_>], seed: u64, shot: u64) -> Result<ShotRecord> {
    let mut rng = shot_rng(seed, shot);
    let actual = exp.sample(&mut rng);
    let models = exp.models();
    let mut record = ShotRecord {
        failed: false,
        declared: false,
        micros: 0.0,
        stats: GrowthStats::default(),
    };
    for (k, mechanisms) in actual.iter().enumerate() {
        let matrix = &models[k].noise_matrix;
        let syndrome = matrix.mat_vec_dense(mechanisms);
        let start = Instant::now();
        let out = decoders[k].decode(&syndrome);
        record.micros += start.elapsed().as_secs_f64() * 1e6;
        record.stats.merge(&out.stats);
        if out.error.len() != matrix.cols() || matrix.mat_vec_dense(&out.error) != syndrome {
            record.declared = true;
            record.failed = true;
            continue;
        }
        let actual = BitVector::from_dense(mechanisms);
        let recovered = BitVector::from_dense(&out.error);
        if logical_failure(checks[k], &actual, &recovered)? {
            record.failed = true;
        }
    }
    Ok(record)
}

/// Runs shots `0..` until `max_shots` or the failure target is reached.
pub fn run_with_decoders(
    exp: &Experiment,
    decoders: &[Box<dyn SyndromeDecoder>],
    decoder_label: &str,
    params: CbParams,
    limits: RunLimits,
) -> Result<ExperimentResult> {
    if decoders.len() != exp.models().len() {
        return Err(Error::InvalidParameter(format!(
            "experiment needs {} decoders, got {}",
            exp.models().len(),
            decoders.len()
        )));
    }
    if limits.max_shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let checks = exp.failure_checks();
    let started = Instant::now();
    let batch = CHUNK * rayon::current_num_threads() as u64;
    let mut shots = 0u64;
    let mut failures = 0u64;
    let mut declared = 0u64;
    let mut times = Vec::new();
    let mut growth = GrowthStats::default();

    'outer: while shots < limits.max_shots {
        let end = (shots + batch).min(limits.max_shots);
        let starts: Vec<u64> = (shots..end).step_by(CHUNK as usize).collect();
        let records: Vec<Vec<Result<ShotRecord>>> = starts
            .par_iter()
            .map(|&lo| {
                (lo..(lo + CHUNK).min(end))
                    .map(|s| run_shot(exp, decoders, &checks, limits.seed, s))
                    .collect()
            })
            .collect();
        for record in records.into_iter().flatten() {
            let record = record?;
            shots += 1;
            failures += u64::from(record.failed);
            declared += u64::from(record.declared);
            times.push(record.micros);
            growth.merge(&record.stats);
            if limits.target_failures.is_some_and(|t| failures >= t) {
                break 'outer;
            }
        }
    }

    let pl_total = failures as f64 / shots as f64;
    Ok(ExperimentResult {
        code: exp.label.clone(),
        noise: exp.noise,
        p: exp.p,
        rounds: exp.rounds,
        params,
        decoder: decoder_label.to_string(),
        shots,
        failures,
        declared_failures: declared,
        pl_total,
        pl_per_cycle: pl_total / exp.rounds as f64,
        wall_time: started.elapsed(),
        decode_time: DecodeTimeStats::from_samples(&mut times),
        growth,
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let exp = Experiment::from_config(config)?;
    let params = config.params()?;
    let decoders = exp.build_decoders(config.decoder, params, config.max_iters)?;
    let max_shots = match config.shots {
        Some(s) => s,
        None => required_shots(config.p)?,
    };
    let limits = RunLimits {
        max_shots,
        target_failures: config.target_failures,
        seed: config.seed,
    };
    run_with_decoders(&exp, &decoders, &config.decoder.to_string(), params, limits)
}

/// One CSV row of results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub code: String,
    pub noise: String,
    pub p: f64,
    pub rounds: usize,
    pub max_gr: usize,
    pub max_br: usize,
    pub max_tcts: usize,
    pub decoder: String,
    pub shots: u64,
    pub failures: u64,
    #[serde(rename = "PL_total")]
    pub pl_total: f64,
    #[serde(rename = "PL_per_cycle")]
    pub pl_per_cycle: f64,
    pub mean_decode_us: f64,
}

impl From<&ExperimentResult> for CsvRow {
    fn from(r: &ExperimentResult) -> Self {
        CsvRow {
            code: r.code.clone(),
            noise: r.noise.to_string(),
            p: r.p,
            rounds: r.rounds,
            max_gr: r.params.max_gr,
            max_br: r.params.max_br,
            max_tcts: r.params.max_tcts,
            decoder: r.decoder.clone(),
            shots: r.shots,
            failures: r.failures,
            pl_total: r.pl_total,
            pl_per_cycle: r.pl_per_cycle,
            mean_decode_us: r.decode_time.mean_us,
        }
    }
}

/// Appends rows, writing the header first when the file is new or empty.
pub fn append_csv(path: impl AsRef<Path>, rows: &[CsvRow]) -> Result<()> {
    let path = path.as_ref();
    let needs_header = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new().has_headers(needs_header).from_writer(file);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Physical error rate where the curve `(p, P_L)` crosses `P_L = p`,
/// interpolating linearly in log-log coordinates between the first pair of
/// neighbouring points that straddle the diagonal. Points with `P_L = 0`
/// are skipped.
pub fn pseudothreshold(points: &[(f64, f64)]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(p, pl)| p > 0.0 && pl > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pts.windows(2) {
        let (p0, l0) = (w[0].0.ln(), w[0].1.ln());
        let (p1, l1) = (w[1].0.ln(), w[1].1.ln());
        let (a0, a1) = (l0 - p0, l1 - p1);
        if a0 == 0.0 {
            return Some(w[0].0);
        }
        if a0.signum() != a1.signum() {
            let t = a0 / (a0 - a1);
            return Some((p0 + t * (p1 - p0)).exp());
        }
    }
    match pts.last() {
        Some(&(p, pl)) if pl == p => Some(p),
        _ => None,
    }
}

/// A sweep over physical error rates for several base experiments.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub probabilities: Vec<f64>,
    /// CSV file receiving one row per `(run, p)`.
    pub output: PathBuf,
    /// Base experiments; their `p` is replaced by each sweep probability.
    #[serde(rename = "run")]
    pub runs: Vec<ExperimentConfig>,
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Loads a sweep file; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if spec.output.is_relative() {
            spec.output = base.join(&spec.output);
        }
        for run in &mut spec.runs {
            run.resolve_paths(base);
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.probabilities.is_empty() {
            return Err(Error::Config("probability list is empty".into()));
        }
        if self.runs.is_empty() {
            return Err(Error::Config("sweep has no [[run]] entries".into()));
        }
        for &p in &self.probabilities {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidProbability(p, "(0, 1)"));
            }
        }
        if self.probabilities.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("probabilities must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Config of run `run` at probability `p`.
    pub fn point(&self, run: usize, p: f64) -> ExperimentConfig {
        ExperimentConfig {
            p,
            ..self.runs[run].clone()
        }
    }

    /// Two-column series file for one run, next to the CSV output.
    pub fn series_path(&self, label: &str) -> PathBuf {
        let stem = self
            .output
            .file_stem()
            .map_or_else(|| "sweep".to_string(), |s| s.to_string_lossy().into_owned());
        self.output.with_file_name(format!("{stem}_{label}.dat"))
    }
}

/// Writes `p P_L` pairs (per-cycle rates) one per line.
pub fn write_series(path: impl AsRef<Path>, points: &[(f64, f64)]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from("# p PL_per_cycle\n");
    for (p, pl) in points {
        text.push_str(&format!("{p} {pl}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn required_shots_examples() {
        assert_eq!(required_shots(0.01).unwrap(), 10_000);
        assert_eq!(required_shots(1.0).unwrap(), 100);
        assert_eq!(required_shots(0.5).unwrap(), 200);
        assert!(required_shots(0.0).is_err());
        assert!(required_shots(-0.1).is_err());
        assert!(required_shots(1.5).is_err());
    }

    #[test]
    fn pseudothreshold_interpolates_in_log_log() {
        // P_L = 10 p^2 crosses p at 0.1; log-log linear, so exact.
        let pts: Vec<(f64, f64)> = [0.05, 0.08, 0.12, 0.2].iter().map(|&p| (p, 10.0 * p * p)).collect();
        let x = pseudothreshold(&pts).unwrap();
        assert!((x - 0.1).abs() < 1e-12, "{x}");
        assert!(pseudothreshold(&[(0.1, 0.01), (0.2, 0.02)]).is_none());
        assert!(pseudothreshold(&[]).is_none());
        assert_eq!(pseudothreshold(&[(0.1, 0.0), (0.2, 0.2)]), Some(0.2));
    }

    #[test]
    fn decode_time_percentiles() {
        let mut s: Vec<f64> = (1..=100).map(f64::from).collect();
        let st = DecodeTimeStats::from_samples(&mut s);
        assert_eq!(st.mean_us, 50.5);
        assert_eq!(st.max_us, 100.0);
        assert_eq!(st.p50_us, 51.0);
        assert_eq!(DecodeTimeStats::from_samples(&mut []), DecodeTimeStats::default());
    }

    #[test]
    fn config_round_trip_and_validation() {
        let text = r#"
code = "bb72"
noise = "data-qubit"
p = 0.05
decoder = "bp+cb"
max_gr = 6
max_br = 10
shots = 1000
seed = 7
"#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        c.validate().unwrap();
        assert_eq!(c.max_tcts, 3);
        assert_eq!(c.max_iters, DEFAULT_MAX_ITERS);
        assert_eq!(ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);

        let mut bad = c.clone();
        bad.dem = Some("x.dem".into());
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.shots = Some(0);
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.rounds = Some(3);
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.noise = NoiseKind::CircuitFile;
        assert!(bad.validate().is_err());
        assert!(ExperimentConfig::from_toml_str("noise = \"data-qubit\"\nbogus = 1").is_err());
    }

    #[test]
    fn sweep_spec_validation() {
        let base = r#"
output = "out.csv"
[[run]]
code = "bb72"
noise = "data-qubit"
decoder = "cb"
max_gr = 4
max_br = 4
shots = 10
"#;
        let ok = format!("probabilities = [0.01, 0.02]\n{base}");
        let spec = SweepSpec::from_toml_str(&ok).unwrap();
        assert_eq!(spec.point(0, 0.02).p, 0.02);
        assert_eq!(spec.series_path("bb72"), PathBuf::from("out_bb72.dat"));
        assert!(SweepSpec::from_toml_str(&format!("probabilities = []\n{base}")).is_err());
        assert!(SweepSpec::from_toml_str(&format!("probabilities = [0.02, 0.01]\n{base}")).is_err());
        assert!(SweepSpec::from_toml_str(&format!("probabilities = [0.0, 0.01]\n{base}")).is_err());
    }
}
