use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use cbdecode::bb::build_bb_code;
use cbdecode::gf2::{write_sparse_matrix, BinaryMatrix};
use cbdecode::noise::{data_qubit_model, load_detector_model, phenomenological_model, save_detector_model, DetectorModel};
use cbdecode::sim::{
    append_csv, load_code_spec, pseudothreshold, run_experiment, write_series, CsvRow, ExperimentConfig, ExperimentResult,
    SweepSpec,
};
use cbdecode::Error;

const EXIT_PARTIAL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "cbdecode", version, about = "Closed-branch decoding experiments for quantum LDPC codes")]
struct Cli {
    /// Worker threads for shot-level parallelism; 1 is the reference.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a BB code and write hx/hz in sparse text format.
    BuildCode {
        /// Code spec file, or a preset: bb72, bb108, bb144.
        spec: String,
        /// Directory receiving hx.txt and hz.txt.
        #[arg(short, long)]
        out_dir: Option<PathBuf>,
    },
    /// Write the detector model of a noise model on a BB code.
    BuildNoise {
        /// Code spec file or preset.
        #[arg(long)]
        code: String,
        #[arg(long, value_enum)]
        noise: NoiseArg,
        #[arg(long)]
        p: f64,
        /// Measurement error probability (defaults to p).
        #[arg(long)]
        q: Option<f64>,
        /// Rounds for phenomenological noise (defaults to the code distance).
        #[arg(long)]
        rounds: Option<usize>,
        /// Error type for data-qubit noise.
        #[arg(long, value_enum, default_value = "x")]
        basis: Basis,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run one experiment and append its CSV row.
    Run {
        config: PathBuf,
        /// CSV file receiving the result row.
        #[arg(long, default_value = "results.csv")]
        csv: PathBuf,
        /// Overrides the config seed.
        #[arg(long, env = "CBDECODE_SEED")]
        seed: Option<u64>,
        /// Overrides the config shot cap.
        #[arg(long)]
        shots: Option<u64>,
        /// Overrides the config failure target.
        #[arg(long)]
        target_failures: Option<u64>,
    },
    /// Run every configured experiment at every probability of a sweep.
    Sweep {
        spec: PathBuf,
        /// Overrides the seed of every run.
        #[arg(long, env = "CBDECODE_SEED")]
        seed: Option<u64>,
    },
    /// Summarize a detector-model file.
    DemInfo { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    DataQubit,
    Phenomenological,
}

#[derive(Clone, Copy, ValueEnum)]
enum Basis {
    X,
    Z,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::ResidualNotInKernel) | Some(Error::NotInSpan) => EXIT_PARTIAL,
        _ => EXIT_USAGE,
    }
}

fn weight_range(counts: impl Iterator<Item = usize>) -> String {
    let (lo, hi) = counts.fold((usize::MAX, 0), |(lo, hi), w| (lo.min(w), hi.max(w)));
    if lo == hi {
        lo.to_string()
    } else if lo > hi {
        "-".to_string()
    } else {
        format!("{lo}..{hi}")
    }
}

fn describe_matrix(name: &str, m: &BinaryMatrix) -> String {
    format!(
        "{name}: {}x{} row weight {} column weight {}",
        m.rows(),
        m.cols(),
        weight_range((0..m.rows()).map(|r| m.row(r).len())),
        weight_range((0..m.cols()).map(|c| m.col(c).len()))
    )
}

fn write_matrix(path: &Path, m: &BinaryMatrix) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_sparse_matrix(m, BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

fn build_code(spec: &str, out_dir: Option<&Path>) -> anyhow::Result<()> {
    let spec = load_code_spec(spec)?;
    let code = build_bb_code(&spec)?;
    let mut line = format!("n={} k={}", code.n, code.k);
    if let Some(d) = code.distance {
        line.push_str(&format!(" d={d}"));
    }
    println!("{line}");
    println!("{}", describe_matrix("hx", &code.hx));
    println!("{}", describe_matrix("hz", &code.hz));
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_matrix(&dir.join("hx.txt"), &code.hx)?;
        write_matrix(&dir.join("hz.txt"), &code.hz)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn build_noise(
    code: &str,
    noise: NoiseArg,
    p: f64,
    q: Option<f64>,
    rounds: Option<usize>,
    basis: Basis,
    out: &Path,
) -> anyhow::Result<()> {
    let spec = load_code_spec(code)?;
    let code = build_bb_code(&spec)?;
    let model = match noise {
        NoiseArg::DataQubit => {
            let (x, z) = data_qubit_model(&code, p)?;
            match basis {
                Basis::X => x,
                Basis::Z => z,
            }
        }
        NoiseArg::Phenomenological => {
            let Some(rounds) = rounds.or(code.distance) else {
                bail!("--rounds is required when the code distance is unknown");
            };
            phenomenological_model(&code, p, q.unwrap_or(p), rounds)?
        }
    };
    save_detector_model(&model, out)?;
    print_model_summary(&model);
    Ok(())
}

fn print_model_summary(model: &DetectorModel) {
    let m = &model.noise_matrix;
    println!(
        "detectors={} mechanisms={} observables={}",
        model.num_detectors(),
        model.num_mechanisms(),
        model.num_observables()
    );
    println!("{}", describe_matrix("noise matrix", m));
    let (lo, hi) = model
        .priors
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    if model.num_mechanisms() > 0 {
        println!("priors in [{lo}, {hi}]");
    }
}

fn summary(r: &ExperimentResult) -> String {
    format!(
        "code={} noise={} p={} rounds={} decoder={} shots={} failures={} declared={} PL_total={:.6e} PL_per_cycle={:.6e} mean_decode_us={:.2} p99_decode_us={:.2}",
        r.code,
        r.noise,
        r.p,
        r.rounds,
        r.decoder,
        r.shots,
        r.failures,
        r.declared_failures,
        r.pl_total,
        r.pl_per_cycle,
        r.decode_time.mean_us,
        r.decode_time.p99_us
    )
}

fn run(
    config: &Path,
    csv: &Path,
    seed: Option<u64>,
    shots: Option<u64>,
    target_failures: Option<u64>,
) -> anyhow::Result<()> {
    let mut config = ExperimentConfig::load(config)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if shots.is_some() {
        config.shots = shots;
    }
    if target_failures.is_some() {
        config.target_failures = target_failures;
    }
    let result = run_experiment(&config)?;
    append_csv(csv, &[CsvRow::from(&result)])?;
    println!("{}", summary(&result));
    Ok(())
}

/// Returns whether every point succeeded.
fn sweep(spec_path: &Path, seed: Option<u64>) -> anyhow::Result<bool> {
    let spec = SweepSpec::load(spec_path)?;
    let mut all_ok = true;
    for run in 0..spec.runs.len() {
        let mut label = None;
        let mut points = Vec::new();
        for &p in &spec.probabilities {
            let mut config = spec.point(run, p);
            if let Some(seed) = seed {
                config.seed = seed;
            }
            match run_experiment(&config) {
                Ok(result) => {
                    append_csv(&spec.output, &[CsvRow::from(&result)])?;
                    println!("{}", summary(&result));
                    points.push((p, result.pl_per_cycle));
                    label = Some(result.code.clone());
                }
                Err(e) => {
                    eprintln!("error: run {run} at p={p}: {e}");
                    all_ok = false;
                }
            }
        }
        let Some(label) = label else { continue };
        let label = format!("{label}_{run}");
        write_series(spec.series_path(&label), &points)?;
        match pseudothreshold(&points) {
            Some(x) => println!("pseudothreshold {label}: {x:.5}"),
            None => println!("pseudothreshold {label}: none in range"),
        }
    }
    Ok(all_ok)
}

fn dem_info(path: &Path) -> anyhow::Result<()> {
    let model = load_detector_model(path)?;
    print_model_summary(&model);
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::BuildCode { spec, out_dir } => build_code(&spec, out_dir.as_deref()).map(|_| true),
        Command::BuildNoise {
            code,
            noise,
            p,
            q,
            rounds,
            basis,
            out,
        } => build_noise(&code, noise, p, q, rounds, basis, &out).map(|_| true),
        Command::Run {
            config,
            csv,
            seed,
            shots,
            target_failures,
        } => run(&config, &csv, seed, shots, target_failures).map(|_| true),
        Command::Sweep { spec, seed } => sweep(&spec, seed),
        Command::DemInfo { path } => dem_info(&path).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARTIAL);
        }
    };
    match pool.install(|| dispatch(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_PARTIAL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
