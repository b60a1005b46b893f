use cbdecode::bb::{build_bb_code, BbCodeSpec, CssCode};
use cbdecode::bp::{bp_cb_decode, BpCbDecoder};
use cbdecode::cb::CbParams;
use cbdecode::gf2::BitVector;
use cbdecode::noise::{data_qubit_model, sample_shot};
use cbdecode::sim::{
    append_csv, logical_failure, read_csv, run_experiment, run_with_decoders, CsvRow, DecodeOutcome, DecoderKind,
    Experiment, ExperimentConfig, FailureCheck, NoiseKind, RunLimits, SyndromeDecoder,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bb72() -> CssCode {
    build_bb_code(&BbCodeSpec::bb72()).unwrap()
}

fn config(p: f64, decoder: DecoderKind, shots: u64) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(&format!(
        "code = \"bb72\"\nnoise = \"data-qubit\"\np = {p}\ndecoder = \"{decoder}\"\nmax_gr = 6\nmax_br = 10\nshots = {shots}\nseed = 17\n"
    ))
    .unwrap()
}

struct Identity(usize);

impl SyndromeDecoder for Identity {
    fn decode(&self, _syndrome: &[u8]) -> DecodeOutcome {
        DecodeOutcome {
            error: vec![0; self.0],
            ..Default::default()
        }
    }
}

#[test]
fn logical_failure_examples() {
    let code = bb72();
    let lz = CssCode::logical_matrix(&code.logical_z, code.n);
    let check = FailureCheck::Residual {
        checks: &code.hz,
        logicals: &lz,
    };
    let e = BitVector::from_indices(code.n, [3, 40]).unwrap();
    assert!(!logical_failure(check, &e, &e).unwrap());
    // X-type stabilizers act trivially on X residuals.
    let stab = e.xor(&code.hx.row_vector(5)).unwrap();
    assert!(!logical_failure(check, &e, &stab).unwrap());
    let logical = e.xor(&code.logical_x[0]).unwrap();
    assert!(logical_failure(check, &e, &logical).unwrap());
    let wrong = BitVector::from_indices(code.n, [3]).unwrap();
    assert!(logical_failure(check, &e, &wrong).is_err());

    let obs = CssCode::logical_matrix(&code.logical_z, code.n);
    assert!(logical_failure(FailureCheck::Observables(&obs), &e, &logical).unwrap());
    assert!(!logical_failure(FailureCheck::Observables(&obs), &e, &stab).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn failure_is_invariant_under_stabilizers(row in 0usize..36, seed in any::<u64>()) {
        let code = bb72();
        let (xm, _) = data_qubit_model(&code, 0.05).unwrap();
        let lz = CssCode::logical_matrix(&code.logical_z, code.n);
        let check = FailureCheck::Residual { checks: &code.hz, logicals: &lz };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let actual = sample_shot(&xm, &mut rng).mechanisms;
        let recovered = BitVector::from_indices(code.n, [row, row + 36]).unwrap();
        let recovered = actual.xor(&recovered).unwrap();
        if code.hz.mat_vec_mod2(&recovered.xor(&actual).unwrap()).unwrap().is_zero() {
            let shifted = recovered.xor(&code.hx.row_vector(row)).unwrap();
            prop_assert_eq!(
                logical_failure(check, &actual, &recovered).unwrap(),
                logical_failure(check, &actual, &shifted).unwrap()
            );
        }
    }
}

#[test]
fn zero_noise_never_fails() {
    for decoder in [DecoderKind::Cb, DecoderKind::BpCb] {
        let r = run_experiment(&config(0.0, decoder, 200)).unwrap();
        assert_eq!((r.shots, r.failures), (200, 0));
        assert_eq!(r.pl_total, 0.0);
    }
}

#[test]
fn identity_decoder_fails_most_shots() {
    let code = bb72();
    let exp = Experiment::data_qubit("bb72", &code, 0.3).unwrap();
    let decoders: Vec<Box<dyn SyndromeDecoder>> = vec![Box::new(Identity(72)), Box::new(Identity(72))];
    let params = CbParams::new(1, 1, 1).unwrap();
    let limits = RunLimits {
        max_shots: 300,
        target_failures: None,
        seed: 1,
    };
    let r = run_with_decoders(&exp, &decoders, "identity", params, limits).unwrap();
    // Nonzero syndromes are almost certain at p = 0.3 and count as failures.
    assert!(r.pl_total > 0.99, "{}", r.pl_total);
    assert_eq!(r.failures, r.declared_failures);
}

#[test]
fn runs_are_reproducible_and_thread_independent() {
    let c = config(0.05, DecoderKind::BpCb, 700);
    let a = run_experiment(&c).unwrap();
    let b = run_experiment(&c).unwrap();
    assert_eq!((a.shots, a.failures), (b.shots, b.failures));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let threaded = pool.install(|| run_experiment(&c)).unwrap();
    assert_eq!((a.shots, a.failures), (threaded.shots, threaded.failures));
}

#[test]
fn failure_target_stops_early() {
    let mut c = config(0.08, DecoderKind::BpCb, 100_000);
    c.target_failures = Some(20);
    let r = run_experiment(&c).unwrap();
    assert_eq!(r.failures, 20);
    assert!(r.shots < 100_000);
    // Same run without early stop reaches the same count at the same shot.
    let mut capped = c.clone();
    capped.target_failures = None;
    capped.shots = Some(r.shots);
    assert_eq!(run_experiment(&capped).unwrap().failures, 20);
}

#[test]
fn phenomenological_per_cycle_normalization() {
    let text = "code = \"bb72\"\nnoise = \"phenomenological\"\np = 0.02\nrounds = 3\ndecoder = \"bp+cb\"\nmax_gr = 6\nmax_br = 36\nshots = 300\nseed = 2\n";
    let r = run_experiment(&ExperimentConfig::from_toml_str(text).unwrap()).unwrap();
    assert_eq!(r.rounds, 3);
    assert!((r.pl_per_cycle * 3.0 - r.pl_total).abs() < 1e-15);
    assert_eq!(r.pl_total, r.failures as f64 / r.shots as f64);
}

#[test]
fn larger_budgets_do_not_hurt_statistically() {
    let mut small = config(0.06, DecoderKind::Cb, 1500);
    small.max_gr = 3;
    small.max_br = 2;
    let mut large = small.clone();
    large.max_gr = 6;
    large.max_br = 10;
    let a = run_experiment(&small).unwrap();
    let b = run_experiment(&large).unwrap();
    // Paired seeds; allow two binomial standard deviations of slack.
    let sd = (a.pl_total * (1.0 - a.pl_total) / 1500.0).sqrt();
    assert!(b.pl_total <= a.pl_total + 2.0 * sd, "{} vs {}", b.pl_total, a.pl_total);
}

#[test]
fn bp_cb_outputs_match_syndromes_on_bb72() {
    let code = bb72();
    let (xm, _) = data_qubit_model(&code, 0.05).unwrap();
    let params = CbParams::new(6, 10, 3).unwrap();
    let decoder = BpCbDecoder::from_model(&xm, params, 30).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut matched = 0;
    for _ in 0..1000 {
        let shot = sample_shot(&xm, &mut rng);
        let out = BitVector::from_dense(&decoder.decode_dense(&shot.syndrome.to_dense()).error);
        let s = code.hz.mat_vec_mod2(&out).unwrap();
        if s == shot.syndrome {
            matched += 1;
        } else {
            assert!(out.is_zero());
        }
    }
    assert!(matched >= 990, "{matched}");
    let zero = bp_cb_decode(&BitVector::zeros(36), params, &xm, 30).unwrap();
    assert!(zero.is_zero());
}

#[test]
fn csv_appends_with_a_single_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let r = run_experiment(&config(0.0, DecoderKind::Cb, 10)).unwrap();
    append_csv(&path, &[CsvRow::from(&r)]).unwrap();
    append_csv(&path, &[CsvRow::from(&r)]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "code,noise,p,rounds,max_gr,max_br,max_tcts,decoder,shots,failures,PL_total,PL_per_cycle,mean_decode_us"
    );
    assert_eq!(text.lines().count(), 3);
    let rows = read_csv(&path).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].code, "bb72");
    assert_eq!(rows[0].noise, NoiseKind::DataQubit.to_string());
}
