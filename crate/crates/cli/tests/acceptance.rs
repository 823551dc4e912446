//! Acceptance suite: one test per release criterion, each printing a PASS
//! line with the measured values. Run with
//! `cargo test -p qremlab-cli --test acceptance -- --nocapture`.

use std::io::Write as _;

use qremlab::densesim::{run_circuit, run_noisy};
use qremlab::mitigation::{biu_unfold, learn_noise_map, make_nonzero, sample_clifford_frame, NoiseMap};
use qremlab::model::{build_circuit, Activation, ModelSpec, UploadingParams};
use qremlab::noise::{
    nibp_bound, ChannelPlacement, NoiseModel, PauliNoiseParams, RandomWalkConfig, ReadoutParams,
    ResponseMatrix,
};
use qremlab::rng::RngFactory;
use qremlab::stabsim::{pauli_expectation, PauliString};
use qremlab::targets::{gen_multidim_cos, gen_pdf_proxy, Sampling, TargetKind, TargetSpec};
use qremlab::training::{
    loss_gradient, mse_loss, train, Dataset, Mode, TrainingConfig,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pass(criterion: u32, label: &str, detail: String) {
    println!("[acceptance] criterion {criterion} ({label}): PASS  {detail}");
}

fn paper_static_noise() -> NoiseModel {
    NoiseModel::new(
        PauliNoiseParams::new(0.007, 0.003, 0.002).unwrap(),
        ReadoutParams::symmetric(0.005).unwrap(),
        ChannelPlacement::EveryLayer,
    )
    .unwrap()
}

fn pdf_dataset(n_data: usize) -> Dataset {
    gen_pdf_proxy(&TargetSpec {
        kind: TargetKind::PdfProxy,
        n_dim: 1,
        n_data,
        sampling: Sampling::Logarithmic,
        beta: None,
        csv_path: None,
    })
    .unwrap()
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

#[test]
fn criterion_01_stabilizer_dense_oracle_equivalence() {
    // >= 500 random Clifford-frame circuits with n <= 5: the tableau value in
    // {-1, 0, +1} matches the dense expectation within 1e-9.
    let mut checked = 0usize;
    let observable_cache: Vec<PauliString> = (0..=5).map(PauliString::all_z).collect();
    for n in 1..=5usize {
        let spec = ModelSpec::new(n, 2, Activation::Identity).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
        for _ in 0..110 {
            let frame = sample_clifford_frame(&spec, &mut rng).unwrap();
            let stab = pauli_expectation(&frame, &observable_cache[n]).unwrap();
            let mut dense_rng = ChaCha8Rng::seed_from_u64(0);
            let dense = run_circuit(frame.circuit(), None, &mut dense_rng).unwrap();
            assert!(
                (dense - stab as f64).abs() < 1e-9,
                "n={n}: stab {stab} vs dense {dense}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 500);
    pass(1, "stabilizer vs dense oracle", format!("{checked} circuits bitwise consistent"));
}

#[test]
fn criterion_02_psr_matches_finite_differences() {
    // Noiseless PSR loss gradient vs central finite differences (h = 1e-5)
    // over 50 random parameter points of the 1-qubit 4-layer model.
    let spec = ModelSpec::new(1, 4, Activation::Identity).unwrap();
    let dataset = pdf_dataset(4);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let exact_loss = |p: &[f64]| -> f64 {
        let uploading = UploadingParams::from_flat(p.to_vec(), &spec).unwrap();
        let mut preds = Vec::new();
        for x in &dataset.inputs {
            let c = build_circuit(x, &uploading, &spec).unwrap();
            let mut r = ChaCha8Rng::seed_from_u64(0);
            preds.push(run_circuit(&c, None, &mut r).unwrap());
        }
        mse_loss(&preds, &dataset.targets).unwrap()
    };

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let params: Vec<f64> = (0..spec.param_count())
            .map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI))
            .collect();
        let mut evaluate = |angles: &[f64], _idx: u64| {
            let c = qremlab::model::build_with_angles(&spec, angles).unwrap();
            let mut r = ChaCha8Rng::seed_from_u64(0);
            run_circuit(&c, None, &mut r)
        };
        let psr = loss_gradient(&params, &dataset, &spec, None, &mut evaluate).unwrap();
        let h = 1e-5;
        for p in 0..params.len() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus[p] += h;
            minus[p] -= h;
            let fd = (exact_loss(&plus) - exact_loss(&minus)) / (2.0 * h);
            worst = worst.max((psr.gradient[p] - fd).abs());
        }
    }
    assert!(worst < 1e-6, "max PSR/FD deviation {worst}");
    pass(2, "parameter-shift gradients", format!("max |psr - fd| = {worst:.2e} < 1e-6"));
}

#[test]
fn criterion_03_exact_depolarizing_inversion() {
    let spec = ModelSpec::new(1, 4, Activation::Identity).unwrap();
    let observable = PauliString::all_z(1);
    let lambda = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut executor = |c: &qremlab::CliffordCircuit| -> qremlab::Result<f64> {
        Ok((1.0 - lambda) * pauli_expectation(c, &observable)? as f64)
    };
    let (map, _) = learn_noise_map(&spec, 20, &mut executor, 0, &mut rng).unwrap();
    assert!((map.lambda_eff - 0.2).abs() <= 1e-12, "lambda_eff = {}", map.lambda_eff);
    let mitigated = map.mitigate(0.8).unwrap();
    assert!((mitigated - 1.0).abs() <= 1e-12, "mitigate(0.8) = {mitigated}");
    pass(
        3,
        "depolarizing inversion",
        format!("lambda_eff = {:.15}, mitigate(0.8) = {mitigated:.15}", map.lambda_eff),
    );
}

#[test]
fn criterion_04_lambda_eff_recovery_under_static_noise() {
    // Static noise (p = (0.007, 0.003, 0.002), p_flip = 0.005), 1 qubit,
    // 4 layers, 10000 shots, m = 20: lambda_eff in [0.06, 0.12].
    let spec = ModelSpec::new(1, 4, Activation::Identity).unwrap();
    let noise = paper_static_noise();
    let mut lambdas = Vec::new();
    for seed in 0..3u64 {
        let factory = RngFactory::new(seed);
        let mut clifford_rng = factory.stream("clifford");
        let mut counter = 0u64;
        let mut executor = |c: &qremlab::CliffordCircuit| {
            let mut rng = factory.indexed_stream("shots", 0, counter);
            counter += 1;
            run_noisy(c.circuit(), &noise, Some(10_000), &mut rng)
        };
        let (map, set) = learn_noise_map(&spec, 20, &mut executor, 0, &mut clifford_rng).unwrap();
        assert!(set.ideal_values.iter().all(|v| v.abs() == 1.0));
        assert!(
            (0.06..=0.12).contains(&map.lambda_eff),
            "seed {seed}: lambda_eff = {}",
            map.lambda_eff
        );
        lambdas.push(map.lambda_eff);
    }
    pass(4, "lambda_eff recovery", format!("lambda_eff = {lambdas:.3?} in [0.06, 0.12]"));
}

#[test]
fn criterion_05_mode_ordering_on_1d_target() {
    // Desk-scale ordering of the four modes on the 1-D proxy target: medians
    // over 5 seeds, 50 epochs. Noise is strong enough that the concentration
    // cap bites inside the desk-scale budget.
    let spec = ModelSpec::new(1, 4, Activation::ArccosAffine).unwrap();
    let dataset = pdf_dataset(30);
    let noise = NoiseModel::new(
        PauliNoiseParams::new(0.03, 0.03, 0.03).unwrap(),
        ReadoutParams::symmetric(0.01).unwrap(),
        ChannelPlacement::EveryLayer,
    )
    .unwrap();
    let mut mses: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
    for seed in 1..=5u64 {
        for (mode, key) in [
            (Mode::Noiseless, "noiseless"),
            (Mode::Noisy, "noisy"),
            (Mode::Fqem, "fqem"),
            (Mode::Rtqem, "rtqem"),
        ] {
            let config = TrainingConfig {
                mode,
                n_epochs: 50,
                n_shots: Some(10_000),
                n_data: 30,
                eta: 0.1,
                seed,
                epsilon_ell: 0.05,
                walk: None,
                mitigation_set_size: 20,
                n_runs: 20,
                record_params: false,
                biu_iterations: 50,
            };
            let noise_opt = mode.uses_noise().then(|| noise.clone());
            let artifacts = train(&config, &spec, &dataset, noise_opt.as_ref(), None).unwrap();
            mses.entry(key).or_default().push(artifacts.mse);
        }
    }
    let noiseless = median(mses.get_mut("noiseless").unwrap());
    let noisy = median(mses.get_mut("noisy").unwrap());
    let fqem = median(mses.get_mut("fqem").unwrap());
    let rtqem = median(mses.get_mut("rtqem").unwrap());
    assert!(
        rtqem <= 1.5 * noiseless,
        "rtqem {rtqem} vs 1.5 x noiseless {noiseless}"
    );
    assert!(noisy >= 2.0 * rtqem, "noisy {noisy} vs 2 x rtqem {rtqem}");
    assert!(fqem >= 0.8 * noisy, "fqem {fqem} vs 0.8 x noisy {noisy}");
    pass(
        5,
        "mode ordering, 1-D target",
        format!(
            "median mse: noiseless {noiseless:.4}, noisy {noisy:.4}, fqem {fqem:.4}, rtqem {rtqem:.4}"
        ),
    );
}

#[test]
fn criterion_06_multidim_scaling() {
    // 4 qubits, 3 layers, 20 epochs, 30 points. The concentration bound caps
    // the unmitigated run while the mitigated one crosses it.
    let spec = ModelSpec::new(4, 3, Activation::Identity).unwrap();
    let tspec = TargetSpec {
        kind: TargetKind::MultidimCos,
        n_dim: 4,
        n_data: 30,
        sampling: Sampling::Uniform,
        beta: None,
        csv_path: None,
    };
    let factory = RngFactory::new(99);
    let dataset = gen_multidim_cos(&tspec, &mut factory.stream("dataset")).unwrap();
    let pauli = PauliNoiseParams::new(0.025, 0.025, 0.025).unwrap();
    let readout = ReadoutParams::symmetric(0.01).unwrap();
    let noise = NoiseModel::new(pauli, readout.clone(), ChannelPlacement::EveryLayer).unwrap();
    let bound = nibp_bound(4, 3, &pauli, &readout);
    let n_shots = 10_000u64;
    let shot_sigma = 1.0 / (n_shots as f64).sqrt();

    let mut results = std::collections::BTreeMap::new();
    for (mode, key) in [(Mode::Noisy, "noisy"), (Mode::Rtqem, "rtqem")] {
        let config = TrainingConfig {
            mode,
            n_epochs: 20,
            n_shots: Some(n_shots),
            n_data: 30,
            eta: 0.1,
            seed: 7,
            epsilon_ell: 0.05,
            walk: None,
            mitigation_set_size: 20,
            n_runs: 10,
            record_params: false,
            biu_iterations: 50,
        };
        let artifacts = train(&config, &spec, &dataset, Some(&noise), None).unwrap();
        results.insert(key, artifacts);
    }
    let noisy = &results["noisy"];
    let rtqem = &results["rtqem"];
    assert!(rtqem.mse < noisy.mse, "rtqem {} vs noisy {}", rtqem.mse, noisy.mse);
    let noisy_max = noisy
        .prediction_means
        .iter()
        .map(|p| p.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        noisy_max <= bound + 3.0 * shot_sigma,
        "noisy max |prediction| {noisy_max} above bound {bound}"
    );
    let rtqem_max = rtqem
        .prediction_means
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        rtqem_max > bound,
        "rtqem never exceeds the bound: max {rtqem_max} vs {bound}"
    );
    pass(
        6,
        "multidim scaling",
        format!(
            "mse rtqem {:.4} < noisy {:.4}; noisy max {noisy_max:.3} <= bound {bound:.3} < rtqem max {rtqem_max:.3}",
            rtqem.mse, noisy.mse
        ),
    );
}

#[test]
fn criterion_07_threshold_sweep_relearn_counts() {
    // Evolving noise RW^50_0.002 from p0 = (0.005, 0.005, 0.005): relearn
    // counts strictly decreasing in epsilon, with zero relearns at 0.2.
    let spec = ModelSpec::new(1, 4, Activation::Identity).unwrap();
    let dataset = pdf_dataset(30);
    let noise = NoiseModel::new(
        PauliNoiseParams::new(0.005, 0.005, 0.005).unwrap(),
        ReadoutParams::symmetric(0.005).unwrap(),
        ChannelPlacement::EveryLayer,
    )
    .unwrap();
    let mut counts = Vec::new();
    for eps in [0.0, 0.05, 0.1, 0.2] {
        let config = TrainingConfig {
            mode: Mode::Rtqem,
            n_epochs: 50,
            n_shots: Some(10_000),
            n_data: 30,
            eta: 0.05,
            seed: 1234,
            epsilon_ell: eps,
            walk: Some(RandomWalkConfig { sigma_delta: 0.002, n_steps: 50, seed: None }),
            mitigation_set_size: 20,
            n_runs: 10,
            record_params: false,
            biu_iterations: 50,
        };
        let artifacts = train(&config, &spec, &dataset, Some(&noise), None).unwrap();
        counts.push(artifacts.relearn_count);
    }
    for w in counts.windows(2) {
        assert!(w[0] > w[1], "relearn counts not strictly decreasing: {counts:?}");
    }
    assert_eq!(*counts.last().unwrap(), 0, "eps = 0.2 must not relearn: {counts:?}");
    pass(7, "threshold sweep", format!("relearn counts {counts:?} for eps = [0, 0.05, 0.1, 0.2]"));
}

#[test]
fn criterion_08_nibp_bound_holds_for_random_parameters() {
    // 200 random parameter vectors on the 1-qubit 4-layer noisy model, exact
    // expectations: |f_noisy| <= bound.
    let spec = ModelSpec::new(1, 4, Activation::Identity).unwrap();
    let noise = paper_static_noise();
    let bound = nibp_bound(1, 4, &noise.pauli, &noise.readout);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let params: Vec<f64> = (0..spec.param_count())
            .map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI))
            .collect();
        let x = [rng.gen::<f64>()];
        let uploading = UploadingParams::from_flat(params, &spec).unwrap();
        let circuit = build_circuit(&x, &uploading, &spec).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(0);
        let f = run_noisy(&circuit, &noise, None, &mut r).unwrap();
        assert!(f.abs() <= bound, "|f_noisy| = {} exceeds bound {bound}", f.abs());
        worst = worst.max(f.abs());
    }
    pass(8, "concentration bound", format!("max |f_noisy| = {worst:.4} <= bound {bound:.4}"));
}

#[test]
fn criterion_09_biu_round_trip() {
    // Single-qubit responses with flip probabilities <= 0.1, 50 iterations:
    // unfolded histogram within 1e-3 total variation of the truth.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_tv: f64 = 0.0;
    for &p10 in &[0.01, 0.05, 0.1] {
        for &p01 in &[0.01, 0.05, 0.1] {
            let response = ResponseMatrix::single_qubit(p10, p01).unwrap();
            for _ in 0..10 {
                let t0: f64 = rng.gen_range(0.05..0.95);
                let truth = vec![t0, 1.0 - t0];
                let measured = response.fold(&truth).unwrap();
                let unfolded = biu_unfold(&measured, &response, 50, None).unwrap();
                let tv: f64 = unfolded
                    .iter()
                    .zip(&truth)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
                    / 2.0;
                assert!(tv < 1e-3, "p10 {p10}, p01 {p01}: tv {tv}");
                worst_tv = worst_tv.max(tv);
            }
        }
    }
    pass(9, "readout unfolding round-trip", format!("worst total variation {worst_tv:.2e} < 1e-3"));
}

#[test]
fn criterion_10_run_determinism() {
    // The same config executed twice produces byte-identical artifacts.
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.toml");
    let mut f = std::fs::File::create(&config_path).unwrap();
    write!(
        f,
        r#"
seed = 4242
mode = "rtqem"
output_dir = "run"

[model]
n_qubits = 1
n_layers = 2

[target]
kind = "pdf_proxy"
n_data = 10

[noise]
p_x = 0.007
p_y = 0.003
p_z = 0.002
p_flip = 0.005

[training]
n_epochs = 5
n_shots = 1000
m = 5
n_runs = 5
"#
    )
    .unwrap();

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let dir_a = qremlab_cli::commands::run(&config_path, Some(&out_a)).unwrap();
    let dir_b = qremlab_cli::commands::run(&config_path, Some(&out_b)).unwrap();
    for file in ["loss.csv", "gradients.csv", "predictions.csv", "artifacts.json", "predictions.svg"] {
        let a = std::fs::read(dir_a.join(file)).unwrap();
        let b = std::fs::read(dir_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    pass(10, "run determinism", "all artifacts byte-identical across repeated runs".into());
}
