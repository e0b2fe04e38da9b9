use rcs_core::circuits::{apply_patch, deserialize, generate, serialize, GenerateOptions};
use rcs_core::costest::{build_network, contract, optimize_order, NetworkOutput, OptimizeOptions};
use rcs_core::data::{bundled_profile, bundled_subset};
use rcs_core::device::{zcz3_topology, MeanRates};
use rcs_core::simulator::{read_samples, sample, simulate, simulate_patched, write_samples, IdealDistribution};
use rcs_core::xeb::{linear_xeb, speckle_purity};
use rcs_core::{predict_fidelity, Circuit, DeviceProfile, NoiseSpec, PatchSpec, QubitSubset};

fn compact(n: usize, cycles: usize, seed: u64) -> Circuit {
    let topology = zcz3_topology();
    let subset = QubitSubset::compact(&topology, n).unwrap();
    let profile = bundled_profile("zcz3-mean").unwrap();
    generate(&topology, &subset, &GenerateOptions::new(cycles, seed), &profile).unwrap()
}

#[test]
fn circuit_file_round_trip_preserves_simulation() {
    let circuit = compact(10, 8, 1);
    let back = deserialize(&serialize(&circuit)).unwrap();
    assert_eq!(back, circuit);
    assert_eq!(simulate(&back).unwrap(), simulate(&circuit).unwrap());
}

#[test]
fn sample_file_round_trip_preserves_xeb() {
    let circuit = compact(10, 10, 2);
    let set = sample(&circuit, 5000, 3, &NoiseSpec::Mixture { fidelity: 0.7 }).unwrap();
    let (header, back) = read_samples(&write_samples(&set, Some("abc"))).unwrap();
    assert_eq!(header.run_digest.as_deref(), Some("abc"));
    assert_eq!(back, set);
    assert_eq!(linear_xeb(&back).unwrap(), linear_xeb(&set).unwrap());
}

/// Over repeated mixture experiments the spread of the XEB estimate should
/// match its reported standard error.
#[test]
fn xeb_standard_error_matches_spread() {
    let circuit = compact(12, 12, 4);
    let shots = 4000;
    for f in [0.1, 0.5] {
        let values: Vec<f64> = (0..40)
            .map(|seed| {
                let set = sample(&circuit, shots, 100 + seed, &NoiseSpec::Mixture { fidelity: f }).unwrap();
                linear_xeb(&set).unwrap().value
            })
            .collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt();
        let reported = 1.0 / (shots as f64).sqrt();
        assert!(sd > reported / 2.0 && sd < reported * 2.0, "f={f}: sd {sd} vs {reported}");
    }
}

#[test]
fn speckle_purity_tracks_mixture_fidelity() {
    let circuit = compact(12, 14, 5);
    let p = IdealDistribution::new(&circuit).unwrap().dense(12).unwrap();
    let d = p.len() as f64;
    for f in [0.2, 0.6, 1.0] {
        let mixed: Vec<f64> = p.iter().map(|x| f * x + (1.0 - f) / d).collect();
        let est = speckle_purity(&mixed).unwrap();
        assert!((est.value - f).abs() < 0.1 * f.max(0.2), "f={f}: {}", est.value);
    }
}

#[test]
fn patched_sampling_matches_product_distribution() {
    let topology = zcz3_topology();
    let doc = bundled_subset("subset31").unwrap();
    let subset = doc.subset().unwrap();
    let profile = bundled_profile("zcz3-mean").unwrap();
    let spec = PatchSpec::new(doc.patches["4"].clone());
    let full = generate(&topology, &subset, &GenerateOptions::new(8, 6), &profile).unwrap();
    let patched = apply_patch(&full, &spec).unwrap();
    let state = simulate_patched(&patched).unwrap();
    let set = sample(&patched, 20_000, 7, &NoiseSpec::None).unwrap();
    for (x, p) in set.bitstrings.iter().zip(set.ideal.as_ref().unwrap()) {
        assert!((state.probability(*x) - p).abs() <= 1e-12 * p.max(1e-300));
    }
    // Patch circuits are not scrambling across patches, so XEB is of order one
    // but need not be exactly one.
    let xeb = linear_xeb(&set).unwrap().value;
    assert!(xeb > 0.5, "{xeb}");
}

#[test]
fn trajectory_noise_lowers_xeb_toward_prediction() {
    let circuit = compact(10, 8, 8);
    let noise = NoiseSpec::Trajectory {
        e1: 0.002,
        e2: 0.01,
        e_idle: 0.002,
        e_ro: 0.01,
    };
    let set = sample(&circuit, 40_000, 9, &noise).unwrap();
    let measured = linear_xeb(&set).unwrap().value;
    let profile = DeviceProfile::uniform(
        "t",
        MeanRates {
            e1: 0.002,
            e2: 0.01,
            e_ro: 0.01,
            e_idle: 0.002,
        },
    );
    let (predicted, _) = predict_fidelity(&circuit, &profile).unwrap();
    assert!(measured < 0.98);
    assert!((measured - predicted.value).abs() / predicted.value < 0.25, "{measured} vs {}", predicted.value);
}

#[test]
fn open_network_reproduces_full_state() {
    let circuit = compact(8, 6, 10);
    let network = build_network(&circuit, NetworkOutput::Bitstring(0b1011_0110)).unwrap();
    let plan = optimize_order(&network, &OptimizeOptions::new(1, 4)).unwrap();
    let amp = contract(&network, &plan).unwrap();
    let expected = simulate(&circuit).unwrap().amplitude(0b1011_0110).unwrap();
    assert!((amp - expected).norm() < 1e-12);
}
