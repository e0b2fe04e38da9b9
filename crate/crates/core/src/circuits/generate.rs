use rand::Rng;

use crate::device::{
    pattern_layer, validate_subset, DeviceProfile, DeviceTopology, Pattern, QubitSubset,
};
use crate::rng::{keyed, stream};
use crate::{Error, Result};

use super::{Circuit, Gate1Q, Layer, TwoQubitGate};

/// Default two-qubit pattern order, repeating every eight cycles.
pub const DEFAULT_SEQUENCE: &str = "ABCDCDAB";

#[derive(Clone, Debug, PartialEq)]
pub struct GenerateOptions {
    pub cycles: usize,
    pub seed: u64,
    pub sequence: String,
    /// Forbid the same single-qubit kind on a qubit in consecutive layers.
    pub no_repeat: bool,
}

impl GenerateOptions {
    pub fn new(cycles: usize, seed: u64) -> Self {
        GenerateOptions {
            cycles,
            seed,
            sequence: DEFAULT_SEQUENCE.to_string(),
            no_repeat: true,
        }
    }
}

fn draw_single(seed: u64, layer: usize, qubit: u32, previous: Option<Gate1Q>, no_repeat: bool) -> Gate1Q {
    let mut rng = keyed(&[seed, stream::GATES, layer as u64, qubit as u64]);
    match previous.filter(|_| no_repeat) {
        Some(prev) => {
            let choices: Vec<Gate1Q> = Gate1Q::ALL.into_iter().filter(|&g| g != prev).collect();
            choices[rng.random_range(0..choices.len())]
        }
        None => Gate1Q::ALL[rng.random_range(0..3)],
    }
}

/// Generate a random circuit: `cycles` repetitions of a single-qubit layer
/// and a patterned two-qubit layer, followed by one more single-qubit layer.
///
/// Each single-qubit kind is drawn from a stream keyed by
/// `(seed, layer, physical qubit)`, so the circuit does not depend on
/// iteration order. Two-qubit parameters come from `profile`.
pub fn generate(
    topology: &DeviceTopology,
    subset: &QubitSubset,
    options: &GenerateOptions,
    profile: &DeviceProfile,
) -> Result<Circuit> {
    if subset.is_empty() {
        return Err(Error::validation("subset", "cannot generate a circuit on an empty subset"));
    }
    if options.cycles == 0 {
        return Err(Error::validation("cycles", "must be at least 1"));
    }
    validate_subset(topology, subset)?;
    let sequence = Pattern::parse_sequence(&options.sequence)?;
    let layers_by_label: Vec<(Pattern, Vec<TwoQubitGate>)> = Pattern::ALL
        .into_iter()
        .map(|label| {
            let gates = pattern_layer(topology, subset, label)
                .into_iter()
                .map(|c| TwoQubitGate {
                    a: subset.position(c.a).expect("pattern layer is inside subset"),
                    b: subset.position(c.b).expect("pattern layer is inside subset"),
                    params: profile.params(c),
                })
                .collect();
            (label, gates)
        })
        .collect();

    let n = subset.len();
    let mut previous: Vec<Option<Gate1Q>> = vec![None; n];
    let mut single_layer = |t: usize| -> Layer {
        let gates = subset
            .qubits()
            .iter()
            .enumerate()
            .map(|(pos, &q)| {
                let g = draw_single(options.seed, t, q, previous[pos], options.no_repeat);
                previous[pos] = Some(g);
                (pos, g)
            })
            .collect();
        Layer::Single(gates)
    };

    let mut layers = Vec::with_capacity(2 * options.cycles + 1);
    for t in 0..options.cycles {
        layers.push(single_layer(t));
        let label = sequence[t % sequence.len()];
        let gates = layers_by_label
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, g)| g.clone())
            .unwrap_or_default();
        let idle = (0..n).filter(|&q| !gates.iter().any(|g| g.touches(q))).collect();
        layers.push(Layer::Two { gates, idle });
    }
    layers.push(single_layer(options.cycles));

    Ok(Circuit::new(subset.clone(), layers)?.with_metadata(
        options.cycles,
        options.sequence.clone(),
        options.seed,
        options.no_repeat,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{gate_counts, serialize, GateCounts};
    use crate::data::{bundled_profile, bundled_subset};
    use crate::device::{zcz3_topology, MeanRates};

    fn profile() -> DeviceProfile {
        bundled_profile("zcz3-mean").unwrap()
    }

    /// Count two-qubit gates by enumerating couplers and the sequence
    /// directly, without going through the generator.
    fn expected_two_qubit_count(topology: &DeviceTopology, subset: &QubitSubset, cycles: usize) -> usize {
        let seq: Vec<char> = DEFAULT_SEQUENCE.chars().collect();
        (0..cycles)
            .map(|t| {
                topology
                    .labeled_couplers()
                    .filter(|(c, p)| {
                        p.as_char() == seq[t % seq.len()] && subset.contains(c.a) && subset.contains(c.b)
                    })
                    .count()
            })
            .sum()
    }

    #[test]
    fn generation_is_deterministic() {
        let t = zcz3_topology();
        let s = bundled_subset("subset31").unwrap().subset().unwrap();
        let opts = GenerateOptions::new(12, 7);
        let a = generate(&t, &s, &opts, &profile()).unwrap();
        let b = generate(&t, &s, &opts, &profile()).unwrap();
        assert_eq!(serialize(&a), serialize(&b));
        let c = generate(&t, &s, &GenerateOptions::new(12, 8), &profile()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn subset31_counts() {
        let t = zcz3_topology();
        let s = bundled_subset("subset31").unwrap().subset().unwrap();
        let c = generate(&t, &s, &GenerateOptions::new(12, 7), &profile()).unwrap();
        let counts = gate_counts(&c);
        assert_eq!(counts.n_1q, 403);
        let n2 = expected_two_qubit_count(&t, &s, 12);
        assert_eq!(counts.n_2q, n2);
        assert_eq!(counts.n_idle, 31 * 12 - 2 * n2);
        // frozen from the enumeration above
        assert_eq!(n2, 102);
    }

    #[test]
    fn subset83_m32_counts_frozen() {
        let t = zcz3_topology();
        let s = bundled_subset("subset83").unwrap().subset().unwrap();
        let c = generate(&t, &s, &GenerateOptions::new(32, 1), &profile()).unwrap();
        let n2 = expected_two_qubit_count(&t, &s, 32);
        assert_eq!(
            gate_counts(&c),
            GateCounts { n_1q: 83 * 33, n_2q: n2, n_idle: 83 * 32 - 2 * n2, n_measured: 83 }
        );
        assert_eq!((n2, 83 * 32 - 2 * n2), (1024, 608));
    }

    #[test]
    fn single_qubit_circuit_counts() {
        let t = zcz3_topology();
        let s = QubitSubset::new("one", vec![52]).unwrap();
        let c = generate(&t, &s, &GenerateOptions::new(1, 3), &profile()).unwrap();
        assert_eq!(
            gate_counts(&c),
            GateCounts { n_1q: 2, n_2q: 0, n_idle: 1, n_measured: 1 }
        );
    }

    #[test]
    fn no_immediate_repeats() {
        let t = zcz3_topology();
        let s = bundled_subset("subset31").unwrap().subset().unwrap();
        for seed in 0..5 {
            let c = generate(&t, &s, &GenerateOptions::new(20, seed), &profile()).unwrap();
            let singles: Vec<&Vec<(usize, Gate1Q)>> = c
                .layers()
                .iter()
                .filter_map(|l| match l {
                    Layer::Single(g) => Some(g),
                    _ => None,
                })
                .collect();
            for pair in singles.windows(2) {
                for (a, b) in pair[0].iter().zip(pair[1]) {
                    assert_eq!(a.0, b.0);
                    assert_ne!(a.1, b.1);
                }
            }
        }
    }

    #[test]
    fn repeats_allowed_when_rule_disabled() {
        let t = zcz3_topology();
        let s = bundled_subset("subset83").unwrap().subset().unwrap();
        let mut opts = GenerateOptions::new(10, 2);
        opts.no_repeat = false;
        let c = generate(&t, &s, &opts, &profile()).unwrap();
        let singles: Vec<_> = c
            .layers()
            .iter()
            .filter_map(|l| match l {
                Layer::Single(g) => Some(g.clone()),
                _ => None,
            })
            .collect();
        let repeats = singles
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a.1 == b.1).collect::<Vec<_>>())
            .filter(|&r| r)
            .count();
        assert!(repeats > 0);
    }

    #[test]
    fn empty_subset_rejected() {
        let t = zcz3_topology();
        let s = QubitSubset::new("none", vec![]).unwrap();
        let p = DeviceProfile::uniform("z", MeanRates::ZERO);
        assert!(generate(&t, &s, &GenerateOptions::new(3, 0), &p).is_err());
    }

    #[test]
    fn bad_sequence_rejected() {
        let t = zcz3_topology();
        let s = QubitSubset::compact(&t, 4).unwrap();
        let mut opts = GenerateOptions::new(3, 0);
        opts.sequence = "ABX".into();
        assert!(generate(&t, &s, &opts, &profile()).is_err());
    }

    #[test]
    fn per_coupler_params_are_used() {
        use crate::device::{Coupler, CouplerEntry, GateParams};
        let t = zcz3_topology();
        let s = QubitSubset::new("pair", vec![0, 7]).unwrap();
        let custom = GateParams { theta: 1.5, phi: 0.4, ..GateParams::ISWAP };
        let p = profile().with_coupler(CouplerEntry {
            qubits: Coupler::new(0, 7),
            e2: None,
            params: Some(custom),
        });
        let c = generate(&t, &s, &GenerateOptions::new(1, 0), &p).unwrap();
        let (_, g) = c.two_qubit_gates().next().unwrap();
        assert_eq!(g.params, custom);
    }
}
