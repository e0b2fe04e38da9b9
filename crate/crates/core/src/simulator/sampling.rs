use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, Layer, Matrix2};
use crate::rng::{keyed, stream};
use crate::{Error, Result};

use super::patched::split;
use super::{Bits, Simulator, StateVector};

/// Noise applied while sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum NoiseSpec {
    /// Ideal sampling from `|ψ|²`.
    None,
    /// Each shot is ideal with probability `fidelity`, uniform otherwise.
    Mixture { fidelity: f64 },
    /// Uniform non-identity Pauli faults after each gate and idle slot, and
    /// independent bit flips at readout.
    Trajectory { e1: f64, e2: f64, e_idle: f64, e_ro: f64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let check = |field: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::validation(format!("noise.{field}"), format!("{v} is not in [0, 1]")))
            }
        };
        match *self {
            NoiseSpec::None => Ok(()),
            NoiseSpec::Mixture { fidelity } => check("fidelity", fidelity),
            NoiseSpec::Trajectory { e1, e2, e_idle, e_ro } => {
                check("e1", e1)?;
                check("e2", e2)?;
                check("e_idle", e_idle)?;
                check("e_ro", e_ro)
            }
        }
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::None => write!(f, "none"),
            NoiseSpec::Mixture { fidelity } => write!(f, "mixture:{fidelity}"),
            NoiseSpec::Trajectory { e1, e2, e_idle, e_ro } => {
                write!(f, "trajectory:{e1},{e2},{e_idle},{e_ro}")
            }
        }
    }
}

/// Parses `none`, `mixture:F` or `trajectory:E1,E2,EIDLE,ERO`.
impl FromStr for NoiseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::validation("noise", msg);
        let (model, args) = s.split_once(':').unwrap_or((s, ""));
        let values = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad(format!("{v:?} is not a number"))))
                .collect::<Result<Vec<_>>>()?
        };
        let spec = match (model, values.as_slice()) {
            ("none", []) => NoiseSpec::None,
            ("mixture", &[fidelity]) => NoiseSpec::Mixture { fidelity },
            ("trajectory", &[e1, e2, e_idle, e_ro]) => NoiseSpec::Trajectory { e1, e2, e_idle, e_ro },
            _ => {
                return Err(bad(format!(
                    "expected none, mixture:F or trajectory:E1,E2,EIDLE,ERO, got {s:?}"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// One independent factor of the output distribution.
#[derive(Clone, Debug)]
pub struct DistFactor {
    /// Parent positions, bit `i` of a factor index is `positions[i]`.
    pub positions: Vec<usize>,
    pub probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl DistFactor {
    fn new(positions: Vec<usize>, probs: Vec<f64>) -> Self {
        let cdf = cumulative(&probs);
        DistFactor { positions, probs, cdf }
    }

    fn restrict(&self, x: Bits) -> usize {
        self.positions
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &p)| acc | ((((x >> p) & 1) as usize) << i))
    }

    fn scatter(&self, local: usize) -> Bits {
        self.positions
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &p)| acc | ((((local >> i) & 1) as Bits) << p))
    }
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Ideal output distribution of a circuit. A patched circuit factorizes into
/// one independent distribution per patch; an unpatched one has a single
/// factor covering every qubit.
#[derive(Clone, Debug)]
pub struct IdealDistribution {
    num_qubits: usize,
    factors: Vec<DistFactor>,
}

impl IdealDistribution {
    pub fn new(circuit: &Circuit) -> Result<Self> {
        Self::with_simulator(&Simulator::default(), circuit)
    }

    pub fn with_simulator(sim: &Simulator, circuit: &Circuit) -> Result<Self> {
        let pieces = split(circuit)?;
        for (positions, _) in &pieces {
            sim.check(positions.len())?;
        }
        let factors = pieces
            .into_iter()
            .map(|(positions, sub)| Ok(DistFactor::new(positions, sim.run(&sub)?.probabilities())))
            .collect::<Result<Vec<_>>>()?;
        Ok(IdealDistribution {
            num_qubits: circuit.num_qubits(),
            factors,
        })
    }

    pub fn from_state(state: &StateVector) -> Self {
        IdealDistribution {
            num_qubits: state.num_qubits(),
            factors: vec![DistFactor::new((0..state.num_qubits()).collect(), state.probabilities())],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn factors(&self) -> &[DistFactor] {
        &self.factors
    }

    pub fn is_product(&self) -> bool {
        self.factors.len() > 1
    }

    /// Ideal probability of `x`, the product of the factor probabilities.
    pub fn probability(&self, x: Bits) -> f64 {
        self.factors.iter().map(|f| f.probs[f.restrict(x)]).product()
    }

    /// The full probability vector, for distributions of at most `max_qubits`.
    pub fn dense(&self, max_qubits: usize) -> Result<Vec<f64>> {
        if self.num_qubits > max_qubits {
            return Err(Error::Capacity {
                qubits: self.num_qubits,
                limit: max_qubits,
            });
        }
        if let [only] = self.factors.as_slice() {
            return Ok(only.probs.clone());
        }
        Ok((0..1u128 << self.num_qubits)
            .into_par_iter()
            .map(|x| self.probability(x))
            .collect())
    }

    fn draw_ideal(&self, rng: &mut ChaCha8Rng) -> Bits {
        self.factors.iter().fold(0, |acc, f| acc | f.scatter(draw(&f.cdf, rng)))
    }

    fn draw_uniform(&self, rng: &mut ChaCha8Rng) -> Bits {
        let mask = if self.num_qubits == 128 { Bits::MAX } else { (1 << self.num_qubits) - 1 };
        rng.random::<Bits>() & mask
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    /// Identifies the sampled circuit, e.g. its subset name and generation seed.
    pub circuit: String,
    pub seed: u64,
    pub noise: NoiseSpec,
}

/// Sampled bitstrings with their ideal probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub num_qubits: usize,
    pub bitstrings: Vec<Bits>,
    pub ideal: Option<Vec<f64>>,
    pub meta: SampleMeta,
}

impl SampleSet {
    pub fn new(num_qubits: usize, bitstrings: Vec<Bits>, ideal: Option<Vec<f64>>, meta: SampleMeta) -> Result<Self> {
        if num_qubits > 128 {
            return Err(Error::validation("num_qubits", format!("{num_qubits} exceeds 128")));
        }
        if let Some((i, x)) = bitstrings
            .iter()
            .enumerate()
            .find(|(_, &x)| num_qubits < 128 && x >> num_qubits != 0)
        {
            return Err(Error::validation(
                format!("bitstrings[{i}]"),
                format!("{x:#x} is out of range for {num_qubits} qubits"),
            ));
        }
        if let Some(p) = &ideal {
            if p.len() != bitstrings.len() {
                return Err(Error::validation("ideal", "one probability per bitstring is required"));
            }
            if let Some(i) = p.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::validation(format!("ideal[{i}]"), format!("{} is not in [0, 1]", p[i])));
            }
        }
        Ok(SampleSet {
            num_qubits,
            bitstrings,
            ideal,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.bitstrings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bitstrings.is_empty()
    }
}

/// Draw `shots` bitstrings with the given noise and attach ideal probabilities.
pub fn sample(circuit: &Circuit, shots: usize, seed: u64, noise: &NoiseSpec) -> Result<SampleSet> {
    sample_with(&Simulator::default(), circuit, shots, seed, noise)
}

pub fn sample_with(
    sim: &Simulator,
    circuit: &Circuit,
    shots: usize,
    seed: u64,
    noise: &NoiseSpec,
) -> Result<SampleSet> {
    if shots == 0 {
        return Err(Error::validation("shots", "at least one shot is required"));
    }
    noise.validate()?;
    let dist = IdealDistribution::with_simulator(sim, circuit)?;
    let bitstrings = sample_distribution(&dist, circuit, shots, seed, noise)?;
    let ideal = bitstrings.par_iter().map(|&x| dist.probability(x)).collect();
    let meta = SampleMeta {
        circuit: format!("{}/m{}/s{}", circuit.subset().name(), circuit.cycles(), circuit.seed()),
        seed,
        noise: *noise,
    };
    SampleSet::new(circuit.num_qubits(), bitstrings, Some(ideal), meta)
}

/// Draw bitstrings from a precomputed ideal distribution of `circuit`.
///
/// Shot `s` uses generators keyed by `(seed, s, stream)` only, so the result
/// does not depend on thread count or evaluation order.
pub fn sample_distribution(
    dist: &IdealDistribution,
    circuit: &Circuit,
    shots: usize,
    seed: u64,
    noise: &NoiseSpec,
) -> Result<Vec<Bits>> {
    noise.validate()?;
    let shot_rng = |s: usize, tag: u64| keyed(&[seed, s as u64, tag]);
    let out = match *noise {
        NoiseSpec::None => (0..shots)
            .into_par_iter()
            .map(|s| dist.draw_ideal(&mut shot_rng(s, stream::OUTCOME)))
            .collect(),
        NoiseSpec::Mixture { fidelity } => (0..shots)
            .into_par_iter()
            .map(|s| {
                let ideal = shot_rng(s, stream::SELECT).random::<f64>() < fidelity;
                let mut rng = shot_rng(s, stream::OUTCOME);
                if ideal {
                    dist.draw_ideal(&mut rng)
                } else {
                    dist.draw_uniform(&mut rng)
                }
            })
            .collect(),
        NoiseSpec::Trajectory { e1, e2, e_idle, e_ro } => {
            let rates = Rates { e1, e2, e_idle };
            let pieces = split(circuit)?;
            let traj = pieces
                .into_iter()
                .zip(&dist.factors)
                .map(|((_, sub), factor)| Trajectory::new(sub, factor))
                .collect::<Vec<_>>();
            (0..shots)
                .into_par_iter()
                .map(|s| {
                    let mut faults = shot_rng(s, stream::FAULTS);
                    let mut outcome = shot_rng(s, stream::OUTCOME);
                    let mut x = traj
                        .iter()
                        .fold(0, |acc, t| acc | t.shot(&rates, &mut faults, &mut outcome));
                    if e_ro > 0.0 {
                        let mut ro = shot_rng(s, stream::READOUT);
                        for q in 0..dist.num_qubits {
                            if ro.random::<f64>() < e_ro {
                                x ^= 1 << q;
                            }
                        }
                    }
                    x
                })
                .collect()
        }
    };
    Ok(out)
}

struct Rates {
    e1: f64,
    e2: f64,
    e_idle: f64,
}

const CACHE_LIMIT: usize = 1 << 24;

fn pauli(k: usize) -> Matrix2 {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match k {
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        3 => [[o, z], [z, -o]],
        _ => unreachable!("non-identity Pauli index"),
    }
}

/// Fault-injecting resimulation of one independent piece of a circuit.
struct Trajectory<'a> {
    circuit: Circuit,
    factor: &'a DistFactor,
    /// State after each layer, when small enough to keep.
    cache: Option<Vec<StateVector>>,
}

impl<'a> Trajectory<'a> {
    fn new(circuit: Circuit, factor: &'a DistFactor) -> Self {
        let dim = 1usize << circuit.num_qubits();
        let cache = (circuit.layers().len() * dim <= CACHE_LIMIT).then(|| {
            let mut state = StateVector::zero(circuit.num_qubits());
            circuit
                .layers()
                .iter()
                .map(|layer| {
                    state.apply_layer(layer);
                    state.clone()
                })
                .collect()
        });
        Trajectory { circuit, factor, cache }
    }

    /// Faults drawn for this piece, as `(layer, position, pauli)` in layer
    /// order. Each gate's fault lands on its own qubits, which no other gate
    /// in the same layer touches, so applying all of a layer's faults after
    /// the layer equals applying each right after its gate.
    fn draw_faults(&self, rates: &Rates, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let mut one = |l: usize, q: usize, rate: f64, rng: &mut ChaCha8Rng| {
            if rate > 0.0 && rng.random::<f64>() < rate {
                out.push((l, q, rng.random_range(1..4)));
            }
        };
        let mut pairs = Vec::new();
        for (l, layer) in self.circuit.layers().iter().enumerate() {
            match layer {
                Layer::Single(gates) => {
                    for &(q, _) in gates {
                        one(l, q, rates.e1, rng);
                    }
                }
                Layer::Two { gates, idle } => {
                    for g in gates {
                        if rates.e2 > 0.0 && rng.random::<f64>() < rates.e2 {
                            // uniform over the 15 non-identity two-qubit Paulis
                            let k = rng.random_range(1..16usize);
                            pairs.push((l, g.a, k / 4));
                            pairs.push((l, g.b, k % 4));
                        }
                    }
                    for &q in idle {
                        one(l, q, rates.e_idle, rng);
                    }
                }
            }
        }
        out.extend(pairs.into_iter().filter(|&(_, _, p)| p != 0));
        out.sort_by_key(|&(l, q, _)| (l, q));
        out
    }

    fn shot(&self, rates: &Rates, faults: &mut ChaCha8Rng, outcome: &mut ChaCha8Rng) -> Bits {
        let drawn = self.draw_faults(rates, faults);
        let Some(&(first, _, _)) = drawn.first() else {
            return self.factor.scatter(draw(&self.factor.cdf, outcome));
        };
        let layers = self.circuit.layers();
        let mut state = match &self.cache {
            Some(cache) => cache[first].clone(),
            None => {
                let mut s = StateVector::zero(self.circuit.num_qubits());
                for layer in &layers[..=first] {
                    s.apply_layer(layer);
                }
                s
            }
        };
        let mut next = 0;
        for (l, layer) in layers.iter().enumerate().skip(first) {
            if l > first {
                state.apply_layer(layer);
            }
            while next < drawn.len() && drawn[next].0 == l {
                let (_, q, p) = drawn[next];
                state.apply_single(q, &pauli(p));
                next += 1;
            }
        }
        let cdf = cumulative(&state.probabilities());
        self.factor.scatter(draw(&cdf, outcome))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{apply_patch, generate, GenerateOptions, PatchSpec};
    use crate::device::{zcz3_topology, DeviceProfile, MeanRates, QubitSubset};

    fn circuit(n: usize, m: usize, seed: u64) -> Circuit {
        let t = zcz3_topology();
        let s = QubitSubset::compact(&t, n).unwrap();
        let p = DeviceProfile::uniform("z", MeanRates::ZERO);
        generate(&t, &s, &GenerateOptions::new(m, seed), &p).unwrap()
    }

    #[test]
    fn noise_spec_parsing() {
        assert_eq!("none".parse::<NoiseSpec>().unwrap(), NoiseSpec::None);
        assert_eq!(
            "mixture:0.5".parse::<NoiseSpec>().unwrap(),
            NoiseSpec::Mixture { fidelity: 0.5 }
        );
        assert_eq!(
            "trajectory:0.001,0.01,0,0.02".parse::<NoiseSpec>().unwrap(),
            NoiseSpec::Trajectory { e1: 0.001, e2: 0.01, e_idle: 0.0, e_ro: 0.02 }
        );
        for bad in ["mixture", "mixture:1.5", "trajectory:0.1", "depolarize:0.1", "mixture:x"] {
            assert!(bad.parse::<NoiseSpec>().unwrap_err().is_validation(), "{bad}");
        }
        for spec in [NoiseSpec::None, NoiseSpec::Mixture { fidelity: 0.25 }] {
            assert_eq!(spec.to_string().parse::<NoiseSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn noise_spec_json_is_tagged() {
        let json = serde_json::to_string(&NoiseSpec::Mixture { fidelity: 0.5 }).unwrap();
        assert_eq!(json, r#"{"model":"mixture","fidelity":0.5}"#);
    }

    #[test]
    fn zero_shots_rejected() {
        let c = circuit(4, 2, 1);
        assert!(sample(&c, 0, 1, &NoiseSpec::None).unwrap_err().is_validation());
    }

    #[test]
    fn mixture_one_equals_ideal() {
        let c = circuit(8, 6, 2);
        let a = sample(&c, 2000, 9, &NoiseSpec::None).unwrap();
        let b = sample(&c, 2000, 9, &NoiseSpec::Mixture { fidelity: 1.0 }).unwrap();
        assert_eq!(a.bitstrings, b.bitstrings);
    }

    #[test]
    fn zero_rate_trajectory_equals_ideal() {
        let c = circuit(8, 6, 2);
        let a = sample(&c, 2000, 9, &NoiseSpec::None).unwrap();
        let zero = NoiseSpec::Trajectory { e1: 0.0, e2: 0.0, e_idle: 0.0, e_ro: 0.0 };
        let b = sample(&c, 2000, 9, &zero).unwrap();
        assert_eq!(a.bitstrings, b.bitstrings);
    }

    #[test]
    fn thread_count_does_not_change_samples() {
        let c = circuit(10, 6, 3);
        let noise = NoiseSpec::Trajectory { e1: 0.01, e2: 0.05, e_idle: 0.01, e_ro: 0.02 };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample(&c, 3000, 4, &noise).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn mixture_zero_is_uniform_chi_square() {
        // n = 8, N = 10^6: chi-square over 256 cells with 255 degrees of
        // freedom; 5 sigma above the mean is about 368.
        let c = circuit(8, 4, 5);
        let set = sample(&c, 1_000_000, 11, &NoiseSpec::Mixture { fidelity: 0.0 }).unwrap();
        let mut counts = [0u64; 256];
        for &x in &set.bitstrings {
            counts[x as usize] += 1;
        }
        let expected = 1e6 / 256.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 368.0, "chi2 = {chi2}");
    }

    #[test]
    fn ideal_sampling_matches_distribution() {
        let c = circuit(4, 8, 6);
        let dist = IdealDistribution::new(&c).unwrap();
        let set = sample(&c, 200_000, 3, &NoiseSpec::None).unwrap();
        let mut counts = [0f64; 16];
        for &x in &set.bitstrings {
            counts[x as usize] += 1.0;
        }
        for x in 0..16 {
            let p = dist.probability(x as Bits);
            let sd = (p * (1.0 - p) / 2e5).sqrt();
            assert!((counts[x] / 2e5 - p).abs() < 5.0 * sd + 1e-9, "cell {x}");
        }
        for (x, p) in set.bitstrings.iter().zip(set.ideal.as_ref().unwrap()) {
            assert_eq!(*p, dist.probability(*x));
        }
    }

    #[test]
    fn full_readout_flip_inverts_every_bit() {
        let c = circuit(6, 3, 1);
        let a = sample(&c, 500, 2, &NoiseSpec::None).unwrap();
        let flip = NoiseSpec::Trajectory { e1: 0.0, e2: 0.0, e_idle: 0.0, e_ro: 1.0 };
        let b = sample(&c, 500, 2, &flip).unwrap();
        for (x, y) in a.bitstrings.iter().zip(&b.bitstrings) {
            assert_eq!(x ^ y, 0b11_1111);
        }
    }

    #[test]
    fn certain_fault_on_single_qubit_gate() {
        // One qubit, one SX layer followed by a certain Pauli fault: the
        // outcome distribution stays 50/50, but every shot is resimulated.
        let s = QubitSubset::new("one", vec![0]).unwrap();
        let c = Circuit::new(s, vec![Layer::Single(vec![(0, crate::circuits::Gate1Q::SX)])]).unwrap();
        let noise = NoiseSpec::Trajectory { e1: 1.0, e2: 0.0, e_idle: 0.0, e_ro: 0.0 };
        let set = sample(&c, 20_000, 1, &noise).unwrap();
        let ones = set.bitstrings.iter().filter(|&&x| x == 1).count() as f64 / 2e4;
        assert!((ones - 0.5).abs() < 0.02);
    }

    #[test]
    fn patched_circuit_samples_from_product() {
        let c = circuit(10, 6, 8);
        let q = c.subset().qubits().to_vec();
        let pc = apply_patch(&c, &PatchSpec::new(vec![q[..5].to_vec(), q[5..].to_vec()])).unwrap();
        let dist = IdealDistribution::new(&pc).unwrap();
        assert!(dist.is_product());
        let dense = dist.dense(26).unwrap();
        assert!((dense.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let noise = NoiseSpec::Trajectory { e1: 0.0, e2: 0.02, e_idle: 0.0, e_ro: 0.0 };
        let set = sample(&pc, 1000, 1, &noise).unwrap();
        assert!(set.bitstrings.iter().all(|&x| x < 1 << 10));
    }

    #[test]
    fn capacity_error() {
        let c = circuit(8, 2, 1);
        let err = sample_with(&Simulator::new(6), &c, 10, 1, &NoiseSpec::None).unwrap_err();
        assert!(err.is_capacity());
    }

    #[test]
    fn sample_set_rejects_out_of_range() {
        let meta = SampleMeta {
            circuit: "c".into(),
            seed: 0,
            noise: NoiseSpec::None,
        };
        assert!(SampleSet::new(3, vec![8], None, meta.clone()).is_err());
        assert!(SampleSet::new(3, vec![7], Some(vec![1.5]), meta.clone()).is_err());
        assert!(SampleSet::new(3, vec![7], Some(vec![0.5]), meta).is_ok());
    }
}
