use num_complex::Complex64;

use crate::circuits::{Circuit, Layer, Matrix2};
use crate::{Error, Result};

use super::kernels::{apply_1q, apply_2q};
use super::Bits;

/// Default qubit ceiling: 2^26 amplitudes, 1 GiB of `Complex64`.
pub const DEFAULT_MAX_QUBITS: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state `|index⟩`.
    pub fn basis(n: usize, index: Bits) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn zero(n: usize) -> Self {
        StateVector::basis(n, 0)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: Bits) -> Result<Complex64> {
        if index >= self.amps.len() as Bits {
            return Err(Error::validation(
                "bitstring",
                format!("{index:#x} is out of range for {} qubits", self.n),
            ));
        }
        Ok(self.amps[index as usize])
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_single(&mut self, qubit: usize, m: &Matrix2) {
        apply_1q(&mut self.amps, qubit, m);
    }

    pub fn apply_layer(&mut self, layer: &Layer) {
        match layer {
            Layer::Single(gates) => {
                for &(q, g) in gates {
                    apply_1q(&mut self.amps, q, &g.matrix());
                }
            }
            Layer::Two { gates, .. } => {
                for g in gates {
                    apply_2q(&mut self.amps, g.a, g.b, &g.gate().matrix());
                }
            }
        }
    }
}

/// Statevector simulator with a qubit ceiling.
#[derive(Clone, Copy, Debug)]
pub struct Simulator {
    pub max_qubits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Simulator {
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl Simulator {
    pub fn new(max_qubits: usize) -> Self {
        Simulator { max_qubits }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n > self.max_qubits {
            Err(Error::Capacity {
                qubits: n,
                limit: self.max_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// `U |input⟩`.
    pub fn run_from(&self, circuit: &Circuit, input: Bits) -> Result<StateVector> {
        let n = circuit.num_qubits();
        self.check(n)?;
        if input >> n != 0 {
            return Err(Error::validation("input", format!("{input:#x} is out of range for {n} qubits")));
        }
        let mut state = StateVector::basis(n, input);
        for layer in circuit.layers() {
            state.apply_layer(layer);
        }
        Ok(state)
    }

    pub fn run(&self, circuit: &Circuit) -> Result<StateVector> {
        self.run_from(circuit, 0)
    }
}

/// `U |0…0⟩` with the default qubit ceiling.
pub fn simulate(circuit: &Circuit) -> Result<StateVector> {
    Simulator::default().run(circuit)
}

pub fn simulate_from(circuit: &Circuit, input: Bits) -> Result<StateVector> {
    Simulator::default().run_from(circuit, input)
}

/// `⟨x|U|0…0⟩`.
pub fn amplitude(circuit: &Circuit, bitstring: Bits) -> Result<Complex64> {
    simulate(circuit)?.amplitude(bitstring)
}

pub fn probabilities(circuit: &Circuit) -> Result<Vec<f64>> {
    Ok(simulate(circuit)?.probabilities())
}
