//! Digital error model: circuit fidelity as a product of `(1 − e)` over every
//! gate, idle slot and measured qubit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuits::{apply_patch, Circuit, Layer, PatchSpec};
use crate::device::{Coupler, DeviceProfile};
use crate::xeb::{FidelityEstimate, Method};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComponentKind {
    #[serde(rename = "1q")]
    OneQubit,
    #[serde(rename = "2q")]
    TwoQubit,
    #[serde(rename = "idle")]
    Idle,
    #[serde(rename = "readout")]
    Readout,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 4] = [
        ComponentKind::OneQubit,
        ComponentKind::TwoQubit,
        ComponentKind::Idle,
        ComponentKind::Readout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::OneQubit => "1q",
            ComponentKind::TwoQubit => "2q",
            ComponentKind::Idle => "idle",
            ComponentKind::Readout => "readout",
        }
    }
}

/// Contribution of one component kind: `log_term = Σ ln(1 − e)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetEntry {
    pub kind: ComponentKind,
    pub count: usize,
    pub mean_rate: f64,
    pub log_term: f64,
}

impl BudgetEntry {
    pub fn fidelity(&self) -> f64 {
        self.log_term.exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub contributions: Vec<BudgetEntry>,
    pub state_prep_factor: f64,
}

impl ErrorBudget {
    pub fn log_fidelity(&self) -> f64 {
        self.contributions.iter().map(|c| c.log_term).sum::<f64>() + self.state_prep_factor.ln()
    }

    pub fn fidelity(&self) -> f64 {
        self.log_fidelity().exp()
    }

    pub fn entry(&self, kind: ComponentKind) -> &BudgetEntry {
        self.contributions
            .iter()
            .find(|c| c.kind == kind)
            .expect("budget has every kind")
    }
}

/// Aligned-column text table.
impl fmt::Display for ErrorBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>8} {:>12} {:>14} {:>12}", "kind", "count", "mean_rate", "log_term", "fidelity")?;
        for c in &self.contributions {
            writeln!(
                f,
                "{:<8} {:>8} {:>12.4e} {:>14.6e} {:>12.6e}",
                c.kind.name(),
                c.count,
                c.mean_rate,
                c.log_term,
                c.fidelity()
            )?;
        }
        if self.state_prep_factor != 1.0 {
            writeln!(f, "{:<8} {:>8} {:>12} {:>14.6e} {:>12.6e}", "prep", "", "", self.state_prep_factor.ln(), self.state_prep_factor)?;
        }
        write!(f, "{:<8} {:>8} {:>12} {:>14.6e} {:>12.6e}", "total", "", "", self.log_fidelity(), self.fidelity())
    }
}

#[derive(Default)]
struct Accumulator {
    count: usize,
    rate_sum: f64,
    log_sum: f64,
}

impl Accumulator {
    fn add(&mut self, rate: f64) {
        self.count += 1;
        self.rate_sum += rate;
        self.log_sum += (-rate).ln_1p();
    }

    fn entry(self, kind: ComponentKind) -> BudgetEntry {
        BudgetEntry {
            kind,
            count: self.count,
            mean_rate: if self.count == 0 { 0.0 } else { self.rate_sum / self.count as f64 },
            log_term: self.log_sum,
        }
    }
}

/// Per-kind error budget of a circuit, with per-element rates where the
/// profile has them and mean rates otherwise.
pub fn error_budget(circuit: &Circuit, profile: &DeviceProfile, state_prep_factor: f64) -> Result<ErrorBudget> {
    if !(state_prep_factor > 0.0 && state_prep_factor <= 1.0) {
        return Err(Error::validation(
            "state_prep_factor",
            format!("{state_prep_factor} is not in (0, 1]"),
        ));
    }
    let qubits = circuit.subset().qubits();
    let [mut one, mut two, mut idle, mut ro] = [(); 4].map(|_| Accumulator::default());
    for layer in circuit.layers() {
        match layer {
            Layer::Single(gates) => {
                for &(q, _) in gates {
                    one.add(profile.e1(qubits[q])?);
                }
            }
            Layer::Two { gates, idle: idlers } => {
                for g in gates {
                    two.add(profile.e2(Coupler::new(qubits[g.a], qubits[g.b]))?);
                }
                for &q in idlers {
                    idle.add(profile.e_idle(qubits[q])?);
                }
            }
        }
    }
    for &q in qubits {
        ro.add(profile.e_ro(q)?);
    }
    Ok(ErrorBudget {
        contributions: vec![
            one.entry(ComponentKind::OneQubit),
            two.entry(ComponentKind::TwoQubit),
            idle.entry(ComponentKind::Idle),
            ro.entry(ComponentKind::Readout),
        ],
        state_prep_factor,
    })
}

/// Predicted fidelity with a state-preparation factor of 1.
pub fn predict_fidelity(circuit: &Circuit, profile: &DeviceProfile) -> Result<(FidelityEstimate, ErrorBudget)> {
    predict_fidelity_with(circuit, profile, 1.0)
}

pub fn predict_fidelity_with(
    circuit: &Circuit,
    profile: &DeviceProfile,
    state_prep_factor: f64,
) -> Result<(FidelityEstimate, ErrorBudget)> {
    let budget = error_budget(circuit, profile, state_prep_factor)?;
    let estimate = FidelityEstimate {
        value: budget.fidelity(),
        stderr: 0.0,
        n_samples: 1,
        method: Method::ErrorModel,
    };
    Ok((estimate, budget))
}

/// `F(patched) / F(full)` for the same circuit.
pub fn patch_ratio(circuit: &Circuit, spec: &PatchSpec, profile: &DeviceProfile) -> Result<f64> {
    let full = error_budget(circuit, profile, 1.0)?;
    let patched = error_budget(&apply_patch(circuit, spec)?, profile, 1.0)?;
    Ok((patched.log_fidelity() - full.log_fidelity()).exp())
}

/// Wall-clock seconds to take `shots` samples at the profile's sampling interval.
pub fn estimate_quantum_runtime(shots: u64, profile: &DeviceProfile) -> Result<f64> {
    if shots == 0 {
        return Err(Error::validation("shots", "at least one shot is required"));
    }
    Ok(shots as f64 * profile.sampling_interval_s())
}
