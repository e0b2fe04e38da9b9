use serde::{Deserialize, Serialize};

use crate::{Error, Result, SCHEMA_VERSION};

use super::plan::ContractionPlan;

/// Each single-precision complex operation counts as this many machine FLOPs.
pub const MACHINE_FLOPS_PER_COMPLEX: f64 = 8.0;
/// Bytes per single-precision complex entry.
pub const BYTES_PER_ENTRY: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub peak_flops: f64,
    pub efficiency: f64,
}

impl Default for Machine {
    fn default() -> Self {
        Machine {
            peak_flops: 1.685e18,
            efficiency: 0.20,
        }
    }
}

impl Machine {
    pub fn validate(&self) -> Result<()> {
        if !(self.peak_flops > 0.0 && self.peak_flops.is_finite()) {
            return Err(Error::validation("machine.peak_flops", "must be positive"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::validation("machine.efficiency", "must be in (0, 1]"));
        }
        Ok(())
    }

    /// Seconds to execute `complex_flops` single-precision complex operations.
    pub fn runtime_seconds(&self, complex_flops: f64) -> f64 {
        MACHINE_FLOPS_PER_COMPLEX * complex_flops / (self.peak_flops * self.efficiency)
    }
}

/// Cost of producing `shots` noisy samples at fidelity `fidelity`, priced as
/// `fidelity · shots · C_amp / batch_amortization`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingCost {
    pub model: String,
    pub shots: f64,
    pub fidelity: f64,
    pub batch_amortization: f64,
    pub complex_flops: f64,
    pub machine_flops: f64,
    pub runtime_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub schema_version: u32,
    /// Complex FLOPs for one amplitude.
    pub complex_flops: f64,
    /// The same count as an exact integer, when it fits.
    pub complex_flops_exact: Option<u128>,
    pub machine_flops: f64,
    pub runtime_seconds: f64,
    pub max_intermediate_entries: f64,
    pub max_intermediate_bytes: f64,
    pub memory_limit_bytes: Option<u64>,
    pub num_slices: f64,
    pub machine: Machine,
    pub sampling: SamplingCost,
}

pub const SAMPLING_MODEL: &str = "parameterized: fidelity * shots * amplitude_cost / batch_amortization";

/// Report with a batch amortization of 1.
pub fn report_cost(plan: &ContractionPlan, machine: &Machine, shots: f64, fidelity: f64) -> Result<CostReport> {
    report_cost_with(plan, machine, shots, fidelity, 1.0)
}

pub fn report_cost_with(
    plan: &ContractionPlan,
    machine: &Machine,
    shots: f64,
    fidelity: f64,
    batch_amortization: f64,
) -> Result<CostReport> {
    machine.validate()?;
    if !(shots >= 1.0 && shots.is_finite()) {
        return Err(Error::validation("shots", format!("{shots} is below 1")));
    }
    if !(fidelity > 0.0 && fidelity <= 1.0) {
        return Err(Error::validation("fidelity", format!("{fidelity} is not in (0, 1]")));
    }
    if !(batch_amortization >= 1.0 && batch_amortization.is_finite()) {
        return Err(Error::validation("batch_amortization", "must be at least 1"));
    }
    let complex_flops = plan.complex_flops();
    let sample_flops = fidelity * shots * complex_flops / batch_amortization;
    Ok(CostReport {
        schema_version: SCHEMA_VERSION,
        complex_flops,
        complex_flops_exact: plan.complex_flops_exact(),
        machine_flops: MACHINE_FLOPS_PER_COMPLEX * complex_flops,
        runtime_seconds: machine.runtime_seconds(complex_flops),
        max_intermediate_entries: plan.max_intermediate_entries(),
        max_intermediate_bytes: BYTES_PER_ENTRY * plan.max_intermediate_entries(),
        memory_limit_bytes: plan.memory_limit_bytes,
        num_slices: plan.num_slices(),
        machine: *machine,
        sampling: SamplingCost {
            model: SAMPLING_MODEL.into(),
            shots,
            fidelity,
            batch_amortization,
            complex_flops: sample_flops,
            machine_flops: MACHINE_FLOPS_PER_COMPLEX * sample_flops,
            runtime_seconds: machine.runtime_seconds(sample_flops),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(costs: Vec<u32>, slices: usize) -> ContractionPlan {
        ContractionPlan {
            num_leaves: costs.len() + 1,
            steps: (0..costs.len()).map(|k| [k, k + 1]).collect(),
            slices: (100..100 + slices).collect(),
            slice_rounds: Vec::new(),
            step_size_log2: costs.iter().map(|c| c / 2).collect(),
            step_cost_log2: costs,
            max_entries_log2: 4,
            memory_limit_bytes: None,
            seed: 0,
            restart: 0,
        }
    }

    #[test]
    fn runtime_conversion() {
        let m = Machine::default();
        assert!((m.runtime_seconds(6.5e16) - 1.543).abs() < 1e-3);
        assert!((m.runtime_seconds(1.6e19) - 379.8).abs() < 0.1);
    }

    #[test]
    fn unit_sampling_equals_amplitude_cost() {
        let r = report_cost(&plan(vec![3, 5], 1), &Machine::default(), 1.0, 1.0).unwrap();
        assert_eq!(r.complex_flops, 80.0);
        assert_eq!(r.complex_flops_exact, Some(80));
        assert_eq!(r.sampling.complex_flops, r.complex_flops);
        assert_eq!(r.machine_flops, 640.0);
        assert_eq!(r.max_intermediate_bytes, 128.0);
    }

    #[test]
    fn sampling_scales_with_fidelity_and_shots() {
        let r = report_cost_with(&plan(vec![10], 0), &Machine::default(), 1e6, 2e-3, 4.0).unwrap();
        assert!((r.sampling.complex_flops - 2e-3 * 1e6 * 1024.0 / 4.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_inputs() {
        let p = plan(vec![1], 0);
        let m = Machine::default();
        assert!(report_cost(&p, &m, 0.0, 0.5).is_err());
        assert!(report_cost(&p, &m, 1.0, 0.0).is_err());
        assert!(report_cost(&p, &m, 1.0, 1.5).is_err());
        let bad = Machine {
            peak_flops: 1e18,
            efficiency: 0.0,
        };
        assert!(report_cost(&p, &bad, 1.0, 1.0).is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let r = report_cost(&plan(vec![3, 5], 1), &Machine::default(), 1e6, 0.002).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<CostReport>(&json).unwrap(), r);
    }
}
