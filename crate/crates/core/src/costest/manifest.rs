//! Published classical-cost figures, kept as reference data next to our own
//! estimates.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::report::Machine;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCost {
    /// Which published table the figures come from.
    pub source: String,
    pub memory_bytes: f64,
    pub amplitude_flops: f64,
    pub samples_flops: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub experiment: String,
    pub qubits: usize,
    pub cycles: usize,
    pub fidelity: f64,
    /// Memory constraints the row is priced at.
    pub memory_bytes: Vec<f64>,
    pub reference: Vec<ReferenceCost>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub note: Option<String>,
    pub machine: Machine,
    pub shots: f64,
    pub rows: Vec<BenchmarkRow>,
}

/// Two sources disagreeing on one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub experiment: String,
    pub memory_bytes: f64,
    pub field: String,
    pub values: Vec<(String, f64)>,
}

/// A printed runtime compared with the conversion of its printed FLOPs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeCheck {
    pub experiment: String,
    pub memory_bytes: f64,
    pub samples_flops: f64,
    pub printed_s: f64,
    pub computed_s: f64,
    pub relative_difference: f64,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

type Field = fn(&ReferenceCost) -> f64;

impl BenchmarkManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: BenchmarkManifest = Error::from_json(text)?;
        m.machine.validate()?;
        for (i, row) in m.rows.iter().enumerate() {
            if !(row.fidelity > 0.0 && row.fidelity <= 1.0) {
                return Err(Error::validation(format!("rows[{i}].fidelity"), "must be in (0, 1]"));
            }
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// Cells where sources give different values for the same experiment and
    /// memory constraint.
    pub fn discrepancies(&self) -> Vec<Discrepancy> {
        let mut out = Vec::new();
        for row in &self.rows {
            let mut memories: Vec<f64> = row.reference.iter().map(|r| r.memory_bytes).collect();
            memories.sort_by(f64::total_cmp);
            memories.dedup_by(|a, b| same(*a, *b));
            for mem in memories {
                let cell: Vec<&ReferenceCost> =
                    row.reference.iter().filter(|r| same(r.memory_bytes, mem)).collect();
                let fields: [(&str, Field); 2] = [
                    ("amplitude_flops", |r| r.amplitude_flops),
                    ("samples_flops", |r| r.samples_flops),
                ];
                for (field, get) in fields {
                    let values: Vec<(String, f64)> = cell.iter().map(|r| (r.source.clone(), get(r))).collect();
                    if values.windows(2).any(|w| !same(w[0].1, w[1].1)) {
                        out.push(Discrepancy {
                            experiment: row.experiment.clone(),
                            memory_bytes: mem,
                            field: field.into(),
                            values,
                        });
                    }
                }
            }
        }
        out
    }

    /// Every printed runtime against `machine.runtime_seconds(samples_flops)`.
    pub fn runtime_checks(&self) -> Vec<RuntimeCheck> {
        self.rows
            .iter()
            .flat_map(|row| {
                row.reference.iter().filter_map(move |r| {
                    let printed = r.runtime_s?;
                    let computed = self.machine.runtime_seconds(r.samples_flops);
                    Some(RuntimeCheck {
                        experiment: row.experiment.clone(),
                        memory_bytes: r.memory_bytes,
                        samples_flops: r.samples_flops,
                        printed_s: printed,
                        computed_s: computed,
                        relative_difference: (computed - printed) / printed,
                    })
                })
            })
            .collect()
    }

    pub fn row(&self, experiment: &str) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.experiment == experiment)
    }
}
