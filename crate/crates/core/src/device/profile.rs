use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SCHEMA_VERSION};

use super::Coupler;

/// Parameters of the iSWAP-like two-qubit unitary, in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateParams {
    pub theta: f64,
    pub phi: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub delta_minus_off: f64,
}

impl GateParams {
    /// Ideal iSWAP: full swap angle, no conditional or calibration phases.
    pub const ISWAP: GateParams = GateParams {
        theta: std::f64::consts::FRAC_PI_2,
        phi: 0.0,
        delta_plus: 0.0,
        delta_minus: 0.0,
        delta_minus_off: 0.0,
    };

    fn validate(&self, field: &str) -> Result<()> {
        let values = [
            ("theta", self.theta),
            ("phi", self.phi),
            ("delta_plus", self.delta_plus),
            ("delta_minus", self.delta_minus),
            ("delta_minus_off", self.delta_minus_off),
        ];
        for (name, v) in values {
            if !v.is_finite() {
                return Err(Error::validation(format!("{field}.{name}"), "must be finite"));
            }
        }
        Ok(())
    }
}

impl Default for GateParams {
    fn default() -> Self {
        GateParams::ISWAP
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Durations {
    pub t_1q_ns: f64,
    pub t_2q_ns: f64,
    pub t_idle_ns: f64,
    pub sampling_interval_us: f64,
}

impl Default for Durations {
    fn default() -> Self {
        Durations {
            t_1q_ns: 28.0,
            t_2q_ns: 45.0,
            t_idle_ns: 45.0,
            sampling_interval_us: 400.0,
        }
    }
}

/// Device-wide mean Pauli and readout error rates (decimal fractions).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanRates {
    pub e1: f64,
    pub e2: f64,
    pub e_ro: f64,
    pub e_idle: f64,
}

impl MeanRates {
    pub const ZERO: MeanRates = MeanRates {
        e1: 0.0,
        e2: 0.0,
        e_ro: 0.0,
        e_idle: 0.0,
    };
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitRates {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_ro: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_idle: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerEntry {
    pub qubits: Coupler,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<GateParams>,
}

/// Readout errors conditioned on the prepared state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateResolvedReadout {
    pub e0: f64,
    pub e1: f64,
}

/// Calibrated error rates and gate parameters for one device configuration.
///
/// Per-element entries take precedence over the `mean` block; an element
/// with neither is reported as missing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceProfile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<MeanRates>,
    #[serde(default)]
    pub gate_params: GateParams,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_qubit: BTreeMap<u32, QubitRates>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_coupler: Vec<CouplerEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_state_resolved: Option<StateResolvedReadout>,
    #[serde(default)]
    pub durations: Durations,
    #[serde(skip)]
    coupler_index: HashMap<Coupler, usize>,
}

fn check_rate(field: String, v: f64) -> Result<()> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::validation(field, format!("error rate {v} outside [0, 1)")))
    }
}

/// Parse and validate a profile document.
pub fn load_profile(text: &str) -> Result<DeviceProfile> {
    let mut profile: DeviceProfile = Error::from_json(text)?;
    if profile.schema_version != SCHEMA_VERSION {
        return Err(Error::parse(
            "schema_version",
            format!("unsupported schema version {}", profile.schema_version),
        ));
    }
    profile.reindex();
    profile.validate()?;
    Ok(profile)
}

impl DeviceProfile {
    /// Profile with the same rates on every element and ideal iSWAP gates.
    pub fn uniform(name: impl Into<String>, mean: MeanRates) -> Self {
        DeviceProfile {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            note: None,
            mean: Some(mean),
            gate_params: GateParams::ISWAP,
            per_qubit: BTreeMap::new(),
            per_coupler: Vec::new(),
            readout_state_resolved: None,
            durations: Durations::default(),
            coupler_index: HashMap::new(),
        }
    }

    pub fn with_gate_params(mut self, params: GateParams) -> Self {
        self.gate_params = params;
        self
    }

    pub fn with_coupler(mut self, entry: CouplerEntry) -> Self {
        match self.coupler_index.get(&entry.qubits) {
            Some(&i) => self.per_coupler[i] = entry,
            None => {
                self.coupler_index.insert(entry.qubits, self.per_coupler.len());
                self.per_coupler.push(entry);
            }
        }
        self
    }

    pub fn with_qubit(mut self, q: u32, rates: QubitRates) -> Self {
        self.per_qubit.insert(q, rates);
        self
    }

    fn reindex(&mut self) {
        self.coupler_index = self
            .per_coupler
            .iter()
            .enumerate()
            .map(|(i, e)| (e.qubits, i))
            .collect();
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = &self.mean {
            check_rate("mean.e1".into(), m.e1)?;
            check_rate("mean.e2".into(), m.e2)?;
            check_rate("mean.e_ro".into(), m.e_ro)?;
            check_rate("mean.e_idle".into(), m.e_idle)?;
        }
        self.gate_params.validate("gate_params")?;
        for (q, r) in &self.per_qubit {
            for (name, v) in [("e1", r.e1), ("e_ro", r.e_ro), ("e_idle", r.e_idle)] {
                if let Some(v) = v {
                    check_rate(format!("per_qubit.{q}.{name}"), v)?;
                }
            }
        }
        for (i, e) in self.per_coupler.iter().enumerate() {
            if let Some(v) = e.e2 {
                check_rate(format!("per_coupler[{i}].e2"), v)?;
            }
            if let Some(p) = &e.params {
                p.validate(&format!("per_coupler[{i}].params"))?;
            }
        }
        if self.coupler_index.len() != self.per_coupler.len() {
            return Err(Error::validation("per_coupler", "duplicate coupler entry"));
        }
        if let Some(r) = &self.readout_state_resolved {
            check_rate("readout_state_resolved.e0".into(), r.e0)?;
            check_rate("readout_state_resolved.e1".into(), r.e1)?;
        }
        let d = &self.durations;
        for (name, v) in [
            ("t_1q_ns", d.t_1q_ns),
            ("t_2q_ns", d.t_2q_ns),
            ("t_idle_ns", d.t_idle_ns),
            ("sampling_interval_us", d.sampling_interval_us),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!("durations.{name}"), "must be positive"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    fn missing(kind: &'static str, element: String) -> Error {
        Error::MissingRate { kind, element }
    }

    pub fn e1(&self, q: u32) -> Result<f64> {
        self.per_qubit
            .get(&q)
            .and_then(|r| r.e1)
            .or(self.mean.map(|m| m.e1))
            .ok_or_else(|| Self::missing("single-qubit", format!("qubit {q}")))
    }

    pub fn e_idle(&self, q: u32) -> Result<f64> {
        self.per_qubit
            .get(&q)
            .and_then(|r| r.e_idle)
            .or(self.mean.map(|m| m.e_idle))
            .ok_or_else(|| Self::missing("idle", format!("qubit {q}")))
    }

    /// Readout error of one qubit. State-resolved rates, when supplied, are
    /// averaged over the two outcomes.
    pub fn e_ro(&self, q: u32) -> Result<f64> {
        self.per_qubit
            .get(&q)
            .and_then(|r| r.e_ro)
            .or(self.readout_state_resolved.map(|r| 0.5 * (r.e0 + r.e1)))
            .or(self.mean.map(|m| m.e_ro))
            .ok_or_else(|| Self::missing("readout", format!("qubit {q}")))
    }

    pub fn e2(&self, coupler: Coupler) -> Result<f64> {
        self.coupler_index
            .get(&coupler)
            .and_then(|&i| self.per_coupler[i].e2)
            .or(self.mean.map(|m| m.e2))
            .ok_or_else(|| Self::missing("two-qubit", format!("coupler {coupler}")))
    }

    pub fn params(&self, coupler: Coupler) -> GateParams {
        self.coupler_index
            .get(&coupler)
            .and_then(|&i| self.per_coupler[i].params)
            .unwrap_or(self.gate_params)
    }

    /// Seconds between consecutive shots.
    pub fn sampling_interval_s(&self) -> f64 {
        self.durations.sampling_interval_us * 1e-6
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_mean_profile_values() {
        let p = crate::data::bundled_profile("zcz3-mean").unwrap();
        let m = p.mean.unwrap();
        assert_eq!(m.e1, 0.97e-3);
        assert_eq!(m.e2, 3.75e-3);
        assert_eq!(m.e_ro, 8.67e-3);
        assert_eq!(p.durations.sampling_interval_us, 400.0);
        assert_eq!(p.durations.t_1q_ns, 28.0);
        assert_eq!(p.durations.t_2q_ns, 45.0);
    }

    #[test]
    fn rate_above_one_rejected() {
        let text = r#"{"schema_version":1,"name":"bad",
            "mean":{"e1":0.001,"e2":1.2,"e_ro":0.01,"e_idle":0.001}}"#;
        match load_profile(text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "mean.e2"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_document_reports_path() {
        let text = r#"{"schema_version":1,"name":"bad",
            "mean":{"e1":0.001,"e2":"high","e_ro":0.01,"e_idle":0.001}}"#;
        match load_profile(text) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "mean.e2"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn per_element_rates_override_means() {
        let text = r#"{"schema_version":1,"name":"mixed",
            "mean":{"e1":0.001,"e2":0.004,"e_ro":0.01,"e_idle":0.001},
            "per_qubit":{"3":{"e1":0.002}},
            "per_coupler":[{"qubits":[0,7],"e2":0.006}]}"#;
        let p = load_profile(text).unwrap();
        assert_eq!(p.e1(3).unwrap(), 0.002);
        assert_eq!(p.e1(4).unwrap(), 0.001);
        assert_eq!(p.e2(Coupler::new(7, 0)).unwrap(), 0.006);
        assert_eq!(p.e2(Coupler::new(1, 8)).unwrap(), 0.004);
    }

    #[test]
    fn missing_rate_names_element() {
        let text = r#"{"schema_version":1,"name":"sparse",
            "per_qubit":{"3":{"e1":0.002}}}"#;
        let p = load_profile(text).unwrap();
        let err = p.e1(5).unwrap_err();
        assert!(err.to_string().contains("qubit 5"), "{err}");
    }

    #[test]
    fn state_resolved_readout_is_averaged() {
        let p = DeviceProfile {
            readout_state_resolved: Some(StateResolvedReadout {
                e0: 4.97e-3,
                e1: 12.37e-3,
            }),
            ..DeviceProfile::uniform("sr", MeanRates::ZERO)
        };
        assert!((p.e_ro(0).unwrap() - 8.67e-3).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_duration_rejected() {
        let text = r#"{"schema_version":1,"name":"d",
            "durations":{"t_1q_ns":0,"t_2q_ns":45,"t_idle_ns":45,"sampling_interval_us":400}}"#;
        assert!(load_profile(text).is_err());
    }
}
