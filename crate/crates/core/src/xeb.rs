//! Fidelity estimators and output-distribution diagnostics.

use serde::{Deserialize, Serialize};

use crate::simulator::SampleSet;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LinearXeb,
    SpecklePurity,
    ErrorModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub method: Method,
}

/// Linear cross-entropy fidelity `D·mean(p) − 1` with `stderr = 1/√N`.
///
/// The error bar is the small-fidelity leading term; it underestimates the
/// spread somewhat as the fidelity approaches 1.
pub fn linear_xeb(samples: &SampleSet) -> Result<FidelityEstimate> {
    let probs = samples
        .ideal
        .as_ref()
        .ok_or_else(|| Error::validation("samples", "ideal probabilities are not attached"))?;
    linear_xeb_from(probs, samples.num_qubits)
}

/// Linear XEB over the ideal probabilities of measured bitstrings.
pub fn linear_xeb_from(probs: &[f64], num_qubits: usize) -> Result<FidelityEstimate> {
    if probs.is_empty() {
        return Err(Error::validation("samples", "at least one sample is required"));
    }
    let n = probs.len() as f64;
    let dim = 2f64.powi(num_qubits as i32);
    let mean = probs.iter().sum::<f64>() / n;
    Ok(FidelityEstimate {
        value: dim * mean - 1.0,
        stderr: 1.0 / n.sqrt(),
        n_samples: probs.len() as u64,
        method: Method::LinearXeb,
    })
}

/// Kolmogorov-Smirnov distance between the empirical distribution of `D·p`
/// and the unit exponential, with `D = probs.len()`.
pub fn porter_thomas_test(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::validation("probabilities", "vector is empty"));
    }
    let dim = probs.len() as f64;
    let mut scaled: Vec<f64> = probs.iter().map(|&p| dim * p).collect();
    scaled.sort_by(f64::total_cmp);
    Ok(scaled
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = -(-x).exp_m1();
            let lo = i as f64 / dim;
            let hi = (i + 1) as f64 / dim;
            (cdf - lo).abs().max((hi - cdf).abs())
        })
        .fold(0.0, f64::max))
}

/// Fidelity proxy `sqrt(max(0, D²·Var(p)))` over the full output vector,
/// using the population variance.
///
/// For `p = f·p_PT + (1−f)/D` the value tends to `f`. The error bar uses the
/// fourth moment of the exponential distribution: `Var(s²) ≈ 8·s⁴/D`, so the
/// value carries a relative error of `sqrt(2/D)`.
pub fn speckle_purity(probs: &[f64]) -> Result<FidelityEstimate> {
    if probs.is_empty() {
        return Err(Error::validation("probabilities", "vector is empty"));
    }
    let dim = probs.len() as f64;
    let mean = probs.iter().sum::<f64>() / dim;
    let var = probs.iter().map(|&p| (p - mean) * (p - mean)).sum::<f64>() / dim;
    let value = (dim * dim * var).max(0.0).sqrt();
    Ok(FidelityEstimate {
        value,
        stderr: value * (2.0 / dim).sqrt(),
        n_samples: probs.len() as u64,
        method: Method::SpecklePurity,
    })
}

pub const DEFAULT_BAND: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityPoint {
    pub timestamp: f64,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub estimate: f64,
    pub band: f64,
    pub points: Vec<StabilityPoint>,
    pub pass: bool,
}

impl StabilityReport {
    /// `timestamp,value,lower,upper,verdict` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("timestamp,value,lower,upper,verdict\n");
        for p in &self.points {
            let verdict = if p.pass { "pass" } else { "fail" };
            out.push_str(&format!("{},{},{},{},{verdict}\n", p.timestamp, p.value, p.lower, p.upper));
        }
        out
    }
}

/// Check every `(timestamp, value)` point against
/// `[estimate·(1−band), estimate·(1+band)]`.
pub fn stability_check(series: &[(f64, f64)], estimate: f64, band: f64) -> Result<StabilityReport> {
    if series.is_empty() {
        return Err(Error::validation("series", "at least one point is required"));
    }
    if !(estimate > 0.0 && estimate.is_finite()) {
        return Err(Error::validation("estimate", format!("{estimate} is not positive")));
    }
    if !(band > 0.0 && band < 1.0) {
        return Err(Error::validation("band", format!("{band} is not in (0, 1)")));
    }
    let lower = estimate * (1.0 - band);
    let upper = estimate * (1.0 + band);
    let points: Vec<_> = series
        .iter()
        .map(|&(timestamp, value)| StabilityPoint {
            timestamp,
            value,
            lower,
            upper,
            pass: (lower..=upper).contains(&value),
        })
        .collect();
    let pass = points.iter().all(|p| p.pass);
    Ok(StabilityReport {
        estimate,
        band,
        points,
        pass,
    })
}

/// Parse a `timestamp,value` CSV series. A first line that does not parse as
/// numbers is taken as a header.
pub fn parse_series(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let at = format!("line {}", i + 1);
        let mut cols = line.split(',').map(str::trim);
        let (Some(t), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::parse(at, "expected two columns: timestamp,value"));
        };
        match (t.parse::<f64>(), v.parse::<f64>()) {
            (Ok(t), Ok(v)) => out.push((t, v)),
            _ if i == 0 => continue,
            _ => return Err(Error::parse(at, format!("cannot parse {line:?} as numbers"))),
        }
    }
    Ok(out)
}
