//! Sample files: a JSON header line followed by one `<hex>[ <probability>]`
//! record per shot.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SCHEMA_VERSION};

use super::{Bits, SampleMeta, SampleSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleHeader {
    pub schema_version: u32,
    pub num_qubits: usize,
    pub shots: usize,
    pub has_probabilities: bool,
    pub meta: SampleMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_digest: Option<String>,
}

pub fn write_samples(set: &SampleSet, run_digest: Option<&str>) -> String {
    let header = SampleHeader {
        schema_version: SCHEMA_VERSION,
        num_qubits: set.num_qubits,
        shots: set.len(),
        has_probabilities: set.ideal.is_some(),
        meta: set.meta.clone(),
        run_digest: run_digest.map(str::to_owned),
    };
    let width = set.num_qubits.div_ceil(4).max(1);
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for (i, x) in set.bitstrings.iter().enumerate() {
        match &set.ideal {
            Some(p) => out.push_str(&format!("{x:0width$x} {}\n", p[i])),
            None => out.push_str(&format!("{x:0width$x}\n")),
        }
    }
    out
}

pub fn read_samples(text: &str) -> Result<(SampleHeader, SampleSet)> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| Error::parse("line 1", "missing header"))?;
    let header: SampleHeader = Error::from_json(first).map_err(|e| match e {
        Error::Parse { path, message } => Error::parse(format!("header.{path}"), message),
        other => other,
    })?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::validation(
            "header.schema_version",
            format!("unsupported version {}", header.schema_version),
        ));
    }
    let mut bitstrings = Vec::with_capacity(header.shots);
    let mut probs = Vec::with_capacity(if header.has_probabilities { header.shots } else { 0 });
    for (i, line) in lines.enumerate() {
        let at = format!("line {}", i + 2);
        let mut fields = line.split_whitespace();
        let Some(hex) = fields.next() else { continue };
        let x = Bits::from_str_radix(hex, 16).map_err(|e| Error::parse(&at, format!("bitstring {hex:?}: {e}")))?;
        bitstrings.push(x);
        match (fields.next(), header.has_probabilities) {
            (Some(p), true) => probs.push(
                p.parse::<f64>()
                    .map_err(|e| Error::parse(&at, format!("probability {p:?}: {e}")))?,
            ),
            (None, false) => {}
            (None, true) => return Err(Error::parse(&at, "missing probability")),
            (Some(_), false) => return Err(Error::parse(&at, "unexpected probability")),
        }
        if fields.next().is_some() {
            return Err(Error::parse(&at, "trailing fields"));
        }
    }
    if bitstrings.len() != header.shots {
        return Err(Error::validation(
            "header.shots",
            format!("header declares {} shots, file has {}", header.shots, bitstrings.len()),
        ));
    }
    let ideal = header.has_probabilities.then_some(probs);
    let set = SampleSet::new(header.num_qubits, bitstrings, ideal, header.meta.clone())?;
    Ok((header, set))
}
