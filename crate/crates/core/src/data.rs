//! Bundled data files and the directory override used by the CLI.
//!
//! Names resolve in this order: an existing file path, `<dir>/<kind>/<name>.json`
//! when a data directory is configured, then the copy compiled into the crate.

use std::path::{Path, PathBuf};

use crate::costest::BenchmarkManifest;
use crate::device::{load_profile, DeviceProfile, DeviceTopology, SubsetDocument};
use crate::{Error, Result};

/// Environment variable naming a directory that overrides bundled data.
pub const DATA_DIR_ENV: &str = "RCS_DATA_DIR";

const PROFILES: &[(&str, &str)] = &[("zcz3-mean", include_str!("../data/zcz3-mean.json"))];

const SUBSETS: &[(&str, &str)] = &[
    ("subset31", include_str!("../data/subset31.json")),
    ("subset83", include_str!("../data/subset83.json")),
    ("full105", include_str!("../data/full105.json")),
];

const BENCHMARKS: &str = include_str!("../data/benchmarks.json");

pub fn bundled_profile(name: &str) -> Result<DeviceProfile> {
    let text = lookup(PROFILES, name, "profile")?;
    load_profile(text)
}

pub fn bundled_subset(name: &str) -> Result<SubsetDocument> {
    let text = lookup(SUBSETS, name, "subset")?;
    SubsetDocument::from_json(text)
}

pub fn bundled_benchmarks() -> BenchmarkManifest {
    BenchmarkManifest::from_json(BENCHMARKS).expect("bundled benchmark manifest is valid")
}

fn lookup(table: &[(&str, &'static str)], name: &str, kind: &str) -> Result<&'static str> {
    table
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let known: Vec<_> = table.iter().map(|(n, _)| *n).collect();
            Error::validation(kind, format!("unknown {kind} `{name}` (bundled: {})", known.join(", ")))
        })
}

/// Resolves names against an optional override directory.
#[derive(Clone, Debug, Default)]
pub struct DataSource {
    dir: Option<PathBuf>,
}

impl DataSource {
    pub fn new(dir: Option<PathBuf>) -> Self {
        DataSource { dir }
    }

    /// Use the directory named by [`DATA_DIR_ENV`], if set.
    pub fn from_env() -> Self {
        DataSource::new(std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
    }

    fn read(&self, kind: &str, name: &str) -> Result<Option<String>> {
        let direct = Path::new(name);
        if direct.is_file() {
            return Ok(Some(std::fs::read_to_string(direct)?));
        }
        if let Some(dir) = &self.dir {
            let candidate = dir.join(kind).join(format!("{name}.json"));
            if candidate.is_file() {
                return Ok(Some(std::fs::read_to_string(candidate)?));
            }
        }
        Ok(None)
    }

    /// Raw text of a data file with a label saying where it came from: the
    /// file path, or `bundled:<name>`. `kind` is `profiles`, `subsets` or
    /// `benchmarks`.
    pub fn raw(&self, kind: &str, name: &str) -> Result<(String, String)> {
        let direct = Path::new(name);
        if direct.is_file() {
            return Ok((direct.display().to_string(), std::fs::read_to_string(direct)?));
        }
        if let Some(dir) = &self.dir {
            let candidate = dir.join(kind).join(format!("{name}.json"));
            if candidate.is_file() {
                return Ok((candidate.display().to_string(), std::fs::read_to_string(candidate)?));
            }
        }
        let text = match kind {
            "profiles" => lookup(PROFILES, name, "profile")?,
            "subsets" => lookup(SUBSETS, name, "subset")?,
            "benchmarks" if name == "benchmarks" => BENCHMARKS,
            _ => return Err(Error::validation("data", format!("unknown {kind} `{name}`"))),
        };
        Ok((format!("bundled:{name}"), text.to_owned()))
    }

    /// Raw topology override, if the data directory has one.
    pub fn topology_raw(&self) -> Result<Option<(String, String)>> {
        if let Some(dir) = &self.dir {
            let path = dir.join("topology.json");
            if path.is_file() {
                return Ok(Some((path.display().to_string(), std::fs::read_to_string(&path)?)));
            }
        }
        Ok(None)
    }

    pub fn profile(&self, name: &str) -> Result<DeviceProfile> {
        match self.read("profiles", name)? {
            Some(text) => load_profile(&text),
            None => bundled_profile(name),
        }
    }

    pub fn subset(&self, name: &str) -> Result<SubsetDocument> {
        match self.read("subsets", name)? {
            Some(text) => SubsetDocument::from_json(&text),
            None => bundled_subset(name),
        }
    }

    /// `<dir>/topology.json` when present, else the bundled lattice.
    pub fn topology(&self) -> Result<DeviceTopology> {
        if let Some(dir) = &self.dir {
            let path = dir.join("topology.json");
            if path.is_file() {
                return DeviceTopology::from_json(&std::fs::read_to_string(path)?);
            }
        }
        Ok(crate::device::zcz3_topology())
    }

    pub fn benchmarks(&self) -> Result<BenchmarkManifest> {
        match self.read("benchmarks", "benchmarks")? {
            Some(text) => BenchmarkManifest::from_json(&text),
            None => Ok(bundled_benchmarks()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{validate_subset, zcz3_topology};

    #[test]
    fn bundled_subsets_are_valid() {
        let t = zcz3_topology();
        for (name, size) in [("subset31", 31), ("subset83", 83), ("full105", 105)] {
            let doc = bundled_subset(name).unwrap();
            let s = doc.subset().unwrap();
            assert_eq!(s.len(), size);
            validate_subset(&t, &s).unwrap();
            assert_eq!(doc.approximate, name != "full105");
        }
    }

    #[test]
    fn unknown_name_lists_bundled() {
        let err = bundled_profile("nope").unwrap_err().to_string();
        assert!(err.contains("zcz3-mean"), "{err}");
    }

    #[test]
    fn benchmark_manifest_has_six_rows() {
        assert_eq!(bundled_benchmarks().rows.len(), 6);
    }
}
