//! Byte quantities such as `64MiB` or `9.2PB`.

use anyhow::{bail, Result};

const SUFFIXES: &[(&str, f64)] = &[
    ("KiB", 1024.0),
    ("MiB", 1048576.0),
    ("GiB", 1073741824.0),
    ("TiB", 1099511627776.0),
    ("PiB", 1125899906842624.0),
    ("KB", 1e3),
    ("MB", 1e6),
    ("GB", 1e9),
    ("TB", 1e12),
    ("PB", 1e15),
    ("B", 1.0),
];

pub fn parse_bytes(text: &str) -> Result<u64> {
    let t = text.trim();
    let (number, scale) = SUFFIXES
        .iter()
        .find_map(|&(s, f)| t.strip_suffix(s).map(|n| (n.trim(), f)))
        .unwrap_or((t, 1.0));
    let value: f64 = match number.parse() {
        Ok(v) => v,
        Err(_) => bail!("invalid memory size {text:?}: expected a number with an optional unit such as 64MiB"),
    };
    let bytes = value * scale;
    if !(bytes.is_finite() && bytes >= 0.0 && bytes < u64::MAX as f64) {
        bail!("invalid memory size {text:?}");
    }
    Ok(bytes.round() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units() {
        assert_eq!(parse_bytes("64MiB").unwrap(), 64 << 20);
        assert_eq!(parse_bytes("9.2PB").unwrap(), 9_200_000_000_000_000);
        assert_eq!(parse_bytes("128").unwrap(), 128);
        assert_eq!(parse_bytes("1 KB").unwrap(), 1000);
        assert!(parse_bytes("lots").is_err());
        assert!(parse_bytes("-1").is_err());
    }
}
