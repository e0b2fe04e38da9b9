use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SCHEMA_VERSION};

use super::QubitSubset;

/// Two-qubit gate pattern class. Each class is a matching of the coupler graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    A,
    B,
    C,
    D,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [Pattern::A, Pattern::B, Pattern::C, Pattern::D];

    pub fn from_char(c: char) -> Option<Pattern> {
        match c {
            'A' => Some(Pattern::A),
            'B' => Some(Pattern::B),
            'C' => Some(Pattern::C),
            'D' => Some(Pattern::D),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pattern::A => 'A',
            Pattern::B => 'B',
            Pattern::C => 'C',
            Pattern::D => 'D',
        }
    }

    /// Parse a pattern sequence such as `"ABCDCDAB"`.
    pub fn parse_sequence(text: &str) -> Result<Vec<Pattern>> {
        if text.is_empty() {
            return Err(Error::validation("pattern_sequence", "must not be empty"));
        }
        text.chars()
            .map(|c| {
                Pattern::from_char(c).ok_or_else(|| {
                    Error::validation("pattern_sequence", format!("unknown pattern label `{c}`"))
                })
            })
            .collect()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A physical qubit, addressed both by lattice coordinates and linear id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitId {
    pub linear: u32,
    pub row: u32,
    pub col: u32,
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{:03}", self.linear)
    }
}

/// An unordered qubit pair, stored with the smaller linear id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct Coupler {
    pub a: u32,
    pub b: u32,
}

impl Coupler {
    pub fn new(p: u32, q: u32) -> Coupler {
        Coupler {
            a: p.min(q),
            b: p.max(q),
        }
    }

    pub fn contains(&self, q: u32) -> bool {
        self.a == q || self.b == q
    }
}

impl From<[u32; 2]> for Coupler {
    fn from(pair: [u32; 2]) -> Self {
        Coupler::new(pair[0], pair[1])
    }
}

impl From<Coupler> for [u32; 2] {
    fn from(c: Coupler) -> Self {
        [c.a, c.b]
    }
}

impl fmt::Display for Coupler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

/// Qubit lattice with couplers between adjacent rows and a pattern label on
/// every coupler.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceTopology {
    rows: u32,
    cols: u32,
    couplers: Vec<Coupler>,
    patterns: Vec<Pattern>,
    neighbors: Vec<Vec<u32>>,
    lookup: HashMap<Coupler, usize>,
}

#[derive(Serialize, Deserialize)]
struct CouplerRecord {
    qubits: Coupler,
    pattern: Pattern,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyDocument {
    schema_version: u32,
    rows: u32,
    cols: u32,
    couplers: Vec<CouplerRecord>,
}

/// Build the diagonally coupled lattice.
///
/// Qubit `(r, c)` couples to `(r+1, c)` and to `(r+1, c-1)` on even rows or
/// `(r+1, c+1)` on odd rows. Drawn with odd rows shifted half a site to the
/// right, every coupler points either down-right or down-left; each direction
/// splits by the parity of the upper row into two matchings:
/// down-right/even = A, down-right/odd = B, down-left/even = C,
/// down-left/odd = D.
pub fn build_topology(rows: u32, cols: u32) -> DeviceTopology {
    assert!(rows >= 1 && cols >= 1, "lattice needs at least one row and column");
    let mut entries = Vec::new();
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols {
            let upper = r * cols + c;
            let diagonal = if r % 2 == 0 {
                c.checked_sub(1)
            } else {
                Some(c + 1).filter(|&d| d < cols)
            };
            let x_upper = 2 * c + r % 2;
            for lower_col in std::iter::once(c).chain(diagonal) {
                let lower = (r + 1) * cols + lower_col;
                let x_lower = 2 * lower_col + (r + 1) % 2;
                let pattern = match (x_lower > x_upper, r % 2 == 0) {
                    (true, true) => Pattern::A,
                    (true, false) => Pattern::B,
                    (false, true) => Pattern::C,
                    (false, false) => Pattern::D,
                };
                entries.push((Coupler::new(upper, lower), pattern));
            }
        }
    }
    DeviceTopology::from_parts(rows, cols, entries).expect("generated lattice is valid")
}

impl DeviceTopology {
    fn from_parts(rows: u32, cols: u32, mut entries: Vec<(Coupler, Pattern)>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::validation("rows/cols", "lattice dimensions must be positive"));
        }
        let n = rows * cols;
        entries.sort();
        let mut lookup = HashMap::with_capacity(entries.len());
        let mut neighbors = vec![Vec::new(); n as usize];
        let mut seen_by_label: HashMap<(Pattern, u32), Coupler> = HashMap::new();
        for (i, (c, p)) in entries.iter().enumerate() {
            if c.b >= n || c.a == c.b {
                return Err(Error::validation(
                    format!("couplers[{i}]"),
                    format!("coupler {c} is out of range or a self-loop"),
                ));
            }
            if lookup.insert(*c, i).is_some() {
                return Err(Error::validation(
                    format!("couplers[{i}]"),
                    format!("duplicate coupler {c}"),
                ));
            }
            for q in [c.a, c.b] {
                if let Some(prev) = seen_by_label.insert((*p, q), *c) {
                    return Err(Error::validation(
                        format!("couplers[{i}].pattern"),
                        format!("pattern {p} is not a matching: qubit {q} is on {prev} and {c}"),
                    ));
                }
            }
            neighbors[c.a as usize].push(c.b);
            neighbors[c.b as usize].push(c.a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let (couplers, patterns) = entries.into_iter().unzip();
        Ok(DeviceTopology {
            rows,
            cols,
            couplers,
            patterns,
            neighbors,
            lookup,
        })
    }

    /// Load an override document that replaces adjacency and pattern labels.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TopologyDocument = Error::from_json(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::parse(
                "schema_version",
                format!("unsupported schema version {}", doc.schema_version),
            ));
        }
        let entries = doc.couplers.into_iter().map(|r| (r.qubits, r.pattern)).collect();
        Self::from_parts(doc.rows, doc.cols, entries)
    }

    pub fn to_json(&self) -> String {
        let doc = TopologyDocument {
            schema_version: SCHEMA_VERSION,
            rows: self.rows,
            cols: self.cols,
            couplers: self
                .couplers
                .iter()
                .zip(&self.patterns)
                .map(|(&qubits, &pattern)| CouplerRecord { qubits, pattern })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("topology serializes")
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn num_qubits(&self) -> usize {
        (self.rows * self.cols) as usize
    }

    pub fn qubit(&self, linear: u32) -> Option<QubitId> {
        (linear < self.rows * self.cols).then(|| QubitId {
            linear,
            row: linear / self.cols,
            col: linear % self.cols,
        })
    }

    pub fn qubit_at(&self, row: u32, col: u32) -> Option<QubitId> {
        (row < self.rows && col < self.cols).then(|| QubitId {
            linear: row * self.cols + col,
            row,
            col,
        })
    }

    pub fn couplers(&self) -> &[Coupler] {
        &self.couplers
    }

    /// Couplers together with their pattern labels, in sorted coupler order.
    pub fn labeled_couplers(&self) -> impl Iterator<Item = (Coupler, Pattern)> + '_ {
        self.couplers.iter().copied().zip(self.patterns.iter().copied())
    }

    pub fn pattern_of(&self, coupler: Coupler) -> Option<Pattern> {
        self.lookup.get(&coupler).map(|&i| self.patterns[i])
    }

    pub fn has_coupler(&self, p: u32, q: u32) -> bool {
        self.lookup.contains_key(&Coupler::new(p, q))
    }

    pub fn neighbors(&self, q: u32) -> &[u32] {
        self.neighbors.get(q as usize).map_or(&[], Vec::as_slice)
    }

    /// Returns the first qubit (in the given order) not reachable from the
    /// first element through couplers inside `qubits`, or `None` when the set
    /// is connected.
    pub fn first_stranded(&self, qubits: &[u32]) -> Option<u32> {
        let first = *qubits.first()?;
        let members: BTreeSet<u32> = qubits.iter().copied().collect();
        let mut seen = BTreeSet::from([first]);
        let mut queue = VecDeque::from([first]);
        while let Some(q) = queue.pop_front() {
            for &p in self.neighbors(q) {
                if members.contains(&p) && seen.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        qubits.iter().copied().find(|q| !seen.contains(q))
    }

    /// Qubits in breadth-first order from the lattice center; every prefix is
    /// a connected set.
    pub fn bfs_from_center(&self) -> Vec<u32> {
        let start = (self.rows / 2) * self.cols + self.cols / 2;
        let mut order = vec![start];
        let mut seen = vec![false; self.num_qubits()];
        seen[start as usize] = true;
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for &p in self.neighbors(q) {
                if !seen[p as usize] {
                    seen[p as usize] = true;
                    order.push(p);
                }
            }
        }
        order
    }
}

/// Couplers labelled `label` with both endpoints in `subset`, in coupler order.
pub fn pattern_layer(topology: &DeviceTopology, subset: &QubitSubset, label: Pattern) -> Vec<Coupler> {
    topology
        .labeled_couplers()
        .filter(|&(c, p)| p == label && subset.contains(c.a) && subset.contains(c.b))
        .map(|(c, _)| c)
        .collect()
}
