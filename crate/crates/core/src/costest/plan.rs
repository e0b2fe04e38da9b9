use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{keyed, stream};
use crate::{Error, Result};

use super::network::TensorNetwork;

/// One round of slicing: the indices added and the resulting largest tensor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceRound {
    pub indices: Vec<usize>,
    pub max_entries_log2: u32,
}

/// A binary contraction tree with optional slicing.
///
/// Steps are in single-assignment form: leaves are ids `0..num_leaves` and
/// step `k` produces id `num_leaves + k`. Every index has dimension 2, so
/// costs and sizes are stored as base-2 exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionPlan {
    pub num_leaves: usize,
    pub steps: Vec<[usize; 2]>,
    pub slices: Vec<usize>,
    pub slice_rounds: Vec<SliceRound>,
    /// Multiply-adds of each step for one slice assignment.
    pub step_cost_log2: Vec<u32>,
    /// Entries of each step's result for one slice assignment.
    pub step_size_log2: Vec<u32>,
    /// Largest tensor, leaves included, for one slice assignment.
    pub max_entries_log2: u32,
    pub memory_limit_bytes: Option<u64>,
    pub seed: u64,
    pub restart: usize,
}

impl ContractionPlan {
    pub fn num_slices(&self) -> f64 {
        2f64.powi(self.slices.len() as i32)
    }

    /// `2^|slices| · Σ 2^cost` as an exact integer when it fits in `u128`.
    pub fn complex_flops_exact(&self) -> Option<u128> {
        let s = self.slices.len() as u32;
        self.step_cost_log2.iter().try_fold(0u128, |acc, &c| {
            let e = c.checked_add(s).filter(|&e| e < 128)?;
            acc.checked_add(1u128 << e)
        })
    }

    pub fn complex_flops(&self) -> f64 {
        self.num_slices() * self.step_cost_log2.iter().map(|&c| 2f64.powi(c as i32)).sum::<f64>()
    }

    pub fn max_intermediate_entries(&self) -> f64 {
        2f64.powi(self.max_entries_log2 as i32)
    }

    /// Eight bytes per entry, the size of a single-precision complex number.
    pub fn max_intermediate_bytes(&self) -> f64 {
        8.0 * self.max_intermediate_entries()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub seed: u64,
    pub restarts: usize,
    pub memory_limit_bytes: Option<u64>,
    /// Upper bound on sweeps of local subtree rotations per restart.
    pub rotation_passes: usize,
    /// Scale of the Gumbel noise added to step costs on restarts after the first.
    pub temperature: f64,
}

impl OptimizeOptions {
    pub fn new(seed: u64, restarts: usize) -> Self {
        OptimizeOptions {
            seed,
            restarts,
            memory_limit_bytes: None,
            rotation_passes: 8,
            temperature: 1.0,
        }
    }

    pub fn with_memory_limit(mut self, bytes: Option<u64>) -> Self {
        self.memory_limit_bytes = bytes;
        self
    }
}

fn union_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
        n += 1;
    }
    n + (a.len() - i) + (b.len() - j)
}

/// Indices on exactly one of the two sorted sets.
fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn pow2(e: usize) -> f64 {
    2f64.powi(e as i32)
}

#[derive(PartialEq)]
struct Candidate {
    score: f64,
    size: usize,
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // reversed so that `BinaryHeap` pops the cheapest candidate
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(other.size.cmp(&self.size))
            .then(other.a.cmp(&self.a))
            .then(other.b.cmp(&self.b))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn push_candidate(
    heap: &mut BinaryHeap<Candidate>,
    sets: &[Vec<usize>],
    a: usize,
    b: usize,
    noise: &mut Option<(&mut ChaCha8Rng, f64)>,
) {
    let (a, b) = (a.min(b), a.max(b));
    let u = union_len(&sets[a], &sets[b]);
    let size = 2 * u - sets[a].len() - sets[b].len();
    let mut score = u as f64;
    if let Some((rng, t)) = noise {
        let g = -(-rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).ln();
        score += *t * g;
    }
    heap.push(Candidate { score, size, a, b });
}

/// Greedy pairwise ordering: repeatedly contract the pair of tensors sharing
/// an index whose step cost is lowest, breaking ties by result size.
/// Disconnected components are joined smallest-first at the end.
fn greedy(leaves: &[Vec<usize>], num_indices: usize, mut noise: Option<(&mut ChaCha8Rng, f64)>) -> Vec<[usize; 2]> {
    let mut sets: Vec<Vec<usize>> = leaves.to_vec();
    let mut alive = vec![true; leaves.len()];
    let mut owners = vec![Vec::with_capacity(2); num_indices];
    for (t, s) in leaves.iter().enumerate() {
        for &i in s {
            owners[i].push(t);
        }
    }
    let mut heap = BinaryHeap::new();
    for o in &owners {
        if let [a, b] = o[..] {
            push_candidate(&mut heap, &sets, a, b, &mut noise);
        }
    }
    let mut steps = Vec::with_capacity(leaves.len().saturating_sub(1));
    let mut remaining = leaves.len();
    while remaining > 1 {
        let (a, b) = match heap.pop() {
            Some(c) if alive[c.a] && alive[c.b] => (c.a, c.b),
            Some(_) => continue,
            None => {
                let mut live: Vec<usize> = (0..sets.len()).filter(|&t| alive[t]).collect();
                live.sort_by_key(|&t| (sets[t].len(), t));
                (live[0].min(live[1]), live[0].max(live[1]))
            }
        };
        let merged = sym_diff(&sets[a], &sets[b]);
        let id = sets.len();
        alive[a] = false;
        alive[b] = false;
        alive.push(true);
        for &i in &merged {
            for o in owners[i].iter_mut() {
                if *o == a || *o == b {
                    *o = id;
                }
            }
        }
        sets.push(merged);
        steps.push([a, b]);
        remaining -= 1;
        let neighbors: Vec<usize> = sets[id]
            .iter()
            .flat_map(|&i| owners[i].iter().copied())
            .filter(|&o| o != id)
            .collect();
        for nb in neighbors {
            push_candidate(&mut heap, &sets, nb, id, &mut noise);
        }
    }
    steps
}

/// Arena form of a contraction tree used by the local search.
struct Tree {
    children: Vec<[usize; 2]>,
    sets: Vec<Vec<usize>>,
    num_leaves: usize,
    root: usize,
}

impl Tree {
    fn new(leaves: &[Vec<usize>], steps: &[[usize; 2]]) -> Self {
        let mut sets = leaves.to_vec();
        let mut children = vec![[usize::MAX; 2]; leaves.len()];
        for &[a, b] in steps {
            sets.push(sym_diff(&sets[a], &sets[b]));
            children.push([a, b]);
        }
        Tree {
            root: sets.len() - 1,
            children,
            sets,
            num_leaves: leaves.len(),
        }
    }

    fn is_leaf(&self, t: usize) -> bool {
        t < self.num_leaves
    }

    fn step_cost(&self, a: usize, b: usize) -> f64 {
        pow2(union_len(&self.sets[a], &self.sets[b]))
    }

    /// Try the two rotations of node `p` around its internal child `side`,
    /// keeping the best if it lowers the cost of the two affected steps.
    fn rotate(&mut self, p: usize, side: usize) -> bool {
        let y = self.children[p][side];
        if self.is_leaf(y) {
            return false;
        }
        let x = self.children[p][1 - side];
        let [b, c] = self.children[y];
        let old = self.step_cost(b, c) + self.step_cost(x, y);
        let sets = &self.sets;
        let option = |keep: usize, pair: usize| {
            let inner = sym_diff(&sets[x], &sets[pair]);
            pow2(union_len(&sets[x], &sets[pair])) + pow2(union_len(&inner, &sets[keep]))
        };
        let with_b = option(c, b);
        let with_c = option(b, c);
        let (best, pair, keep) = if with_b <= with_c { (with_b, b, c) } else { (with_c, c, b) };
        if best < old {
            self.sets[y] = sym_diff(&self.sets[x], &self.sets[pair]);
            self.children[y] = [x, pair];
            self.children[p] = [y, keep];
            true
        } else {
            false
        }
    }

    fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((t, expanded)) = stack.pop() {
            if self.is_leaf(t) {
                continue;
            }
            if expanded {
                out.push(t);
            } else {
                stack.push((t, true));
                stack.push((self.children[t][1], false));
                stack.push((self.children[t][0], false));
            }
        }
        out
    }

    fn optimize(&mut self, passes: usize) {
        for _ in 0..passes {
            let mut improved = false;
            for p in self.postorder() {
                improved |= self.rotate(p, 1);
                improved |= self.rotate(p, 0);
            }
            if !improved {
                break;
            }
        }
    }

    /// Renumber internal nodes in post-order, giving single-assignment steps.
    fn steps(&self) -> Vec<[usize; 2]> {
        let order = self.postorder();
        let mut id = vec![0; self.sets.len()];
        for (t, slot) in id.iter_mut().enumerate().take(self.num_leaves) {
            *slot = t;
        }
        for (k, &t) in order.iter().enumerate() {
            id[t] = self.num_leaves + k;
        }
        order
            .iter()
            .map(|&t| [id[self.children[t][0]], id[self.children[t][1]]])
            .collect()
    }
}

/// Per-step index sets of a plan: the union each step loops over and the
/// result it produces.
struct StepSets {
    leaves: Vec<Vec<usize>>,
    unions: Vec<Vec<usize>>,
    results: Vec<Vec<usize>>,
}

impl StepSets {
    fn new(leaves: &[Vec<usize>], steps: &[[usize; 2]]) -> Self {
        let mut sets = leaves.to_vec();
        let mut unions = Vec::with_capacity(steps.len());
        for &[a, b] in steps {
            unions.push(union(&sets[a], &sets[b]));
            sets.push(sym_diff(&sets[a], &sets[b]));
        }
        StepSets {
            leaves: leaves.to_vec(),
            unions,
            results: sets.split_off(leaves.len()),
        }
    }

    fn remaining(set: &[usize], sliced: &[bool]) -> u32 {
        set.iter().filter(|&&i| !sliced[i]).count() as u32
    }

    fn max_log2(&self, sliced: &[bool]) -> u32 {
        self.leaves
            .iter()
            .chain(&self.results)
            .map(|s| Self::remaining(s, sliced))
            .max()
            .unwrap_or(0)
    }

    fn cost(&self, sliced: &[bool], num_sliced: usize) -> f64 {
        pow2(num_sliced)
            * self
                .unions
                .iter()
                .map(|u| 2f64.powi(Self::remaining(u, sliced) as i32))
                .sum::<f64>()
    }

    /// Slice indices until no tensor exceeds `2^limit` entries. Each round
    /// adds indices until the largest tensor strictly shrinks.
    fn slice(&self, limit: u32, open: &[bool]) -> Option<(Vec<usize>, Vec<SliceRound>)> {
        let mut sliced = vec![false; open.len()];
        let mut order = Vec::new();
        let mut rounds = Vec::new();
        let mut current = self.max_log2(&sliced);
        while current > limit {
            let mut added = Vec::new();
            loop {
                let biggest: Vec<&Vec<usize>> = self
                    .leaves
                    .iter()
                    .chain(&self.results)
                    .filter(|s| Self::remaining(s, &sliced) == current)
                    .collect();
                let mut hits = vec![0usize; open.len()];
                for s in &biggest {
                    for &i in s.iter() {
                        if !sliced[i] && !open[i] {
                            hits[i] += 1;
                        }
                    }
                }
                let best = (0..open.len())
                    .filter(|&i| hits[i] > 0)
                    .map(|i| {
                        sliced[i] = true;
                        let cost = self.cost(&sliced, order.len() + 1);
                        sliced[i] = false;
                        (i, hits[i], cost)
                    })
                    .min_by(|x, y| y.1.cmp(&x.1).then(x.2.total_cmp(&y.2)).then(x.0.cmp(&y.0)))?;
                sliced[best.0] = true;
                order.push(best.0);
                added.push(best.0);
                let now = self.max_log2(&sliced);
                if now < current {
                    current = now;
                    break;
                }
            }
            rounds.push(SliceRound {
                indices: added,
                max_entries_log2: current,
            });
        }
        Some((order, rounds))
    }
}

fn leaf_sets(network: &TensorNetwork) -> Vec<Vec<usize>> {
    network
        .tensors
        .iter()
        .map(|t| {
            let mut s = t.indices.clone();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Assemble a plan, computing its per-step accounting for the given slices.
pub fn plan_from_steps(
    network: &TensorNetwork,
    steps: Vec<[usize; 2]>,
    slices: Vec<usize>,
) -> Result<ContractionPlan> {
    let leaves = leaf_sets(network);
    super::contract::validate_steps(network, &steps, &slices)?;
    let sets = StepSets::new(&leaves, &steps);
    let mut sliced = vec![false; network.num_indices];
    for &i in &slices {
        sliced[i] = true;
    }
    Ok(ContractionPlan {
        num_leaves: leaves.len(),
        step_cost_log2: sets.unions.iter().map(|u| StepSets::remaining(u, &sliced)).collect(),
        step_size_log2: sets.results.iter().map(|r| StepSets::remaining(r, &sliced)).collect(),
        max_entries_log2: sets.max_log2(&sliced),
        memory_limit_bytes: None,
        steps,
        slices,
        slice_rounds: Vec::new(),
        seed: 0,
        restart: 0,
    })
}

fn candidate(
    network: &TensorNetwork,
    leaves: &[Vec<usize>],
    options: &OptimizeOptions,
    restart: usize,
    limit: Option<u32>,
) -> Option<ContractionPlan> {
    let mut rng = keyed(&[options.seed, stream::RESTART, restart as u64]);
    let noise = (restart > 0 && options.temperature > 0.0).then_some((&mut rng, options.temperature));
    let steps = greedy(leaves, network.num_indices, noise);
    let steps = if steps.is_empty() {
        steps
    } else {
        let mut tree = Tree::new(leaves, &steps);
        tree.optimize(options.rotation_passes);
        tree.steps()
    };
    let sets = StepSets::new(leaves, &steps);
    let mut open = vec![false; network.num_indices];
    for &i in &network.open {
        open[i] = true;
    }
    let (slices, rounds) = match limit {
        Some(limit) => sets.slice(limit, &open)?,
        None => (Vec::new(), Vec::new()),
    };
    let mut sliced = vec![false; network.num_indices];
    for &i in &slices {
        sliced[i] = true;
    }
    Some(ContractionPlan {
        num_leaves: leaves.len(),
        step_cost_log2: sets.unions.iter().map(|u| StepSets::remaining(u, &sliced)).collect(),
        step_size_log2: sets.results.iter().map(|r| StepSets::remaining(r, &sliced)).collect(),
        max_entries_log2: sets.max_log2(&sliced),
        memory_limit_bytes: options.memory_limit_bytes,
        steps,
        slices,
        slice_rounds: rounds,
        seed: options.seed,
        restart,
    })
}

/// Search for a cheap contraction order.
///
/// Restart 0 is the plain greedy order; later restarts perturb step costs with
/// Gumbel noise drawn from a generator keyed by `(seed, restart)`. Each tree is
/// refined by local rotations, then sliced to the memory limit if one is
/// given. Trees do not depend on the limit, so raising it never raises the
/// best cost. Ties go to the lowest restart, so the result is the same for any
/// number of worker threads.
pub fn optimize_order(network: &TensorNetwork, options: &OptimizeOptions) -> Result<ContractionPlan> {
    if options.restarts == 0 {
        return Err(Error::validation("restarts", "at least one restart is required"));
    }
    if network.tensors.is_empty() {
        return Err(Error::validation("network", "network has no tensors"));
    }
    let limit = match options.memory_limit_bytes {
        Some(bytes) => {
            let required = 8 * network.largest_tensor_entries();
            if bytes < required {
                return Err(Error::Infeasible { limit: bytes, required });
            }
            Some((bytes / 8).ilog2())
        }
        None => None,
    };
    let leaves = leaf_sets(network);
    let plans: Vec<Option<ContractionPlan>> = (0..options.restarts)
        .into_par_iter()
        .map(|r| candidate(network, &leaves, options, r, limit))
        .collect();
    plans
        .into_iter()
        .flatten()
        .min_by(|a, b| {
            a.complex_flops()
                .total_cmp(&b.complex_flops())
                .then(a.max_entries_log2.cmp(&b.max_entries_log2))
                .then(a.restart.cmp(&b.restart))
        })
        .ok_or_else(|| Error::Infeasible {
            limit: options.memory_limit_bytes.unwrap_or(0),
            required: 8 * network.largest_tensor_entries(),
        })
}
