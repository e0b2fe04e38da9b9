use num_complex::Complex64;
use rayon::prelude::*;

use crate::{Error, Result};

use super::network::{Tensor, TensorNetwork};
use super::plan::ContractionPlan;

/// Reorder a tensor's axes so that its indices read `order`.
pub fn permute(t: &Tensor, order: &[usize]) -> Vec<Complex64> {
    let r = t.rank();
    debug_assert_eq!(order.len(), r);
    if order == t.indices.as_slice() {
        return t.data.clone();
    }
    // bit of the source offset that each output bit maps to
    let src_bit: Vec<usize> = order
        .iter()
        .rev()
        .map(|i| r - 1 - t.indices.iter().position(|j| j == i).expect("index present"))
        .collect();
    // per-byte lookup tables of source offsets
    let tables: Vec<[usize; 256]> = src_bit
        .chunks(8)
        .map(|bits| {
            let mut table = [0usize; 256];
            for (v, slot) in table.iter_mut().enumerate() {
                *slot = bits
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| v >> j & 1 == 1)
                    .fold(0, |acc, (_, &b)| acc | 1 << b);
            }
            table
        })
        .collect();
    let gather = |out: usize| {
        tables
            .iter()
            .enumerate()
            .fold(0, |acc, (c, table)| acc | table[(out >> (8 * c)) & 0xff])
    };
    let mut data = vec![Complex64::default(); t.data.len()];
    const CHUNK: usize = 1 << 14;
    data.par_chunks_mut(CHUNK).enumerate().for_each(|(k, chunk)| {
        for (o, slot) in chunk.iter_mut().enumerate() {
            *slot = t.data[gather(k * CHUNK + o)];
        }
    });
    data
}

/// Fix index `index` of a tensor to `value`, dropping that axis.
fn fix(t: &Tensor, index: usize, value: usize) -> Tensor {
    let Some(pos) = t.indices.iter().position(|&i| i == index) else {
        return t.clone();
    };
    let bit = t.rank() - 1 - pos;
    let low = (1usize << bit) - 1;
    let data = (0..t.data.len() / 2)
        .map(|k| t.data[((k & !low) << 1) | (value << bit) | (k & low)])
        .collect();
    let mut indices = t.indices.clone();
    indices.remove(pos);
    Tensor { indices, data }
}

/// Contract two tensors over their shared indices. Returns the result with
/// indices ordered `a`-only then `b`-only, and the multiply-adds performed.
pub fn contract_pair(a: &Tensor, b: &Tensor) -> (Tensor, u128) {
    let common: Vec<usize> = a.indices.iter().copied().filter(|i| b.indices.contains(i)).collect();
    let free_a: Vec<usize> = a.indices.iter().copied().filter(|i| !common.contains(i)).collect();
    let free_b: Vec<usize> = b.indices.iter().copied().filter(|i| !common.contains(i)).collect();
    let lhs = permute(a, &[free_a.as_slice(), &common].concat());
    let rhs = permute(b, &[common.as_slice(), &free_b].concat());
    let (m, k, n) = (1usize << free_a.len(), 1usize << common.len(), 1usize << free_b.len());
    let mut out = vec![Complex64::default(); m * n];
    let row = |i: usize, dst: &mut [Complex64]| {
        let lrow = &lhs[i * k..(i + 1) * k];
        for (l, &x) in lrow.iter().enumerate() {
            let rrow = &rhs[l * n..(l + 1) * n];
            for (d, &y) in dst.iter_mut().zip(rrow) {
                *d += x * y;
            }
        }
    };
    if m * k * n >= 1 << 16 && m > 1 {
        out.par_chunks_mut(n).enumerate().for_each(|(i, dst)| row(i, dst));
    } else {
        out.chunks_mut(n).enumerate().for_each(|(i, dst)| row(i, dst));
    }
    let indices = [free_a, free_b].concat();
    (Tensor { indices, data: out }, (m * k * n) as u128)
}

pub(crate) fn validate_steps(network: &TensorNetwork, steps: &[[usize; 2]], slices: &[usize]) -> Result<()> {
    let leaves = network.tensors.len();
    if leaves == 0 {
        return Err(Error::PlanMismatch("network has no tensors".into()));
    }
    if steps.len() != leaves - 1 {
        return Err(Error::PlanMismatch(format!(
            "{} steps for {leaves} tensors",
            steps.len()
        )));
    }
    let mut used = vec![false; leaves + steps.len()];
    for (k, &[a, b]) in steps.iter().enumerate() {
        let id = leaves + k;
        for t in [a, b] {
            if t >= id || used[t] {
                return Err(Error::PlanMismatch(format!("step {k} consumes tensor {t} out of order")));
            }
            used[t] = true;
        }
        if a == b {
            return Err(Error::PlanMismatch(format!("step {k} contracts tensor {a} with itself")));
        }
    }
    for (j, &i) in slices.iter().enumerate() {
        if i >= network.num_indices || network.open.contains(&i) || slices[..j].contains(&i) {
            return Err(Error::PlanMismatch(format!("index {i} cannot be sliced")));
        }
    }
    Ok(())
}

/// Contract a network along a plan. Returns the result tensor, with open
/// indices in network order, and the multiply-adds actually performed.
///
/// Slice assignments run in parallel and are summed in assignment order.
pub fn contract_counted(network: &TensorNetwork, plan: &ContractionPlan) -> Result<(Tensor, u128)> {
    if plan.num_leaves != network.tensors.len() {
        return Err(Error::PlanMismatch(format!(
            "plan has {} leaves, network has {} tensors",
            plan.num_leaves,
            network.tensors.len()
        )));
    }
    validate_steps(network, &plan.steps, &plan.slices)?;
    if plan.slices.len() >= usize::BITS as usize {
        return Err(Error::PlanMismatch("too many slices".into()));
    }
    let run = |assignment: usize| -> (Tensor, u128) {
        let mut pool: Vec<Option<Tensor>> = network
            .tensors
            .iter()
            .map(|t| {
                let mut t = t.clone();
                for (j, &i) in plan.slices.iter().enumerate() {
                    t = fix(&t, i, (assignment >> j) & 1);
                }
                Some(t)
            })
            .collect();
        let mut count = 0u128;
        for &[a, b] in &plan.steps {
            let ta = pool[a].take().expect("validated");
            let tb = pool[b].take().expect("validated");
            let (t, c) = contract_pair(&ta, &tb);
            count += c;
            pool.push(Some(t));
        }
        (pool.pop().flatten().expect("one tensor remains"), count)
    };
    let parts: Vec<(Tensor, u128)> = (0..1usize << plan.slices.len()).into_par_iter().map(run).collect();
    let mut iter = parts.into_iter();
    let (first, mut count) = iter.next().expect("at least one assignment");
    let mut total = permute(&first, &network.open);
    for (t, c) in iter {
        count += c;
        for (acc, v) in total.iter_mut().zip(permute(&t, &network.open)) {
            *acc += v;
        }
    }
    Ok((
        Tensor {
            indices: network.open.clone(),
            data: total,
        },
        count,
    ))
}

/// Contract a closed network to its scalar value.
pub fn contract(network: &TensorNetwork, plan: &ContractionPlan) -> Result<Complex64> {
    if !network.open.is_empty() {
        return Err(Error::PlanMismatch("network has open indices".into()));
    }
    Ok(contract_counted(network, plan)?.0.data[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ramp(indices: Vec<usize>) -> Tensor {
        let n = 1 << indices.len();
        Tensor::new(indices, (0..n).map(|k| c(k as f64, -(k as f64) / 2.0)).collect()).unwrap()
    }

    #[test]
    fn permute_matches_naive_transpose() {
        let t = ramp(vec![10, 11, 12, 13]);
        let order = [12, 10, 13, 11];
        let out = permute(&t, &order);
        for o in 0..16 {
            let bit = |p: usize| (o >> (3 - p)) & 1;
            // value of index `order[p]` is bit p of the output offset
            let src = (0..4).fold(0, |acc, q| {
                let p = order.iter().position(|&i| i == t.indices[q]).unwrap();
                acc | bit(p) << (3 - q)
            });
            assert_eq!(out[o], t.data[src]);
        }
    }

    #[test]
    fn fix_selects_the_right_half() {
        let t = ramp(vec![0, 1, 2]);
        let f = fix(&t, 1, 1);
        assert_eq!(f.indices, vec![0, 2]);
        let expected: Vec<_> = [2, 3, 6, 7].iter().map(|&k| t.data[k]).collect();
        assert_eq!(f.data, expected);
    }

    #[test]
    fn pair_contraction_is_matrix_product() {
        // A[i,j] B[j,k]
        let a = ramp(vec![0, 1]);
        let b = ramp(vec![1, 2]);
        let (r, count) = contract_pair(&a, &b);
        assert_eq!(r.indices, vec![0, 2]);
        assert_eq!(count, 8);
        for i in 0..2 {
            for k in 0..2 {
                let want: Complex64 = (0..2).map(|j| a.data[i * 2 + j] * b.data[j * 2 + k]).sum();
                assert_eq!(r.data[i * 2 + k], want);
            }
        }
    }

    #[test]
    fn outer_product_when_nothing_shared() {
        let (r, count) = contract_pair(&ramp(vec![0]), &ramp(vec![1]));
        assert_eq!(r.indices, vec![0, 1]);
        assert_eq!(count, 4);
    }
}
