//! In-place gate kernels. Every output amplitude is computed from the same
//! inputs in the same order whether or not the loop runs in parallel, so
//! results are bitwise independent of the thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuits::{Matrix2, Matrix4};

/// Work is split into blocks of at least this many amplitudes.
const BLOCK: usize = 1 << 14;

#[inline(always)]
fn mix2(m: &Matrix2, lo: &mut Complex64, hi: &mut Complex64) {
    let (a, b) = (*lo, *hi);
    *lo = m[0][0] * a + m[0][1] * b;
    *hi = m[1][0] * a + m[1][1] * b;
}

fn single_block(block: &mut [Complex64], stride: usize, m: &Matrix2) {
    for chunk in block.chunks_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
            mix2(m, x, y);
        }
    }
}

pub fn apply_1q(amps: &mut [Complex64], qubit: usize, m: &Matrix2) {
    let stride = 1usize << qubit;
    let block = (2 * stride).max(BLOCK);
    if amps.len() <= BLOCK {
        single_block(amps, stride, m);
    } else if block <= amps.len() / 2 {
        amps.par_chunks_mut(block).for_each(|b| single_block(b, stride, m));
    } else {
        for chunk in amps.chunks_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            lo.par_chunks_mut(BLOCK)
                .zip(hi.par_chunks_mut(BLOCK))
                .for_each(|(l, h)| l.iter_mut().zip(h.iter_mut()).for_each(|(x, y)| mix2(m, x, y)));
        }
    }
}

#[inline(always)]
fn mix4(m: &Matrix4, v: [&mut Complex64; 4]) {
    let x = [*v[0], *v[1], *v[2], *v[3]];
    for (row, out) in m.iter().zip(v) {
        *out = row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + row[3] * x[3];
    }
}

/// Apply to halves that differ in the high bit; `lo_stride` separates the
/// low-bit pairs within each half.
fn two_halves(h0: &mut [Complex64], h1: &mut [Complex64], lo_stride: usize, m: &Matrix4) {
    for (c0, c1) in h0.chunks_mut(2 * lo_stride).zip(h1.chunks_mut(2 * lo_stride)) {
        let (a00, a01) = c0.split_at_mut(lo_stride);
        let (a10, a11) = c1.split_at_mut(lo_stride);
        for (((x00, x01), x10), x11) in a00.iter_mut().zip(a01).zip(a10).zip(a11) {
            mix4(m, [x00, x01, x10, x11]);
        }
    }
}

/// Apply a two-qubit matrix on `|ab⟩` to positions `a` and `b`.
pub fn apply_2q(amps: &mut [Complex64], a: usize, b: usize, m: &Matrix4) {
    let (hi, lo) = (a.max(b), a.min(b));
    // Reorder the matrix onto |hi lo⟩.
    let m = if a == hi {
        *m
    } else {
        let p = [0, 2, 1, 3];
        let mut out = *m;
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = m[p[i]][p[j]];
            }
        }
        out
    };
    let hi_stride = 1usize << hi;
    let lo_stride = 1usize << lo;
    let run = |chunk: &mut [Complex64]| {
        let (h0, h1) = chunk.split_at_mut(hi_stride);
        two_halves(h0, h1, lo_stride, &m);
    };
    let block = (2 * hi_stride).max(BLOCK);
    if amps.len() <= BLOCK {
        amps.chunks_mut(2 * hi_stride).for_each(run);
    } else if block <= amps.len() / 2 {
        amps.par_chunks_mut(block)
            .for_each(|b| b.chunks_mut(2 * hi_stride).for_each(run));
    } else {
        let inner = (2 * lo_stride).max(BLOCK);
        for chunk in amps.chunks_mut(2 * hi_stride) {
            let (h0, h1) = chunk.split_at_mut(hi_stride);
            h0.par_chunks_mut(inner)
                .zip(h1.par_chunks_mut(inner))
                .for_each(|(x, y)| two_halves(x, y, lo_stride, &m));
        }
    }
}
