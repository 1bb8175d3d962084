//! Scrambled Sobol low-discrepancy sequence, dimensions 1..=8.
//!
//! Gray-code construction with the classic Joe-Kuo direction numbers for
//! the first 8 dimensions, plus a seeded per-dimension digital shift
//! (XOR scramble). Deterministic for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BITS: u32 = 32;
const MAX_DIM: usize = 8;

/// (degree s, coefficient a, initial m values) per dimension >= 2.
const JOE_KUO: [(u32, u32, [u32; 5]); 7] = [
    (1, 0, [1, 0, 0, 0, 0]),
    (2, 1, [1, 3, 0, 0, 0]),
    (3, 1, [1, 3, 1, 0, 0]),
    (3, 2, [1, 1, 1, 0, 0]),
    (4, 1, [1, 1, 3, 3, 0]),
    (4, 4, [1, 3, 5, 13, 0]),
    (5, 2, [1, 1, 5, 5, 17]),
];

pub struct SobolSeq {
    dim: usize,
    // direction numbers, v[d][b] scaled into the top bits of u32
    v: Vec<[u32; BITS as usize]>,
    state: Vec<u32>,
    shift: Vec<u32>,
    index: u64,
}

impl SobolSeq {
    /// A `dim`-dimensional sequence with digital-shift scrambling from `seed`.
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM, "sobol supports 1..=8 dimensions");
        let mut v = Vec::with_capacity(dim);
        // dimension 1: van der Corput
        let mut v0 = [0u32; BITS as usize];
        for (b, slot) in v0.iter_mut().enumerate() {
            *slot = 1 << (BITS - 1 - b as u32);
        }
        v.push(v0);
        for d in 1..dim {
            let (s, a, m_init) = JOE_KUO[d - 1];
            let s = s as usize;
            let mut m = vec![0u32; BITS as usize];
            m[..s].copy_from_slice(&m_init[..s].iter().map(|&x| x).collect::<Vec<_>>());
            for k in s..BITS as usize {
                let mut mk = m[k - s] ^ (m[k - s] << s);
                for j in 1..s {
                    if (a >> (s - 1 - j)) & 1 == 1 {
                        mk ^= m[k - j] << j;
                    }
                }
                m[k] = mk;
            }
            let mut vd = [0u32; BITS as usize];
            for b in 0..BITS as usize {
                vd[b] = m[b] << (BITS - 1 - b as u32);
            }
            v.push(vd);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<u32> = (0..dim).map(|_| rng.gen::<u32>()).collect();
        SobolSeq { dim, v, state: vec![0; dim], shift, index: 0 }
    }

    /// Next point in `[0,1)^dim`.
    pub fn next_point(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        // Gray-code step: flip the direction given by the lowest zero bit
        let c = (!self.index).trailing_zeros().min(BITS - 1);
        for d in 0..self.dim {
            self.state[d] ^= self.v[d][c as usize];
            let scrambled = self.state[d] ^ self.shift[d];
            out[d] = (scrambled as f64 + 0.5) / (u32::MAX as f64 + 1.0);
        }
        self.index += 1;
    }

    /// Random access: the `k`-th point of the sequence (0-based, equal to
    /// the `k`-th output of [`Self::next_point`]). Thread-safe.
    pub fn point_at(&self, k: u64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let idx = k + 1; // next_point emits states x_1, x_2, ...
        let gray = (idx ^ (idx >> 1)) as u32;
        for d in 0..self.dim {
            let mut acc = 0u32;
            let mut bits = gray;
            while bits != 0 {
                let b = bits.trailing_zeros();
                acc ^= self.v[d][b as usize];
                bits &= bits - 1;
            }
            out[d] = ((acc ^ self.shift[d]) as f64 + 0.5) / (u32::MAX as f64 + 1.0);
        }
    }
}
