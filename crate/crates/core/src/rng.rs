//! Deterministic random number generation for simulations.
//!
//! The generator is a fixed xoshiro256++ seeded through SplitMix64. Both
//! algorithms are pinned here rather than taken from a crate so that a seed
//! produces the identical draw stream on every platform and in every future
//! build; the experiment CSVs are compared byte-for-byte across reruns.

/// A seeded 64-bit generator (xoshiro256++) with a small bit buffer for
/// cheap fair coin flips.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
    bit_buf: u64,
    bits_left: u32,
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    /// Builds a generator from a 64-bit seed. Equal seeds yield identical
    /// streams.
    pub fn seeded(seed: u64) -> Self {
        let mut x = seed;
        let mut state = [0u64; 4];
        for s in &mut state {
            *s = splitmix64(&mut x);
        }
        // xoshiro must not start at the all-zero state; unreachable from
        // SplitMix64 expansion in practice, guarded anyway.
        if state == [0, 0, 0, 0] {
            state[0] = 1;
        }
        Rng {
            state,
            bit_buf: 0,
            bits_left: 0,
        }
    }

    /// Next raw 64-bit value (xoshiro256++ step).
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform integer in `[0, m)`, unbiased (Lemire's multiply-shift with
    /// rejection).
    #[inline]
    pub fn next_below(&mut self, m: u64) -> u64 {
        debug_assert!(m > 0);
        let mut x = self.next_u64();
        let mut prod = (x as u128) * (m as u128);
        let mut low = prod as u64;
        if low < m {
            let threshold = m.wrapping_neg() % m;
            while low < threshold {
                x = self.next_u64();
                prod = (x as u128) * (m as u128);
                low = prod as u64;
            }
        }
        (prod >> 64) as u64
    }

    #[inline]
    pub fn next_index(&mut self, m: usize) -> usize {
        self.next_below(m as u64) as usize
    }

    /// A fair bit. Bits are served from a buffered word, so interleaving
    /// `next_bit` with other draws changes which word the bits come from but
    /// never the determinism of the stream.
    #[inline]
    pub fn next_bit(&mut self) -> bool {
        if self.bits_left == 0 {
            self.bit_buf = self.next_u64();
            self.bits_left = 64;
        }
        let bit = self.bit_buf & 1 == 1;
        self.bit_buf >>= 1;
        self.bits_left -= 1;
        bit
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
