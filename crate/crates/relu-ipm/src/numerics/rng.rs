/// Counter-based random stream.
///
/// Each output is a hash of `(seed, stream_id, counter)`, so a given
/// `(seed, stream_id)` reproduces an identical sequence bit-for-bit and
/// replications can run in parallel on disjoint streams without any shared
/// state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    key: u64,
    counter: u64,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

// splitmix64 finalizer
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let key = mix64(seed.wrapping_add(GOLDEN)) ^ mix64(stream_id.wrapping_mul(GOLDEN) ^ 0x6a09_e667_f3bc_c909);
        RngStream { seed, stream_id, key, counter: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A stream derived from this one's identity and `k`, independent of the
    /// current counter position. Used for per-replication and per-start
    /// streams.
    pub fn substream(&self, k: u64) -> RngStream {
        RngStream::new(self.seed, mix64(self.stream_id.wrapping_add(GOLDEN.wrapping_mul(k.wrapping_add(1)))))
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.key ^ self.counter.wrapping_mul(GOLDEN));
        self.counter = self.counter.wrapping_add(1);
        out
    }

    /// Uniform draw in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in (0, 1]; used where log(0) must be avoided.
    fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One standard normal draw via Box-Muller (two uniforms per draw).
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// `count` i.i.d. standard normal draws from the stream.
pub fn standard_normal(stream: &mut RngStream, count: usize) -> Vec<f64> {
    (0..count).map(|_| stream.next_normal()).collect()
}
