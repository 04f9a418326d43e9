//! Deterministic shared randomness, addressable by `(seed, stream, index)`.
//!
//! Encoder and decoder never exchange random state; both derive every noise
//! variable from a common seed through a pure keyed function. The generator
//! is counter-based — a strong 64-bit mixing function of the key — so
//! candidate `n` is computable in O(1) without generating candidates
//! `1..n-1`, which is exactly what the decoder needs to reconstruct a
//! selected candidate from its index alone.

use rand::RngCore;
use thiserror::Error;

/// Tag separating conceptually distinct noise sources.
///
/// Algorithms are coupled by construction when they read the same stream
/// (e.g. ORC and PFR consume identical inter-arrival exponentials), and
/// independent when they do not (candidate values vs. acceptance noise).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    /// Proposal candidates `Z_n`.
    CandidateValues = 0,
    /// Poisson inter-arrival exponentials `S_n` and the Gumbels `-ln S_n`.
    ArrivalTimes = 1,
    /// Dither uniforms `U_n` for quantization-based candidates.
    Dither = 2,
    /// Acceptance uniforms for rejection-style tests.
    SelectionNoise = 3,
}

/// Address of a single pseudorandom variate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub stream: Stream,
    /// 1-based counter within the stream.
    pub index: u64,
}

impl StreamKey {
    pub fn new(seed: u64, stream: Stream, index: u64) -> Self {
        Self {
            seed,
            stream,
            index,
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a well-mixed bijection on 64-bit words.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Raw keyed 64-bit word. Pure in the key; O(1) for any index.
#[inline]
pub fn bits(key: StreamKey) -> u64 {
    // Per-(seed, stream) lane offset, then a Weyl step per index — the
    // SplitMix64 construction, which passes standard statistical batteries.
    let lane = mix64(key.seed ^ GOLDEN.wrapping_mul(key.stream as u64 + 1));
    mix64(lane.wrapping_add(GOLDEN.wrapping_mul(key.index)))
}

/// Uniform draw on [0,1) with the full 53 bits of mantissa entropy, so that
/// downstream log transforms keep resolution near both endpoints.
#[inline]
pub fn uniform(key: StreamKey) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (bits(key) >> 11) as f64 * SCALE
}

/// Rate-1 exponential draw.
#[inline]
pub fn exponential(key: StreamKey) -> f64 {
    exponential_from_uniform(uniform(key))
}

/// Standard Gumbel draw, defined as `-ln E` for the key's exponential `E`.
/// The identity `G = -ln S` is exact draw-by-draw, so Gumbel-argmax and
/// exponential-argmin selections coincide on shared streams.
#[inline]
pub fn gumbel(key: StreamKey) -> f64 {
    -exponential(key).ln()
}

// -ln(1-u) via ln_1p: exact 0 at u = 0, no infinity at the representable
// boundary below 1.
#[inline]
pub(crate) fn exponential_from_uniform(u: f64) -> f64 {
    -(-u).ln_1p()
}

/// Derives an effectively independent child seed from a parent seed and a
/// path of coordinates (experiment cell indices, target number, ...).
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut s = mix64(seed ^ 0xA076_1D64_78BD_642F);
    for &p in path {
        s = mix64(s ^ GOLDEN.wrapping_mul(p.wrapping_add(1)));
    }
    s
}

/// The randomness shared by encoder and decoder: a bare seed plus keyed
/// accessors. Copyable and stateless; all draws are pure functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SharedRandomness {
    pub seed: u64,
}

impl SharedRandomness {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    #[inline]
    pub fn uniform(&self, stream: Stream, index: u64) -> f64 {
        uniform(StreamKey::new(self.seed, stream, index))
    }

    #[inline]
    pub fn exponential(&self, stream: Stream, index: u64) -> f64 {
        exponential(StreamKey::new(self.seed, stream, index))
    }

    #[inline]
    pub fn gumbel(&self, stream: Stream, index: u64) -> f64 {
        gumbel(StreamKey::new(self.seed, stream, index))
    }

    /// Vector draw for step `n`: coordinate `i` lives at index
    /// `(n-1)*dim + i + 1`, so scalar streams (`dim = 1`) coincide with
    /// `index = n`.
    #[inline]
    pub fn uniform_coords(&self, stream: Stream, n: u64, out: &mut [f64]) {
        let dim = out.len() as u64;
        let base = (n - 1) * dim;
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.uniform(stream, base + i as u64 + 1);
        }
    }

    /// Sequential `RngCore` view of one stream, for library samplers that
    /// need a stateful generator (e.g. Gamma rejection sampling).
    pub fn rng(&self, stream: Stream) -> KeyedRng {
        KeyedRng {
            shared: *self,
            stream,
            counter: 0,
        }
    }
}

/// Sequential generator walking one keyed stream. Single-owner state; the
/// underlying draws remain pure functions of `(seed, stream, counter)`.
#[derive(Clone, Debug)]
pub struct KeyedRng {
    shared: SharedRandomness,
    stream: Stream,
    counter: u64,
}

impl RngCore for KeyedRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        bits(StreamKey::new(self.shared.seed, self.stream, self.counter))
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let word = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&word[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RandomnessError {
    #[error("arrival budget exhausted: requested arrival {requested} of {total}")]
    BudgetExhausted { requested: u64, total: u64 },
}

/// How successive arrival times accumulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrivalMode {
    /// Plain Poisson process: `T_n = T_{n-1} + S_n`.
    PfrCumulative,
    /// Budgeted search over `total` candidates: the n-th gap is stretched by
    /// `total/(total-n+1)`, turning the running sum into the n-th smallest
    /// of `total` i.i.d. exponentials.
    OrcWeighted { total: u64 },
}

/// Weight applied to the n-th inter-arrival gap in budgeted mode (1-based
/// `n <= total`). The first gap has weight 1 and the last weight `total`.
#[inline]
pub fn orc_weight(n: u64, total: u64) -> f64 {
    debug_assert!(n >= 1 && n <= total);
    total as f64 / (total - n + 1) as f64
}

/// Stateful arrival-time accumulator over the [`Stream::ArrivalTimes`]
/// stream. Both modes consume the identical exponential sequence `S_n`, so
/// budgeted and unbudgeted searches can be coupled exactly.
#[derive(Clone, Debug)]
pub struct ArrivalGenerator {
    shared: SharedRandomness,
    mode: ArrivalMode,
    n: u64,
    t: f64,
}

impl ArrivalGenerator {
    pub fn new(shared: SharedRandomness, mode: ArrivalMode) -> Self {
        Self {
            shared,
            mode,
            n: 0,
            t: 0.0,
        }
    }

    /// Arrivals drawn so far.
    pub fn step(&self) -> u64 {
        self.n
    }

    /// Current cumulative arrival time (0 before the first arrival).
    pub fn time(&self) -> f64 {
        self.t
    }

    /// Draws the next arrival and returns the new cumulative time.
    pub fn next_arrival(&mut self) -> Result<f64, RandomnessError> {
        let n = self.n + 1;
        let weight = match self.mode {
            ArrivalMode::PfrCumulative => 1.0,
            ArrivalMode::OrcWeighted { total } => {
                if n > total {
                    return Err(RandomnessError::BudgetExhausted {
                        requested: n,
                        total,
                    });
                }
                orc_weight(n, total)
            }
        };
        let s = self.shared.exponential(Stream::ArrivalTimes, n);
        self.n = n;
        self.t += weight * s;
        Ok(self.t)
    }
}
