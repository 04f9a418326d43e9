//! Bit accounting and transport coding for selected indices.
//!
//! Costs are reported at two tiers. The *ideal* tier is what the benchmark
//! tables contain: code lengths under a Zipf index model (closed form, no
//! bits emitted) and plug-in entropy of empirical index histograms. The
//! *transport* tier actually moves bits: a self-delimiting universal integer
//! code for the index followed by fixed-rate mixed-radix packing of the
//! lattice point. An arithmetic coder over the Zipf model would close the
//! small gap between the tiers but changes no benchmark number, so it is
//! left as an extension point.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodingError {
    #[error("invalid coding input: {0}")]
    InvalidInput(String),
    #[error("malformed bit stream: {0}")]
    MalformedStream(String),
}

/// Riemann zeta for real `s > 1`, via Euler–Maclaurin: a short partial sum,
/// the integral tail, and three Bernoulli correction terms. Relative error
/// is far below 1e-9 over the λ range produced by [`zipf_lambda`]
/// (worst case near s = 1 where the tail dominates).
pub fn zeta(s: f64) -> Result<f64, CodingError> {
    if !(s > 1.0) {
        return Err(CodingError::InvalidInput(format!(
            "zeta requires s > 1, got {s}"
        )));
    }
    const N: u32 = 64;
    let n = f64::from(N);
    let partial: f64 = (1..=N).map(|k| f64::from(k).powf(-s)).sum();
    let tail = n.powf(1.0 - s) / (s - 1.0) - 0.5 * n.powf(-s);
    // B_2/2! = 1/12, B_4/4! = -1/720, B_6/6! = 1/30240, each multiplying
    // rising factorials of s.
    let c1 = s / 12.0 * n.powf(-s - 1.0);
    let c2 = -s * (s + 1.0) * (s + 2.0) / 720.0 * n.powf(-s - 3.0);
    let c3 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 * n.powf(-s - 5.0);
    Ok(partial + tail + c1 + c2 + c3)
}

/// Index model matched to a coding budget: the exponent that minimizes the
/// worst-case expected Zipf code length when the index entropy is about
/// `c_bits`, namely `lambda = 1 + 1/(c_bits + e^{-1} log2 e + 1)`.
pub fn zipf_lambda(c_bits: f64) -> f64 {
    const EXP_LOG2E: f64 = 0.530_737_845_423_043; // e^{-1} * log2 e
    assert!(
        c_bits >= 0.0 && c_bits.is_finite(),
        "coding budget must be >= 0, got {c_bits}"
    );
    1.0 + 1.0 / (c_bits + EXP_LOG2E + 1.0)
}

/// Power-law distribution `p(n) = n^{-lambda} / zeta(lambda)` over the
/// positive integers, used as the index model for entropy coding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZipfModel {
    lambda: f64,
    log2_zeta: f64,
}

impl ZipfModel {
    pub fn new(lambda: f64) -> Result<Self, CodingError> {
        let z = zeta(lambda)?;
        Ok(Self {
            lambda,
            log2_zeta: z.log2(),
        })
    }

    /// Model matched to a `c_bits` coding budget via [`zipf_lambda`].
    pub fn for_budget(c_bits: f64) -> Self {
        Self::new(zipf_lambda(c_bits)).expect("zipf_lambda always exceeds 1")
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Ideal code length for index `n`:
    /// `lambda * log2 n + log2 zeta(lambda)` bits.
    pub fn code_length(&self, n: u64) -> f64 {
        assert!(n >= 1, "indices are positive");
        self.lambda * (n as f64).log2() + self.log2_zeta
    }
}

/// Plug-in entropy of a count histogram, in bits: `-sum f_i log2 f_i` over
/// nonzero frequencies.
pub fn entropy_bits(histogram: &[u64]) -> Result<f64, CodingError> {
    let total: u64 = histogram.iter().sum();
    if total == 0 {
        return Err(CodingError::InvalidInput("histogram has no mass".into()));
    }
    let t = total as f64;
    let h: f64 = histogram
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / t;
            -f * f.log2()
        })
        .sum();
    // A point mass sums to -0.0; report entropy as a clean zero.
    Ok(if h == 0.0 { 0.0 } else { h })
}

// ---------------------------------------------------------------------------
// Bit transport
// ---------------------------------------------------------------------------

/// Append-only bit buffer, most-significant bit of each byte first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitSink {
    bytes: Vec<u8>,
    len: usize,
}

impl BitSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 1 << (7 - self.len % 8);
        }
        self.len += 1;
    }

    /// Bits written so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Backing bytes; trailing bits of the last byte are zero padding.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_source(self) -> BitSource {
        BitSource {
            bytes: self.bytes,
            len: self.len,
            pos: 0,
        }
    }
}

/// Read cursor over a bit buffer written by [`BitSink`].
#[derive(Clone, Debug)]
pub struct BitSource {
    bytes: Vec<u8>,
    len: usize,
    pos: usize,
}

impl BitSource {
    /// Wraps raw bytes holding `len` valid bits.
    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Result<Self, CodingError> {
        if len > bytes.len() * 8 {
            return Err(CodingError::InvalidInput(format!(
                "{len} bits claimed but only {} bytes supplied",
                bytes.len()
            )));
        }
        Ok(Self { bytes, len, pos: 0 })
    }

    pub fn read(&mut self) -> Result<bool, CodingError> {
        if self.pos >= self.len {
            return Err(CodingError::MalformedStream(
                "read past end of stream".into(),
            ));
        }
        let bit = self.bytes[self.pos / 8] >> (7 - self.pos % 8) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    /// Bits left to read.
    pub fn remaining(&self) -> usize {
        self.len - self.pos
    }
}

/// Writes `n >= 1` self-delimitingly (Elias delta: the bit length of `n` in
/// a unary-prefixed code, then `n` without its leading one). Returns the
/// number of bits written; `n = 1` costs exactly one bit.
pub fn encode_index(n: u64, sink: &mut BitSink) -> Result<usize, CodingError> {
    if n == 0 {
        return Err(CodingError::InvalidInput("indices are positive".into()));
    }
    let start = sink.len();
    let len = 64 - n.leading_zeros() as u64; // bits in n
    let len_len = 64 - len.leading_zeros(); // bits in len
    for _ in 1..len_len {
        sink.push(false);
    }
    for b in (0..len_len).rev() {
        sink.push(len >> b & 1 == 1);
    }
    for b in (0..len - 1).rev() {
        sink.push(n >> b & 1 == 1);
    }
    Ok(sink.len() - start)
}

/// Inverts [`encode_index`].
pub fn decode_index(source: &mut BitSource) -> Result<u64, CodingError> {
    let mut zeros = 0u32;
    while !source.read()? {
        zeros += 1;
        if zeros >= 7 {
            // 7 zeros imply a length of 64+ bits to follow — no u64 needs that.
            return Err(CodingError::MalformedStream(
                "index length prefix too long".into(),
            ));
        }
    }
    let mut len = 1u64;
    for _ in 0..zeros {
        len = len << 1 | source.read()? as u64;
    }
    let mut n = 1u64;
    for _ in 1..len {
        n = n << 1 | source.read()? as u64;
    }
    Ok(n)
}

fn lattice_capacity(sides: &[u64]) -> Result<(u128, u32), CodingError> {
    let mut prod: u128 = 1;
    for &m in sides {
        if m == 0 {
            return Err(CodingError::InvalidInput(
                "lattice sides must be positive".into(),
            ));
        }
        prod = prod
            .checked_mul(m as u128)
            .ok_or_else(|| CodingError::InvalidInput("lattice volume overflows".into()))?;
    }
    let bits = if prod == 1 {
        0
    } else {
        128 - (prod - 1).leading_zeros()
    };
    Ok((prod, bits))
}

/// Writes a lattice point at the fixed rate `ceil(log2 prod(M_i))` bits:
/// mixed-radix value `sum k_i * prod_{j>i} M_j`, most-significant bit first.
/// Returns the number of bits written.
pub fn pack_lattice(k: &[i64], sides: &[u64], sink: &mut BitSink) -> Result<usize, CodingError> {
    if k.len() != sides.len() {
        return Err(CodingError::InvalidInput(format!(
            "lattice point has {} coordinates but {} sides given",
            k.len(),
            sides.len()
        )));
    }
    let (_, bits) = lattice_capacity(sides)?;
    let mut value: u128 = 0;
    for (&ki, &m) in k.iter().zip(sides) {
        if ki < 0 || ki as u64 >= m {
            return Err(CodingError::InvalidInput(format!(
                "lattice coordinate {ki} outside [0, {m})"
            )));
        }
        value = value * m as u128 + ki as u128;
    }
    for b in (0..bits).rev() {
        sink.push(value >> b & 1 == 1);
    }
    Ok(bits as usize)
}

/// Inverts [`pack_lattice`] given the same radix vector.
pub fn unpack_lattice(source: &mut BitSource, sides: &[u64]) -> Result<Vec<i64>, CodingError> {
    let (prod, bits) = lattice_capacity(sides)?;
    let mut value: u128 = 0;
    for _ in 0..bits {
        value = value << 1 | source.read()? as u128;
    }
    if value >= prod {
        return Err(CodingError::MalformedStream(format!(
            "packed value {value} exceeds lattice volume {prod}"
        )));
    }
    let mut k = vec![0i64; sides.len()];
    for (slot, &m) in k.iter_mut().zip(sides).rev() {
        *slot = (value % m as u128) as i64;
        value /= m as u128;
    }
    Ok(k)
}

/// Full transport message: `[index][lattice point]` when a lattice is
/// present, index alone otherwise. Returns total bits written.
pub fn encode_message(
    index: u64,
    lattice: Option<(&[i64], &[u64])>,
    sink: &mut BitSink,
) -> Result<usize, CodingError> {
    let mut bits = encode_index(index, sink)?;
    if let Some((k, sides)) = lattice {
        bits += pack_lattice(k, sides, sink)?;
    }
    Ok(bits)
}

/// Inverts [`encode_message`]; pass the radix vector used by the encoder
/// (or `None` for index-only messages).
pub fn decode_message(
    source: &mut BitSource,
    sides: Option<&[u64]>,
) -> Result<(u64, Option<Vec<i64>>), CodingError> {
    let index = decode_index(source)?;
    let lattice = match sides {
        Some(sides) => Some(unpack_lattice(source, sides)?),
        None => None,
    };
    Ok((index, lattice))
}
