//! Selection algorithms for reverse channel coding.
//!
//! Every encoder here maps `(target, proposal, shared randomness)` to a
//! discrete index — and for the lattice-based hybrid scheme, an integer
//! vector — such that a decoder holding only that message and the same seed
//! reconstructs the encoder's sample bit-exactly. The algorithms differ in
//! which message distribution they induce (and hence what it costs to
//! entropy-code) and in how many candidates they examine:
//!
//! - [`rs_encode`]: classical rejection sampling, optionally truncated to a
//!   candidate budget with a forced accept of the last candidate.
//! - [`greedy_rs_encode`]: slice-by-slice greedy acceptance; exact and
//!   index-biased toward small values (categorical only).
//! - [`mrc_encode`]: softmax/Gumbel-argmax selection over a fixed candidate
//!   pool; the index is uniform and thus maximally expensive to code.
//! - [`orc_encode`]: the same output law as [`mrc_encode`] but with the pool
//!   scored against ordered arrival times, biasing the argmin toward small
//!   indices.
//! - [`pfr_encode`]: arrival-time scoring over an unbounded candidate
//!   sequence; exact output law.
//! - [`hybrid_encode`]: arrival-time scoring over dithered lattice
//!   candidates, splitting the message into an index and a bounded integer
//!   vector.
//!
//! Scores are kept in log space throughout; ties resolve to the smallest
//! index so that coupled runs are deterministic.

use thiserror::Error;

use crate::distributions::{tvd, Categorical, ContinuousDensity, TruncatedGaussianSpec};
use crate::randomness::{ArrivalGenerator, ArrivalMode, SharedRandomness, Stream};

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("target support escapes the dither cell: {0}")]
    SupportViolation(String),
}

/// How a search ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The algorithm's own stopping rule fired (acceptance or score bound).
    Threshold,
    /// The candidate budget ran out and the best-so-far was returned.
    Budget,
}

/// Result of one encoding run.
///
/// `winning_score` is the statistic the selection was made on: the log
/// target/proposal ratio for rejection samplers, the perturbed log-ratio for
/// Gumbel argmax, and `ln t - ln(q/p)` (smaller is better) for arrival-time
/// argmin.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionOutcome<T> {
    /// Selected candidate index, 1-based. This is the (first part of the)
    /// message.
    pub index: u64,
    /// Lattice point accompanying the index in the hybrid scheme.
    pub lattice_point: Option<Vec<i64>>,
    /// Candidates examined before the search stopped; `index <= iterations`.
    pub iterations: u64,
    pub winning_score: f64,
    /// The selected sample, identical to what the decoder reconstructs.
    pub sample: T,
    pub termination: Termination,
    /// Set when no examined candidate carried target mass and the selection
    /// fell back to noise alone.
    pub degenerate_selection: bool,
}

/// Search parameters shared by the encoders.
///
/// `w_min` is a lower bound on the proposal/target density ratio
/// `inf_z p(z)/q(z)`; its validity is the caller's responsibility (an
/// overestimate silently biases samples, an underestimate only slows
/// termination). Ties always resolve to the smallest index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub w_min: f64,
    /// `None` permits algorithms to search until their stopping rule fires,
    /// which requires `w_min > 0`.
    pub max_candidates: Option<u64>,
}

impl SamplerConfig {
    pub fn unbounded(w_min: f64) -> Self {
        Self {
            w_min,
            max_candidates: None,
        }
    }

    pub fn budgeted(w_min: f64, max_candidates: u64) -> Self {
        Self {
            w_min,
            max_candidates: Some(max_candidates),
        }
    }

    fn require_wmin_positive(&self, algo: &str) -> Result<(), SamplerError> {
        if !(self.w_min > 0.0) {
            return Err(SamplerError::InvalidConfig(format!(
                "{algo} requires w_min > 0, got {}",
                self.w_min
            )));
        }
        Ok(())
    }
}

/// A target/proposal pair with deterministic candidate generation.
///
/// `candidate(shared, n)` must be a pure function of `(seed, n)` — that is
/// what lets the decoder rebuild the selected sample from the index alone.
/// `log_weight` is the exact log density ratio `ln q(z) - ln p(z)`
/// (`-inf` where the target has no mass), not merely proportional to it:
/// acceptance tests and stopping rules compare it against `w_min` directly.
pub trait Channel {
    type Point: Clone + PartialEq + std::fmt::Debug;

    fn candidate(&self, shared: &SharedRandomness, n: u64) -> Self::Point;
    fn log_weight(&self, z: &Self::Point) -> f64;
}

/// Finite-alphabet channel: categorical target and proposal over the same
/// symbol set, candidates drawn by inverse CDF from the proposal.
#[derive(Clone, Debug)]
pub struct CategoricalChannel {
    target: Categorical,
    proposal: Categorical,
    stream: Stream,
}

impl CategoricalChannel {
    /// Validates that the target is absolutely continuous w.r.t. the
    /// proposal (otherwise no density-ratio bound exists and exact samplers
    /// may never terminate).
    pub fn new(target: Categorical, proposal: Categorical) -> Result<Self, SamplerError> {
        if target.len() != proposal.len() {
            return Err(SamplerError::InvalidChannel(format!(
                "target has {} symbols, proposal {}",
                target.len(),
                proposal.len()
            )));
        }
        for (i, (&q, &p)) in target.probs().iter().zip(proposal.probs()).enumerate() {
            if q > 0.0 && p == 0.0 {
                return Err(SamplerError::InvalidChannel(format!(
                    "target mass {q} at symbol {i} outside proposal support"
                )));
            }
        }
        Ok(Self {
            target,
            proposal,
            stream: Stream::CandidateValues,
        })
    }

    pub fn target(&self) -> &Categorical {
        &self.target
    }

    pub fn proposal(&self) -> &Categorical {
        &self.proposal
    }

    /// The exact density-ratio bound `min_{z: q(z) > 0} p(z)/q(z)` for this
    /// pair — the largest `w_min` valid for it.
    pub fn optimal_wmin(&self) -> f64 {
        self.target
            .probs()
            .iter()
            .zip(self.proposal.probs())
            .filter(|(&q, _)| q > 0.0)
            .map(|(&q, &p)| p / q)
            .fold(f64::INFINITY, f64::min)
    }
}

impl Channel for CategoricalChannel {
    type Point = usize;

    fn candidate(&self, shared: &SharedRandomness, n: u64) -> usize {
        self.proposal
            .sample_inverse_cdf(shared.uniform(self.stream, n))
    }

    fn log_weight(&self, z: &usize) -> f64 {
        self.target.log_prob(*z) - self.proposal.log_prob(*z)
    }
}

/// Continuous channel with a uniform-box proposal `[0, m_1) x ... x [0, m_D)`
/// and an arbitrary density as target. Candidate `n` consumes `D` uniforms
/// laid out so that runs of different dimension never collide.
///
/// The candidate stream is configurable so that box-proposal searches can be
/// coupled draw-for-draw with dithered-lattice searches (which read the
/// dither stream).
#[derive(Clone, Debug)]
pub struct GaussianBoxChannel<T: ContinuousDensity> {
    target: T,
    sides: Vec<u64>,
    stream: Stream,
    log_volume: f64,
}

impl<T: ContinuousDensity> GaussianBoxChannel<T> {
    pub fn new(target: T, sides: Vec<u64>) -> Result<Self, SamplerError> {
        Self::with_stream(target, sides, Stream::CandidateValues)
    }

    pub fn with_stream(target: T, sides: Vec<u64>, stream: Stream) -> Result<Self, SamplerError> {
        if target.dim() != sides.len() {
            return Err(SamplerError::InvalidChannel(format!(
                "target dimension {} but {} box sides",
                target.dim(),
                sides.len()
            )));
        }
        if sides.contains(&0) {
            return Err(SamplerError::InvalidChannel(
                "box sides must be positive".into(),
            ));
        }
        for (i, ((lo, hi), &m)) in target.support_bounds().iter().zip(&sides).enumerate() {
            if *lo >= m as f64 || *hi <= 0.0 {
                return Err(SamplerError::InvalidChannel(format!(
                    "target support [{lo}, {hi}] of coordinate {i} misses the box [0, {m})"
                )));
            }
        }
        let log_volume = sides.iter().map(|&m| (m as f64).ln()).sum();
        Ok(Self {
            target,
            sides,
            stream,
            log_volume,
        })
    }

    pub fn target(&self) -> &T {
        &self.target
    }

    pub fn sides(&self) -> &[u64] {
        &self.sides
    }
}

impl<T: ContinuousDensity> Channel for GaussianBoxChannel<T> {
    type Point = Vec<f64>;

    fn candidate(&self, shared: &SharedRandomness, n: u64) -> Vec<f64> {
        let mut z = vec![0.0; self.sides.len()];
        shared.uniform_coords(self.stream, n, &mut z);
        for (zi, &m) in z.iter_mut().zip(&self.sides) {
            *zi *= m as f64;
        }
        z
    }

    fn log_weight(&self, z: &Vec<f64>) -> f64 {
        self.target.log_density(z) + self.log_volume
    }
}

/// Decoder side of every index-only scheme: rebuild the selected sample
/// from the transmitted index and the shared seed.
pub fn decode_index<C: Channel>(channel: &C, shared: &SharedRandomness, index: u64) -> C::Point {
    channel.candidate(shared, index)
}

// ---------------------------------------------------------------------------
// Rejection samplers
// ---------------------------------------------------------------------------

/// Rejection sampling: accept the first candidate whose acceptance uniform
/// falls below `w_min * q(z)/p(z)`; with a finite budget, the final
/// candidate is accepted unconditionally.
///
/// With a valid `w_min`, the acceptance probability of every step is exactly
/// `w_min`, so the index is geometric and an unbounded search terminates
/// almost surely. The budgeted variant outputs the mixture
/// `beta * p + (1-beta) * q` with `beta = (1-w_min)^(N-1)`.
pub fn rs_encode<C: Channel>(
    channel: &C,
    config: &SamplerConfig,
    shared: &SharedRandomness,
) -> Result<SelectionOutcome<C::Point>, SamplerError> {
    if !(config.w_min > 0.0 && config.w_min <= 1.0) {
        return Err(SamplerError::InvalidConfig(format!(
            "rejection sampling requires w_min in (0, 1], got {}",
            config.w_min
        )));
    }
    let ln_wmin = config.w_min.ln();
    let mut n = 0u64;
    loop {
        n += 1;
        let z = channel.candidate(shared, n);
        let lw = channel.log_weight(&z);
        if let Some(budget) = config.max_candidates {
            if n == budget {
                return Ok(SelectionOutcome {
                    index: n,
                    lattice_point: None,
                    iterations: n,
                    winning_score: lw,
                    sample: z,
                    termination: Termination::Budget,
                    degenerate_selection: false,
                });
            }
        }
        let u = shared.uniform(Stream::SelectionNoise, n);
        if u.ln() <= ln_wmin + lw {
            return Ok(SelectionOutcome {
                index: n,
                lattice_point: None,
                iterations: n,
                winning_score: lw,
                sample: z,
                termination: Termination::Threshold,
                degenerate_selection: false,
            });
        }
    }
}

/// Distance between the budgeted-rejection output law and the target:
/// `(1-w_min)^(N-1) * TVD(p, q)` for categorical pairs.
pub fn rs_truncation_tvd(
    proposal: &Categorical,
    target: &Categorical,
    w_min: f64,
    max_candidates: u64,
) -> Result<f64, SamplerError> {
    if !(w_min > 0.0 && w_min <= 1.0) {
        return Err(SamplerError::InvalidConfig(format!(
            "w_min {w_min} outside (0, 1]"
        )));
    }
    if max_candidates == 0 {
        return Err(SamplerError::InvalidConfig(
            "candidate budget must be positive".into(),
        ));
    }
    let base = tvd(proposal.probs(), target.probs())
        .map_err(|e| SamplerError::InvalidChannel(e.to_string()))?;
    Ok((1.0 - w_min).powi((max_candidates - 1) as i32) * base)
}

/// Greedy rejection sampling over a categorical pair: each round accepts
/// exactly the largest still-uncovered slice of the target that the
/// remaining proposal mass can serve, so the output is an exact draw from
/// the target and acceptance is front-loaded onto small indices.
///
/// Round `k` keeps a running record `covered` of target mass accepted in
/// earlier rounds; the proposal shrinks to the probability of reaching round
/// `k` and the acceptance probability of symbol `z` is
/// `min(1, (q(z) - covered(z)) / p_k(z))`.
pub fn greedy_rs_encode(
    channel: &CategoricalChannel,
    shared: &SharedRandomness,
) -> SelectionOutcome<usize> {
    let q = channel.target().probs();
    let p = channel.proposal().probs();
    let mut covered = vec![0.0f64; q.len()];
    let mut covered_total = 0.0f64;
    let mut n = 0u64;
    loop {
        n += 1;
        let reach = 1.0 - covered_total;
        let z = channel.candidate(shared, n);
        let pk = reach * p[z];
        let accept = if pk > 0.0 {
            ((q[z] - covered[z]) / pk).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let u = shared.uniform(Stream::SelectionNoise, n);
        if u < accept {
            return SelectionOutcome {
                index: n,
                lattice_point: None,
                iterations: n,
                winning_score: accept,
                sample: z,
                termination: Termination::Threshold,
                degenerate_selection: false,
            };
        }
        // Book the slice this round claimed (for every symbol, not just the
        // drawn one) before moving on.
        for i in 0..q.len() {
            let pki = reach * p[i];
            if pki > 0.0 {
                let a = ((q[i] - covered[i]) / pki).clamp(0.0, 1.0);
                let claimed = a * pki;
                covered[i] += claimed;
                covered_total += claimed;
            }
        }
        // Guard against covered_total creeping past 1 by round-off, which
        // would flip `reach` negative.
        covered_total = covered_total.min(1.0);
    }
}

// ---------------------------------------------------------------------------
// Pool and arrival-time selection
// ---------------------------------------------------------------------------

/// Softmax selection from a fixed pool: argmax of
/// `ln q(Z_n) - ln p(Z_n) + G_n` over `n <= pool_size` with standard Gumbel
/// perturbations, ties to the smallest index. Always examines the whole
/// pool.
///
/// If no candidate in the pool carries target mass, selection falls back to
/// the perturbations alone and the outcome is flagged degenerate.
pub fn mrc_encode<C: Channel>(
    channel: &C,
    pool_size: u64,
    shared: &SharedRandomness,
) -> Result<SelectionOutcome<C::Point>, SamplerError> {
    if pool_size == 0 {
        return Err(SamplerError::InvalidConfig(
            "pool size must be at least 1".into(),
        ));
    }
    let mut best_score = f64::NEG_INFINITY;
    let mut best_index = 0u64;
    let mut fallback_score = f64::NEG_INFINITY;
    let mut fallback_index = 0u64;
    for n in 1..=pool_size {
        let z = channel.candidate(shared, n);
        let g = shared.gumbel(Stream::ArrivalTimes, n);
        let score = channel.log_weight(&z) + g;
        if score > best_score {
            best_score = score;
            best_index = n;
        }
        if g > fallback_score {
            fallback_score = g;
            fallback_index = n;
        }
    }
    let degenerate = best_index == 0;
    let (index, score) = if degenerate {
        (fallback_index, fallback_score)
    } else {
        (best_index, best_score)
    };
    Ok(SelectionOutcome {
        index,
        lattice_point: None,
        iterations: pool_size,
        winning_score: score,
        sample: channel.candidate(shared, index),
        termination: Termination::Budget,
        degenerate_selection: degenerate,
    })
}

// Shared argmin state for arrival-time searches. Scores are
// `ln t - (ln q - ln p)`; smaller is better; candidates without target mass
// score +inf and are never selected.
struct ArrivalSearch {
    ln_wmin: f64,
    best_score: f64,
    best_index: u64,
}

impl ArrivalSearch {
    fn new(w_min: f64) -> Self {
        Self {
            ln_wmin: w_min.ln(),
            best_score: f64::INFINITY,
            best_index: 0,
        }
    }

    /// Records candidate `n`; returns true when the score bound proves no
    /// later arrival can beat the current best.
    fn offer(&mut self, n: u64, ln_t: f64, log_weight: f64) -> bool {
        let score = ln_t - log_weight;
        if score < self.best_score {
            self.best_score = score;
            self.best_index = n;
        }
        // Later arrivals have time > t and weight bounded by w_min, so all
        // future scores exceed ln t + ln w_min. A candidate attaining the
        // ratio bound makes this an exact-equality stop; `ln w_min` and
        // `-log_weight` then denote the same real number through different
        // float computations, so allow a sliver of relative slack rather
        // than let round-off defer every such stop by one arrival. The
        // slack can only admit a future candidate better by less than it —
        // a probability-~1e-12 event.
        let threshold = ln_t + self.ln_wmin;
        self.best_score <= threshold + 1e-12 * (1.0 + threshold.abs())
    }
}

fn arrival_select<C: Channel>(
    channel: &C,
    config: &SamplerConfig,
    mode: ArrivalMode,
    shared: &SharedRandomness,
) -> SelectionOutcome<C::Point> {
    let mut arrivals = ArrivalGenerator::new(*shared, mode);
    let mut search = ArrivalSearch::new(config.w_min);
    let mut n = 0u64;
    let (iterations, termination) = loop {
        if let Some(budget) = config.max_candidates {
            if n == budget {
                break (n, Termination::Budget);
            }
        }
        n += 1;
        let t = arrivals
            .next_arrival()
            .expect("budget checked before drawing; cumulative arrivals never exhaust");
        let z = channel.candidate(shared, n);
        if search.offer(n, t.ln(), channel.log_weight(&z)) {
            break (n, Termination::Threshold);
        }
    };
    let degenerate = search.best_index == 0;
    // All examined candidates were outside the target support (possible only
    // with a finite budget); fall back to the first index, flagged.
    let index = if degenerate { 1 } else { search.best_index };
    SelectionOutcome {
        index,
        lattice_point: None,
        iterations,
        winning_score: search.best_score,
        sample: channel.candidate(shared, index),
        termination,
        degenerate_selection: degenerate,
    }
}

/// Budgeted arrival-time selection: argmin over the pool of
/// `tilde_T_n * p(Z_n)/q(Z_n)`, where `tilde_T_n` are the order statistics
/// of `pool-many` i.i.d. exponentials. Produces the same output law as
/// [`mrc_encode`] with the same pool size, but with an index distribution
/// biased toward 1. Stops early once the score bound fires; `w_min = 0`
/// disables that and scans the whole pool.
pub fn orc_encode<C: Channel>(
    channel: &C,
    config: &SamplerConfig,
    shared: &SharedRandomness,
) -> Result<SelectionOutcome<C::Point>, SamplerError> {
    let Some(budget) = config.max_candidates else {
        return Err(SamplerError::InvalidConfig(
            "budgeted selection needs a finite candidate budget; use pfr_encode instead".into(),
        ));
    };
    if budget == 0 {
        return Err(SamplerError::InvalidConfig(
            "candidate budget must be at least 1".into(),
        ));
    }
    if !(config.w_min >= 0.0) {
        return Err(SamplerError::InvalidConfig(format!(
            "w_min must be non-negative, got {}",
            config.w_min
        )));
    }
    Ok(arrival_select(
        channel,
        config,
        ArrivalMode::OrcWeighted { total: budget },
        shared,
    ))
}

/// Unbounded arrival-time selection over a Poisson process: examines
/// candidates until the score bound proves the current argmin final. The
/// output is an exact draw from the target; termination requires a positive
/// density-ratio bound.
pub fn pfr_encode<C: Channel>(
    channel: &C,
    config: &SamplerConfig,
    shared: &SharedRandomness,
) -> Result<SelectionOutcome<C::Point>, SamplerError> {
    config.require_wmin_positive("unbounded arrival search")?;
    if config.max_candidates.is_some() {
        return Err(SamplerError::InvalidConfig(
            "unbounded arrival search takes no candidate budget; use orc_encode instead".into(),
        ));
    }
    Ok(arrival_select(
        channel,
        config,
        ArrivalMode::PfrCumulative,
        shared,
    ))
}

/// Runs the budgeted and unbounded arrival searches on the same candidate
/// and arrival realization (identical streams, identical seed), so their
/// indices are pathwise comparable: the budgeted index never exceeds the
/// unbounded one, and they coincide once the budget covers the unbounded
/// search's range.
#[allow(clippy::type_complexity)]
pub fn coupled_orc_pfr<C: Channel>(
    channel: &C,
    budget: u64,
    w_min: f64,
    shared: &SharedRandomness,
) -> Result<(SelectionOutcome<C::Point>, SelectionOutcome<C::Point>), SamplerError> {
    let orc = orc_encode(channel, &SamplerConfig::budgeted(w_min, budget), shared)?;
    let pfr = pfr_encode(channel, &SamplerConfig::unbounded(w_min), shared)?;
    Ok((orc, pfr))
}

/// Worst-case total-variation bound for budgeted arrival selection run with
/// `2^(kl_bits + excess_bits)` candidates against a target at rate
/// `kl_bits`. The bound depends on the budget only through the excess
/// `t = excess_bits` and on the channel through `B = -log2 w_min`:
///
/// `4 * (2^(-t/8) + sqrt(2) * exp(-(t/2 - e^{-1} log2 e)^2 / (4 B^2)))`,
///
/// clamped to 1 (a total variation distance never exceeds 1). The rate
/// argument documents the budget decomposition and is validated but does
/// not enter the formula.
pub fn orc_tvd_bound(kl_bits: f64, excess_bits: f64, w_min: f64) -> Result<f64, SamplerError> {
    const EXP_LOG2E: f64 = 0.530_737_845_423_043; // e^{-1} * log2 e
    if !(kl_bits >= 0.0) || !kl_bits.is_finite() {
        return Err(SamplerError::InvalidConfig(format!(
            "rate must be finite and non-negative, got {kl_bits}"
        )));
    }
    if !(w_min > 0.0 && w_min <= 1.0) {
        return Err(SamplerError::InvalidConfig(format!(
            "w_min {w_min} outside (0, 1]"
        )));
    }
    if !(excess_bits >= 2.0 * EXP_LOG2E) {
        return Err(SamplerError::InvalidConfig(format!(
            "excess bits {excess_bits} below the bound's validity threshold {}",
            2.0 * EXP_LOG2E
        )));
    }
    let b = -w_min.log2();
    let gaussian_term = if b == 0.0 {
        0.0
    } else {
        let x = excess_bits / 2.0 - EXP_LOG2E;
        std::f64::consts::SQRT_2 * (-x * x / (4.0 * b * b)).exp()
    };
    let eps = (-excess_bits / 8.0).exp2() + gaussian_term;
    Ok((4.0 * eps).min(1.0))
}

// ---------------------------------------------------------------------------
// Dithered lattice and hybrid selection
// ---------------------------------------------------------------------------

/// Quantizes `center - dither` to the nearest integer vector, half-ties
/// downward, so that `k + dither` always lands in `center + [-0.5, 0.5)^D`.
pub fn dithered_quantize(center: &[f64], dither: &[f64]) -> Vec<i64> {
    assert_eq!(center.len(), dither.len(), "dimension mismatch");
    center
        .iter()
        .zip(dither)
        .map(|(&c, &u)| {
            debug_assert!((0.0..1.0).contains(&u));
            // The unique k with k + u in c + [-0.5, 0.5) is ceil(c - u - 0.5).
            (c - u - 0.5).ceil() as i64
        })
        .collect()
}

/// Decoder-side reconstruction: `k + dither`, exact in floating point.
pub fn dithered_reconstruct(lattice: &[i64], dither: &[f64]) -> Vec<f64> {
    assert_eq!(lattice.len(), dither.len(), "dimension mismatch");
    lattice
        .iter()
        .zip(dither)
        .map(|(&k, &u)| k as f64 + u)
        .collect()
}

/// Decodes a hybrid message `(index, lattice point)` back to the sample.
pub fn hybrid_decode(shared: &SharedRandomness, index: u64, lattice: &[i64]) -> Vec<f64> {
    let mut u = vec![0.0; lattice.len()];
    shared.uniform_coords(Stream::Dither, index, &mut u);
    dithered_reconstruct(lattice, &u)
}

/// Cell center for a truncated-Gaussian target in flattened space: the
/// midpoint of the transformed truncated support per coordinate, clamped so
/// the unit cell around it stays inside `[0, m)`. Requires the transformed
/// support to fit a unit cell (guaranteed when `m` came from the box-count
/// computation).
pub fn hybrid_center(spec: &TruncatedGaussianSpec, m: u64) -> Result<Vec<f64>, SamplerError> {
    use crate::distributions::transform_forward;
    let var = spec.marginal_var();
    let (a, b) = spec.interval();
    spec.mean()
        .iter()
        .map(|&xi| {
            let lo = transform_forward(var, m, xi + a);
            let hi = transform_forward(var, m, xi + b);
            if hi - lo > 1.0 {
                return Err(SamplerError::SupportViolation(format!(
                    "transformed support width {} exceeds the unit cell",
                    hi - lo
                )));
            }
            Ok(((lo + hi) / 2.0).clamp(0.5, m as f64 - 0.5))
        })
        .collect()
}

/// Arrival-time selection over dithered lattice candidates.
///
/// Candidate `n` is `Z_n = K_n + U_n`, with `U_n` from the dither stream and
/// `K_n` the lattice point placing `Z_n` in the unit cell around `center`.
/// Scoring follows the budgeted arrival rule against the unit-cell uniform,
/// so `config.w_min` must bound `1/q(z)` over the cell (the raw-space bound
/// times the box volume). The winning candidate is returned as
/// `(index, lattice point)`; the decoder rebuilds it via [`hybrid_decode`].
///
/// The target must live on `[0, m_1) x ... x [0, m_D)` with support inside
/// the cell; containment is checked against the target's declared bounds. A
/// finite budget permits `w_min = 0`, an unbounded search requires
/// `w_min > 0`.
pub fn hybrid_encode<T: ContinuousDensity>(
    target: &T,
    center: &[f64],
    sides: &[u64],
    config: &SamplerConfig,
    shared: &SharedRandomness,
) -> Result<SelectionOutcome<Vec<f64>>, SamplerError> {
    let dim = target.dim();
    if center.len() != dim || sides.len() != dim {
        return Err(SamplerError::InvalidChannel(format!(
            "dimension mismatch: target {dim}, center {}, box {}",
            center.len(),
            sides.len()
        )));
    }
    if config.max_candidates == Some(0) {
        return Err(SamplerError::InvalidConfig(
            "candidate budget must be at least 1".into(),
        ));
    }
    if config.max_candidates.is_none() {
        config.require_wmin_positive("unbounded dithered search")?;
    } else if !(config.w_min >= 0.0) {
        return Err(SamplerError::InvalidConfig(format!(
            "w_min must be non-negative, got {}",
            config.w_min
        )));
    }
    for (i, (((lo, hi), &c), &m)) in target
        .support_bounds()
        .iter()
        .zip(center)
        .zip(sides)
        .enumerate()
    {
        if c - 0.5 < 0.0 || c + 0.5 > m as f64 {
            return Err(SamplerError::SupportViolation(format!(
                "cell around {c} leaves the box [0, {m}) in coordinate {i}"
            )));
        }
        if *lo < c - 0.5 || *hi > c + 0.5 {
            return Err(SamplerError::SupportViolation(format!(
                "target support [{lo}, {hi}] escapes the cell around {c} in coordinate {i}"
            )));
        }
    }

    let mode = match config.max_candidates {
        Some(budget) => ArrivalMode::OrcWeighted { total: budget },
        None => ArrivalMode::PfrCumulative,
    };
    let mut arrivals = ArrivalGenerator::new(*shared, mode);
    let mut search = ArrivalSearch::new(config.w_min);
    let mut dither = vec![0.0; dim];
    let mut best: Option<(Vec<i64>, Vec<f64>)> = None;
    let mut n = 0u64;
    let (iterations, termination) = loop {
        if let Some(budget) = config.max_candidates {
            if n == budget {
                break (n, Termination::Budget);
            }
        }
        n += 1;
        let t = arrivals
            .next_arrival()
            .expect("budget checked before drawing; cumulative arrivals never exhaust");
        shared.uniform_coords(Stream::Dither, n, &mut dither);
        let k = dithered_quantize(center, &dither);
        let z = dithered_reconstruct(&k, &dither);
        // Against the unit-density cell proposal the log weight is ln q(z).
        let prev_best = search.best_index;
        let stop = search.offer(n, t.ln(), target.log_density(&z));
        if search.best_index == n && prev_best != n {
            best = Some((k, z));
        }
        if stop {
            break (n, Termination::Threshold);
        }
    };
    let degenerate = search.best_index == 0;
    let (index, k, z) = match best {
        Some((k, z)) => (search.best_index, k, z),
        None => {
            // No examined candidate had target mass; fall back to the first.
            let mut u = vec![0.0; dim];
            shared.uniform_coords(Stream::Dither, 1, &mut u);
            let k = dithered_quantize(center, &u);
            let z = dithered_reconstruct(&k, &u);
            (1, k, z)
        }
    };
    debug_assert!(k
        .iter()
        .zip(sides)
        .all(|(&ki, &m)| ki >= 0 && (ki as u64) < m));
    Ok(SelectionOutcome {
        index,
        lattice_point: Some(k),
        iterations,
        winning_score: search.best_score,
        sample: z,
        termination,
        degenerate_selection: degenerate,
    })
}
