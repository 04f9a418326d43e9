//! Benchmark studies comparing the selection algorithms.
//!
//! Two studies, both desk-scale by default and fully seed-deterministic:
//!
//! - **Categorical**: Dirichlet-random targets against a uniform proposal.
//!   For each algorithm and candidate budget we measure the coding cost of
//!   the index (plug-in entropy of the pooled index histogram, plus a
//!   Zipf-model ideal length as a secondary column), sample quality (mean
//!   total variation to the target), and compute effort (iteration mean and
//!   quartiles).
//! - **Gaussian**: additive-noise channel with target `N(x, I)` truncated at
//!   tail mass `theta`, proposal `N(0, (sigma^2+1) I)`. Compares the
//!   iteration cost of the unbounded arrival search against the
//!   dithered-lattice hybrid across a `sigma` grid, either by running the
//!   encoders (`full-run`) or by sampling the matching geometric iteration
//!   laws (`geometric-simulation`).
//!
//! Every cell of every study derives its own seed from the master seed and
//! the cell coordinates, so results are independent of scheduling order and
//! reruns are byte-identical.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coding::{entropy_bits, CodingError, ZipfModel};
use crate::distributions::{
    compute_m, compute_wmin_gaussian, dirichlet_sample, kl_bits, normal_sample, tvd, Categorical,
    DistributionError, TransformedGaussian, TruncatedGaussianSpec,
};
use crate::randomness::{derive_seed, SharedRandomness, Stream, StreamKey};
use crate::samplers::{
    greedy_rs_encode, hybrid_center, hybrid_encode, mrc_encode, orc_encode, pfr_encode, rs_encode,
    CategoricalChannel, GaussianBoxChannel, SamplerConfig, SamplerError,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
    #[error("metadata serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Selection algorithms the studies can exercise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Rejection sampling, truncated at the candidate budget.
    Rs,
    /// Greedy slice-based rejection sampling (exact, unbudgeted).
    GreedyRs,
    /// Gumbel-argmax selection over a fixed pool.
    Mrc,
    /// Arrival-time argmin over a fixed pool.
    Orc,
    /// Unbounded arrival-time search.
    Pfr,
    /// Dithered-lattice arrival search (continuous study only).
    Hybrid,
}

impl Algorithm {
    pub const fn as_str(self) -> &'static str {
        match self {
            Algorithm::Rs => "rs",
            Algorithm::GreedyRs => "greedy_rs",
            Algorithm::Mrc => "mrc",
            Algorithm::Orc => "orc",
            Algorithm::Pfr => "pfr",
            Algorithm::Hybrid => "hybrid",
        }
    }

    /// Stable tag separating the algorithm's randomness from its peers'.
    fn tag(self) -> u64 {
        match self {
            Algorithm::Rs => 1,
            Algorithm::GreedyRs => 2,
            Algorithm::Mrc => 3,
            Algorithm::Orc => 4,
            Algorithm::Pfr => 5,
            Algorithm::Hybrid => 6,
        }
    }

    /// Whether the categorical study sweeps this algorithm over the
    /// candidate-budget grid (the unbudgeted ones get a single row).
    fn budget_swept(self) -> bool {
        matches!(self, Algorithm::Rs | Algorithm::Mrc | Algorithm::Orc)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rs" => Ok(Algorithm::Rs),
            "greedy_rs" => Ok(Algorithm::GreedyRs),
            "mrc" => Ok(Algorithm::Mrc),
            "orc" => Ok(Algorithm::Orc),
            "pfr" => Ok(Algorithm::Pfr),
            "hybrid" => Ok(Algorithm::Hybrid),
            other => Err(format!(
                "unknown algorithm '{other}' (expected rs, greedy_rs, mrc, orc, pfr, or hybrid)"
            )),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// Seed-derivation path tags. Algorithm tags occupy 1..=6; these stay clear.
const TAG_TARGET: u64 = 9000;
const TAG_GAUSS_MEAN: u64 = 9001;
const TAG_GAUSS_RUN: u64 = 9002;

// ---------------------------------------------------------------------------
// Categorical study
// ---------------------------------------------------------------------------

/// Configuration of the categorical study.
///
/// Defaults are desk-scale: alphabet 2^10, Dirichlet concentration 0.02
/// (mean target-vs-uniform divergence around 5-6 bits), 10 targets, 10^4
/// samples per target, budgets 2^0..2^14. The flagship scale from the
/// benchmark this mirrors (alphabet 2^16, concentration 3e-4, 20 targets,
/// 10^5 samples) is reachable through the same fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoricalConfig {
    /// Alphabet size.
    pub dim: usize,
    /// Symmetric Dirichlet concentration for target draws.
    pub alpha: f64,
    pub num_targets: usize,
    /// Selections simulated per target for every (algorithm, budget) cell.
    pub num_samples: u64,
    /// Candidate-budget grid for the budgeted algorithms.
    pub budgets: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
}

impl Default for CategoricalConfig {
    fn default() -> Self {
        Self {
            dim: 1 << 10,
            alpha: 0.02,
            num_targets: 10,
            num_samples: 10_000,
            budgets: (0..=14).map(|k| 1 << k).collect(),
            algorithms: vec![
                Algorithm::Rs,
                Algorithm::GreedyRs,
                Algorithm::Mrc,
                Algorithm::Orc,
                Algorithm::Pfr,
            ],
            seed: crate::DEFAULT_SEED,
        }
    }
}

impl CategoricalConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |msg: String| Err(ExperimentError::InvalidConfig(msg));
        if self.dim < 2 {
            return fail(format!(
                "alphabet size must be at least 2, got {}",
                self.dim
            ));
        }
        if !(self.alpha > 0.0) {
            return fail(format!(
                "Dirichlet concentration must be positive, got {}",
                self.alpha
            ));
        }
        if self.num_targets == 0 || self.num_samples == 0 {
            return fail("need at least one target and one sample".into());
        }
        if self.algorithms.is_empty() {
            return fail("no algorithms selected".into());
        }
        if self.algorithms.contains(&Algorithm::Hybrid) {
            return fail("the lattice hybrid applies to the continuous study only".into());
        }
        if self.algorithms.iter().any(|a| a.budget_swept()) && self.budgets.is_empty() {
            return fail("budgeted algorithms need a candidate-budget grid".into());
        }
        if self.budgets.contains(&0) {
            return fail("candidate budgets must be positive".into());
        }
        Ok(())
    }
}

/// One row of the categorical study: an (algorithm, budget) cell aggregated
/// over all targets. `budget = 0` marks the unbudgeted algorithms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoricalRecord {
    pub algorithm: Algorithm,
    pub budget: u64,
    /// Plug-in entropy of the index histogram pooled over targets, bits.
    pub coding_cost_bits: f64,
    /// Mean Zipf-model code length of the same indices (model matched to
    /// the mean target divergence), bits.
    pub zipf_bits: f64,
    /// Mean over targets of the total variation between the empirical
    /// output histogram and the target.
    pub tvd: f64,
    pub iter_mean: f64,
    pub iter_p25: f64,
    pub iter_p50: f64,
    pub iter_p75: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoricalSummary {
    pub records: Vec<CategoricalRecord>,
    /// Mean target-vs-proposal divergence in bits (the rate the coding
    /// costs should be compared against).
    pub mean_kl_bits: f64,
    pub per_target_kl_bits: Vec<f64>,
}

// Per-(cell, target) accumulation, merged in target order.
struct CellPartial {
    symbol_counts: Vec<u64>,
    index_counts: Vec<u64>,
    iterations: Vec<u64>,
}

fn bump_index(counts: &mut Vec<u64>, index: u64) {
    let slot = index as usize - 1;
    if slot >= counts.len() {
        counts.resize(slot + 1, 0);
    }
    counts[slot] += 1;
}

fn run_categorical_cell_target(
    config: &CategoricalConfig,
    algorithm: Algorithm,
    budget: u64,
    target_idx: usize,
    channel: &CategoricalChannel,
    w_min: f64,
) -> Result<CellPartial, ExperimentError> {
    let mut partial = CellPartial {
        symbol_counts: vec![0; config.dim],
        index_counts: Vec::new(),
        iterations: Vec::with_capacity(config.num_samples as usize),
    };
    for i in 0..config.num_samples {
        let shared = SharedRandomness::new(derive_seed(
            config.seed,
            &[algorithm.tag(), target_idx as u64, i],
        ));
        let outcome = match algorithm {
            Algorithm::Rs => rs_encode(channel, &SamplerConfig::budgeted(w_min, budget), &shared)?,
            Algorithm::GreedyRs => greedy_rs_encode(channel, &shared),
            Algorithm::Mrc => mrc_encode(channel, budget, &shared)?,
            Algorithm::Orc => {
                orc_encode(channel, &SamplerConfig::budgeted(w_min, budget), &shared)?
            }
            Algorithm::Pfr => pfr_encode(channel, &SamplerConfig::unbounded(w_min), &shared)?,
            Algorithm::Hybrid => unreachable!("rejected by config validation"),
        };
        partial.symbol_counts[outcome.sample] += 1;
        bump_index(&mut partial.index_counts, outcome.index);
        partial.iterations.push(outcome.iterations);
    }
    Ok(partial)
}

/// Runs the categorical study. Cells are parallelized over targets;
/// reductions happen in fixed target order, so the result depends only on
/// the configuration.
pub fn run_categorical(config: &CategoricalConfig) -> Result<CategoricalSummary, ExperimentError> {
    config.validate()?;
    let proposal = Categorical::uniform(config.dim);
    let channels: Vec<CategoricalChannel> = (0..config.num_targets)
        .map(|j| {
            let key = StreamKey::new(
                derive_seed(config.seed, &[TAG_TARGET, j as u64]),
                Stream::CandidateValues,
                1,
            );
            let target = dirichlet_sample(config.alpha, config.dim, key)?;
            Ok(CategoricalChannel::new(target, proposal.clone())?)
        })
        .collect::<Result<_, ExperimentError>>()?;
    let w_mins: Vec<f64> = channels.iter().map(|c| c.optimal_wmin()).collect();
    let per_target_kl: Vec<f64> = channels
        .iter()
        .map(|c| kl_bits(c.target(), c.proposal()))
        .collect::<Result<_, _>>()?;
    let mean_kl = per_target_kl.iter().sum::<f64>() / per_target_kl.len() as f64;
    let zipf = ZipfModel::for_budget(mean_kl);

    let mut records = Vec::new();
    for &algorithm in &config.algorithms {
        let budgets: &[u64] = if algorithm.budget_swept() {
            &config.budgets
        } else {
            &[0]
        };
        for &budget in budgets {
            let partials: Vec<CellPartial> = (0..config.num_targets)
                .into_par_iter()
                .map(|j| {
                    run_categorical_cell_target(
                        config,
                        algorithm,
                        budget,
                        j,
                        &channels[j],
                        w_mins[j],
                    )
                })
                .collect::<Result<_, _>>()?;

            let mut index_counts: Vec<u64> = Vec::new();
            let mut iterations: Vec<u64> = Vec::new();
            let mut tvd_sum = 0.0;
            for (j, partial) in partials.iter().enumerate() {
                for (slot, &c) in partial.index_counts.iter().enumerate() {
                    if slot >= index_counts.len() {
                        index_counts.resize(slot + 1, 0);
                    }
                    index_counts[slot] += c;
                }
                iterations.extend_from_slice(&partial.iterations);
                let total = config.num_samples as f64;
                let freq: Vec<f64> = partial
                    .symbol_counts
                    .iter()
                    .map(|&c| c as f64 / total)
                    .collect();
                tvd_sum += tvd(&freq, channels[j].target().probs())?;
            }

            let total_runs = iterations.len() as f64;
            let zipf_bits = index_counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(slot, &c)| c as f64 * zipf.code_length(slot as u64 + 1))
                .sum::<f64>()
                / total_runs;
            let iter_f: Vec<f64> = iterations.iter().map(|&x| x as f64).collect();
            let quartiles = percentiles(&iter_f, &[0.25, 0.5, 0.75])?;
            records.push(CategoricalRecord {
                algorithm,
                budget,
                coding_cost_bits: entropy_bits(&index_counts)?,
                zipf_bits,
                tvd: tvd_sum / config.num_targets as f64,
                iter_mean: iter_f.iter().sum::<f64>() / total_runs,
                iter_p25: quartiles[0],
                iter_p50: quartiles[1],
                iter_p75: quartiles[2],
            });
        }
    }
    Ok(CategoricalSummary {
        records,
        mean_kl_bits: mean_kl,
        per_target_kl_bits: per_target_kl,
    })
}

// ---------------------------------------------------------------------------
// Gaussian study
// ---------------------------------------------------------------------------

/// How the Gaussian study obtains iteration counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianMode {
    /// Execute the encoders and record their actual iteration counts.
    FullRun,
    /// Sample the matching geometric iteration laws directly; orders of
    /// magnitude faster for wide proposals, and coupled between the two
    /// algorithms through a shared per-trial draw.
    GeometricSimulation,
}

/// Configuration of the Gaussian study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianConfig {
    pub sigmas: Vec<f64>,
    pub dim: usize,
    /// Total truncated tail mass of each target.
    pub theta: f64,
    pub trials: u64,
    pub algorithms: Vec<Algorithm>,
    pub mode: GaussianMode,
    pub seed: u64,
}

impl Default for GaussianConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
            dim: 1,
            theta: 1e-4,
            trials: 10_000,
            algorithms: vec![Algorithm::Pfr, Algorithm::Hybrid],
            mode: GaussianMode::GeometricSimulation,
            seed: crate::DEFAULT_SEED,
        }
    }
}

impl GaussianConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |msg: String| Err(ExperimentError::InvalidConfig(msg));
        if self.sigmas.is_empty() {
            return fail("sigma grid is empty".into());
        }
        if self.sigmas.iter().any(|&s| !(s > 0.0)) {
            return fail("every sigma must be positive".into());
        }
        if self.dim == 0 {
            return fail("dimension must be at least 1".into());
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return fail(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if self.trials == 0 {
            return fail("need at least one trial".into());
        }
        if self.algorithms.is_empty() {
            return fail("no algorithms selected".into());
        }
        if self
            .algorithms
            .iter()
            .any(|a| !matches!(a, Algorithm::Pfr | Algorithm::Hybrid))
        {
            return fail("the continuous study supports pfr and hybrid only".into());
        }
        Ok(())
    }
}

/// One row of the Gaussian study: iteration quartiles of one algorithm at
/// one proposal width, across trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianRecord {
    pub algorithm: Algorithm,
    pub sigma: f64,
    pub iter_p25: f64,
    pub iter_p50: f64,
    pub iter_p75: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianSummary {
    pub records: Vec<GaussianRecord>,
    /// Per-sigma lattice box count used by the hybrid scheme.
    pub box_counts: Vec<u64>,
    /// Per-sigma channel rate `(D/2) log2(sigma^2 + 1)` in bits.
    pub mutual_information_bits: Vec<f64>,
}

fn gaussian_trial_mean(
    config: &GaussianConfig,
    sigma_idx: usize,
    trial: u64,
    sigma: f64,
) -> Vec<f64> {
    let seed = derive_seed(config.seed, &[TAG_GAUSS_MEAN, sigma_idx as u64, trial]);
    (0..config.dim)
        .map(|d| sigma * normal_sample(StreamKey::new(seed, Stream::CandidateValues, d as u64 + 1)))
        .collect()
}

fn geometric_iterations(success: f64, unit_exponential: f64) -> u64 {
    // Inverse-CDF geometric on {1, 2, ...}: P(X > k) = (1 - success)^k.
    debug_assert!((0.0..=1.0).contains(&success));
    let rate = -(-success).ln_1p();
    if rate.is_infinite() {
        1
    } else {
        1 + (unit_exponential / rate).floor() as u64
    }
}

fn gaussian_trial_iterations(
    config: &GaussianConfig,
    algorithm: Algorithm,
    sigma_idx: usize,
    trial: u64,
    sigma: f64,
    box_count: u64,
) -> Result<u64, ExperimentError> {
    let x = gaussian_trial_mean(config, sigma_idx, trial, sigma);
    let spec = TruncatedGaussianSpec::new(x, sigma, config.theta)?;
    let w_min = compute_wmin_gaussian(&spec);
    // The cell-relative bound for the hybrid: density ratios are invariant
    // under the flattening map, and the unit cell concentrates the proposal
    // by the box volume.
    let volume = (box_count as f64).powi(config.dim as i32);
    let run_seed = derive_seed(config.seed, &[TAG_GAUSS_RUN, sigma_idx as u64, trial]);
    let shared = SharedRandomness::new(run_seed);
    match config.mode {
        GaussianMode::GeometricSimulation => {
            // One exponential shared by both algorithms couples their
            // iteration counts monotonically within a trial.
            let e =
                crate::randomness::exponential(StreamKey::new(run_seed, Stream::SelectionNoise, 1));
            let success = match algorithm {
                Algorithm::Pfr => w_min,
                Algorithm::Hybrid => (w_min * volume).min(1.0),
                _ => unreachable!("rejected by config validation"),
            };
            Ok(geometric_iterations(success, e))
        }
        GaussianMode::FullRun => match algorithm {
            Algorithm::Pfr => {
                // Flattened space with a single box: proposal becomes
                // Uniform[0,1)^D and the density ratio is unchanged.
                let target = TransformedGaussian::new(spec, 1);
                let channel = GaussianBoxChannel::new(target, vec![1; config.dim])?;
                let out = pfr_encode(&channel, &SamplerConfig::unbounded(w_min), &shared)?;
                Ok(out.iterations)
            }
            Algorithm::Hybrid => {
                let center = hybrid_center(&spec, box_count)?;
                let target = TransformedGaussian::new(spec, box_count);
                let config_h = SamplerConfig::unbounded((w_min * volume).min(1.0));
                let out = hybrid_encode(
                    &target,
                    &center,
                    &vec![box_count; config.dim],
                    &config_h,
                    &shared,
                )?;
                Ok(out.iterations)
            }
            _ => unreachable!("rejected by config validation"),
        },
    }
}

/// Runs the Gaussian study. Trials are parallel; per-sigma reductions use
/// fixed trial order.
pub fn run_gaussian(config: &GaussianConfig) -> Result<GaussianSummary, ExperimentError> {
    config.validate()?;
    let mut records = Vec::new();
    let mut box_counts = Vec::new();
    let mut mi = Vec::new();
    for (sigma_idx, &sigma) in config.sigmas.iter().enumerate() {
        let box_count = compute_m(sigma, config.theta, config.dim)?;
        box_counts.push(box_count);
        mi.push(crate::distributions::gaussian_mutual_information(
            sigma, config.dim,
        ));
        for &algorithm in &config.algorithms {
            let iterations: Vec<u64> = (0..config.trials)
                .into_par_iter()
                .map(|trial| {
                    gaussian_trial_iterations(config, algorithm, sigma_idx, trial, sigma, box_count)
                })
                .collect::<Result<_, _>>()?;
            let iter_f: Vec<f64> = iterations.iter().map(|&x| x as f64).collect();
            let quartiles = percentiles(&iter_f, &[0.25, 0.5, 0.75])?;
            records.push(GaussianRecord {
                algorithm,
                sigma,
                iter_p25: quartiles[0],
                iter_p50: quartiles[1],
                iter_p75: quartiles[2],
            });
        }
    }
    Ok(GaussianSummary {
        records,
        box_counts,
        mutual_information_bits: mi,
    })
}

// ---------------------------------------------------------------------------
// Percentiles and output files
// ---------------------------------------------------------------------------

/// Nearest-rank percentiles: for quantile `q` over `n` samples, the value at
/// sorted rank `ceil(q * n)` (rank 1 for `q = 0`). Input order is
/// irrelevant.
pub fn percentiles(samples: &[f64], qs: &[f64]) -> Result<Vec<f64>, ExperimentError> {
    if samples.is_empty() {
        return Err(ExperimentError::InvalidConfig(
            "percentiles of an empty sample".into(),
        ));
    }
    if qs.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err(ExperimentError::InvalidConfig(
            "quantiles must lie in [0, 1]".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not contain NaN"));
    Ok(qs
        .iter()
        .map(|&q| {
            let rank = ((q * sorted.len() as f64).ceil() as usize).max(1);
            sorted[rank.min(sorted.len()) - 1]
        })
        .collect())
}

#[derive(Serialize)]
struct Sidecar<'a, C: Serialize> {
    config: &'a C,
    seed: u64,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_kl_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    box_counts: Option<&'a [u64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mutual_information_bits: Option<&'a [f64]>,
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn write_sidecar<C: Serialize>(
    path: &Path,
    sidecar: &Sidecar<'_, C>,
) -> Result<(), ExperimentError> {
    let mut json = serde_json::to_string_pretty(sidecar)?;
    json.push('\n');
    write_file(path, &json)
}

/// Writes one `.dat` table per algorithm
/// (`categorical_<algorithm>.dat`, columns `N cc TV Imean I25 I50 I75
/// Lzipf`) plus a `categorical.json` metadata sidecar. Returns the paths
/// written, tables first.
pub fn write_categorical_outputs(
    config: &CategoricalConfig,
    summary: &CategoricalSummary,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut paths = Vec::new();
    for &algorithm in &config.algorithms {
        let mut table = String::from("N cc TV Imean I25 I50 I75 Lzipf\n");
        for r in summary.records.iter().filter(|r| r.algorithm == algorithm) {
            table.push_str(&format!(
                "{} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}\n",
                r.budget,
                r.coding_cost_bits,
                r.tvd,
                r.iter_mean,
                r.iter_p25,
                r.iter_p50,
                r.iter_p75,
                r.zipf_bits,
            ));
        }
        let path = out_dir.join(format!("categorical_{algorithm}.dat"));
        write_file(&path, &table)?;
        paths.push(path);
    }
    let sidecar_path = out_dir.join("categorical.json");
    write_sidecar(
        &sidecar_path,
        &Sidecar {
            config,
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION"),
            mean_kl_bits: Some(summary.mean_kl_bits),
            box_counts: None,
            mutual_information_bits: None,
        },
    )?;
    paths.push(sidecar_path);
    Ok(paths)
}

/// Writes one `.dat` table per algorithm (`gaussian_<algorithm>.dat`,
/// columns `sigma p25 p50 p75`) plus a `gaussian.json` metadata sidecar.
/// Returns the paths written, tables first.
pub fn write_gaussian_outputs(
    config: &GaussianConfig,
    summary: &GaussianSummary,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut paths = Vec::new();
    for &algorithm in &config.algorithms {
        let mut table = String::from("sigma p25 p50 p75\n");
        for r in summary.records.iter().filter(|r| r.algorithm == algorithm) {
            table.push_str(&format!(
                "{:.6} {:.6} {:.6} {:.6}\n",
                r.sigma, r.iter_p25, r.iter_p50, r.iter_p75
            ));
        }
        let path = out_dir.join(format!("gaussian_{algorithm}.dat"));
        write_file(&path, &table)?;
        paths.push(path);
    }
    let sidecar_path = out_dir.join("gaussian.json");
    write_sidecar(
        &sidecar_path,
        &Sidecar {
            config,
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION"),
            mean_kl_bits: None,
            box_counts: Some(&summary.box_counts),
            mutual_information_bits: Some(&summary.mutual_information_bits),
        },
    )?;
    paths.push(sidecar_path);
    Ok(paths)
}
