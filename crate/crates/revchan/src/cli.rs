//! Command-line interface.
//!
//! Four subcommands: the two benchmark studies (`categorical`, `gaussian`),
//! a single-sample `roundtrip` that prints the transport bitstream and
//! checks the decoder against the encoder, and a `bounds` calculator for
//! the coding-cost limits the studies are measured against.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on flag errors. Seeds
//! default to a fixed constant ([`crate::DEFAULT_SEED`]), never the clock.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use crate::coding::{decode_message, encode_message, BitSink};
use crate::distributions::{
    compute_m, compute_wmin_gaussian, dirichlet_sample, gaussian_mutual_information, normal_sample,
    Categorical, TransformedGaussian, TruncatedGaussianSpec,
};
use crate::experiments::{
    run_categorical, run_gaussian, write_categorical_outputs, write_gaussian_outputs, Algorithm,
    CategoricalConfig, GaussianConfig, GaussianMode,
};
use crate::randomness::{derive_seed, SharedRandomness, Stream, StreamKey};
use crate::samplers::{
    decode_index, greedy_rs_encode, hybrid_center, hybrid_decode, hybrid_encode, mrc_encode,
    orc_encode, pfr_encode, rs_encode, CategoricalChannel, GaussianBoxChannel, SamplerConfig,
};

#[derive(Parser, Debug)]
#[command(
    name = "revchan",
    version,
    about = "Channel-simulation samplers with bit accounting and benchmark studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Categorical study: Dirichlet targets against a uniform proposal.
    Categorical(CategoricalArgs),
    /// Gaussian study: truncated-Gaussian targets against a wide proposal.
    Gaussian(GaussianArgs),
    /// Encode one sample, print the bitstream, and decode it back.
    Roundtrip(RoundtripArgs),
    /// Print coding-cost bounds for a given rate or channel.
    Bounds(BoundsArgs),
}

/// Comma-separated candidate counts; entries are integers, `2^k` powers, or
/// doubling ranges `2^a..2^b`.
#[derive(Clone, Debug)]
struct CountGrid(Vec<u64>);

fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.trim();
    if let Some(exp) = t.strip_prefix("2^") {
        let k: u32 = exp
            .trim()
            .parse()
            .map_err(|_| format!("bad exponent in '{t}'"))?;
        if k >= 63 {
            return Err(format!("2^{k} is outside the supported range"));
        }
        Ok(1u64 << k)
    } else {
        t.parse()
            .map_err(|_| format!("'{t}' is not a count (use an integer or 2^k)"))
    }
}

impl FromStr for CountGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for item in s.split(',') {
            let item = item.trim();
            if item.is_empty() {
                return Err("empty entry in count list".into());
            }
            if let Some((lo, hi)) = item.split_once("..") {
                let lo = parse_count(lo)?;
                let hi = parse_count(hi)?;
                if !lo.is_power_of_two() || !hi.is_power_of_two() || lo > hi {
                    return Err(format!("range '{item}' must be 2^a..2^b with a <= b"));
                }
                let mut n = lo;
                loop {
                    out.push(n);
                    if n >= hi {
                        break;
                    }
                    n *= 2;
                }
            } else {
                out.push(parse_count(item)?);
            }
        }
        Ok(CountGrid(out))
    }
}

/// Comma-separated positive reals.
#[derive(Clone, Debug)]
struct FloatGrid(Vec<f64>);

impl FromStr for FloatGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|item| {
                item.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("'{}' is not a number", item.trim()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(FloatGrid)
    }
}

#[derive(Args, Debug)]
struct CategoricalArgs {
    /// Alphabet size (integer or 2^k).
    #[arg(long, value_parser = parse_count, default_value = "2^10")]
    dim: u64,
    /// Symmetric Dirichlet concentration for target draws.
    #[arg(long, default_value_t = 0.02)]
    alpha: f64,
    #[arg(long, default_value_t = 10)]
    num_targets: usize,
    /// Selections per target for every (algorithm, budget) cell.
    #[arg(long, value_parser = parse_count, default_value = "10000")]
    num_samples: u64,
    /// Candidate budget grid, e.g. `2^0..2^14` or `1,2,4,100`.
    #[arg(long, default_value = "2^0..2^14")]
    candidates: CountGrid,
    /// Comma-separated subset of rs, greedy_rs, mrc, orc, pfr.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "rs,greedy_rs,mrc,orc,pfr"
    )]
    algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = crate::DEFAULT_SEED)]
    seed: u64,
    /// Output directory for the .dat tables and metadata sidecar.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GaussianArgs {
    /// Comma-separated noise levels sigma.
    #[arg(long, default_value = "0.25,0.5,1,2,4,8,16")]
    sigma_grid: FloatGrid,
    #[arg(long, value_parser = parse_count, default_value = "1")]
    dim: u64,
    /// Truncated tail mass of each target.
    #[arg(long, default_value_t = 1e-4)]
    theta: f64,
    #[arg(long, value_parser = parse_count, default_value = "10000")]
    trials: u64,
    /// Comma-separated subset of pfr, hybrid.
    #[arg(long, value_delimiter = ',', default_value = "pfr,hybrid")]
    algorithms: Vec<Algorithm>,
    #[arg(long, value_enum, default_value_t = GaussianMode::GeometricSimulation)]
    mode: GaussianMode,
    #[arg(long, default_value_t = crate::DEFAULT_SEED)]
    seed: u64,
    /// Output directory for the .dat tables and metadata sidecar.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RoundtripArgs {
    /// Algorithm to exercise. Without --sigma this runs on a random
    /// categorical channel (rs, greedy_rs, mrc, orc, pfr); with --sigma on
    /// the truncated-Gaussian channel (pfr, hybrid).
    #[arg(long)]
    alg: Algorithm,
    /// Gaussian noise level; switches to the continuous channel.
    #[arg(long)]
    sigma: Option<f64>,
    /// Truncated tail mass (continuous channel).
    #[arg(long, default_value_t = 1e-4)]
    theta: f64,
    /// Alphabet size (categorical) or coordinates (continuous).
    #[arg(long, value_parser = parse_count)]
    dim: Option<u64>,
    /// Dirichlet concentration of the categorical target.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Candidate budget for the budgeted algorithms.
    #[arg(long, value_parser = parse_count, default_value = "2^6")]
    candidates: u64,
    #[arg(long, default_value_t = crate::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    rate_source: RateSource,
    /// Truncated tail mass (with --sigma).
    #[arg(long, default_value_t = 1e-4)]
    theta: f64,
    #[arg(long, value_parser = parse_count, default_value = "1")]
    dim: u64,
    /// Density-ratio bound for the rejection-sampling line (overrides the
    /// value derived from --sigma).
    #[arg(long)]
    wmin: Option<f64>,
}

/// At least one of the two must be given; with both, --mi wins as the rate.
#[derive(Args, Debug)]
#[group(required = true, multiple = true)]
struct RateSource {
    /// Rate in bits (mutual information / mean divergence of the workload).
    #[arg(long)]
    mi: Option<f64>,
    /// Gaussian noise level; derives the rate, the density-ratio bound at
    /// x = 0, and the lattice box count.
    #[arg(long)]
    sigma: Option<f64>,
}

pub fn run() -> ExitCode {
    // Flag errors make clap exit with code 2 before we get here.
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Categorical(args) => run_categorical_cmd(args),
        Command::Gaussian(args) => run_gaussian_cmd(args),
        Command::Roundtrip(args) => run_roundtrip_cmd(args),
        Command::Bounds(args) => run_bounds_cmd(args),
    }
}

fn run_categorical_cmd(args: CategoricalArgs) -> anyhow::Result<()> {
    let config = CategoricalConfig {
        dim: args.dim as usize,
        alpha: args.alpha,
        num_targets: args.num_targets,
        num_samples: args.num_samples,
        budgets: args.candidates.0,
        algorithms: args.algorithms,
        seed: args.seed,
    };
    println!("categorical config: {}", serde_json::to_string(&config)?);
    let summary = run_categorical(&config)?;
    println!("mean target divergence: {:.6} bits", summary.mean_kl_bits);
    for path in write_categorical_outputs(&config, &summary, &args.out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_gaussian_cmd(args: GaussianArgs) -> anyhow::Result<()> {
    let config = GaussianConfig {
        sigmas: args.sigma_grid.0,
        dim: args.dim as usize,
        theta: args.theta,
        trials: args.trials,
        algorithms: args.algorithms,
        mode: args.mode,
        seed: args.seed,
    };
    println!("gaussian config: {}", serde_json::to_string(&config)?);
    let summary = run_gaussian(&config)?;
    for (sigma, (m, mi)) in config.sigmas.iter().zip(
        summary
            .box_counts
            .iter()
            .zip(&summary.mutual_information_bits),
    ) {
        println!("sigma {sigma}: boxes per side {m}, rate {mi:.3} bits");
    }
    for path in write_gaussian_outputs(&config, &summary, &args.out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn run_roundtrip_cmd(args: RoundtripArgs) -> anyhow::Result<()> {
    match args.sigma {
        Some(sigma) => roundtrip_gaussian(&args, sigma),
        None => roundtrip_categorical(&args),
    }
}

fn roundtrip_categorical(args: &RoundtripArgs) -> anyhow::Result<()> {
    let dim = args.dim.unwrap_or(256) as usize;
    let target_key = StreamKey::new(derive_seed(args.seed, &[1]), Stream::CandidateValues, 1);
    let target = dirichlet_sample(args.alpha, dim, target_key)?;
    let channel = CategoricalChannel::new(target, Categorical::uniform(dim))?;
    let w_min = channel.optimal_wmin();
    let shared = SharedRandomness::new(derive_seed(args.seed, &[2]));
    let budget = args.candidates;
    let outcome = match args.alg {
        Algorithm::Rs => rs_encode(&channel, &SamplerConfig::budgeted(w_min, budget), &shared)?,
        Algorithm::GreedyRs => greedy_rs_encode(&channel, &shared),
        Algorithm::Mrc => mrc_encode(&channel, budget, &shared)?,
        Algorithm::Orc => orc_encode(&channel, &SamplerConfig::budgeted(w_min, budget), &shared)?,
        Algorithm::Pfr => pfr_encode(&channel, &SamplerConfig::unbounded(w_min), &shared)?,
        Algorithm::Hybrid => bail!("the hybrid scheme needs --sigma (continuous channel)"),
    };

    let mut sink = BitSink::new();
    let bits = encode_message(outcome.index, None, &mut sink)?;
    let hex = hex_string(sink.as_bytes());
    let mut source = sink.into_source();
    let (index, _) = decode_message(&mut source, None)?;
    let decoded = decode_index(&channel, &shared, index);
    if decoded != outcome.sample {
        bail!(
            "decoder disagreed with encoder: symbol {} vs {}",
            decoded,
            outcome.sample
        );
    }
    println!(
        "algorithm {} on a {dim}-symbol channel (seed {}, budget {budget})",
        args.alg, args.seed
    );
    println!(
        "selected index {} after {} iterations",
        outcome.index, outcome.iterations
    );
    println!("bitstream ({bits} bits): {hex}");
    println!(
        "decoded symbol {decoded} == encoded symbol {}",
        outcome.sample
    );
    println!("round trip ok");
    Ok(())
}

fn roundtrip_gaussian(args: &RoundtripArgs, sigma: f64) -> anyhow::Result<()> {
    let dim = args.dim.unwrap_or(1) as usize;
    let mean_seed = derive_seed(args.seed, &[1]);
    let x: Vec<f64> = (0..dim)
        .map(|d| {
            sigma
                * normal_sample(StreamKey::new(
                    mean_seed,
                    Stream::CandidateValues,
                    d as u64 + 1,
                ))
        })
        .collect();
    let spec = TruncatedGaussianSpec::new(x.clone(), sigma, args.theta)?;
    let w_min = compute_wmin_gaussian(&spec);
    let shared = SharedRandomness::new(derive_seed(args.seed, &[2]));

    match args.alg {
        Algorithm::Pfr => {
            let target = TransformedGaussian::new(spec, 1);
            let channel = GaussianBoxChannel::new(target, vec![1; dim])?;
            let outcome = pfr_encode(&channel, &SamplerConfig::unbounded(w_min), &shared)?;
            let mut sink = BitSink::new();
            let bits = encode_message(outcome.index, None, &mut sink)?;
            let hex = hex_string(sink.as_bytes());
            let mut source = sink.into_source();
            let (index, _) = decode_message(&mut source, None)?;
            let decoded = decode_index(&channel, &shared, index);
            if decoded != outcome.sample {
                bail!(
                    "decoder disagreed with encoder: {decoded:?} vs {:?}",
                    outcome.sample
                );
            }
            println!(
                "algorithm pfr on a sigma={sigma} channel, x = {x:?} (seed {})",
                args.seed
            );
            println!("density-ratio bound {w_min:.6e}");
            println!(
                "selected index {} after {} iterations",
                outcome.index, outcome.iterations
            );
            println!("bitstream ({bits} bits): {hex}");
            println!("decoded sample {decoded:?} == encoded sample bit-exactly");
            println!("round trip ok");
        }
        Algorithm::Hybrid => {
            let m = compute_m(sigma, args.theta, dim)?;
            let center = hybrid_center(&spec, m)?;
            let target = TransformedGaussian::new(spec, m);
            let volume = (m as f64).powi(dim as i32);
            let config = SamplerConfig::unbounded((w_min * volume).min(1.0));
            let sides = vec![m; dim];
            let outcome = hybrid_encode(&target, &center, &sides, &config, &shared)?;
            let lattice = outcome
                .lattice_point
                .clone()
                .context("hybrid selection must carry a lattice point")?;
            let mut sink = BitSink::new();
            let bits = encode_message(outcome.index, Some((&lattice, &sides)), &mut sink)?;
            let hex = hex_string(sink.as_bytes());
            let mut source = sink.into_source();
            let (index, decoded_lattice) = decode_message(&mut source, Some(&sides))?;
            let decoded_lattice =
                decoded_lattice.context("hybrid message must carry a lattice point")?;
            let decoded = hybrid_decode(&shared, index, &decoded_lattice);
            if decoded != outcome.sample {
                bail!(
                    "decoder disagreed with encoder: {decoded:?} vs {:?}",
                    outcome.sample
                );
            }
            println!(
                "algorithm hybrid on a sigma={sigma} channel, x = {x:?} (seed {})",
                args.seed
            );
            println!(
                "boxes per side {m}, cell density-ratio bound {:.6e}",
                config.w_min
            );
            println!(
                "selected index {} with lattice point {:?} after {} iterations",
                outcome.index, lattice, outcome.iterations
            );
            println!("bitstream ({bits} bits): {hex}");
            println!("decoded sample {decoded:?} == encoded sample bit-exactly");
            println!("round trip ok");
        }
        other => bail!("with --sigma only pfr and hybrid apply, got {other}"),
    }
    Ok(())
}

fn run_bounds_cmd(args: BoundsArgs) -> anyhow::Result<()> {
    let gaussian = match args.rate_source.sigma {
        Some(sigma) => {
            if !(sigma > 0.0) {
                bail!("sigma must be positive, got {sigma}");
            }
            if !(args.theta > 0.0 && args.theta < 1.0) {
                bail!("theta must lie in (0, 1), got {}", args.theta);
            }
            let dim = args.dim as usize;
            let m = compute_m(sigma, args.theta, dim)?;
            // Representative density-ratio bound at x = 0:
            // (1 - theta) (sigma^2 + 1)^(-D/2).
            let w0 = (1.0 - args.theta) * (sigma * sigma + 1.0).powf(-(dim as f64) / 2.0);
            Some((sigma, m, w0, gaussian_mutual_information(sigma, dim)))
        }
        None => None,
    };
    let rate = match (args.rate_source.mi, &gaussian) {
        (Some(mi), _) => mi,
        (None, Some((_, _, _, mi))) => *mi,
        (None, None) => unreachable!("clap requires --mi or --sigma"),
    };
    if !(rate >= 0.0) || !rate.is_finite() {
        bail!("rate must be a finite nonnegative number of bits, got {rate}");
    }
    let overhead = (rate + 1.0).log2();

    println!("rate: {rate:.3} bits");
    println!(
        "exact sample, optimal code (upper): {:.3} bits",
        rate + overhead + 4.732
    );
    println!(
        "exact sample, worst case (lower): {:.3} bits",
        rate + overhead - 1.0
    );
    let w_min = args.wmin.or(gaussian.as_ref().map(|&(_, _, w0, _)| w0));
    if let Some(w) = w_min {
        if !(w > 0.0 && w <= 1.0) {
            bail!("the density-ratio bound must lie in (0, 1], got {w}");
        }
        println!(
            "rejection sampling index entropy: {:.3} bits",
            -w.log2() + std::f64::consts::LOG2_E
        );
    }
    println!(
        "arrival search, Zipf-coded index: {:.3} bits",
        rate + overhead + 4.0
    );
    if let Some((_, m, _, _)) = gaussian {
        let lattice_bits = args.dim as f64 * (m as f64).log2();
        let residual = rate - lattice_bits;
        if residual < 0.0 {
            bail!(
                "lattice holds {lattice_bits:.3} bits but the rate is only {rate:.3}; \
                 the hybrid bound needs rate >= lattice bits"
            );
        }
        println!(
            "hybrid, index + lattice: {:.3} bits (boxes per side {m})",
            rate + (residual + 1.0).log2() + 4.0
        );
    }
    Ok(())
}
