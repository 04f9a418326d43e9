//! Density models and information metrics.
//!
//! Covers the categorical targets/proposals of the discrete experiments and
//! the truncated-Gaussian machinery of the continuous one: per-coordinate
//! truncation, the CDF flattening map that turns the Gaussian proposal into
//! a uniform box, the box count `M`, and the density-ratio bound `w_min`.
//! All densities are natural-log internally; bits appear only at reporting
//! boundaries.

use rand_distr::Distribution as RandDistribution;
use thiserror::Error;

use crate::randomness::StreamKey;

#[derive(Debug, Error, PartialEq)]
pub enum DistributionError {
    #[error("invalid distribution: {0}")]
    Invalid(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("infinite divergence: target has mass at symbol {symbol} where proposal has none")]
    InfiniteDivergence { symbol: usize },
}

/// High-accuracy standard-normal CDF, quantile and log-pdf.
///
/// The box count and the density-ratio bound are sensitive to tail values
/// at `theta = 1e-4`, so the CDF needs absolute error well below 1e-12.
/// `libm`'s error functions deliver ~1 ulp; the quantile takes a rational
/// first guess and polishes it with Newton steps on `ln(Phi)`, which stay
/// quadratically convergent arbitrarily deep in the tail.
pub mod normal {
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

    /// Standard normal CDF.
    pub fn phi(x: f64) -> f64 {
        0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    }

    /// Standard normal quantile; requires `p` strictly inside (0,1).
    pub fn phi_inv(p: f64) -> f64 {
        assert!(p > 0.0 && p < 1.0, "quantile argument {p} outside (0,1)");
        // Work in the lower tail where erfc does not cancel.
        if p > 0.5 {
            -phi_inv_lower(1.0 - p)
        } else {
            phi_inv_lower(p)
        }
    }

    // Quantile for p <= 0.5 (result <= 0).
    fn phi_inv_lower(p: f64) -> f64 {
        let guess = -SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p);
        let mut x = if guess.is_finite() {
            guess.min(0.0)
        } else {
            -(-2.0 * p.ln()).sqrt()
        };
        let ln_p = p.ln();
        for _ in 0..3 {
            // d/dx ln Phi = pdf/Phi; for x <= 0 the CDF is the pure erfc
            // tail, accurate to ~1 ulp with no cancellation.
            let tail = 0.5 * libm::erfc(-x * FRAC_1_SQRT_2);
            let pdf = (-0.5 * x * x - LN_SQRT_2PI).exp();
            let step = (tail.ln() - ln_p) * tail / pdf;
            x -= step;
            if step.abs() <= 1e-16 * x.abs() {
                break;
            }
        }
        x
    }

    /// Natural-log standard normal density.
    pub fn log_pdf(x: f64) -> f64 {
        -0.5 * x * x - LN_SQRT_2PI
    }

    /// Natural-log density of N(mean, var).
    pub fn log_pdf_scaled(x: f64, mean: f64, var: f64) -> f64 {
        let d = x - mean;
        -0.5 * d * d / var - 0.5 * var.ln() - LN_SQRT_2PI
    }
}

/// Evaluable continuous density with box-shaped support metadata.
pub trait ContinuousDensity {
    fn dim(&self) -> usize;
    /// Natural-log density; `-inf` outside the support.
    /// Panics on dimension mismatch.
    fn log_density(&self, z: &[f64]) -> f64;
    /// Per-coordinate closed support bounds (`-inf`/`+inf` when unbounded).
    fn support_bounds(&self) -> Vec<(f64, f64)>;
}

// ---------------------------------------------------------------------------
// Categorical
// ---------------------------------------------------------------------------

/// Probability vector over `{0..len-1}` with a precomputed CDF for
/// inverse-transform candidate generation.
#[derive(Clone, Debug, PartialEq)]
pub struct Categorical {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    /// Largest index with positive mass; inverse-CDF lookups clamp here so
    /// float round-off can never emit a zero-probability symbol.
    last_support: usize,
}

impl Categorical {
    /// Builds from non-negative weights; normalizes to sum exactly 1.
    pub fn new(weights: Vec<f64>) -> Result<Self, DistributionError> {
        if weights.is_empty() {
            return Err(DistributionError::Invalid("empty weight vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(DistributionError::Invalid(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(DistributionError::Invalid("weights sum to zero".into()));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        let mut last_support = 0;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            cumulative.push(acc);
            if p > 0.0 {
                last_support = i;
            }
        }
        Ok(Self {
            probs,
            cumulative,
            last_support,
        })
    }

    pub fn uniform(len: usize) -> Self {
        Self::new(vec![1.0; len]).expect("uniform weights are valid")
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// Natural-log mass; `-inf` at zero-probability symbols.
    pub fn log_prob(&self, symbol: usize) -> f64 {
        let p = self.probs[symbol];
        if p > 0.0 {
            p.ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Inverse-CDF sample: the first symbol whose cumulative mass exceeds `u`.
    pub fn sample_inverse_cdf(&self, u: f64) -> usize {
        debug_assert!((0.0..1.0).contains(&u));
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.last_support)
    }
}

/// Total variation distance between two probability (or frequency) vectors
/// of equal length: half the L1 distance.
pub fn tvd(a: &[f64], b: &[f64]) -> Result<f64, DistributionError> {
    if a.len() != b.len() {
        return Err(DistributionError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0)
}

/// KL divergence `D(q || p)` in bits, with `0 log 0 = 0`.
///
/// Errors where `q` has mass outside `p`'s support: a silently infinite
/// divergence would corrupt every Zipf-parameter computation downstream.
pub fn kl_bits(q: &Categorical, p: &Categorical) -> Result<f64, DistributionError> {
    if q.len() != p.len() {
        return Err(DistributionError::LengthMismatch {
            left: q.len(),
            right: p.len(),
        });
    }
    let mut total = 0.0;
    for (i, (&qi, &pi)) in q.probs.iter().zip(&p.probs).enumerate() {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Err(DistributionError::InfiniteDivergence { symbol: i });
        }
        total += qi * (qi / pi).log2();
    }
    Ok(total)
}

/// Symmetric Dirichlet(alpha, ..., alpha) draw over `dim` symbols, generated
/// deterministically from `key` (the key's stream is consumed sequentially
/// from its index onward).
pub fn dirichlet_sample(
    alpha: f64,
    dim: usize,
    key: StreamKey,
) -> Result<Categorical, DistributionError> {
    if !(alpha > 0.0) || dim == 0 {
        return Err(DistributionError::Invalid(format!(
            "dirichlet needs alpha > 0 and dim >= 1, got alpha={alpha}, dim={dim}"
        )));
    }
    // Callers hand a fresh derived seed per draw, so the sequential view
    // always starts at the head of the stream.
    debug_assert!(key.index <= 1, "dirichlet keys start streams at index 1");
    let mut rng = crate::randomness::SharedRandomness::new(key.seed).rng(key.stream);
    let gamma = rand_distr::Gamma::new(alpha, 1.0)
        .map_err(|e| DistributionError::Invalid(format!("gamma setup: {e}")))?;
    loop {
        let weights: Vec<f64> = (0..dim).map(|_| gamma.sample(&mut rng)).collect();
        // Tiny-alpha draws can underflow every coordinate to zero; redraw.
        if weights.iter().sum::<f64>() > 0.0 {
            return Categorical::new(weights);
        }
    }
}

/// Deterministic standard-normal draw via the quantile transform.
pub fn normal_sample(key: StreamKey) -> f64 {
    let mut u = crate::randomness::uniform(key);
    if u <= 0.0 {
        // The quantile needs the open interval; map the probability-2^-53
        // endpoint to the midpoint of its unrepresentable cell.
        u = 1.0 / (1u64 << 54) as f64;
    }
    normal::phi_inv(u)
}

// ---------------------------------------------------------------------------
// Gaussian channel: truncation, transform, box count, ratio bound
// ---------------------------------------------------------------------------

/// Isotropic Gaussian `N(mean, var I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotropicGaussian {
    pub mean: Vec<f64>,
    pub var: f64,
}

impl ContinuousDensity for IsotropicGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, z: &[f64]) -> f64 {
        assert_eq!(z.len(), self.mean.len(), "dimension mismatch");
        z.iter()
            .zip(&self.mean)
            .map(|(&zi, &mi)| normal::log_pdf_scaled(zi, mi, self.var))
            .sum()
    }

    fn support_bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY); self.mean.len()]
    }
}

/// Target of the Gaussian channel: `N(mean, I)` truncated per coordinate to
/// `[mean_i + a, mean_i + b]` and renormalized.
///
/// The per-coordinate truncated mass is `theta' = 1 - (1-theta)^(1/D)`, so
/// the total removed mass across all coordinates is exactly `theta`;
/// `a = phi_inv(theta'/2)` and `b = phi_inv(1 - theta'/2)` are symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedGaussianSpec {
    mean: Vec<f64>,
    sigma: f64,
    theta: f64,
    theta_prime: f64,
    a: f64,
    b: f64,
}

impl TruncatedGaussianSpec {
    pub fn new(mean: Vec<f64>, sigma: f64, theta: f64) -> Result<Self, DistributionError> {
        if mean.is_empty() {
            return Err(DistributionError::Invalid("empty mean vector".into()));
        }
        if !(sigma > 0.0) {
            return Err(DistributionError::Invalid(format!(
                "sigma must be > 0, got {sigma}"
            )));
        }
        if !(0.0..1.0).contains(&theta) {
            return Err(DistributionError::Invalid(format!(
                "theta must be in [0,1), got {theta}"
            )));
        }
        let d = mean.len() as f64;
        let theta_prime = 1.0 - (1.0 - theta).powf(1.0 / d);
        let (a, b) = if theta_prime > 0.0 {
            (
                normal::phi_inv(theta_prime / 2.0),
                normal::phi_inv(1.0 - theta_prime / 2.0),
            )
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        Ok(Self {
            mean,
            sigma,
            theta,
            theta_prime,
            a,
            b,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_prime(&self) -> f64 {
        self.theta_prime
    }

    /// Truncation interval endpoints `(a, b)` in standard-normal units.
    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Variance of the marginal (proposal) distribution of each coordinate.
    pub fn marginal_var(&self) -> f64 {
        self.sigma * self.sigma + 1.0
    }
}

impl ContinuousDensity for TruncatedGaussianSpec {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, z: &[f64]) -> f64 {
        assert_eq!(z.len(), self.mean.len(), "dimension mismatch");
        let renorm = (1.0 - self.theta_prime).ln();
        let mut total = 0.0;
        for (&zi, &mi) in z.iter().zip(&self.mean) {
            let t = zi - mi;
            if t < self.a || t > self.b {
                return f64::NEG_INFINITY;
            }
            total += normal::log_pdf(t) - renorm;
        }
        total
    }

    fn support_bounds(&self) -> Vec<(f64, f64)> {
        self.mean
            .iter()
            .map(|&m| (m + self.a, m + self.b))
            .collect()
    }
}

/// Uniform density over the box `[0, m_1) x ... x [0, m_D)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxUniform {
    pub sides: Vec<u64>,
}

impl BoxUniform {
    pub fn cube(side: u64, dim: usize) -> Self {
        Self {
            sides: vec![side; dim],
        }
    }

    pub fn log_volume(&self) -> f64 {
        self.sides.iter().map(|&m| (m as f64).ln()).sum()
    }
}

impl ContinuousDensity for BoxUniform {
    fn dim(&self) -> usize {
        self.sides.len()
    }

    fn log_density(&self, z: &[f64]) -> f64 {
        assert_eq!(z.len(), self.sides.len(), "dimension mismatch");
        let inside = z
            .iter()
            .zip(&self.sides)
            .all(|(&zi, &m)| zi >= 0.0 && zi < m as f64);
        if inside {
            -self.log_volume()
        } else {
            f64::NEG_INFINITY
        }
    }

    fn support_bounds(&self) -> Vec<(f64, f64)> {
        self.sides.iter().map(|&m| (0.0, m as f64)).collect()
    }
}

/// Unit-density uniform over the half-open cell `center + [-0.5, 0.5)^D`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitCellUniform {
    pub center: Vec<f64>,
}

impl UnitCellUniform {
    pub fn contains(&self, z: &[f64]) -> bool {
        assert_eq!(z.len(), self.center.len(), "dimension mismatch");
        z.iter()
            .zip(&self.center)
            .all(|(&zi, &ci)| zi >= ci - 0.5 && zi < ci + 0.5)
    }
}

impl ContinuousDensity for UnitCellUniform {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn log_density(&self, z: &[f64]) -> f64 {
        if self.contains(z) {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    fn support_bounds(&self) -> Vec<(f64, f64)> {
        self.center.iter().map(|&c| (c - 0.5, c + 0.5)).collect()
    }
}

/// Per-coordinate flattening map `z = m * Phi_{var}(z_raw)`: pushes the
/// proposal `N(0, var)` forward to `Uniform[0, m)`.
pub fn transform_forward(marginal_var: f64, m: u64, z_raw: f64) -> f64 {
    m as f64 * normal::phi(z_raw / marginal_var.sqrt())
}

/// Inverse of [`transform_forward`]; input must lie strictly inside `(0, m)`.
pub fn transform_inverse(marginal_var: f64, m: u64, z: f64) -> Result<f64, DistributionError> {
    let p = z / m as f64;
    if !(p > 0.0 && p < 1.0) {
        return Err(DistributionError::Invalid(format!(
            "transform inverse needs z strictly inside (0, {m}), got {z}"
        )));
    }
    Ok(marginal_var.sqrt() * normal::phi_inv(p))
}

/// Number of unit cells per coordinate: the largest `M` such that every
/// target's transformed truncated support still fits in one cell of width
/// `1/M` of the flattened axis — `floor(1 / (Phi_var(b) - Phi_var(a)))`.
pub fn compute_m(sigma: f64, theta: f64, dim: usize) -> Result<u64, DistributionError> {
    let spec = TruncatedGaussianSpec::new(vec![0.0; dim.max(1)], sigma, theta)?;
    if !(theta > 0.0) {
        return Err(DistributionError::Invalid(
            "compute_m needs theta in (0,1); theta = 0 leaves unbounded support".into(),
        ));
    }
    let s = spec.marginal_var().sqrt();
    let (a, b) = spec.interval();
    let width = normal::phi(b / s) - normal::phi(a / s);
    Ok((1.0 / width).floor() as u64)
}

/// Density-ratio lower bound `inf_z p(z)/q_x(z)` for proposal
/// `N(0, (sigma^2+1) I)` and target `N(x, I)` truncated per coordinate:
/// the infimum is attained at `z_min = ((sigma^2+1)/sigma^2) * x` and equals
/// `(1-theta) * N(z_min; 0, (sigma^2+1)I) / N(z_min; x, I)`.
///
/// Density ratios are invariant under the coordinate-wise CDF transform, so
/// the same bound is valid in flattened space against the uniform box.
pub fn compute_wmin_gaussian(spec: &TruncatedGaussianSpec) -> f64 {
    let var = spec.marginal_var();
    let scale = var / (spec.sigma() * spec.sigma());
    let mut log_ratio = (1.0 - spec.theta()).ln();
    for &xi in spec.mean() {
        let zmin = scale * xi;
        log_ratio += normal::log_pdf_scaled(zmin, 0.0, var) - normal::log_pdf_scaled(zmin, xi, 1.0);
    }
    log_ratio.exp()
}

/// Mutual information between a mean `Y ~ N(0, sigma^2 I)` and one sample of
/// `N(Y, I)`, in bits: `-(D/2) log2(1 - sigma^2/(sigma^2+1))`.
pub fn gaussian_mutual_information(sigma: f64, dim: usize) -> f64 {
    assert!(sigma >= 0.0 && dim >= 1, "need sigma >= 0 and dim >= 1");
    let s2 = sigma * sigma;
    -(dim as f64 / 2.0) * (1.0 - s2 / (s2 + 1.0)).log2()
}

/// The truncated Gaussian target pushed through [`transform_forward`]: a
/// density on `[0, M)^D` whose ratio to the uniform box proposal equals the
/// raw-space target/proposal ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedGaussian {
    pub spec: TruncatedGaussianSpec,
    pub m: u64,
}

impl TransformedGaussian {
    pub fn new(spec: TruncatedGaussianSpec, m: u64) -> Self {
        assert!(m >= 1, "box count must be at least 1");
        Self { spec, m }
    }
}

impl ContinuousDensity for TransformedGaussian {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn log_density(&self, z: &[f64]) -> f64 {
        assert_eq!(z.len(), self.spec.dim(), "dimension mismatch");
        let var = self.spec.marginal_var();
        let (a, b) = self.spec.interval();
        let renorm = (1.0 - self.spec.theta_prime()).ln();
        let log_m = (self.m as f64).ln();
        let mut total = 0.0;
        for (&zi, &xi) in z.iter().zip(self.spec.mean()) {
            let p = zi / self.m as f64;
            if !(p > 0.0 && p < 1.0) {
                return f64::NEG_INFINITY;
            }
            let raw = var.sqrt() * normal::phi_inv(p);
            let t = raw - xi;
            if t < a || t > b {
                return f64::NEG_INFINITY;
            }
            // q(z) = q_raw(raw) / (m * d/dz_raw Phi_var(raw))
            total += normal::log_pdf(t) - renorm - log_m - normal::log_pdf_scaled(raw, 0.0, var);
        }
        total
    }

    fn support_bounds(&self) -> Vec<(f64, f64)> {
        let var = self.spec.marginal_var();
        let (a, b) = self.spec.interval();
        self.spec
            .mean()
            .iter()
            .map(|&xi| {
                (
                    transform_forward(var, self.m, xi + a),
                    transform_forward(var, self.m, xi + b),
                )
            })
            .collect()
    }
}
