//! Generative simulation of cumulative triangles under the half-normal
//! Markov model, and parameter-recovery studies built on it.
//!
//! Row `i` starts from the first-column law and develops as
//! `S_{i,j} ~ HalfNormal(θ_j S²_{i,j-1})`. Every random draw comes from its own
//! ChaCha8 substream keyed by `(seed, replicate, stream slot)`, so a replicate
//! is a pure function of the seed and its index and replicates can be
//! generated in any order or in parallel.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::distributions::HalfNormal;
use crate::error::{Error, Result};
use crate::reserving::{bayes_factors, bayes_posteriors, PriorSpec};
use crate::triangle::{Triangle, TriangleKind};

/// Largest triangle size the substream layout can address.
pub const MAX_SIZE: usize = (1 << 14) - 1;
/// Draws per cell before a zero sample is reported as a generation error.
pub const MAX_ATTEMPTS: u32 = 100;
/// Nominal level of the posterior intervals in [`recovery_study`].
pub const DEFAULT_LEVEL: f64 = 0.90;

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaLaw {
    /// The same true `θ_j` for every replicate.
    Fixed(Vec<f64>),
    /// Fresh `θ_j` per replicate, drawn from these inverse-gamma laws.
    Prior(PriorSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FirstColumnLaw {
    Constant(f64),
    /// One value per accident year.
    Values(Vec<f64>),
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    HalfNormal(HalfNormal),
}

impl Default for FirstColumnLaw {
    fn default() -> Self {
        FirstColumnLaw::Constant(100.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeSpec {
    n: usize,
    theta: ThetaLaw,
    first_column: FirstColumnLaw,
    seed: u64,
    replications: usize,
}

impl GenerativeSpec {
    pub fn new(n: usize, theta: ThetaLaw) -> Result<Self> {
        let spec = GenerativeSpec {
            n,
            theta,
            first_column: FirstColumnLaw::default(),
            seed: 0,
            replications: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_first_column(mut self, law: FirstColumnLaw) -> Result<Self> {
        self.first_column = law;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_replications(mut self, replications: usize) -> Result<Self> {
        self.replications = replications;
        self.validate()?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &ThetaLaw {
        &self.theta
    }

    pub fn first_column(&self) -> &FirstColumnLaw {
        &self.first_column
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || n > MAX_SIZE {
            return Err(Error::Contract(alloc::format!(
                "triangle size must be in 1..={MAX_SIZE}, got {n}"
            )));
        }
        match &self.theta {
            ThetaLaw::Fixed(theta) => {
                if theta.len() != n - 1 {
                    return Err(Error::Contract(alloc::format!(
                        "{} theta values supplied for {} development years",
                        theta.len(),
                        n - 1
                    )));
                }
                for (k, &t) in theta.iter().enumerate() {
                    if !(t > 0.0) || !t.is_finite() {
                        return Err(Error::Contract(alloc::format!(
                            "theta for dev {} must be positive and finite, got {t}",
                            k + 1
                        )));
                    }
                }
            }
            ThetaLaw::Prior(prior) => {
                if prior.len() != n - 1 {
                    return Err(Error::Contract(alloc::format!(
                        "theta prior covers {} development years, expected {}",
                        prior.len(),
                        n - 1
                    )));
                }
            }
        }
        match &self.first_column {
            FirstColumnLaw::Constant(v) => check_first(*v, 1)?,
            FirstColumnLaw::Values(values) => {
                if values.len() != n {
                    return Err(Error::Contract(alloc::format!(
                        "{} first-column values supplied for {n} accident years",
                        values.len()
                    )));
                }
                for (k, &v) in values.iter().enumerate() {
                    check_first(v, k + 1)?;
                }
            }
            FirstColumnLaw::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !(*sigma >= 0.0) || !sigma.is_finite() {
                    return Err(Error::Contract(alloc::format!(
                        "log-normal first column needs finite mu and sigma >= 0, got ({mu}, {sigma})"
                    )));
                }
            }
            FirstColumnLaw::HalfNormal(_) => {}
        }
        if self.replications == 0 {
            return Err(Error::Contract(
                "replication count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn check_first(v: f64, accident_year: usize) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidCell {
            accident_year,
            dev_year: 0,
            value: v,
            reason: "first-column values must be strictly positive",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Stream {
    Theta(usize),
    Cell {
        row: usize,
        col: usize,
        attempt: u32,
    },
}

/// ChaCha8 keyed by the master seed, stream = replicate, and a word offset
/// reserving 2^24 words per slot. Slot layout: tag (2 bits), row (14),
/// column (14), attempt (7).
fn substream(seed: u64, replicate: u64, stream: Stream) -> ChaCha8Rng {
    let slot: u128 = match stream {
        Stream::Theta(col) => (1 << 35) | ((col as u128) << 7),
        Stream::Cell { row, col, attempt } => {
            (2 << 35) | ((row as u128) << 21) | ((col as u128) << 7) | attempt as u128
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng.set_word_pos(slot << 24);
    rng
}

/// A simulated triangle together with the `θ` that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedTriangle {
    pub triangle: Triangle,
    pub theta: Vec<f64>,
}

fn draw_positive(
    seed: u64,
    replicate: u64,
    row: usize,
    col: usize,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Result<f64> {
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = substream(seed, replicate, Stream::Cell { row, col, attempt });
        let v = draw(&mut rng);
        if v > 0.0 && v.is_finite() {
            return Ok(v);
        }
    }
    Err(Error::Generation {
        accident_year: row,
        dev_year: col,
        attempts: MAX_ATTEMPTS,
    })
}

/// Generates replicate `replicate` of `spec` along with its true `θ`.
pub fn simulate_replicate(spec: &GenerativeSpec, replicate: usize) -> Result<SimulatedTriangle> {
    let n = spec.n;
    let r = replicate as u64;
    let theta: Vec<f64> = match &spec.theta {
        ThetaLaw::Fixed(theta) => theta.clone(),
        ThetaLaw::Prior(prior) => prior
            .columns()
            .iter()
            .enumerate()
            .map(|(k, law)| law.sample_one(&mut substream(spec.seed, r, Stream::Theta(k + 1))))
            .collect(),
    };
    let mut rows = Vec::with_capacity(n);
    for i in 1..=n {
        let first = match &spec.first_column {
            FirstColumnLaw::Constant(v) => *v,
            FirstColumnLaw::Values(values) => values[i - 1],
            FirstColumnLaw::LogNormal { mu, sigma } => {
                let law = LogNormal::new(*mu, *sigma)
                    .map_err(|_| Error::Contract("invalid log-normal first-column law".into()))?;
                draw_positive(spec.seed, r, i, 0, |rng| law.sample(rng))?
            }
            FirstColumnLaw::HalfNormal(law) => {
                draw_positive(spec.seed, r, i, 0, |rng| law.sample_one(rng))?
            }
        };
        let mut row = Vec::with_capacity(n + 1 - i);
        row.push(first);
        for j in 1..=(n - i) {
            let prev = row[j - 1];
            let law =
                HalfNormal::new(theta[j - 1] * prev * prev).map_err(|_| Error::Generation {
                    accident_year: i,
                    dev_year: j,
                    attempts: 0,
                })?;
            row.push(draw_positive(spec.seed, r, i, j, |rng| {
                law.sample_one(rng)
            })?);
        }
        rows.push(row);
    }
    Ok(SimulatedTriangle {
        triangle: Triangle::new(TriangleKind::Cumulative, rows)?,
        theta,
    })
}

/// Cumulative triangle for replicate `replicate`.
pub fn simulate_triangle(spec: &GenerativeSpec, replicate: usize) -> Result<Triangle> {
    simulate_replicate(spec, replicate).map(|s| s.triangle)
}

/// Per-replicate result of a recovery study.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub factors: Vec<f64>,
    pub true_sqrt_theta: Vec<f64>,
    /// Equal-tailed posterior interval for `√θ_j`.
    pub intervals: Vec<(f64, f64)>,
    pub covered: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnRecovery {
    pub dev_year: usize,
    pub samples: usize,
    pub mean_factor: f64,
    pub sd_factor: f64,
    /// `sd_factor / √samples`.
    pub standard_error: f64,
    pub mean_true_sqrt_theta: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateFailure {
    pub replicate: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoverySummary {
    pub n: usize,
    pub replications: usize,
    pub level: f64,
    pub columns: Vec<ColumnRecovery>,
    pub failures: Vec<ReplicateFailure>,
}

/// A recovery study ready to run: the posterior shape of column `j` is
/// `α_j + (n-j)/2` whatever the data, so the unit-scale interval quantiles are
/// computed once and rescaled by each replicate's posterior scale.
#[derive(Debug, Clone)]
pub struct RecoveryPlan {
    spec: GenerativeSpec,
    prior: PriorSpec,
    level: f64,
    unit_quantiles: Vec<(f64, f64)>,
}

impl RecoveryPlan {
    pub fn new(spec: &GenerativeSpec, prior: &PriorSpec, level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::domain("interval level", "0 < level < 1", level));
        }
        let n = spec.n;
        if prior.len() != n - 1 {
            return Err(Error::Contract(alloc::format!(
                "prior covers {} development years, triangle has {}",
                prior.len(),
                n - 1
            )));
        }
        let tail = (1.0 - level) / 2.0;
        let unit_quantiles = prior
            .columns()
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let shape = p.alpha() + (n - (k + 1)) as f64 / 2.0;
                let unit = crate::distributions::InverseGamma::new(shape, 1.0)?;
                Ok((unit.quantile(tail)?, unit.quantile(1.0 - tail)?))
            })
            .collect::<Result<_>>()?;
        Ok(RecoveryPlan {
            spec: spec.clone(),
            prior: prior.clone(),
            level,
            unit_quantiles,
        })
    }

    pub fn spec(&self) -> &GenerativeSpec {
        &self.spec
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn replicate(&self, replicate: usize) -> Result<ReplicateOutcome> {
        let sim = simulate_replicate(&self.spec, replicate)?;
        let posteriors = bayes_posteriors(&sim.triangle, &self.prior)?;
        let factors = bayes_factors(&posteriors)?.as_slice().to_vec();
        let true_sqrt_theta: Vec<f64> = sim.theta.iter().map(|&t| libm::sqrt(t)).collect();
        let intervals: Vec<(f64, f64)> = posteriors
            .iter()
            .zip(&self.unit_quantiles)
            .map(|(post, &(lo, hi))| (libm::sqrt(post.beta() * lo), libm::sqrt(post.beta() * hi)))
            .collect();
        let covered = intervals
            .iter()
            .zip(&true_sqrt_theta)
            .map(|(&(lo, hi), &truth)| lo <= truth && truth <= hi)
            .collect();
        Ok(ReplicateOutcome {
            factors,
            true_sqrt_theta,
            intervals,
            covered,
        })
    }

    /// Aggregates outcomes listed in replicate order.
    pub fn summarize<I>(&self, outcomes: I) -> RecoverySummary
    where
        I: IntoIterator<Item = (usize, Result<ReplicateOutcome>)>,
    {
        let cols = self.spec.n - 1;
        let mut factors: Vec<Vec<f64>> = (0..cols).map(|_| Vec::new()).collect();
        let mut truths: Vec<Vec<f64>> = (0..cols).map(|_| Vec::new()).collect();
        let mut hits = alloc::vec![0usize; cols];
        let mut failures = Vec::new();
        for (replicate, outcome) in outcomes {
            match outcome {
                Ok(o) => {
                    for k in 0..cols {
                        factors[k].push(o.factors[k]);
                        truths[k].push(o.true_sqrt_theta[k]);
                        hits[k] += usize::from(o.covered[k]);
                    }
                }
                Err(error) => failures.push(ReplicateFailure { replicate, error }),
            }
        }
        let columns = (0..cols)
            .map(|k| {
                let samples = factors[k].len();
                let (mean_factor, sd_factor) = mean_sd(&factors[k]);
                let (mean_true_sqrt_theta, _) = mean_sd(&truths[k]);
                ColumnRecovery {
                    dev_year: k + 1,
                    samples,
                    mean_factor,
                    sd_factor,
                    standard_error: sd_factor / libm::sqrt(samples as f64),
                    mean_true_sqrt_theta,
                    coverage: hits[k] as f64 / samples as f64,
                }
            })
            .collect();
        RecoverySummary {
            n: self.spec.n,
            replications: self.spec.replications,
            level: self.level,
            columns,
            failures,
        }
    }

    /// Runs every replicate sequentially.
    pub fn run(&self) -> RecoverySummary {
        self.summarize((0..self.spec.replications).map(|r| (r, self.replicate(r))))
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1.0)))
}

/// Recovery study at the default 90% interval level.
pub fn recovery_study(spec: &GenerativeSpec, prior: &PriorSpec) -> Result<RecoverySummary> {
    Ok(RecoveryPlan::new(spec, prior, DEFAULT_LEVEL)?.run())
}
