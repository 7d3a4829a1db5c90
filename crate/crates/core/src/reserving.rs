//! Chain ladder and half-normal Bayesian chain ladder reserving.
//!
//! Both engines reduce a cumulative triangle to one development factor per
//! development year `j = 1..n-1`; [`project`] turns any factor sequence into
//! ultimates, outstanding claims, and the total IBNR reserve.
//!
//! The Bayesian engine models `S_{i,j} | S_{i,j-1}, θ_j ~ HalfNormal(θ_j S²_{i,j-1})`
//! with an inverse-gamma prior on each `θ_j`. The prior is conjugate, so the
//! posterior is inverse-gamma with
//!
//! ```text
//! shape = α_j + (n - j)/2
//! scale = β_j + (1/π) Σ_{i=1}^{n-j} (S_{i,j} / S_{i,j-1})²
//! ```
//!
//! and the development factor is the posterior mean of `√θ_j`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::distributions::InverseGamma;
use crate::error::{Error, Result};
use crate::numerics::gamma_ratio_half;
use crate::triangle::{FutureCellIndex, Triangle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mack,
    BayesHalfNormal,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mack => "mack",
            Method::BayesHalfNormal => "bayes_half_normal",
        }
    }
}

/// Development factors for `j = 1..n-1`, tagged with the engine that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct DevFactors {
    method: Method,
    factors: Vec<f64>,
}

impl DevFactors {
    pub fn new(method: Method, factors: Vec<f64>) -> Result<Self> {
        for (k, &f) in factors.iter().enumerate() {
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::Contract(format!(
                    "development factor for dev {} must be positive and finite, got {f}",
                    k + 1
                )));
            }
        }
        Ok(DevFactors { method, factors })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Factor for development year `j` (1-based, `1..=len`).
    pub fn get(&self, dev_year: usize) -> Option<f64> {
        dev_year
            .checked_sub(1)
            .and_then(|k| self.factors.get(k))
            .copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElicitationMode {
    Explicit,
    /// β_j chosen so the prior mean factor equals the root squared-column-sum ratio.
    AutoBeta,
}

/// Per-development-year inverse-gamma priors on `θ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    columns: Vec<InverseGamma>,
    mode: ElicitationMode,
}

impl PriorSpec {
    /// `(α_j, β_j)` for `j = 1..n-1`; every `α_j` must exceed 1/2.
    pub fn explicit(pairs: &[(f64, f64)]) -> Result<Self> {
        let columns = pairs
            .iter()
            .enumerate()
            .map(|(k, &(alpha, beta))| prior_column(k + 1, alpha, beta))
            .collect::<Result<_>>()?;
        Ok(PriorSpec {
            columns,
            mode: ElicitationMode::Explicit,
        })
    }

    /// The same `(α, β)` for each of the `n - 1` development years.
    pub fn uniform(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        let pairs: Vec<_> = (1..n).map(|_| (alpha, beta)).collect();
        Self::explicit(&pairs)
    }

    pub fn columns(&self) -> &[InverseGamma] {
        &self.columns
    }

    pub fn mode(&self) -> ElicitationMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Prior mean of `√θ_j` for each development year.
    pub fn mean_factors(&self) -> Result<Vec<f64>> {
        self.columns.iter().map(InverseGamma::mean_sqrt).collect()
    }
}

fn prior_column(dev_year: usize, alpha: f64, beta: f64) -> Result<InverseGamma> {
    if !(alpha > 0.5) || !alpha.is_finite() {
        return Err(Error::Contract(format!(
            "prior alpha for dev {dev_year} must exceed 1/2, got {alpha}"
        )));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Contract(format!(
            "prior beta for dev {dev_year} must be positive, got {beta}"
        )));
    }
    InverseGamma::new(alpha, beta)
}

/// Prior shape choice for [`elicit_prior`].
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaChoice {
    /// `n(n-1)/2`, the number of future cells, for every development year.
    Default,
    Uniform(f64),
    PerColumn(Vec<f64>),
}

impl AlphaChoice {
    fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        let cols = n.saturating_sub(1);
        match self {
            AlphaChoice::Default => Ok(alloc::vec![default_alpha(n); cols]),
            AlphaChoice::Uniform(a) => Ok(alloc::vec![*a; cols]),
            AlphaChoice::PerColumn(v) if v.len() == cols => Ok(v.clone()),
            AlphaChoice::PerColumn(v) => Err(Error::Contract(format!(
                "{} alpha values supplied for {cols} development years",
                v.len()
            ))),
        }
    }
}

/// Default prior shape `n(n-1)/2`.
pub fn default_alpha(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Column-sum ratio `Σ S_{i,j} / Σ S_{i,j-1}` for each development year.
pub fn mack_factors(t: &Triangle) -> Result<DevFactors> {
    t.require_cumulative()?;
    let factors = (1..t.n())
        .map(|j| {
            let (num, den) = t.link_pairs(j).fold((0.0, 0.0), |(num, den), (prev, cur)| {
                (num + cur, den + prev)
            });
            if den == 0.0 {
                return Err(Error::ZeroDenominator { column: j });
            }
            Ok(num / den)
        })
        .collect::<Result<Vec<_>>>()?;
    DevFactors::new(Method::Mack, factors)
}

/// Sum of squared link ratios `Σ (S_{i,j}/S_{i,j-1})²` for development year `j`.
fn squared_ratio_sum(t: &Triangle, dev_year: usize) -> f64 {
    t.link_pairs(dev_year)
        .map(|(prev, cur)| {
            let r = cur / prev;
            r * r
        })
        .sum()
}

/// Conjugate inverse-gamma posteriors of `θ_j`, `j = 1..n-1`.
pub fn bayes_posteriors(t: &Triangle, prior: &PriorSpec) -> Result<Vec<InverseGamma>> {
    t.require_cumulative()?;
    let n = t.n();
    if prior.len() != n - 1 {
        return Err(Error::Contract(format!(
            "prior covers {} development years, triangle has {}",
            prior.len(),
            n - 1
        )));
    }
    prior
        .columns()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let j = k + 1;
            let shape = p.alpha() + (n - j) as f64 / 2.0;
            let scale = p.beta() + squared_ratio_sum(t, j) / PI;
            InverseGamma::new(shape, scale)
        })
        .collect()
}

/// Posterior means of `√θ_j`, one per development year.
pub fn bayes_factors(posteriors: &[InverseGamma]) -> Result<DevFactors> {
    let factors = posteriors
        .iter()
        .enumerate()
        .map(|(k, post)| {
            post.mean_sqrt().map_err(|e| match e {
                Error::MomentDoesNotExist { shape, .. } => Error::MomentDoesNotExist {
                    shape,
                    column: Some(k + 1),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DevFactors::new(Method::BayesHalfNormal, factors)
}

/// Data-driven prior: given `α_j`, pick
/// `β_j = [Γ(α_j)/Γ(α_j - 1/2)]² · Σ S²_{i,j} / Σ S²_{i,j-1}`
/// so that `E[√θ_j]` equals the root of the squared-column-sum ratio.
pub fn elicit_prior(t: &Triangle, alpha: &AlphaChoice) -> Result<PriorSpec> {
    t.require_cumulative()?;
    let alphas = alpha.resolve(t.n())?;
    let columns = alphas
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let j = k + 1;
            if !(a > 0.5) || !a.is_finite() {
                return Err(Error::domain("prior alpha", "alpha > 1/2", a));
            }
            let (num, den) = t.link_pairs(j).fold((0.0, 0.0), |(num, den), (prev, cur)| {
                (num + cur * cur, den + prev * prev)
            });
            if den == 0.0 {
                return Err(Error::ZeroDenominator { column: j });
            }
            // Γ²(α)/Γ²(α-1/2) = exp(-2 ln[Γ(α-1/2)/Γ(α)])
            let gamma_sq = libm::exp(-2.0 * libm::log(gamma_ratio_half(a)?));
            prior_column(j, a, gamma_sq * (num / den))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PriorSpec {
        columns,
        mode: ElicitationMode::AutoBeta,
    })
}

/// Projected reserves for accident years `2..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReserveReport {
    pub method: Method,
    pub factors: DevFactors,
    /// Latest observed diagonal `S_{i,n-i}`, indexed like `ultimates`.
    pub latest: Vec<f64>,
    pub ultimates: Vec<f64>,
    pub outstanding: Vec<f64>,
    pub total_reserve: f64,
    pub input_fingerprint: String,
    /// Filled future triangle `Ŝ_{i,j}`.
    pub projection: BTreeMap<FutureCellIndex, f64>,
}

impl ReserveReport {
    /// Accident years covered by `latest`, `ultimates`, and `outstanding`.
    pub fn accident_years(&self) -> core::ops::RangeInclusive<usize> {
        2..=self.ultimates.len() + 1
    }

    pub fn with_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.input_fingerprint = fingerprint.into();
        self
    }
}

/// Ultimates `Ŝ_{i,n-1} = S_{i,n-i} ∏_{j=n-i+1}^{n-1} f_j`, outstanding
/// `R̂_i = Ŝ_{i,n-1} - S_{i,n-i}` and total `R̂ = Σ R̂_i`.
pub fn project(t: &Triangle, factors: &DevFactors) -> Result<ReserveReport> {
    t.require_cumulative()?;
    let n = t.n();
    if factors.len() != n - 1 {
        return Err(Error::Contract(format!(
            "{} development factors supplied for a {n}-year triangle",
            factors.len()
        )));
    }
    let mut latest = Vec::with_capacity(n.saturating_sub(1));
    let mut ultimates = Vec::with_capacity(n.saturating_sub(1));
    let mut outstanding = Vec::with_capacity(n.saturating_sub(1));
    let mut projection = BTreeMap::new();
    for i in 2..=n {
        let diagonal = t.latest(i);
        let mut value = diagonal;
        for j in (n + 1 - i)..n {
            value *= factors.as_slice()[j - 1];
            projection.insert(FutureCellIndex::new(n, i, j)?, value);
        }
        latest.push(diagonal);
        ultimates.push(value);
        outstanding.push(value - diagonal);
    }
    let total_reserve = outstanding.iter().sum();
    Ok(ReserveReport {
        method: factors.method(),
        factors: factors.clone(),
        latest,
        ultimates,
        outstanding,
        total_reserve,
        input_fingerprint: t.fingerprint(),
        projection,
    })
}

/// Mack chain ladder end to end.
pub fn mack_reserve(t: &Triangle) -> Result<ReserveReport> {
    project(t, &mack_factors(t)?)
}

/// Half-normal Bayesian chain ladder end to end.
pub fn bayes_reserve(t: &Triangle, prior: &PriorSpec) -> Result<ReserveReport> {
    project(t, &bayes_factors(&bayes_posteriors(t, prior)?)?)
}

/// Both engines on the same triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub mack: ReserveReport,
    pub bayes: ReserveReport,
    /// `f_j^B - f_j^CL` for `j = 1..n-1`.
    pub factor_deltas: Vec<f64>,
}

pub fn compare(t: &Triangle, prior: &PriorSpec) -> Result<Comparison> {
    let mack = mack_reserve(t)?;
    let bayes = bayes_reserve(t, prior)?;
    let factor_deltas = bayes
        .factors
        .as_slice()
        .iter()
        .zip(mack.factors.as_slice())
        .map(|(b, m)| b - m)
        .collect();
    Ok(Comparison {
        mack,
        bayes,
        factor_deltas,
    })
}
