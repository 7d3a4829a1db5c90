//! Quadrature cross-checks of the closed-form results.
//!
//! Every check recomputes a quantity from densities alone and compares it with
//! the closed form the engines use. The posterior check in particular starts
//! from the unsimplified product of the inverse-gamma prior kernel and the
//! half-normal likelihood, never from the conjugate update.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::f64::consts::PI;

use crate::distributions::{HalfNormal, InverseGamma};
use crate::error::Result;
use crate::numerics::{gamma_ratio_half, integrate, log_gamma, std_normal_cdf, QuadratureSpec};
use crate::reserving::{bayes_factors, bayes_posteriors, elicit_prior, AlphaChoice, PriorSpec};
use crate::triangle::{Triangle, TriangleKind};

/// One identity, evaluated over its whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub identity: String,
    /// Worst error observed over the grid.
    pub achieved: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub passed: bool,
}

impl OracleCheck {
    fn from_errors(identity: &str, tolerance: f64, errors: &[f64]) -> Self {
        let achieved = errors.iter().copied().fold(0.0, f64::max);
        let finite = errors.iter().all(|e| e.is_finite());
        OracleCheck {
            identity: identity.into(),
            achieved: if finite { achieved } else { f64::INFINITY },
            tolerance,
            cases: errors.len(),
            passed: finite && achieved <= tolerance,
        }
    }
}

/// Parameter grids for [`verify`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyGrid {
    pub omegas: Vec<f64>,
    pub mgf_points: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub elicitation_alphas: Vec<f64>,
    pub triangles: Vec<Triangle>,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        VerifyGrid {
            omegas: vec![0.5, 1.0, 2.0],
            mgf_points: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            alphas: vec![0.75, 1.0, 3.5, 10.0, 45.0],
            betas: vec![0.01, 1.0, 3.0, 100.0],
            elicitation_alphas: vec![1.0, 5.0, 45.0],
            triangles: vec![reference_triangle()],
        }
    }
}

/// The three-year cumulative triangle used throughout the documentation.
pub fn reference_triangle() -> Triangle {
    Triangle::new(
        TriangleKind::Cumulative,
        vec![vec![100.0, 150.0, 165.0], vec![110.0, 154.0], vec![120.0]],
    )
    .expect("valid reference triangle")
}

fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn spec(lower: f64, upper: f64) -> Result<QuadratureSpec> {
    QuadratureSpec::over(lower, upper)?.with_rel_tol(1e-12)
}

/// `(∫ e^{L(θ)} dθ, ∫ g(θ) e^{L(θ)} dθ)` over `θ > 0`, both scaled by the same
/// unknown constant. `L` is an unnormalised log density; the integral runs in
/// `t = ln θ` around the highest point of a coarse scan.
pub fn log_scale_moments(
    ln_density: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    let log_weight = |t: f64| ln_density(libm::exp(t)) + t;
    let mut best_t = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut t = -60.0;
    while t <= 60.0 {
        let v = log_weight(t);
        if v > best {
            best = v;
            best_t = t;
        }
        t += 0.02;
    }
    let weight = |s: f64| {
        let w = libm::exp(log_weight(best_t + s) - best);
        if w.is_finite() {
            w
        } else {
            0.0
        }
    };
    let whole_line = spec(f64::NEG_INFINITY, f64::INFINITY)?;
    let mass = integrate(weight, &whole_line)?;
    let moment = integrate(
        |s| {
            let w = weight(s);
            if w == 0.0 {
                0.0
            } else {
                g(libm::exp(best_t + s)) * w
            }
        },
        &whole_line,
    )?;
    Ok((mass, moment))
}

/// `E[√θ_j | S]` with the posterior taken as prior kernel × half-normal
/// likelihood of the observed links in development year `j`.
pub fn posterior_mean_sqrt_by_quadrature(
    t: &Triangle,
    dev_year: usize,
    prior: &InverseGamma,
) -> Result<f64> {
    let links: Vec<(f64, f64)> = t.link_pairs(dev_year).collect();
    let (alpha, beta) = (prior.alpha(), prior.beta());
    let ln_post = |theta: f64| {
        let mut lp = -(alpha + 1.0) * libm::log(theta) - beta / theta;
        for &(prev, cur) in &links {
            let density = HalfNormal::new(theta * prev * prev)
                .and_then(|hn| hn.pdf(cur))
                .unwrap_or(0.0);
            lp += libm::log(density);
        }
        lp
    };
    let (mass, moment) = log_scale_moments(ln_post, libm::sqrt)?;
    Ok(moment / mass)
}

/// Runs every identity on `grid`.
pub fn verify(grid: &VerifyGrid) -> Result<Vec<OracleCheck>> {
    let mut checks = Vec::new();

    let lg: Vec<f64> = (0..200)
        .map(|k| 0.5 + k as f64 * 0.4975)
        .map(|x| Ok((log_gamma(x + 1.0)? - log_gamma(x)? - libm::log(x)).abs()))
        .collect::<Result<_>>()?;
    checks.push(OracleCheck::from_errors(
        "log_gamma recurrence lnΓ(x+1) = lnΓ(x) + ln x",
        1e-11,
        &lg,
    ));

    let ratio: Vec<f64> = [0.6, 0.75, 1.0, 2.5, 10.0, 45.0, 1e3, 1e6]
        .iter()
        .map(|&a| {
            let prod = gamma_ratio_half(a)? * gamma_ratio_half(a + 0.5)?;
            Ok(rel_err(prod, 1.0 / (a - 0.5)))
        })
        .collect::<Result<_>>()?;
    checks.push(OracleCheck::from_errors(
        "gamma ratio recurrence r(a) r(a+1/2) = 1/(a-1/2)",
        1e-10,
        &ratio,
    ));

    let phi: Vec<f64> = (0..=80)
        .map(|k| -8.0 + 0.2 * k as f64)
        .map(|z| {
            Ok((std_normal_cdf(z)
                - integrate(
                    crate::numerics::std_normal_pdf,
                    &spec(f64::NEG_INFINITY, z)?,
                )?)
            .abs())
        })
        .collect::<Result<_>>()?;
    checks.push(OracleCheck::from_errors(
        "normal CDF matches quadrature of the density",
        1e-12,
        &phi,
    ));

    let mut norm = Vec::new();
    let mut mean = Vec::new();
    let mut var = Vec::new();
    let mut mgf = Vec::new();
    for &omega in &grid.omegas {
        let d = HalfNormal::new(omega)?;
        let pdf = |x: f64| d.pdf(x).unwrap_or(0.0);
        let half_line = spec(0.0, f64::INFINITY)?;
        let m0 = integrate(pdf, &half_line)?;
        let m1 = integrate(|x| x * pdf(x), &half_line)?;
        let m2 = integrate(|x| x * x * pdf(x), &half_line)?;
        norm.push((m0 - 1.0).abs());
        mean.push((m1 - d.mean()).abs());
        var.push((m2 - m1 * m1 - d.variance()).abs());
        for &t in &grid.mgf_points {
            let q = integrate(
                |x| 2.0 / (PI * libm::sqrt(omega)) * libm::exp(t * x - x * x / (omega * PI)),
                &half_line,
            )?;
            mgf.push((d.mgf(t) - q).abs());
        }
    }
    checks.push(OracleCheck::from_errors(
        "half-normal density integrates to 1",
        1e-7,
        &norm,
    ));
    checks.push(OracleCheck::from_errors(
        "half-normal mean E[X] = √ω",
        1e-8,
        &mean,
    ));
    checks.push(OracleCheck::from_errors(
        "half-normal variance ω(π/2 - 1)",
        1e-8,
        &var,
    ));
    checks.push(OracleCheck::from_errors(
        "half-normal MGF closed form vs quadrature",
        1e-6,
        &mgf,
    ));

    let mut ig_norm = Vec::new();
    let mut ig_sqrt = Vec::new();
    for &alpha in &grid.alphas {
        for &beta in &grid.betas {
            let d = InverseGamma::new(alpha, beta)?;
            let ln_pdf = |th: f64| d.ln_pdf(th).unwrap_or(f64::NEG_INFINITY);
            let (mass, moment) = log_scale_moments(ln_pdf, libm::sqrt)?;
            ig_sqrt.push(rel_err(moment / mass, d.mean_sqrt()?));
            let unit = integrate(
                |t: f64| {
                    let w = libm::exp(ln_pdf(libm::exp(t)) + t);
                    if w.is_finite() {
                        w
                    } else {
                        0.0
                    }
                },
                &spec(f64::NEG_INFINITY, f64::INFINITY)?,
            )?;
            ig_norm.push((unit - 1.0).abs());
        }
    }
    checks.push(OracleCheck::from_errors(
        "inverse-gamma density integrates to 1",
        1e-7,
        &ig_norm,
    ));
    checks.push(OracleCheck::from_errors(
        "E[√Θ] = Γ(α-1/2)/Γ(α) √β vs quadrature",
        1e-8,
        &ig_sqrt,
    ));

    let mut post = Vec::new();
    let mut shapes = Vec::new();
    for tri in &grid.triangles {
        let n = tri.n();
        for &alpha in &grid.alphas {
            for &beta in &grid.betas {
                let prior = PriorSpec::uniform(n, alpha, beta)?;
                let posteriors = bayes_posteriors(tri, &prior)?;
                let factors = bayes_factors(&posteriors)?;
                for (k, p) in prior.columns().iter().enumerate() {
                    let j = k + 1;
                    let q = posterior_mean_sqrt_by_quadrature(tri, j, p)?;
                    post.push(rel_err(factors.as_slice()[k], q));
                    shapes.push((posteriors[k].alpha() - p.alpha() - (n - j) as f64 / 2.0).abs());
                }
            }
        }
    }
    checks.push(OracleCheck::from_errors(
        "Bayesian factor vs quadrature of prior × half-normal likelihood",
        1e-8,
        &post,
    ));
    checks.push(OracleCheck::from_errors(
        "posterior shape increment (n-j)/2",
        0.0,
        &shapes,
    ));

    let mut elicit = Vec::new();
    for tri in &grid.triangles {
        for &alpha in &grid.elicitation_alphas {
            let prior = elicit_prior(tri, &AlphaChoice::Uniform(alpha))?;
            for (k, mean) in prior.mean_factors()?.into_iter().enumerate() {
                let (num, den) = tri
                    .link_pairs(k + 1)
                    .fold((0.0, 0.0), |(a, b), (p, c)| (a + c * c, b + p * p));
                elicit.push(rel_err(mean, libm::sqrt(num / den)));
            }
        }
    }
    checks.push(OracleCheck::from_errors(
        "elicited prior mean factor = √(ΣS²_j / ΣS²_{j-1})",
        1e-10,
        &elicit,
    ));

    Ok(checks)
}

/// One-line rendering used by the CLI.
pub fn describe(check: &OracleCheck) -> String {
    format!(
        "{} {} (worst error {:.3e}, tolerance {:.1e}, {} cases)",
        if check.passed { "PASS" } else { "FAIL" },
        check.identity,
        check.achieved,
        check.tolerance,
        check.cases
    )
}
