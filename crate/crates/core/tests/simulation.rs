//! Monte Carlo checks of the generative model and the recovery study.

use std::f64::consts::PI;

use runoff_core::numerics::gamma_ratio_half;
use runoff_core::simulator::{recovery_study, simulate_triangle, GenerativeSpec, ThetaLaw};
use runoff_core::PriorSpec;

/// Composite Simpson on `[a, b]` with `panels` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for k in 1..panels {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * k as f64);
    }
    sum * h / 3.0
}

/// One transition `S_{1,1} | S_{1,0} = 100`: the ratio has mean `√θ` and
/// variance `θ(π/2 - 1)`. The variance bound uses the exact fourth central
/// moment of the half-normal ratio.
#[test]
fn one_step_conditional_moments() {
    const REPS: usize = 100_000;
    let theta = 1.7;
    let spec = GenerativeSpec::new(2, ThetaLaw::Fixed(vec![theta]))
        .unwrap()
        .with_seed(99);
    let ratios: Vec<f64> = (0..REPS)
        .map(|r| simulate_triangle(&spec, r).unwrap().get(1, 1).unwrap() / 100.0)
        .collect();
    let n = REPS as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);

    let mu = theta.sqrt();
    let sigma2 = theta * PI / 2.0;
    let m2 = sigma2;
    let m3 = 2.0 * sigma2.powf(1.5) * (2.0 / PI).sqrt();
    let m4 = 3.0 * sigma2 * sigma2;
    let true_var = m2 - mu * mu;
    let central4 = m4 - 4.0 * mu * m3 + 6.0 * mu * mu * m2 - 3.0 * mu.powi(4);

    assert!((true_var - theta * (PI / 2.0 - 1.0)).abs() < 1e-12);
    assert!(
        (mean - mu).abs() < 3.0 * (true_var / n).sqrt(),
        "mean {mean} vs {mu}"
    );
    let var_se = ((central4 - true_var * true_var) / n).sqrt();
    assert!(
        (var - true_var).abs() < 3.0 * var_se,
        "variance {var} vs {true_var}"
    );
}

/// n = 3, θ = (1.5², 1.1²), prior α = 1, β = 0.01, 2000 replicates.
///
/// Per column the squared-ratio sum over π is `θ_j/2 · χ²_{n-j}`, so the
/// Bayesian factor is a known function of one chi-square variable:
/// column 1 uses `g ~ Exp(1)`, column 2 uses `z²/2` with `z ~ N(0,1)`.
#[test]
fn recovery_matches_sampling_distribution() {
    let theta = [1.5f64 * 1.5, 1.1 * 1.1];
    let (alpha, beta) = (1.0, 0.01);
    let spec = GenerativeSpec::new(3, ThetaLaw::Fixed(theta.to_vec()))
        .unwrap()
        .with_seed(2)
        .with_replications(2000)
        .unwrap();
    let prior = PriorSpec::uniform(3, alpha, beta).unwrap();
    let summary = recovery_study(&spec, &prior).unwrap();
    assert!(summary.failures.is_empty());

    let r1 = gamma_ratio_half(alpha + 1.0).unwrap();
    let e1 = r1
        * simpson(
            |g| (beta + theta[0] * g).sqrt() * (-g).exp(),
            0.0,
            60.0,
            200_000,
        );
    let r2 = gamma_ratio_half(alpha + 0.5).unwrap();
    let phi = |z: f64| (-z * z / 2.0).exp() / (2.0 * PI).sqrt();
    let e2 = r2
        * simpson(
            |z| (beta + theta[1] * z * z / 2.0).sqrt() * phi(z),
            -12.0,
            12.0,
            200_000,
        );

    for (col, expected) in summary.columns.iter().zip([e1, e2]) {
        assert_eq!(col.samples, 2000);
        assert!(
            (col.mean_factor - expected).abs() < 3.0 * col.standard_error,
            "dev {}: mean {} vs {} (se {})",
            col.dev_year,
            col.mean_factor,
            expected,
            col.standard_error
        );
        assert!((col.mean_true_sqrt_theta - theta[col.dev_year - 1].sqrt()).abs() < 1e-12);
    }
}

#[test]
fn replicates_are_pure_functions_of_seed_and_index() {
    let spec = GenerativeSpec::new(6, ThetaLaw::Fixed(vec![1.2; 5]))
        .unwrap()
        .with_seed(123);
    let forward: Vec<_> = (0..20)
        .map(|r| simulate_triangle(&spec, r).unwrap())
        .collect();
    let backward: Vec<_> = (0..20)
        .rev()
        .map(|r| simulate_triangle(&spec, r).unwrap())
        .collect();
    for (a, b) in forward.iter().zip(backward.iter().rev()) {
        assert_eq!(a, b);
    }
    assert_ne!(forward[0], forward[1]);
    let other = spec.clone().with_seed(124);
    assert_ne!(simulate_triangle(&other, 0).unwrap(), forward[0]);
}
