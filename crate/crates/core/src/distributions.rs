//! Half-normal and inverse-gamma laws in the parametrisations the reserving
//! model uses.
//!
//! `HalfNormal(ω)` is the law of `|Y|` with `Y ~ N(0, ωπ/2)`, so its mean is
//! `√ω` rather than the usual `σ√(2/π)`. `InverseGamma(α, β)` has the kernel
//! `θ^{-(α+1)} e^{-β/θ}`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{self, bisect, integrate, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfNormal {
    omega: f64,
}

impl HalfNormal {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::domain("half-normal scale omega", "omega > 0", omega));
        }
        Ok(HalfNormal { omega })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `2/(π√ω) · exp(-x²/(ωπ))` for `x >= 0`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain("half-normal argument", "x >= 0", x));
        }
        Ok(2.0 / (PI * libm::sqrt(self.omega)) * libm::exp(-x * x / (self.omega * PI)))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        // 2Φ(x √(2/(πω))) - 1, written through erf to keep the left tail exact.
        libm::erf(x / libm::sqrt(PI * self.omega))
    }

    pub fn mean(&self) -> f64 {
        libm::sqrt(self.omega)
    }

    pub fn second_moment(&self) -> f64 {
        PI * self.omega / 2.0
    }

    pub fn variance(&self) -> f64 {
        self.omega * (PI / 2.0 - 1.0)
    }

    pub fn mgf(&self, t: f64) -> f64 {
        let half_var = PI * self.omega / 4.0;
        2.0 * libm::exp(half_var * t * t)
            * (1.0 - numerics::std_normal_cdf(-t * libm::sqrt(PI * self.omega / 2.0)))
    }

    /// One draw of `|Y|`, `Y ~ N(0, ωπ/2)`.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        (z * libm::sqrt(PI * self.omega / 2.0)).abs()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGamma {
    alpha: f64,
    beta: f64,
}

impl InverseGamma {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::domain(
                "inverse-gamma shape alpha",
                "alpha > 0",
                alpha,
            ));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain("inverse-gamma scale beta", "beta > 0", beta));
        }
        Ok(InverseGamma { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ln_pdf(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0) {
            return Err(Error::domain("inverse-gamma argument", "theta > 0", theta));
        }
        Ok(self.alpha * libm::log(self.beta)
            - numerics::log_gamma(self.alpha)?
            - (self.alpha + 1.0) * libm::log(theta)
            - self.beta / theta)
    }

    /// `β^α/Γ(α) · θ^{-(α+1)} e^{-β/θ}`.
    pub fn pdf(&self, theta: f64) -> Result<f64> {
        Ok(libm::exp(self.ln_pdf(theta)?))
    }

    /// Mode `β/(α+1)`.
    pub fn mode(&self) -> f64 {
        self.beta / (self.alpha + 1.0)
    }

    /// `E[√Θ] = Γ(α-1/2)/Γ(α) · √β`, defined for `α > 1/2`.
    pub fn mean_sqrt(&self) -> Result<f64> {
        if !(self.alpha > 0.5) {
            return Err(Error::MomentDoesNotExist {
                shape: self.alpha,
                column: None,
            });
        }
        Ok(numerics::gamma_ratio_half(self.alpha)? * libm::sqrt(self.beta))
    }

    /// `P(Θ <= θ)` by quadrature of the density.
    ///
    /// `Θ/β` follows the unit-scale law, so the integral is always taken for
    /// `β = 1`; above the mode the upper tail is integrated instead.
    pub fn cdf(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0) {
            return Ok(0.0);
        }
        if theta == f64::INFINITY {
            return Ok(1.0);
        }
        let unit = InverseGamma::new(self.alpha, 1.0)?;
        let x = theta / self.beta;
        let density = |t: f64| {
            if t > 0.0 {
                unit.pdf(t).unwrap_or(0.0)
            } else {
                0.0
            }
        };
        if x <= unit.mode() {
            let spec = QuadratureSpec::over(0.0, x)?.with_rel_tol(1e-12)?;
            integrate(density, &spec)
        } else {
            let spec = QuadratureSpec::over(x, f64::INFINITY)?.with_rel_tol(1e-12)?;
            Ok(1.0 - integrate(density, &spec)?)
        }
    }

    /// Inverse of [`InverseGamma::cdf`] by bisection in `ln θ`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain("quantile probability", "0 < p < 1", p));
        }
        let unit = InverseGamma::new(self.alpha, 1.0)?;
        let mut lo = libm::log(unit.mode());
        let mut hi = lo;
        while unit.cdf(libm::exp(lo))? > p {
            lo -= 2.0;
            if lo < -700.0 {
                return Err(Error::Root("quantile below representable range"));
            }
        }
        while unit.cdf(libm::exp(hi))? < p {
            hi += 2.0;
            if hi > 700.0 {
                return Err(Error::Root("quantile above representable range"));
            }
        }
        if lo == hi {
            return Ok(self.beta * libm::exp(lo));
        }
        let log_q = bisect(|l| Ok(unit.cdf(libm::exp(l))? - p), lo, hi, 1e-13)?;
        Ok(self.beta * libm::exp(log_q))
    }

    /// One draw as `β / G` with `G ~ Gamma(α, 1)`.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let gamma = Gamma::new(self.alpha, 1.0).expect("validated shape");
        let g: f64 = gamma.sample(rng);
        self.beta / g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quad(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let spec = QuadratureSpec::over(lo, hi)
            .unwrap()
            .with_rel_tol(1e-12)
            .unwrap();
        integrate(f, &spec).unwrap()
    }

    #[test]
    fn half_normal_pdf_values() {
        let d = HalfNormal::new(1.0).unwrap();
        assert!((d.pdf(0.0).unwrap() - core::f64::consts::FRAC_2_PI).abs() < 1e-15);
        assert!((d.pdf(0.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        let d4 = HalfNormal::new(4.0).unwrap();
        assert!((d4.pdf(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!(matches!(d.pdf(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn half_normal_rejects_bad_scale() {
        assert!(HalfNormal::new(0.0).is_err());
        assert!(HalfNormal::new(-1.0).is_err());
        assert!(HalfNormal::new(f64::NAN).is_err());
    }

    #[test]
    fn half_normal_moments_against_quadrature() {
        for &omega in &[0.5, 1.0, 2.0] {
            let d = HalfNormal::new(omega).unwrap();
            let pdf = |x: f64| d.pdf(x).unwrap();
            let mass = quad(pdf, 0.0, f64::INFINITY);
            let m1 = quad(|x| x * pdf(x), 0.0, f64::INFINITY);
            let m2 = quad(|x| x * x * pdf(x), 0.0, f64::INFINITY);
            assert!((mass - 1.0).abs() < 1e-10);
            assert!((m1 - d.mean()).abs() < 1e-8, "omega {omega}");
            assert!((m2 - m1 * m1 - d.variance()).abs() < 1e-8);
            assert!((d.mean().powi(2) + d.variance() - d.second_moment()).abs() < 1e-14);
        }
        assert!((HalfNormal::new(4.0).unwrap().mean() - 2.0).abs() < 1e-15);
        assert!((HalfNormal::new(1.0).unwrap().variance() - 0.570_796_326_8).abs() < 1e-10);
        assert!((HalfNormal::new(2.0).unwrap().variance() - 1.141_592_653_6).abs() < 1e-10);
    }

    #[test]
    fn half_normal_mgf() {
        for &omega in &[0.3, 1.0, 7.0] {
            assert!((HalfNormal::new(omega).unwrap().mgf(0.0) - 1.0).abs() < 1e-15);
        }
        let d = HalfNormal::new(1.0).unwrap();
        for &t in &[-1.0, 1.0] {
            let q = quad(
                |x| 2.0 / PI * (t * x - x * x / PI).exp(),
                0.0,
                f64::INFINITY,
            );
            assert!((d.mgf(t) - q).abs() < 1e-6);
        }
        let h = 1e-5;
        let slope = (d.mgf(h) - d.mgf(-h)) / (2.0 * h);
        assert!((slope - d.mean()).abs() < 1e-4);
    }

    #[test]
    fn half_normal_cdf_matches_density() {
        let d = HalfNormal::new(1.7).unwrap();
        for &x in &[0.1, 0.8, 2.0, 5.0] {
            let q = quad(|s| d.pdf(s).unwrap(), 0.0, x);
            assert!((d.cdf(x) - q).abs() < 1e-12);
        }
        assert_eq!(d.cdf(-1.0), 0.0);
    }

    #[test]
    fn half_normal_sampling_is_deterministic() {
        let d = HalfNormal::new(1.0).unwrap();
        let a = d.sample(&mut ChaCha8Rng::seed_from_u64(11), 5);
        let b = d.sample(&mut ChaCha8Rng::seed_from_u64(11), 5);
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn inverse_gamma_pdf_values() {
        let d = InverseGamma::new(1.0, 1.0).unwrap();
        assert!((d.pdf(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((d.pdf(1.0).unwrap() - 0.367_879_441_2).abs() < 1e-10);
        assert!(matches!(d.pdf(0.0), Err(Error::Domain { .. })));
        assert!(InverseGamma::new(0.0, 1.0).is_err());
        assert!(InverseGamma::new(1.0, 0.0).is_err());
    }

    #[test]
    fn inverse_gamma_normalises_and_peaks_at_mode() {
        let d = InverseGamma::new(2.0, 3.0).unwrap();
        let mass = quad(
            |t| if t > 0.0 { d.pdf(t).unwrap() } else { 0.0 },
            0.0,
            f64::INFINITY,
        );
        assert!((mass - 1.0).abs() < 1e-9);
        assert_eq!(d.mode(), 1.0);
        let peak = d.pdf(1.0).unwrap();
        for k in 1..400 {
            let theta = k as f64 * 0.01;
            assert!(peak >= d.pdf(theta).unwrap());
        }
    }

    #[test]
    fn inverse_gamma_mean_sqrt() {
        let d = InverseGamma::new(1.0, 1.0).unwrap();
        assert!((d.mean_sqrt().unwrap() - PI.sqrt()).abs() < 1e-13);
        let d = InverseGamma::new(3.5, 3.0).unwrap();
        assert!((d.mean_sqrt().unwrap() - 1.042_352_025_393).abs() < 1e-11);
        let d = InverseGamma::new(2.0, 5.0).unwrap();
        let q = quad(
            |t| {
                if t > 0.0 {
                    t.sqrt() * d.pdf(t).unwrap()
                } else {
                    0.0
                }
            },
            0.0,
            f64::INFINITY,
        );
        assert!((d.mean_sqrt().unwrap() - q).abs() < 1e-8);
        let heavy = InverseGamma::new(0.5, 1.0).unwrap();
        assert!(matches!(
            heavy.mean_sqrt(),
            Err(Error::MomentDoesNotExist { .. })
        ));
    }

    #[test]
    fn inverse_gamma_cdf_and_quantile() {
        // α = 1: P(Θ <= θ) = exp(-β/θ)
        let d = InverseGamma::new(1.0, 2.0).unwrap();
        for &theta in &[0.3, 1.0, 2.0, 9.0, 100.0] {
            assert!((d.cdf(theta).unwrap() - (-2.0 / theta).exp()).abs() < 1e-11);
        }
        for &p in &[0.05, 0.5, 0.95] {
            let q = d.quantile(p).unwrap();
            let exact = -2.0 / p.ln();
            assert!(((q - exact) / exact).abs() < 1e-9, "p {p}: {q} vs {exact}");
        }
        let d = InverseGamma::new(3.5, 0.7).unwrap();
        let q = d.quantile(0.9).unwrap();
        assert!((d.cdf(q).unwrap() - 0.9).abs() < 1e-10);
    }

    #[test]
    fn inverse_gamma_sampler_mean() {
        // E[Θ] = β/(α-1)
        let d = InverseGamma::new(6.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let mean = (0..n).map(|_| d.sample_one(&mut rng)).sum::<f64>() / n as f64;
        // sd of Θ is β/((α-1)√(α-2)) = 1
        assert!((mean - 2.0).abs() < 4.0 / (n as f64).sqrt());
    }
}
