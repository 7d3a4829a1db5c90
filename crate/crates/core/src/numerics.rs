//! Scalar special functions and adaptive quadrature.
//!
//! `log_gamma` uses the Stirling series on `[10, ∞)` and reaches smaller
//! arguments through the upward recurrence. `integrate` is a global adaptive
//! Gauss–Kronrod (7/15) scheme; infinite endpoints are mapped onto a finite
//! interval before subdivision starts.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

const STIRLING_THRESHOLD: f64 = 10.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k - 1)), k = 1..8
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Stirling correction `ln Γ(x) - [(x - 1/2) ln x - x + ln(2π)/2]` for `x >= 10`.
fn stirling_correction(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

/// Natural logarithm of the gamma function for positive arguments.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("log_gamma argument", "x > 0 and finite", x));
    }
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < STIRLING_THRESHOLD {
        product *= shifted;
        shifted += 1.0;
    }
    let stirling =
        (shifted - 0.5) * libm::log(shifted) - shifted + HALF_LN_2PI + stirling_correction(shifted);
    Ok(stirling - libm::log(product))
}

/// `Γ(a - 1/2) / Γ(a)`, evaluated in log space.
///
/// Above the Stirling threshold the two log-gammas are differenced analytically,
/// which keeps full relative precision for very large `a`.
pub fn gamma_ratio_half(a: f64) -> Result<f64> {
    if !(a > 0.5) || !a.is_finite() {
        return Err(Error::domain(
            "gamma_ratio_half argument",
            "a > 1/2 and finite",
            a,
        ));
    }
    let log_ratio = if a - 0.5 >= STIRLING_THRESHOLD {
        // ln Γ(a-1/2) - ln Γ(a)
        //   = -ln(a)/2 + (a-1) ln(1 - 1/(2a)) + 1/2 + corr(a-1/2) - corr(a)
        -0.5 * libm::log(a)
            + (a - 1.0) * libm::log1p(-0.5 / a)
            + 0.5
            + (stirling_correction(a - 0.5) - stirling_correction(a))
    } else {
        log_gamma(a - 0.5)? - log_gamma(a)?
    };
    Ok(libm::exp(log_ratio))
}

/// Standard normal CDF Φ(z).
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Density of the standard normal distribution.
pub fn std_normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * PI)
}

/// Integration domain and stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    lower: f64,
    upper: f64,
    rel_tol: f64,
    max_subdivisions: usize,
}

impl QuadratureSpec {
    pub const DEFAULT_REL_TOL: f64 = 1e-10;
    pub const DEFAULT_MAX_SUBDIVISIONS: usize = 2000;

    pub fn new(lower: f64, upper: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || !(lower < upper) {
            return Err(Error::Contract(alloc::format!(
                "quadrature bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::domain("relative tolerance", "0 < tol < 1", rel_tol));
        }
        if max_subdivisions == 0 {
            return Err(Error::Contract("max subdivisions must be positive".into()));
        }
        Ok(QuadratureSpec {
            lower,
            upper,
            rel_tol,
            max_subdivisions,
        })
    }

    /// `[lower, upper]` with the default tolerance and subdivision budget.
    pub fn over(lower: f64, upper: f64) -> Result<Self> {
        Self::new(
            lower,
            upper,
            Self::DEFAULT_REL_TOL,
            Self::DEFAULT_MAX_SUBDIVISIONS,
        )
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Result<Self> {
        Self::new(self.lower, self.upper, rel_tol, self.max_subdivisions)
    }

    pub fn with_max_subdivisions(self, max_subdivisions: usize) -> Result<Self> {
        Self::new(self.lower, self.upper, self.rel_tol, max_subdivisions)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }
}

// Kronrod abscissae, descending; the last entry is the centre.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = g(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for k in 0..7 {
        let dx = half * XGK[k];
        let f1 = g(center - dx);
        let f2 = g(center + dx);
        fv1[k] = f1;
        fv2[k] = f2;
        kronrod += WGK[k] * (f1 + f2);
        res_abs += WGK[k] * (f1.abs() + f2.abs());
        if k % 2 == 1 {
            gauss += WG[k / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for k in 0..7 {
        res_asc += WGK[k] * ((fv1[k] - mean).abs() + (fv2[k] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * libm::pow(200.0 * error / res_asc, 1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over the domain of `spec`.
///
/// Semi-infinite ranges use `x = a + u/(1-u)` (or its mirror), the doubly
/// infinite range uses `x = u/(1-u²)`. Integrand values of exactly zero
/// short-circuit the Jacobian so `0 · ∞` never appears at the mapped endpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    let (lo, hi) = (spec.lower, spec.upper);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adapt(&f, lo, hi, spec),
        (true, false) => {
            let g = |u: f64| {
                let one_minus = 1.0 - u;
                let v = f(lo + u / one_minus);
                if v == 0.0 {
                    0.0
                } else {
                    v / (one_minus * one_minus)
                }
            };
            adapt(&g, 0.0, 1.0, spec)
        }
        (false, true) => {
            let g = |u: f64| {
                let one_minus = 1.0 - u;
                let v = f(hi - u / one_minus);
                if v == 0.0 {
                    0.0
                } else {
                    v / (one_minus * one_minus)
                }
            };
            adapt(&g, 0.0, 1.0, spec)
        }
        (false, false) => {
            let g = |u: f64| {
                let d = 1.0 - u * u;
                let v = f(u / d);
                if v == 0.0 {
                    0.0
                } else {
                    v * (1.0 + u * u) / (d * d)
                }
            };
            adapt(&g, -1.0, 1.0, spec)
        }
    }
}

fn adapt<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    let first = kronrod15(g, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    if !total.is_finite() {
        return Err(Error::Convergence {
            estimate: total,
            error_estimate: total_err,
            subdivisions: 0,
        });
    }
    let converged = |value: f64, err: f64| err <= spec.rel_tol * value.abs() || err == 0.0;
    if converged(total, total_err) {
        return Ok(total);
    }

    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    heap.push(first);
    let mut subdivisions = 0;
    while let Some(worst) = heap.pop() {
        if subdivisions >= spec.max_subdivisions {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Bisection has hit floating-point resolution.
            frozen_value += worst.value;
            frozen_err += worst.error;
            continue;
        }
        let left = kronrod15(g, worst.a, mid);
        let right = kronrod15(g, mid, worst.b);
        subdivisions += 1;
        heap.push(left);
        heap.push(right);

        // Resum from scratch periodically to keep the running totals honest.
        if subdivisions % 64 == 0 {
            total = frozen_value + heap.iter().map(|s| s.value).sum::<f64>();
            total_err = frozen_err + heap.iter().map(|s| s.error).sum::<f64>();
        } else {
            total += left.value + right.value - worst.value;
            total_err += left.error + right.error - worst.error;
        }
        if !total.is_finite() {
            break;
        }
        if converged(total, total_err) {
            let value = frozen_value + heap.iter().map(|s| s.value).sum::<f64>();
            let err = frozen_err + heap.iter().map(|s| s.error).sum::<f64>();
            if converged(value, err) {
                return Ok(value);
            }
            total = value;
            total_err = err;
        }
    }
    let value = frozen_value + heap.iter().map(|s| s.value).sum::<f64>();
    let err = frozen_err + heap.iter().map(|s| s.error).sum::<f64>();
    if value.is_finite() && converged(value, err) {
        return Ok(value);
    }
    Err(Error::Convergence {
        estimate: value,
        error_estimate: err,
        subdivisions,
    })
}

/// Finds `x` in `[lo, hi]` with `f(x) = 0` by bisection, given a sign change.
///
/// Stops once the bracket is narrower than `x_rel_tol` relative to its midpoint.
pub fn bisect<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x_rel_tol: f64,
) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::Root("empty bracket"));
    }
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Root("no sign change over the bracket"));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_rel_tol * mid.abs() || !(lo < mid && mid < hi) {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
