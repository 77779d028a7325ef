//! Leading-order bias and variance expansions of the asymmetric-kernel
//! estimators, their MSE/MISE, closed-form moments of the minimum of two
//! kernel variates, and an empirical normality check.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::RngCore;
use rayon::prelude::*;

use crate::bandwidth::{mise_constants, LimitTable, MiseConstants};
use crate::distributions::{KernelKind, MappedKernel, RngStream, TargetDistribution};
use crate::error::{domain, Error, Result};
use crate::estimators::{EstimatorKind, FittedEstimator};
use crate::quadrature::{integrate_half_line, integrate_half_line_with_breaks, QuadratureSpec, Transform};
use crate::specfun::{ln_gamma_ratio, std_normal_cdf};

fn unsupported<T>(kind: KernelKind) -> Result<T> {
    Err(Error::Unsupported(format!("no leading-order expansion is available for the {} kernel", kind.name())))
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("expansion point must be positive, got {x}"));
    }
    Ok(())
}

/// Coefficient of `b` in the bias of the estimator at `x`.
pub fn leading_bias(kind: KernelKind, x: f64, f: f64, fprime: f64) -> Result<f64> {
    check_x(x)?;
    match kind {
        KernelKind::Gam => Ok(f + 0.5 * x * fprime),
        KernelKind::IGam | KernelKind::IGau | KernelKind::RIG => Ok(0.5 * x * x * fprime),
        KernelKind::LN | KernelKind::BS => Ok(0.5 * x * (f + x * fprime)),
        KernelKind::W => unsupported(kind),
    }
}

/// Coefficient of `-n^{-1} b^{1/2}` in the variance of the estimator at `x`.
/// IGau and RIG need `c(x) = lim b^{-1/2} E|T1 - T2|`.
pub fn variance_correction(kind: KernelKind, x: f64, f: f64, c_of_x: Option<f64>) -> Result<f64> {
    check_x(x)?;
    let sqrt_pi = PI.sqrt();
    match kind {
        KernelKind::Gam => Ok(x.sqrt() * f / sqrt_pi),
        KernelKind::IGam | KernelKind::LN | KernelKind::BS => Ok(x * f / sqrt_pi),
        KernelKind::IGau | KernelKind::RIG => match c_of_x {
            Some(c) => Ok(0.5 * f * c),
            None => domain(format!("{} expansion needs the limit constant c(x)", kind.name())),
        },
        KernelKind::W => unsupported(kind),
    }
}

/// Pointwise expansion pieces at one `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerms {
    pub kernel: KernelKind,
    pub x: f64,
    pub leading_bias: f64,
    /// `F(x)(1 - F(x))`
    pub variance_main: f64,
    pub variance_correction: f64,
}

impl ExpansionTerms {
    pub fn new(kind: KernelKind, x: f64, cdf: f64, f: f64, fprime: f64, c_of_x: Option<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&cdf) {
            return domain(format!("F(x) must lie in [0, 1], got {cdf}"));
        }
        Ok(ExpansionTerms {
            kernel: kind,
            x,
            leading_bias: leading_bias(kind, x, f, fprime)?,
            variance_main: cdf * (1.0 - cdf),
            variance_correction: variance_correction(kind, x, f, c_of_x)?,
        })
    }

    /// Terms for a known law; IGau and RIG read `c(x)` from `limits`.
    pub fn for_law(kind: KernelKind, truth: &TargetDistribution, x: f64, limits: Option<&LimitTable>) -> Result<Self> {
        check_x(x)?;
        let c = limits.map(|t| t.value(x));
        ExpansionTerms::new(kind, x, truth.cdf_at(x), truth.pdf_at(x), truth.pdf_deriv_at(x), c)
    }

    pub fn variance(&self, n: usize, b: f64) -> f64 {
        (self.variance_main - b.sqrt() * self.variance_correction) / n as f64
    }

    pub fn squared_bias(&self, b: f64) -> f64 {
        (b * self.leading_bias).powi(2)
    }

    pub fn mse(&self, n: usize, b: f64) -> Result<f64> {
        check_nb(n, b)?;
        Ok(self.variance(n, b) + self.squared_bias(b))
    }
}

fn check_nb(n: usize, b: f64) -> Result<()> {
    if n == 0 {
        return domain("sample size must be positive");
    }
    if !(b >= 0.0 && b.is_finite()) {
        return domain(format!("bandwidth must be nonnegative, got {b}"));
    }
    Ok(())
}

/// `n^{-1} F(1-F) - n^{-1} b^{1/2} varcorr + b^2 bias^2`.
#[allow(clippy::too_many_arguments)]
pub fn asymptotic_mse(kind: KernelKind, x: f64, cdf: f64, f: f64, fprime: f64, n: usize, b: f64, c_of_x: Option<f64>) -> Result<f64> {
    ExpansionTerms::new(kind, x, cdf, f, fprime, c_of_x)?.mse(n, b)
}

fn precondition(e: Error) -> Error {
    match e {
        Error::Selection(m) => Error::Domain(m),
        other => other,
    }
}

fn spread(density: &TargetDistribution) -> Result<f64> {
    let spec = QuadratureSpec { abs_tol: 1e-15, rel_tol: 1e-12, max_subdivisions: 512, transform: Transform::DoubleExponential };
    integrate_half_line(|x| density.cdf_at(x) * density.sf_at(x), &spec)
        .map(|e| e.value)
        .map_err(|_| Error::Domain("int F(1-F) does not converge".into()))
}

/// Integrated leading-order MSE, `n^{-1} int F(1-F) - n^{-1} b^{1/2} V + b^2 B`.
pub fn asymptotic_mise(kind: KernelKind, density: &TargetDistribution, n: usize, b: f64, limits: Option<&LimitTable>) -> Result<f64> {
    check_nb(n, b)?;
    let c = mise_constants(kind, density, limits).map_err(precondition)?;
    Ok(mise_value(spread(density)?, &c, n as f64, b))
}

/// The bandwidth-dependent part of [`asymptotic_mise`], `-n^{-1} b^{1/2} V + b^2 B`.
pub fn mise_excess(kind: KernelKind, density: &TargetDistribution, n: usize, b: f64, limits: Option<&LimitTable>) -> Result<f64> {
    check_nb(n, b)?;
    let c = mise_constants(kind, density, limits).map_err(precondition)?;
    Ok(mise_value(0.0, &c, n as f64, b))
}

fn mise_value(spread: f64, c: &MiseConstants, n: f64, b: f64) -> f64 {
    (spread - b.sqrt() * c.variance) / n + b * b * c.bias
}

/// MISE at the optimal bandwidth,
/// `n^{-1} int F(1-F) - n^{-4/3} (3/4) [V^4 / (4B)]^{1/3}`.
pub fn optimal_mise(kind: KernelKind, density: &TargetDistribution, n: usize, limits: Option<&LimitTable>) -> Result<f64> {
    check_nb(n, 0.0)?;
    let c = mise_constants(kind, density, limits).map_err(precondition)?;
    let n = n as f64;
    Ok(spread(density)? / n - n.powf(-4.0 / 3.0) * 0.75 * (c.variance.powi(4) / (4.0 * c.bias)).cbrt())
}

fn check_j(j: u32) -> Result<()> {
    if j != 1 && j != 2 {
        return domain(format!("moment order must be 1 or 2, got {j}"));
    }
    Ok(())
}

/// `E[min(X, Y)^j]` for i.i.d. `Gamma(alpha, theta)`, `j` in {1, 2}.
pub fn min_moment_gamma(alpha: f64, theta: f64, j: u32) -> Result<f64> {
    check_j(j)?;
    if !(alpha > 0.0 && theta > 0.0) {
        return domain(format!("gamma parameters must be positive, got ({alpha}, {theta})"));
    }
    let jf = j as f64;
    let first = (jf * theta.ln() + ln_gamma_ratio(alpha, jf)?).exp();
    let second = (jf * theta.ln() + ln_gamma_ratio(alpha, jf - 0.5)?).exp() * jf / PI.sqrt();
    Ok(first - second)
}

/// `E[min(X, Y)^j]` for i.i.d. `InverseGamma(alpha, theta)`, i.e. `1/X ~ Gamma(alpha, theta)`.
pub fn min_moment_invgamma(alpha: f64, theta: f64, j: u32) -> Result<f64> {
    check_j(j)?;
    if !(alpha > 2.0) || !(theta > 0.0) {
        return domain(format!("inverse gamma moments need alpha > 2 and theta > 0, got ({alpha}, {theta})"));
    }
    let jf = j as f64;
    let base = -jf * theta.ln() + ln_gamma_ratio(alpha, -jf)?;
    let g = (ln_gamma_ratio(alpha, -0.5)?).exp() / PI.sqrt();
    Ok(base.exp() * (1.0 - jf * g))
}

/// `E[min(X, Y)^a]` for i.i.d. `LogNormal(mu, sigma)`.
pub fn min_moment_lognormal(mu: f64, sigma: f64, a: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(a > 0.0) || !mu.is_finite() {
        return domain(format!("lognormal moments need sigma > 0 and a > 0, got ({mu}, {sigma}, {a})"));
    }
    let s = a * sigma;
    Ok(2.0 * (a * mu + 0.5 * s * s).exp() * std_normal_cdf(-s * FRAC_1_SQRT_2))
}

/// `(E[min(T1,T2) - x], E[(min(T1,T2) - x)^2])` for i.i.d. kernel variates at `(x, b)`.
pub fn corollary_min_expansions(kind: KernelKind, x: f64, b: f64) -> Result<(f64, f64)> {
    check_x(x)?;
    if !(b > 0.0 && b.is_finite()) {
        return domain(format!("bandwidth must be positive, got {b}"));
    }
    let (m1, m2) = match kind {
        KernelKind::Gam => {
            let a = x / b + 1.0;
            (min_moment_gamma(a, b, 1)?, min_moment_gamma(a, b, 2)?)
        }
        KernelKind::IGam => {
            if b >= 1.0 {
                return domain(format!("IGam second moment needs b < 1, got {b}"));
            }
            let a = 1.0 / b + 1.0;
            (min_moment_invgamma(a, b / x, 1)?, min_moment_invgamma(a, b / x, 2)?)
        }
        KernelKind::LN => {
            let (mu, s) = (x.ln(), b.sqrt());
            (min_moment_lognormal(mu, s, 1.0)?, min_moment_lognormal(mu, s, 2.0)?)
        }
        _ => return Err(Error::Unsupported(format!("no closed-form minimum moments for the {} kernel", kind.name()))),
    };
    let first = m1 - x;
    Ok((first, (m2 - x * x) - 2.0 * x * first))
}

/// `E[K(X)]` and `E[K(X)^2]` where `K(t)` is the kernel survival at `t` and `X` follows `truth`,
/// i.e. the mean of the estimator at `x` and the second moment of one summand.
pub fn kernel_moments(kind: KernelKind, truth: &TargetDistribution, x: f64, b: f64) -> Result<(f64, f64)> {
    crate::distributions::check_kernel_args(kind, x, b)?;
    let k = MappedKernel::new(kind, x, b);
    let spread = x * b.sqrt();
    let mut breaks = truth.kinks();
    breaks.push(x);
    for m in [0.5, 1.0, 2.0, 4.0, 8.0] {
        breaks.push(x + m * spread);
        breaks.push(x - m * spread);
    }
    let spec = QuadratureSpec { abs_tol: 1e-15, rel_tol: 1e-13, max_subdivisions: 2000, transform: Transform::Rational };
    let m1 = integrate_half_line_with_breaks(|t| k.survival(t, t.ln()) * truth.pdf_at(t), &breaks, &spec)?;
    let m2 = integrate_half_line_with_breaks(|t| k.survival(t, t.ln()).powi(2) * truth.pdf_at(t), &breaks, &spec)?;
    Ok((m1.value, m2.value))
}

/// Outcome of [`normality_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    pub replicates: usize,
    /// `sqrt(F(x)(1 - F(x)))`
    pub sigma: f64,
    /// `sqrt(n) b` times the leading bias coefficient, when the kernel has one.
    pub predicted_shift: Option<f64>,
    /// Mean and standard error of `sqrt(n)(F_hat(x) - F(x))`.
    pub mean_shift: f64,
    pub shift_std_error: f64,
    /// Kolmogorov distance of `(sqrt(n)(F_hat(x) - F(x)) - predicted) / sigma` from N(0, 1).
    pub ks_statistic: f64,
    pub p_value: f64,
}

impl NormalityReport {
    /// Whether the empirical mean shift is within `k` standard errors of the prediction.
    pub fn shift_within(&self, k: f64) -> bool {
        (self.mean_shift - self.predicted_shift.unwrap_or(0.0)).abs() <= k * self.shift_std_error
    }
}

/// Asymptotic Kolmogorov p-value with Stephens' small-sample adjustment.
pub fn kolmogorov_p_value(d: f64, m: usize) -> f64 {
    let sm = (m as f64).sqrt();
    let l = (sm + 0.12 + 0.11 / sm) * d;
    if l < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let t = (-2.0 * (k * k) as f64 * l * l).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov distance from the standard normal.
pub fn ks_standard_normal(z: &mut [f64]) -> f64 {
    z.sort_by(f64::total_cmp);
    let m = z.len() as f64;
    z.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let p = std_normal_cdf(v);
        d.max(p - i as f64 / m).max((i + 1) as f64 / m - p)
    })
}

/// Simulate `sqrt(n)(F_hat(x) - F(x))` over independent samples and compare it with the
/// limiting normal law. `b` is ignored for the EDF.
pub fn normality_check(
    kind: EstimatorKind,
    truth: &TargetDistribution,
    x: f64,
    n: usize,
    b: f64,
    replicates: usize,
    rng: &mut RngStream,
) -> Result<NormalityReport> {
    check_x(x)?;
    let cdf = truth.cdf_at(x);
    if !(cdf > 0.0 && cdf < 1.0) {
        return domain(format!("normality check needs 0 < F(x) < 1, got F({x}) = {cdf}"));
    }
    if n == 0 || replicates < 2 {
        return domain("normality check needs n >= 1 and at least two replicates");
    }
    let bandwidth = (kind != EstimatorKind::EDF).then_some(b);
    let sigma = (cdf * (1.0 - cdf)).sqrt();
    let root_n = (n as f64).sqrt();
    let predicted = match kind.kernel() {
        Some(k) if k != KernelKind::W => Some(root_n * b * leading_bias(k, x, truth.pdf_at(x), truth.pdf_deriv_at(x))?),
        _ if kind == EstimatorKind::EDF => Some(0.0),
        _ => None,
    };
    let base = rng.next_u64();
    let stats = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut sub = RngStream::new(base, r as u64);
            let s = truth.sample(&mut sub, n)?;
            let est = FittedEstimator::new(kind, s, bandwidth)?;
            Ok(root_n * (est.evaluate(x)? - cdf))
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = replicates as f64;
    let mean = stats.iter().sum::<f64>() / m;
    let var = stats.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let shift = predicted.unwrap_or(0.0);
    let mut z: Vec<f64> = stats.iter().map(|v| (v - shift) / sigma).collect();
    let d = ks_standard_normal(&mut z);
    Ok(NormalityReport {
        replicates,
        sigma,
        predicted_shift: predicted,
        mean_shift: mean,
        shift_std_error: (var / m).sqrt(),
        ks_statistic: d,
        p_value: kolmogorov_p_value(d, replicates),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_substitutions() {
        let e1 = (-1.0f64).exp();
        assert!((leading_bias(KernelKind::Gam, 1.0, e1, -e1).unwrap() - 0.5 * e1).abs() < 1e-16);
        assert_eq!(leading_bias(KernelKind::IGam, 3.0, 0.2, 0.0).unwrap(), 0.0);
        let f = 0.3;
        assert!((variance_correction(KernelKind::Gam, 4.0, f, None).unwrap() - 2.0 * f / PI.sqrt()).abs() < 1e-16);
        let x = 1.7;
        let sur = 2.0 * x / PI.sqrt();
        let igau = variance_correction(KernelKind::IGau, x, f, Some(sur)).unwrap();
        assert!((igau - variance_correction(KernelKind::LN, x, f, None).unwrap()).abs() < 1e-15);
        assert!(variance_correction(KernelKind::RIG, x, f, None).is_err());
        assert!(matches!(leading_bias(KernelKind::W, 1.0, f, 0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn exponential_min_moments() {
        assert!((min_moment_gamma(1.0, 1.0, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((min_moment_gamma(1.0, 1.0, 2).unwrap() - 0.5).abs() < 1e-14);
        assert!(min_moment_gamma(1.0, 1.0, 3).is_err());
        assert!(min_moment_invgamma(2.0, 1.0, 2).is_err());
        let ln = min_moment_lognormal(0.0, 1.0, 1.0).unwrap();
        assert!((ln - 2.0 * 0.5f64.exp() * std_normal_cdf(-FRAC_1_SQRT_2)).abs() < 1e-15);
        assert!((min_moment_lognormal(0.4, 1e-9, 2.0).unwrap() - 0.8f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn stephens_p_value() {
        // scipy.stats.kstwobign.sf(1.0) = 0.26999967167735456
        assert!((kolmogorov_p_value(1.0 / (1e12f64.sqrt() + 0.12), 1_000_000_000_000) - 0.269_999_671_677_354_6).abs() < 1e-9);
        assert_eq!(kolmogorov_p_value(0.0, 100), 1.0);
    }

    #[test]
    fn invgamma_concentrates() {
        let mut prev = f64::INFINITY;
        for &a in &[10.0, 100.0, 1e4, 1e6] {
            let m = min_moment_invgamma(a, 1.0 / (a - 1.0), 1).unwrap();
            assert!((1.0 - m).abs() < prev);
            prev = (1.0 - m).abs();
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn sqrt_two_identity() {
        let m2 = min_moment_lognormal(0.1, 0.7, 2.0).unwrap();
        let e = 2.0 * (0.2 + 2.0 * 0.49f64).exp() * std_normal_cdf(-std::f64::consts::SQRT_2 * 0.7);
        assert!((m2 - e).abs() < 1e-14 * e);
    }
}
