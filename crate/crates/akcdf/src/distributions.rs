//! Target laws of the simulation study, kernel survival functions and
//! random variate generation.

use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};
use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

use crate::error::{domain, Result};
use crate::estimators::{Provenance, Sample};
use crate::specfun::{erfc, gamma_q, ln_gamma_pos, normal_tail_scaled, std_normal_cdf};

/// A seeded ChaCha8 stream. The same `(seed, index)` pair always yields the
/// same sequence.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        RngStream { seed, index, rng }
    }

    /// Stream whose index is a hash of `parts`, e.g. `(dist, n, replicate)`.
    pub fn for_cell(seed: u64, parts: &[u64]) -> Self {
        let mut h = 0x6A09_E667_F3BC_C909u64;
        for &p in parts {
            h = splitmix(h ^ p);
        }
        RngStream::new(seed, h)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    fn provenance(&self, law: String) -> Provenance {
        Provenance { seed: Some(self.seed), stream: Some(self.index), law: Some(law) }
    }

    fn open01(&mut self) -> f64 {
        self.sample(Open01)
    }

    fn normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// One of the simulation laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetDistribution {
    /// Burr with scale `lambda` and shapes `c`, `k`.
    Burr { lambda: f64, c: f64, k: f64 },
    /// Gamma with shape `alpha` and scale `theta`.
    Gamma { alpha: f64, theta: f64 },
    /// Generalized Pareto with shape `xi`, scale `sigma`, location `mu >= 0`.
    GeneralizedPareto { xi: f64, sigma: f64, mu: f64 },
    HalfNormal { sigma: f64 },
    /// Log-normal: `ln X ~ N(mu, sigma^2)`.
    LogNormal { mu: f64, sigma: f64 },
    /// Weibull with scale `lambda` and shape `k`.
    Weibull { lambda: f64, k: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {v}"))
    }
}

impl TargetDistribution {
    pub fn burr(lambda: f64, c: f64, k: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        positive("c", c)?;
        positive("k", k)?;
        Ok(TargetDistribution::Burr { lambda, c, k })
    }

    pub fn gamma(alpha: f64, theta: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("theta", theta)?;
        Ok(TargetDistribution::Gamma { alpha, theta })
    }

    pub fn generalized_pareto(xi: f64, sigma: f64, mu: f64) -> Result<Self> {
        positive("xi", xi)?;
        positive("sigma", sigma)?;
        if !(mu >= 0.0) || !mu.is_finite() {
            return domain(format!("location must be >= 0 to keep the support in (0, inf), got {mu}"));
        }
        Ok(TargetDistribution::GeneralizedPareto { xi, sigma, mu })
    }

    pub fn half_normal(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        Ok(TargetDistribution::HalfNormal { sigma })
    }

    pub fn log_normal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return domain("mu must be finite");
        }
        positive("sigma", sigma)?;
        Ok(TargetDistribution::LogNormal { mu, sigma })
    }

    pub fn weibull(lambda: f64, k: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        positive("k", k)?;
        Ok(TargetDistribution::Weibull { lambda, k })
    }

    /// The eight laws of the study, in table order.
    pub fn study_laws() -> [TargetDistribution; 8] {
        use TargetDistribution::*;
        [
            Burr { lambda: 1.0, c: 3.0, k: 1.0 },
            Gamma { alpha: 0.6, theta: 2.0 },
            Gamma { alpha: 4.0, theta: 2.0 },
            GeneralizedPareto { xi: 0.4, sigma: 1.0, mu: 0.0 },
            HalfNormal { sigma: 1.0 },
            LogNormal { mu: 0.0, sigma: 0.75 },
            Weibull { lambda: 1.5, k: 1.5 },
            Weibull { lambda: 3.0, k: 2.0 },
        ]
    }

    /// Short identifier such as `gamma-0.6-2`.
    pub fn name(&self) -> String {
        use TargetDistribution::*;
        match *self {
            Burr { lambda, c, k } => format!("burr-{lambda}-{c}-{k}"),
            Gamma { alpha, theta } => format!("gamma-{alpha}-{theta}"),
            GeneralizedPareto { xi, sigma, mu } => format!("genpareto-{xi}-{sigma}-{mu}"),
            HalfNormal { sigma } => format!("halfnormal-{sigma}"),
            LogNormal { mu, sigma } => format!("lognormal-{mu}-{sigma}"),
            Weibull { lambda, k } => format!("weibull-{lambda}-{k}"),
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return domain(format!("density needs x > 0, got {x}"));
        }
        Ok(self.pdf_at(x))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return domain(format!("distribution function needs x >= 0, got {x}"));
        }
        Ok(self.cdf_at(x))
    }

    /// Derivative of the density.
    pub fn pdf_derivative(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return domain(format!("density derivative needs x > 0, got {x}"));
        }
        Ok(self.pdf_deriv_at(x))
    }

    pub fn mean(&self) -> f64 {
        use TargetDistribution::*;
        match *self {
            Burr { lambda, c, k } => {
                if c * k <= 1.0 {
                    f64::INFINITY
                } else {
                    let lb = ln_gamma_pos(k - 1.0 / c) + ln_gamma_pos(1.0 + 1.0 / c) - ln_gamma_pos(k + 1.0);
                    lambda * k * lb.exp()
                }
            }
            Gamma { alpha, theta } => alpha * theta,
            GeneralizedPareto { xi, sigma, mu } => {
                if xi >= 1.0 {
                    f64::INFINITY
                } else {
                    mu + sigma / (1.0 - xi)
                }
            }
            HalfNormal { sigma } => sigma * (2.0 / PI).sqrt(),
            LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Weibull { lambda, k } => lambda * ln_gamma_pos(1.0 + 1.0 / k).exp(),
        }
    }

    pub(crate) fn pdf_at(&self, x: f64) -> f64 {
        use TargetDistribution::*;
        if !(x > 0.0) {
            return 0.0;
        }
        match *self {
            Burr { lambda, c, k } => {
                let y = x / lambda;
                let g = y.powf(c);
                c * k / lambda * y.powf(c - 1.0) * (-(k + 1.0) * g.ln_1p()).exp()
            }
            Gamma { alpha, theta } => {
                ((alpha - 1.0) * x.ln() - x / theta - ln_gamma_pos(alpha) - alpha * theta.ln()).exp()
            }
            GeneralizedPareto { xi, sigma, mu } => {
                if x <= mu {
                    return 0.0;
                }
                let z = (x - mu) / sigma;
                (-(1.0 / xi + 1.0) * (xi * z).ln_1p()).exp() / sigma
            }
            HalfNormal { sigma } => {
                let z = x / sigma;
                FRAC_2_SQRT_PI / SQRT_2 / sigma * (-0.5 * z * z).exp()
            }
            LogNormal { mu, sigma } => {
                let z = (x.ln() - mu) / sigma;
                (-0.5 * z * z).exp() / (x * sigma * (2.0 * PI).sqrt())
            }
            Weibull { lambda, k } => {
                let y = x / lambda;
                let yk = y.powf(k);
                k / lambda * y.powf(k - 1.0) * (-yk).exp()
            }
        }
    }

    pub(crate) fn cdf_at(&self, x: f64) -> f64 {
        use TargetDistribution::*;
        if !(x > 0.0) {
            return 0.0;
        }
        match *self {
            Burr { lambda, c, k } => -(-k * (x / lambda).powf(c).ln_1p()).exp_m1(),
            Gamma { alpha, theta } => 1.0 - gamma_q(alpha, x / theta),
            GeneralizedPareto { xi, sigma, mu } => {
                if x <= mu {
                    return 0.0;
                }
                -(-(xi * (x - mu) / sigma).ln_1p() / xi).exp_m1()
            }
            HalfNormal { sigma } => 1.0 - erfc(x / (sigma * SQRT_2)),
            LogNormal { mu, sigma } => std_normal_cdf((x.ln() - mu) / sigma),
            Weibull { lambda, k } => -(-(x / lambda).powf(k)).exp_m1(),
        }
    }

    /// Survival function `1 - F(x)`, accurate in the upper tail.
    pub(crate) fn sf_at(&self, x: f64) -> f64 {
        use TargetDistribution::*;
        if !(x > 0.0) {
            return 1.0;
        }
        match *self {
            Burr { lambda, c, k } => (-k * (x / lambda).powf(c).ln_1p()).exp(),
            Gamma { alpha, theta } => gamma_q(alpha, x / theta),
            GeneralizedPareto { xi, sigma, mu } => {
                if x <= mu {
                    return 1.0;
                }
                (-(xi * (x - mu) / sigma).ln_1p() / xi).exp()
            }
            HalfNormal { sigma } => erfc(x / (sigma * SQRT_2)),
            LogNormal { mu, sigma } => std_normal_cdf(-(x.ln() - mu) / sigma),
            Weibull { lambda, k } => (-(x / lambda).powf(k)).exp(),
        }
    }

    pub(crate) fn pdf_deriv_at(&self, x: f64) -> f64 {
        use TargetDistribution::*;
        if !(x > 0.0) {
            return 0.0;
        }
        let f = self.pdf_at(x);
        if f == 0.0 {
            return 0.0;
        }
        match *self {
            Burr { lambda, c, k } => {
                let g = (x / lambda).powf(c);
                f * ((c - 1.0) - (k + 1.0) * c * g / (1.0 + g)) / x
            }
            Gamma { alpha, theta } => f * ((alpha - 1.0) / x - 1.0 / theta),
            GeneralizedPareto { xi, sigma, mu } => -f * (1.0 + xi) / (sigma + xi * (x - mu)),
            HalfNormal { sigma } => -f * x / (sigma * sigma),
            LogNormal { mu, sigma } => -f * (1.0 + (x.ln() - mu) / (sigma * sigma)) / x,
            Weibull { lambda, k } => {
                let yk = (x / lambda).powf(k);
                f * ((k - 1.0) - k * yk) / x
            }
        }
    }

    /// Points where the density is not smooth (only a positive GPD location).
    pub(crate) fn kinks(&self) -> Vec<f64> {
        match *self {
            TargetDistribution::GeneralizedPareto { mu, .. } if mu > 0.0 => vec![mu],
            _ => Vec::new(),
        }
    }

    pub(crate) fn draw(&self, rng: &mut RngStream) -> f64 {
        use TargetDistribution::*;
        match *self {
            Burr { lambda, c, k } => {
                let u = rng.open01();
                lambda * (-u.ln() / k).exp_m1().powf(1.0 / c)
            }
            Gamma { alpha, theta } => {
                rand_distr::Gamma::new(alpha, theta).expect("validated parameters").sample(rng)
            }
            GeneralizedPareto { xi, sigma, mu } => {
                let u = rng.open01();
                mu + sigma * (-xi * u.ln()).exp_m1() / xi
            }
            HalfNormal { sigma } => sigma * rng.normal().abs(),
            LogNormal { mu, sigma } => (mu + sigma * rng.normal()).exp(),
            Weibull { lambda, k } => {
                let u = rng.open01();
                lambda * (-u.ln()).powf(1.0 / k)
            }
        }
    }

    /// Draw `n` i.i.d. observations.
    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Result<Sample> {
        if n == 0 {
            return domain("sample size must be at least 1");
        }
        let mut obs = Vec::with_capacity(n);
        while obs.len() < n {
            let x = self.draw(rng);
            // guard against an underflow to exactly zero
            if x > 0.0 {
                obs.push(x);
            }
        }
        Sample::with_provenance(obs, rng.provenance(self.name()))
    }
}

impl fmt::Display for TargetDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Gam,
    IGam,
    LN,
    IGau,
    RIG,
    BS,
    W,
}

impl KernelKind {
    pub const ALL: [KernelKind; 7] =
        [KernelKind::Gam, KernelKind::IGam, KernelKind::LN, KernelKind::IGau, KernelKind::RIG, KernelKind::BS, KernelKind::W];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Gam => "Gam",
            KernelKind::IGam => "IGam",
            KernelKind::LN => "LN",
            KernelKind::IGau => "IGau",
            KernelKind::RIG => "RIG",
            KernelKind::BS => "BS",
            KernelKind::W => "W",
        }
    }
}

/// Kernel law parameters after the `(x, b)` substitution.
#[derive(Debug, Clone, Copy)]
pub(crate) enum MappedKernel {
    /// `Q(alpha, t / theta)`
    Gam { alpha: f64, inv_theta: f64 },
    /// `P(alpha, scale / t)`
    IGam { alpha: f64, scale: f64 },
    LN { ln_x: f64, inv_sd: f64 },
    IGau { mu: f64, lambda: f64 },
    RIG { mu: f64, lambda: f64 },
    BS { beta: f64, inv_alpha: f64 },
    W { ln_scale: f64, shape: f64 },
}

pub(crate) fn check_kernel_args(kind: KernelKind, x: f64, b: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("kernel needs x > 0, got {x}"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return domain(format!("bandwidth must be positive, got {b}"));
    }
    if kind == KernelKind::RIG && b >= 1.0 {
        return domain(format!("RIG kernel needs b < 1, got {b}"));
    }
    Ok(())
}

impl MappedKernel {
    pub(crate) fn new(kind: KernelKind, x: f64, b: f64) -> Self {
        match kind {
            KernelKind::Gam => MappedKernel::Gam { alpha: x / b + 1.0, inv_theta: 1.0 / b },
            KernelKind::IGam => MappedKernel::IGam { alpha: 1.0 / b + 1.0, scale: x / b },
            KernelKind::LN => MappedKernel::LN { ln_x: x.ln(), inv_sd: 1.0 / b.sqrt() },
            KernelKind::IGau => MappedKernel::IGau { mu: x, lambda: x / b },
            KernelKind::RIG => MappedKernel::RIG { mu: 1.0 / (x * (1.0 - b)), lambda: 1.0 / (x * b) },
            KernelKind::BS => MappedKernel::BS { beta: x, inv_alpha: 1.0 / b.sqrt() },
            KernelKind::W => {
                MappedKernel::W { ln_scale: x.ln() - ln_gamma_pos(1.0 + b), shape: 1.0 / b }
            }
        }
    }

    /// Survival function at `t >= 0`; `ln_t` must equal `t.ln()`.
    pub(crate) fn survival(&self, t: f64, ln_t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        if t.is_infinite() {
            return 0.0;
        }
        match *self {
            MappedKernel::Gam { alpha, inv_theta } => gamma_q(alpha, t * inv_theta),
            MappedKernel::IGam { alpha, scale } => 1.0 - gamma_q(alpha, scale / t),
            MappedKernel::LN { ln_x, inv_sd } => std_normal_cdf((ln_x - ln_t) * inv_sd),
            MappedKernel::IGau { mu, lambda } => {
                let r = (lambda / t).sqrt();
                let w1 = r * (t / mu - 1.0);
                let w2 = r * (t / mu + 1.0);
                let d = t - mu;
                let second = normal_tail_scaled(w2) * (-lambda * d * d / (2.0 * mu * mu * t)).exp();
                (std_normal_cdf(-w1) - second).clamp(0.0, 1.0)
            }
            MappedKernel::RIG { mu, lambda } => {
                let r = (lambda * t).sqrt();
                let v1 = r * (1.0 / (t * mu) - 1.0);
                let v2 = r * (1.0 / (t * mu) + 1.0);
                let d = 1.0 - mu * t;
                let second = normal_tail_scaled(v2) * (-lambda * d * d / (2.0 * mu * mu * t)).exp();
                (std_normal_cdf(v1) + second).clamp(0.0, 1.0)
            }
            MappedKernel::BS { beta, inv_alpha } => {
                let s = (t / beta).sqrt();
                std_normal_cdf((1.0 / s - s) * inv_alpha)
            }
            MappedKernel::W { ln_scale, shape } => (-(shape * (ln_t - ln_scale)).exp()).exp(),
        }
    }
}

/// Survival function of the kernel law attached to `(x, b)`, evaluated at `t`.
pub fn kernel_survival(kind: KernelKind, t: f64, x: f64, b: f64) -> Result<f64> {
    check_kernel_args(kind, x, b)?;
    if !(t >= 0.0) {
        return domain(format!("kernel survival needs t >= 0, got {t}"));
    }
    Ok(MappedKernel::new(kind, x, b).survival(t, t.ln()))
}

/// Inverse Gaussian variate with mean `mu` and shape `lambda`, by the
/// transformation-with-multiple-roots method.
pub(crate) fn inverse_gaussian<R: Rng + ?Sized>(mu: f64, lambda: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let w = mu * z * z / (2.0 * lambda);
    let x = mu / (1.0 + w + (w * (w + 2.0)).sqrt());
    let u: f64 = rng.sample(Open01);
    if u * (mu + x) <= mu {
        x
    } else {
        mu * mu / x
    }
}

/// One kernel variate for `kind` in `{IGau, RIG}` at `(x, b)`.
pub(crate) fn kernel_variate<R: Rng + ?Sized>(kind: KernelKind, x: f64, b: f64, rng: &mut R) -> f64 {
    match kind {
        KernelKind::IGau => inverse_gaussian(x, x / b, rng),
        _ => 1.0 / inverse_gaussian(1.0 / (x * (1.0 - b)), 1.0 / (x * b), rng),
    }
}

/// Draw `n` variates from the IGau or RIG kernel law at `(x, b)`.
pub fn sample_kernel(kind: KernelKind, x: f64, b: f64, rng: &mut RngStream, n: usize) -> Result<Sample> {
    if !matches!(kind, KernelKind::IGau | KernelKind::RIG) {
        return Err(crate::Error::Unsupported(format!("kernel sampling is only provided for IGau and RIG, not {}", kind.name())));
    }
    check_kernel_args(kind, x, b)?;
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    let obs: Vec<f64> = (0..n).map(|_| kernel_variate(kind, x, b, rng)).collect();
    Sample::with_provenance(obs, rng.provenance(format!("{}-kernel-{x}-{b}", kind.name())))
}
