//! Bandwidth selection: Gamma-reference plug-in rules, the IGau/RIG limit
//! constant, numeric AMISE minimisation, and CV/LNO grid search.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use rand::RngCore;

use crate::distributions::{kernel_variate, KernelKind, RngStream, TargetDistribution};
use crate::error::{domain, Error, Result};
use crate::estimators::{epanechnikov_cdf, Sample};
use crate::quadrature::{integrate_half_line, integrate_half_line_with_breaks, integrate_pieces, NeumaierSum, QuadratureSpec, Transform};
use crate::specfun::{digamma, ln_gamma_pos, trigamma};

/// Gamma law fitted by maximum likelihood, used as the plug-in reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaReference {
    pub alpha: f64,
    pub theta: f64,
}

impl GammaReference {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && theta > 0.0 && alpha.is_finite() && theta.is_finite()) {
            return domain(format!("gamma reference needs positive parameters, got ({alpha}, {theta})"));
        }
        Ok(GammaReference { alpha, theta })
    }

    pub fn density(&self) -> TargetDistribution {
        TargetDistribution::Gamma { alpha: self.alpha, theta: self.theta }
    }
}

/// Maximum likelihood fit of a Gamma law.
pub fn fit_gamma_mle(sample: &Sample) -> Result<GammaReference> {
    let xs = sample.sorted();
    if xs.len() < 2 {
        return Err(Error::Estimation("gamma fit needs at least two observations".into()));
    }
    if xs[0] == xs[xs.len() - 1] {
        return Err(Error::Estimation("gamma fit on a constant sample".into()));
    }
    let n = xs.len() as f64;
    let mut sum = NeumaierSum::default();
    let mut sum_log = NeumaierSum::default();
    for &v in xs {
        sum.add(v);
        sum_log.add(v.ln());
    }
    let mean = sum.total() / n;
    let s = mean.ln() - sum_log.total() / n;
    if !(s > 0.0) {
        return Err(Error::Estimation(format!("degenerate log moments (s = {s:e})")));
    }
    // Minka's starting point, then Newton on ln a - psi(a) = s
    let mut a = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..100 {
        let g = a.ln() - digamma(a)? - s;
        if g.abs() <= 1e-12 {
            break;
        }
        let dg = 1.0 / a - trigamma(a)?;
        let next = a - g / dg;
        a = if next > 0.0 { next } else { 0.5 * a };
    }
    let residual = a.ln() - digamma(a)? - s;
    if !(residual.abs() <= 1e-10) {
        return Err(Error::Estimation(format!("gamma likelihood equation residual {residual:e}")));
    }
    GammaReference::new(a, mean / a)
}

/// Log-spaced bandwidth grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthGrid {
    pub lo: f64,
    pub hi: f64,
    pub per_decade: usize,
}

impl Default for BandwidthGrid {
    fn default() -> Self {
        BandwidthGrid { lo: 1e-4, hi: 0.9, per_decade: 40 }
    }
}

impl BandwidthGrid {
    pub fn new(lo: f64, hi: f64, per_decade: usize) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) || per_decade == 0 {
            return domain(format!("invalid bandwidth grid [{lo}, {hi}] with {per_decade} points per decade"));
        }
        Ok(BandwidthGrid { lo, hi, per_decade })
    }

    pub fn points(&self) -> Vec<f64> {
        let decades = (self.hi / self.lo).log10();
        let m = (decades * self.per_decade as f64).ceil().max(0.0) as usize;
        if m == 0 {
            return vec![self.lo];
        }
        (0..=m).map(|i| self.lo * (self.hi / self.lo).powf(i as f64 / m as f64)).collect()
    }
}

/// How the bandwidth of an estimator is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum BandwidthRule {
    Fixed(f64),
    PluginClosedForm,
    PluginNumeric,
    CrossValidation(BandwidthGrid),
    LeaveNoneOut(BandwidthGrid),
}

/// Monte Carlo estimate of `lim b^{-1/2} E|T1 - T2|` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConstant {
    pub x: f64,
    pub c_value: f64,
    pub std_error: f64,
    pub reps: usize,
    pub b_probe: f64,
}

const CHUNK: usize = 1 << 16;

/// Estimate `b^{-1/2} E|T1 - T2|` for paired i.i.d. IGau or RIG kernel variates.
pub fn c_limit(kind: KernelKind, x: f64, reps: usize, b_probe: f64, rng: &mut RngStream) -> Result<LimitConstant> {
    if !matches!(kind, KernelKind::IGau | KernelKind::RIG) {
        return Err(Error::Unsupported(format!("limit constant is defined for IGau and RIG, not {}", kind.name())));
    }
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("limit constant needs x > 0, got {x}"));
    }
    if reps < 10_000 {
        return domain(format!("limit constant needs at least 1e4 replications, got {reps}"));
    }
    if !(b_probe > 0.0 && b_probe <= 1e-2) {
        return domain(format!("probe bandwidth must lie in (0, 0.01], got {b_probe}"));
    }
    let base = rng.next_u64();
    let chunks = reps.div_ceil(CHUNK);
    let scale = 1.0 / b_probe.sqrt();
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sub = RngStream::new(base, c as u64);
            let m = CHUNK.min(reps - c * CHUNK);
            let mut s = NeumaierSum::default();
            let mut s2 = NeumaierSum::default();
            for _ in 0..m {
                let t1 = kernel_variate(kind, x, b_probe, &mut sub);
                let t2 = kernel_variate(kind, x, b_probe, &mut sub);
                let d = (t1 - t2).abs() * scale;
                s.add(d);
                s2.add(d * d);
            }
            (s.total(), s2.total())
        })
        .collect();
    let mut s = NeumaierSum::default();
    let mut s2 = NeumaierSum::default();
    for (a, b) in parts {
        s.add(a);
        s2.add(b);
    }
    let n = reps as f64;
    let mean = s.total() / n;
    let var = ((s2.total() - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(LimitConstant { x, c_value: mean, std_error: (var / n).sqrt(), reps, b_probe })
}

/// `c(x)` over a range of `x`, interpolating `c(x)/x` linearly in `ln x`
/// and holding it constant outside the tabulated range.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitTable {
    points: Vec<LimitConstant>,
}

impl LimitTable {
    pub fn new(mut points: Vec<LimitConstant>) -> Result<Self> {
        if points.is_empty() {
            return domain("limit table needs at least one point");
        }
        if points.iter().any(|p| !(p.x > 0.0 && p.c_value > 0.0)) {
            return domain("limit constants must be positive");
        }
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
        Ok(LimitTable { points })
    }

    /// Monte Carlo table at the given abscissae.
    pub fn estimate(kind: KernelKind, xs: &[f64], reps: usize, b_probe: f64, rng: &mut RngStream) -> Result<Self> {
        let pts = xs.iter().map(|&x| c_limit(kind, x, reps, b_probe, rng)).collect::<Result<Vec<_>>>()?;
        LimitTable::new(pts)
    }

    /// The analytic value `2x / sqrt(pi)` implied by a kernel variance of `x^2 b`.
    pub fn surrogate() -> Self {
        let c = 2.0 / PI.sqrt();
        LimitTable { points: vec![LimitConstant { x: 1.0, c_value: c, std_error: 0.0, reps: 0, b_probe: 0.0 }] }
    }

    pub fn points(&self) -> &[LimitConstant] {
        &self.points
    }

    pub fn value(&self, x: f64) -> f64 {
        let p = &self.points;
        let ratio = |i: usize| p[i].c_value / p[i].x;
        let r = if x <= p[0].x {
            ratio(0)
        } else if x >= p[p.len() - 1].x {
            ratio(p.len() - 1)
        } else {
            let j = p.partition_point(|q| q.x <= x);
            let (a, b) = (j - 1, j);
            let w = (x / p[a].x).ln() / (p[b].x / p[a].x).ln();
            ratio(a) * (1.0 - w) + ratio(b) * w
        };
        r * x
    }
}

fn constants_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-15, rel_tol: 1e-12, max_subdivisions: 512, transform: Transform::DoubleExponential }
}

fn integral(f: impl FnMut(f64) -> f64, what: &str) -> Result<f64> {
    match integrate_half_line(f, &constants_spec()) {
        Ok(e) if e.value.is_finite() => Ok(e.value),
        _ => Err(Error::Selection(format!("the {what} integral does not converge for this density"))),
    }
}

/// The two constants of the leading MISE expansion,
/// `MISE(b) ~ n^{-1} int F(1-F) - n^{-1} b^{1/2} variance + b^2 bias`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiseConstants {
    pub bias: f64,
    pub variance: f64,
}

/// Bias and variance integrals of `kind` under `density`. IGau and RIG need a limit table.
pub fn mise_constants(kind: KernelKind, density: &TargetDistribution, limits: Option<&LimitTable>) -> Result<MiseConstants> {
    let f = |x: f64| density.pdf_at(x);
    let fp = |x: f64| density.pdf_deriv_at(x);
    let sqrt_pi = PI.sqrt();
    let (bias, variance) = match kind {
        KernelKind::Gam => {
            if let TargetDistribution::Gamma { alpha, .. } = density {
                if *alpha <= 0.5 {
                    return Err(Error::Selection(format!("Gam bias integral diverges for a Gamma density with shape {alpha} <= 1/2")));
                }
            }
            let b = integral(|x| (f(x) + 0.5 * x * fp(x)).powi(2), "bias")?;
            let v = integral(|x| x.sqrt() * f(x), "variance")? / sqrt_pi;
            (b, v)
        }
        KernelKind::IGam | KernelKind::IGau | KernelKind::RIG => {
            let b = integral(|x| 0.25 * x.powi(4) * fp(x).powi(2), "bias")?;
            let v = match kind {
                KernelKind::IGam => integral(|x| x * f(x), "variance")? / sqrt_pi,
                _ => {
                    let table = limits.ok_or_else(|| Error::Domain(format!("{} needs a limit table", kind.name())))?;
                    let breaks: Vec<f64> = table.points().iter().map(|p| p.x).collect();
                    let spec = QuadratureSpec { transform: Transform::Rational, ..constants_spec() };
                    match integrate_half_line_with_breaks(|x| 0.5 * f(x) * table.value(x), &breaks, &spec) {
                        Ok(e) if e.value.is_finite() => e.value,
                        _ => return Err(Error::Selection("the variance integral does not converge for this density".into())),
                    }
                }
            };
            (b, v)
        }
        KernelKind::LN | KernelKind::BS => {
            let b = integral(|x| 0.25 * (x * (f(x) + x * fp(x))).powi(2), "bias")?;
            let v = integral(|x| x * f(x), "variance")? / sqrt_pi;
            (b, v)
        }
        KernelKind::W => return Err(Error::Unsupported("the Weibull kernel has no b^{1/2} MISE expansion".into())),
    };
    if !(bias > 1e-300) {
        return Err(Error::Selection("bias integral is numerically zero".into()));
    }
    if !(variance > 0.0) {
        return Err(Error::Selection("variance integral is not positive".into()));
    }
    Ok(MiseConstants { bias, variance })
}

fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        return domain("sample size must be positive");
    }
    Ok(n as f64)
}

/// `n^{-2/3} (4 B / V)^{-2/3}`.
pub fn b_opt_from_constants(c: &MiseConstants, n: usize) -> Result<f64> {
    let n = check_n(n)?;
    Ok((c.variance / (4.0 * n * c.bias)).powf(2.0 / 3.0))
}

/// MISE-optimal bandwidth for Gam, IGam or LN under the Gamma reference.
pub fn b_opt_closed_form(kind: KernelKind, reference: &GammaReference, n: usize) -> Result<f64> {
    if !matches!(kind, KernelKind::Gam | KernelKind::IGam | KernelKind::LN) {
        return Err(Error::Unsupported(format!("no closed form for {}", kind.name())));
    }
    b_opt_from_constants(&mise_constants(kind, &reference.density(), None)?, n)
}

/// MISE-optimal bandwidth for IGau or RIG, with `c(x)` from a limit table.
pub fn b_opt_with_limit(kind: KernelKind, reference: &GammaReference, n: usize, limits: &LimitTable) -> Result<f64> {
    if !matches!(kind, KernelKind::IGau | KernelKind::RIG) {
        return Err(Error::Unsupported(format!("limit-based rule is for IGau and RIG, not {}", kind.name())));
    }
    let b = b_opt_from_constants(&mise_constants(kind, &reference.density(), Some(limits))?, n)?;
    if kind == KernelKind::RIG && b >= 1.0 {
        return Err(Error::Selection(format!("RIG bandwidth {b} is not below 1")));
    }
    Ok(b)
}

/// Result of a numeric minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericBandwidth {
    pub b: f64,
    /// False when the grid minimum sat on a grid end or the objective was not unimodal.
    pub well_posed: bool,
}

/// Asymptotic MISE of the Weibull-kernel estimator,
/// `n^{-1} int F(1-F) - n^{-1} (1 - 2^{-b}) int x f + int (E F(T_x) - F(x))^2`.
/// The variance reduction uses the exact kernel value `E|T1 - T2| = 2x(1 - 2^{-b})`;
/// the bias is the exact kernel expectation under the density.
pub struct WeibullAmise {
    density: TargetDistribution,
    spread: f64,
    mean: f64,
}

// trapezoid nodes for E g(E^b), E ~ Exp(1), after E = e^s
const W_STEP: f64 = 0.5;
const W_LO: f64 = -36.0;
const W_HI: f64 = 4.0;
// fixed exp-sinh rule around the mean for the outer integral
const W_OUTER_STEP: f64 = 0.125;
const W_OUTER_NODES: i32 = 28;

impl WeibullAmise {
    pub fn new(density: &TargetDistribution) -> Result<Self> {
        let spread = integral(|x| density.cdf_at(x) * density.sf_at(x), "spread")?;
        let mean = integral(|x| x * density.pdf_at(x), "mean")?;
        Ok(WeibullAmise { density: *density, spread, mean })
    }

    /// `E F(T_x) - F(x)` for the Weibull kernel at `x` with bandwidth `b`.
    pub fn bias(&self, x: f64, b: f64) -> f64 {
        let scale = x * (-ln_gamma_pos(1.0 + b)).exp();
        let m = ((W_HI - W_LO) / W_STEP).round() as usize;
        let fx = self.density.cdf_at(x);
        let mut s = NeumaierSum::default();
        for i in 0..=m {
            let u = W_LO + W_STEP * i as f64;
            let w = (u - u.exp()).exp();
            s.add(w * (self.density.cdf_at(scale * (b * u).exp()) - fx));
        }
        s.total() * W_STEP
    }

    /// `int (E F(T_x) - F(x))^2 dx`
    pub fn squared_bias(&self, b: f64) -> f64 {
        let mut s = NeumaierSum::default();
        for k in -W_OUTER_NODES..=W_OUTER_NODES {
            let t = k as f64 * W_OUTER_STEP;
            let x = self.mean * (FRAC_PI_2 * t.sinh()).exp();
            let w = FRAC_PI_2 * t.cosh() * x;
            s.add(w * self.bias(x, b).powi(2));
        }
        s.total() * W_OUTER_STEP
    }

    pub fn value(&self, n: f64, b: f64) -> Result<f64> {
        let sq = self.squared_bias(b);
        if !sq.is_finite() {
            return Err(Error::Selection(format!("Weibull bias integral failed at b = {b}")));
        }
        Ok((self.spread - self.mean * (-(-b * std::f64::consts::LN_2).exp_m1())) / n + sq)
    }
}

fn minimise_on_grid(obj: impl Fn(f64) -> Result<f64>, grid: &[f64]) -> Result<NumericBandwidth> {
    if grid.is_empty() {
        return domain("empty bandwidth grid");
    }
    let vals = grid.iter().map(|&b| obj(b)).collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for i in 1..grid.len() {
        if vals[i] < vals[best] {
            best = i;
        }
    }
    // count local minima to detect a non-unimodal objective
    let local_minima = (0..grid.len())
        .filter(|&i| (i == 0 || vals[i] < vals[i - 1]) && (i + 1 == grid.len() || vals[i] <= vals[i + 1]))
        .count();
    if best == 0 || best + 1 == grid.len() || local_minima > 1 {
        return Ok(NumericBandwidth { b: grid[best], well_posed: false });
    }
    // golden section in ln b on the bracketing interval
    let g = |u: f64| obj(u.exp());
    let (mut a, mut c) = (grid[best - 1].ln(), grid[best + 1].ln());
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = c - r * (c - a);
    let mut x2 = a + r * (c - a);
    let (mut f1, mut f2) = (g(x1)?, g(x2)?);
    while c - a > 1e-9 {
        if f1 <= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - r * (c - a);
            f1 = g(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (c - a);
            f2 = g(x2)?;
        }
    }
    Ok(NumericBandwidth { b: (0.5 * (a + c)).exp(), well_posed: true })
}

/// Numeric AMISE minimiser for BS (LN objective) or W, over `grid`.
pub fn b_opt_numeric_on(kind: KernelKind, reference: &GammaReference, n: usize, grid: &BandwidthGrid) -> Result<NumericBandwidth> {
    let nf = check_n(n)?;
    let density = reference.density();
    match kind {
        KernelKind::BS => {
            let c = mise_constants(KernelKind::LN, &density, None)?;
            minimise_on_grid(|b| Ok(-b.sqrt() * c.variance / nf + b * b * c.bias), &grid.points())
        }
        KernelKind::W => {
            let a = WeibullAmise::new(&density)?;
            minimise_on_grid(|b| a.value(nf, b), &grid.points())
        }
        _ => Err(Error::Unsupported(format!("numeric rule is for BS and W, not {}", kind.name()))),
    }
}

/// Numeric AMISE minimiser on a coarse grid over `[1e-6, 1]`.
pub fn b_opt_numeric(kind: KernelKind, reference: &GammaReference, n: usize) -> Result<NumericBandwidth> {
    b_opt_numeric_on(kind, reference, n, &BandwidthGrid { lo: 1e-6, hi: 1.0, per_decade: 4 })
}

// Running sums of the smoothing terms at one point:
// (#{X_i <= x}, sum K_i, sum 1{X_i <= x} K_i, sum K_i^2)
fn smoothing_sums(xs: &[f64], x: f64, h: f64) -> (f64, f64, f64, f64) {
    let lo = xs.partition_point(|v| *v <= x - h);
    let hi = xs.partition_point(|v| *v < x + h);
    let count = xs.partition_point(|v| *v <= x) as f64;
    let (mut sk, mut sik, mut skk) = (lo as f64, lo as f64, lo as f64);
    for &v in &xs[lo..hi] {
        let k = epanechnikov_cdf((x - v) / h);
        sk += k;
        skk += k * k;
        if v <= x {
            sik += k;
        }
    }
    (count, sk, sik, skk)
}

const GL4_X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL4_W: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

#[derive(Clone, Copy)]
enum Smoother {
    Ordinary,
    Boundary,
}

// Integral over (0, X_max + b) of g(x) where g is built from the sums.
// Pieces with a constant bandwidth are polynomial of degree <= 6, so a
// 4-point Gauss-Legendre rule is exact there.
fn integrate_criterion(sample: &Sample, b: f64, smoother: Smoother, g: impl Fn(f64, f64, f64, f64, f64) -> f64) -> Result<f64> {
    let xs = sample.sorted();
    let n = xs.len() as f64;
    let end = sample.max() + b;
    let mut cuts = vec![0.0, end];
    for &v in xs {
        cuts.push(v);
        cuts.push(v + b);
        cuts.push(v - b);
    }
    let split = match smoother {
        Smoother::Ordinary => 0.0,
        Smoother::Boundary => {
            cuts.push(b);
            for &v in xs {
                cuts.push(0.5 * v);
            }
            b
        }
    };
    cuts.retain(|c| *c >= 0.0 && *c <= end);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let eval = |x: f64| {
        let h = if x >= split { b } else { x };
        if h <= 0.0 {
            return g(n, 0.0, 0.0, 0.0, 0.0);
        }
        let (c, sk, sik, skk) = smoothing_sums(xs, x, h);
        g(n, c, sk, sik, skk)
    };
    let mut total = NeumaierSum::default();
    let mut small = Vec::new();
    for w in cuts.windows(2) {
        let (a, c) = (w[0], w[1]);
        if c <= a {
            continue;
        }
        if c <= split {
            small.push(a);
            continue;
        }
        let (m, r) = (0.5 * (a + c), 0.5 * (c - a));
        let mut s = 0.0;
        for k in 0..4 {
            s += GL4_W[k] * eval(m + r * GL4_X[k]);
        }
        total.add(s * r);
    }
    if !small.is_empty() {
        small.push(split);
        let spec = QuadratureSpec { abs_tol: 1e-13, rel_tol: 1e-10, max_subdivisions: 200 + small.len(), transform: Transform::Rational };
        let e = integrate_pieces(eval, &small, &spec).or_else(|e| match e {
            Error::NoConvergence { value, .. } => Ok::<_, Error>(crate::quadrature::Estimate { value, error: f64::NAN }),
            other => Err(other),
        })?;
        total.add(e.value);
    }
    Ok(total.total())
}

fn check_selector_input(sample: &Sample, grid: &[f64]) -> Result<()> {
    if sample.len() < 3 {
        return domain("bandwidth selection needs at least three observations");
    }
    if grid.is_empty() {
        return domain("empty bandwidth grid");
    }
    if grid.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return domain("bandwidth grid entries must be positive");
    }
    Ok(())
}

/// Leave-one-out criterion `(1/n) sum_i int (1{X_i <= x} - F_{-i,b}(x))^2 dx`
/// for the boundary-kernel estimator.
pub fn cv_criterion(sample: &Sample, b: f64) -> Result<f64> {
    integrate_criterion(sample, b, Smoother::Boundary, |n, c, sk, sik, skk| {
        let fh = sk / n;
        let fe = c / n;
        fe - 2.0 * (n * n * fh * fe - sik) / (n * (n - 1.0)) + (n * n * (n - 2.0) * fh * fh + skk) / (n * (n - 1.0).powi(2))
    })
}

/// Leave-none-out criterion for the ordinary-kernel estimator:
/// `int (F_b - F_n)^2 - (2/n) int D_b`, with
/// `D_b = (1/n) sum 1{X_i <= x}(1 - K_i) - F_n (F_n - F_b)`, so the criterion is zero at `b = 0`.
pub fn lno_criterion(sample: &Sample, b: f64) -> Result<f64> {
    integrate_criterion(sample, b, Smoother::Ordinary, |n, c, sk, sik, _| {
        let fh = sk / n;
        let fe = c / n;
        let d = (c - sik) / n - fe * (fe - fh);
        (fh - fe).powi(2) - 2.0 * d / n
    })
}

fn select(sample: &Sample, grid: &[f64], crit: impl Fn(&Sample, f64) -> Result<f64>) -> Result<f64> {
    check_selector_input(sample, grid)?;
    let mut pts = grid.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut best: Option<(f64, f64)> = None;
    for &b in &pts {
        let v = crit(sample, b)?;
        if !v.is_finite() {
            continue;
        }
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((b, v));
        }
    }
    best.map(|(b, _)| b).ok_or_else(|| Error::Selection("criterion not finite anywhere on the grid".into()))
}

/// Cross-validated bandwidth for the boundary-kernel estimator.
pub fn select_cv(sample: &Sample, grid: &[f64]) -> Result<f64> {
    select(sample, grid, cv_criterion)
}

/// Leave-none-out bandwidth for the ordinary-kernel estimator.
pub fn select_lno(sample: &Sample, grid: &[f64]) -> Result<f64> {
    select(sample, grid, lno_criterion)
}
