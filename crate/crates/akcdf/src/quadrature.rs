//! Adaptive quadrature on `(0, inf)`.
//!
//! The default rule is a globally adaptive 21-point Gauss-Kronrod scheme on
//! `t in (0, 1)` with `x = t / (1 - t)`. Integrands with integrable endpoint
//! singularities can use the exp-sinh double-exponential rule instead.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::distributions::TargetDistribution;
use crate::error::{domain, Error, Result};
use crate::estimators::DistributionCurve;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980222713,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651146,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// `x = t / (1 - t)` followed by adaptive Gauss-Kronrod.
    Rational,
    /// `x = exp(pi/2 sinh s)` with trapezoidal refinement.
    DoubleExponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub transform: Transform,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { abs_tol: 1e-10, rel_tol: 1e-8, max_subdivisions: 200, transform: Transform::Rational }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize, transform: Transform) -> Result<Self> {
        let spec = QuadratureSpec { abs_tol, rel_tol, max_subdivisions, transform };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return domain("quadrature tolerances must be positive");
        }
        if self.max_subdivisions < 10 {
            return domain("quadrature needs at least 10 subdivisions");
        }
        Ok(())
    }

    /// Same rule with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        QuadratureSpec { abs_tol: self.abs_tol * factor, rel_tol: self.rel_tol * factor, ..*self }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// An integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Kahan-Babuska-Neumaier running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let fc = f(centr);
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = hlgth * XGK[j];
        let f1 = f(centr - dx);
        let f2 = f(centr + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    let mut resabs = WGK[10] * fc.abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
        resabs += WGK[j] * (fv1[j].abs() + fv2[j].abs());
    }
    let value = resk * hlgth;
    resabs *= hlgth.abs();
    resasc *= hlgth.abs();
    let mut err = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

/// Globally adaptive Gauss-Kronrod over the union of consecutive intervals
/// given by `cuts` (sorted, at least two entries).
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, cuts: &[f64], spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    if cuts.len() < 2 {
        return domain("need at least one interval");
    }
    let mut heap = BinaryHeap::with_capacity(cuts.len() + 2 * spec.max_subdivisions);
    for w in cuts.windows(2) {
        if !(w[1] > w[0]) {
            continue;
        }
        let (value, error) = gk21(&mut f, w[0], w[1]);
        heap.push(Segment { a: w[0], b: w[1], value, error });
    }
    let mut value: f64 = heap.iter().map(|s| s.value).sum();
    let mut error: f64 = heap.iter().map(|s| s.error).sum();
    let mut splits = 0;
    let mut frozen = Vec::new();
    while error > spec.target(value) && splits < spec.max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 1e-14 * worst.a.abs().max(worst.b.abs()) {
            // cannot be refined further
            frozen.push(worst);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        splits += 1;
    }
    let mut v = NeumaierSum::default();
    let mut e = NeumaierSum::default();
    for s in heap.iter().chain(frozen.iter()) {
        v.add(s.value);
        e.add(s.error);
    }
    let est = Estimate { value: v.total(), error: e.total() };
    if !est.value.is_finite() {
        return Err(Error::NoConvergence { value: est.value, error: est.error });
    }
    if est.error > spec.target(est.value) {
        return Err(Error::NoConvergence { value: est.value, error: est.error });
    }
    Ok(est)
}

/// Adaptive integral over a finite interval.
pub fn integrate_interval<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return domain("interval end points must be finite");
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    if a > b {
        return integrate_pieces(f, &[b, a], spec).map(|e| Estimate { value: -e.value, ..e });
    }
    integrate_pieces(f, &[a, b], spec)
}

/// Map a point of `[0, inf)` to the unit interval used by the rational rule.
pub fn to_unit(x: f64) -> f64 {
    if x.is_infinite() {
        1.0
    } else {
        x / (1.0 + x)
    }
}

fn mapped<F: FnMut(f64) -> f64>(mut f: F) -> impl FnMut(f64) -> f64 {
    move |t: f64| {
        let s = 1.0 - t;
        let v = f(t / s);
        if v == 0.0 {
            0.0
        } else {
            v / (s * s)
        }
    }
}

/// Integral over `(0, inf)` with the rule selected by `spec.transform`.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<Estimate> {
    match spec.transform {
        Transform::Rational => integrate_pieces(mapped(f), &[0.0, 0.25, 0.5, 0.75, 1.0], spec),
        Transform::DoubleExponential => exp_sinh(f, spec),
    }
}

/// Integral over `(0, inf)` with extra break points (in `x`) where the
/// integrand is not smooth. Always uses the rational map.
pub fn integrate_half_line_with_breaks<F: FnMut(f64) -> f64>(
    f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let mut cuts = Vec::with_capacity(breaks.len() + 2);
    cuts.push(0.0);
    for &x in breaks {
        if x > 0.0 && x.is_finite() {
            cuts.push(to_unit(x));
        }
    }
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let spec = QuadratureSpec { max_subdivisions: spec.max_subdivisions + cuts.len(), ..*spec };
    integrate_pieces(mapped(f), &cuts, &spec)
}

/// Integrated squared error `int_0^inf (F_hat - F)^2 dx`.
pub fn ise<E: DistributionCurve + ?Sized>(est: &E, truth: &TargetDistribution, spec: &QuadratureSpec) -> Result<Estimate> {
    let mut breaks = est.break_points();
    breaks.extend(truth.kinks());
    let e = integrate_half_line_with_breaks(
        |x| {
            let d = est.value_at(x) - truth.cdf_at(x);
            d * d
        },
        &breaks,
        spec,
    )?;
    Ok(Estimate { value: e.value.max(0.0), error: e.error })
}

impl DistributionCurve for TargetDistribution {
    fn value_at(&self, x: f64) -> f64 {
        self.cdf_at(x)
    }

    fn break_points(&self) -> Vec<f64> {
        self.kinks()
    }
}

const DE_T_MAX: f64 = 6.5;

fn exp_sinh<F: FnMut(f64) -> f64>(mut f: F, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    let mut term = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let x = u.exp();
        let w = FRAC_PI_2 * t.cosh() * x;
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = NeumaierSum::default();
    sum.add(term(0.0));
    let mut k = 1;
    while k as f64 * h <= DE_T_MAX {
        let t = k as f64 * h;
        sum.add(term(t));
        sum.add(term(-t));
        k += 1;
    }
    let mut prev = h * sum.total();
    let max_levels = 4 + (spec.max_subdivisions as f64).log2().ceil() as usize;
    for _ in 0..max_levels {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= DE_T_MAX {
            let t = k as f64 * h;
            sum.add(term(t));
            sum.add(term(-t));
            k += 2;
        }
        let cur = h * sum.total();
        let error = (cur - prev).abs();
        if error <= spec.target(cur) && !(h > 0.25) {
            return Ok(Estimate { value: cur, error });
        }
        prev = cur;
    }
    Err(Error::NoConvergence { value: prev, error: f64::NAN })
}
