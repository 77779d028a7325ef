//! The ten distribution-function estimators.

use std::fmt;

use crate::distributions::{check_kernel_args, KernelKind, MappedKernel};
use crate::error::{domain, Result};
use crate::quadrature::NeumaierSum;

/// Where a sample came from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub law: Option<String>,
}

/// Positive observations, kept sorted; the draw order is retained.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    sorted: Vec<f64>,
    original: Vec<f64>,
    provenance: Provenance,
}

impl Sample {
    pub fn new(observations: Vec<f64>) -> Result<Self> {
        Sample::with_provenance(observations, Provenance::default())
    }

    pub fn with_provenance(observations: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if observations.is_empty() {
            return domain("a sample needs at least one observation");
        }
        if let Some(bad) = observations.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return domain(format!("observations must be positive and finite, got {bad}"));
        }
        let mut sorted = observations.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Sample { sorted, original: observations, provenance })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Observations in draw order.
    pub fn original(&self) -> &[f64] {
        &self.original
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// Concatenation of two samples (provenance is dropped).
    pub fn union(&self, other: &Sample) -> Sample {
        let mut obs = self.original.clone();
        obs.extend_from_slice(&other.original);
        Sample::new(obs).expect("both parts are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EstimatorKind {
    Gam,
    IGam,
    LN,
    IGau,
    RIG,
    BS,
    W,
    OK,
    BK,
    EDF,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 10] = [
        EstimatorKind::Gam,
        EstimatorKind::IGam,
        EstimatorKind::LN,
        EstimatorKind::IGau,
        EstimatorKind::RIG,
        EstimatorKind::BS,
        EstimatorKind::W,
        EstimatorKind::OK,
        EstimatorKind::BK,
        EstimatorKind::EDF,
    ];

    /// Position in the study tables, starting at 1.
    pub fn index(self) -> usize {
        EstimatorKind::ALL.iter().position(|k| *k == self).unwrap() + 1
    }

    pub fn from_index(j: usize) -> Option<Self> {
        j.checked_sub(1).and_then(|i| EstimatorKind::ALL.get(i).copied())
    }

    pub fn name(self) -> &'static str {
        match self.kernel() {
            Some(k) => k.name(),
            None => match self {
                EstimatorKind::OK => "OK",
                EstimatorKind::BK => "BK",
                _ => "EDF",
            },
        }
    }

    /// Accepts a table index or a case-insensitive name (`B-S` is accepted for `BS`).
    pub fn parse(s: &str) -> Option<Self> {
        let t = s.trim();
        if let Ok(j) = t.parse::<usize>() {
            return EstimatorKind::from_index(j);
        }
        let norm = t.replace('-', "").to_ascii_lowercase();
        EstimatorKind::ALL.into_iter().find(|k| k.name().to_ascii_lowercase() == norm)
    }

    pub fn kernel(self) -> Option<KernelKind> {
        match self {
            EstimatorKind::Gam => Some(KernelKind::Gam),
            EstimatorKind::IGam => Some(KernelKind::IGam),
            EstimatorKind::LN => Some(KernelKind::LN),
            EstimatorKind::IGau => Some(KernelKind::IGau),
            EstimatorKind::RIG => Some(KernelKind::RIG),
            EstimatorKind::BS => Some(KernelKind::BS),
            EstimatorKind::W => Some(KernelKind::W),
            _ => None,
        }
    }

    pub fn from_kernel(k: KernelKind) -> Self {
        EstimatorKind::ALL[KernelKind::ALL.iter().position(|q| *q == k).unwrap()]
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Distribution function of the Epanechnikov kernel.
pub fn epanechnikov_cdf(u: f64) -> f64 {
    if u <= -1.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        0.5 + 0.75 * u - 0.25 * u * u * u
    }
}

/// Anything that can be compared with a true distribution function.
pub trait DistributionCurve {
    /// Value at `x >= 0`.
    fn value_at(&self, x: f64) -> f64;

    /// Points where the curve is not smooth, or that help quadrature find its features.
    fn break_points(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// An estimator bound to a sample and a bandwidth.
#[derive(Debug, Clone)]
pub struct FittedEstimator {
    kind: EstimatorKind,
    sample: Sample,
    bandwidth: Option<f64>,
    logs: Vec<f64>,
}

impl FittedEstimator {
    pub fn new(kind: EstimatorKind, sample: Sample, bandwidth: Option<f64>) -> Result<Self> {
        match (kind, bandwidth) {
            (EstimatorKind::EDF, _) => {}
            (_, None) => return domain(format!("{kind} needs a bandwidth")),
            (_, Some(b)) => {
                if !(b > 0.0) || !b.is_finite() {
                    return domain(format!("bandwidth must be positive, got {b}"));
                }
                if kind == EstimatorKind::RIG && b >= 1.0 {
                    return domain(format!("RIG needs a bandwidth below 1, got {b}"));
                }
            }
        }
        let bandwidth = if kind == EstimatorKind::EDF { None } else { bandwidth };
        let logs = if kind.kernel().is_some() { sample.sorted().iter().map(|v| v.ln()).collect() } else { Vec::new() };
        Ok(FittedEstimator { kind, sample, bandwidth, logs })
    }

    pub fn edf(sample: Sample) -> Self {
        FittedEstimator::new(EstimatorKind::EDF, sample, None).expect("EDF needs no bandwidth")
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn bandwidth(&self) -> Option<f64> {
        self.bandwidth
    }

    /// Estimate of `F(x)`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return domain(format!("estimators are defined for x >= 0, got {x}"));
        }
        if x == 0.0 && self.kind.kernel().is_some() && self.kind != EstimatorKind::Gam {
            // parameter maps need x > 0; every other kernel degenerates at the origin
            return Ok(0.0);
        }
        Ok(self.value(x))
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        let xs = self.sample.sorted();
        let n = xs.len() as f64;
        match self.kind {
            EstimatorKind::EDF => xs.partition_point(|v| *v <= x) as f64 / n,
            EstimatorKind::OK => window_epa(xs, x, self.bandwidth.unwrap()) / n,
            EstimatorKind::BK => {
                let b = self.bandwidth.unwrap();
                if x <= 0.0 {
                    0.0
                } else {
                    window_epa(xs, x, if x >= b { b } else { x }) / n
                }
            }
            _ => {
                let kernel = self.kind.kernel().unwrap();
                if x.is_infinite() {
                    return 1.0;
                }
                if x <= 0.0 && kernel != KernelKind::Gam {
                    return 0.0;
                }
                let m = MappedKernel::new(kernel, x, self.bandwidth.unwrap());
                (self.kernel_sum(&m) / n).clamp(0.0, 1.0)
            }
        }
    }

    fn kernel_sum(&self, m: &MappedKernel) -> f64 {
        let xs = self.sample.sorted();
        let logs = &self.logs;
        let term = |i: usize| m.survival(xs[i], logs[i]);
        // survival is nonincreasing in t: skip the leading terms that are exactly
        // one and the trailing terms that are exactly zero
        let lo = partition(xs.len(), |i| term(i) == 1.0);
        let hi = lo + partition(xs.len() - lo, |i| term(lo + i) > 0.0);
        let mut s = NeumaierSum::default();
        s.add(lo as f64);
        for i in lo..hi {
            s.add(term(i));
        }
        s.total()
    }
}

fn partition(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

fn window_epa(xs: &[f64], x: f64, h: f64) -> f64 {
    let lo = xs.partition_point(|v| *v <= x - h);
    let hi = xs.partition_point(|v| *v < x + h);
    let mut s = NeumaierSum::default();
    s.add(lo as f64);
    for v in &xs[lo..hi] {
        s.add(epanechnikov_cdf((x - v) / h));
    }
    s.total()
}

impl DistributionCurve for FittedEstimator {
    fn value_at(&self, x: f64) -> f64 {
        self.value(x)
    }

    fn break_points(&self) -> Vec<f64> {
        let xs = self.sample.sorted();
        let mut pts = Vec::new();
        match (self.kind, self.bandwidth) {
            (EstimatorKind::EDF, _) => pts.extend_from_slice(xs),
            (EstimatorKind::OK, Some(b)) => {
                for &v in xs {
                    pts.push(v - b);
                    pts.push(v + b);
                }
            }
            (EstimatorKind::BK, Some(b)) => {
                pts.push(b);
                for &v in xs {
                    if v - b >= b {
                        pts.push(v - b);
                    }
                    pts.push(v + b);
                    if v < 2.0 * b {
                        pts.push(0.5 * v);
                    }
                }
            }
            _ => {
                let n = xs.len();
                let m = n.min(16);
                for q in 1..=m {
                    pts.push(xs[(q * n) / m - 1]);
                }
            }
        }
        pts.retain(|v| *v > 0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Boundary-kernel estimate at `x > 0`: bandwidth `b` for `x >= b` and `x` below.
pub fn evaluate_bk(sample: &Sample, b: f64, x: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return domain(format!("bandwidth must be positive, got {b}"));
    }
    if !(x > 0.0) {
        return domain(format!("boundary kernel needs x > 0, got {x}"));
    }
    let h = if x >= b { b } else { x };
    Ok(window_epa(sample.sorted(), x, h) / sample.len() as f64)
}

/// Estimate built from one kernel for one sample, checked.
pub fn fit_kernel(kind: KernelKind, sample: Sample, b: f64) -> Result<FittedEstimator> {
    check_kernel_args(kind, 1.0, b)?;
    FittedEstimator::new(EstimatorKind::from_kernel(kind), sample, Some(b))
}
