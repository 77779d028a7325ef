//! Monte Carlo study runner: per-replicate ISE records, the mean and difference
//! tables, and their CSV/markdown output.

mod config;
mod report;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use config::{parse_distribution, parse_estimator, Format, SimulationConfig, DEFAULT_SEED};
pub use report::{emit, read_records, read_summary, write_records, write_summary, RECORDS_HEADER, SUMMARY_HEADER};

use crate::bandwidth::{
    b_opt_closed_form, b_opt_numeric, b_opt_with_limit, fit_gamma_mle, select_cv, select_lno, GammaReference, LimitTable,
};
use crate::distributions::{KernelKind, RngStream, TargetDistribution};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, FittedEstimator, Sample};
use crate::quadrature::{integrate_half_line, ise, QuadratureSpec};

pub const FLAG_OK: &str = "ok";
/// The numeric bandwidth rule returned a grid-end or non-unimodal minimum; the ISE is still used.
pub const FLAG_GRID_EDGE: &str = "grid-edge";

/// One estimator on one replicate.
#[derive(Debug, Clone)]
pub struct IseRecord {
    pub dist_index: usize,
    pub dist_name: String,
    pub estimator: EstimatorKind,
    pub n: usize,
    pub replicate: usize,
    pub bandwidth: Option<f64>,
    /// Missing when the cell failed before an ISE estimate existed.
    pub ise: Option<f64>,
    pub flag: String,
    /// Not serialised and ignored by equality.
    pub wall_time: Duration,
}

impl PartialEq for IseRecord {
    fn eq(&self, o: &Self) -> bool {
        self.dist_index == o.dist_index
            && self.dist_name == o.dist_name
            && self.estimator == o.estimator
            && self.n == o.n
            && self.replicate == o.replicate
            && self.bandwidth.map(f64::to_bits) == o.bandwidth.map(f64::to_bits)
            && self.ise.map(f64::to_bits) == o.ise.map(f64::to_bits)
            && self.flag == o.flag
    }
}

impl IseRecord {
    /// Failed records are excluded from summaries.
    pub fn is_failure(&self) -> bool {
        self.flag.starts_with("fail")
    }

    fn key(&self) -> (usize, usize, usize, usize) {
        (self.dist_index, self.estimator.index(), self.n, self.replicate)
    }
}

fn failure_flag(e: &Error) -> String {
    let tag = match e {
        Error::Domain(_) => "domain",
        Error::Estimation(_) => "estimation",
        Error::Selection(_) => "selection",
        Error::Unsupported(_) => "unsupported",
        Error::NoConvergence { .. } => "quadrature",
        _ => "other",
    };
    format!("fail-{tag}")
}

/// Expected ISE of the EDF, `n^{-1} int F(1 - F)`.
pub fn expected_edf_ise(law: &TargetDistribution, n: usize, spec: &QuadratureSpec) -> Result<f64> {
    let e = integrate_half_line(|x| law.cdf_at(x) * law.sf_at(x), spec)?;
    Ok(e.value / n as f64)
}

struct Shared {
    laws: [TargetDistribution; 8],
    estimators: Vec<EstimatorKind>,
    quad: QuadratureSpec,
    grid: Vec<f64>,
    limits: BTreeMap<usize, LimitTable>,
    seed: u64,
}

fn kernel_code(k: KernelKind) -> usize {
    KernelKind::ALL.iter().position(|q| *q == k).unwrap()
}

fn bandwidth_for(kind: EstimatorKind, sample: &Sample, reference: &Result<GammaReference>, sh: &Shared) -> Result<(Option<f64>, bool)> {
    let n = sample.len();
    let plug = |r: &Result<GammaReference>| r.clone();
    Ok(match kind {
        EstimatorKind::EDF => (None, true),
        EstimatorKind::OK => (Some(select_lno(sample, &sh.grid)?), true),
        EstimatorKind::BK => (Some(select_cv(sample, &sh.grid)?), true),
        _ => {
            let k = kind.kernel().unwrap();
            let r = plug(reference)?;
            match k {
                KernelKind::Gam | KernelKind::IGam | KernelKind::LN => (Some(b_opt_closed_form(k, &r, n)?), true),
                KernelKind::IGau | KernelKind::RIG => (Some(b_opt_with_limit(k, &r, n, &sh.limits[&kernel_code(k)])?), true),
                KernelKind::BS | KernelKind::W => {
                    let nb = b_opt_numeric(k, &r, n)?;
                    (Some(nb.b), nb.well_posed)
                }
            }
        }
    })
}

fn run_cell(sh: &Shared, i: usize, n: usize, k: usize) -> Vec<IseRecord> {
    let law = sh.laws[i - 1];
    let mut rng = RngStream::for_cell(sh.seed, &[i as u64, n as u64, k as u64]);
    let record = |kind: EstimatorKind, bandwidth, ise, flag: String, t: Instant| IseRecord {
        dist_index: i,
        dist_name: law.name(),
        estimator: kind,
        n,
        replicate: k,
        bandwidth,
        ise,
        flag,
        wall_time: t.elapsed(),
    };
    let sample = match law.sample(&mut rng, n) {
        Ok(s) => s,
        Err(e) => {
            return sh.estimators.iter().map(|&kind| record(kind, None, None, failure_flag(&e), Instant::now())).collect();
        }
    };
    let reference = if sh.estimators.iter().any(|e| e.kernel().is_some()) {
        fit_gamma_mle(&sample)
    } else {
        Err(Error::Estimation("no reference needed".into()))
    };
    let mut out = Vec::with_capacity(sh.estimators.len());
    for &kind in &sh.estimators {
        let t = Instant::now();
        let (b, well_posed) = match bandwidth_for(kind, &sample, &reference, sh) {
            Ok(v) => v,
            Err(e) => {
                out.push(record(kind, None, None, failure_flag(&e), t));
                continue;
            }
        };
        let fitted = match FittedEstimator::new(kind, sample.clone(), b) {
            Ok(f) => f,
            Err(e) => {
                out.push(record(kind, b, None, failure_flag(&e), t));
                continue;
            }
        };
        let flag = if well_posed { FLAG_OK } else { FLAG_GRID_EDGE };
        out.push(match ise(&fitted, &law, &sh.quad) {
            Ok(e) => record(kind, b, Some(e.value), flag.to_string(), t),
            Err(e @ Error::NoConvergence { value, .. }) => record(kind, b, Some(value), failure_flag(&e), t),
            Err(e) => record(kind, b, None, failure_flag(&e), t),
        });
    }
    out
}

/// Run the study grid. Records come back ordered by (distribution, estimator, n, replicate);
/// per-cell failures are flagged records, never errors.
pub fn run_experiment(config: &SimulationConfig) -> Result<Vec<IseRecord>> {
    run_experiment_with_progress(config, |_, _| {})
}

/// As [`run_experiment`], calling `progress(done, total)` after each replicate.
pub fn run_experiment_with_progress(config: &SimulationConfig, progress: impl Fn(usize, usize) + Sync) -> Result<Vec<IseRecord>> {
    config.validate()?;
    let config = config.clone().normalized();
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = config.threads {
            b = b.num_threads(t);
        }
        b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?
    };
    pool.install(|| {
        let mut limits = BTreeMap::new();
        for kind in [KernelKind::IGau, KernelKind::RIG] {
            if config.estimators.contains(&EstimatorKind::from_kernel(kind)) {
                let code = kernel_code(kind);
                let mut rng = RngStream::for_cell(config.seed, &[0, 0, code as u64]);
                let table = LimitTable::estimate(kind, &config.limit_points, config.limit_reps, config.limit_b_probe, &mut rng)?;
                limits.insert(code, table);
            }
        }
        let shared = Shared {
            laws: TargetDistribution::study_laws(),
            estimators: config.estimators.clone(),
            quad: config.quadrature,
            grid: config.grid.points(),
            limits,
            seed: config.seed,
        };
        let mut cells = Vec::new();
        for &i in &config.distributions {
            for &n in &config.sizes {
                for k in 0..config.replicates {
                    cells.push((i, n, k));
                }
            }
        }
        let total = cells.len();
        let done = std::sync::atomic::AtomicUsize::new(0);
        let mut records: Vec<IseRecord> = cells
            .par_iter()
            .flat_map_iter(|&(i, n, k)| {
                let r = run_cell(&shared, i, n, k);
                progress(done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1, total);
                r
            })
            .collect();
        records.sort_by_key(IseRecord::key);
        Ok(records)
    })
}

/// Mean-table and difference-table entries for one (distribution, estimator, n) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dist_index: usize,
    pub estimator_index: usize,
    pub n: usize,
    pub mean_ise: f64,
    /// `(M - 1)`-denominator standard deviation.
    pub std_ise: f64,
    pub diff_to_best: f64,
    pub is_best: bool,
}

/// Records used and excluded per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellCount {
    pub used: usize,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    /// Column sums of `diff_to_best`, keyed by (estimator index, n).
    pub totals: BTreeMap<(usize, usize), f64>,
    pub counts: BTreeMap<(usize, usize, usize), CellCount>,
    pub dist_names: BTreeMap<usize, String>,
}

impl SummaryTable {
    pub fn row(&self, dist_index: usize, estimator: EstimatorKind, n: usize) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.dist_index == dist_index && r.estimator_index == estimator.index() && r.n == n)
    }
}

/// Mean and `(m - 1)`-denominator standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, if v.len() > 1 { (ss / (m - 1.0)).sqrt() } else { f64::NAN })
}

/// Build the mean and difference tables from records. Every (distribution, estimator, n) combination present in the
/// records must cover replicates `0..M`, with `M` the largest replicate count seen.
pub fn summarize(records: &[IseRecord]) -> Result<SummaryTable> {
    if records.is_empty() {
        return Err(Error::Incomplete("no records".into()));
    }
    let mut dists = BTreeMap::new();
    let mut ests = std::collections::BTreeSet::new();
    let mut sizes = std::collections::BTreeSet::new();
    let mut replicates = 0;
    let mut cells: BTreeMap<(usize, usize, usize), BTreeMap<usize, &IseRecord>> = BTreeMap::new();
    for r in records {
        dists.insert(r.dist_index, r.dist_name.clone());
        ests.insert(r.estimator.index());
        sizes.insert(r.n);
        replicates = replicates.max(r.replicate + 1);
        let slot = cells.entry((r.dist_index, r.estimator.index(), r.n)).or_default();
        if slot.insert(r.replicate, r).is_some() {
            return Err(Error::Incomplete(format!(
                "duplicate record for distribution {}, estimator {}, n = {}, replicate {}",
                r.dist_index, r.estimator.index(), r.n, r.replicate
            )));
        }
    }
    let mut gaps = Vec::new();
    let mut stats = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for &i in dists.keys() {
        for &j in &ests {
            for &n in &sizes {
                let Some(slot) = cells.get(&(i, j, n)) else {
                    gaps.push(format!("(dist {i}, estimator {j}, n {n}): no records"));
                    continue;
                };
                if slot.len() < replicates {
                    let missing: Vec<String> = (0..replicates).filter(|k| !slot.contains_key(k)).map(|k| k.to_string()).collect();
                    gaps.push(format!("(dist {i}, estimator {j}, n {n}): missing replicates {}", missing.join(" ")));
                    continue;
                }
                let good: Vec<f64> = slot.values().filter(|r| !r.is_failure()).filter_map(|r| r.ise).collect();
                counts.insert((i, j, n), CellCount { used: good.len(), flagged: slot.len() - good.len() });
                if good.is_empty() {
                    gaps.push(format!("(dist {i}, estimator {j}, n {n}): every replicate flagged"));
                    continue;
                }
                stats.insert((i, j, n), mean_std(&good));
            }
        }
    }
    if !gaps.is_empty() {
        return Err(Error::Incomplete(gaps.join("; ")));
    }
    let mut rows = Vec::new();
    let mut totals = BTreeMap::new();
    for &i in dists.keys() {
        for &n in &sizes {
            let best = ests.iter().map(|&j| stats[&(i, j, n)].0).fold(f64::INFINITY, f64::min);
            for &j in &ests {
                let (mean, std) = stats[&(i, j, n)];
                let diff = mean - best;
                *totals.entry((j, n)).or_insert(0.0) += diff;
                rows.push(SummaryRow { dist_index: i, estimator_index: j, n, mean_ise: mean, std_ise: std, diff_to_best: diff, is_best: diff == 0.0 });
            }
        }
    }
    rows.sort_by_key(|r| (r.dist_index, r.estimator_index, r.n));
    Ok(SummaryTable { rows, totals, counts, dist_names: dists })
}
