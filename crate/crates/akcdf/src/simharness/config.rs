use std::collections::HashSet;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bandwidth::BandwidthGrid;
use crate::distributions::TargetDistribution;
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::quadrature::QuadratureSpec;

/// Output format of the summary tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::Config(format!("unknown format `{other}` (expected csv or markdown)"))),
        }
    }
}

/// Everything a simulation run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// 1-based indices into [`TargetDistribution::study_laws`].
    pub distributions: Vec<usize>,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub estimators: Vec<EstimatorKind>,
    pub seed: u64,
    pub quadrature: QuadratureSpec,
    pub grid: BandwidthGrid,
    pub limit_reps: usize,
    pub limit_b_probe: f64,
    pub limit_points: Vec<f64>,
    pub out_dir: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 20_240_517;

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            distributions: (1..=8).collect(),
            sizes: vec![256, 1000],
            replicates: 1000,
            estimators: EstimatorKind::ALL.to_vec(),
            seed: DEFAULT_SEED,
            quadrature: QuadratureSpec::default(),
            grid: BandwidthGrid::default(),
            limit_reps: 1_000_000,
            limit_b_probe: 1e-4,
            limit_points: vec![0.05, 0.2, 1.0, 5.0, 25.0],
            out_dir: PathBuf::from("results"),
            format: Format::Csv,
            threads: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{}`", v.trim())))
}

fn parse_list<T>(key: &str, v: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let out = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(item).collect::<Result<Vec<T>>>()?;
    if out.is_empty() {
        return Err(Error::Config(format!("`{key}` must not be empty")));
    }
    Ok(out)
}

/// Study law by 1-based index or by name (`burr-1-3-1`, ...).
pub fn parse_distribution(s: &str) -> Result<usize> {
    let laws = TargetDistribution::study_laws();
    if let Ok(i) = s.parse::<usize>() {
        if (1..=laws.len()).contains(&i) {
            return Ok(i);
        }
        return Err(Error::Config(format!("distribution index {i} outside 1..={}", laws.len())));
    }
    laws.iter()
        .position(|d| d.name().eq_ignore_ascii_case(s))
        .map(|p| p + 1)
        .ok_or_else(|| Error::Config(format!("unknown distribution `{s}`")))
}

pub fn parse_estimator(s: &str) -> Result<EstimatorKind> {
    EstimatorKind::parse(s).ok_or_else(|| Error::Config(format!("unknown estimator `{s}`")))
}

impl SimulationConfig {
    /// Parse `key = value` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimulationConfig::default();
        let mut seen = HashSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", no + 1)));
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", no + 1)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "seed" => self.seed = parse_num(key, v)?,
            "replicates" => self.replicates = parse_num(key, v)?,
            "sizes" => self.sizes = parse_list(key, v, |s| parse_num(key, s))?,
            "distributions" => self.distributions = parse_list(key, v, parse_distribution)?,
            "estimators" => self.estimators = parse_list(key, v, parse_estimator)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "format" => self.format = v.parse()?,
            "threads" => self.threads = Some(parse_num(key, v)?),
            "abs_tol" => self.quadrature.abs_tol = parse_num(key, v)?,
            "rel_tol" => self.quadrature.rel_tol = parse_num(key, v)?,
            "max_subdivisions" => self.quadrature.max_subdivisions = parse_num(key, v)?,
            "grid_lo" => self.grid.lo = parse_num(key, v)?,
            "grid_hi" => self.grid.hi = parse_num(key, v)?,
            "grid_per_decade" => self.grid.per_decade = parse_num(key, v)?,
            "limit_reps" => self.limit_reps = parse_num(key, v)?,
            "limit_b_probe" => self.limit_b_probe = parse_num(key, v)?,
            "limit_points" => self.limit_points = parse_list(key, v, |s| parse_num(key, s))?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sizes must be a nonempty list of positive integers".into());
        }
        if self.distributions.is_empty() {
            return bad("no distributions selected".into());
        }
        if self.estimators.is_empty() {
            return bad("no estimators selected".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        self.quadrature.validate().map_err(|e| Error::Config(e.to_string()))?;
        BandwidthGrid::new(self.grid.lo, self.grid.hi, self.grid.per_decade).map_err(|e| Error::Config(e.to_string()))?;
        if self.limit_reps < 10_000 || !(self.limit_b_probe > 0.0 && self.limit_b_probe <= 1e-2) {
            return bad("limit constant needs limit_reps >= 10000 and 0 < limit_b_probe <= 0.01".into());
        }
        if self.limit_points.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return bad("limit_points must be positive".into());
        }
        Ok(())
    }

    /// Selections sorted by index with duplicates removed.
    pub fn normalized(mut self) -> Self {
        self.distributions.sort_unstable();
        self.distributions.dedup();
        self.sizes.sort_unstable();
        self.sizes.dedup();
        self.estimators.sort_by_key(|k| k.index());
        self.estimators.dedup();
        self
    }
}
