use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use super::{Format, IseRecord, SummaryRow, SummaryTable};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;

pub const RECORDS_HEADER: [&str; 9] = ["dist_index", "dist_name", "estimator_index", "estimator_name", "n", "replicate", "bandwidth", "ise", "flag"];
pub const SUMMARY_HEADER: [&str; 7] = ["dist_index", "estimator_index", "n", "mean_ise", "std_ise", "diff_to_best", "is_best"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(|e| io_err(path, e))
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new().from_path(path).map_err(|e| io_err(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<T> {
    let s = rec.get(i).unwrap_or("");
    s.parse().map_err(|_| io_err(path, format!("line {}: bad value `{s}` in column {}", rec.position().map_or(0, |p| p.line()), i + 1)))
}

fn opt_field(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<Option<f64>> {
    if rec.get(i).unwrap_or("").is_empty() {
        Ok(None)
    } else {
        field(path, rec, i).map(Some)
    }
}

fn check_header(path: &Path, r: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<()> {
    let h = r.headers().map_err(|e| io_err(path, e))?;
    if !h.iter().eq(expected.iter().copied()) {
        return Err(io_err(path, format!("unexpected header `{}`", h.iter().collect::<Vec<_>>().join(","))));
    }
    Ok(())
}

pub fn write_records(path: &Path, records: &[IseRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RECORDS_HEADER).map_err(|e| io_err(path, e))?;
    for r in records {
        w.write_record([
            r.dist_index.to_string(),
            r.dist_name.clone(),
            r.estimator.index().to_string(),
            r.estimator.name().to_string(),
            r.n.to_string(),
            r.replicate.to_string(),
            opt(r.bandwidth),
            opt(r.ise),
            r.flag.clone(),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<IseRecord>> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &RECORDS_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let j: usize = field(path, &rec, 2)?;
        let estimator = EstimatorKind::from_index(j).ok_or_else(|| io_err(path, format!("unknown estimator index {j}")))?;
        out.push(IseRecord {
            dist_index: field(path, &rec, 0)?,
            dist_name: rec.get(1).unwrap_or("").to_string(),
            estimator,
            n: field(path, &rec, 4)?,
            replicate: field(path, &rec, 5)?,
            bandwidth: opt_field(path, &rec, 6)?,
            ise: opt_field(path, &rec, 7)?,
            flag: rec.get(8).unwrap_or("").to_string(),
            wall_time: Duration::ZERO,
        });
    }
    Ok(out)
}

pub fn write_summary(path: &Path, table: &SummaryTable) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER).map_err(|e| io_err(path, e))?;
    for r in &table.rows {
        w.write_record([
            r.dist_index.to_string(),
            r.estimator_index.to_string(),
            r.n.to_string(),
            r.mean_ise.to_string(),
            r.std_ise.to_string(),
            r.diff_to_best.to_string(),
            r.is_best.to_string(),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &SUMMARY_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        out.push(SummaryRow {
            dist_index: field(path, &rec, 0)?,
            estimator_index: field(path, &rec, 1)?,
            n: field(path, &rec, 2)?,
            mean_ise: field(path, &rec, 3)?,
            std_ise: field(path, &rec, 4)?,
            diff_to_best: field(path, &rec, 5)?,
            is_best: field(path, &rec, 6)?,
        });
    }
    Ok(out)
}

/// Values are shown multiplied by 10^4 with two decimals.
pub(crate) fn scaled(v: f64) -> String {
    format!("{:.2}", v * 1e4)
}

fn markdown(table: &SummaryTable) -> String {
    let mut ests: Vec<usize> = table.rows.iter().map(|r| r.estimator_index).collect();
    ests.sort_unstable();
    ests.dedup();
    let mut sizes: Vec<usize> = table.rows.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let names: Vec<&str> = ests.iter().map(|&j| EstimatorKind::from_index(j).map_or("?", |k| k.name())).collect();
    let get = |i: usize, j: usize, n: usize| table.rows.iter().find(|r| r.dist_index == i && r.estimator_index == j && r.n == n);
    let header = |first: &str, extra: &[&str]| {
        let mut s = format!("| {first} | {} |", names.join(" | "));
        for e in extra {
            s.push_str(&format!(" {e} |"));
        }
        s.push('\n');
        s.push_str(&"|---".repeat(names.len() + 1 + extra.len()));
        s.push_str("|\n");
        s
    };
    let mut out = String::new();
    for &n in &sizes {
        let _ = writeln!(out, "## ISE mean (standard deviation) x 10^4, n = {n}\n");
        out.push_str(&header("distribution", &["best", "excluded"]));
        for (&i, name) in &table.dist_names {
            let mut line = format!("| {name} |");
            let mut best = Vec::new();
            let mut flagged = 0;
            for (&j, ename) in ests.iter().zip(&names) {
                match get(i, j, n) {
                    Some(r) => {
                        let cell = format!("{} ({})", scaled(r.mean_ise), scaled(r.std_ise));
                        if r.is_best {
                            best.push(*ename);
                            let _ = write!(line, " **{cell}** |");
                        } else {
                            let _ = write!(line, " {cell} |");
                        }
                    }
                    None => line.push_str(" - |"),
                }
                flagged += table.counts.get(&(i, j, n)).map_or(0, |c| c.flagged);
            }
            let _ = writeln!(line, " {} | {flagged} |", best.join(", "));
            out.push_str(&line);
        }
        let _ = writeln!(out, "\n## Mean ISE minus the row minimum x 10^4, n = {n}\n");
        out.push_str(&header("distribution", &[]));
        for (&i, name) in &table.dist_names {
            let mut line = format!("| {name} |");
            for &j in &ests {
                match get(i, j, n) {
                    Some(r) => {
                        let _ = write!(line, " {} |", scaled(r.diff_to_best));
                    }
                    None => line.push_str(" - |"),
                }
            }
            let _ = writeln!(out, "{line}");
        }
        let mut line = "| total |".to_string();
        for &j in &ests {
            let _ = write!(line, " {} |", table.totals.get(&(j, n)).map_or("-".into(), |v| scaled(*v)));
        }
        let _ = writeln!(out, "{line}\n");
    }
    out
}

/// Write the summary in `format` into `dir`, returning the file written.
pub fn emit(table: &SummaryTable, format: Format, dir: &Path) -> Result<PathBuf> {
    if table.rows.is_empty() {
        return Err(Error::Incomplete("summary has no estimators".into()));
    }
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    match format {
        Format::Csv => {
            let path = dir.join("summary.csv");
            write_summary(&path, table)?;
            Ok(path)
        }
        Format::Markdown => {
            let path = dir.join("summary.md");
            fs::write(&path, markdown(table)).map_err(|e| io_err(&path, e))?;
            Ok(path)
        }
    }
}
