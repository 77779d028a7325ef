use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use akcdf::estimators::EstimatorKind;
use akcdf::simharness::*;
use akcdf::Error;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("akcdf-sim-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn small(estimators: Vec<EstimatorKind>, replicates: usize) -> SimulationConfig {
    SimulationConfig { distributions: vec![1, 5], sizes: vec![64], replicates, estimators, limit_reps: 20_000, ..Default::default() }
}

fn rec(i: usize, j: EstimatorKind, n: usize, k: usize, ise: f64) -> IseRecord {
    IseRecord {
        dist_index: i,
        dist_name: format!("law-{i}"),
        estimator: j,
        n,
        replicate: k,
        bandwidth: j.kernel().map(|_| 0.1),
        ise: Some(ise),
        flag: FLAG_OK.into(),
        wall_time: Duration::ZERO,
    }
}

#[test]
fn edf_cardinality() {
    let cfg = SimulationConfig { distributions: vec![3], sizes: vec![50], replicates: 2, estimators: vec![EstimatorKind::EDF], ..Default::default() };
    let recs = run_experiment(&cfg).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(|r| r.bandwidth.is_none() && r.ise.unwrap() >= 0.0 && r.flag == FLAG_OK));
    assert_eq!(recs.iter().map(|r| r.replicate).collect::<Vec<_>>(), [0, 1]);
}

#[test]
fn byte_identical_across_thread_counts() {
    let ests = vec![EstimatorKind::Gam, EstimatorKind::IGau, EstimatorKind::W, EstimatorKind::OK, EstimatorKind::EDF];
    let dir = scratch("threads");
    let mut bytes = Vec::new();
    for threads in [1, 2, 1] {
        let cfg = SimulationConfig { threads: Some(threads), ..small(ests.clone(), 3) };
        let path = dir.join(format!("records-{}.csv", bytes.len()));
        write_records(&path, &run_experiment(&cfg).unwrap()).unwrap();
        bytes.push(fs::read(&path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    assert_eq!(bytes[0], bytes[2]);
    let other = run_experiment(&SimulationConfig { seed: 7, ..small(ests, 3) }).unwrap();
    let path = dir.join("other.csv");
    write_records(&path, &other).unwrap();
    assert_ne!(fs::read(&path).unwrap(), bytes[0]);
}

#[test]
fn estimators_share_the_sample() {
    // every estimator sees the replicate's one sample, whatever else runs alongside
    let alone = run_experiment(&small(vec![EstimatorKind::EDF], 2)).unwrap();
    let mixed = run_experiment(&small(vec![EstimatorKind::LN, EstimatorKind::EDF], 2)).unwrap();
    let edf: Vec<_> = mixed.into_iter().filter(|r| r.estimator == EstimatorKind::EDF).collect();
    assert_eq!(alone, edf);
}

#[test]
fn records_round_trip() {
    let recs = run_experiment(&small(vec![EstimatorKind::LN, EstimatorKind::BS, EstimatorKind::EDF], 2)).unwrap();
    let dir = scratch("records");
    let path = dir.join("records.csv");
    write_records(&path, &recs).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "dist_index,dist_name,estimator_index,estimator_name,n,replicate,bandwidth,ise,flag");
    assert_eq!(RECORDS_HEADER.join(","), text.lines().next().unwrap());
    assert_eq!(read_records(&path).unwrap(), recs);

    let mut flagged = recs.clone();
    flagged[1].ise = None;
    flagged[1].bandwidth = None;
    flagged[1].flag = "fail-estimation".into();
    write_records(&path, &flagged).unwrap();
    assert_eq!(read_records(&path).unwrap(), flagged);
}

#[test]
fn summary_round_trip() {
    let recs = run_experiment(&small(vec![EstimatorKind::Gam, EstimatorKind::EDF], 3)).unwrap();
    let table = summarize(&recs).unwrap();
    let dir = scratch("summary");
    let path = emit(&table, Format::Csv, &dir).unwrap();
    assert_eq!(path, dir.join("summary.csv"));
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "dist_index,estimator_index,n,mean_ise,std_ise,diff_to_best,is_best");
    assert_eq!(SUMMARY_HEADER.join(","), text.lines().next().unwrap());
    assert_eq!(read_summary(&path).unwrap(), table.rows);
}

#[test]
fn toy_mean_and_std() {
    let recs: Vec<_> = [1.0e-3, 2.0e-3, 4.0e-3].iter().enumerate().map(|(k, &v)| rec(1, EstimatorKind::Gam, 10, k, v)).collect();
    let t = summarize(&recs).unwrap();
    let r = t.row(1, EstimatorKind::Gam, 10).unwrap();
    let mean = 7.0e-3 / 3.0;
    assert!((r.mean_ise - mean).abs() < 1e-18);
    // deviations -4/3, -1/3, 5/3 (x 1e-3): sum of squares 42/9, over m - 1 = 2
    assert!((r.std_ise - (7.0f64 / 3.0).sqrt() * 1e-3).abs() < 1e-17);
    assert_eq!(r.diff_to_best, 0.0);
    assert!(r.is_best);
}

#[test]
fn single_estimator_has_zero_differences() {
    let t = summarize(&run_experiment(&small(vec![EstimatorKind::IGam], 2)).unwrap()).unwrap();
    assert!(t.rows.iter().all(|r| r.diff_to_best == 0.0 && r.is_best));
    assert!(t.totals.values().all(|&v| v == 0.0));
}

#[test]
fn totals_and_row_best_recomputed() {
    let ests = vec![EstimatorKind::Gam, EstimatorKind::LN, EstimatorKind::BS, EstimatorKind::RIG, EstimatorKind::EDF];
    let cfg = SimulationConfig { distributions: vec![1, 2, 6], sizes: vec![40, 80], ..small(ests, 3) };
    let recs = run_experiment(&cfg).unwrap();
    let t = summarize(&recs).unwrap();

    // independent pass straight from the records
    let mut sums: BTreeMap<(usize, usize, usize), Vec<f64>> = BTreeMap::new();
    for r in &recs {
        sums.entry((r.dist_index, r.estimator.index(), r.n)).or_default().push(r.ise.unwrap());
    }
    let means: BTreeMap<_, f64> = sums.iter().map(|(k, v)| (*k, v.iter().sum::<f64>() / v.len() as f64)).collect();
    let mut totals: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &i in &cfg.distributions {
        for &n in &cfg.sizes {
            let row: Vec<(usize, f64)> = means.iter().filter(|(k, _)| k.0 == i && k.2 == n).map(|(k, m)| (k.1, *m)).collect();
            let (argmin, min) = row.iter().copied().fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            for (j, m) in row {
                *totals.entry((j, n)).or_default() += m - min;
                let r = t.rows.iter().find(|r| (r.dist_index, r.estimator_index, r.n) == (i, j, n)).unwrap();
                assert!((r.mean_ise - m).abs() <= 1e-15 * m);
                assert_eq!(r.is_best, j == argmin, "row ({i}, {n})");
                assert!(r.diff_to_best >= 0.0);
            }
        }
    }
    for (k, v) in &totals {
        assert!((t.totals[k] - v).abs() < 1e-15, "{k:?}");
        let col: f64 = t.rows.iter().filter(|r| (r.estimator_index, r.n) == *k).map(|r| r.diff_to_best).sum();
        assert!((t.totals[k] - col).abs() < 1e-15);
    }
    for &i in &cfg.distributions {
        for &n in &cfg.sizes {
            assert!(t.rows.iter().filter(|r| r.dist_index == i && r.n == n && r.is_best).count() >= 1);
        }
    }
}

#[test]
fn ties_mark_every_best() {
    let recs = vec![rec(1, EstimatorKind::LN, 5, 0, 2e-3), rec(1, EstimatorKind::BS, 5, 0, 2e-3), rec(1, EstimatorKind::EDF, 5, 0, 3e-3)];
    let t = summarize(&recs).unwrap();
    assert!(t.row(1, EstimatorKind::LN, 5).unwrap().is_best);
    assert!(t.row(1, EstimatorKind::BS, 5).unwrap().is_best);
    assert!(!t.row(1, EstimatorKind::EDF, 5).unwrap().is_best);
}

#[test]
fn gaps_are_reported() {
    let mut recs: Vec<_> = (0..3).flat_map(|k| [rec(1, EstimatorKind::Gam, 10, k, 1e-3), rec(1, EstimatorKind::EDF, 10, k, 2e-3)]).collect();
    recs.retain(|r| !(r.estimator == EstimatorKind::Gam && r.replicate == 1));
    match summarize(&recs) {
        Err(Error::Incomplete(m)) => assert!(m.contains("missing replicates 1"), "{m}"),
        other => panic!("{other:?}"),
    }
    recs.push(rec(2, EstimatorKind::EDF, 10, 0, 1e-3));
    let Err(Error::Incomplete(m)) = summarize(&recs) else { panic!() };
    assert!(m.contains("(dist 2, estimator 1, n 10): no records"), "{m}");

    let dup = vec![rec(1, EstimatorKind::Gam, 10, 0, 1e-3), rec(1, EstimatorKind::Gam, 10, 0, 1e-3)];
    assert!(matches!(summarize(&dup), Err(Error::Incomplete(_))));
    assert!(matches!(summarize(&[]), Err(Error::Incomplete(_))));
}

#[test]
fn flagged_records_are_excluded_and_counted() {
    let mut recs: Vec<_> = (0..3).map(|k| rec(1, EstimatorKind::Gam, 10, k, (k + 1) as f64 * 1e-3)).collect();
    recs[2].flag = "fail-quadrature".into();
    recs[0].flag = FLAG_GRID_EDGE.into();
    let t = summarize(&recs).unwrap();
    assert_eq!(t.counts[&(1, 1, 10)], CellCount { used: 2, flagged: 1 });
    assert!((t.rows[0].mean_ise - 1.5e-3).abs() < 1e-18);
    for r in &mut recs {
        r.flag = "fail-selection".into();
    }
    let Err(Error::Incomplete(m)) = summarize(&recs) else { panic!() };
    assert!(m.contains("every replicate flagged"));
}

#[test]
fn emit_empty_writes_nothing() {
    let dir = scratch("empty").join("out");
    let empty = SummaryTable { rows: vec![], totals: BTreeMap::new(), counts: BTreeMap::new(), dist_names: BTreeMap::new() };
    assert!(emit(&empty, Format::Csv, &dir).is_err());
    assert!(emit(&empty, Format::Markdown, &dir).is_err());
    assert!(!dir.exists());
}

#[test]
fn markdown_scaling_and_layout() {
    let recs = vec![rec(1, EstimatorKind::Gam, 256, 0, 1.574e-3), rec(1, EstimatorKind::Gam, 256, 1, 1.574e-3), rec(1, EstimatorKind::EDF, 256, 0, 2e-3), rec(1, EstimatorKind::EDF, 256, 1, 2e-3)];
    let t = summarize(&recs).unwrap();
    let dir = scratch("md");
    let path = emit(&t, Format::Markdown, &dir).unwrap();
    let md = fs::read_to_string(path).unwrap();
    assert!(md.contains("**15.74 (0.00)**"), "{md}");
    assert!(md.contains("20.00 (0.00)"));
    assert!(md.contains("| 4.26 |"), "{md}");
    assert!(md.contains("| best |") && md.contains("| excluded |"));
}

#[test]
fn config_errors() {
    assert!(matches!(SimulationConfig::parse("replicates = 0"), Err(Error::Config(_))));
    assert!(matches!(SimulationConfig::parse("sizes = 10, -3"), Err(Error::Config(_))));
    assert!(matches!(SimulationConfig::parse("estimators = Gam, XYZ"), Err(Error::Config(_))));
    assert!(matches!(SimulationConfig::parse("distributions = 9"), Err(Error::Config(_))));
    assert!(matches!(SimulationConfig::parse("format = pdf"), Err(Error::Config(_))));
    let Err(Error::Config(m)) = SimulationConfig::parse("seed = 1\n# note\nbogus = 3") else { panic!() };
    assert!(m.contains("line 3") && m.contains("bogus"), "{m}");
    let c = SimulationConfig::parse("seed = 9 # trailing\nestimators = EDF, 1\nsizes = 100").unwrap();
    assert_eq!((c.seed, c.sizes.clone()), (9, vec![100]));
    assert_eq!(c.normalized().estimators, [EstimatorKind::Gam, EstimatorKind::EDF]);
    assert_eq!(SimulationConfig::default().replicates, 1000);
}

#[test]
fn expected_edf_matches_exponential_identity() {
    // Exp(1): int F(1 - F) = 1/2
    let law = akcdf::distributions::TargetDistribution::gamma(1.0, 1.0).unwrap();
    let v = expected_edf_ise(&law, 200, &Default::default()).unwrap();
    assert!((v - 0.5 / 200.0).abs() < 1e-12);
}
