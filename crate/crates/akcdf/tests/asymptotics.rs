use std::f64::consts::PI;

use akcdf::asymptotics::*;
use akcdf::bandwidth::{b_opt_closed_form, GammaReference, LimitTable};
use akcdf::distributions::{KernelKind, RngStream, TargetDistribution};
use akcdf::estimators::EstimatorKind;
use akcdf::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal};

// Mean and standard error of g(min(X, Y)) over `reps` pairs.
fn mc_min(reps: usize, seed: u64, mut draw: impl FnMut(&mut ChaCha8Rng) -> f64, g: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..reps {
        let m = draw(&mut rng).min(draw(&mut rng));
        let v = g(m);
        s += v;
        s2 += v * v;
    }
    let n = reps as f64;
    let mean = s / n;
    (mean, ((s2 / n - mean * mean) / (n - 1.0)).sqrt())
}

fn gamma_mc(alpha: f64, theta: f64, j: i32, reps: usize, seed: u64) -> (f64, f64) {
    let d = Gamma::new(alpha, theta).unwrap();
    mc_min(reps, seed, |r| d.sample(r), |m| m.powi(j))
}

fn invgamma_mc(alpha: f64, theta: f64, j: i32, reps: usize, seed: u64) -> (f64, f64) {
    let d = Gamma::new(alpha, theta).unwrap();
    mc_min(reps, seed, |r| 1.0 / d.sample(r), |m| m.powi(j))
}

fn lognormal_mc(mu: f64, sigma: f64, a: f64, reps: usize, seed: u64) -> (f64, f64) {
    let d = LogNormal::new(mu, sigma).unwrap();
    mc_min(reps, seed, |r| d.sample(r), |m| m.powf(a))
}

fn within(exact: f64, (mean, se): (f64, f64), k: f64) -> bool {
    (exact - mean).abs() <= k * se
}

#[test]
fn min_moments_match_monte_carlo_examples() {
    let reps = 10_000_000;
    let g = min_moment_gamma(3.7, 0.4, 2).unwrap();
    assert!(within(g, gamma_mc(3.7, 0.4, 2, reps, 1), 3.0), "gamma");
    let ig = min_moment_invgamma(5.0, 1.0, 1).unwrap();
    assert!(within(ig, invgamma_mc(5.0, 1.0, 1, reps, 2), 3.0), "inverse gamma");
    let l1 = min_moment_lognormal(0.0, 1.0, 1.0).unwrap();
    assert!(within(l1, lognormal_mc(0.0, 1.0, 1.0, reps, 3), 3.0), "lognormal a=1");
    let l2 = min_moment_lognormal(0.3, 0.5, 2.0).unwrap();
    assert!(within(l2, lognormal_mc(0.3, 0.5, 2.0, reps, 4), 3.0), "lognormal a=2");
}

#[test]
fn min_moments_match_monte_carlo_sweep() {
    // 120 comparisons share one family-wise budget, hence 4 standard errors
    let reps = 1_000_000;
    let mut pick = ChaCha8Rng::seed_from_u64(99);
    for i in 0..20u64 {
        let alpha = pick.random_range(0.3..8.0);
        let theta = pick.random_range(0.2..3.0);
        let ia = pick.random_range(4.5..12.0);
        let (mu, sigma, a) = (pick.random_range(-1.0..1.0), pick.random_range(0.1..1.2), pick.random_range(0.2..2.5));
        for j in 1..=2 {
            let g = min_moment_gamma(alpha, theta, j as u32).unwrap();
            assert!(within(g, gamma_mc(alpha, theta, j, reps, 100 + i), 4.0), "gamma {alpha} {theta} {j}");
            let ig = min_moment_invgamma(ia, theta, j as u32).unwrap();
            assert!(within(ig, invgamma_mc(ia, theta, j, reps, 200 + i), 4.0), "inverse gamma {ia} {theta} {j}");
        }
        let l = min_moment_lognormal(mu, sigma, a).unwrap();
        assert!(within(l, lognormal_mc(mu, sigma, a, reps, 300 + i), 4.0), "lognormal {mu} {sigma} {a}");
    }
}

#[test]
fn min_moment_domains() {
    assert!(matches!(min_moment_gamma(2.0, 1.0, 0), Err(Error::Domain(_))));
    assert!(matches!(min_moment_invgamma(2.0, 1.0, 1), Err(Error::Domain(_))));
    assert!(matches!(min_moment_lognormal(0.0, 0.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(min_moment_lognormal(0.0, 1.0, -1.0), Err(Error::Domain(_))));
}

#[test]
fn gam_min_expansion_rate() {
    let x = 1.0;
    let mut last = 0.0;
    for &b in &[1e-2, 1e-3, 1e-4] {
        let (first, second) = corollary_min_expansions(KernelKind::Gam, x, b).unwrap();
        let r = (first + (b * x / PI).sqrt() - b) / b.powf(1.5);
        assert!(r.abs() < 1.0, "b = {b}: {r}");
        assert!((second / (b * x) - 1.0).abs() < 5.0 * b.sqrt());
        last = first.abs() + second.abs();
    }
    assert!(last < 1e-2);
}

#[test]
fn igam_min_expansion_closed_form() {
    let x = 1.3;
    for &b in &[0.3, 0.05, 1e-3] {
        let (first, second) = corollary_min_expansions(KernelKind::IGam, x, b).unwrap();
        let ratio = (akcdf::specfun::ln_gamma_ratio(1.0 / b + 1.0, -0.5).unwrap()).exp() / PI.sqrt();
        let r = 1.0 / (1.0 - b) - 1.0;
        assert!((first + x * ratio).abs() < 1e-13);
        assert!((second - (x * x * r - 2.0 * x * x * ratio * r)).abs() < 1e-13);
        assert!((first + x * (b / PI).sqrt()).abs() < 2.0 * b.powf(1.5) * x);
    }
    assert!(corollary_min_expansions(KernelKind::IGam, x, 1.0).is_err());
}

#[test]
fn ln_min_expansion_rate() {
    let x = 2.0;
    let mut prev = f64::INFINITY;
    for &b in &[1e-2, 1e-3, 1e-4, 1e-6] {
        let (first, second) = corollary_min_expansions(KernelKind::LN, x, b).unwrap();
        let err = (second / (b * x * x) - 1.0).abs();
        assert!(err < prev);
        prev = err;
        assert!((first + x * (b / PI).sqrt() - b * x / 2.0).abs() < 3.0 * b.powf(1.5) * x);
    }
    assert!(prev < 1e-2);
    assert!(matches!(corollary_min_expansions(KernelKind::W, x, 0.1), Err(Error::Unsupported(_))));
}

fn truth() -> TargetDistribution {
    TargetDistribution::gamma(3.0, 1.0).unwrap()
}

#[test]
fn bias_expansion_rates() {
    let d = truth();
    let x = 1.5;
    let cdf = d.cdf(x).unwrap();
    for kind in [KernelKind::Gam, KernelKind::IGam, KernelKind::LN, KernelKind::IGau, KernelKind::RIG, KernelKind::BS] {
        let lead = leading_bias(kind, x, d.pdf(x).unwrap(), d.pdf_derivative(x).unwrap()).unwrap();
        let errs: Vec<f64> = [0.05, 0.02, 0.01, 0.001]
            .iter()
            .map(|&b| {
                let (m1, _) = kernel_moments(kind, &d, x, b).unwrap();
                ((m1 - cdf) / b - lead).abs()
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{kind:?}: {errs:?}");
        assert!(errs[3] < 0.05 * lead.abs(), "{kind:?}: {errs:?} lead {lead}");
    }
}

#[test]
fn variance_expansion_rates() {
    let d = truth();
    let x = 1.5;
    let cdf = d.cdf(x).unwrap();
    let f = d.pdf(x).unwrap();
    let c = Some(2.0 * x / PI.sqrt());
    for kind in [KernelKind::Gam, KernelKind::IGam, KernelKind::LN, KernelKind::IGau, KernelKind::RIG, KernelKind::BS] {
        let lead = variance_correction(kind, x, f, c).unwrap();
        let errs: Vec<f64> = [0.05, 0.02, 0.01, 0.001]
            .iter()
            .map(|&b| {
                let (m1, m2) = kernel_moments(kind, &d, x, b).unwrap();
                let nvar = m2 - m1 * m1;
                ((nvar - cdf * (1.0 - cdf)) / -b.sqrt() - lead).abs()
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{kind:?}: {errs:?}");
        assert!(errs[3] < 0.1 * lead, "{kind:?}: {errs:?} lead {lead}");
    }
}

#[test]
fn mse_recomposition() {
    let e1 = (-1.0f64).exp();
    let (cdf, f, fp) = (1.0 - e1, e1, -e1);
    let (n, b) = (256, 0.05);
    let v = asymptotic_mse(KernelKind::Gam, 1.0, cdf, f, fp, n, b, None).unwrap();
    let by_hand = cdf * (1.0 - cdf) / 256.0 - b.sqrt() * f / PI.sqrt() / 256.0 + (b * (f + 0.5 * fp)).powi(2);
    assert!((v - by_hand).abs() < 1e-17);
    let t = ExpansionTerms::new(KernelKind::LN, 0.7, 0.4, 0.5, -0.3, None).unwrap();
    assert_eq!(t.mse(100, 0.02).unwrap(), t.variance(100, 0.02) + t.squared_bias(0.02));
    assert_eq!(t.mse(100, 0.0).unwrap(), 0.24 / 100.0);
    assert_eq!(asymptotic_mse(KernelKind::IGam, 2.0, 1.0, 0.3, 0.1, 50, 0.0, None).unwrap(), 0.0);
    assert_eq!(asymptotic_mse(KernelKind::IGam, 2.0, 0.0, 0.3, 0.1, 50, 0.0, None).unwrap(), 0.0);
    assert!(asymptotic_mse(KernelKind::IGau, 2.0, 0.5, 0.3, 0.1, 50, 0.1, None).is_err());
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut c: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    while c - a > 1e-14 * c {
        let (x1, x2) = (c - r * (c - a), a + r * (c - a));
        if f(x1) <= f(x2) {
            c = x2;
        } else {
            a = x1;
        }
    }
    0.5 * (a + c)
}

#[test]
fn mise_minimiser_is_the_plugin_rule() {
    let r = GammaReference::new(2.0, 1.5).unwrap();
    let d = r.density();
    for kind in [KernelKind::Gam, KernelKind::IGam, KernelKind::LN] {
        let n = 500;
        let closed = b_opt_closed_form(kind, &r, n).unwrap();
        let found = golden(|b| mise_excess(kind, &d, n, b, None).unwrap(), closed / 10.0, closed * 10.0);
        let full = asymptotic_mise(kind, &d, n, found, None).unwrap() - asymptotic_mise(kind, &d, n, 0.0, None).unwrap();
        assert!((full - mise_excess(kind, &d, n, found, None).unwrap()).abs() < 1e-15);
        // a value-based search cannot locate a quadratic minimum closer than about sqrt(eps)
        assert!((found / closed - 1.0).abs() < 2e-8, "{kind:?}");
    }
}

#[test]
fn mise_at_optimum_matches_displayed_expansion() {
    let r = GammaReference::new(2.0, 1.5).unwrap();
    let d = r.density();
    let n = 1_000_000;
    for kind in [KernelKind::Gam, KernelKind::IGam, KernelKind::LN] {
        let b = b_opt_closed_form(kind, &r, n).unwrap();
        let v = asymptotic_mise(kind, &d, n, b, None).unwrap();
        let e = optimal_mise(kind, &d, n, None).unwrap();
        assert!((v - e).abs() < 1e-6 * (n as f64).powf(-4.0 / 3.0), "{kind:?}");
    }
    let sur = LimitTable::surrogate();
    let a = asymptotic_mise(KernelKind::IGau, &d, 300, 0.01, Some(&sur)).unwrap();
    let b = asymptotic_mise(KernelKind::IGam, &d, 300, 0.01, None).unwrap();
    assert!((a - b).abs() < 1e-15);
}

#[test]
fn mise_limits_and_preconditions() {
    let e = TargetDistribution::gamma(1.0, 1.0).unwrap();
    assert!((asymptotic_mise(KernelKind::Gam, &e, 40, 0.0, None).unwrap() - 0.5 / 40.0).abs() < 1e-14);
    let spiky = TargetDistribution::gamma(0.4, 1.0).unwrap();
    assert!(matches!(asymptotic_mise(KernelKind::Gam, &spiky, 40, 0.1, None), Err(Error::Domain(_))));
    assert!(matches!(asymptotic_mise(KernelKind::W, &e, 40, 0.1, None), Err(Error::Unsupported(_))));
}

#[test]
fn normality_with_vanishing_bias() {
    let d = TargetDistribution::gamma(1.0, 1.0).unwrap();
    let n = 10_000;
    let b = (n as f64).powf(-0.6);
    let gam = normality_check(EstimatorKind::Gam, &d, 1.0, n, b, 2000, &mut RngStream::new(31, 0)).unwrap();
    assert!(gam.p_value > 0.01, "{gam:?}");
    let edf = normality_check(EstimatorKind::EDF, &d, 1.0, n, b, 2000, &mut RngStream::new(32, 0)).unwrap();
    assert!(edf.p_value > 0.01, "{edf:?}");
}

#[test]
fn normality_bias_shift() {
    let d = TargetDistribution::gamma(1.0, 1.0).unwrap();
    let n = 10_000;
    let b = 1.0 / (n as f64).sqrt();
    let rep = normality_check(EstimatorKind::Gam, &d, 1.0, n, b, 2000, &mut RngStream::new(33, 0)).unwrap();
    let e1 = (-1.0f64).exp();
    assert!((rep.predicted_shift.unwrap() - 0.5 * e1).abs() < 1e-15);
    assert!(rep.shift_within(3.0), "{rep:?}");
}

#[test]
fn normality_precondition() {
    let d = TargetDistribution::generalized_pareto(0.4, 1.0, 2.0).unwrap();
    assert!(matches!(normality_check(EstimatorKind::EDF, &d, 1.0, 100, 0.1, 10, &mut RngStream::new(0, 0)), Err(Error::Domain(_))));
}
