//! Distribution-free estimators, Gaussian simulation and the repeated
//! holdout cross-validation harness.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{estimate_gaussian_with, project, Breakpoints, Dataset, Norm, ProjectedGaussian, RiskSpec};
use crate::error::{Error, Result};
use crate::logistic::fit_lr;
use crate::org::{fit_org, PenaltyConfig, SolverConfig};
use crate::risk::solve_breakpoints;
use crate::special::ToleranceConfig;

/// Observed special-class rate per interval. `rates[i]` is `None` when the
/// interval holds no observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRates {
    pub rates: Vec<Option<f64>>,
    pub counts: Vec<usize>,
    pub positives: Vec<usize>,
}

impl IntervalRates {
    fn from_counts(counts: Vec<usize>, positives: Vec<usize>) -> Self {
        let rates = counts
            .iter()
            .zip(&positives)
            .map(|(&n, &k)| (n > 0).then(|| k as f64 / n as f64))
            .collect();
        Self {
            rates,
            counts,
            positives,
        }
    }

    /// `(||rate - r||, number of empty groups)` over the occupied groups.
    pub fn deviation(&self, r: &[f64], norm: Norm) -> (f64, usize) {
        let diffs: Vec<f64> = self
            .rates
            .iter()
            .zip(r)
            .filter_map(|(rate, t)| rate.map(|v| v - t))
            .collect();
        (norm.apply(&diffs), self.rates.len() - diffs.len())
    }
}

/// Per-interval special-class fractions over right-closed intervals.
pub fn empirical_interval_risk(scores: &[f64], labels: &[u8], tau: &Breakpoints) -> Result<IntervalRates> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite score {s}")));
    }
    let t = tau.groups();
    let mut counts = vec![0usize; t];
    let mut positives = vec![0usize; t];
    for (&s, &y) in scores.iter().zip(labels) {
        let g = tau.group_of(s) - 1;
        counts[g] += 1;
        positives[g] += usize::from(y == 1);
    }
    Ok(IntervalRates::from_counts(counts, positives))
}

/// `|{j : score_j <= t, y_j = k}| / N_k`.
pub fn empirical_class_cdf(scores: &[f64], labels: &[u8], k: u8, t: f64) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    let (n, below) = scores
        .iter()
        .zip(labels)
        .filter(|(_, &y)| y == k)
        .fold((0usize, 0usize), |(n, b), (&s, _)| (n + 1, b + usize::from(s <= t)));
    if n == 0 {
        return Err(Error::ClassAbsent(k));
    }
    Ok(below as f64 / n as f64)
}

/// Draws `n` labelled scores: `Y ~ Bernoulli(p)`, then the class Gaussian.
pub fn simulate_gaussian_pair(g: &ProjectedGaussian, n: usize, seed: u64) -> (Vec<f64>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let y = u8::from(rng.random::<f64>() < g.p);
        let z: f64 = StandardNormal.sample(&mut rng);
        let mu = if y == 1 { g.mu1 } else { g.mu0 };
        scores.push(mu + g.sigma * z);
        labels.push(y);
    }
    (scores, labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMethod {
    Lr,
    Org,
}

impl std::str::FromStr for CvMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lr" => Ok(CvMethod::Lr),
            "org" => Ok(CvMethod::Org),
            other => Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected lr or org)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub holdout: f64,
    pub repeats: usize,
    pub seed: u64,
    /// Resampling attempts for a split whose training part lacks a class.
    pub max_retries: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            holdout: 0.1,
            repeats: 500,
            seed: 0,
            max_retries: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub repeat: usize,
    /// `None` on success.
    pub failure: Option<String>,
    pub tau: Option<Vec<f64>>,
    pub rates: Vec<Option<f64>>,
    pub counts: Vec<usize>,
    pub positives: Vec<usize>,
    pub ird_squared: Option<f64>,
    pub ird_euclidean: Option<f64>,
    pub empty_groups: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Summary {
    fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Some(Self {
            mean,
            std: var.sqrt(),
            n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub method: CvMethod,
    pub r: Vec<f64>,
    pub config: CvConfig,
    pub records: Vec<RepeatRecord>,
    /// Test observations pooled over successful repeats.
    pub pooled: IntervalRates,
    pub pooled_ird_squared: f64,
    pub pooled_ird_euclidean: f64,
    pub ird_squared: Option<Summary>,
    pub ird_euclidean: Option<Summary>,
    pub failed: usize,
    pub empty_groups: usize,
}

/// Row indices in an order that depends only on row contents.
fn canonical_order(data: &Dataset) -> Vec<usize> {
    let x = data.features();
    let y = data.labels();
    let mut idx: Vec<usize> = (0..data.n_rows()).collect();
    idx.sort_by(|&a, &b| {
        y[a].cmp(&y[b]).then_with(|| {
            x.row(a)
                .iter()
                .zip(x.row(b).iter())
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    idx
}

fn run_repeat(
    data: &Dataset,
    order: &[usize],
    spec: &RiskSpec,
    method: CvMethod,
    pen: &PenaltyConfig,
    solver: &SolverConfig,
    cfg: &CvConfig,
    repeat: usize,
) -> RepeatRecord {
    let failed = |reason: String| RepeatRecord {
        repeat,
        failure: Some(reason),
        tau: None,
        rates: vec![None; spec.groups()],
        counts: vec![0; spec.groups()],
        positives: vec![0; spec.groups()],
        ird_squared: None,
        ird_euclidean: None,
        empty_groups: 0,
    };
    let (train, test_idx) = match split_indices(data, order, cfg, repeat) {
        Ok(v) => v,
        Err(e) => return failed(e.to_string()),
    };

    let fitted = match method {
        CvMethod::Lr => (|| {
            let lr = fit_lr(&train, &ToleranceConfig::new(1e-9, 0.0, 200)?)?;
            let est = estimate_gaussian_with(&train, solver.covariance)?;
            let fit = solve_breakpoints(&project(&est, &lr.beta)?, spec, &solver.inner)?;
            if fit.breakpoints.min_gap().is_some_and(|g| g < solver.min_gap) {
                return Err(Error::InvalidInput("degenerate breakpoints".into()));
            }
            Ok((lr.beta, fit.breakpoints))
        })(),
        CvMethod::Org => (|| {
            let fit = fit_org(&train, spec, pen, solver)?;
            if !fit.best.feasible {
                return Err(Error::NoFeasibleSolution {
                    starts: solver.n_starts,
                    best_ird: fit.best.assessment.ird,
                });
            }
            if fit.best.degenerate {
                return Err(Error::InvalidInput("degenerate breakpoints".into()));
            }
            Ok((fit.best.beta, fit.best.tau))
        })(),
    };
    let (beta, tau) = match fitted {
        Ok(v) => v,
        Err(e) => return failed(e.to_string()),
    };

    let x = data.features();
    let scores: Vec<f64> = test_idx
        .iter()
        .map(|&i| x.row(i).iter().zip(&beta).map(|(a, b)| a * b).sum())
        .collect();
    let labels: Vec<u8> = test_idx.iter().map(|&i| data.labels()[i]).collect();
    let rates = match empirical_interval_risk(&scores, &labels, &tau) {
        Ok(r) => r,
        Err(e) => return failed(e.to_string()),
    };
    let (sq, empty) = rates.deviation(&spec.r, Norm::SquaredEuclidean);
    RepeatRecord {
        repeat,
        failure: None,
        tau: Some(tau.tau().to_vec()),
        ird_squared: Some(sq),
        ird_euclidean: Some(sq.sqrt()),
        empty_groups: empty,
        rates: rates.rates,
        counts: rates.counts,
        positives: rates.positives,
    }
}

/// Training set and test row indices of one repeat.
fn split_indices(data: &Dataset, order: &[usize], cfg: &CvConfig, repeat: usize) -> Result<(Dataset, Vec<usize>)> {
    let n = order.len();
    let n_test = ((cfg.holdout * n as f64).round() as usize).clamp(1, n - 1);
    for attempt in 0..=cfg.max_retries {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(((attempt as u64) << 32) | repeat as u64);
        let mut perm = order.to_vec();
        perm.shuffle(&mut rng);
        let (test, train) = perm.split_at(n_test);
        let n1 = train.iter().filter(|&&i| data.labels()[i] == 1).count();
        if n1 < 2 || train.len() - n1 < 2 {
            continue;
        }
        return Ok((data.subset(train)?, test.to_vec()));
    }
    Err(Error::InvalidInput(format!(
        "no split with both classes in training after {} attempts",
        cfg.max_retries + 1
    )))
}

/// Repeated random holdout: fit on each training split, partition the
/// held-out scores with the fitted breakpoints and compare observed group
/// rates with the targets. Headline rates pool test observations over all
/// successful repeats; per-repeat deviations skip empty groups.
pub fn cross_validate(
    data: &Dataset,
    spec: &RiskSpec,
    method: CvMethod,
    pen: &PenaltyConfig,
    solver: &SolverConfig,
    cfg: &CvConfig,
) -> Result<CvReport> {
    spec.validate()?;
    if !(cfg.holdout > 0.0 && cfg.holdout < 1.0) {
        return Err(Error::InvalidInput(format!(
            "holdout must lie in (0, 1), got {}",
            cfg.holdout
        )));
    }
    if cfg.repeats == 0 {
        return Err(Error::InvalidInput("repeats must be at least 1".into()));
    }
    if data.n_rows() < 3 {
        return Err(Error::InvalidInput("cross-validation needs at least 3 rows".into()));
    }
    let order = canonical_order(data);
    let records: Vec<RepeatRecord> = (0..cfg.repeats)
        .into_par_iter()
        .map(|k| run_repeat(data, &order, spec, method, pen, solver, cfg, k))
        .collect();

    let t = spec.groups();
    let mut counts = vec![0usize; t];
    let mut positives = vec![0usize; t];
    let mut sq = Vec::new();
    let mut eu = Vec::new();
    let mut failed = 0;
    let mut empty_groups = 0;
    for rec in &records {
        if rec.failure.is_some() {
            failed += 1;
            continue;
        }
        for i in 0..t {
            counts[i] += rec.counts[i];
            positives[i] += rec.positives[i];
        }
        sq.extend(rec.ird_squared);
        eu.extend(rec.ird_euclidean);
        empty_groups += rec.empty_groups;
    }
    let pooled = IntervalRates::from_counts(counts, positives);
    let (pooled_sq, _) = pooled.deviation(&spec.r, Norm::SquaredEuclidean);
    Ok(CvReport {
        method,
        r: spec.r.clone(),
        config: cfg.clone(),
        pooled_ird_squared: pooled_sq,
        pooled_ird_euclidean: pooled_sq.sqrt(),
        ird_squared: Summary::of(&sq),
        ird_euclidean: Summary::of(&eu),
        pooled,
        records,
        failed,
        empty_groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::{assess, conditional_risk, interval_odds};

    #[test]
    fn toy_rates() {
        let tau = Breakpoints::new(vec![0.0]).unwrap();
        let r = empirical_interval_risk(&[-2.0, -1.0, 1.0, 2.0], &[0, 0, 1, 1], &tau).unwrap();
        assert_eq!(r.rates, vec![Some(0.0), Some(1.0)]);
        let all = empirical_interval_risk(&[-2.0, 0.0, 1.0], &[1, 1, 1], &tau).unwrap();
        assert_eq!(all.rates, vec![Some(1.0), Some(1.0)]);
        // right-closed: 0.0 falls in the first interval
        assert_eq!(all.counts, vec![2, 1]);
        let empty = empirical_interval_risk(&[1.0, 2.0], &[0, 1], &tau).unwrap();
        assert_eq!(empty.rates[0], None);
        assert_eq!(empty.deviation(&[0.1, 0.5], Norm::Euclidean), (0.0, 1));
    }

    #[test]
    fn counts_sum_and_weighted_mean() {
        let g = ProjectedGaussian::new(-0.5, 0.8, 1.1, 0.35).unwrap();
        let (s, y) = simulate_gaussian_pair(&g, 5000, 11);
        let tau = Breakpoints::new(vec![-1.0, 0.0, 0.4, 2.0]).unwrap();
        let r = empirical_interval_risk(&s, &y, &tau).unwrap();
        assert_eq!(r.counts.iter().sum::<usize>(), 5000);
        let weighted: f64 = r
            .rates
            .iter()
            .zip(&r.counts)
            .filter_map(|(rate, &n)| rate.map(|v| v * n as f64))
            .sum::<f64>()
            / 5000.0;
        let overall = y.iter().filter(|&&v| v == 1).count() as f64 / 5000.0;
        assert!((weighted - overall).abs() < 1e-12);
        // a breakpoint below every score leaves everything in the top group
        let low = Breakpoints::new(vec![-1e9]).unwrap();
        let r = empirical_interval_risk(&s, &y, &low).unwrap();
        assert!((r.rates[1].unwrap() - overall).abs() < 1e-15);
    }

    #[test]
    fn class_cdf_examples() {
        let s = [0.5, 1.0, 3.0, -1.0];
        let y = [1, 1, 1, 0];
        assert_eq!(empirical_class_cdf(&s, &y, 1, 0.4).unwrap(), 0.0);
        assert_eq!(empirical_class_cdf(&s, &y, 1, 3.0).unwrap(), 1.0);
        assert_eq!(empirical_class_cdf(&s, &y, 1, 1.0).unwrap(), 2.0 / 3.0);
        assert!(matches!(
            empirical_class_cdf(&s, &[1, 1, 1, 1], 0, 0.0),
            Err(Error::ClassAbsent(0))
        ));
    }

    #[test]
    fn class_cdf_within_band() {
        let g = ProjectedGaussian::new(0.0, 1.0, 2.0, 0.5).unwrap();
        let (s, y) = simulate_gaussian_pair(&g, 20_000, 5);
        for k in [0u8, 1] {
            let mut ks: Vec<f64> = s.iter().zip(&y).filter(|(_, &l)| l == k).map(|(v, _)| *v).collect();
            ks.sort_by(f64::total_cmp);
            let n = ks.len() as f64;
            let mut dist = 0.0f64;
            for (i, &v) in ks.iter().enumerate() {
                let f = g.cdf(k, v);
                dist = dist.max((f - (i + 1) as f64 / n).abs()).max((f - i as f64 / n).abs());
            }
            assert!(dist < 1.63 / n.sqrt(), "class {k}: {dist}");
        }
    }

    #[test]
    fn simulation_moments_and_seed() {
        let g = ProjectedGaussian::new(-1.0, 2.0, 1.5, 0.3).unwrap();
        let n = 40_000;
        let (s, y) = simulate_gaussian_pair(&g, n, 1);
        assert_eq!((s.clone(), y.clone()), simulate_gaussian_pair(&g, n, 1));
        let n1 = y.iter().filter(|&&v| v == 1).count();
        assert!(((n1 as f64 / n as f64) - 0.3).abs() < 3.0 * (0.3f64 * 0.7 / n as f64).sqrt());
        for (k, mu) in [(0u8, -1.0), (1, 2.0)] {
            let v: Vec<f64> = s.iter().zip(&y).filter(|(_, &l)| l == k).map(|(a, _)| *a).collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            assert!((m - mu).abs() < 3.0 * 1.5 / (v.len() as f64).sqrt());
        }
    }

    #[test]
    fn monte_carlo_matches_closed_form() {
        let g = ProjectedGaussian::new(0.2, 1.4, 0.9, 0.4).unwrap();
        let tau = Breakpoints::new(vec![0.0, 0.8, 1.5]).unwrap();
        let closed = conditional_risk(&interval_odds(&g, &tau).unwrap(), g.p);
        let (s, y) = simulate_gaussian_pair(&g, 200_000, 7);
        let emp = empirical_interval_risk(&s, &y, &tau).unwrap();
        for i in 0..4 {
            let r = closed[i];
            let se = (r * (1.0 - r) / emp.counts[i] as f64).sqrt();
            let z = (emp.rates[i].unwrap() - r) / se;
            assert!(z.abs() < 3.0, "interval {i}: z = {z}, {} vs {r}", emp.rates[i].unwrap());
        }
        let spec = RiskSpec::new(closed.clone(), 1e-7, Norm::Euclidean).unwrap();
        assert!(assess(&g, &tau, &spec).unwrap().ird < 1e-15);
    }

    fn toy_data() -> Dataset {
        let g = ProjectedGaussian::new(0.0, 1.5, 1.0, 0.4).unwrap();
        let (s, y) = simulate_gaussian_pair(&g, 300, 9);
        let rows: Vec<Vec<f64>> = s.iter().map(|&v| vec![1.0, v]).collect();
        Dataset::from_rows(&rows, y, vec!["c".into(), "x".into()]).unwrap()
    }

    #[test]
    fn cross_validation_is_reproducible_and_order_free() {
        let data = toy_data();
        let spec = RiskSpec::new(vec![0.1, 0.4, 0.8], 1e-7, Norm::Euclidean).unwrap();
        let cfg = CvConfig {
            repeats: 20,
            seed: 4,
            ..CvConfig::default()
        };
        let solver = SolverConfig::default();
        let pen = PenaltyConfig::default();
        let a = cross_validate(&data, &spec, CvMethod::Lr, &pen, &solver, &cfg).unwrap();
        let b = cross_validate(&data, &spec, CvMethod::Lr, &pen, &solver, &cfg).unwrap();
        assert_eq!(a, b);
        let rev: Vec<usize> = (0..data.n_rows()).rev().collect();
        let c = cross_validate(&data.subset(&rev).unwrap(), &spec, CvMethod::Lr, &pen, &solver, &cfg).unwrap();
        assert_eq!(a.pooled, c.pooled);
        assert_eq!(a.pooled.counts.iter().sum::<usize>(), 30 * (20 - a.failed));
        for rec in &a.records {
            for r in rec.rates.iter().flatten() {
                assert!((0.0..=1.0).contains(r));
            }
        }
    }

    #[test]
    fn holdout_validation() {
        let data = toy_data();
        let spec = RiskSpec::new(vec![0.1, 0.8], 1e-7, Norm::Euclidean).unwrap();
        for h in [0.0, 1.0, -0.1] {
            let cfg = CvConfig {
                holdout: h,
                ..CvConfig::default()
            };
            assert!(cross_validate(
                &data,
                &spec,
                CvMethod::Lr,
                &PenaltyConfig::default(),
                &SolverConfig::default(),
                &cfg
            )
            .is_err());
        }
    }
}
