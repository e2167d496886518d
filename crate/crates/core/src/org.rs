//! The ordinal risk-group (ORG) estimator: maximize the logistic likelihood
//! minus a geometry penalty over coefficients whose score admits breakpoints
//! with interval risk deviation below `epsilon`.
//!
//! The search is a seeded multi-start Nelder-Mead on the merit
//! `l(beta) - gamma * Pen - rho * max(0, IRD - eps)^2` with `rho` escalated
//! across rounds. Inside the merit the deviation is the residual of the last
//! group after sequential matching, which is cheap and zero exactly on the
//! feasible set. Each start ends with a one-dimensional restoration along
//! the gradient of the standardized class separation, since interval risks
//! depend on `beta` only through that separation. Every candidate is then
//! re-verified with [`solve_breakpoints`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    estimate_gaussian_with, project, Breakpoints, CovarianceEstimator, Dataset, GaussianEstimates, RiskSpec,
};
use crate::error::{Error, InfeasibleStep, Result};
use crate::logistic::{fit_lr, log_likelihood, LogisticFit};
use crate::risk::{
    conditional_risk, interval_odds, sequential_breakpoints, solve_breakpoints, RiskAssessment, SequentialOutcome,
};
use crate::special::{find_root_monotone, minimize_simplex_with_steps, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyForm {
    /// `(max interior gap / beta^T (mu1 - mu0) - 1)^2`.
    #[default]
    MaxGapRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub gamma: f64,
    pub form: PenaltyForm,
}

impl PenaltyConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        let c = Self {
            gamma,
            form: PenaltyForm::MaxGapRatio,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            gamma: 10.0,
            form: PenaltyForm::MaxGapRatio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n_starts: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// Smallest acceptable interior gap on the score scale.
    pub min_gap: f64,
    pub covariance: CovarianceEstimator,
    /// Root finding and breakpoint search.
    pub inner: ToleranceConfig,
    /// Simplex search over `beta`; `max_iter` bounds each round.
    pub outer: ToleranceConfig,
    /// Penalty weights, one simplex round each.
    pub rho_schedule: Vec<f64>,
    pub infeasible_surrogate_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_starts: 200,
            seed: 0,
            epsilon: 1e-7,
            min_gap: 1e-4,
            covariance: CovarianceEstimator::Marginal,
            inner: ToleranceConfig {
                abs_tol: 1e-13,
                rel_tol: 0.0,
                max_iter: 300,
            },
            outer: ToleranceConfig {
                abs_tol: 1e-7,
                rel_tol: 1e-9,
                max_iter: 1500,
            },
            rho_schedule: vec![1e3, 1e5, 1e7, 1e9],
            infeasible_surrogate_scale: 1e12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidInput("n_starts must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if !(self.min_gap >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "min_gap must be >= 0, got {}",
                self.min_gap
            )));
        }
        if !(self.infeasible_surrogate_scale > 0.0) {
            return Err(Error::InvalidInput("infeasible_surrogate_scale must be > 0".into()));
        }
        if self.rho_schedule.is_empty() || self.rho_schedule.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidInput(
                "rho_schedule must be non-empty and positive".into(),
            ));
        }
        self.inner.validate()?;
        self.outer.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrgSolution {
    pub beta: Vec<f64>,
    pub tau: Breakpoints,
    pub assessment: RiskAssessment,
    pub log_likelihood: f64,
    pub penalty_value: f64,
    pub objective: f64,
    pub feasible: bool,
    pub degenerate: bool,
    pub start_index: usize,
}

/// Outcome of one start, in start order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub start_index: usize,
    pub objective: f64,
    pub log_likelihood: f64,
    pub ird: f64,
    pub feasible: bool,
    pub degenerate: bool,
    pub evaluations: usize,
    /// Why the start produced no candidate, if it did not.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrgFit {
    pub best: OrgSolution,
    pub starts: Vec<StartSummary>,
    pub lr: LogisticFit,
}

/// Geometry penalty of a partition. Zero with fewer than two breakpoints,
/// where no interior gap exists.
pub fn penalty(beta: &[f64], tau: &Breakpoints, est: &GaussianEstimates) -> Result<f64> {
    let b = DVector::from_column_slice(beta);
    if b.len() != est.mu0.len() {
        return Err(Error::DimensionMismatch {
            expected: est.mu0.len(),
            got: b.len(),
        });
    }
    let sep = b.dot(&(&est.mu1 - &est.mu0));
    if sep == 0.0 {
        return Err(Error::PenaltyUndefined);
    }
    Ok(penalty_from_gaps(&tau.interior_gaps(), sep))
}

fn penalty_from_gaps(gaps: &[f64], sep: f64) -> f64 {
    match gaps.iter().copied().reduce(f64::max) {
        Some(g) => (g / sep - 1.0).powi(2),
        None => 0.0,
    }
}

/// Projects `beta` and fits the deviation-minimizing breakpoints.
pub fn ird_constraint(
    beta: &[f64],
    est: &GaussianEstimates,
    spec: &RiskSpec,
    cfg: &ToleranceConfig,
) -> Result<(RiskAssessment, Breakpoints, SequentialOutcome)> {
    let g = project(est, beta)?;
    let fit = solve_breakpoints(&g, spec, cfg)?;
    Ok((fit.assessment, fit.breakpoints, fit.sequential))
}

/// Shared state of one ORG problem. The search runs in whitened
/// coordinates `beta = beta_lr + L z` with `L L^T` the inverse Fisher
/// information at the logistic fit, where the likelihood is close to
/// `l(beta_lr) - |z|^2 / 2`.
struct Problem<'a> {
    data: &'a Dataset,
    est: GaussianEstimates,
    delta_mu: DVector<f64>,
    origin: DVector<f64>,
    whiten: DMatrix<f64>,
    unwhiten: DMatrix<f64>,
    spec: &'a RiskSpec,
    pen: &'a PenaltyConfig,
    cfg: &'a SolverConfig,
}

enum Inner {
    Matched { tau: Breakpoints, residual: f64 },
    Failed { bound_gap: f64 },
}

impl Problem<'_> {
    fn to_beta(&self, z: &[f64]) -> Vec<f64> {
        (&self.origin + &self.whiten * DVector::from_column_slice(z))
            .as_slice()
            .to_vec()
    }

    fn to_z(&self, beta: &[f64]) -> Vec<f64> {
        (&self.unwhiten * (DVector::from_column_slice(beta) - &self.origin))
            .as_slice()
            .to_vec()
    }

    fn inner(&self, beta: &[f64]) -> Inner {
        let Ok(g) = project(&self.est, beta) else {
            return Inner::Failed { bound_gap: 1.0 };
        };
        if !(g.mu1 > g.mu0) {
            return Inner::Failed {
                bound_gap: 1.0 + g.separation().abs(),
            };
        }
        match sequential_breakpoints(&g, self.spec, &self.cfg.inner) {
            Ok(m) => Inner::Matched {
                residual: m.residual(self.spec),
                tau: m.breakpoints,
            },
            Err(Error::Infeasible(InfeasibleStep { bound, target, .. })) => Inner::Failed {
                bound_gap: (bound - target).abs(),
            },
            Err(_) => Inner::Failed { bound_gap: 1.0 },
        }
    }

    fn merit(&self, beta: &[f64], rho: f64) -> f64 {
        match self.inner(beta) {
            Inner::Matched { tau, residual } => {
                let Ok(ll) = log_likelihood(beta, self.data) else {
                    return f64::NEG_INFINITY;
                };
                let sep = self.separation(beta);
                let pen = penalty_from_gaps(&tau.interior_gaps(), sep);
                let dev = self.spec.norm.apply(&[residual]);
                let viol = (dev - 0.5 * self.cfg.epsilon).max(0.0);
                ll - self.pen.gamma * pen - rho * viol * viol
            }
            Inner::Failed { bound_gap } => -self.cfg.infeasible_surrogate_scale * (1.0 + bound_gap),
        }
    }

    fn separation(&self, beta: &[f64]) -> f64 {
        beta.iter().zip(self.delta_mu.iter()).map(|(b, d)| b * d).sum()
    }

    /// Gradient of `beta^T dmu / sqrt(beta^T Sigma beta)`.
    fn grad_standardized_separation(&self, beta: &[f64]) -> Option<DVector<f64>> {
        let b = DVector::from_column_slice(beta);
        let sb = &self.est.sigma * &b;
        let var = b.dot(&sb);
        if !(var > 0.0) {
            return None;
        }
        let s = var.sqrt();
        let sep = b.dot(&self.delta_mu);
        Some(&self.delta_mu / s - sb * (sep / (s * s * s)))
    }

    /// Moves `z` along the whitened separation gradient, the direction that
    /// changes the separation fastest per unit of likelihood lost, until the
    /// sequential residual vanishes. `None` when no sign change is found.
    fn restore(&self, z: &[f64]) -> Option<Vec<f64>> {
        let beta = self.to_beta(z);
        let dir = self.whiten.transpose() * self.grad_standardized_separation(&beta)?;
        let norm = dir.norm();
        if !(norm > 0.0) {
            return None;
        }
        let dir = dir / norm;
        let at = |t: f64| -> Vec<f64> {
            self.to_beta(&z.iter().zip(dir.iter()).map(|(b, d)| b + t * d).collect::<Vec<_>>())
        };
        let residual = |t: f64| match self.inner(&at(t)) {
            Inner::Matched { residual, .. } => Some(residual),
            Inner::Failed { .. } => None,
        };
        let r0 = residual(0.0)?;
        if r0 == 0.0 {
            return Some(beta);
        }
        // the residual moves with the separation; search both directions
        for sign in [-r0.signum(), r0.signum()] {
            let mut step = 1e-9;
            for _ in 0..60 {
                let t = sign * step;
                match residual(t) {
                    Some(r) if r.signum() != r0.signum() => {
                        let (lo, hi) = if t < 0.0 { (t, 0.0) } else { (0.0, t) };
                        let f = |x: f64| residual(x).unwrap_or(f64::NAN);
                        let root_cfg = ToleranceConfig {
                            abs_tol: 1e-15,
                            rel_tol: 1e-15,
                            max_iter: 200,
                        };
                        let root = match find_root_monotone(f, lo, hi, &root_cfg) {
                            Ok(x) => x,
                            Err(Error::RootNotConverged { lo, hi, .. }) => 0.5 * (lo + hi),
                            Err(_) => return None,
                        };
                        return Some(at(root));
                    }
                    Some(_) => step *= 2.0,
                    None => break,
                }
            }
        }
        None
    }

    fn verify(&self, beta: &[f64], start_index: usize) -> Result<OrgSolution> {
        let (assessment, tau, _) = ird_constraint(beta, &self.est, self.spec, &self.cfg.inner)?;
        let log_likelihood = log_likelihood(beta, self.data)?;
        let penalty_value = penalty(beta, &tau, &self.est)?;
        let objective = log_likelihood - self.pen.gamma * penalty_value;
        let degenerate = tau.min_gap().is_some_and(|g| g < self.cfg.min_gap);
        let feasible = assessment.ird < self.cfg.epsilon;
        Ok(OrgSolution {
            beta: beta.to_vec(),
            tau,
            assessment,
            log_likelihood,
            penalty_value,
            objective,
            feasible,
            degenerate,
            start_index,
        })
    }

    fn run_start(&self, index: usize, x0: Vec<f64>) -> (StartSummary, Option<OrgSolution>) {
        let mut evaluations = 0;
        let steps = vec![1.0; x0.len()];
        let mut z = self.to_z(&x0);
        for &rho in &self.cfg.rho_schedule {
            let res = minimize_simplex_with_steps(|z| -self.merit(&self.to_beta(z), rho), &z, &steps, &self.cfg.outer);
            evaluations += res.evaluations;
            z = res.x;
        }
        let restored = self.restore(&z);

        let mut candidates = vec![x0, self.to_beta(&z)];
        candidates.extend(restored);
        let mut best: Option<OrgSolution> = None;
        let mut failure = None;
        for c in candidates {
            match self.verify(&c, index) {
                Ok(sol) => {
                    if best.as_ref().is_none_or(|b| better(&sol, b)) {
                        best = Some(sol);
                    }
                }
                Err(e) => failure = Some(e.to_string()),
            }
        }
        let summary = match &best {
            Some(s) => StartSummary {
                start_index: index,
                objective: s.objective,
                log_likelihood: s.log_likelihood,
                ird: s.assessment.ird,
                feasible: s.feasible,
                degenerate: s.degenerate,
                evaluations,
                failure: None,
            },
            None => StartSummary {
                start_index: index,
                objective: f64::NEG_INFINITY,
                log_likelihood: f64::NEG_INFINITY,
                ird: f64::INFINITY,
                feasible: false,
                degenerate: false,
                evaluations,
                failure,
            },
        };
        (summary, best)
    }
}

/// Ranking: feasible and non-degenerate first (by objective), then feasible
/// degenerate (by objective), then the rest by deviation.
fn better(a: &OrgSolution, b: &OrgSolution) -> bool {
    let class = |s: &OrgSolution| match (s.feasible, s.degenerate) {
        (true, false) => 0,
        (true, true) => 1,
        _ => 2,
    };
    let (ca, cb) = (class(a), class(b));
    if ca != cb {
        return ca < cb;
    }
    let key = |s: &OrgSolution| if ca == 2 { -s.assessment.ird } else { s.objective };
    let (ka, kb) = (key(a), key(b));
    ka > kb || (ka == kb && a.start_index < b.start_index)
}

/// `(L, L^{-1})` with `L L^T` the inverse Fisher information at `beta`;
/// falls back to per-coordinate scaling when the information is singular.
fn whitening(data: &Dataset, beta: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let p = beta.len();
    let info = -crate::logistic::hessian(beta, data).unwrap_or_else(|_| DMatrix::identity(p, p));
    if let Some(ch) = info.clone().cholesky() {
        let c = ch.l();
        // info = C C^T, so L = C^{-T}
        if let Some(c_inv) = c.clone().try_inverse() {
            return (c_inv.transpose(), c.transpose());
        }
    }
    let d = DVector::from_iterator(p, (0..p).map(|j| 1.0 / info[(j, j)].max(1e-12).sqrt()));
    let w = DMatrix::from_diagonal(&d);
    let w_inv = DMatrix::from_diagonal(&d.map(|v| 1.0 / v));
    (w, w_inv)
}

/// Start points: the logistic fit itself, Gaussian perturbations of it at
/// three relative magnitudes, and random directions at random scales.
pub fn start_points(beta_lr: &[f64], n_starts: usize, seed: u64) -> Vec<Vec<f64>> {
    let norm = beta_lr.iter().map(|b| b * b).sum::<f64>().sqrt().max(1.0);
    (0..n_starts)
        .map(|i| {
            if i == 0 {
                return beta_lr.to_vec();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            match i % 4 {
                k @ 0..=2 => {
                    let m = [0.05, 0.25, 1.0][k];
                    beta_lr
                        .iter()
                        .map(|&b| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            b + m * (b.abs() + 0.1) * z
                        })
                        .collect()
                }
                _ => {
                    let mut dir: Vec<f64> = beta_lr.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
                    let scale = norm * rng.random_range(0.1..2.0);
                    dir.iter_mut().for_each(|v| *v *= scale / n);
                    dir
                }
            }
        })
        .collect()
}

/// Fits the ORG estimator. Infeasible outcomes are returned, flagged, with
/// the smallest deviation found; they are not errors.
pub fn fit_org(data: &Dataset, spec: &RiskSpec, pen: &PenaltyConfig, cfg: &SolverConfig) -> Result<OrgFit> {
    spec.validate()?;
    pen.validate()?;
    cfg.validate()?;
    if spec.r[0] <= 0.0 || spec.r[spec.groups() - 1] >= 1.0 {
        return Err(Error::DegenerateTarget);
    }
    let lr = fit_lr(data, &ToleranceConfig::new(1e-9, 0.0, 200)?)?;
    let est = estimate_gaussian_with(data, cfg.covariance)?;
    let delta_mu = &est.mu1 - &est.mu0;
    let (whiten, unwhiten) = whitening(data, &lr.beta);
    let problem = Problem {
        data,
        est,
        delta_mu,
        origin: DVector::from_column_slice(&lr.beta),
        whiten,
        unwhiten,
        spec,
        pen,
        cfg,
    };
    let starts = start_points(&lr.beta, cfg.n_starts, cfg.seed);
    let results: Vec<(StartSummary, Option<OrgSolution>)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, x0)| problem.run_start(i, x0))
        .collect();

    let mut summaries = Vec::with_capacity(results.len());
    let mut best: Option<OrgSolution> = None;
    for (summary, sol) in results {
        summaries.push(summary);
        if let Some(s) = sol {
            if best.as_ref().is_none_or(|b| better(&s, b)) {
                best = Some(s);
            }
        }
    }
    let best = best.ok_or(Error::NoFeasibleSolution {
        starts: cfg.n_starts,
        best_ird: f64::INFINITY,
    })?;
    log::info!(
        "ORG best start {}: objective {}, IRD {:e}, feasible {}, degenerate {}",
        best.start_index,
        best.objective,
        best.assessment.ird,
        best.feasible,
        best.degenerate
    );
    Ok(OrgFit {
        best,
        starts: summaries,
        lr,
    })
}

/// One row of the symmetric degenerate construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateRow {
    pub t: f64,
    pub tau: [f64; 2],
    pub risks: [f64; 3],
    pub ird: f64,
}

/// Class means `-mu, mu`, common `sigma`, prior 0.5, targets `(0, 0.5, 1)`
/// and breakpoints `(-t, t)`: the middle risk stays 0.5 while the outer
/// risks approach 0 and 1, so the deviation vanishes only as `t` grows
/// without bound.
pub fn degenerate_demo(mu: f64, sigma: f64, t_grid: &[f64]) -> Result<Vec<DegenerateRow>> {
    let g = crate::data::ProjectedGaussian::new(-mu, mu, sigma, 0.5)?;
    t_grid
        .iter()
        .map(|&t| {
            let tau = Breakpoints::new(vec![-t, t])?;
            let r = conditional_risk(&interval_odds(&g, &tau)?, 0.5);
            let dev = [r[0], r[1] - 0.5, r[2] - 1.0];
            Ok(DegenerateRow {
                t,
                tau: [-t, t],
                risks: [r[0], r[1], r[2]],
                ird: dev.iter().map(|d| d * d).sum::<f64>().sqrt(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{estimate_gaussian, Norm};
    use crate::special::std_normal_cdf;

    fn toy() -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200 {
            let y = u8::from(i % 3 == 0);
            let shift = if y == 1 { 0.9 } else { 0.0 };
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            rows.push(vec![1.0, a + shift, b + 0.5 * shift]);
            labels.push(y);
        }
        Dataset::from_rows(&rows, labels, vec!["c".into(), "a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn penalty_examples() {
        let est = GaussianEstimates {
            mu0: DVector::from_vec(vec![0.0, 0.0]),
            mu1: DVector::from_vec(vec![3.0, 0.0]),
            sigma: nalgebra::DMatrix::identity(2, 2),
            p_hat: 0.5,
            estimator: CovarianceEstimator::Pooled,
        };
        let tau = Breakpoints::new(vec![0.0, 3.0]).unwrap();
        assert_eq!(penalty(&[1.0, 0.0], &tau, &est).unwrap(), 0.0);
        let wide = Breakpoints::new(vec![-1.0, 5.0]).unwrap();
        assert_eq!(penalty(&[1.0, 0.0], &wide, &est).unwrap(), 1.0);
        let scaled = Breakpoints::new(vec![-2.5, 12.5]).unwrap();
        assert!((penalty(&[2.5, 0.0], &scaled, &est).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(penalty(&[0.0, 1.0], &tau, &est), Err(Error::PenaltyUndefined)));
        assert_eq!(
            penalty(&[1.0, 0.0], &Breakpoints::new(vec![0.0]).unwrap(), &est).unwrap(),
            0.0
        );
    }

    #[test]
    fn degenerate_demo_values() {
        let rows = degenerate_demo(1.0, 1.0, &[1.0, 2.0, 3.0, 4.0, 8.0]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].ird < w[0].ird);
        }
        for row in &rows {
            assert_eq!(row.risks[1], 0.5);
            assert!((row.risks[0] + row.risks[2] - 1.0).abs() < 1e-15);
            let t = row.t;
            let r1 = 1.0 / (1.0 + std_normal_cdf(-t + 1.0) / std_normal_cdf(-t - 1.0));
            assert!((row.risks[0] - r1).abs() < 1e-15);
        }
        assert!(rows.last().unwrap().ird < 1e-6);
    }

    #[test]
    fn starts_are_seeded() {
        let a = start_points(&[1.0, -2.0, 0.5], 12, 7);
        let b = start_points(&[1.0, -2.0, 0.5], 12, 7);
        let c = start_points(&[1.0, -2.0, 0.5], 12, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a[0], vec![1.0, -2.0, 0.5]);
        // prefixes agree across start counts
        assert_eq!(start_points(&[1.0, -2.0, 0.5], 5, 7)[..], a[..5]);
    }

    /// Targets that some coefficient vector meets exactly.
    fn attainable(data: &Dataset, beta: &[f64], tau: Vec<f64>) -> RiskSpec {
        let est = estimate_gaussian_with(data, CovarianceEstimator::Marginal).unwrap();
        let g = project(&est, beta).unwrap();
        let risks = conditional_risk(&interval_odds(&g, &Breakpoints::new(tau).unwrap()).unwrap(), g.p);
        RiskSpec::new(risks, 1e-7, Norm::Euclidean).unwrap()
    }

    #[test]
    fn feasible_fit_on_toy_data() {
        let data = toy();
        let spec = attainable(&data, &[0.0, 1.0, 0.2], vec![-0.5, 1.0]);
        let cfg = SolverConfig {
            n_starts: 6,
            seed: 3,
            ..SolverConfig::default()
        };
        let fit = fit_org(&data, &spec, &PenaltyConfig::new(1.0).unwrap(), &cfg).unwrap();
        let best = &fit.best;
        assert!(best.feasible, "{best:?}");
        let est = estimate_gaussian_with(&data, cfg.covariance).unwrap();
        let (a, tau, _) = ird_constraint(&best.beta, &est, &spec, &cfg.inner).unwrap();
        assert!(a.ird < 1e-7);
        assert_eq!(tau, best.tau);
        assert!((best.objective - (best.log_likelihood - best.penalty_value)).abs() < 1e-10);
        assert_eq!(fit.starts.len(), 6);

        let again = fit_org(&data, &spec, &PenaltyConfig::new(1.0).unwrap(), &cfg).unwrap();
        assert_eq!(fit.starts, again.starts);
        assert_eq!(fit.best, again.best);
    }

    #[test]
    fn two_groups_have_no_penalty() {
        let data = toy();
        let spec = attainable(&data, &[0.0, 1.0, 0.2], vec![0.3]);
        let cfg = SolverConfig {
            n_starts: 3,
            ..SolverConfig::default()
        };
        let fit = fit_org(&data, &spec, &PenaltyConfig::new(5.0).unwrap(), &cfg).unwrap();
        assert_eq!(fit.best.penalty_value, 0.0);
        assert!(fit.best.feasible);
    }

    #[test]
    fn rejects_degenerate_targets() {
        let data = toy();
        let spec = RiskSpec::new(vec![0.0, 0.5, 0.9], 1e-7, Norm::Euclidean).unwrap();
        assert!(matches!(
            fit_org(&data, &spec, &PenaltyConfig::default(), &SolverConfig::default()),
            Err(Error::DegenerateTarget)
        ));
        let est = estimate_gaussian(&data).unwrap();
        assert!(ird_constraint(&[0.0, 0.0, 0.0], &est, &spec, &ToleranceConfig::default()).is_err());
    }
}
