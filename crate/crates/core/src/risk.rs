//! Interval odds, interval risks and the interval risk deviation (IRD) of a
//! score partitioned by breakpoints, together with the breakpoint solvers,
//! the feasibility bounds on each boundary, the likelihood-ratio diagnostics
//! and the translation between interval risks and left-ray risks.
//!
//! All score distributions here are the equal-variance Gaussian pair of a
//! [`ProjectedGaussian`]; its likelihood ratio is strictly increasing
//! whenever `mu1 > mu0`, which makes every interval risk strictly increasing
//! in its right endpoint and the zero-deviation breakpoints unique.

use serde::{Deserialize, Serialize};

use crate::data::{Breakpoints, ProjectedGaussian, RiskSpec};
use crate::error::{BoundSide, Error, InfeasibleStep, Result};
use crate::special::{find_root_monotone, minimize_simplex_with_steps, std_normal_interval, ToleranceConfig};

/// Smallest class-0 interval mass accepted as a denominator.
pub const MIN_INTERVAL_MASS: f64 = 1e-300;

/// Half-width, in score standard deviations, of the window searched for
/// breakpoints. Normal tails at 35 sigma are still representable.
const SEARCH_HALF_WIDTH: f64 = 35.0;

/// Actual interval risks of a partition and their deviation from the targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskAssessment {
    /// `R_i`, one per interval.
    pub risks: Vec<f64>,
    /// Interval odds `nu_i`.
    pub odds: Vec<f64>,
    pub ird: f64,
    pub feasible: bool,
}

/// Interval odds `nu_i = P(score in I_i | Y=1) / P(score in I_i | Y=0)`.
pub fn interval_odds(g: &ProjectedGaussian, tau: &Breakpoints) -> Result<Vec<f64>> {
    (1..=tau.groups())
        .map(|i| {
            let (lo, hi) = tau.interval(i);
            let (m0, m1) = class_masses(g, lo, hi);
            if m0 < MIN_INTERVAL_MASS {
                return Err(Error::VanishingIntervalMass { interval: i, mass: m0 });
            }
            Ok(m1 / m0)
        })
        .collect()
}

/// `(P(I | Y=0), P(I | Y=1))` for `I = (lo, hi]`.
fn class_masses(g: &ProjectedGaussian, lo: f64, hi: f64) -> (f64, f64) {
    let z = |x: f64, mu: f64| (x - mu) / g.sigma;
    (
        std_normal_interval(z(lo, g.mu0), z(hi, g.mu0)),
        std_normal_interval(z(lo, g.mu1), z(hi, g.mu1)),
    )
}

/// Converts interval odds to interval risks with prior `p`.
pub fn conditional_risk(nu: &[f64], p: f64) -> Vec<f64> {
    nu.iter().map(|&v| risk_from_odds(v, p)).collect()
}

#[inline]
fn risk_from_odds(nu: f64, p: f64) -> f64 {
    if nu.is_infinite() {
        1.0
    } else {
        p * nu / (p * nu + (1.0 - p))
    }
}

/// Risk of the single interval `(lo, hi]`; the shrinking-interval limit (the
/// pointwise posterior) when `hi == lo`.
pub fn interval_risk(g: &ProjectedGaussian, lo: f64, hi: f64) -> Result<f64> {
    if hi < lo {
        return Err(Error::InvalidInput(format!("empty interval ({lo}, {hi}]")));
    }
    if hi == lo {
        return Ok(g.posterior(lo));
    }
    let (m0, m1) = class_masses(g, lo, hi);
    if m0 < MIN_INTERVAL_MASS {
        return Err(Error::VanishingIntervalMass { interval: 0, mass: m0 });
    }
    Ok(risk_from_odds(m1 / m0, g.p))
}

/// Interval risk deviation `||R - r||` under the spec's norm.
pub fn ird(risks: &[f64], spec: &RiskSpec) -> Result<f64> {
    if risks.len() != spec.r.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.r.len(),
            got: risks.len(),
        });
    }
    let diff: Vec<f64> = risks.iter().zip(&spec.r).map(|(a, b)| a - b).collect();
    Ok(spec.norm.apply(&diff))
}

/// Evaluates odds, risks and IRD of a fixed partition.
pub fn assess(g: &ProjectedGaussian, tau: &Breakpoints, spec: &RiskSpec) -> Result<RiskAssessment> {
    if tau.groups() != spec.groups() {
        return Err(Error::DimensionMismatch {
            expected: spec.groups() - 1,
            got: tau.tau().len(),
        });
    }
    let odds = interval_odds(g, tau)?;
    let risks = conditional_risk(&odds, g.p);
    let ird = ird(&risks, spec)?;
    Ok(RiskAssessment {
        risks,
        odds,
        ird,
        feasible: ird < spec.epsilon,
    })
}

/// Breakpoints that reproduce `r_1 .. r_{T-1}` exactly, interval by interval;
/// the last group carries whatever risk remains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialMatch {
    pub breakpoints: Breakpoints,
    pub assessment: RiskAssessment,
}

impl SequentialMatch {
    /// `R_T - r_T`; zero exactly when the partition has zero deviation.
    pub fn residual(&self, spec: &RiskSpec) -> f64 {
        let t = spec.groups() - 1;
        self.assessment.risks[t] - spec.r[t]
    }
}

fn check_solvable(g: &ProjectedGaussian, spec: &RiskSpec) -> Result<()> {
    spec.validate()?;
    if spec.r[0] <= 0.0 || spec.r[spec.groups() - 1] >= 1.0 {
        return Err(Error::DegenerateTarget);
    }
    if !(g.mu1 > g.mu0) {
        return Err(Error::NonIncreasingScore {
            separation: g.mu1 - g.mu0,
        });
    }
    Ok(())
}

/// Solves `R_i(tau_{i-1}, tau_i) = r_i` for `i = 1 .. T-1` in turn. Each step
/// is a monotone root search; a step whose target lies outside the attainable
/// range `(posterior(tau_{i-1}), R(tau_{i-1}, +inf))` returns
/// [`Error::Infeasible`] carrying the violated bound.
pub fn sequential_breakpoints(
    g: &ProjectedGaussian,
    spec: &RiskSpec,
    cfg: &ToleranceConfig,
) -> Result<SequentialMatch> {
    check_solvable(g, spec)?;
    let t_groups = spec.groups();
    let lo_w = g.mu0 - SEARCH_HALF_WIDTH * g.sigma;
    let hi_w = g.mu0 + SEARCH_HALF_WIDTH * g.sigma;

    let mut tau: Vec<f64> = Vec::with_capacity(t_groups - 1);
    for step in 1..t_groups {
        let target = spec.r[step - 1];
        let prev = tau.last().copied().unwrap_or(f64::NEG_INFINITY);

        let sup = interval_risk(g, prev, f64::INFINITY)?;
        if target >= sup {
            return Err(InfeasibleStep {
                step,
                target,
                bound: sup,
                side: BoundSide::Above,
            }
            .into());
        }
        let lower = if prev.is_finite() {
            let limit = g.posterior(prev);
            if limit >= target {
                return Err(InfeasibleStep {
                    step,
                    target,
                    bound: limit,
                    side: BoundSide::Below,
                }
                .into());
            }
            prev
        } else {
            lo_w
        };

        let f = |t: f64| {
            if t <= prev {
                g.posterior(prev) - target
            } else {
                interval_risk(g, prev, t).map_or(f64::NAN, |r| r - target)
            }
        };
        let root = find_root_monotone(f, lower, hi_w.max(lower + g.sigma), cfg)?;
        if root <= prev {
            // the target sits at the shrinking-interval limit itself
            return Err(InfeasibleStep {
                step,
                target,
                bound: g.posterior(prev),
                side: BoundSide::Below,
            }
            .into());
        }
        tau.push(root);
    }

    let breakpoints = Breakpoints::new(tau)?;
    let assessment = assess(g, &breakpoints, spec)?;
    Ok(SequentialMatch {
        breakpoints,
        assessment,
    })
}

/// Result of the sequential stage inside [`solve_breakpoints`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum SequentialOutcome {
    Matched { tau: Vec<f64>, residual: f64 },
    Infeasible(InfeasibleStep),
}

/// The deviation-minimizing partition of a score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakpointFit {
    pub breakpoints: Breakpoints,
    pub assessment: RiskAssessment,
    pub sequential: SequentialOutcome,
}

/// Breakpoints `tau(beta)` minimizing `IRD_r` for a fixed score.
///
/// When a zero-deviation partition exists it is unique and equals the
/// sequential match. Otherwise the deviation is minimized over all strictly
/// increasing partitions, starting from the sequential match (or its feasible
/// prefix) and from evenly spread partitions; the minimizer may be nearly
/// degenerate, in which case the caller sees a vanishing interior gap.
pub fn solve_breakpoints(g: &ProjectedGaussian, spec: &RiskSpec, cfg: &ToleranceConfig) -> Result<BreakpointFit> {
    check_solvable(g, spec)?;
    let k = spec.groups() - 1;

    let (sequential, seq_tau) = match sequential_breakpoints(g, spec, cfg) {
        Ok(m) => {
            let residual = m.residual(spec);
            let tau = m.breakpoints.tau().to_vec();
            if residual.abs() <= cfg.abs_tol {
                return Ok(BreakpointFit {
                    breakpoints: m.breakpoints,
                    assessment: m.assessment,
                    sequential: SequentialOutcome::Matched { tau, residual },
                });
            }
            (
                SequentialOutcome::Matched {
                    tau: tau.clone(),
                    residual,
                },
                Some(tau),
            )
        }
        Err(Error::Infeasible(step)) => (SequentialOutcome::Infeasible(step), None),
        Err(e) => return Err(e),
    };

    // Search in standardized coordinates: tau = mu0 + sigma * v, with the
    // first breakpoint free and log-gaps for the rest.
    let to_v = |t: f64| (t - g.mu0) / g.sigma;
    let log_gap_floor = (1e-12f64).ln();
    let decode = |u: &[f64]| -> Vec<f64> {
        let mut v = Vec::with_capacity(k);
        let mut cur = u[0];
        v.push(cur);
        for &lg in &u[1..] {
            cur += lg.clamp(log_gap_floor, 5.0).exp();
            v.push(cur);
        }
        v.into_iter().map(|x| g.mu0 + g.sigma * x).collect()
    };
    let encode = |tau: &[f64]| -> Vec<f64> {
        let v: Vec<f64> = tau.iter().map(|&t| to_v(t)).collect();
        let mut u = vec![v[0]];
        for w in v.windows(2) {
            u.push((w[1] - w[0]).max(1e-12).ln());
        }
        u
    };
    let objective = |u: &[f64]| -> f64 {
        let tau = decode(u);
        let Ok(bp) = Breakpoints::new(tau) else {
            return f64::INFINITY;
        };
        match interval_odds(g, &bp) {
            Ok(nu) => {
                let dev: Vec<f64> = conditional_risk(&nu, g.p)
                    .iter()
                    .zip(&spec.r)
                    .map(|(a, b)| a - b)
                    .collect();
                match spec.norm {
                    crate::data::Norm::MaxAbs => spec.norm.apply(&dev),
                    _ => dev.iter().map(|d| d * d).sum(),
                }
            }
            Err(_) => f64::INFINITY,
        }
    };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    match (&seq_tau, &sequential) {
        (Some(tau), _) => starts.push(encode(tau)),
        (None, SequentialOutcome::Infeasible(step)) => {
            // keep the matched prefix, collapse the remaining intervals
            if let Ok(prefix) = sequential_prefix(g, spec, cfg, step.step) {
                let mut tau = prefix;
                let mut last = tau.last().copied().unwrap_or(g.mu0);
                while tau.len() < k {
                    last += 1e-6 * g.sigma;
                    tau.push(last);
                }
                starts.push(encode(&tau));
            }
        }
        _ => {}
    }
    let d = g.separation();
    for spread in [1.0, 0.5, 2.0] {
        let tau: Vec<f64> = (0..k)
            .map(|j| {
                let frac = (j as f64 + 1.0) / (k as f64 + 1.0);
                g.mu0 + g.sigma * (-spread + frac * (d + 2.0 * spread))
            })
            .collect();
        starts.push(encode(&tau));
    }

    let nm_cfg = ToleranceConfig::new(1e-11, 0.0, 20_000)?;
    let steps = vec![0.25; k];
    let mut best: Option<(Vec<f64>, f64)> = None;
    for u0 in starts {
        let mut res = minimize_simplex_with_steps(objective, &u0, &steps, &nm_cfg);
        // restart once from the incumbent to escape premature collapse
        let again = minimize_simplex_with_steps(objective, &res.x, &steps, &nm_cfg);
        if again.fx <= res.fx {
            res = again;
        }
        if best.as_ref().is_none_or(|b| res.fx < b.1) {
            best = Some((res.x, res.fx));
        }
    }
    let (u, _) = best.ok_or_else(|| Error::InvalidInput("no breakpoint start".into()))?;
    let mut tau = decode(&u);

    // the sequential match wins ties
    if let Some(seq) = seq_tau {
        if objective(&encode(&seq)) <= objective(&u) {
            tau = seq;
        }
    }
    let breakpoints = Breakpoints::new(tau)?;
    let assessment = assess(g, &breakpoints, spec)?;
    Ok(BreakpointFit {
        breakpoints,
        assessment,
        sequential,
    })
}

/// Breakpoints of the sequential match up to (excluding) `failed_step`.
fn sequential_prefix(
    g: &ProjectedGaussian,
    spec: &RiskSpec,
    cfg: &ToleranceConfig,
    failed_step: usize,
) -> Result<Vec<f64>> {
    if failed_step <= 1 {
        return Ok(Vec::new());
    }
    let mut r = spec.r[..failed_step - 1].to_vec();
    // a dummy top group keeps the sub-problem well formed
    r.push(1.0 - 0.5 * (1.0 - r.last().copied().unwrap_or(0.0)).clamp(1e-9, 0.5));
    let sub = RiskSpec {
        r: r.clone(),
        epsilon: spec.epsilon,
        norm: spec.norm,
    };
    if sub.validate().is_err() {
        return Ok(Vec::new());
    }
    match sequential_breakpoints(g, &sub, cfg) {
        Ok(m) => Ok(m.breakpoints.tau().to_vec()),
        Err(Error::Infeasible(_)) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// One interior boundary `tau_{i-1}` checked against the target of interval `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    /// 1-based index of the interval whose left boundary is checked.
    pub interval: usize,
    pub boundary: f64,
    /// Pointwise posterior `p f1 / f` at the boundary.
    pub lhs: f64,
    /// `r_i`.
    pub rhs: f64,
    /// Likelihood ratio at the boundary.
    pub lr_lhs: f64,
    /// `((1 - p) / p) * r_i / (1 - r_i)`.
    pub lr_rhs: f64,
    /// `lhs < rhs`.
    pub satisfied: bool,
    /// `lr_lhs < lr_rhs`; agrees with `satisfied` by algebra.
    pub satisfied_lr: bool,
}

/// Necessary (not sufficient) conditions for zero deviation: a partition
/// passing every check can still have positive IRD, so feasibility itself is
/// decided by [`assess`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub checks: Vec<BoundaryCheck>,
    /// Interval index of the first failing check.
    pub first_violation: Option<usize>,
}

impl FeasibilityReport {
    pub fn all_satisfied(&self) -> bool {
        self.first_violation.is_none()
    }
}

pub fn feasibility_bounds(g: &ProjectedGaussian, tau: &Breakpoints, spec: &RiskSpec) -> FeasibilityReport {
    let checks: Vec<BoundaryCheck> = tau
        .tau()
        .iter()
        .enumerate()
        .filter_map(|(j, &boundary)| {
            let interval = j + 2;
            let rhs = *spec.r.get(interval - 1)?;
            let lhs = g.posterior(boundary);
            let lr_lhs = likelihood_ratio(g, boundary);
            let lr_rhs = if rhs >= 1.0 {
                f64::INFINITY
            } else {
                (1.0 - g.p) / g.p * rhs / (1.0 - rhs)
            };
            Some(BoundaryCheck {
                interval,
                boundary,
                lhs,
                rhs,
                lr_lhs,
                lr_rhs,
                satisfied: lhs < rhs,
                satisfied_lr: lr_lhs < lr_rhs,
            })
        })
        .collect();
    let first_violation = checks.iter().find(|c| !c.satisfied).map(|c| c.interval);
    FeasibilityReport {
        checks,
        first_violation,
    }
}

/// `Lambda(x) = f1(x) / f0(x)`.
pub fn likelihood_ratio(g: &ProjectedGaussian, x: f64) -> f64 {
    g.log_likelihood_ratio(x).exp()
}

/// `gamma(c, x) = (F1(x) - F1(c)) / (F0(x) - F0(c))`; `c` may be `-inf`.
pub fn gamma_ratio(g: &ProjectedGaussian, c: f64, x: f64) -> Result<f64> {
    if !(x > c) {
        return Err(Error::InvalidInput(format!(
            "gamma ratio needs c < x, got c = {c}, x = {x}"
        )));
    }
    let (m0, m1) = class_masses(g, c, x);
    if m0 < MIN_INTERVAL_MASS {
        return Err(Error::VanishingIntervalMass { interval: 0, mass: m0 });
    }
    Ok(m1 / m0)
}

/// `Q(x) = P(Y=1 | score <= x)` for a possibly heteroscedastic Gaussian pair.
pub fn left_ray_risk(mu0: f64, sigma0: f64, mu1: f64, sigma1: f64, p: f64, x: f64) -> f64 {
    if x == f64::INFINITY {
        return p;
    }
    let a = p * crate::special::std_normal_cdf((x - mu1) / sigma1);
    let b = (1.0 - p) * crate::special::std_normal_cdf((x - mu0) / sigma0);
    if a + b == 0.0 {
        // both tails underflow: compare log-CDFs
        let la = p.ln() + crate::special::log_std_normal_cdf((x - mu1) / sigma1);
        let lb = (1.0 - p).ln() + crate::special::log_std_normal_cdf((x - mu0) / sigma0);
        return crate::special::logistic(la - lb);
    }
    a / (a + b)
}

fn check_masses(masses: &[f64], len: usize) -> Result<()> {
    if masses.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: masses.len(),
        });
    }
    if masses.iter().any(|m| !(*m >= 0.0)) {
        return Err(Error::InvalidInput("interval masses must be non-negative".into()));
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("interval masses sum to {total}, not 1")));
    }
    Ok(())
}

/// Interval risks to left-ray risks: `q_i = sum_{j<=i} r_j m_j / sum_{j<=i} m_j`.
pub fn r_to_q(r: &[f64], masses: &[f64]) -> Result<Vec<f64>> {
    check_masses(masses, r.len())?;
    let mut num = 0.0;
    let mut den = 0.0;
    r.iter()
        .zip(masses)
        .enumerate()
        .map(|(i, (&ri, &mi))| {
            num += ri * mi;
            den += mi;
            if den <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "zero cumulative mass at interval {}",
                    i + 1
                )));
            }
            Ok(num / den)
        })
        .collect()
}

/// Same translation applied to actual risks `R`.
pub fn risks_to_left_ray(risks: &[f64], masses: &[f64]) -> Result<Vec<f64>> {
    r_to_q(risks, masses)
}

/// Inverse of [`r_to_q`]:
/// `r_i = (C_i q_i - C_{i-1} q_{i-1}) / m_i` with cumulative masses `C`.
pub fn q_to_r(q: &[f64], masses: &[f64]) -> Result<Vec<f64>> {
    check_masses(masses, q.len())?;
    let mut prev_c = 0.0;
    let mut prev_q = 0.0;
    q.iter()
        .zip(masses)
        .enumerate()
        .map(|(i, (&qi, &mi))| {
            if mi <= 0.0 {
                return Err(Error::InvalidInput(format!("zero mass in interval {}", i + 1)));
            }
            let c = prev_c + mi;
            let ri = (c * qi - prev_c * prev_q) / mi;
            prev_c = c;
            prev_q = qi;
            Ok(ri)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Norm;
    use crate::special::{std_normal_cdf, std_normal_pdf};

    fn spec(r: &[f64], norm: Norm) -> RiskSpec {
        RiskSpec::new(r.to_vec(), 1e-7, norm).unwrap()
    }

    fn tol() -> ToleranceConfig {
        ToleranceConfig::new(1e-14, 0.0, 300).unwrap()
    }

    #[test]
    fn odds_identical_conditionals() {
        let g = ProjectedGaussian::new(0.5, 0.5, 2.0, 0.3).unwrap();
        let tau = Breakpoints::new(vec![-1.0, 0.0, 4.0]).unwrap();
        for v in interval_odds(&g, &tau).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        for r in conditional_risk(&interval_odds(&g, &tau).unwrap(), 0.3) {
            assert!((r - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn odds_symmetric_pair() {
        let g = ProjectedGaussian::new(-1.0, 1.0, 1.0, 0.5).unwrap();
        let tau = Breakpoints::new(vec![0.0]).unwrap();
        let nu = interval_odds(&g, &tau).unwrap();
        let expected = std_normal_cdf(-1.0) / std_normal_cdf(1.0);
        assert!((nu[0] - expected).abs() < 1e-14);
        assert!((nu[1] - 1.0 / expected).abs() < 1e-12);
        let r = conditional_risk(&nu, 0.5);
        assert!((r[0] - 0.158655).abs() < 1e-6);
        assert!((r[1] - 0.841345).abs() < 1e-6);
    }

    #[test]
    fn odds_vanishing_mass_is_reported() {
        let g = ProjectedGaussian::new(0.0, 1.0, 1e-3, 0.5).unwrap();
        let tau = Breakpoints::new(vec![10.0, 11.0]).unwrap();
        assert!(matches!(
            interval_odds(&g, &tau),
            Err(Error::VanishingIntervalMass { interval: 2, .. })
        ));
    }

    #[test]
    fn risk_extremes() {
        assert_eq!(conditional_risk(&[0.0, f64::INFINITY], 0.4), vec![0.0, 1.0]);
    }

    #[test]
    fn ird_norms() {
        let r = spec(&[0.2, 0.5, 0.8], Norm::Euclidean);
        assert_eq!(ird(&r.r, &r).unwrap(), 0.0);
        let got = ird(&[0.1, 0.5, 0.9], &r).unwrap();
        assert!((got - 0.02f64.sqrt()).abs() < 1e-12);
        let cv = spec(&[0.1, 0.5, 0.9], Norm::SquaredEuclidean);
        let got = ird(&[0.007173, 0.746978, 1.0], &cv).unwrap();
        assert!((got - 0.07962).abs() < 1e-4, "{got}");
        assert!(ird(&[0.1, 0.2], &cv).is_err());
    }

    #[test]
    fn symmetric_case_has_symmetric_breakpoints() {
        let g = ProjectedGaussian::new(-0.25, 0.25, 1.0, 0.5).unwrap();
        let s = spec(&[0.2, 0.5, 0.8], Norm::Euclidean);
        let m = sequential_breakpoints(&g, &s, &tol()).unwrap();
        let t = m.breakpoints.tau();
        assert!((t[0] + t[1]).abs() < 1e-8, "{t:?}");
        assert!((m.assessment.risks[1] - 0.5).abs() < 1e-12);
        for (a, b) in m.assessment.risks.iter().zip(&s.r) {
            assert!((a - b).abs() < 1e-8);
        }
        // bisection oracle on the left ray alone
        let (mut lo, mut hi) = (-10.0, 0.0);
        for _ in 0..80 {
            let mid: f64 = 0.5 * (lo + hi);
            let r1 = std_normal_cdf(mid - 0.25) / (std_normal_cdf(mid - 0.25) + std_normal_cdf(mid + 0.25));
            if r1 < 0.2 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((t[0] - 0.5 * (lo + hi)).abs() < 1e-8);

        let fit = solve_breakpoints(&g, &s, &tol()).unwrap();
        assert!(fit.assessment.ird < 1e-8);
        assert!((fit.breakpoints.tau()[0] - t[0]).abs() < 1e-8);
    }

    #[test]
    fn degenerate_targets_rejected() {
        let g = ProjectedGaussian::new(-1.0, 1.0, 1.0, 0.5).unwrap();
        for r in [[0.0, 0.5, 0.9], [0.1, 0.5, 1.0]] {
            assert!(matches!(
                sequential_breakpoints(&g, &spec(&r, Norm::Euclidean), &tol()),
                Err(Error::DegenerateTarget)
            ));
            assert!(matches!(
                solve_breakpoints(&g, &spec(&r, Norm::Euclidean), &tol()),
                Err(Error::DegenerateTarget)
            ));
        }
        let rev = ProjectedGaussian::new(1.0, -1.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            sequential_breakpoints(&rev, &spec(&[0.2, 0.8], Norm::Euclidean), &tol()),
            Err(Error::NonIncreasingScore { .. })
        ));
    }

    #[test]
    fn infeasible_step_reports_posterior_bound() {
        // strong separation: after matching r_1 the posterior already exceeds r_2
        let g = ProjectedGaussian::new(0.0, 3.0, 1.0, 0.4).unwrap();
        let s = spec(&[0.2, 0.5, 0.8], Norm::Euclidean);
        match sequential_breakpoints(&g, &s, &tol()) {
            Err(Error::Infeasible(step)) => {
                assert_eq!(step.step, 2);
                assert_eq!(step.side, BoundSide::Below);
                assert!(step.bound > 0.5);
                let m1 = sequential_breakpoints(&g, &spec(&[0.2, 0.99], Norm::Euclidean), &tol()).unwrap();
                let t1 = m1.breakpoints.tau()[0];
                assert!((g.posterior(t1) - step.bound).abs() < 1e-10);
            }
            other => panic!("{other:?}"),
        }
        // r_1 above the prior cannot be reached by a left ray
        match sequential_breakpoints(&g, &spec(&[0.45, 0.9], Norm::Euclidean), &tol()) {
            Err(Error::Infeasible(step)) => {
                assert_eq!((step.step, step.side), (1, BoundSide::Above));
                assert!((step.bound - 0.4).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn least_squares_handles_infeasible_sequential() {
        let g = ProjectedGaussian::new(0.0, 3.0, 1.0, 0.4).unwrap();
        let s = spec(&[0.2, 0.5, 0.8], Norm::SquaredEuclidean);
        let fit = solve_breakpoints(&g, &s, &tol()).unwrap();
        assert!(matches!(fit.sequential, SequentialOutcome::Infeasible(_)));
        assert!(fit.assessment.ird > 1e-4);
        // no other partition on a coarse grid does better
        let mut best = f64::INFINITY;
        for i in 0..120 {
            for j in 1..120 {
                let a = -2.0 + i as f64 * 0.05;
                let b = a + j as f64 * 0.02;
                if let Ok(bp) = Breakpoints::new(vec![a, b]) {
                    if let Ok(x) = assess(&g, &bp, &s) {
                        best = best.min(x.ird);
                    }
                }
            }
        }
        assert!(fit.assessment.ird <= best + 1e-9, "{} vs {best}", fit.assessment.ird);
    }

    #[test]
    fn feasibility_threshold_at_midpoint() {
        let g = ProjectedGaussian::new(-1.0, 2.0, 1.5, 0.5).unwrap();
        let s = spec(&[0.1, 0.5, 0.9], Norm::Euclidean);
        let mid = 0.5;
        for (b, expect) in [(mid - 0.01, true), (mid + 0.01, false)] {
            let tau = Breakpoints::new(vec![b, b + 5.0]).unwrap();
            let rep = feasibility_bounds(&g, &tau, &s);
            let check = &rep.checks[0];
            assert!((check.lr_rhs - 1.0).abs() < 1e-15);
            assert_eq!(check.satisfied, expect);
            assert_eq!(check.satisfied_lr, expect);
        }
        let flat = ProjectedGaussian::new(0.0, 0.0, 1.0, 0.3).unwrap();
        let tau = Breakpoints::new(vec![-1.0, 1.0]).unwrap();
        let rep = feasibility_bounds(&flat, &tau, &spec(&[0.1, 0.29, 0.9], Norm::Euclidean));
        assert_eq!(rep.first_violation, Some(2));
        assert!(rep.checks[1].satisfied);
    }

    #[test]
    fn closed_form_likelihood_ratio() {
        let g = ProjectedGaussian::new(-0.5, 1.5, 0.8, 0.3).unwrap();
        for x in [-3.0, 0.0, 0.7, 4.0] {
            let expect = ((2.0 * x - g.mu0 - g.mu1) * (g.mu1 - g.mu0) / (2.0 * g.sigma * g.sigma)).exp();
            assert!((likelihood_ratio(&g, x) / expect - 1.0).abs() < 1e-12);
            let direct = std_normal_pdf((x - g.mu1) / g.sigma) / std_normal_pdf((x - g.mu0) / g.sigma);
            assert!((likelihood_ratio(&g, x) / direct - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn left_ray_limits_and_figure_panels() {
        assert_eq!(left_ray_risk(-1.0, 1.0, 1.0, 4.0, 0.2, f64::INFINITY), 0.2);
        assert!((left_ray_risk(-1.0, 1.0, 1.0, 4.0, 0.2, 1e6) - 0.2).abs() < 1e-12);
        let q_m4 = left_ray_risk(-1.0, 1.0, 1.0, 4.0, 0.2, -4.0);
        let q_0 = left_ray_risk(-1.0, 1.0, 1.0, 4.0, 0.2, 0.0);
        // direct evaluation
        let direct = |x: f64| {
            let a = 0.2 * std_normal_cdf((x - 1.0) / 4.0);
            a / (a + 0.8 * std_normal_cdf(x + 1.0))
        };
        assert!((q_m4 - direct(-4.0)).abs() < 1e-15);
        assert!((q_m4 - 0.9514).abs() < 1e-4, "{q_m4}");
        assert!((q_0 - 0.1065).abs() < 1e-4, "{q_0}");
        let mut prev = 0.0;
        for i in 0..=400 {
            let x = -10.0 + i as f64 * 0.05;
            let q = left_ray_risk(-1.0, 2.0, 1.0, 2.0, 0.2, x);
            assert!(q >= prev - 1e-15);
            prev = q;
        }
        assert!(left_ray_risk(-1.0, 1.0, 1.0, 4.0, 0.2, -60.0) > 0.99);
    }

    #[test]
    fn translation_examples() {
        let r = [0.1, 0.4, 0.8];
        let m = [0.5, 0.3, 0.2];
        let q = r_to_q(&r, &m).unwrap();
        assert_eq!(q[0], 0.1);
        let total: f64 = r.iter().zip(&m).map(|(a, b)| a * b).sum();
        assert!((q[2] - total).abs() < 1e-15);
        let back = q_to_r(&q, &m).unwrap();
        for (a, b) in back.iter().zip(&r) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(r_to_q(&r, &[0.0, 0.0, 1.0]).is_err());
        assert!(q_to_r(&q, &[0.5, 0.5]).is_err());
    }
}
