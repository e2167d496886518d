//! Data containers, Gaussian class-conditional estimation and the projection
//! of the multivariate estimates onto a one-dimensional score `beta^T x`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::logistic;

/// `N x P` design matrix with binary labels (1 = special class).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        let (n, p) = features.shape();
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: labels.len(),
            });
        }
        if feature_names.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: feature_names.len(),
            });
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 observations, got {n}")));
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidInput(format!("label {bad} is not 0 or 1")));
        }
        if let Some((idx, _)) = features.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            // column-major storage
            return Err(Error::InvalidInput(format!(
                "non-finite feature at row {}, column '{}'",
                idx % n,
                feature_names[idx / n]
            )));
        }
        let n1 = labels.iter().filter(|&&y| y == 1).count();
        if n1 == 0 {
            return Err(Error::ClassAbsent(1));
        }
        if n1 == n {
            return Err(Error::ClassAbsent(0));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    /// Builds a dataset from row vectors.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        let p = feature_names.len();
        if let Some(r) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: r.len(),
            });
        }
        let m = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        Self::new(m, labels, feature_names)
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// `(N0, N1)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let n1 = self.labels.iter().filter(|&&y| y == 1).count();
        (self.labels.len() - n1, n1)
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.features.row(i).transpose()
    }

    /// Scores `X beta` for every row.
    pub fn scores(&self, beta: &[f64]) -> Result<Vec<f64>> {
        if beta.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: beta.len(),
            });
        }
        let b = DVector::from_column_slice(beta);
        Ok((&self.features * b).iter().copied().collect())
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let m = self.features.select_rows(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(m, labels, self.feature_names.clone())
    }
}

/// Vector norm applied to `R - r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    #[default]
    Euclidean,
    SquaredEuclidean,
    MaxAbs,
}

impl Norm {
    pub fn apply(self, v: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::SquaredEuclidean => v.iter().map(|x| x * x).sum(),
            Norm::MaxAbs => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "euclidean" | "l2" => Ok(Norm::Euclidean),
            "squared_euclidean" | "squared" | "l2sq" => Ok(Norm::SquaredEuclidean),
            "max_abs" | "max" | "linf" => Ok(Norm::MaxAbs),
            other => Err(Error::InvalidInput(format!("unknown norm '{other}'"))),
        }
    }
}

/// Target risk levels with the feasibility tolerance and deviation norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    pub r: Vec<f64>,
    pub epsilon: f64,
    pub norm: Norm,
}

impl RiskSpec {
    pub fn new(r: Vec<f64>, epsilon: f64, norm: Norm) -> Result<Self> {
        let spec = Self { r, epsilon, norm };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least two risk groups, got {}",
                self.r.len()
            )));
        }
        if self.r.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidInput("risk levels must lie in [0, 1]".into()));
        }
        if self.r.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("risk levels must be strictly increasing".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Number of risk groups `T`.
    pub fn groups(&self) -> usize {
        self.r.len()
    }
}

/// How the common covariance of the two class-conditional Gaussians is
/// estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceEstimator {
    /// `(N0 S0 + N1 S1) / N` with maximum-likelihood per-class covariances.
    #[default]
    Pooled,
    /// Unbiased covariance of all rows ignoring the labels (divisor `N - 1`).
    /// This is the estimator that reproduces the reference WDBC breakpoints
    /// and interval risks.
    Marginal,
}

impl std::str::FromStr for CovarianceEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pooled" => Ok(CovarianceEstimator::Pooled),
            "marginal" | "total" => Ok(CovarianceEstimator::Marginal),
            other => Err(Error::InvalidInput(format!("unknown covariance estimator '{other}'"))),
        }
    }
}

/// Class means, common covariance and class-1 prior.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianEstimates {
    pub mu0: DVector<f64>,
    pub mu1: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub p_hat: f64,
    pub estimator: CovarianceEstimator,
}

/// Pooled-covariance maximum-likelihood estimates.
pub fn estimate_gaussian(data: &Dataset) -> Result<GaussianEstimates> {
    estimate_gaussian_with(data, CovarianceEstimator::Pooled)
}

pub fn estimate_gaussian_with(data: &Dataset, estimator: CovarianceEstimator) -> Result<GaussianEstimates> {
    let (n0, n1) = data.class_counts();
    if n0 < 2 {
        return Err(Error::InvalidInput(format!(
            "class 0 has {n0} observations; need at least 2"
        )));
    }
    if n1 < 2 {
        return Err(Error::InvalidInput(format!(
            "class 1 has {n1} observations; need at least 2"
        )));
    }
    let x = data.features();
    let p = x.ncols();
    let n = x.nrows();

    let mut mu = [DVector::zeros(p), DVector::zeros(p)];
    for (i, &y) in data.labels().iter().enumerate() {
        mu[y as usize] += x.row(i).transpose();
    }
    mu[0] /= n0 as f64;
    mu[1] /= n1 as f64;

    let mut sigma = DMatrix::zeros(p, p);
    match estimator {
        CovarianceEstimator::Pooled => {
            // N0*S0 + N1*S1 is the sum of within-class scatter.
            for (i, &y) in data.labels().iter().enumerate() {
                let d = x.row(i).transpose() - &mu[y as usize];
                sigma += &d * d.transpose();
            }
            sigma /= n as f64;
        }
        CovarianceEstimator::Marginal => {
            let mean = x.row_sum().transpose() / n as f64;
            for i in 0..n {
                let d = x.row(i).transpose() - &mean;
                sigma += &d * d.transpose();
            }
            sigma /= (n - 1) as f64;
        }
    }
    // exact symmetry
    sigma = (&sigma + sigma.transpose()) * 0.5;

    check_positive_definite(x, &sigma, data.feature_names())?;

    let [mu0, mu1] = mu;
    Ok(GaussianEstimates {
        mu0,
        mu1,
        sigma,
        p_hat: n1 as f64 / n as f64,
        estimator,
    })
}

/// Columns that are constant over the whole sample (an intercept) carry no
/// variance by construction and are exempt; every other column must add a
/// strictly positive Schur-complement pivot.
fn check_positive_definite(x: &DMatrix<f64>, sigma: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let p = sigma.ncols();
    let mut accepted: Vec<usize> = Vec::new();
    let mut offending: Vec<String> = Vec::new();
    for j in 0..p {
        let col = x.column(j);
        let constant = col.iter().all(|&v| v == col[0]);
        if constant {
            continue;
        }
        let diag = sigma[(j, j)];
        let scale = col
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .powi(2)
            .max(f64::MIN_POSITIVE);
        if diag <= 1e-12 * scale {
            offending.push(names[j].clone());
            continue;
        }
        let pivot = if accepted.is_empty() {
            diag
        } else {
            let s_aa = sigma.select_rows(&accepted).select_columns(&accepted);
            let s_aj = DVector::from_iterator(accepted.len(), accepted.iter().map(|&a| sigma[(a, j)]));
            match s_aa.cholesky() {
                Some(ch) => diag - s_aj.dot(&ch.solve(&s_aj)),
                None => 0.0,
            }
        };
        if pivot <= 1e-10 * diag {
            offending.push(names[j].clone());
        } else {
            accepted.push(j);
        }
    }
    if offending.is_empty() {
        Ok(())
    } else {
        Err(Error::SingularCovariance { columns: offending })
    }
}

/// The two class-conditional Gaussians of the score `beta^T X`: means
/// `beta^T mu_k`, common standard deviation `sqrt(beta^T Sigma beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectedGaussian {
    pub mu0: f64,
    pub mu1: f64,
    pub sigma: f64,
    pub p: f64,
}

impl ProjectedGaussian {
    pub fn new(mu0: f64, mu1: f64, sigma: f64, p: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::DegenerateProjection);
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidInput(format!("prior must lie in (0, 1), got {p}")));
        }
        if !mu0.is_finite() || !mu1.is_finite() {
            return Err(Error::InvalidInput("projected means must be finite".into()));
        }
        Ok(Self { mu0, mu1, sigma, p })
    }

    /// Standardized class separation `(mu1 - mu0) / sigma`.
    pub fn separation(&self) -> f64 {
        (self.mu1 - self.mu0) / self.sigma
    }

    /// Class-conditional density of the score.
    pub fn density(&self, class: u8, x: f64) -> f64 {
        let mu = if class == 1 { self.mu1 } else { self.mu0 };
        crate::special::std_normal_pdf((x - mu) / self.sigma) / self.sigma
    }

    /// Class-conditional CDF of the score.
    pub fn cdf(&self, class: u8, x: f64) -> f64 {
        let mu = if class == 1 { self.mu1 } else { self.mu0 };
        crate::special::std_normal_cdf((x - mu) / self.sigma)
    }

    /// `log(f1(x) / f0(x))`.
    pub fn log_likelihood_ratio(&self, x: f64) -> f64 {
        let a = (x - self.mu0) / self.sigma;
        let b = (x - self.mu1) / self.sigma;
        0.5 * (a - b) * (a + b)
    }

    /// Pointwise posterior `p f1(x) / (p f1(x) + (1 - p) f0(x))`.
    pub fn posterior(&self, x: f64) -> f64 {
        let odds = (self.p / (1.0 - self.p)).ln() + self.log_likelihood_ratio(x);
        logistic(odds)
    }
}

/// Projects the multivariate estimates onto `beta`.
pub fn project(est: &GaussianEstimates, beta: &[f64]) -> Result<ProjectedGaussian> {
    let p = est.mu0.len();
    if beta.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: beta.len(),
        });
    }
    if beta.iter().all(|&b| b == 0.0) {
        return Err(Error::DegenerateProjection);
    }
    let b = DVector::from_column_slice(beta);
    let var = (est.sigma.transpose() * &b).dot(&b);
    if !(var > 0.0) {
        return Err(Error::DegenerateProjection);
    }
    ProjectedGaussian::new(b.dot(&est.mu0), b.dot(&est.mu1), var.sqrt(), est.p_hat)
}

/// Strictly increasing score-scale breakpoints `tau_1 < ... < tau_{T-1}`;
/// `tau_0 = -inf` and `tau_T = +inf` are implicit. Interval `i` (1-based) is
/// `(tau_{i-1}, tau_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakpoints {
    tau: Vec<f64>,
}

impl Breakpoints {
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        if tau.is_empty() {
            return Err(Error::InvalidInput("need at least one breakpoint".into()));
        }
        if tau.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("breakpoints must be finite".into()));
        }
        if tau.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "breakpoints must be strictly increasing: {tau:?}"
            )));
        }
        Ok(Self { tau })
    }

    /// Converts probability-scale cut points via logit.
    pub fn from_probability(probs: &[f64]) -> Result<Self> {
        let tau = probs
            .iter()
            .map(|&q| crate::special::logit(q))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tau)
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// Number of intervals `T`.
    pub fn groups(&self) -> usize {
        self.tau.len() + 1
    }

    /// `(tau_{i-1}, tau_i)` for 1-based `i`, with infinite ends.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        assert!(i >= 1 && i <= self.groups(), "interval index out of range");
        let lo = if i == 1 { f64::NEG_INFINITY } else { self.tau[i - 2] };
        let hi = if i == self.groups() {
            f64::INFINITY
        } else {
            self.tau[i - 1]
        };
        (lo, hi)
    }

    /// Probability-scale breakpoints `logistic(tau)`.
    pub fn to_probability(&self) -> Vec<f64> {
        self.tau.iter().map(|&t| logistic(t)).collect()
    }

    /// Lengths of the finite intervals `tau_i - tau_{i-1}`, `i = 2..T-1`.
    pub fn interior_gaps(&self) -> Vec<f64> {
        self.tau.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Smallest finite interval length, `None` when `T = 2`.
    pub fn min_gap(&self) -> Option<f64> {
        self.interior_gaps().into_iter().reduce(f64::min)
    }

    /// 1-based group of a score under right-closed intervals.
    pub fn group_of(&self, score: f64) -> usize {
        self.tau.partition_point(|&t| t < score) + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn dataset_invariants() {
        let rows = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            Dataset::from_rows(&rows, vec![1, 1], names(1)),
            Err(Error::ClassAbsent(0))
        ));
        assert!(matches!(
            Dataset::from_rows(&[vec![f64::NAN], vec![1.0]], vec![0, 1], names(1)),
            Err(Error::InvalidInput(_))
        ));
        assert!(Dataset::from_rows(&[vec![1.0]], vec![1], names(1)).is_err());
        let d = Dataset::from_rows(&rows, vec![0, 1], names(1)).unwrap();
        assert_eq!(d.class_counts(), (1, 1));
    }

    #[test]
    fn degenerate_classes_are_singular() {
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                if i < 3 {
                    vec![1.0, 0.0, 0.0]
                } else {
                    vec![1.0, 1.0, 2.0]
                }
            })
            .collect();
        let d = Dataset::from_rows(&rows, vec![0, 0, 0, 1, 1, 1], names(3)).unwrap();
        match estimate_gaussian(&d) {
            Err(Error::SingularCovariance { columns }) => {
                assert_eq!(columns, vec!["x1".to_string(), "x2".to_string()])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn collinear_column_is_named() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let a = (i as f64 * 0.37).sin();
                let b = (i as f64 * 1.3).cos();
                vec![1.0, a, b, 2.0 * a - b]
            })
            .collect();
        let labels = (0..20).map(|i| (i % 2) as u8).collect();
        let d = Dataset::from_rows(&rows, labels, names(4)).unwrap();
        match estimate_gaussian(&d) {
            Err(Error::SingularCovariance { columns }) => assert_eq!(columns, vec!["x3".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn prior_and_means() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![1.0, i as f64, ((i * 7) % 11) as f64]).collect();
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i < 30)).collect();
        let d = Dataset::from_rows(&rows, labels, names(3)).unwrap();
        let est = estimate_gaussian(&d).unwrap();
        assert!((est.p_hat - 0.3).abs() < 1e-15);
        assert!((est.mu1[1] - 14.5).abs() < 1e-12);
        assert!((est.mu0[1] - 64.5).abs() < 1e-12);
        assert!((est.mu0[0] - 1.0).abs() < 1e-15);
        // ML per-class variance of 0..29 and 30..99
        let v1 = (30.0f64 * 30.0 - 1.0) / 12.0;
        let v0 = (70.0f64 * 70.0 - 1.0) / 12.0;
        assert!((est.sigma[(1, 1)] - (30.0 * v1 + 70.0 * v0) / 100.0).abs() < 1e-9);
    }

    #[test]
    fn projection_linearity_and_unit_vectors() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![1.0, (i as f64).sqrt(), ((i * 13) % 7) as f64])
            .collect();
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 3 == 0)).collect();
        let d = Dataset::from_rows(&rows, labels, names(3)).unwrap();
        let est = estimate_gaussian(&d).unwrap();

        let g = project(&est, &[0.0, 1.0, 0.0]).unwrap();
        assert!((g.mu0 - est.mu0[1]).abs() < 1e-15);
        assert!((g.sigma - est.sigma[(1, 1)].sqrt()).abs() < 1e-15);

        let beta = [0.3, -1.2, 0.7];
        let g1 = project(&est, &beta).unwrap();
        let g2 = project(&est, &beta.map(|b| 2.0 * b)).unwrap();
        assert!((g2.mu0 - 2.0 * g1.mu0).abs() < 1e-12);
        assert!((g2.mu1 - 2.0 * g1.mu1).abs() < 1e-12);
        assert!((g2.sigma - 2.0 * g1.sigma).abs() < 1e-12);

        assert!(matches!(project(&est, &[0.0; 3]), Err(Error::DegenerateProjection)));
        assert!(matches!(
            project(&est, &[1.0, 0.0, 0.0]),
            Err(Error::DegenerateProjection)
        ));
    }

    #[test]
    fn estimates_invariant_to_row_permutation() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![1.0, (i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()])
            .collect();
        let labels: Vec<u8> = (0..30).map(|i| u8::from(i % 4 == 1)).collect();
        let d = Dataset::from_rows(&rows, labels, names(3)).unwrap();
        let perm: Vec<usize> = (0..30).map(|i| (i * 7) % 30).collect();
        let dp = d.subset(&perm).unwrap();
        for est in [CovarianceEstimator::Pooled, CovarianceEstimator::Marginal] {
            let a = estimate_gaussian_with(&d, est).unwrap();
            let b = estimate_gaussian_with(&dp, est).unwrap();
            assert!((a.mu0 - b.mu0).amax() < 1e-14);
            assert!((a.mu1 - b.mu1).amax() < 1e-14);
            assert!((a.sigma - b.sigma).amax() < 1e-14);
        }
    }

    #[test]
    fn breakpoints_validation_and_groups() {
        assert!(Breakpoints::new(vec![1.0, 1.0]).is_err());
        assert!(Breakpoints::new(vec![]).is_err());
        let b = Breakpoints::new(vec![-1.0, 2.0]).unwrap();
        assert_eq!(b.groups(), 3);
        assert_eq!(b.interval(1), (f64::NEG_INFINITY, -1.0));
        assert_eq!(b.interval(3), (2.0, f64::INFINITY));
        assert_eq!(b.group_of(-1.0), 1);
        assert_eq!(b.group_of(-0.999), 2);
        assert_eq!(b.group_of(2.0), 2);
        assert_eq!(b.group_of(5.0), 3);
        assert_eq!(b.min_gap(), Some(3.0));
        let pb = Breakpoints::from_probability(&b.to_probability()).unwrap();
        assert!((pb.tau()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn risk_spec_validation() {
        assert!(RiskSpec::new(vec![0.5], 1e-7, Norm::Euclidean).is_err());
        assert!(RiskSpec::new(vec![0.5, 0.5], 1e-7, Norm::Euclidean).is_err());
        assert!(RiskSpec::new(vec![0.1, 1.1], 1e-7, Norm::Euclidean).is_err());
        assert!(RiskSpec::new(vec![0.1, 0.9], 0.0, Norm::Euclidean).is_err());
        assert!(RiskSpec::new(vec![0.0, 0.5, 1.0], 1e-7, Norm::MaxAbs).is_ok());
        assert_eq!("squared_euclidean".parse::<Norm>().unwrap(), Norm::SquaredEuclidean);
    }
}
