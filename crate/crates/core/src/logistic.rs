//! Two-class logistic regression: prediction, log-likelihood with its
//! derivatives, and Newton fitting with step-halving.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::special::{logistic, softplus, ToleranceConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub beta: Vec<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Max-norm of the gradient at `beta`.
    pub gradient_norm: f64,
    /// Coefficients diverged towards a separating direction; `beta` is the
    /// last iterate.
    pub separation: bool,
}

fn check_len(beta: &[f64], p: usize) -> Result<()> {
    if beta.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: beta.len(),
        });
    }
    Ok(())
}

/// `P(Y = 1 | x) = logistic(beta^T x)`.
pub fn predict(beta: &[f64], x: &[f64]) -> Result<f64> {
    check_len(beta, x.len())?;
    Ok(logistic(beta.iter().zip(x).map(|(b, v)| b * v).sum()))
}

/// `sum y_j s_j - sum log(1 + e^{s_j})` with `s = X beta`.
pub fn log_likelihood(beta: &[f64], data: &Dataset) -> Result<f64> {
    let s = data.scores(beta)?;
    Ok(s.iter()
        .zip(data.labels())
        .map(|(&s, &y)| f64::from(y) * s - softplus(s))
        .sum())
}

/// `X^T (y - pi)`.
pub fn gradient(beta: &[f64], data: &Dataset) -> Result<Vec<f64>> {
    let s = data.scores(beta)?;
    let resid = DVector::from_iterator(
        s.len(),
        s.iter().zip(data.labels()).map(|(&s, &y)| f64::from(y) - logistic(s)),
    );
    Ok((data.features().transpose() * resid).as_slice().to_vec())
}

/// `-X^T W X` with `W = diag(pi (1 - pi))`.
pub fn hessian(beta: &[f64], data: &Dataset) -> Result<DMatrix<f64>> {
    let s = data.scores(beta)?;
    Ok(-weighted_gram(data.features(), &s))
}

fn weighted_gram(x: &DMatrix<f64>, s: &[f64]) -> DMatrix<f64> {
    let mut xw = x.clone();
    for (i, &si) in s.iter().enumerate() {
        let pi = logistic(si);
        let w = pi * (1.0 - pi);
        xw.row_mut(i).scale_mut(w);
    }
    x.transpose() * xw
}

fn check_full_rank(x: &DMatrix<f64>) -> Result<()> {
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.max();
    if !(max > 0.0) || sv.min() <= max * 1e-10 * (x.nrows().max(x.ncols()) as f64) {
        return Err(Error::RankDeficient);
    }
    Ok(())
}

/// Maximum-likelihood fit by Newton's method from `beta = 0`.
///
/// Each step is halved until the likelihood does not decrease. Converged
/// when the gradient max-norm is at most `cfg.abs_tol`. Near-separable data
/// stop with `separation = true` and the last iterate instead of failing.
pub fn fit_lr(data: &Dataset, cfg: &ToleranceConfig) -> Result<LogisticFit> {
    cfg.validate()?;
    let x = data.features();
    check_full_rank(x)?;
    let p = data.n_features();
    let mut beta = vec![0.0; p];
    let mut ll = log_likelihood(&beta, data)?;
    let mut iterations = 0;
    let mut separation = false;

    let grad_norm =
        |beta: &[f64]| -> Result<f64> { Ok(gradient(beta, data)?.iter().fold(0.0f64, |m, g| m.max(g.abs()))) };

    let mut converged = grad_norm(&beta)? <= cfg.abs_tol;
    while !converged && iterations < cfg.max_iter {
        iterations += 1;
        let s = data.scores(&beta)?;
        let info = weighted_gram(x, &s);
        let g = DVector::from_vec(gradient(&beta, data)?);
        let step = match info.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => match info.lu().solve(&g) {
                Some(st) => st,
                None => {
                    separation = true;
                    break;
                }
            },
        };

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, d)| b + t * d).collect();
            let cand_ll = log_likelihood(&cand, data)?;
            if cand_ll >= ll {
                let gain = cand_ll - ll;
                beta = cand;
                ll = cand_ll;
                accepted = true;
                if gain == 0.0 && t < 1.0 {
                    // no measurable progress left
                    converged = true;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if grad_norm(&beta)? <= cfg.abs_tol {
            converged = true;
        }
        if ll > -1e-8 * data.n_rows() as f64 {
            separation = true;
            break;
        }
    }

    let gradient_norm = grad_norm(&beta)?;
    converged = converged && gradient_norm <= cfg.abs_tol.max(1e-6);
    if !converged && (ll > -1e-6 || beta.iter().any(|b| b.abs() > 1e8)) {
        separation = true;
    }
    if separation {
        warn!("logistic fit: data look separable; returning the last iterate (log-likelihood {ll})");
    }
    Ok(LogisticFit {
        beta,
        log_likelihood: ll,
        converged,
        iterations,
        gradient_norm,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::logit;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(seed: u64, n: usize, p: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let mut row = vec![1.0];
            for _ in 1..p {
                row.push(rng.random_range(-2.0..2.0));
            }
            let s: f64 = row.iter().skip(1).sum::<f64>() * 0.7;
            let y = u8::from(rng.random::<f64>() < logistic(s));
            // guarantee both classes
            labels.push(if i < 2 { i as u8 } else { y });
            rows.push(row);
        }
        let names = (0..p).map(|j| format!("x{j}")).collect();
        Dataset::from_rows(&rows, labels, names).unwrap()
    }

    #[test]
    fn predict_examples() {
        assert_eq!(predict(&[0.0, 0.0], &[3.0, -7.0]).unwrap(), 0.5);
        let x = [logit(0.73).unwrap(), 5.0];
        assert!((predict(&[1.0, 0.0], &x).unwrap() - 0.73).abs() < 1e-12);
        assert!(predict(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn likelihood_examples() {
        let d = random_dataset(1, 40, 3);
        let ll0 = log_likelihood(&[0.0; 3], &d).unwrap();
        assert!((ll0 + 40.0 * 2f64.ln()).abs() < 1e-10);
        let one = Dataset::from_rows(&[vec![1.0]], vec![1], vec!["c".into()]);
        // a single row lacks class 0, so evaluate through a two-row set
        assert!(one.is_err());
        let two = Dataset::from_rows(&[vec![0.0], vec![0.0]], vec![1, 0], vec!["c".into()]).unwrap();
        assert!((log_likelihood(&[3.0], &two).unwrap() + 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!(log_likelihood(&[1.0, 2.0], &two).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in 0..20 {
            let d = random_dataset(100 + k, 60, 4);
            let beta: Vec<f64> = (0..4).map(|_| rng.random_range(-1.5..1.5)).collect();
            let g = gradient(&beta, &d).unwrap();
            let h = hessian(&beta, &d).unwrap();
            for j in 0..4 {
                let e = 1e-5;
                let mut up = beta.clone();
                let mut dn = beta.clone();
                up[j] += e;
                dn[j] -= e;
                let fd = (log_likelihood(&up, &d).unwrap() - log_likelihood(&dn, &d).unwrap()) / (2.0 * e);
                assert!(
                    (fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1.0),
                    "grad {j}: {fd} vs {}",
                    g[j]
                );
                let gu = gradient(&up, &d).unwrap();
                let gd = gradient(&dn, &d).unwrap();
                for i in 0..4 {
                    let fd = (gu[i] - gd[i]) / (2.0 * e);
                    assert!((fd - h[(i, j)]).abs() <= 1e-4 * h[(i, j)].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn symmetric_data_zero_intercept() {
        let xs = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for &x in &xs {
            // each x appears with both labels, weighted towards y = 1 for x > 0
            rows.push(vec![1.0, x]);
            labels.push(u8::from(x > 0.0));
            rows.push(vec![1.0, -x]);
            labels.push(u8::from(x > 0.0));
            rows.push(vec![1.0, x]);
            labels.push(u8::from(x > 0.0));
        }
        let d = Dataset::from_rows(&rows, labels, vec!["c".into(), "x".into()]).unwrap();
        let fit = fit_lr(&d, &ToleranceConfig::new(1e-10, 0.0, 100).unwrap()).unwrap();
        assert!(fit.converged);
        assert!(fit.beta[0].abs() < 1e-9, "{:?}", fit.beta);
        assert!(fit.beta[1] > 0.0);
        assert!(fit.gradient_norm < 1e-6);
        assert!((fit.log_likelihood - log_likelihood(&fit.beta, &d).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn rank_deficiency_is_an_error() {
        let rows = vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]];
        let d = Dataset::from_rows(&rows, vec![0, 1, 0], vec!["a".into(), "b".into()]).unwrap();
        assert!(matches!(
            fit_lr(&d, &ToleranceConfig::default()),
            Err(Error::RankDeficient)
        ));
    }

    #[test]
    fn separation_is_flagged() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        let labels = (0..10).map(|i| u8::from(i >= 5)).collect();
        let d = Dataset::from_rows(&rows, labels, vec!["c".into(), "x".into()]).unwrap();
        let fit = fit_lr(&d, &ToleranceConfig::new(1e-10, 0.0, 200).unwrap()).unwrap();
        assert!(fit.separation);
        assert!(fit.log_likelihood <= 0.0 && fit.log_likelihood > -1e-3);
    }

    #[test]
    fn likelihood_not_ray_constant() {
        let d = random_dataset(5, 50, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let b: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b2: Vec<f64> = b.iter().map(|v| 2.0 * v).collect();
            assert_ne!(log_likelihood(&b, &d).unwrap(), log_likelihood(&b2, &d).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn newton_never_decreases_and_is_permutation_invariant(seed in 0u64..1000) {
            let d = random_dataset(seed, 50, 3);
            let cfg = ToleranceConfig::new(1e-9, 0.0, 100).unwrap();
            let fit = fit_lr(&d, &cfg).unwrap();
            prop_assert!(fit.log_likelihood >= log_likelihood(&[0.0; 3], &d).unwrap());
            prop_assert!(fit.log_likelihood <= 0.0);
            let rev: Vec<usize> = (0..d.n_rows()).rev().collect();
            let fit2 = fit_lr(&d.subset(&rev).unwrap(), &cfg).unwrap();
            for (a, b) in fit.beta.iter().zip(&fit2.beta) {
                prop_assert!((a - b).abs() < 1e-7 * a.abs().max(1.0));
            }
        }

        #[test]
        fn rescaling_a_column_rescales_its_coefficient(seed in 0u64..1000, c in 0.1f64..10.0) {
            let d = random_dataset(seed, 50, 3);
            let mut x = d.features().clone();
            x.column_mut(2).scale_mut(c);
            let scaled = Dataset::new(x, d.labels().to_vec(), d.feature_names().to_vec()).unwrap();
            let cfg = ToleranceConfig::new(1e-9, 0.0, 100).unwrap();
            let a = fit_lr(&d, &cfg).unwrap();
            let b = fit_lr(&scaled, &cfg).unwrap();
            prop_assert!((a.beta[2] / c - b.beta[2]).abs() < 1e-6 * a.beta[2].abs().max(1.0));
            prop_assert!((a.log_likelihood - b.log_likelihood).abs() < 1e-8);
        }
    }
}
