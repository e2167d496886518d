//! Numerical primitives shared by every other module: the logistic link and
//! its inverse, standard normal functions, a safeguarded bracketing root
//! finder and a Nelder-Mead simplex minimizer.
//!
//! Everything here is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Convergence controls for the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl ToleranceConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_iter,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::InvalidInput(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol >= 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidInput(format!(
                "rel_tol must be non-negative, got {}",
                self.rel_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 0.0,
            max_iter: 200,
        }
    }
}

/// `e^s / (1 + e^s)` without overflow for large `|s|`.
#[inline]
pub fn logistic(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `log(p / (1 - p))`.
pub fn logit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityDomain(p));
    }
    Ok((p / (1.0 - p)).ln())
}

/// `log(1 + e^s)`, stable for all finite `s`.
#[inline]
pub fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, `Phi(x)`.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)`, accurate where the CDF itself rounds to one.
#[inline]
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `log Phi(x)`, finite far into the lower tail.
pub fn log_std_normal_cdf(x: f64) -> f64 {
    if x > -30.0 {
        return std_normal_cdf(x).ln();
    }
    // Mills-ratio asymptotic series; truncation error is far below f64 here.
    let z2 = x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..8 {
        term *= -((2 * k - 1) as f64) / z2;
        sum += term;
    }
    -0.5 * z2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + sum.ln()
}

/// Probability mass of a standard normal on `(za, zb]`, choosing the form
/// that avoids cancellation: both ends in the upper half use the survival
/// function, both in the lower half use the CDF.
pub fn std_normal_interval(za: f64, zb: f64) -> f64 {
    if zb <= za {
        return 0.0;
    }
    if za >= 0.0 {
        std_normal_sf(za) - std_normal_sf(zb)
    } else if zb <= 0.0 {
        std_normal_cdf(zb) - std_normal_cdf(za)
    } else {
        // grouped so that reflecting (za, zb) -> (-zb, -za) is exact
        1.0 - (std_normal_cdf(za) + std_normal_sf(zb))
    }
}

/// Finds the root of a continuous, strictly monotone `f` bracketed by
/// `[lo, hi]` using Brent's method (bisection safeguarding inverse quadratic
/// and secant steps).
///
/// Stops when `|f(x)| <= abs_tol` or the bracket half-width drops below
/// `rel_tol * |x| + abs_tol`.
pub fn find_root_monotone<F>(mut f: F, lo: f64, hi: f64, cfg: &ToleranceConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    cfg.validate()?;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::InvalidInput(format!("bad bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::InvalidInput("function is NaN at bracket end".into()));
    }
    if fa.abs() <= cfg.abs_tol {
        return Ok(a);
    }
    if fb.abs() <= cfg.abs_tol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..cfg.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * (cfg.rel_tol * b.abs() + cfg.abs_tol);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= cfg.abs_tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::InvalidInput(format!("function is NaN at {b}")));
        }
    }
    Err(Error::RootNotConverged {
        iterations: cfg.max_iter,
        lo: b.min(c),
        hi: b.max(c),
    })
}

/// Outcome of a simplex search.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Nelder-Mead minimization from `x0` with the default initial simplex
/// (5% of each nonzero coordinate, 2.5e-4 for zero coordinates).
pub fn minimize_simplex<F>(f: F, x0: &[f64], cfg: &ToleranceConfig) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let steps: Vec<f64> = x0.iter().map(|&v| if v != 0.0 { 0.05 * v } else { 2.5e-4 }).collect();
    minimize_simplex_with_steps(f, x0, &steps, cfg)
}

/// Nelder-Mead minimization with an explicit initial edge length per
/// coordinate.
///
/// Converged when every vertex lies within `abs_tol + rel_tol * |best|_inf`
/// of the best vertex in every coordinate. Deterministic given its inputs.
/// Non-finite function values are treated as `+inf`.
pub fn minimize_simplex_with_steps<F>(mut f: F, x0: &[f64], steps: &[f64], cfg: &ToleranceConfig) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(steps.len(), n, "one step per coordinate");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    if n == 0 {
        let fx = eval(x0, &mut evals);
        return SimplexResult {
            x: Vec::new(),
            fx,
            converged: true,
            iterations: 0,
            evaluations: evals,
        };
    }

    let mut verts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    verts.push((x0.to_vec(), eval(x0, &mut evals)));
    for (k, &h) in steps.iter().enumerate() {
        let mut v = x0.to_vec();
        v[k] += if h != 0.0 { h } else { 2.5e-4 };
        let fv = eval(&v, &mut evals);
        verts.push((v, fv));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];

    loop {
        verts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &verts[0].0;
        let scale = best.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = cfg.abs_tol + cfg.rel_tol * scale;
        let diameter = verts[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if diameter <= tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (v, _) in &verts[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst_f = verts[n].1;
        let second_worst_f = verts[n - 1].1;
        let best_f = verts[0].1;

        let along = |t: f64, out: &mut Vec<f64>, worst: &[f64]| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(worst) {
                *o = c + t * (c - w);
            }
        };

        along(alpha, &mut trial, &verts[n].0.clone());
        let fr = eval(&trial, &mut evals);
        if fr < best_f {
            let reflected = trial.clone();
            along(alpha * gamma, &mut trial, &verts[n].0.clone());
            let fe = eval(&trial, &mut evals);
            verts[n] = if fe < fr { (trial.clone(), fe) } else { (reflected, fr) };
            continue;
        }
        if fr < second_worst_f {
            verts[n] = (trial.clone(), fr);
            continue;
        }
        // Contraction: outside if the reflection improved on the worst vertex.
        let t = if fr < worst_f { alpha * rho } else { -rho };
        along(t, &mut trial, &verts[n].0.clone());
        let fc = eval(&trial, &mut evals);
        if fc < fr.min(worst_f) {
            verts[n] = (trial.clone(), fc);
            continue;
        }
        let best = verts[0].0.clone();
        for (v, fv) in verts.iter_mut().skip(1) {
            for (x, b) in v.iter_mut().zip(&best) {
                *x = b + sigma * (*x - b);
            }
            *fv = eval(v, &mut evals);
        }
    }

    let (x, fx) = verts.swap_remove(0);
    SimplexResult {
        x,
        fx,
        converged,
        iterations,
        evaluations: evals,
    }
}
