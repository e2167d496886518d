//! Projects the fitted model onto one dimension and finds the breakpoints
//! whose interval risks come closest to two target vectors.

use ordinal_risk::cli::load_wdbc;
use ordinal_risk::logistic::fit_lr;
use ordinal_risk::risk::solve_breakpoints;
use ordinal_risk::{estimate_gaussian_with, project, CovarianceEstimator, Norm, RiskSpec, ToleranceConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (data, _) = load_wdbc()?;
    let fit = fit_lr(&data, &ToleranceConfig::default())?;
    let est = estimate_gaussian_with(&data, CovarianceEstimator::Marginal)?;
    let g = project(&est, &fit.beta)?;
    println!(
        "score ~ N({:.4}, {:.4}^2) | benign, N({:.4}, {:.4}^2) | malignant, prior {:.4}",
        g.mu0, g.sigma, g.mu1, g.sigma, g.p
    );

    let tol = ToleranceConfig::new(1e-13, 0.0, 300)?;
    for r in [vec![0.1, 0.5, 0.9], vec![0.2, 0.5, 0.8]] {
        let spec = RiskSpec::new(r.clone(), 1e-7, Norm::Euclidean)?;
        let bp = solve_breakpoints(&g, &spec, &tol)?;
        println!("\ntargets {r:?}");
        println!("  tau   {:?}", bp.breakpoints.tau());
        println!("  risks {:?}", bp.assessment.risks);
        println!(
            "  deviation {:.4e}, smallest gap {:.3e}",
            bp.assessment.ird,
            bp.breakpoints.min_gap().unwrap_or(f64::INFINITY)
        );
    }
    Ok(())
}
