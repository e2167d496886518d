//! Fits logistic regression to the bundled breast-cancer data and prints the
//! coefficients next to the rows dropped by the log transforms.

use ordinal_risk::cli::load_wdbc;
use ordinal_risk::logistic::fit_lr;
use ordinal_risk::ToleranceConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (data, drops) = load_wdbc()?;
    println!("{drops}");

    let fit = fit_lr(&data, &ToleranceConfig::new(1e-9, 0.0, 100)?)?;
    for (name, b) in data.feature_names().iter().zip(&fit.beta) {
        println!("{name:>26} {b:>10.4}");
    }
    println!(
        "log-likelihood {:.4} after {} Newton steps (gradient norm {:.1e})",
        fit.log_likelihood, fit.iterations, fit.gradient_norm
    );
    Ok(())
}
