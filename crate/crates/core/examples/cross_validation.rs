//! Repeated 90/10 holdout: observed event rates per group on the held-out
//! rows, for plain logistic regression and the constrained fit.

use ordinal_risk::cli::load_wdbc;
use ordinal_risk::empirical::{cross_validate, CvConfig, CvMethod};
use ordinal_risk::org::{PenaltyConfig, SolverConfig};
use ordinal_risk::{Norm, RiskSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let repeats = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(30);
    let (data, _) = load_wdbc()?;
    let spec = RiskSpec::new(vec![0.1, 0.5, 0.9], 1e-7, Norm::Euclidean)?;
    let cv = CvConfig {
        repeats,
        ..CvConfig::default()
    };
    let solver = SolverConfig {
        n_starts: 6,
        ..SolverConfig::default()
    };
    let pen = PenaltyConfig::new(10.0)?;

    for method in [CvMethod::Lr, CvMethod::Org] {
        let rep = cross_validate(&data, &spec, method, &pen, &solver, &cv)?;
        let rates: Vec<String> = rep
            .pooled
            .rates
            .iter()
            .map(|r| r.map_or("-".into(), |v| format!("{:.2}%", 100.0 * v)))
            .collect();
        println!(
            "{method:?}: pooled rates [{}], squared deviation {:.5}, failed repeats {}",
            rates.join(", "),
            rep.pooled_ird_squared,
            rep.failed
        );
    }
    Ok(())
}
