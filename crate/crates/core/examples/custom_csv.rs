//! Loads an arbitrary CSV with a feature spec string and fits both models.
//!
//! `cargo run --release --example custom_csv -- data.csv label 1 "intercept,a,b:log"`

use ordinal_risk::cli::{load_csv, parse_features, LoadConfig};
use ordinal_risk::logistic::fit_lr;
use ordinal_risk::org::{fit_org, PenaltyConfig, SolverConfig};
use ordinal_risk::{Norm, RiskSpec, ToleranceConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [path, label, positive, features] = args.as_slice() else {
        eprintln!("usage: custom_csv <file.csv> <label column> <positive label> <features>");
        std::process::exit(2);
    };
    let cfg = LoadConfig {
        label_col: label.clone(),
        positive: positive.clone(),
        features: parse_features(features)?,
        delimiter: b',',
    };
    let (data, drops) = load_csv(path.as_ref(), &cfg)?;
    println!("{drops}");

    let lr = fit_lr(&data, &ToleranceConfig::default())?;
    println!("logistic log-likelihood {:.4}", lr.log_likelihood);

    let spec = RiskSpec::new(vec![0.1, 0.5, 0.9], 1e-7, Norm::Euclidean)?;
    let cfg = SolverConfig {
        n_starts: 20,
        ..SolverConfig::default()
    };
    let org = fit_org(&data, &spec, &PenaltyConfig::new(10.0)?, &cfg)?;
    println!(
        "constrained log-likelihood {:.4}, deviation {:.2e}, tau {:?}",
        org.best.log_likelihood,
        org.best.assessment.ird,
        org.best.tau.tau()
    );
    Ok(())
}
