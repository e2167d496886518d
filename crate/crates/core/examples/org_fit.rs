//! Constrained fit on the breast-cancer data: the likelihood is traded for
//! interval risks that hit the targets, with breakpoints kept apart by the
//! geometry penalty.
//!
//! `cargo run --release --example org_fit -- 0.2,0.5,0.8 40`

use ordinal_risk::cli::load_wdbc;
use ordinal_risk::org::{fit_org, PenaltyConfig, SolverConfig};
use ordinal_risk::{Norm, RiskSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let r: Vec<f64> = args
        .next()
        .unwrap_or_else(|| "0.1,0.5,0.9".into())
        .split(',')
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let starts = args.next().map(|s| s.parse()).transpose()?.unwrap_or(40);

    let (data, _) = load_wdbc()?;
    let spec = RiskSpec::new(r, 1e-7, Norm::Euclidean)?;
    let cfg = SolverConfig {
        n_starts: starts,
        ..SolverConfig::default()
    };
    let fit = fit_org(&data, &spec, &PenaltyConfig::new(10.0)?, &cfg)?;

    let best = &fit.best;
    println!("{:>26} {:>10} {:>10}", "", "LR", "ORG");
    for (i, name) in data.feature_names().iter().enumerate() {
        println!("{name:>26} {:>10.4} {:>10.4}", fit.lr.beta[i], best.beta[i]);
    }
    println!(
        "{:>26} {:>10.4} {:>10.4}",
        "log-likelihood", fit.lr.log_likelihood, best.log_likelihood
    );
    println!("tau {:?}", best.tau.tau());
    println!("risks {:?}", best.assessment.risks);
    println!(
        "deviation {:.2e}, penalty {:.4}, feasible {}, degenerate {}, from start {}",
        best.assessment.ird, best.penalty_value, best.feasible, best.degenerate, best.start_index
    );
    let ok = fit.starts.iter().filter(|s| s.feasible && !s.degenerate).count();
    println!("{ok} of {} starts reached a usable solution", fit.starts.len());
    Ok(())
}
