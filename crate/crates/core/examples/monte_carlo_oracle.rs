//! Closed-form interval risks against rates observed in simulated scores.

use ordinal_risk::empirical::{empirical_interval_risk, simulate_gaussian_pair};
use ordinal_risk::risk::{conditional_risk, interval_odds};
use ordinal_risk::{Breakpoints, ProjectedGaussian};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = ProjectedGaussian::new(-0.5, 1.5, 1.2, 0.3)?;
    let tau = Breakpoints::new(vec![-1.0, 0.5, 2.0])?;
    let exact = conditional_risk(&interval_odds(&g, &tau)?, g.p);

    let (scores, labels) = simulate_gaussian_pair(&g, 1_000_000, 42);
    let emp = empirical_interval_risk(&scores, &labels, &tau)?;
    for (i, r) in exact.iter().enumerate() {
        let n = emp.counts[i] as f64;
        let rate = emp.rates[i].unwrap_or(f64::NAN);
        let z = (rate - r) / (r * (1.0 - r) / n).sqrt();
        println!(
            "group {}: exact {r:.5}, simulated {rate:.5} over {n} draws, z = {z:+.2}",
            i + 1
        );
    }
    Ok(())
}
