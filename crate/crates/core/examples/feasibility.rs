//! Checks the boundary conditions that zero deviation requires, for a
//! partition that can meet its targets and for one that cannot.

use ordinal_risk::risk::{assess, feasibility_bounds};
use ordinal_risk::{Breakpoints, Norm, ProjectedGaussian, RiskSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = ProjectedGaussian::new(-1.0, 1.0, 1.0, 0.5)?;
    let spec = RiskSpec::new(vec![0.1, 0.5, 0.9], 1e-7, Norm::Euclidean)?;

    for tau in [vec![-1.2, 1.2], vec![0.5, 3.0]] {
        let bp = Breakpoints::new(tau.clone())?;
        let report = feasibility_bounds(&g, &bp, &spec);
        println!("tau = {tau:?}");
        for c in &report.checks {
            println!(
                "  interval {} starts at {:>5.2}: posterior {:.4} vs r {:.2}, ratio {:.4} vs {:.4} -> {}",
                c.interval, c.boundary, c.lhs, c.rhs, c.lr_lhs, c.lr_rhs, c.satisfied
            );
        }
        let a = assess(&g, &bp, &spec)?;
        println!("  risks {:.4?}, deviation {:.4}\n", a.risks, a.ird);
    }
    Ok(())
}
