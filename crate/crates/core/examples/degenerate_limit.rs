//! Targets of exactly 0 and 1 in the outer groups are met only in the limit
//! of breakpoints running off to infinity.

use ordinal_risk::org::degenerate_demo;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ts: Vec<f64> = (1..=10).map(f64::from).collect();
    for row in degenerate_demo(1.0, 1.0, &ts)? {
        println!(
            "t = {:>4.1}  risks ({:.3e}, {}, {:.12})  deviation {:.3e}",
            row.t, row.risks[0], row.risks[1], row.risks[2], row.ird
        );
    }
    Ok(())
}
