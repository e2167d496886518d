//! Converts interval targets to the left-ray targets a quantile-style method
//! would need, and back.

use ordinal_risk::risk::{q_to_r, r_to_q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let r = [0.02, 0.1, 0.5, 0.9];
    let masses = [0.4, 0.3, 0.2, 0.1];
    let q = r_to_q(&r, &masses)?;
    println!("interval targets  {r:?}");
    println!("group masses      {masses:?}");
    println!("left-ray targets  {q:.4?}");
    println!("round trip        {:.4?}", q_to_r(&q, &masses)?);
    Ok(())
}
