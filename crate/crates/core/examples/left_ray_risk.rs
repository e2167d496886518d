//! Risk below a threshold is not risk inside an interval: with unequal class
//! variances the left-ray risk can fall as the threshold rises.

use ordinal_risk::risk::left_ray_risk;

fn main() {
    let (mu0, mu1, p) = (-1.0, 1.0, 0.2);
    println!("{:>6} {:>10} {:>10} {:>10}", "x", "(4, 1)", "(2, 2)", "(1, 4)");
    for i in 0..=16 {
        let x = -8.0 + i as f64;
        let q: Vec<f64> = [(4.0, 1.0), (2.0, 2.0), (1.0, 4.0)]
            .iter()
            .map(|&(s1, s0)| left_ray_risk(mu0, s0, mu1, s1, p, x))
            .collect();
        println!("{x:>6.1} {:>10.4} {:>10.4} {:>10.4}", q[0], q[1], q[2]);
    }
}
