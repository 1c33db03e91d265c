//! The hole-filling lemma on a function that blows up at the outer radius.
//!
//! ```bash
//! cargo run --example hole_filling
//! ```

use orlicz_growth::degiorgi::{hole_filling, hole_filling_constant};

fn main() -> orlicz_growth::Result<()> {
    let (theta, alpha) = (0.5, 2.0);
    let (c, lambda) = hole_filling_constant(theta, alpha)?;
    println!("theta = {theta}, alpha = {alpha}: c = {c:.6} at lambda = {lambda:.6}");

    let z = |r: f64| 0.4 * (1.01 - r).powf(-alpha) + 0.5;
    let h = hole_filling(&z, 0.5, 1.0, theta, 1.0, 1.0, alpha, 400)?;
    println!("hypothesis holds on {} pairs: {}", h.hypothesis.pairs, h.hypothesis.holds());
    println!("conclusion holds on {} pairs: {}", h.conclusion.pairs, h.conclusion.holds());
    println!("bound at (0.5, 0.75): {:.4}, Z(0.5) = {:.4}", h.bound(0.5, 0.75), z(0.5));
    Ok(())
}
