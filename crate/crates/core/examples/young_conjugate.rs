//! Young functions and their numerical conjugates.
//!
//! Builds a few Young functions, tabulates the convex conjugate and checks the
//! sandwich `s <= A^{-1}(s) Ã^{-1}(s) <= 2s` on a handful of levels.
//!
//! ```bash
//! cargo run --example young_conjugate
//! ```

use orlicz_growth::young::{delta2_index, log_points, parse_function};

fn main() -> orlicz_growth::Result<()> {
    for spec in ["power:2", "power_log:2:1", "exp_poly:1"] {
        let a = parse_function(spec)?;
        let conj = a.conjugate()?;
        println!("{}  (delta2 index {:?})", a.describe(), delta2_index(&a, 1.0)?);
        for s in log_points(1e-2, 1e2, 5) {
            let prod = a.inverse(s)? * conj.inverse(s)?;
            println!("  s = {s:>9.3e}   A^-1 Ã^-1 / s = {:.6}", prod / s);
        }
    }
    Ok(())
}
