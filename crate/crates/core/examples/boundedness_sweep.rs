//! Interior sup of discrete minimizers across growth pairs and refinements.
//!
//! ```bash
//! cargo run --release --example boundedness_sweep
//! ```

use orlicz_growth::harness::{boundedness_sweep, SweepOptions};

fn main() -> orlicz_growth::Result<()> {
    let rows = boundedness_sweep(2, &[2.0], &[2.0, 3.0, 4.0], &[8, 16], &SweepOptions::default())?;
    println!("{:>4} {:>4} {:>6} {:>12} {}", "p", "q", "cells", "interior sup", "verdict");
    for r in rows {
        println!("{:>4} {:>4} {:>6} {:>12.6} {}", r.p, r.q, r.refinement, r.interior_sup, r.verdict);
    }
    Ok(())
}
