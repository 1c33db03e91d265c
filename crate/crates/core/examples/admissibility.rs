//! Admissibility of power growth pairs in three dimensions.
//!
//! With `A(t) = t^1.5` the sharp exponent for `B` is 6; pairs well below it
//! are admissible, pairs well above it are not, and pairs within the margin
//! are reported as boundary cases.
//!
//! ```bash
//! cargo run --example admissibility
//! ```

use orlicz_growth::admissibility::{analyze, power_log_thresholds, GrowthSpec};
use orlicz_growth::YoungFunction;

fn main() -> orlicz_growth::Result<()> {
    let t = power_log_thresholds(3, 1.5, 1.0)?;
    println!("A = t^1.5 log(t): B may grow up to t^{:?} log(t)^{:?}", t.b_exponent, t.b_log_exponent);

    for q in [2.0, 5.5, 6.02, 7.0] {
        let spec = GrowthSpec::new(YoungFunction::power(1.5)?, YoungFunction::power(q)?, 3);
        let verdict = analyze(&spec)?;
        println!("B = t^{q:<5} -> {:?} (exit code {})", verdict.outcome, verdict.outcome.exit_code());
    }
    Ok(())
}
