//! Sharp Sobolev conjugates of power functions.
//!
//! For `A(t) = t^p` with `p < n` the conjugate `A_n` grows like `t^{np/(n-p)}`;
//! the fitted log-log slope should reproduce that exponent.
//!
//! ```bash
//! cargo run --example sobolev_conjugate
//! ```

use orlicz_growth::sobolev::{log_log_slope, sobolev_conjugate};
use orlicz_growth::YoungFunction;

fn main() -> orlicz_growth::Result<()> {
    for (n, p) in [(3usize, 1.5), (3, 2.0), (4, 2.0), (4, 3.0), (2, 1.5)] {
        let sc = sobolev_conjugate(&YoungFunction::power(p)?, n)?;
        let nf = n as f64;
        println!(
            "n = {n}, p = {p}:  slope {:.6}  expected {:.6}",
            log_log_slope(&sc.result, 10.0, 1e4),
            nf * p / (nf - p)
        );
    }
    Ok(())
}
