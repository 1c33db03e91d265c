//! Geometric decay of the level energies and the resulting sup bound.
//!
//! Runs the worst-case recurrence at the smallness threshold, then drives the
//! same iteration with the level energies of a sampled field.
//!
//! ```bash
//! cargo run --example decay_iteration
//! ```

use orlicz_growth::degiorgi::{certified_sup_bound, iterate, sup_bound, DecayParams};
use orlicz_growth::sampled::SampledFunction;
use orlicz_growth::YoungFunction;

fn main() -> orlicz_growth::Result<()> {
    let params = DecayParams::new(3, 6.0, 2.0)?;
    println!("gamma = {}, tau = {:.3e}, eps0 = {:.3e}", params.gamma(), params.tau(), params.eps0());
    let trace = iterate(params.eps0(), &params, 1.0, 8)?;
    for row in trace.rows() {
        println!("  l = {}  J = {:.3e}  bound {:.3e}", row.l, row.j_l, row.decay_bound);
    }
    println!("verdict: {:?}", trace.verdict);

    let a = YoungFunction::power(2.0)?;
    let u = SampledFunction::radial(3, 1.0, 128, 6, &|x| 0.3 * (1.0 + x[0] - x[1] * x[2]))?.with_fd_gradient()?;
    let observed = sup_bound(&u, &a)?;
    println!("observed sup bound K = {} after {} doublings", observed.k, observed.doublings);
    let certified = certified_sup_bound(&u, &a, &params, 40)?;
    println!("certified sup bound K = {}", certified.k);
    Ok(())
}
