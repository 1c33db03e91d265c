//! Searching the constant of the modular Sobolev-Poincaré inequality.
//!
//! Finds the smallest `kappa = 2^k / 8` that makes the inequality hold on a
//! small basket of fields on the unit disc, then prints each defect.
//!
//! ```bash
//! cargo run --example sobolev_poincare
//! ```

use orlicz_growth::norms::SobolevPoincare;
use orlicz_growth::sampled::SampledFunction;
use orlicz_growth::YoungFunction;

fn main() -> orlicz_growth::Result<()> {
    let sp = SobolevPoincare::new(&YoungFunction::power(1.5)?, 2)?;
    let fields: [(&str, &dyn Fn(&[f64]) -> f64); 3] = [
        ("linear", &|x| x[0]),
        ("cone", &|x| x[0].hypot(x[1])),
        ("bump", &|x| (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0).powi(2)),
    ];
    let mut seeds = Vec::new();
    for (_, f) in &fields {
        seeds.push(SampledFunction::radial(2, 1.0, 96, 6, *f)?.with_fd_gradient()?);
    }
    let Some(kappa) = sp.search_kappa(&seeds, 1e-6)? else {
        println!("no kappa on the search grid");
        return Ok(());
    };
    println!("kappa = {kappa}");
    for ((name, _), u) in fields.iter().zip(&seeds) {
        let e = sp.evaluate(u, kappa)?;
        println!("  {name:<7} rhs {:.4e}  lhs {:.4e}  defect {:.4e}", e.rhs, e.lhs, e.defect);
    }
    Ok(())
}
