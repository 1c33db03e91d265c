//! Good-radii cutoff between two balls for a cone in three dimensions.
//!
//! ```bash
//! cargo run --example optimized_cutoff
//! ```

use orlicz_growth::degiorgi::{calibrate_sphere_kappa, optimized_cutoff, CutoffConstants, CutoffRegime};
use orlicz_growth::sampled::SampledFunction;
use orlicz_growth::YoungFunction;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn main() -> orlicz_growth::Result<()> {
    let u = SampledFunction::radial(3, 1.0, 256, 6, &norm)?.with_gradient(&|x| {
        let r = norm(x);
        x.iter().map(|v| v / r).collect()
    });
    let (a, b) = (YoungFunction::power(3.0)?, YoungFunction::power(4.0)?);
    let regime = CutoffRegime::Supercritical;
    let kappa = calibrate_sphere_kappa(std::slice::from_ref(&u), &a, None, 4.0, 0.5, 0.75, regime)?;
    let r = optimized_cutoff(&u, &a, &b, 0.5, 0.75, regime, CutoffConstants { q: 4.0, l: 1.0, kappa })?;

    println!("good shells {}/{}  |U| = {:.4}", r.good_count, r.shell_count, r.good_measure * r.shell_width);
    println!("max |grad eta| = {:.4} <= {:.4}", r.eta_gradient_max / r.shell_width, 2.0 / (r.annulus_width * r.shell_width));
    println!("int B(|u grad eta|) = {:.4e} <= {:.4e} (kappa = {kappa})", r.lhs, r.bound);
    Ok(())
}
