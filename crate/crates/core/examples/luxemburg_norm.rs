//! Modulars, Luxemburg norms and the Hölder inequality on sampled fields.
//!
//! ```bash
//! cargo run --example luxemburg_norm
//! ```

use orlicz_growth::norms::{holder_defect, luxemburg_norm, modular};
use orlicz_growth::sampled::SampledFunction;
use orlicz_growth::YoungFunction;

fn main() -> orlicz_growth::Result<()> {
    let a = YoungFunction::power_log(2.0, 1.0)?;
    let u = SampledFunction::cartesian(&[0.0, 0.0], &[1.0, 1.0], &[64, 64], &|x| (3.0 * x[0]).sin() + x[1])?;
    let v = SampledFunction::cartesian(&[0.0, 0.0], &[1.0, 1.0], &[64, 64], &|x| x[0] * x[1])?;

    let norm = luxemburg_norm(&a, &u)?;
    println!("modular of u        {:.6}", modular(&a, &u, false)?);
    println!("Luxemburg norm of u {:.6} (modular at the norm {:.9})", norm.norm, norm.modular);

    let h = holder_defect(&u, &v, &a)?;
    println!("Hölder: pairing {:.6} <= bound {:.6}", h.pairing, h.bound);
    Ok(())
}
