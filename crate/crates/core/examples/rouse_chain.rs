//! Distinguished bead of a Rouse ring: diffusive, then subdiffusive with
//! exponent 1/2, then diffusive again once the whole chain moves together.

use ousum::analytic::msd_finite;
use ousum::estimate::{default_windows, fit_exponent, geometric_grid};
use ousum::graph::rouse_cycle;
use ousum::model::distinguished_model;

fn main() -> ousum::Result<()> {
    let n = 1024;
    let model = distinguished_model(&rouse_cycle(n, 1.0)?, 1.0, 1)?;
    let windows = default_windows(&model)?;
    println!("tau_1 = {:.4}  tau_N = {:.1}", windows.tau1, windows.tau_n);

    let curve = msd_finite(&model, &geometric_grid(1e-4, 1e8, 13))?;
    for (t, v) in curve.times.iter().zip(&curve.values) {
        println!("t = {t:>9.1e}  msd = {v:.6e}");
    }

    for (label, w) in windows.labelled() {
        let fit = fit_exponent(&msd_finite(&model, &w.grid(40))?, w)?;
        println!(
            "{label:?}: nu = {:.4} ± {:.4} on [{:.1e}, {:.1e}]",
            fit.nu, fit.stderr_nu, w.lo, w.hi
        );
    }
    Ok(())
}
