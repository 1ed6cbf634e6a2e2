//! Rouse chain under the random-string scaling: springs grow like n^2 so the
//! slowest relaxation stays fixed, and the short-time exponent is 1/2.

use ousum::analytic::msd_finite;
use ousum::estimate::{default_windows, fit_exponent};
use ousum::model::random_string_model;

fn main() -> ousum::Result<()> {
    for n in [64, 256, 1024] {
        let model = random_string_model(n, 1.0, 1.0)?;
        let dw = default_windows(&model)?;
        let w = dw.intermediate.expect("intermediate window");
        let fit = fit_exponent(&msd_finite(&model, &w.grid(40))?, w)?;
        println!(
            "n = {n:>5}: tau_1 = {:.2e} tau_N = {:.4} nu = {:.4} on [{:.1e}, {:.1e}]",
            dw.tau1, dw.tau_n, fit.nu, w.lo, w.hi
        );
    }
    Ok(())
}
