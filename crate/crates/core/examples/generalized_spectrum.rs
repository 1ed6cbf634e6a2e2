//! Spectra with a prescribed small-eigenvalue exponent rho and the exponent
//! nu = 1 - 1/rho they produce, checked against the limiting MSD.

use ousum::analytic::{msd_limit, shape_prediction, LimitMeasure, Regime};
use ousum::estimate::{fit_exponent, log_growth_check, Window};
use ousum::spectrum::{estimate_rho, power_law_spectrum, ShapeFunction};

fn main() -> ousum::Result<()> {
    let window = Window::new(1e4, 1e6)?;
    for rho in [0.5, 1.0, 1.5, 2.0, 4.0] {
        let shape = ShapeFunction::power_law(1.0, rho);
        let (r, a0) = estimate_rho(&shape, (1e-4, 1e-2))?;
        let pred = shape_prediction(&shape)?;
        let curve = msd_limit(&shape, &LimitMeasure::Lebesgue, &window.grid(40))?;
        match pred.regime {
            Regime::Anomalous => {
                let fit = fit_exponent(&curve, window)?;
                println!(
                    "rho = {r:.3} a0 = {a0:.3}: predicted nu = {:.4}, fitted {:.4}",
                    pred.nu, fit.nu
                );
            }
            Regime::Logarithmic => {
                let lg = log_growth_check(&curve, window)?;
                println!(
                    "rho = {r:.3}: logarithmic, slope {:.4}, ln t beats powers: {}",
                    lg.slope, lg.log_wins
                );
            }
            Regime::Bounded => {
                let last = curve.values.last().copied().unwrap_or(0.0);
                println!("rho = {r:.3}: bounded, msd({:.0e}) = {last:.5}", window.hi);
            }
        }
    }

    let spec = power_law_spectrum(4.0, 1.0, 1000)?;
    let tau_n = 1.0 / spec.min_positive().unwrap_or(f64::NAN);
    println!(
        "power-law spectrum, n = 1000, rho = 4: {} modes, tau_N = {tau_n:.3e}",
        spec.n_modes()
    );
    Ok(())
}
