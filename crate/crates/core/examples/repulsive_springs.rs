//! Next-nearest-neighbour springs of negative stiffness flatten the
//! spectrum near zero: order m gives rho = 2m and nu = 1 - 1/(2m).

use ousum::analytic::msd_finite;
use ousum::estimate::{default_windows, fit_exponent};
use ousum::graph::{repulsive_circulant, repulsive_weights};
use ousum::model::distinguished_model;
use ousum::spectrum::{estimate_rho, ShapeFunction};

fn main() -> ousum::Result<()> {
    for order in 1..=3 {
        let weights = repulsive_weights(order)?;
        let (rho, _) = estimate_rho(&ShapeFunction::circulant(&weights), (1e-4, 1e-2))?;
        let model = distinguished_model(&repulsive_circulant(4096, order)?, 1.0, 1)?;
        let w = default_windows(&model)?
            .intermediate
            .expect("wide separation of scales");
        let fit = fit_exponent(&msd_finite(&model, &w.grid(40))?, w)?;
        println!(
            "order {order}: weights {weights:.3?} rho = {rho:.3} nu = {:.4} (expected {:.4})",
            fit.nu,
            1.0 - 1.0 / (2.0 * order as f64)
        );
    }
    Ok(())
}
