//! Three-regime exponent profile of a power-law spectrum, and the finite
//! sum converging to the limiting MSD as n grows.

use ousum::analytic::{msd_finite, msd_limit, LimitMeasure};
use ousum::estimate::profile_check;
use ousum::model::sou_model;
use ousum::spectrum::{power_law_spectrum, ShapeFunction};

fn main() -> ousum::Result<()> {
    let shape = ShapeFunction::power_law(1.0, 2.0);
    let t = [10.0, 100.0];
    let limit = msd_limit(&shape, &LimitMeasure::Lebesgue, &t)?;
    for n in [1000, 4000, 16_000] {
        let spec = power_law_spectrum(2.0, 1.0, n)?.nonzero();
        let c = 1.0 / (n as f64).sqrt();
        let model = sou_model(spec, vec![c; n - 1], c, 1.0, 1)?;
        let (short, mid, long) = profile_check(&model)?.exponents();
        let finite = msd_finite(&model, &t)?;
        println!(
            "n = {n:>6}: nu = ({short:.3}, {mid:.3}, {long:.3})  gap to limit at t = 10, 100: {:.2e}, {:.2e}",
            (finite.values[0] - limit.values[0]).abs(),
            (finite.values[1] - limit.values[1]).abs()
        );
    }
    Ok(())
}
