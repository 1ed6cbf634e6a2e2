//! Cartesian products of rings. Their spectra are pairwise sums and the
//! distinguished bead of a two-dimensional torus spreads logarithmically.

use ousum::analytic::{msd_finite, msd_limit_product};
use ousum::estimate::{geometric_grid, log_growth_check, Window};
use ousum::graph::{cartesian_product, rouse_cycle};
use ousum::model::distinguished_model;
use ousum::spectrum::{graph_spectrum, ProductShape, ShapeFunction};

fn main() -> ousum::Result<()> {
    let ring = rouse_cycle(4, 1.0)?;
    let small = graph_spectrum(&cartesian_product(&ring, &ring)?)?;
    println!(
        "4x4 torus: values {:?} multiplicities {:?}",
        small.values(),
        small.multiplicities()
    );

    let torus = cartesian_product(&rouse_cycle(64, 1.0)?, &rouse_cycle(64, 1.0)?)?;
    let model = distinguished_model(&torus, 1.0, 1)?;
    let times = geometric_grid(1.0, 1e3, 31);
    let finite = msd_finite(&model, &times)?;
    let limit = msd_limit_product(&ProductShape::power(ShapeFunction::rouse(1.0), 2)?, &times)?;
    let lg = log_growth_check(&limit, Window::new(10.0, 1e3)?)?;
    for i in [0, 10, 20, 30] {
        println!(
            "t = {:>6.0}: 64x64 torus {:.5}  limit {:.5}",
            times[i], finite.values[i], limit.values[i]
        );
    }
    println!(
        "limit slope in ln t: {:.5} (r2 {:.6}), ln t beats powers: {}",
        lg.slope, lg.r2_log, lg.log_wins
    );
    Ok(())
}
