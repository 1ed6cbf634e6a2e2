//! Exact-in-law path sampling against the analytic MSD, and a full-network
//! Euler simulation of the same bead.

use ousum::analytic::msd_finite;
use ousum::estimate::{geometric_grid, msd_from_ensemble};
use ousum::graph::rouse_cycle;
use ousum::model::distinguished_model;
use ousum::simulate::{ensemble_msd, euler_full_network, sample_paths};

fn main() -> ousum::Result<()> {
    let g = rouse_cycle(64, 1.0)?;
    let model = distinguished_model(&g, 1.0, 1)?;
    let times = geometric_grid(0.1, 100.0, 8);
    let exact = msd_finite(&model, &times)?;
    let mc = ensemble_msd(&model, &times, 20_000, 42)?;
    let se = mc.stderr.clone().unwrap_or_default();
    println!("{:>8} {:>10} {:>10} {:>8}", "t", "analytic", "sampled", "z");
    for i in 0..times.len() {
        let z = (mc.values[i] - exact.values[i]) / se[i];
        println!(
            "{:>8.3} {:>10.5} {:>10.5} {z:>8.2}",
            times[i], exact.values[i], mc.values[i]
        );
    }

    let small = sample_paths(&model, &times, 1000, 42)?;
    let from_paths = msd_from_ensemble(&small)?;
    println!(
        "1000 stored paths, msd(t_max) = {:.5}",
        from_paths.values[times.len() - 1]
    );

    let euler = euler_full_network(&g, 1.0, 1e-3, 10.0, 2000, 42)?;
    let em = msd_from_ensemble(&euler)?;
    let last = em.times.len() - 1;
    let reference = msd_finite(&model, &em.times[last..])?;
    println!(
        "euler bead at t = {:.1}: {:.5} vs exact {:.5}",
        em.times[last], em.values[last], reference.values[0]
    );
    Ok(())
}
