//! Highly connected networks. Every nonzero mode of the complete graph has
//! the same rate, and the hypercube's rates concentrate as the dimension grows,
//! so a bead behaves like a single OU mode plus a vanishing Brownian part.

use ousum::analytic::msd_finite;
use ousum::estimate::linear_grid;
use ousum::graph::{complete_graph_normalized, hypercube_normalized};
use ousum::model::distinguished_model;
use ousum::spectrum::graph_spectrum;

fn main() -> ousum::Result<()> {
    let times = linear_grid(0.25, 5.0, 20);
    let complete = distinguished_model(&complete_graph_normalized(512)?, 1.0, 1)?;
    let cube = distinguished_model(&hypercube_normalized(12)?, 1.0, 1)?;
    let spec = graph_spectrum(&hypercube_normalized(12)?)?;
    println!("hypercube(12): values {:?}", spec.values());
    let a = msd_finite(&complete, &times)?;
    let b = msd_finite(&cube, &times)?;
    println!(
        "{:>6} {:>10} {:>10} {:>10}",
        "t", "complete", "hypercube", "ou limit"
    );
    for (i, t) in times.iter().enumerate() {
        let ou = (1.0 - (-2.0 * t).exp()) / 2.0;
        println!(
            "{t:>6.2} {:>10.5} {:>10.5} {ou:>10.5}",
            a.values[i], b.values[i]
        );
    }
    Ok(())
}
