//! Random mode coefficients. The MSD scales by E[c^2] while the exponent is
//! unchanged, and the coefficient measures settle down as n grows.

use ousum::analytic::msd_finite;
use ousum::estimate::{default_windows, fit_exponent};
use ousum::model::{
    coefficient_measure, measure_convergence_diagnostic, random_coefficient_model, CoefficientDist,
};
use ousum::spectrum::circulant_spectrum;

fn main() -> ousum::Result<()> {
    let spec = circulant_spectrum(4096, &[1.0])?;
    for (name, dist) in [
        ("uniform", CoefficientDist::Uniform),
        ("lognormal", CoefficientDist::LogNormal),
    ] {
        let model = random_coefficient_model(&spec, 5, dist)?;
        let w = default_windows(&model)?
            .intermediate
            .expect("intermediate window");
        let fit = fit_exponent(&msd_finite(&model, &w.grid(40))?, w)?;
        println!(
            "{name}: E[c^2] = {:.4}, nu = {:.4} ± {:.4}",
            dist.m2(),
            fit.nu,
            fit.stderr_nu
        );
    }

    let measures = [256, 1024, 4096]
        .iter()
        .map(|&n| {
            Ok(coefficient_measure(&random_coefficient_model(
                &circulant_spectrum(n, &[1.0])?,
                1,
                CoefficientDist::Uniform,
            )?))
        })
        .collect::<ousum::Result<Vec<_>>>()?;
    let cos = |x: f64| (2.0 * std::f64::consts::PI * x).cos();
    let square = |x: f64| x * x;
    let table = measure_convergence_diagnostic(&measures, &[&|_| 1.0, &square, &cos])?;
    for (n, row) in [256, 1024, 4096].iter().zip(table) {
        println!(
            "n = {n:>5}: mass {:.4}  x^2 {:.4}  cos {:.4}",
            row[0], row[1], row[2]
        );
    }
    Ok(())
}
