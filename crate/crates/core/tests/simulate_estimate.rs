use ousum::analytic::{msd_finite, msd_limit, LimitMeasure, MSDCurve, Provenance};
use ousum::estimate::{
    default_windows, fit_exponent, geometric_grid, log_growth_check, msd_from_ensemble,
    profile_check, Window,
};
use ousum::graph::{cartesian_product, circulant_chain, rouse_cycle, WeightedGraph};
use ousum::model::{
    distinguished_model, random_string_model, rouse_slowest_relaxation, sou_model, SouModel,
};
use ousum::simulate::{
    center_of_mass_paths, ensemble_msd, euler_all_beads, euler_full_network, sample_paths,
};
use ousum::spectrum::{power_law_spectrum, ShapeFunction, Spectrum};

fn single_mode(lambda: f64) -> SouModel {
    sou_model(
        Spectrum::from_parts(vec![lambda], vec![1]).unwrap(),
        vec![1.0],
        0.0,
        1.0,
        1,
    )
    .unwrap()
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

#[test]
fn single_mode_two_point_grid_is_exact() {
    let m = 100_000;
    for (lambda, t) in [(1.0, 3.0), (0.05, 0.7), (40.0, 2.0), (1e-9, 1.0)] {
        let e = sample_paths(&single_mode(lambda), &[0.0, t], m, 21).unwrap();
        let second: f64 = e.column(1, 0).iter().map(|x| x * x).sum::<f64>() / m as f64;
        let var = -(-2.0 * lambda * t).exp_m1() / (2.0 * lambda);
        let se = var * (2.0 / m as f64).sqrt();
        assert!(
            (second - var).abs() < 4.0 * se,
            "lambda {lambda}: {second} vs {var}"
        );
        assert!(e.column(0, 0).iter().all(|x| *x == 0.0));
    }
}

#[test]
fn standardized_increments_look_gaussian() {
    let model = distinguished_model(&rouse_cycle(32, 1.0).unwrap(), 1.0, 1).unwrap();
    let m = 50_000;
    let e = sample_paths(&model, &[0.5, 2.5], m, 3).unwrap();
    let inc: Vec<f64> = (0..m).map(|p| e.path(p, 0)[1] - e.path(p, 0)[0]).collect();
    let mean = inc.iter().sum::<f64>() / m as f64;
    let sd = sample_variance(&inc).sqrt();
    let z: Vec<f64> = inc.iter().map(|x| (x - mean) / sd).collect();
    let skew = z.iter().map(|x| x.powi(3)).sum::<f64>() / m as f64;
    let kurt = z.iter().map(|x| x.powi(4)).sum::<f64>() / m as f64 - 3.0;
    assert!(skew.abs() < 4.0 * (6.0 / m as f64).sqrt(), "skew {skew}");
    assert!(
        kurt.abs() < 4.0 * (24.0 / m as f64).sqrt(),
        "kurtosis {kurt}"
    );
}

#[test]
fn restricting_a_fine_grid_matches_coarse_sampling() {
    let model = distinguished_model(&rouse_cycle(16, 1.0).unwrap(), 1.0, 1).unwrap();
    let coarse = [0.5, 2.0, 8.0];
    let fine: Vec<f64> = (1..=64).map(|i| i as f64 * 0.125).collect();
    let keep: Vec<usize> = coarse
        .iter()
        .map(|t| fine.iter().position(|f| f == t).unwrap())
        .collect();
    let m = 20_000;
    let direct = ensemble_msd(&model, &coarse, m, 100).unwrap();
    let f = ensemble_msd(&model, &fine, m, 200).unwrap();
    let (sd, sf) = (direct.stderr.unwrap(), f.stderr.unwrap());
    for (i, &j) in keep.iter().enumerate() {
        let se = (sd[i].powi(2) + sf[j].powi(2)).sqrt();
        assert!((direct.values[i] - f.values[j]).abs() < 4.0 * se);
    }
}

#[test]
fn beads_of_circulant_networks_are_exchangeable() {
    let g = circulant_chain(8, &[1.0, 0.5]).unwrap();
    let beads = euler_all_beads(&g, 1.0, 1e-3, 2.0, 4000, 17).unwrap();
    let curves: Vec<MSDCurve> = beads
        .iter()
        .map(|e| msd_from_ensemble(e).unwrap())
        .collect();
    let j = curves[0].len() - 1;
    for a in &curves {
        for b in &curves {
            let se = (a.stderr.as_ref().unwrap()[j].powi(2)
                + b.stderr.as_ref().unwrap()[j].powi(2))
            .sqrt();
            assert!((a.values[j] - b.values[j]).abs() < 5.0 * se);
        }
    }
    let first = euler_full_network(&g, 1.0, 1e-3, 2.0, 4000, 17).unwrap();
    assert_eq!(first.path(123, 0), beads[0].path(123, 0));
}

#[test]
fn rouse_ensemble_matches_exact_msd() {
    let model = distinguished_model(&rouse_cycle(64, 1.0).unwrap(), 1.0, 1).unwrap();
    let times = geometric_grid(0.05, 500.0, 15);
    let mc = ensemble_msd(&model, &times, 10_000, 42).unwrap();
    let exact = msd_finite(&model, &times).unwrap();
    assert_eq!(mc.provenance, Provenance::MonteCarlo);
    for ((a, b), s) in mc
        .values
        .iter()
        .zip(&exact.values)
        .zip(mc.stderr.as_ref().unwrap())
    {
        assert!((a - b).abs() < 3.0 * s);
    }
}

#[test]
fn brownian_ensemble_msd_is_t() {
    let model = SouModel::brownian(1.0, 1.0, 1).unwrap();
    let times = [0.1, 1.0, 3.0, 10.0];
    let c = msd_from_ensemble(&sample_paths(&model, &times, 10_000, 1).unwrap()).unwrap();
    for ((t, v), s) in times.iter().zip(&c.values).zip(c.stderr.as_ref().unwrap()) {
        assert!((v - t).abs() < 3.0 * s);
    }
    let one = msd_from_ensemble(&sample_paths(&model, &times, 1, 1).unwrap()).unwrap();
    assert!(one.stderr.is_none() && !one.notes.is_empty());
}

#[test]
fn euler_agrees_with_exact_sampler() {
    let g = rouse_cycle(8, 1.0).unwrap();
    let (dt, paths) = (1e-3, 20_000);
    let euler =
        msd_from_ensemble(&euler_full_network(&g, 1.0, dt, 5.0, paths, 5).unwrap()).unwrap();
    let model = distinguished_model(&g, 1.0, 1).unwrap();
    let exact = msd_from_ensemble(&sample_paths(&model, &euler.times, paths, 6).unwrap()).unwrap();
    let lmax = 4.0;
    for j in 1..euler.len() {
        let se = (euler.stderr.as_ref().unwrap()[j].powi(2)
            + exact.stderr.as_ref().unwrap()[j].powi(2))
        .sqrt();
        let bound = (3.0 * se).max(2.0 * dt * lmax * exact.values[j]);
        assert!((euler.values[j] - exact.values[j]).abs() <= bound);
    }
}

#[test]
fn springless_beads_are_brownian() {
    let g = WeightedGraph::from_edges("free", 4, std::iter::empty()).unwrap();
    let e = euler_full_network(&g, 1.5, 0.01, 3.0, 20_000, 8).unwrap();
    let c = msd_from_ensemble(&e).unwrap();
    let last = c.len() - 1;
    let want = 1.5f64.powi(2) * c.times[last];
    assert!((c.values[last] - want).abs() < 3.0 * c.stderr.as_ref().unwrap()[last]);
}

#[test]
fn center_of_mass_diffuses_slowly() {
    let g = rouse_cycle(16, 1.0).unwrap();
    let times = geometric_grid(0.01, 100.0, 30);
    let e = center_of_mass_paths(&g, 1.0, &times, 20_000, 4).unwrap();
    let c = msd_from_ensemble(&e).unwrap();
    let j = times.iter().position(|t| (*t - 4.0).abs() < 0.5).unwrap();
    assert!((c.values[j] - times[j] / 16.0).abs() < 3.0 * c.stderr.as_ref().unwrap()[j]);
    let fit = fit_exponent(&c, Window::new(0.01, 100.0).unwrap()).unwrap();
    assert!((fit.nu - 1.0).abs() < 0.03);
    let single = WeightedGraph::from_edges("one", 1, std::iter::empty()).unwrap();
    let b =
        msd_from_ensemble(&center_of_mass_paths(&single, 1.0, &[2.0], 20_000, 4).unwrap()).unwrap();
    assert!((b.values[0] - 2.0).abs() < 3.0 * b.stderr.unwrap()[0]);
}

#[test]
fn monte_carlo_exponent_is_consistent_with_analytic_fit() {
    let model = distinguished_model(&rouse_cycle(128, 1.0).unwrap(), 1.0, 1).unwrap();
    let w = Window::new(3.0, 300.0).unwrap();
    let mc = fit_exponent(&ensemble_msd(&model, &w.grid(20), 10_000, 7).unwrap(), w).unwrap();
    let exact = fit_exponent(&msd_finite(&model, &w.grid(20)).unwrap(), w).unwrap();
    assert!(
        (mc.nu - exact.nu).abs() < 3.0 * mc.stderr_nu,
        "{} vs {} ± {}",
        mc.nu,
        exact.nu,
        mc.stderr_nu
    );
}

#[test]
fn power_law_four_limit_exponent_early_window() {
    let w = Window::new(1e2, 1e4).unwrap();
    let c = msd_limit(
        &ShapeFunction::power_law(1.0, 4.0),
        &LimitMeasure::Lebesgue,
        &w.grid(40),
    )
    .unwrap();
    assert!((fit_exponent(&c, w).unwrap().nu - 0.75).abs() < 0.02);
    let curve = MSDCurve::new(w.grid(20), w.grid(20), Provenance::AnalyticFinite, None).unwrap();
    assert_eq!(fit_exponent(&curve, w).unwrap().nu, 1.0);
}

#[test]
fn default_windows_for_named_models() {
    let rouse = distinguished_model(&rouse_cycle(1024, 1.0).unwrap(), 1.0, 1).unwrap();
    let w = default_windows(&rouse).unwrap();
    assert!((w.tau1 - 0.25).abs() < 1e-12);
    assert!((w.tau_n / rouse_slowest_relaxation(1024, 1.0) - 1.0).abs() < 1e-9);
    assert!(
        (w.tau_n / (1024f64.powi(2) / (4.0 * std::f64::consts::PI.powi(2))) - 1.0).abs() < 1e-4
    );
    assert!(w.intermediate.unwrap().decades() > 3.0);
    let n = 10_000;
    let pl = sou_model(
        power_law_spectrum(2.0, 1.0, n).unwrap().nonzero(),
        vec![0.01; n - 1],
        0.01,
        1.0,
        1,
    )
    .unwrap();
    let w = default_windows(&pl).unwrap();
    assert!((w.tau_n / (n as f64).powi(2) - 1.0).abs() < 1e-9);
    assert!((w.tau_n / w.tau1 / (n as f64).powi(2) - 1.0).abs() < 1e-3);
}

#[test]
fn power_law_four_profile() {
    let n = 10_000;
    let c = 1.0 / (n as f64).sqrt();
    let m = sou_model(
        power_law_spectrum(4.0, 1.0, n).unwrap().nonzero(),
        vec![c; n - 1],
        c,
        1.0,
        1,
    )
    .unwrap();
    let (a, b, l) = profile_check(&m).unwrap().exponents();
    assert!(
        (a - 1.0).abs() < 0.03 && (b - 0.75).abs() < 0.03 && (l - 1.0).abs() < 0.03,
        "{a} {b} {l}"
    );
}

#[test]
fn finite_torus_grows_logarithmically() {
    let g = cartesian_product(
        &rouse_cycle(64, 1.0).unwrap(),
        &rouse_cycle(64, 1.0).unwrap(),
    )
    .unwrap();
    let m = distinguished_model(&g, 1.0, 1).unwrap();
    let w = default_windows(&m).unwrap().intermediate.unwrap();
    let c = msd_finite(&m, &w.grid(40)).unwrap();
    let check = log_growth_check(&c, w).unwrap();
    assert!(check.log_wins, "{check:?}");
}

#[test]
fn rescaled_string_is_anomalous_at_short_times() {
    let m = random_string_model(256, 1.0, 1.0).unwrap();
    assert!(m.flags().short_time_anomalous);
    let w = default_windows(&m).unwrap();
    assert!((w.tau1 * 4.0 * 256f64.powi(2) - 1.0).abs() < 1e-12);
    assert!(w.tau_n < 0.03);
    let win = w.intermediate.unwrap();
    let fit = fit_exponent(&msd_finite(&m, &win.grid(40)).unwrap(), win).unwrap();
    assert!((fit.nu - 0.5).abs() < 0.05, "{}", fit.nu);
    let small = random_string_model(3, 1.0, 1.0).unwrap();
    let c = msd_finite(&small, &[1e-3, 1.0, 1e3]).unwrap();
    assert!(c.values.iter().all(|v| v.is_finite() && *v > 0.0));
}
