//! Acceptance criteria 1 through 10.
//!
//! Runs without the libtest harness so every criterion is evaluated and
//! printed as one `PASS`/`FAIL` line; the process exits nonzero when any
//! line fails. Supplementary `INFO` lines carry diagnostics.

use std::time::Instant;

use ousum::analytic::{
    acf_gram, cholesky_with_jitter, msd_finite, msd_limit, msd_limit_product, phi_laplace,
    tightness_bound_check, LimitMeasure,
};
use ousum::cli::{cmd_run, ExperimentConfig};
use ousum::estimate::{
    default_windows, fit_exponent, msd_from_ensemble, plateau_ratio, profile_check, Window,
};
use ousum::graph::{
    cartesian_product, circulant_chain, complete_graph, hypercube, hypercube_normalized,
    repulsive_circulant, repulsive_weights, rouse_cycle, WeightedGraph,
};
use ousum::model::{
    coefficient_measure, distinguished_model, random_coefficient_model, random_string_model,
    sou_model, CoefficientDist, SouModel,
};
use ousum::report::{render_csv, report_rows};
use ousum::simulate::{ensemble_msd, euler_full_network, sample_paths};
use ousum::spectrum::{
    circulant_spectrum, closed_form_eigenvalues, eig_spectrum, estimate_rho, graph_spectrum,
    power_law_spectrum, ProductShape, ShapeFunction,
};
use ousum::{io, report};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

const FIT_POINTS: usize = 40;

struct Ledger {
    failed: Vec<String>,
}

impl Ledger {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} {id:<4} {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }

    fn info(&self, id: &str, detail: String) {
        println!("INFO {id:<4} {detail}");
    }
}

fn limit_fit(shape: &ShapeFunction, w: Window) -> f64 {
    let c = msd_limit(shape, &LimitMeasure::Lebesgue, &w.grid(FIT_POINTS)).unwrap();
    fit_exponent(&c, w).unwrap().nu
}

fn c1(l: &mut Ledger) {
    let start = Instant::now();
    let nu = limit_fit(&ShapeFunction::rouse(1.0), Window::new(1e2, 1e4).unwrap());
    let secs = start.elapsed().as_secs_f64();
    l.line(
        "1",
        (nu - 0.5).abs() <= 0.02 && secs < 10.0,
        format!(
            "rouse limit exponent on [1e2, 1e4]: nu = {nu:.5} (0.50 ± 0.02), {secs:.2} s (< 10 s)"
        ),
    );
}

fn c2(l: &mut Ledger) {
    let start = Instant::now();
    let m = distinguished_model(&rouse_cycle(4096, 1.0).unwrap(), 1.0, 1).unwrap();
    let p = profile_check(&m).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (a, b, c) = (p.short.nu, p.intermediate.nu, p.long.nu);
    let ok = (a - 1.0).abs() <= 0.03
        && (b - 0.5).abs() <= 0.03
        && (c - 1.0).abs() <= 0.03
        && secs < 30.0;
    l.line(
        "2",
        ok,
        format!("rouse n = 4096 profile: ({a:.4}, {b:.4}, {c:.4}) vs (1, 0.5, 1) ± 0.03, {secs:.2} s (< 30 s)"),
    );
}

fn c3(l: &mut Ledger) {
    let w = Window::new(1e4, 1e6).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (rho, nu) in [(1.5, 1.0 / 3.0), (2.0, 0.5), (4.0, 0.75)] {
        let got = limit_fit(&ShapeFunction::power_law(1.0, rho), w);
        ok &= (got - nu).abs() <= 0.02;
        parts.push(format!("rho {rho}: {got:.4} vs {nu:.4}"));
    }
    let tau1 = 1.0;
    let c = msd_limit(
        &ShapeFunction::power_law(1.0, 0.5),
        &LimitMeasure::Lebesgue,
        &[1e4 * tau1, 1e6 * tau1],
    )
    .unwrap();
    let ratio = plateau_ratio(&c).unwrap();
    ok &= ratio < 1.05;
    l.line(
        "3",
        ok,
        format!("power-law exponents on [1e4, 1e6] (± 0.02): {}; rho 0.5 plateau ratio {ratio:.5} (< 1.05)", parts.join(", ")),
    );
    let early = limit_fit(
        &ShapeFunction::power_law(1.0, 1.5),
        Window::new(1e2, 1e4).unwrap(),
    );
    l.info(
        "3",
        format!("rho 1.5 on [1e2, 1e4] gives {early:.4}; the t^(1/3) regime is reached later"),
    );
}

fn c4(l: &mut Ledger) {
    let s2 = ShapeFunction::circulant(&repulsive_weights(2).unwrap());
    let s3 = ShapeFunction::circulant(&repulsive_weights(3).unwrap());
    let (rho, _) = estimate_rho(&s2, (1e-4, 1e-2)).unwrap();
    let w = Window::new(1e4, 1e6).unwrap();
    let nu2 = limit_fit(&s2, w);
    let nu3 = limit_fit(&s3, w);
    let ok =
        (rho - 4.0).abs() <= 0.1 && (nu2 - 0.75).abs() <= 0.02 && (nu3 - 5.0 / 6.0).abs() <= 0.02;
    l.line(
        "4",
        ok,
        format!(
            "repulsive order 2: rho = {rho:.4} (4 ± 0.1), nu = {nu2:.4} (0.75 ± 0.02); order 3: nu = {nu3:.4} (0.8333 ± 0.02)"
        ),
    );
}

fn c5(l: &mut Ledger) {
    let w = Window::new(1e3, 1e5).unwrap();
    let torus = ProductShape::power(ShapeFunction::rouse(1.0), 2).unwrap();
    let curve = msd_limit_product(&torus, &w.grid(FIT_POINTS)).unwrap();
    let ratios: Vec<f64> = curve
        .times
        .iter()
        .zip(&curve.values)
        .map(|(t, v)| v / t.ln())
        .collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let variation = hi / lo - 1.0;
    l.line(
        "5a",
        variation < 0.05,
        format!(
            "2-D torus MSD(t)/ln t over [1e3, 1e5] varies by {:.2}% (< 5%)",
            100.0 * variation
        ),
    );
    let g = ousum::estimate::log_growth_check(&curve, w).unwrap();
    let n = curve.len() as f64;
    let (sx, sy) = curve
        .times
        .iter()
        .zip(&curve.values)
        .fold((0.0, 0.0), |(a, b), (t, v)| (a + t.ln(), b + v));
    let intercept = (sy - g.slope * sx) / n;
    l.info(
        "5a",
        format!(
            "MSD = {:.5} ln t + {intercept:.5}; affine ln t r2 = {:.8} vs best power (nu = {:.2}) r2 = {:.8}",
            g.slope, g.r2_log, g.best_nu, g.best_power_r2
        ),
    );
    let cube = ProductShape::power(ShapeFunction::rouse(1.0), 3).unwrap();
    let tau1 = 1.0 / 12.0;
    let c = msd_limit_product(&cube, &[1e4 * tau1, 1e6 * tau1]).unwrap();
    let ratio = plateau_ratio(&c).unwrap();
    l.line(
        "5b",
        ratio < 1.05,
        format!("3-D product plateau ratio MSD(1e6 tau1)/MSD(1e4 tau1) = {ratio:.5} (< 1.05)"),
    );
}

fn closed_vs_dense(g: &WeightedGraph) -> f64 {
    let mut closed = closed_form_eigenvalues(g).expect("closed form");
    closed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let dense = eig_spectrum(&g.laplacian().unwrap()).unwrap().flattened();
    let scale = dense.iter().cloned().fold(0.0, f64::max);
    closed
        .iter()
        .zip(&dense)
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max)
}

fn binomial(n: u64, k: u64) -> usize {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1)) as usize
}

fn c6(l: &mut Ledger) {
    let cases = [
        circulant_chain(1024, &[1.0, 0.5, 0.25]).unwrap(),
        repulsive_circulant(512, 2).unwrap(),
        complete_graph(1000, 0.37).unwrap(),
        hypercube(10, 0.7).unwrap(),
        cartesian_product(
            &rouse_cycle(32, 1.0).unwrap(),
            &rouse_cycle(32, 2.0).unwrap(),
        )
        .unwrap(),
        cartesian_product(
            &complete_graph(8, 1.0).unwrap(),
            &hypercube(7, 1.0).unwrap(),
        )
        .unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for g in &cases {
        worst = worst.max(closed_vs_dense(g));
    }
    let complete = eig_spectrum(&complete_graph(1000, 0.37).unwrap().laplacian().unwrap()).unwrap();
    let mult_complete = complete.multiplicities() == [1, 999];
    let cube = eig_spectrum(&hypercube(10, 0.7).unwrap().laplacian().unwrap()).unwrap();
    let expect: Vec<usize> = (0..=10).map(|k| binomial(10, k)).collect();
    let mult_cube = cube.multiplicities() == expect.as_slice();
    l.line(
        "6",
        worst <= 1e-9 && mult_complete && mult_cube,
        format!(
            "closed forms vs dense eigensolve, {} families up to n = 1024: max relative error {worst:.2e} (<= 1e-9); \
             complete multiplicities {{1, N-1}}: {mult_complete}; hypercube binomial: {mult_cube}",
            cases.len()
        ),
    );
}

fn c7(l: &mut Ledger) {
    let times: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
    let stated = |t: f64| 1.0 - (-t).exp();
    let exact = |t: f64| -(-2.0 * t).exp_m1() / 2.0;
    let max_err = |values: &[f64], f: &dyn Fn(f64) -> f64| {
        times
            .iter()
            .zip(values)
            .map(|(t, v)| (v - f(*t)).abs())
            .fold(0.0, f64::max)
    };
    let complete = msd_limit(
        &ShapeFunction::power_law(1.0, 1.0),
        &LimitMeasure::Dirac { x0: 1.0 },
        &times,
    )
    .unwrap();
    let cube = msd_limit(
        &ShapeFunction::power_law(2.0, 1.0),
        &LimitMeasure::Dirac { x0: 0.5 },
        &times,
    )
    .unwrap();
    let finite = msd_finite(
        &distinguished_model(&hypercube_normalized(12).unwrap(), 1.0, 1).unwrap(),
        &times,
    )
    .unwrap();
    let e_complete = max_err(&complete.values, &stated);
    let e_cube = max_err(&cube.values, &stated);
    let e_finite = max_err(&finite.values, &stated);
    l.line(
        "7",
        e_complete <= 1e-6 && e_cube <= 1e-6 && e_finite <= 1e-2,
        format!(
            "limit curves vs 1 - exp(-t) at 20 points: complete {e_complete:.3e}, hypercube {e_cube:.3e} (<= 1e-6); \
             hypercube n_dims = 12 finite {e_finite:.3e} (<= 1e-2)"
        ),
    );
    l.info(
        "7",
        format!(
            "same curves vs (1 - exp(-2t))/2: complete {:.3e}, hypercube {:.3e}, hypercube n_dims = 12 finite {:.3e}",
            max_err(&complete.values, &exact),
            max_err(&cube.values, &exact),
            max_err(&finite.values, &exact)
        ),
    );
}

fn c8(l: &mut Ledger) {
    let start = Instant::now();
    let m = distinguished_model(&rouse_cycle(128, 1.0).unwrap(), 1.0, 1).unwrap();
    let times = ousum::estimate::geometric_grid(0.01, 1e3, 20);
    let mc = ensemble_msd(&m, &times, 10_000, 7).unwrap();
    let exact = msd_finite(&m, &times).unwrap();
    let se = mc.stderr.as_ref().unwrap();
    let worst_z = mc
        .values
        .iter()
        .zip(&exact.values)
        .zip(se)
        .map(|((a, b), s)| (a - b).abs() / s)
        .fold(0.0, f64::max);
    let g = rouse_cycle(8, 1.0).unwrap();
    let (dt, paths) = (1e-3, 20_000);
    let euler =
        msd_from_ensemble(&euler_full_network(&g, 1.0, dt, 5.0, paths, 11).unwrap()).unwrap();
    let lmax = graph_spectrum(&g).unwrap().max().unwrap();
    let m8 = distinguished_model(&g, 1.0, 1).unwrap();
    let exact8 = msd_from_ensemble(&sample_paths(&m8, &euler.times, paths, 13).unwrap()).unwrap();
    let (se_e, se_x) = (
        euler.stderr.as_ref().unwrap(),
        exact8.stderr.as_ref().unwrap(),
    );
    let mut euler_ok = true;
    let mut worst_gap: f64 = 0.0;
    for j in 1..euler.len() {
        let se = (se_e[j].powi(2) + se_x[j].powi(2)).sqrt();
        let bound = (3.0 * se).max(2.0 * dt * lmax * exact8.values[j]);
        let gap = (euler.values[j] - exact8.values[j]).abs();
        worst_gap = worst_gap.max(gap / bound);
        euler_ok &= gap <= bound;
    }
    let secs = start.elapsed().as_secs_f64();
    l.line(
        "8",
        worst_z <= 3.0 && euler_ok && secs < 300.0,
        format!(
            "rouse n = 128, 1e4 paths: max |MC - exact|/SE = {worst_z:.3} over 20 points (<= 3); \
             euler n = 8 vs exact: max gap/bound = {worst_gap:.3} (<= 1); {secs:.1} s (< 300 s)"
        ),
    );
}

fn c9(l: &mut Ledger) {
    let spec = circulant_spectrum(4096, &[1.0]).unwrap();
    let mut nus = Vec::new();
    for seed in 1..=5 {
        let m = random_coefficient_model(&spec, seed, CoefficientDist::Uniform).unwrap();
        let w = default_windows(&m).unwrap().intermediate.unwrap();
        let c = msd_finite(&m, &w.grid(FIT_POINTS)).unwrap();
        nus.push(fit_exponent(&c, w).unwrap().nu);
    }
    let nu_ok = nus.iter().all(|nu| (nu - 0.5).abs() <= 0.03);
    let seeds = 512;
    let variance = |n: usize| {
        let spec = circulant_spectrum(n, &[1.0]).unwrap();
        let vals: Vec<f64> = (0..seeds)
            .map(|s| {
                let m =
                    random_coefficient_model(&spec, 1000 + s, CoefficientDist::Uniform).unwrap();
                coefficient_measure(&m).integrate(|x| x)
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64
    };
    let ratio = variance(4096) / variance(8192);
    l.line(
        "9",
        nu_ok && (ratio - 2.0).abs() <= 0.5,
        format!(
            "random uniform coefficients, n = 4096, 5 seeds: nu = [{}] (0.50 ± 0.03); \
             Var(int x dmu) ratio n = 4096 / 8192 over {seeds} seeds = {ratio:.3} (2 ± 25%)",
            nus.iter()
                .map(|v| format!("{v:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
}

fn families() -> Vec<(&'static str, SouModel)> {
    let rouse = distinguished_model(&rouse_cycle(64, 1.0).unwrap(), 1.0, 1).unwrap();
    vec![
        ("rouse-64", rouse),
        (
            "power-law-4",
            sou_model(
                power_law_spectrum(4.0, 1.0, 256).unwrap().nonzero(),
                vec![1.0 / 16.0; 255],
                1.0 / 16.0,
                1.0,
                1,
            )
            .unwrap(),
        ),
        (
            "repulsive-2",
            distinguished_model(&repulsive_circulant(64, 2).unwrap(), 1.0, 1).unwrap(),
        ),
        (
            "complete-16",
            distinguished_model(&complete_graph(16, 1.0 / 15.0).unwrap(), 1.0, 1).unwrap(),
        ),
        (
            "hypercube-6",
            distinguished_model(&hypercube_normalized(6).unwrap(), 1.0, 2).unwrap(),
        ),
        (
            "torus-8x8",
            distinguished_model(
                &cartesian_product(&rouse_cycle(8, 1.0).unwrap(), &rouse_cycle(8, 1.0).unwrap())
                    .unwrap(),
                1.5,
                1,
            )
            .unwrap(),
        ),
        (
            "random-lognormal",
            random_coefficient_model(
                &circulant_spectrum(128, &[1.0]).unwrap(),
                3,
                CoefficientDist::LogNormal,
            )
            .unwrap(),
        ),
        (
            "random-string-32",
            random_string_model(32, 1.0, 1.0).unwrap(),
        ),
        ("brownian", SouModel::brownian(1.0, 1.0, 1).unwrap()),
    ]
}

fn c10(l: &mut Ledger) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let fams = families();
    let mut gram_ok = true;
    let mut tight_ok = true;
    for (name, m) in &fams {
        for _ in 0..100 {
            let mut t: Vec<f64> = (0..8)
                .map(|_| 10f64.powf(rng.random_range(-3.0..3.0)))
                .collect();
            t.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if !cholesky_with_jitter(&acf_gram(m, &t).unwrap()) {
                gram_ok = false;
                l.info(
                    "10",
                    format!("Gram matrix not factorizable for {name} at {t:?}"),
                );
            }
            let (a, b) = (
                10f64.powf(rng.random_range(-3.0..3.0)),
                10f64.powf(rng.random_range(-3.0..3.0)),
            );
            if !tightness_bound_check(m, a, b).unwrap().pass {
                tight_ok = false;
                l.info(
                    "10",
                    format!("tightness bound violated for {name} at ({a}, {b})"),
                );
            }
        }
    }
    let mut laplace_worst: f64 = 0.0;
    for rho in [2.0, 3.0, 4.0] {
        for a0 in [1.0, 4.0 * std::f64::consts::PI.powi(2)] {
            let s = 1e6;
            let got = phi_laplace(&ShapeFunction::power_law(a0, rho), s).unwrap()
                * (2.0 * a0 * s).powf(1.0 / rho);
            let want = gamma(1.0 / rho) / rho;
            laplace_worst = laplace_worst.max((got / want - 1.0).abs());
        }
    }
    let reruns = determinism();
    l.line(
        "10",
        gram_ok && tight_ok && laplace_worst <= 0.01 && reruns.is_empty(),
        format!(
            "{} families x 100 trials: Gram Cholesky {gram_ok}, fourth-moment bound {tight_ok}; \
             Laplace constant max relative error {laplace_worst:.2e} (<= 1e-2); byte-identical reruns: {}",
            fams.len(),
            if reruns.is_empty() { "all".to_string() } else { format!("differ in {}", reruns.join(", ")) }
        ),
    );
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn determinism() -> Vec<&'static str> {
    let mut differ = Vec::new();
    let m = distinguished_model(&rouse_cycle(64, 1.0).unwrap(), 1.0, 2).unwrap();
    let times = ousum::estimate::geometric_grid(0.01, 100.0, 12);
    let csv = |c: &ousum::analytic::MSDCurve| {
        io::curve_csv_string(c, &io::header(c.provenance, &[])).unwrap()
    };
    let runs: Vec<String> = [1, 3, 8]
        .iter()
        .map(|&k| in_pool(k, || csv(&ensemble_msd(&m, &times, 3000, 5).unwrap())))
        .collect();
    if runs.windows(2).any(|w| w[0] != w[1]) {
        differ.push("ensemble_msd");
    }
    let paths: Vec<Vec<f64>> = [1, 4]
        .iter()
        .map(|&k| {
            in_pool(k, || {
                sample_paths(&m, &times, 200, 5)
                    .unwrap()
                    .column(5, 1)
                    .to_vec()
            })
        })
        .collect();
    if paths[0]
        .iter()
        .zip(&paths[1])
        .any(|(a, b)| a.to_bits() != b.to_bits())
    {
        differ.push("sample_paths");
    }
    let streamed = ensemble_msd(&m, &times, 3000, 5).unwrap();
    let stored = msd_from_ensemble(&sample_paths(&m, &times, 3000, 5).unwrap()).unwrap();
    if streamed
        .values
        .iter()
        .zip(&stored.values)
        .any(|(a, b)| (a - b).abs() > 1e-12 * b)
    {
        differ.push("streamed vs stored ensemble");
    }
    let text = r#"
method = "monte-carlo"
n_paths = 2000
seed = 7
windows = [[0.1, 10.0]]

[model.network]
family = "rouse"
n = 32

[grid]
t_min = 0.01
t_max = 100.0
n_points = 20
"#;
    let outputs: Vec<(String, String)> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let mut cfg = ExperimentConfig::from_toml(text).unwrap();
            cfg.output.dir = dir.path().to_path_buf();
            cmd_run(&cfg, &mut Vec::new()).unwrap();
            (
                std::fs::read_to_string(dir.path().join("msd.csv")).unwrap(),
                std::fs::read_to_string(dir.path().join("fit.json")).unwrap(),
            )
        })
        .collect();
    if outputs[0] != outputs[1] {
        differ.push("run artifacts");
    }
    let rows = [
        report_rows(&["power-law-0.5".into()]).unwrap(),
        report_rows(&["power-law-0.5".into()]).unwrap(),
    ];
    let header = io::header(
        ousum::analytic::Provenance::AnalyticLimit,
        &[("seed", "7".into())],
    );
    if render_csv(&rows[0], &header) != render_csv(&rows[1], &header)
        || report::render_markdown(&rows[0]) != report::render_markdown(&rows[1])
    {
        differ.push("report");
    }
    differ
}

type Criterion = (&'static str, fn(&mut Ledger));

fn main() {
    let mut l = Ledger { failed: Vec::new() };
    let criteria: [Criterion; 10] = [
        ("1", c1),
        ("2", c2),
        ("3", c3),
        ("4", c4),
        ("5", c5),
        ("6", c6),
        ("7", c7),
        ("8", c8),
        ("9", c9),
        ("10", c10),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    for (id, f) in criteria {
        if filter.is_empty() || filter.iter().any(|x| x == id) {
            f(&mut l);
        }
    }
    if l.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!(
            "acceptance: {} failing: {}",
            l.failed.len(),
            l.failed.join(", ")
        );
        std::process::exit(1);
    }
}
