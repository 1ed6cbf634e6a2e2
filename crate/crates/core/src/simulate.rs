//! Exact-in-law path sampling of ΣOU models, plus an Euler–Maruyama
//! integrator for the full bead-spring system.
//!
//! Every random stream is a ChaCha8 generator keyed by `(seed, path index)`
//! with stream number `component·(modes + 1) + mode` (mode 0 is the
//! Brownian term). Paths are therefore independent of scheduling, and
//! ensemble sums are reduced in fixed blocks of [`BLOCK`] paths in index
//! order, so results do not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::analytic::{check_times, MSDCurve, Provenance};
use crate::error::{Error, Result};
use crate::estimate::gaussian_stderr;
use crate::graph::WeightedGraph;
use crate::model::SouModel;
use crate::spectrum::graph_spectrum;

/// Default memory budget for stored ensembles, in bytes.
pub const MEMORY_BUDGET: usize = 2 << 30;
/// Paths per reduction block.
pub const BLOCK: usize = 64;
/// Largest network integrated by [`euler_full_network`].
pub const EULER_MAX_VERTICES: usize = 256;
/// Approximate number of recorded times in Euler ensembles.
pub const EULER_RECORDS: usize = 50;

/// Sampled paths on a common time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    times: Vec<f64>,
    n_paths: usize,
    d: usize,
    data: Vec<f64>,
    seed: u64,
    model_digest: String,
}

impl PathEnsemble {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    /// Ambient components per path.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model_digest(&self) -> &str {
        &self.model_digest
    }

    /// Component `c` of path `p`, one value per grid time.
    pub fn path(&self, p: usize, c: usize) -> &[f64] {
        let nt = self.times.len();
        let start = (p * self.d + c) * nt;
        &self.data[start..start + nt]
    }

    /// Values at grid index `j` across paths, component `c`.
    pub fn column(&self, j: usize, c: usize) -> Vec<f64> {
        (0..self.n_paths).map(|p| self.path(p, c)[j]).collect()
    }
}

/// Generator for one `(seed, path, stream)` triple.
pub fn stream_rng(seed: u64, path: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&path.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub(crate) fn digest_parts(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..8])
}

/// Exact one-step transition factors of every mode on a grid.
struct Transitions {
    nt: usize,
    brownian_sd: Vec<f64>,
    decay: Vec<f64>,
    sd: Vec<f64>,
}

impl Transitions {
    fn new(model: &SouModel, times: &[f64]) -> Self {
        let nt = times.len();
        let steps: Vec<f64> = (0..nt)
            .map(|j| times[j] - if j == 0 { 0.0 } else { times[j - 1] })
            .collect();
        let mut decay = Vec::with_capacity(model.n_modes() * nt);
        let mut sd = Vec::with_capacity(model.n_modes() * nt);
        for &l in model.rates() {
            for &dt in &steps {
                let x = l * dt;
                decay.push((-x).exp());
                let var = if x < 1e-8 {
                    dt * (1.0 - x + 2.0 * x * x / 3.0)
                } else {
                    -(-2.0 * x).exp_m1() / (2.0 * l)
                };
                sd.push(var.sqrt());
            }
        }
        Transitions {
            nt,
            brownian_sd: steps.iter().map(|s| s.sqrt()).collect(),
            decay,
            sd,
        }
    }
}

fn fill_path(
    model: &SouModel,
    tr: &Transitions,
    seed: u64,
    p: usize,
    comp: usize,
    out: &mut [f64],
) {
    out.fill(0.0);
    let nt = tr.nt;
    let sigma = model.sigma();
    let base = (comp * (model.n_modes() + 1)) as u64;
    if model.c0() != 0.0 {
        let mut rng = stream_rng(seed, p as u64, base);
        let scale = sigma * model.c0();
        let mut b = 0.0;
        for (o, sd) in out.iter_mut().zip(&tr.brownian_sd) {
            b += sd * normal(&mut rng);
            *o += scale * b;
        }
    }
    for (k, &c) in model.coefficients().iter().enumerate() {
        let mut rng = stream_rng(seed, p as u64, base + k as u64 + 1);
        let decay = &tr.decay[k * nt..(k + 1) * nt];
        let sd = &tr.sd[k * nt..(k + 1) * nt];
        let scale = sigma * c;
        let mut z = 0.0;
        for j in 0..nt {
            z = decay[j] * z + sd[j] * normal(&mut rng);
            out[j] += scale * z;
        }
    }
}

fn check_grid(times: &[f64], n_paths: usize) -> Result<()> {
    check_times(times)?;
    if n_paths == 0 {
        return Err(Error::invalid("need at least one path"));
    }
    Ok(())
}

/// Paths of `model` sampled exactly on `times` (each path starts from 0 at
/// time 0; the grid need not include 0).
pub fn sample_paths(
    model: &SouModel,
    times: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    sample_paths_with_budget(model, times, n_paths, seed, MEMORY_BUDGET)
}

pub fn sample_paths_with_budget(
    model: &SouModel,
    times: &[f64],
    n_paths: usize,
    seed: u64,
    budget: usize,
) -> Result<PathEnsemble> {
    check_grid(times, n_paths)?;
    let nt = times.len();
    let d = model.d() as usize;
    let bytes = n_paths
        .saturating_mul(d)
        .saturating_mul(nt)
        .saturating_mul(8);
    if bytes > budget {
        return Err(Error::resource(format!(
            "{n_paths} paths x {nt} times x {d} components need {bytes} bytes (budget {budget}); \
             use the streaming ensemble MSD or fewer paths per chunk"
        )));
    }
    let tr = Transitions::new(model, times);
    let mut data = vec![0.0; n_paths * d * nt];
    data.par_chunks_mut(d * nt)
        .enumerate()
        .for_each(|(p, chunk)| {
            for (c, out) in chunk.chunks_mut(nt).enumerate() {
                fill_path(model, &tr, seed, p, c, out);
            }
        });
    Ok(PathEnsemble {
        times: times.to_vec(),
        n_paths,
        d,
        data,
        seed,
        model_digest: model.digest(),
    })
}

/// Ensemble MSD accumulated block by block without storing paths. Paths
/// are identical to those of [`sample_paths`] with the same seed.
pub fn ensemble_msd(
    model: &SouModel,
    times: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<MSDCurve> {
    check_grid(times, n_paths)?;
    let nt = times.len();
    let d = model.d() as usize;
    let tr = Transitions::new(model, times);
    let blocks: Vec<Vec<f64>> = (0..n_paths.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut sums = vec![0.0; nt];
            let mut buf = vec![0.0; nt];
            for p in b * BLOCK..((b + 1) * BLOCK).min(n_paths) {
                for c in 0..d {
                    fill_path(model, &tr, seed, p, c, &mut buf);
                    for (s, x) in sums.iter_mut().zip(&buf) {
                        *s += x * x;
                    }
                }
            }
            sums
        })
        .collect();
    let mut sums = vec![0.0; nt];
    for block in &blocks {
        for (s, b) in sums.iter_mut().zip(block) {
            *s += b;
        }
    }
    let values: Vec<f64> = sums.iter().map(|s| s / n_paths as f64).collect();
    let stderr = (n_paths > 1).then(|| gaussian_stderr(&values, d, n_paths));
    let mut curve = MSDCurve::new(times.to_vec(), values, Provenance::MonteCarlo, stderr)?;
    curve.notes.push(format!(
        "paths={n_paths} seed={seed} model={}",
        model.digest()
    ));
    Ok(curve)
}

/// Euler–Maruyama for `dx = L x dt + σ dW` on the whole network, recording
/// bead 0 at about [`EULER_RECORDS`] evenly spaced times (including 0).
pub fn euler_full_network(
    g: &WeightedGraph,
    sigma: f64,
    dt: f64,
    t_end: f64,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    let mut beads = euler_core(g, sigma, dt, t_end, n_paths, seed, &[0])?;
    Ok(beads.remove(0))
}

/// As [`euler_full_network`], one ensemble per bead from the same noise.
pub fn euler_all_beads(
    g: &WeightedGraph,
    sigma: f64,
    dt: f64,
    t_end: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<PathEnsemble>> {
    let all: Vec<usize> = (0..g.n_vertices()).collect();
    euler_core(g, sigma, dt, t_end, n_paths, seed, &all)
}

fn euler_core(
    g: &WeightedGraph,
    sigma: f64,
    dt: f64,
    t_end: f64,
    n_paths: usize,
    seed: u64,
    beads: &[usize],
) -> Result<Vec<PathEnsemble>> {
    let n = g.n_vertices();
    if n > EULER_MAX_VERTICES {
        return Err(Error::resource(format!(
            "Euler integration limited to {EULER_MAX_VERTICES} vertices, got {n}"
        )));
    }
    if !(sigma > 0.0) || !(dt > 0.0) || !(t_end > dt) || n_paths == 0 {
        return Err(Error::invalid(
            "need sigma > 0, 0 < dt < t_end and n_paths >= 1",
        ));
    }
    let lmax = graph_spectrum(g)?.max().unwrap_or(0.0);
    if lmax > 0.0 && dt > 0.1 / lmax {
        return Err(Error::invalid(format!(
            "dt = {dt} is unstable: need dt <= 0.1/lambda_max = {:e}",
            0.1 / lmax
        )));
    }
    let steps = (t_end / dt).round() as usize;
    let stride = (steps / EULER_RECORDS).max(1);
    let record: Vec<usize> = (0..=steps).step_by(stride).collect();
    let times: Vec<f64> = record.iter().map(|&s| s as f64 * dt).collect();
    let nt = times.len();
    let nb = beads.len();
    let noise = sigma * dt.sqrt();
    let mut data = vec![0.0; n_paths * nb * nt];
    data.par_chunks_mut(nb * nt)
        .enumerate()
        .for_each(|(p, out)| {
            let mut rng = stream_rng(seed, p as u64, 0);
            let mut x = vec![0.0; n];
            let mut drift = vec![0.0; n];
            let mut next = 1;
            for s in 1..=steps {
                g.apply_laplacian(&x, &mut drift);
                for (xi, fi) in x.iter_mut().zip(&drift) {
                    *xi += fi * dt + noise * normal(&mut rng);
                }
                if next < nt && record[next] == s {
                    for (b, &bead) in beads.iter().enumerate() {
                        out[b * nt + next] = x[bead];
                    }
                    next += 1;
                }
            }
        });
    let digest = digest_parts(&["euler", &g.to_json()?, &sigma.to_string(), &dt.to_string()]);
    Ok((0..nb)
        .map(|b| PathEnsemble {
            times: times.clone(),
            n_paths,
            d: 1,
            data: data
                .chunks(nb * nt)
                .flat_map(|chunk| chunk[b * nt..(b + 1) * nt].iter().copied())
                .collect(),
            seed,
            model_digest: digest.clone(),
        })
        .collect())
}

/// Center of mass `n⁻¹ Σ_i x_i` of a network. Springs cancel in the sum,
/// so each step adds the mean of `n` independent bead increments.
pub fn center_of_mass_paths(
    g: &WeightedGraph,
    sigma: f64,
    times: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    check_grid(times, n_paths)?;
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let n = g.n_vertices();
    let nt = times.len();
    let mut data = vec![0.0; n_paths * nt];
    data.par_chunks_mut(nt).enumerate().for_each(|(p, out)| {
        let mut rng = stream_rng(seed, p as u64, 0);
        let mut x = 0.0;
        let mut prev = 0.0;
        for (o, &t) in out.iter_mut().zip(times) {
            let sd = sigma * (t - prev).sqrt();
            let sum: f64 = (0..n).map(|_| normal(&mut rng)).sum();
            x += sd * sum / n as f64;
            *o = x;
            prev = t;
        }
    });
    let digest = digest_parts(&["center-of-mass", &g.to_json()?, &sigma.to_string()]);
    Ok(PathEnsemble {
        times: times.to_vec(),
        n_paths,
        d: 1,
        data,
        seed,
        model_digest: digest,
    })
}
