//! ΣOU process models and their coefficient measures.
//!
//! A model is `x(t) = σ c₀ B₀(t) + Σ_k c_k z_k(t)` with
//! `dz_k = −λ_k z_k dt + σ dB_k` and `z_k(0) = 0`, replicated independently
//! in each of `d` ambient components. Coefficients are stored in unit-noise
//! form; the effective coefficient of a mode is `σ c_k`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Family, WeightedGraph};
use crate::spectrum::{circulant_spectrum, graph_spectrum, Spectrum};

/// Qualitative flags carried alongside a model.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFlags {
    /// The anomalous regime sits at short times (rescaled chain).
    #[serde(default)]
    pub short_time_anomalous: bool,
    /// Built from a graph whose beads are not known to be exchangeable; the
    /// law is the bead-averaged one.
    #[serde(default)]
    pub non_exchangeable: bool,
}

/// Gaussian law of a sum of OU modes plus a Brownian term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub struct SouModel {
    spectrum: Spectrum,
    rates: Vec<f64>,
    coefficients: Vec<f64>,
    c0: f64,
    sigma: f64,
    d: u32,
    flags: ModelFlags,
    locations: Option<Vec<f64>>,
    m2: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    spectrum: Spectrum,
    coefficients: Vec<f64>,
    c0: f64,
    sigma: f64,
    d: u32,
    #[serde(default)]
    flags: ModelFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    locations: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m2: Option<f64>,
}

impl From<SouModel> for ModelDoc {
    fn from(m: SouModel) -> Self {
        ModelDoc {
            spectrum: m.spectrum,
            coefficients: m.coefficients,
            c0: m.c0,
            sigma: m.sigma,
            d: m.d,
            flags: m.flags,
            locations: m.locations,
            m2: m.m2,
        }
    }
}

impl TryFrom<ModelDoc> for SouModel {
    type Error = Error;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        let mut m = sou_model(doc.spectrum, doc.coefficients, doc.c0, doc.sigma, doc.d)?;
        m.flags = doc.flags;
        m.m2 = doc.m2;
        if let Some(loc) = doc.locations {
            m = m.with_locations(loc)?;
        }
        Ok(m)
    }
}

/// Validated model constructor. `spec` lists the OU rates only (no zero
/// mode); `coefficients` align with `spec.flattened()`.
pub fn sou_model(
    spec: Spectrum,
    coefficients: Vec<f64>,
    c0: f64,
    sigma: f64,
    d: u32,
) -> Result<SouModel> {
    let rates = spec.flattened();
    if rates.len() != coefficients.len() {
        return Err(Error::invalid(format!(
            "{} coefficients for {} modes",
            coefficients.len(),
            rates.len()
        )));
    }
    if let Some(bad) = rates.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::invalid(format!(
            "OU rates must be positive, got {bad}"
        )));
    }
    if coefficients.iter().any(|c| !c.is_finite()) || !c0.is_finite() || c0 < 0.0 {
        return Err(Error::invalid(
            "coefficients must be finite and c0 nonnegative",
        ));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if d == 0 {
        return Err(Error::invalid("ambient dimension must be at least 1"));
    }
    let mass = c0 * c0 + coefficients.iter().map(|c| c * c).sum::<f64>();
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::invalid(format!(
            "total coefficient mass must be positive, got {mass}"
        )));
    }
    Ok(SouModel {
        spectrum: spec,
        rates,
        coefficients,
        c0,
        sigma,
        d,
        flags: ModelFlags::default(),
        locations: None,
        m2: None,
    })
}

impl SouModel {
    /// Pure Brownian motion `σ c₀ B(t)`.
    pub fn brownian(c0: f64, sigma: f64, d: u32) -> Result<Self> {
        sou_model(Spectrum::from_parts(vec![], vec![])?, vec![], c0, sigma, d)
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// OU rates, one per mode, aligned with [`coefficients`](Self::coefficients).
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn flags(&self) -> &ModelFlags {
        &self.flags
    }

    /// Second moment of the coefficient distribution, for random-coefficient models.
    pub fn m2(&self) -> Option<f64> {
        self.m2
    }

    pub fn n_modes(&self) -> usize {
        self.rates.len()
    }

    /// `c₀² + Σ c_k²` in unit-noise form.
    pub fn unit_mass(&self) -> f64 {
        self.c0 * self.c0 + self.coefficients.iter().map(|c| c * c).sum::<f64>()
    }

    /// `σ² (c₀² + Σ c_k²)`: the short-time slope of the per-component MSD.
    pub fn total_mass(&self) -> f64 {
        self.sigma * self.sigma * self.unit_mass()
    }

    /// Same law in `d` ambient components.
    pub fn with_dimension(mut self, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("ambient dimension must be at least 1"));
        }
        self.d = d;
        Ok(self)
    }

    /// Same coefficients with noise scale `sigma`.
    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn with_flags(mut self, flags: ModelFlags) -> Self {
        self.flags = flags;
        self
    }

    /// Places mode `k` at `locations[k]` in the coefficient measure.
    pub fn with_locations(mut self, locations: Vec<f64>) -> Result<Self> {
        if locations.len() != self.rates.len() {
            return Err(Error::invalid("one location per mode required"));
        }
        if locations.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::invalid("measure locations must lie in [0, 1]"));
        }
        self.locations = Some(locations);
        Ok(self)
    }

    /// Stable hex digest of the serialized model.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let doc = serde_json::to_vec(self).expect("model serializes");
        hex::encode(&Sha256::digest(&doc)[..8])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Effective ΣOU law of a single bead in a bead-spring network.
///
/// The zero mode becomes the Brownian term and every other eigenvalue of
/// `-L` (with multiplicity) an OU mode, all with unit-noise coefficient
/// `1/√n`. Complete graphs and hypercubes place their modes at the
/// eigenvalue level `ℓ/L` in the coefficient measure; every other family
/// uses `k/n`.
pub fn distinguished_model(g: &WeightedGraph, sigma: f64, d: u32) -> Result<SouModel> {
    let spec = graph_spectrum(g)?;
    if spec.values().iter().any(|v| *v < 0.0) {
        return Err(Error::invalid(format!(
            "graph {} is unstable: negative diffusive eigenvalue {}",
            g.label(),
            spec.values()[0]
        )));
    }
    let zeros = spec.zero_multiplicity();
    if zeros != 1 {
        return Err(Error::invalid(format!(
            "graph {} must be connected (zero eigenvalue multiplicity {zeros})",
            g.label()
        )));
    }
    let n = g.n_vertices();
    let c = 1.0 / (n as f64).sqrt();
    let modes = spec.nonzero();
    let n_modes = modes.n_modes();
    let mut m = sou_model(modes, vec![c; n_modes], c, sigma, d)?;
    m.flags.non_exchangeable = !g.is_vertex_transitive();
    match g.family() {
        Family::Complete { .. } => {
            m = m.with_locations(vec![1.0; n_modes])?;
        }
        Family::Hypercube { dims, kappa } => {
            let loc = m
                .rates
                .iter()
                .map(|l| (l / (2.0 * kappa)).round() / *dims as f64)
                .collect();
            m = m.with_locations(loc)?;
        }
        _ => {}
    }
    Ok(m)
}

/// Coefficient distributions with finite fourth moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CoefficientDist {
    /// Uniform on `[0.5, 1.5]`.
    Uniform,
    /// `exp(N(0, 0.25²))`.
    LogNormal,
    /// Degenerate `c ≡ value`.
    Constant { value: f64 },
}

impl CoefficientDist {
    /// `E[c²]`.
    pub fn m2(&self) -> f64 {
        match *self {
            CoefficientDist::Uniform => 13.0 / 12.0,
            CoefficientDist::LogNormal => (2.0 * 0.25f64.powi(2)).exp(),
            CoefficientDist::Constant { value } => value * value,
        }
    }

    /// `E[c⁴]`.
    pub fn m4(&self) -> f64 {
        match *self {
            CoefficientDist::Uniform => (1.5f64.powi(5) - 0.5f64.powi(5)) / 5.0,
            CoefficientDist::LogNormal => (8.0 * 0.25f64.powi(2)).exp(),
            CoefficientDist::Constant { value } => value.powi(4),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            CoefficientDist::Uniform => rng.random_range(0.5..1.5),
            CoefficientDist::LogNormal => LogNormal::new(0.0, 0.25).unwrap().sample(rng),
            CoefficientDist::Constant { value } => value,
        }
    }
}

/// Independent coefficients `c_k = draw_k / √n` on the modes of `spec`.
///
/// `n` counts every mode including zero; the zero mode's draw becomes `c₀`.
/// Draws are made in ascending mode order from a ChaCha stream keyed by
/// `seed`.
pub fn random_coefficient_model(
    spec: &Spectrum,
    seed: u64,
    dist: CoefficientDist,
) -> Result<SouModel> {
    if let CoefficientDist::Constant { value } = dist {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::invalid("constant coefficient must be positive"));
        }
    }
    let n = spec.n_modes();
    if n == 0 {
        return Err(Error::invalid("empty spectrum"));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c0 = 0.0;
    let mut coefficients = Vec::with_capacity(n);
    for lam in spec.flattened() {
        let c = dist.draw(&mut rng) * scale;
        if lam == 0.0 {
            c0 = (c0 * c0 + c * c).sqrt();
        } else {
            coefficients.push(c);
        }
    }
    let mut m = sou_model(spec.nonzero(), coefficients, c0, 1.0, 1)?;
    m.m2 = Some(dist.m2());
    Ok(m)
}

/// Point measure with mass `σ² c_k²` at each mode's location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMeasure {
    pub atoms: Vec<(f64, f64)>,
}

impl CoefficientMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|(x, m)| f(*x) * m).sum()
    }

    /// Mass carried by atoms inside `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(x, _)| (lo..=hi).contains(x))
            .map(|a| a.1)
            .sum()
    }
}

/// The model's coefficient measure: `c₀` at 0 and mode `k` at `k/n` (or at
/// its stored location), `n` being the total number of modes.
pub fn coefficient_measure(model: &SouModel) -> CoefficientMeasure {
    let s2 = model.sigma * model.sigma;
    let n = (model.n_modes() + 1) as f64;
    let mut atoms = Vec::with_capacity(model.n_modes() + 1);
    if model.c0 != 0.0 {
        atoms.push((0.0, s2 * model.c0 * model.c0));
    }
    for (k, c) in model.coefficients.iter().enumerate() {
        let x = match &model.locations {
            Some(loc) => loc[k],
            None => (k + 1) as f64 / n,
        };
        atoms.push((x, s2 * c * c));
    }
    CoefficientMeasure { atoms }
}

/// Table of `∫ f dμ` with one row per measure and one column per test function.
pub fn measure_convergence_diagnostic(
    measures: &[CoefficientMeasure],
    test_fns: &[&dyn Fn(f64) -> f64],
) -> Result<Vec<Vec<f64>>> {
    if measures.len() < 2 {
        return Err(Error::invalid("need at least two measures to compare"));
    }
    Ok(measures
        .iter()
        .map(|m| test_fns.iter().map(|f| m.integrate(f)).collect())
        .collect())
}

/// Rouse chain with springs scaled by `n²` and bead noise by `√n`.
///
/// Rates are `4κ n² sin²(πk/n)`; every coefficient, Brownian included, is 1
/// in unit-noise form so each bead has effective coefficient `σ`.
pub fn random_string_model(n: usize, kappa: f64, sigma: f64) -> Result<SouModel> {
    if n < 3 {
        return Err(Error::invalid(format!("need n >= 3, got {n}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    let spec = circulant_spectrum(n, &[kappa])?
        .scaled((n * n) as f64)
        .nonzero();
    let modes = spec.n_modes();
    let m = sou_model(spec, vec![1.0; modes], 1.0, sigma, 1)?;
    Ok(m.with_flags(ModelFlags {
        short_time_anomalous: true,
        non_exchangeable: false,
    }))
}

/// Relaxation time of the slowest nonzero Rouse mode, `1/(4κ sin²(π/n))`.
pub fn rouse_slowest_relaxation(n: usize, kappa: f64) -> f64 {
    1.0 / (4.0 * kappa * (PI / n as f64).sin().powi(2))
}
