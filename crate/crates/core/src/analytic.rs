//! Exact and limiting second-order statistics of ΣOU models.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::graph::{WeightedGraph, DENSE_CAP};
use crate::model::SouModel;
use crate::quadrature::{dyadic_converged, dyadic_nodes, MAX_DEPTH};
use crate::spectrum::{ProductShape, ShapeFunction};

/// Below this value of `λ·t` mode terms use their Taylor series.
pub const SERIES_CUTOFF: f64 = 1e-8;
/// Relative tolerance of the limiting-MSD quadrature.
pub const LIMIT_REL_TOL: f64 = 1e-8;
/// Largest graph handled by [`trace_msd`].
pub const TRACE_CAP: usize = 512;
/// Largest product dimension integrated by tensor quadrature.
pub const PRODUCT_MAX_DIMS: usize = 3;

/// Where an MSD curve came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    AnalyticFinite,
    AnalyticLimit,
    MonteCarlo,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::AnalyticFinite => "analytic-finite",
            Provenance::AnalyticLimit => "analytic-limit",
            Provenance::MonteCarlo => "monte-carlo",
        }
    }
}

/// Sampled `(t, MSD)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MSDCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl MSDCurve {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        provenance: Provenance,
        stderr: Option<Vec<f64>>,
    ) -> Result<Self> {
        check_times(&times)?;
        if values.len() != times.len() {
            return Err(Error::invalid(format!(
                "{} values for {} times",
                values.len(),
                times.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("MSD values must be finite and nonnegative"));
        }
        if let Some(se) = &stderr {
            if se.len() != times.len() || se.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::invalid(
                    "stderr must be nonnegative and aligned with times",
                ));
            }
        }
        Ok(MSDCurve {
            times,
            values,
            provenance,
            stderr,
            notes: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Values multiplied by a positive constant.
    pub fn scaled(&self, factor: f64) -> MSDCurve {
        MSDCurve {
            values: self.values.iter().map(|v| v * factor).collect(),
            stderr: self
                .stderr
                .as_ref()
                .map(|s| s.iter().map(|v| v * factor).collect()),
            ..self.clone()
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Times must be finite, nonnegative and strictly increasing.
pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("empty time grid"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::invalid("times must be finite and nonnegative"));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("times must be strictly increasing"));
    }
    Ok(())
}

/// `(1 − e^{−2λu})/(2λ)`, by series when `λu` is tiny.
fn ou_variance(lambda: f64, u: f64) -> f64 {
    let x = lambda * u;
    if x < SERIES_CUTOFF {
        u * (1.0 - x + 2.0 * x * x / 3.0)
    } else {
        -(-2.0 * x).exp_m1() / (2.0 * lambda)
    }
}

/// Exact autocovariance `E[x(t)·x(s)]` summed over the `d` components.
pub fn acf_finite(model: &SouModel, t: f64, s: f64) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0) || !t.is_finite() || !s.is_finite() {
        return Err(Error::invalid(format!(
            "times must be nonnegative, got ({t}, {s})"
        )));
    }
    Ok(acf_unchecked(model, t, s))
}

fn acf_unchecked(model: &SouModel, t: f64, s: f64) -> f64 {
    let lo = t.min(s);
    let gap = (t - s).abs();
    let modes: f64 = model
        .rates()
        .iter()
        .zip(model.coefficients())
        .map(|(&l, &c)| c * c * (-l * gap).exp() * ou_variance(l, lo))
        .sum();
    let per_component = model.sigma() * model.sigma() * (model.c0() * model.c0() * lo + modes);
    model.d() as f64 * per_component
}

/// `E|x(t)|²` on a grid.
pub fn msd_finite(model: &SouModel, times: &[f64]) -> Result<MSDCurve> {
    check_times(times)?;
    let values = times
        .par_iter()
        .map(|&t| acf_unchecked(model, t, t))
        .collect();
    MSDCurve::new(times.to_vec(), values, Provenance::AnalyticFinite, None)
}

/// Limiting coefficient measure on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LimitMeasure {
    /// Lebesgue measure.
    Lebesgue,
    /// Unit point mass at `x0`.
    Dirac { x0: f64 },
    /// Density sampled on a uniform grid of `[0, 1]`, linearly interpolated.
    Tabulated { density: Vec<f64> },
}

impl LimitMeasure {
    fn validate(&self) -> Result<()> {
        match self {
            LimitMeasure::Lebesgue => Ok(()),
            LimitMeasure::Dirac { x0 } if (0.0..=1.0).contains(x0) => Ok(()),
            LimitMeasure::Dirac { x0 } => Err(Error::invalid(format!(
                "Dirac location {x0} outside [0, 1]"
            ))),
            LimitMeasure::Tabulated { density } => {
                if density.len() < 2 || density.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    Err(Error::invalid(
                        "tabulated density needs >= 2 nonnegative samples",
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn density(&self, x: f64) -> f64 {
        match self {
            LimitMeasure::Tabulated { density } => {
                let m = (density.len() - 1) as f64;
                let u = (x * m).clamp(0.0, m);
                let i = (u.floor() as usize).min(density.len() - 2);
                let f = u - i as f64;
                density[i] * (1.0 - f) + density[i + 1] * f
            }
            _ => 1.0,
        }
    }
}

/// `(1 − e^{−2φt})/(2φ)`, equal to `t` at `φ = 0`.
fn limit_kernel(phi: f64, t: f64) -> f64 {
    let x = phi * t;
    if x < 1e-6 {
        t * (1.0 - x + 2.0 * x * x / 3.0)
    } else {
        -(-2.0 * x).exp_m1() / (2.0 * phi)
    }
}

/// Smallest `J` with `φ(b 2^{−J})·t < 1e-3`, capped at [`MAX_DEPTH`].
fn initial_depth(phi: impl Fn(f64) -> f64, b: f64, t: f64) -> u32 {
    let mut x = b;
    for j in 0..MAX_DEPTH {
        if phi(x) * t < 1e-3 {
            return j.max(1);
        }
        x *= 0.5;
    }
    MAX_DEPTH
}

/// `∫ g(φ(x)) μ(dx)` over `[0, 1]`, folding symmetric shapes onto `[0, 1/2]`.
fn integrate_against(
    shape: &ShapeFunction,
    measure: &LimitMeasure,
    scale: f64,
    g: impl Fn(f64) -> f64,
) -> Result<f64> {
    if let LimitMeasure::Dirac { x0 } = measure {
        return Ok(g(shape.eval(*x0)));
    }
    let (b, _) = shape.half_range();
    let f = |x: f64| {
        let w = if shape.is_symmetric() {
            measure.density(x) + measure.density(1.0 - x)
        } else {
            measure.density(x)
        };
        w * g(shape.eval(x))
    };
    let depth = initial_depth(|x| shape.eval(x), b, scale);
    dyadic_converged(&f, b, depth, LIMIT_REL_TOL)
}

/// Limiting MSD `σ(t) = ∫ (1 − e^{−2φ(x)t})/(2φ(x)) μ(dx)`.
pub fn msd_limit(shape: &ShapeFunction, measure: &LimitMeasure, times: &[f64]) -> Result<MSDCurve> {
    check_times(times)?;
    measure.validate()?;
    let values = times
        .par_iter()
        .map(|&t| integrate_against(shape, measure, t, |phi| limit_kernel(phi, t)))
        .collect::<Result<Vec<f64>>>()?;
    MSDCurve::new(times.to_vec(), values, Provenance::AnalyticLimit, None)
}

/// Limiting MSD of a product network: `∫_{[0,1]^D} (1 − e^{−2Σφ_i t})/(2Σφ_i) dx`
/// by tensor-product quadrature, `D ≤ 3`.
pub fn msd_limit_product(shape: &ProductShape, times: &[f64]) -> Result<MSDCurve> {
    check_times(times)?;
    let dims = shape.dims();
    if dims > PRODUCT_MAX_DIMS {
        return Err(Error::resource(format!(
            "tensor quadrature limited to {PRODUCT_MAX_DIMS} dimensions, got {dims}"
        )));
    }
    let values = times
        .par_iter()
        .map(|&t| product_point(shape, t))
        .collect::<Result<Vec<f64>>>()?;
    MSDCurve::new(times.to_vec(), values, Provenance::AnalyticLimit, None)
}

fn product_point(shape: &ProductShape, t: f64) -> Result<f64> {
    let axes: Vec<Vec<(f64, f64)>> = shape
        .factors
        .iter()
        .map(|f| {
            let (b, w) = f.half_range();
            let depth = initial_depth(|x| f.eval(x), b, t);
            dyadic_nodes(b, depth, 2)
                .into_iter()
                .map(|(x, wt)| (f.eval(x), w * wt))
                .collect()
        })
        .collect();
    let mut total = 0.0;
    match axes.as_slice() {
        [a] => {
            for (p, w) in a {
                total += w * limit_kernel(*p, t);
            }
        }
        [a, b] => {
            for (p, w) in a {
                for (q, v) in b {
                    total += w * v * limit_kernel(p + q, t);
                }
            }
        }
        [a, b, c] => {
            total = a
                .par_iter()
                .map(|(p, w)| {
                    let mut acc = 0.0;
                    for (q, v) in b {
                        for (r, u) in c {
                            acc += v * u * limit_kernel(p + q + r, t);
                        }
                    }
                    w * acc
                })
                .sum();
        }
        _ => unreachable!("dimension checked by caller"),
    }
    if !total.is_finite() {
        return Err(Error::numeric(format!(
            "product quadrature produced {total} at t = {t}"
        )));
    }
    Ok(total)
}

/// Laplace integral `Φ(s) = ∫₀¹ e^{−2φ(x)s} dx`, with `Φ(0) = 1`.
pub fn phi_laplace(shape: &ShapeFunction, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid(format!(
            "Laplace variable must be nonnegative, got {s}"
        )));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    integrate_against(shape, &LimitMeasure::Lebesgue, s, |phi| {
        (-2.0 * phi * s).exp()
    })
}

/// `Φ(s)` of a product shape: the product of the factors' integrals.
pub fn phi_laplace_product(shape: &ProductShape, s: f64) -> Result<f64> {
    shape.factors.iter().map(|f| phi_laplace(f, s)).product()
}

/// Large-time regime of the limiting MSD.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `σ(t) ~ prefactor · t^ν`.
    Anomalous,
    /// `σ(t) ~ prefactor · ln t`.
    Logarithmic,
    /// `σ(t)` stays bounded.
    Bounded,
}

/// Laplace-method prediction for `φ ≈ a₀ x^ρ` under Lebesgue measure on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub regime: Regime,
    /// `1 − 1/ρ` for `ρ > 1`, otherwise 0.
    pub nu: f64,
    /// `Γ(1/ρ)/ρ`, the limit of `Φ(s)·(2a₀s)^{1/ρ}`.
    pub laplace_constant: f64,
    /// Leading coefficient of `σ(t)` (absent when bounded).
    pub prefactor: Option<f64>,
}

impl Prediction {
    /// Multiplies the prefactor, e.g. by 2 for shapes folded onto `[0, 1/2]`.
    pub fn weighted(mut self, w: f64) -> Self {
        self.prefactor = self.prefactor.map(|p| p * w);
        self
    }

    /// Predicted `σ(t)` at large `t`, when the regime is not bounded.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let p = self.prefactor?;
        match self.regime {
            Regime::Anomalous => Some(p * t.powf(self.nu)),
            Regime::Logarithmic => Some(p * t.ln()),
            Regime::Bounded => None,
        }
    }
}

pub fn asymptotic_prediction(rho: f64, a0: f64) -> Result<Prediction> {
    if !(rho > 0.0 && rho.is_finite() && a0 > 0.0 && a0.is_finite()) {
        return Err(Error::invalid(format!(
            "need rho > 0 and a0 > 0, got ({rho}, {a0})"
        )));
    }
    let laplace_constant = gamma(1.0 / rho) / rho;
    let phi_coef = laplace_constant / (2.0 * a0).powf(1.0 / rho);
    Ok(if rho > 1.0 {
        let nu = 1.0 - 1.0 / rho;
        Prediction {
            regime: Regime::Anomalous,
            nu,
            laplace_constant,
            prefactor: Some(phi_coef / nu),
        }
    } else if rho == 1.0 {
        Prediction {
            regime: Regime::Logarithmic,
            nu: 0.0,
            laplace_constant,
            prefactor: Some(phi_coef),
        }
    } else {
        Prediction {
            regime: Regime::Bounded,
            nu: 0.0,
            laplace_constant,
            prefactor: None,
        }
    })
}

/// [`asymptotic_prediction`] from a shape's leading term, doubling the
/// prefactor for symmetric shapes.
pub fn shape_prediction(shape: &ShapeFunction) -> Result<Prediction> {
    let (rho, a0) = shape
        .rho()
        .zip(shape.a0())
        .ok_or_else(|| Error::invalid(format!("shape {} has no leading term", shape.name())))?;
    Ok(asymptotic_prediction(rho, a0)?.weighted(shape.half_range().1))
}

/// Per-bead MSD `σ²/n · tr ∫₀ᵗ e^{2L(t−r)} dr` from a dense eigensolve.
pub fn trace_msd(g: &WeightedGraph, sigma: f64, times: &[f64]) -> Result<MSDCurve> {
    check_times(times)?;
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let n = g.n_vertices();
    if n > TRACE_CAP.min(DENSE_CAP) {
        return Err(Error::resource(format!(
            "trace formula limited to n <= {TRACE_CAP}, got {n}"
        )));
    }
    let lap = g.laplacian()?;
    let eig = (-lap.entries().clone())
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::numeric("symmetric eigensolver did not converge"))?;
    let radius = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lambdas: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l.abs() <= 1e-9 * radius { 0.0 } else { l })
        .collect();
    let values = times
        .iter()
        .map(|&t| {
            let tr: f64 = lambdas
                .iter()
                .map(|&l| if l == 0.0 { t } else { ou_variance(l, t) })
                .sum();
            sigma * sigma * tr / n as f64
        })
        .collect();
    MSDCurve::new(times.to_vec(), values, Provenance::AnalyticFinite, None)
}

/// Outcome of the Gaussian fourth-moment increment bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Compares `E[(x(t)−x(s))⁴] = 3 Var²` with `3 m² |t−s|²` per component,
/// `m` being the model's total mass.
pub fn tightness_bound_check(model: &SouModel, t: f64, s: f64) -> Result<TightnessCheck> {
    let d = model.d() as f64;
    let var =
        (acf_finite(model, t, t)? + acf_finite(model, s, s)? - 2.0 * acf_finite(model, t, s)?) / d;
    let lhs = 3.0 * var * var;
    let rhs = 3.0 * (model.total_mass() * (t - s)).powi(2);
    Ok(TightnessCheck {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-12),
    })
}

/// Covariance matrix `[acf(t_i, t_j)]`.
pub fn acf_gram(model: &SouModel, times: &[f64]) -> Result<DMatrix<f64>> {
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::invalid("times must be finite and nonnegative"));
    }
    let n = times.len();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        acf_unchecked(model, times[i], times[j])
    }))
}

/// Whether a Gram matrix admits a Cholesky factor after adding `1e-12·trace` jitter.
pub fn cholesky_with_jitter(gram: &DMatrix<f64>) -> bool {
    let n = gram.nrows();
    let jitter = 1e-12 * gram.trace();
    let m = gram + DMatrix::identity(n, n) * jitter;
    m.cholesky().is_some()
}
