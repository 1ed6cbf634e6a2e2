//! Experiment configuration (TOML) and model construction from it.
//!
//! ```toml
//! method = "analytic-finite"      # analytic-limit | monte-carlo
//! windows = "auto"                # or [[10.0, 1000.0], ...]
//! n_paths = 10000                 # monte-carlo only
//! seed = 7                        # monte-carlo only
//!
//! [model]
//! sigma = 1.0
//! d = 1
//!
//! [model.network]
//! family = "rouse"
//! n = 4096
//! kappa = 1.0
//!
//! [grid]                          # optional; default is built from the windows
//! kind = "geometric"
//! t_min = 0.01
//! t_max = 10000.0
//! n_points = 60
//!
//! [output]
//! dir = "out"
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analytic::LimitMeasure;
use crate::error::{Error, Result};
use crate::estimate::{default_windows, geometric_grid, linear_grid, RegimeLabel, Window};
use crate::graph::{self, WeightedGraph};
use crate::model::{self, CoefficientDist, SouModel};
use crate::spectrum::{graph_spectrum, power_law_spectrum, ProductShape, ShapeFunction, Spectrum};

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

/// Network family or explicit spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkSpec {
    Rouse {
        n: usize,
        #[serde(default = "one")]
        kappa: f64,
    },
    Circulant {
        n: usize,
        kappas: Vec<f64>,
    },
    Repulsive {
        n: usize,
        order: usize,
    },
    /// Spring constant defaults to `1/(n−1)`.
    Complete {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
    },
    /// Spring constant defaults to `1/dims`.
    Hypercube {
        dims: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
    },
    Product {
        factors: Vec<NetworkSpec>,
    },
    PowerLaw {
        rho: f64,
        #[serde(default = "one")]
        tau1: f64,
        n: usize,
    },
    RandomString {
        n: usize,
        #[serde(default = "one")]
        kappa: f64,
    },
    /// Graph JSON document `{label, n_vertices, edges}`.
    Graph {
        path: PathBuf,
    },
    /// Model JSON document.
    ModelFile {
        path: PathBuf,
    },
}

/// Coefficient assignment for spectrum-based models.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientSpec {
    /// `1/√n` on every mode, Brownian included.
    #[default]
    Uniform,
    /// Independent draws divided by `√n`.
    Random { dist: CoefficientDist, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub network: NetworkSpec,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "one_u32")]
    pub d: u32,
    #[serde(default)]
    pub coefficients: CoefficientSpec,
}

impl ModelConfig {
    pub fn new(network: NetworkSpec) -> Self {
        ModelConfig {
            network,
            sigma: 1.0,
            d: 1,
            coefficients: CoefficientSpec::Uniform,
        }
    }

    pub fn build(&self) -> Result<SouModel> {
        let base = match (&self.network, &self.coefficients) {
            (NetworkSpec::ModelFile { path }, _) => {
                let m = SouModel::from_json(&std::fs::read_to_string(path)?)?;
                return Ok(m);
            }
            (NetworkSpec::RandomString { n, kappa }, CoefficientSpec::Uniform) => {
                model::random_string_model(*n, *kappa, self.sigma)?
            }
            (NetworkSpec::RandomString { .. }, _) => {
                return Err(Error::Config(
                    "random-string models take uniform coefficients".into(),
                ))
            }
            (net, CoefficientSpec::Uniform) => match net.graph()? {
                Some(g) => model::distinguished_model(&g, self.sigma, 1)?,
                None => model::random_coefficient_model(
                    &net.spectrum()?,
                    0,
                    CoefficientDist::Constant { value: 1.0 },
                )?
                .with_sigma(self.sigma)?,
            },
            (net, CoefficientSpec::Random { dist, seed }) => {
                model::random_coefficient_model(&net.spectrum()?, *seed, *dist)?
                    .with_sigma(self.sigma)?
            }
        };
        base.with_dimension(self.d)
    }

    /// Limiting object of the family, scaled by `σ²·d`.
    pub fn limit(&self) -> Result<Limit> {
        let scale = self.sigma * self.sigma * self.d as f64;
        Ok(match &self.network {
            NetworkSpec::Product { factors } => {
                let shapes = factors
                    .iter()
                    .map(|f| f.shape())
                    .collect::<Result<Vec<_>>>()?;
                Limit::Product {
                    shape: ProductShape::new(shapes)?,
                    scale,
                }
            }
            net => {
                let (shape, measure) = net.limit_pair()?;
                Limit::Single {
                    shape,
                    measure,
                    scale,
                }
            }
        })
    }
}

/// Limit shape and measure of a family.
#[derive(Clone, Debug)]
pub enum Limit {
    Single {
        shape: ShapeFunction,
        measure: LimitMeasure,
        scale: f64,
    },
    Product {
        shape: ProductShape,
        scale: f64,
    },
}

impl Limit {
    /// `1/max φ` over a grid of the domain.
    pub fn tau1(&self) -> f64 {
        let max = |s: &ShapeFunction| {
            (0..=1000)
                .map(|i| s.eval(i as f64 / 1000.0))
                .fold(0.0, f64::max)
        };
        match self {
            Limit::Single {
                shape,
                measure: LimitMeasure::Dirac { x0 },
                ..
            } => 1.0 / shape.eval(*x0),
            Limit::Single { shape, .. } => 1.0 / max(shape),
            Limit::Product { shape, .. } => 1.0 / shape.factors.iter().map(max).sum::<f64>(),
        }
    }
}

impl NetworkSpec {
    pub fn label(&self) -> String {
        match self {
            NetworkSpec::Rouse { .. } => "rouse",
            NetworkSpec::Circulant { .. } => "circulant",
            NetworkSpec::Repulsive { .. } => "repulsive",
            NetworkSpec::Complete { .. } => "complete",
            NetworkSpec::Hypercube { .. } => "hypercube",
            NetworkSpec::Product { .. } => "product",
            NetworkSpec::PowerLaw { .. } => "power-law",
            NetworkSpec::RandomString { .. } => "random-string",
            NetworkSpec::Graph { .. } => "graph",
            NetworkSpec::ModelFile { .. } => "model",
        }
        .to_string()
    }

    /// The network, for graph families.
    pub fn graph(&self) -> Result<Option<WeightedGraph>> {
        Ok(Some(match self {
            NetworkSpec::Rouse { n, kappa } => graph::rouse_cycle(*n, *kappa)?,
            NetworkSpec::Circulant { n, kappas } => graph::circulant_chain(*n, kappas)?,
            NetworkSpec::Repulsive { n, order } => graph::repulsive_circulant(*n, *order)?,
            NetworkSpec::Complete { n, kappa: Some(k) } => graph::complete_graph(*n, *k)?,
            NetworkSpec::Complete { n, kappa: None } => graph::complete_graph_normalized(*n)?,
            NetworkSpec::Hypercube {
                dims,
                kappa: Some(k),
            } => graph::hypercube(*dims, *k)?,
            NetworkSpec::Hypercube { dims, kappa: None } => graph::hypercube_normalized(*dims)?,
            NetworkSpec::Product { factors } => {
                let mut it = factors.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::Config("product needs at least one factor".into()))?;
                let mut g = first.graph()?.ok_or_else(|| {
                    Error::Config("product factors must be graph families".into())
                })?;
                for f in it {
                    let h = f.graph()?.ok_or_else(|| {
                        Error::Config("product factors must be graph families".into())
                    })?;
                    g = graph::cartesian_product(&g, &h)?;
                }
                g
            }
            NetworkSpec::Graph { path } => {
                WeightedGraph::from_json(&std::fs::read_to_string(path)?)?
            }
            NetworkSpec::PowerLaw { .. }
            | NetworkSpec::RandomString { .. }
            | NetworkSpec::ModelFile { .. } => return Ok(None),
        }))
    }

    /// Full diffusive spectrum, zero mode included.
    pub fn spectrum(&self) -> Result<Spectrum> {
        match self {
            NetworkSpec::PowerLaw { rho, tau1, n } => power_law_spectrum(*rho, *tau1, *n),
            NetworkSpec::RandomString { n, kappa } => {
                Ok(crate::spectrum::circulant_spectrum(*n, &[*kappa])?.scaled((n * n) as f64))
            }
            NetworkSpec::ModelFile { path } => {
                let m = SouModel::from_json(&std::fs::read_to_string(path)?)?;
                Ok(m.spectrum().clone())
            }
            net => graph_spectrum(&net.graph()?.expect("graph family")),
        }
    }

    /// Eigenvalues in the family's natural index order, with the shape
    /// they sample, for families with both.
    pub fn natural_eigenvalues(&self) -> Result<Option<(Vec<f64>, ShapeFunction)>> {
        Ok(match self {
            NetworkSpec::Rouse { .. }
            | NetworkSpec::Circulant { .. }
            | NetworkSpec::Repulsive { .. } => {
                let g = self.graph()?.expect("graph family");
                let v =
                    crate::spectrum::closed_form_eigenvalues(&g).expect("circulant closed form");
                Some((v, self.shape()?))
            }
            NetworkSpec::PowerLaw { rho, tau1, n } => {
                let v = power_law_spectrum(*rho, *tau1, *n)?.values().to_vec();
                Some((v, self.shape()?))
            }
            _ => None,
        })
    }

    /// Shape function of a one-dimensional family on Lebesgue measure.
    pub fn shape(&self) -> Result<ShapeFunction> {
        match self {
            NetworkSpec::Rouse { kappa, .. } => Ok(ShapeFunction::rouse(*kappa)),
            NetworkSpec::Circulant { kappas, .. } => Ok(ShapeFunction::circulant(kappas)),
            NetworkSpec::Repulsive { order, .. } => {
                Ok(ShapeFunction::circulant(&graph::repulsive_weights(*order)?))
            }
            NetworkSpec::PowerLaw { rho, tau1, .. } => {
                Ok(ShapeFunction::power_law(1.0 / tau1, *rho))
            }
            other => Err(Error::Config(format!(
                "family {} has no Lebesgue shape function",
                other.label()
            ))),
        }
    }

    fn limit_pair(&self) -> Result<(ShapeFunction, LimitMeasure)> {
        match self {
            NetworkSpec::Complete { n, kappa } => {
                let rate = *n as f64 * kappa.unwrap_or(1.0 / (*n as f64 - 1.0));
                Ok((
                    ShapeFunction::power_law(rate, 1.0),
                    LimitMeasure::Dirac { x0: 1.0 },
                ))
            }
            NetworkSpec::Hypercube { dims, kappa } => {
                let k = kappa.unwrap_or(1.0 / *dims as f64);
                Ok((
                    ShapeFunction::power_law(2.0 * k * *dims as f64, 1.0),
                    LimitMeasure::Dirac { x0: 0.5 },
                ))
            }
            net => Ok((net.shape()?, LimitMeasure::Lebesgue)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AnalyticFinite,
    AnalyticLimit,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::AnalyticFinite => "analytic-finite",
            Method::AnalyticLimit => "analytic-limit",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    #[default]
    Geometric,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub kind: GridKind,
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn times(&self) -> Result<Vec<f64>> {
        let floor = if self.kind == GridKind::Linear {
            0.0
        } else {
            f64::MIN_POSITIVE
        };
        if !(self.t_min >= floor && self.t_min < self.t_max && self.t_max.is_finite())
            || self.n_points < 2
        {
            return Err(Error::Config(format!(
                "grid needs 0 < t_min < t_max and n_points >= 2, got {self:?}"
            )));
        }
        Ok(match self.kind {
            GridKind::Geometric => geometric_grid(self.t_min, self.t_max, self.n_points),
            GridKind::Linear => linear_grid(self.t_min, self.t_max, self.n_points),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Auto {
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowsSpec {
    Auto(Auto),
    Explicit(Vec<Window>),
}

impl Default for WindowsSpec {
    fn default() -> Self {
        WindowsSpec::Auto(Auto::Auto)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir() }
    }
}

/// Points per window in automatically built grids.
pub const AUTO_POINTS: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    #[serde(default)]
    pub windows: WindowsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Digest of the canonical serialization, output location excluded.
    pub fn digest(&self) -> Result<String> {
        let canonical = ExperimentConfig {
            output: OutputSpec::default(),
            ..self.clone()
        };
        Ok(crate::io::digest(&canonical.to_toml()?))
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == Method::MonteCarlo {
            if self.seed.is_none() {
                return Err(Error::Config("monte-carlo runs require a seed".into()));
            }
            if !matches!(self.n_paths, Some(n) if n > 0) {
                return Err(Error::Config(
                    "monte-carlo runs require n_paths >= 1".into(),
                ));
            }
        }
        if !(self.model.sigma > 0.0) || self.model.d == 0 {
            return Err(Error::Config(
                "sigma must be positive and d at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Labelled fit windows for this experiment.
    pub fn fit_windows(
        &self,
        model: Option<&SouModel>,
    ) -> Result<Vec<(Option<RegimeLabel>, Window)>> {
        match &self.windows {
            WindowsSpec::Explicit(ws) => Ok(ws.iter().map(|w| (None, *w)).collect()),
            WindowsSpec::Auto(_) => match self.method {
                Method::AnalyticLimit => {
                    let tau1 = self.model.limit()?.tau1();
                    Ok(vec![(
                        Some(RegimeLabel::Intermediate),
                        Window::new(1e4 * tau1, 1e6 * tau1)?,
                    )])
                }
                _ => {
                    let m =
                        model.ok_or_else(|| Error::invalid("auto windows need a finite model"))?;
                    Ok(default_windows(m)?
                        .labelled()
                        .into_iter()
                        .map(|(l, w)| (Some(l), w))
                        .collect())
                }
            },
        }
    }

    /// Configured grid, or the union of per-window grids.
    pub fn times(&self, windows: &[(Option<RegimeLabel>, Window)]) -> Result<Vec<f64>> {
        if let Some(g) = &self.grid {
            return g.times();
        }
        let mut t: Vec<f64> = windows
            .iter()
            .flat_map(|(_, w)| w.grid(AUTO_POINTS))
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        Ok(t)
    }
}

/// Parses `rouse:8`, `rouse:8:0.5`, `complete:5`, `hypercube:3`,
/// `repulsive:64:2` or `power-law:1.5:1024` (comma separated for products).
pub fn parse_factor(s: &str) -> Result<NetworkSpec> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let bad = || Error::Config(format!("cannot parse factor {s:?}"));
    let num = |i: usize| {
        parts
            .get(i)
            .ok_or_else(bad)?
            .parse::<f64>()
            .map_err(|_| bad())
    };
    let int = |i: usize| {
        parts
            .get(i)
            .ok_or_else(bad)?
            .parse::<usize>()
            .map_err(|_| bad())
    };
    let opt = |i: usize| {
        parts
            .get(i)
            .map(|p| p.parse::<f64>().map_err(|_| bad()))
            .transpose()
    };
    Ok(match parts[0] {
        "rouse" => NetworkSpec::Rouse {
            n: int(1)?,
            kappa: opt(2)?.unwrap_or(1.0),
        },
        "complete" => NetworkSpec::Complete {
            n: int(1)?,
            kappa: opt(2)?,
        },
        "hypercube" => NetworkSpec::Hypercube {
            dims: int(1)? as u32,
            kappa: opt(2)?,
        },
        "repulsive" => NetworkSpec::Repulsive {
            n: int(1)?,
            order: int(2)?,
        },
        "power-law" => NetworkSpec::PowerLaw {
            rho: num(1)?,
            tau1: 1.0,
            n: int(2)?,
        },
        _ => return Err(bad()),
    })
}
