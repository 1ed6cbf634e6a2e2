//! Command-line front end.
//!
//! Every command writes its artifacts with `#`-prefixed provenance lines
//! (tool version, config digest, seed) and reports failures as a JSON
//! document on stderr with exit code 2 (invalid input, resource limits) or
//! 3 (numeric failure). `report` exits with 1 when a row fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytic::{msd_finite, msd_limit, msd_limit_product, MSDCurve, Provenance};
use crate::error::{Error, Result};
use crate::estimate::{fit_exponent, ExponentFit, RegimeLabel, Window};
use crate::io;
use crate::model::{CoefficientDist, SouModel};
use crate::report;
use crate::simulate::{ensemble_msd, sample_paths};
use crate::spectrum::shape_sup_distance;

pub mod config;

pub use config::{
    parse_factor, CoefficientSpec, ExperimentConfig, GridKind, GridSpec, Limit, Method,
    ModelConfig, NetworkSpec, OutputSpec, WindowsSpec,
};

#[derive(Parser, Debug)]
#[command(
    name = "ousum",
    version,
    about = "Sums of OU processes, bead-spring networks and anomalous diffusion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Diffusive spectrum of a network family as JSON.
    Spectrum(SpectrumArgs),
    /// Exact finite-n or limiting MSD curve.
    MsdAnalytic(AnalyticArgs),
    /// Monte Carlo MSD from exact path sampling.
    MsdSimulate(SimulateArgs),
    /// Log-log exponent fit of an MSD CSV over a window.
    FitExponent(FitArgs),
    /// Run an experiment from a TOML config, writing msd.csv and fit.json.
    Run(RunArgs),
    /// Reproduce every exponent regime as a pass/fail table.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Rouse,
    Circulant,
    Repulsive,
    Complete,
    Hypercube,
    Product,
    PowerLaw,
    RandomString,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DistArg {
    Uniform,
    Lognormal,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Network family.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Number of beads (or modes for power-law spectra).
    #[arg(long)]
    pub n: Option<usize>,
    /// Spring constant (complete: default 1/(n-1); hypercube: default 1/dims).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Circulant weights κ_1,…,κ_K.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub kappas: Option<Vec<f64>>,
    /// Repulsive order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Hypercube dimension.
    #[arg(long)]
    pub dims: Option<u32>,
    /// Product factors, e.g. `rouse:64,rouse:64`.
    #[arg(long)]
    pub of: Option<String>,
    /// Spectral parameter of a power-law spectrum.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Fastest relaxation time of a power-law spectrum.
    #[arg(long, default_value_t = 1.0)]
    pub tau1: f64,
    /// Graph JSON file instead of a named family.
    #[arg(long, conflicts_with = "family")]
    pub graph: Option<PathBuf>,
    /// Model JSON file instead of a named family.
    #[arg(long, conflicts_with_all = ["family", "graph"])]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Ambient dimension.
    #[arg(long, default_value_t = 1)]
    pub d: u32,
    /// Random coefficients instead of 1/√n.
    #[arg(long, value_enum)]
    pub random_coefficients: Option<DistArg>,
    /// Seed for random coefficients.
    #[arg(long, default_value_t = 0)]
    pub coefficient_seed: u64,
}

fn need<T: Copy>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("--{flag} is required for family {family}")))
}

impl ModelArgs {
    pub fn network(&self) -> Result<NetworkSpec> {
        if let Some(p) = &self.graph {
            return Ok(NetworkSpec::Graph { path: p.clone() });
        }
        if let Some(p) = &self.model {
            return Ok(NetworkSpec::ModelFile { path: p.clone() });
        }
        let family = self.family.ok_or_else(|| {
            Error::Config("one of --family, --graph or --model is required".into())
        })?;
        Ok(match family {
            FamilyArg::Rouse => NetworkSpec::Rouse {
                n: need(self.n, "n", "rouse")?,
                kappa: self.kappa.unwrap_or(1.0),
            },
            FamilyArg::Circulant => NetworkSpec::Circulant {
                n: need(self.n, "n", "circulant")?,
                kappas: self.kappas.clone().ok_or_else(|| {
                    Error::Config("--kappas is required for family circulant".into())
                })?,
            },
            FamilyArg::Repulsive => NetworkSpec::Repulsive {
                n: need(self.n, "n", "repulsive")?,
                order: need(self.order, "order", "repulsive")?,
            },
            FamilyArg::Complete => NetworkSpec::Complete {
                n: need(self.n, "n", "complete")?,
                kappa: self.kappa,
            },
            FamilyArg::Hypercube => NetworkSpec::Hypercube {
                dims: need(self.dims, "dims", "hypercube")?,
                kappa: self.kappa,
            },
            FamilyArg::Product => {
                let of = self
                    .of
                    .as_deref()
                    .ok_or_else(|| Error::Config("--of is required for family product".into()))?;
                NetworkSpec::Product {
                    factors: of.split(',').map(parse_factor).collect::<Result<_>>()?,
                }
            }
            FamilyArg::PowerLaw => NetworkSpec::PowerLaw {
                rho: need(self.rho, "rho", "power-law")?,
                tau1: self.tau1,
                n: need(self.n, "n", "power-law")?,
            },
            FamilyArg::RandomString => NetworkSpec::RandomString {
                n: need(self.n, "n", "random-string")?,
                kappa: self.kappa.unwrap_or(1.0),
            },
        })
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        let coefficients = match self.random_coefficients {
            None => CoefficientSpec::Uniform,
            Some(DistArg::Uniform) => CoefficientSpec::Random {
                dist: CoefficientDist::Uniform,
                seed: self.coefficient_seed,
            },
            Some(DistArg::Lognormal) => CoefficientSpec::Random {
                dist: CoefficientDist::LogNormal,
                seed: self.coefficient_seed,
            },
        };
        Ok(ModelConfig {
            network: self.network()?,
            sigma: self.sigma,
            d: self.d,
            coefficients,
        })
    }
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Grid spacing.
    #[arg(long, value_enum, default_value = "geometric")]
    pub grid: GridKindArg,
    /// First grid time (default: grids built from the fit windows).
    #[arg(long, requires = "t_max")]
    pub t_min: Option<f64>,
    #[arg(long, requires = "t_min")]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 60)]
    pub points: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GridKindArg {
    Geometric,
    Linear,
}

impl GridArgs {
    fn spec(&self) -> Option<GridSpec> {
        let kind = match self.grid {
            GridKindArg::Geometric => GridKind::Geometric,
            GridKindArg::Linear => GridKind::Linear,
        };
        Some(GridSpec {
            kind,
            t_min: self.t_min?,
            t_max: self.t_max?,
            n_points: self.points,
        })
    }
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Report max_k |λ_k − φ(k/n)| against the family's shape function.
    #[arg(long)]
    pub shape_distance: bool,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AnalyticMethod {
    Finite,
    Limit,
}

#[derive(Args, Debug)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "finite")]
    pub method: AnalyticMethod,
    /// CSV output (stdout when neither output is given).
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long)]
    pub seed: u64,
    /// Also store every path as `path_id,t,x` (subject to the memory budget).
    #[arg(long)]
    pub ensemble_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// MSD CSV with header `t,msd[,stderr]`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub t_lo: f64,
    #[arg(long)]
    pub t_hi: f64,
    #[arg(long, value_enum)]
    pub label: Option<LabelArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LabelArg {
    Short,
    Intermediate,
    Long,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long, default_value = "report")]
    pub out_dir: PathBuf,
    /// Restrict to the named rows.
    #[arg(long)]
    pub only: Vec<String>,
    /// Recorded in the artifacts.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let doc = serde_json::json!({"error": "usage", "message": text.trim()});
                let _ = writeln!(err, "{doc}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let doc = serde_json::json!({"error": e.kind(), "message": e.to_string()});
            let _ = writeln!(err, "{doc}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Spectrum(a) => cmd_spectrum(&a, out).map(|_| 0),
        Command::MsdAnalytic(a) => cmd_msd_analytic(&a, out).map(|_| 0),
        Command::MsdSimulate(a) => cmd_msd_simulate(&a, out).map(|_| 0),
        Command::FitExponent(a) => cmd_fit_exponent(&a, out).map(|_| 0),
        Command::Run(a) => {
            let text = std::fs::read_to_string(&a.config)?;
            let mut cfg = ExperimentConfig::from_toml(&text)?;
            if let Some(d) = &a.out_dir {
                cfg.output.dir = d.clone();
            }
            cmd_run(&cfg, out).map(|_| 0)
        }
        Command::Report(a) => cmd_report(&a, out),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => io::write_file(p, text),
        None => {
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SpectrumDocOut<'a> {
    tool: &'a str,
    family: String,
    n_modes: usize,
    values: &'a [f64],
    multiplicities: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    shape_distance: Option<f64>,
}

pub fn cmd_spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> Result<()> {
    let net = a.model.network()?;
    let spec = net.spectrum()?;
    let shape_distance = if a.shape_distance {
        let (natural, shape) = net.natural_eigenvalues()?.ok_or_else(|| {
            Error::Config(format!("family {} has no shape function", net.label()))
        })?;
        Some(shape_sup_distance(&natural, &shape)?)
    } else {
        None
    };
    let doc = SpectrumDocOut {
        tool: crate::TOOL,
        family: net.label(),
        n_modes: spec.n_modes(),
        values: spec.values(),
        multiplicities: spec.multiplicities(),
        shape_distance,
    };
    emit(out, a.out.as_deref(), &io::json_string(&doc)?)
}

/// Curve, fits and provenance produced by an experiment.
pub struct RunOutput {
    pub curve: MSDCurve,
    pub fits: Vec<ExponentFit>,
    pub header: io::Header,
    pub digest: String,
}

fn limit_curve(cfg: &ExperimentConfig, times: &[f64]) -> Result<MSDCurve> {
    Ok(match cfg.model.limit()? {
        Limit::Single {
            shape,
            measure,
            scale,
        } => msd_limit(&shape, &measure, times)?.scaled(scale),
        Limit::Product { shape, scale } => msd_limit_product(&shape, times)?.scaled(scale),
    })
}

/// Evaluates the curve of an experiment and fits every window.
pub fn execute(cfg: &ExperimentConfig, fit: bool) -> Result<RunOutput> {
    cfg.validate()?;
    let model: Option<SouModel> = match cfg.method {
        Method::AnalyticLimit => None,
        _ => Some(cfg.model.build()?),
    };
    let windows = cfg.fit_windows(model.as_ref())?;
    let times = cfg.times(&windows)?;
    let curve = match cfg.method {
        Method::AnalyticFinite => msd_finite(model.as_ref().expect("finite model"), &times)?,
        Method::AnalyticLimit => limit_curve(cfg, &times)?,
        Method::MonteCarlo => ensemble_msd(
            model.as_ref().expect("finite model"),
            &times,
            cfg.n_paths.expect("validated"),
            cfg.seed.expect("validated"),
        )?,
    };
    let fits = if fit {
        windows
            .iter()
            .map(|(label, w)| {
                let f = fit_exponent(&curve, *w)?;
                Ok(match label {
                    Some(l) => f.labelled(*l),
                    None => f,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let digest = cfg.digest()?;
    let mut extra = vec![
        ("config", digest.clone()),
        ("family", cfg.model.network.label()),
        ("method", cfg.method.as_str().to_string()),
    ];
    if let Some(m) = &model {
        extra.push(("model", m.digest()));
    }
    if let Some(s) = cfg.seed {
        extra.push(("seed", s.to_string()));
    }
    if let Some(p) = cfg.n_paths {
        extra.push(("n_paths", p.to_string()));
    }
    let header = io::header(curve.provenance, &extra);
    Ok(RunOutput {
        curve,
        fits,
        header,
        digest,
    })
}

#[derive(Serialize)]
struct CurveJson<'a> {
    tool: &'a str,
    config: &'a str,
    #[serde(flatten)]
    curve: &'a MSDCurve,
}

fn write_curve_outputs(
    r: &RunOutput,
    csv: Option<&Path>,
    json: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    let text = io::curve_csv_string(&r.curve, &r.header)?;
    if csv.is_some() || json.is_none() {
        emit(out, csv, &text)?;
    }
    if let Some(p) = json {
        let doc = CurveJson {
            tool: crate::TOOL,
            config: &r.digest,
            curve: &r.curve,
        };
        io::write_file(p, &io::json_string(&doc)?)?;
    }
    Ok(())
}

fn adhoc_config(model: &ModelArgs, grid: &GridArgs, method: Method) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        method,
        windows: WindowsSpec::default(),
        n_paths: None,
        seed: None,
        model: model.model_config()?,
        grid: grid.spec(),
        output: OutputSpec::default(),
    })
}

pub fn cmd_msd_analytic(a: &AnalyticArgs, out: &mut dyn Write) -> Result<()> {
    let method = match a.method {
        AnalyticMethod::Finite => Method::AnalyticFinite,
        AnalyticMethod::Limit => Method::AnalyticLimit,
    };
    let cfg = adhoc_config(&a.model, &a.grid, method)?;
    let r = execute(&cfg, false)?;
    write_curve_outputs(&r, a.out_csv.as_deref(), a.out_json.as_deref(), out)
}

pub fn cmd_msd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = adhoc_config(&a.model, &a.grid, Method::MonteCarlo)?;
    cfg.seed = Some(a.seed);
    cfg.n_paths = Some(a.paths);
    let r = execute(&cfg, false)?;
    if let Some(p) = &a.ensemble_csv {
        let model = cfg.model.build()?;
        let e = sample_paths(&model, &r.curve.times, a.paths, a.seed)?;
        let mut buf = Vec::new();
        io::write_ensemble_csv(&mut buf, &e, &r.header)?;
        io::write_file(p, &String::from_utf8(buf).expect("ASCII output"))?;
    }
    write_curve_outputs(&r, a.out_csv.as_deref(), a.out_json.as_deref(), out)
}

pub fn cmd_fit_exponent(a: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let curve = io::read_curve_file(&a.input)?;
    let mut fit = fit_exponent(&curve, Window::new(a.t_lo, a.t_hi)?)?;
    if let Some(l) = a.label {
        fit = fit.labelled(match l {
            LabelArg::Short => RegimeLabel::Short,
            LabelArg::Intermediate => RegimeLabel::Intermediate,
            LabelArg::Long => RegimeLabel::Long,
        });
    }
    emit(out, a.out.as_deref(), &io::json_string(&fit)?)
}

#[derive(Serialize)]
struct FitDoc<'a> {
    tool: &'a str,
    config: &'a str,
    family: String,
    method: &'a str,
    fits: &'a [ExponentFit],
}

/// Writes `msd.csv` and `fit.json` under `output.dir` and prints a summary
/// line `family=<..> method=<..> nu=<..>±<..>`.
pub fn cmd_run(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<RunOutput> {
    let r = execute(cfg, true)?;
    let dir = &cfg.output.dir;
    io::write_file(
        &dir.join("msd.csv"),
        &io::curve_csv_string(&r.curve, &r.header)?,
    )?;
    let doc = FitDoc {
        tool: crate::TOOL,
        config: &r.digest,
        family: cfg.model.network.label(),
        method: cfg.method.as_str(),
        fits: &r.fits,
    };
    io::write_file(&dir.join("fit.json"), &io::json_string(&doc)?)?;
    let main = r
        .fits
        .iter()
        .find(|f| f.regime_label == Some(RegimeLabel::Intermediate))
        .or(r.fits.first())
        .ok_or_else(|| Error::invalid("no fit windows"))?;
    writeln!(
        out,
        "family={} method={} nu={:.4}±{:.4}",
        cfg.model.network.label(),
        cfg.method.as_str(),
        main.nu,
        main.stderr_nu
    )?;
    Ok(r)
}

pub fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<i32> {
    let rows = report::report_rows(&a.only)?;
    let mut extra = vec![("rows", rows.len().to_string())];
    if let Some(s) = a.seed {
        extra.push(("seed", s.to_string()));
    }
    let header = io::header(Provenance::AnalyticLimit, &extra);
    let md = report::render_markdown(&rows);
    io::write_file(&a.out_dir.join("report.md"), &md)?;
    io::write_file(
        &a.out_dir.join("report.csv"),
        &report::render_csv(&rows, &header),
    )?;
    out.write_all(md.as_bytes())?;
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
}
