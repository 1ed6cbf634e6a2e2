//! MSD curves from ensembles, log-log exponent fits and regime windows.

use serde::{Deserialize, Serialize};

use crate::analytic::{msd_finite, MSDCurve, Provenance};
use crate::error::{Error, Result};
use crate::model::SouModel;
use crate::simulate::PathEnsemble;

/// Fewest curve points accepted by [`fit_exponent`].
pub const MIN_FIT_POINTS: usize = 8;
/// Points per window used by [`profile_check`].
pub const PROFILE_POINTS: usize = 40;
/// Smallest `τ_N/τ₁` accepted by [`profile_check`].
pub const PROFILE_SEPARATION: f64 = 1e4;

/// Closed time interval `[lo, hi]` with `0 < lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl TryFrom<(f64, f64)> for Window {
    type Error = Error;

    fn try_from((lo, hi): (f64, f64)) -> Result<Self> {
        Window::new(lo, hi)
    }
}

impl From<Window> for (f64, f64) {
    fn from(w: Window) -> Self {
        (w.lo, w.hi)
    }
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::invalid(format!(
                "window needs 0 < lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(Window { lo, hi })
    }

    /// `n ≥ 2` geometrically spaced times from `lo` to `hi` inclusive.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        geometric_grid(self.lo, self.hi, n)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    /// Decades spanned.
    pub fn decades(&self) -> f64 {
        (self.hi / self.lo).log10()
    }
}

/// `n` geometric points from `lo` to `hi`; endpoints exact.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let r = (hi / lo).ln();
    let mut g: Vec<f64> = (0..n)
        .map(|i| lo * (r * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[n - 1] = hi;
    g
}

/// `n` evenly spaced points from `lo` to `hi`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeLabel {
    Short,
    Intermediate,
    Long,
}

/// Log-log slope of an MSD curve over a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub nu: f64,
    pub intercept: f64,
    pub window: Window,
    pub stderr_nu: f64,
    pub r_squared: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime_label: Option<RegimeLabel>,
    pub n_points: usize,
}

impl ExponentFit {
    pub fn labelled(mut self, label: RegimeLabel) -> Self {
        self.regime_label = Some(label);
        self
    }
}

/// Sample MSD `mean_p |x_p(t)|²` with Gaussian standard errors
/// `sqrt(2/d)·MSD/√M`.
pub fn msd_from_ensemble(e: &PathEnsemble) -> Result<MSDCurve> {
    let m = e.n_paths();
    let d = e.d();
    let nt = e.times().len();
    let mut sums = vec![0.0; nt];
    for p in 0..m {
        for c in 0..d {
            for (s, x) in sums.iter_mut().zip(e.path(p, c)) {
                *s += x * x;
            }
        }
    }
    let values: Vec<f64> = sums.iter().map(|s| s / m as f64).collect();
    let stderr = (m > 1).then(|| gaussian_stderr(&values, d, m));
    let mut curve = MSDCurve::new(e.times().to_vec(), values, Provenance::MonteCarlo, stderr)?;
    if m == 1 {
        curve
            .notes
            .push("single path: standard errors omitted".into());
    }
    Ok(curve)
}

pub(crate) fn gaussian_stderr(values: &[f64], d: usize, m: usize) -> Vec<f64> {
    let k = (2.0 / d as f64).sqrt() / (m as f64).sqrt();
    values.iter().map(|v| k * v).collect()
}

/// Weighted least squares of `ln MSD` on `ln t` over the curve points in
/// `window` (endpoints included).
///
/// Weights are `(MSD/stderr)²` when the curve carries standard errors and
/// uniform otherwise. The reported `stderr_nu` is the residual-based
/// estimate, raised for Monte Carlo curves to the bound
/// `Σ|a_i|·stderr_i/MSD_i` that holds under any correlation between points.
pub fn fit_exponent(curve: &MSDCurve, window: Window) -> Result<ExponentFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rel = Vec::new();
    for (i, (&t, &v)) in curve.times.iter().zip(&curve.values).enumerate() {
        if !window.contains(t) {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::invalid(format!("nonpositive MSD {v} at t = {t}")));
        }
        xs.push(t.ln());
        ys.push(v.ln());
        rel.push(curve.stderr.as_ref().map(|s| s[i] / v));
    }
    let n = xs.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::invalid(format!(
            "window [{:e}, {:e}] holds {n} points, need {MIN_FIT_POINTS}",
            window.lo, window.hi
        )));
    }
    let weighted = rel.iter().all(|r| matches!(r, Some(x) if *x > 0.0));
    let w: Vec<f64> = if weighted {
        rel.iter().map(|r| 1.0 / r.unwrap().powi(2)).collect()
    } else {
        vec![1.0; n]
    };
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&xs).map(|(w, x)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = w
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(w, (x, y))| w * (x - mx) * (y - my))
        .sum();
    let syy: f64 = w.iter().zip(&ys).map(|(w, y)| w * (y - my).powi(2)).sum();
    let nu = sxy / sxx;
    let intercept = my - nu * mx;
    let rss: f64 = w
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(w, (x, y))| w * (y - intercept - nu * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - rss / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let mut stderr_nu = (rss / (n - 2) as f64 / sxx).sqrt();
    if weighted {
        let bound: f64 = w
            .iter()
            .zip(&xs)
            .zip(&rel)
            .map(|((w, x), r)| (w * (x - mx) / sxx).abs() * r.unwrap())
            .sum();
        stderr_nu = stderr_nu.max(bound);
    }
    if !stderr_nu.is_finite() || !nu.is_finite() {
        return Err(Error::numeric("exponent fit produced non-finite values"));
    }
    Ok(ExponentFit {
        nu,
        intercept,
        window,
        stderr_nu,
        r_squared,
        regime_label: None,
        n_points: n,
    })
}

/// Windows placed a decade or more away from the relaxation times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefaultWindows {
    /// `1/λ_max`.
    pub tau1: f64,
    /// `1/λ_min`.
    pub tau_n: f64,
    pub short: Window,
    /// Absent when `10·τ₁ ≥ 0.1·τ_N`.
    pub intermediate: Option<Window>,
    pub long: Window,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DefaultWindows {
    /// Present windows with their labels, in time order.
    pub fn labelled(&self) -> Vec<(RegimeLabel, Window)> {
        let mut v = vec![(RegimeLabel::Short, self.short)];
        if let Some(w) = self.intermediate {
            v.push((RegimeLabel::Intermediate, w));
        }
        v.push((RegimeLabel::Long, self.long));
        v
    }
}

/// Short `(1e-3 τ₁, 1e-1 τ₁)`, intermediate `(10 τ₁, 0.1 τ_N)` and long
/// `(10 τ_N, 1e3 τ_N)` windows.
pub fn default_windows(model: &SouModel) -> Result<DefaultWindows> {
    let rates = model.rates();
    if rates.is_empty() {
        return Err(Error::invalid("model has no OU modes"));
    }
    let lmax = rates.iter().cloned().fold(f64::MIN, f64::max);
    let lmin = rates.iter().cloned().fold(f64::MAX, f64::min);
    let (tau1, tau_n) = (1.0 / lmax, 1.0 / lmin);
    let mut warnings = Vec::new();
    let intermediate = if 10.0 * tau1 < 0.1 * tau_n {
        Some(Window::new(10.0 * tau1, 0.1 * tau_n)?)
    } else {
        warnings.push(format!(
            "no intermediate window: tau_N/tau_1 = {:.3e} < 100",
            tau_n / tau1
        ));
        None
    };
    Ok(DefaultWindows {
        tau1,
        tau_n,
        short: Window::new(1e-3 * tau1, 1e-1 * tau1)?,
        intermediate,
        long: Window::new(10.0 * tau_n, 1e3 * tau_n)?,
        warnings,
    })
}

/// Fits on the three default windows of a finite model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub short: ExponentFit,
    pub intermediate: ExponentFit,
    pub long: ExponentFit,
    /// Both outer exponents within 0.03 of 1 (expected whenever `c₀ > 0`).
    pub diffusive_ends: bool,
}

impl Profile {
    pub fn exponents(&self) -> (f64, f64, f64) {
        (self.short.nu, self.intermediate.nu, self.long.nu)
    }
}

/// [`msd_finite`] and [`fit_exponent`] on each default window.
pub fn profile_check(model: &SouModel) -> Result<Profile> {
    let w = default_windows(model)?;
    if w.tau_n / w.tau1 < PROFILE_SEPARATION {
        return Err(Error::invalid(format!(
            "scale separation tau_N/tau_1 = {:.3e} below {PROFILE_SEPARATION:e}; use a larger n",
            w.tau_n / w.tau1
        )));
    }
    let fit = |win: Window, label| -> Result<ExponentFit> {
        let curve = msd_finite(model, &win.grid(PROFILE_POINTS))?;
        Ok(fit_exponent(&curve, win)?.labelled(label))
    };
    let short = fit(w.short, RegimeLabel::Short)?;
    let intermediate = fit(
        w.intermediate.expect("separation checked"),
        RegimeLabel::Intermediate,
    )?;
    let long = fit(w.long, RegimeLabel::Long)?;
    let diffusive_ends = (short.nu - 1.0).abs() <= 0.03 && (long.nu - 1.0).abs() <= 0.03;
    Ok(Profile {
        short,
        intermediate,
        long,
        diffusive_ends,
    })
}

/// Logarithmic growth test: `r²` of MSD regressed on `ln t` against the
/// best `r²` of MSD regressed on `t^ν` over the grid `ν = 0.05, 0.10, …, 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrowth {
    pub window: Window,
    pub slope: f64,
    pub r2_log: f64,
    pub best_nu: f64,
    pub best_power_r2: f64,
    pub log_wins: bool,
}

pub fn log_growth_check(curve: &MSDCurve, window: Window) -> Result<LogGrowth> {
    let pts: Vec<(f64, f64)> = curve
        .times
        .iter()
        .zip(&curve.values)
        .filter(|(t, _)| window.contains(**t))
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::invalid(format!(
            "window holds {} points, need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let logs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let (slope, r2_log) = ols_r2(&logs, &ys);
    let mut best_nu = 0.0;
    let mut best_power_r2 = f64::MIN;
    for i in 1..=20 {
        let nu = 0.05 * i as f64;
        let xs: Vec<f64> = pts.iter().map(|p| p.0.powf(nu)).collect();
        let (_, r2) = ols_r2(&xs, &ys);
        if r2 > best_power_r2 {
            best_power_r2 = r2;
            best_nu = nu;
        }
    }
    Ok(LogGrowth {
        window,
        slope,
        r2_log,
        best_nu,
        best_power_r2,
        log_wins: r2_log > best_power_r2,
    })
}

fn ols_r2(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, r2)
}

/// `MSD(t_hi)/MSD(t_lo)` from a curve evaluated at exactly those two times.
pub fn plateau_ratio(curve: &MSDCurve) -> Result<f64> {
    match (curve.values.first(), curve.values.last()) {
        (Some(a), Some(b)) if *a > 0.0 && curve.len() >= 2 => Ok(b / a),
        _ => Err(Error::invalid("plateau ratio needs two positive values")),
    }
}
