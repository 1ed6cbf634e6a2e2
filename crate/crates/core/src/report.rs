//! Exponent reproduction table: one row per network family or regime.

use serde::Serialize;

use crate::analytic::{msd_limit, msd_limit_product, LimitMeasure};
use crate::error::{Error, Result};
use crate::estimate::{fit_exponent, log_growth_check, plateau_ratio, Window};
use crate::graph::repulsive_weights;
use crate::spectrum::{ProductShape, ShapeFunction};

/// Points per fit window.
pub const REPORT_POINTS: usize = 40;

/// Row names in table order.
pub const ROWS: [&str; 9] = [
    "rouse",
    "power-law-1.5",
    "power-law-4",
    "power-law-0.5",
    "repulsive-2",
    "repulsive-3",
    "torus-2d",
    "torus-3d",
    "complete",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub row: String,
    pub family: String,
    pub predicted: String,
    pub measured: String,
    pub tolerance: String,
    pub pass: bool,
}

fn exponent_row(
    name: &str,
    family: &str,
    shape: &ShapeFunction,
    window: Window,
    nu: f64,
    tol: f64,
) -> Result<ReportRow> {
    let curve = msd_limit(shape, &LimitMeasure::Lebesgue, &window.grid(REPORT_POINTS))?;
    let fit = fit_exponent(&curve, window)?;
    Ok(ReportRow {
        row: name.into(),
        family: family.into(),
        predicted: format!("nu = {nu:.4}"),
        measured: format!("nu = {:.4} on [{:e}, {:e}]", fit.nu, window.lo, window.hi),
        tolerance: format!("{tol}"),
        pass: (fit.nu - nu).abs() <= tol,
    })
}

fn plateau_row(name: &str, family: &str, ratio: f64) -> ReportRow {
    ReportRow {
        row: name.into(),
        family: family.into(),
        predicted: "bounded".into(),
        measured: format!("MSD(1e6 tau1)/MSD(1e4 tau1) = {ratio:.5}"),
        tolerance: "< 1.05".into(),
        pass: ratio < 1.05,
    }
}

/// Evaluates one named row.
pub fn report_row(name: &str) -> Result<ReportRow> {
    let late = Window::new(1e4, 1e6)?;
    match name {
        "rouse" => exponent_row(
            name,
            "rouse limit 4 sin^2(pi x)",
            &ShapeFunction::rouse(1.0),
            Window::new(1e2, 1e4)?,
            0.5,
            0.02,
        ),
        "power-law-1.5" => exponent_row(
            name,
            "power-law rho = 1.5",
            &ShapeFunction::power_law(1.0, 1.5),
            late,
            1.0 / 3.0,
            0.02,
        ),
        "power-law-4" => exponent_row(
            name,
            "power-law rho = 4",
            &ShapeFunction::power_law(1.0, 4.0),
            late,
            0.75,
            0.02,
        ),
        "power-law-0.5" => {
            let c = msd_limit(
                &ShapeFunction::power_law(1.0, 0.5),
                &LimitMeasure::Lebesgue,
                &[1e4, 1e6],
            )?;
            Ok(plateau_row(name, "power-law rho = 0.5", plateau_ratio(&c)?))
        }
        "repulsive-2" | "repulsive-3" => {
            let order = if name == "repulsive-2" { 2 } else { 3 };
            let shape = ShapeFunction::circulant(&repulsive_weights(order)?);
            let nu = 1.0 - 1.0 / (2.0 * order as f64);
            exponent_row(
                name,
                &format!("repulsive circulant, order {order}"),
                &shape,
                late,
                nu,
                0.02,
            )
        }
        "torus-2d" => {
            let w = Window::new(1e3, 1e5)?;
            let shape = ProductShape::power(ShapeFunction::rouse(1.0), 2)?;
            let curve = msd_limit_product(&shape, &w.grid(REPORT_POINTS))?;
            let g = log_growth_check(&curve, w)?;
            Ok(ReportRow {
                row: name.into(),
                family: "rouse x rouse limit".into(),
                predicted: "ln t".into(),
                measured: format!(
                    "slope {:.5} per ln t, r2(ln) = {:.8} vs best power nu = {:.2} r2 = {:.8}",
                    g.slope, g.r2_log, g.best_nu, g.best_power_r2
                ),
                tolerance: "ln fit beats every power".into(),
                pass: g.log_wins,
            })
        }
        "torus-3d" => {
            let shape = ProductShape::power(ShapeFunction::rouse(1.0), 3)?;
            let tau1 = 1.0 / 12.0;
            let c = msd_limit_product(&shape, &[1e4 * tau1, 1e6 * tau1])?;
            Ok(plateau_row(name, "rouse^3 limit", plateau_ratio(&c)?))
        }
        "complete" => {
            let times: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
            let c = msd_limit(
                &ShapeFunction::power_law(1.0, 1.0),
                &LimitMeasure::Dirac { x0: 1.0 },
                &times,
            )?;
            let err = times
                .iter()
                .zip(&c.values)
                .map(|(t, v)| (v - (1.0 - (-2.0 * t).exp()) / 2.0).abs())
                .fold(0.0, f64::max);
            Ok(ReportRow {
                row: name.into(),
                family: "complete graph limit".into(),
                predicted: "(1 - exp(-2t))/2".into(),
                measured: format!("max error {err:.2e} at 20 points"),
                tolerance: "1e-6".into(),
                pass: err <= 1e-6,
            })
        }
        other => Err(Error::invalid(format!(
            "unknown report row {other:?}; rows are {}",
            ROWS.join(", ")
        ))),
    }
}

/// Rows in table order, restricted to `only` when non-empty.
pub fn report_rows(only: &[String]) -> Result<Vec<ReportRow>> {
    for o in only {
        if !ROWS.contains(&o.as_str()) {
            return Err(Error::invalid(format!(
                "unknown report row {o:?}; rows are {}",
                ROWS.join(", ")
            )));
        }
    }
    ROWS.iter()
        .filter(|r| only.is_empty() || only.iter().any(|o| o == *r))
        .map(|r| report_row(r))
        .collect()
}

pub fn render_markdown(rows: &[ReportRow]) -> String {
    let mut s = String::from(
        "| row | family | predicted | measured | tolerance | result |\n|---|---|---|---|---|---|\n",
    );
    for r in rows {
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            r.row,
            r.family,
            r.predicted,
            r.measured,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(rows: &[ReportRow], header: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in header {
        s.push_str(&format!("# {k}: {v}\n"));
    }
    s.push_str("row,family,predicted,measured,tolerance,pass\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&r.row),
            csv_field(&r.family),
            csv_field(&r.predicted),
            csv_field(&r.measured),
            csv_field(&r.tolerance),
            r.pass
        ));
    }
    s
}
