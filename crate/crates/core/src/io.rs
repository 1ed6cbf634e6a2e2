//! CSV and JSON artifacts.
//!
//! MSD curves are written as `t,msd[,stderr]` preceded by `# key: value`
//! provenance lines. Floats use Rust's shortest round-trip formatting, so a
//! curve read back is bit-identical to the one written.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use crate::analytic::{MSDCurve, Provenance};
use crate::error::{Error, Result};
use crate::simulate::{digest_parts, PathEnsemble};

/// Ordered `key: value` provenance lines.
pub type Header = Vec<(String, String)>;

/// Standard header: tool, provenance and any extra pairs.
pub fn header(provenance: Provenance, extra: &[(&str, String)]) -> Header {
    let mut h = vec![
        ("tool".to_string(), crate::TOOL.to_string()),
        ("provenance".to_string(), provenance.as_str().to_string()),
    ];
    h.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    h
}

/// Short hex digest of a document.
pub fn digest(text: &str) -> String {
    digest_parts(&[text])
}

pub fn write_curve_csv<W: Write>(out: &mut W, curve: &MSDCurve, header: &Header) -> Result<()> {
    for (k, v) in header {
        writeln!(out, "# {k}: {v}")?;
    }
    for note in &curve.notes {
        writeln!(out, "# note: {note}")?;
    }
    match &curve.stderr {
        Some(se) => {
            writeln!(out, "t,msd,stderr")?;
            for ((t, v), s) in curve.times.iter().zip(&curve.values).zip(se) {
                writeln!(out, "{t:?},{v:?},{s:?}")?;
            }
        }
        None => {
            writeln!(out, "t,msd")?;
            for (t, v) in curve.times.iter().zip(&curve.values) {
                writeln!(out, "{t:?},{v:?}")?;
            }
        }
    }
    Ok(())
}

pub fn curve_csv_string(curve: &MSDCurve, header: &Header) -> Result<String> {
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, curve, header)?;
    Ok(String::from_utf8(buf).expect("ASCII output"))
}

/// Parses a curve CSV. Provenance comes from a `# provenance:` line when
/// present, otherwise from the presence of a stderr column.
pub fn read_curve_csv<R: BufRead>(input: R) -> Result<MSDCurve> {
    let mut provenance = None;
    let mut columns: Option<usize> = None;
    let (mut times, mut values, mut stderr) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(p) = rest.trim().strip_prefix("provenance:") {
                provenance = Some(parse_provenance(p.trim())?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match columns {
            None => {
                columns = Some(match fields.as_slice() {
                    ["t", "msd"] => 2,
                    ["t", "msd", "stderr"] => 3,
                    _ => {
                        return Err(Error::invalid(format!(
                            "line {}: expected header t,msd[,stderr]",
                            lineno + 1
                        )))
                    }
                });
            }
            Some(c) => {
                if fields.len() != c {
                    return Err(Error::invalid(format!(
                        "line {}: expected {c} fields",
                        lineno + 1
                    )));
                }
                let num = |s: &str| {
                    s.parse::<f64>().map_err(|_| {
                        Error::invalid(format!("line {}: bad number {s:?}", lineno + 1))
                    })
                };
                times.push(num(fields[0])?);
                values.push(num(fields[1])?);
                if c == 3 {
                    stderr.push(num(fields[2])?);
                }
            }
        }
    }
    let columns = columns.ok_or_else(|| Error::invalid("missing header t,msd[,stderr]"))?;
    let provenance = provenance.unwrap_or(if columns == 3 {
        Provenance::MonteCarlo
    } else {
        Provenance::AnalyticFinite
    });
    MSDCurve::new(times, values, provenance, (columns == 3).then_some(stderr))
}

fn parse_provenance(s: &str) -> Result<Provenance> {
    match s {
        "analytic-finite" => Ok(Provenance::AnalyticFinite),
        "analytic-limit" => Ok(Provenance::AnalyticLimit),
        "monte-carlo" => Ok(Provenance::MonteCarlo),
        other => Err(Error::invalid(format!("unknown provenance {other:?}"))),
    }
}

pub fn read_curve_file(path: &Path) -> Result<MSDCurve> {
    let f = fs::File::open(path)?;
    read_curve_csv(std::io::BufReader::new(f))
}

/// Path-level CSV `path_id,t,x`, with a `component` column when `d > 1`.
pub fn write_ensemble_csv<W: Write>(out: &mut W, e: &PathEnsemble, header: &Header) -> Result<()> {
    for (k, v) in header {
        writeln!(out, "# {k}: {v}")?;
    }
    writeln!(out, "# seed: {}", e.seed())?;
    writeln!(out, "# model: {}", e.model_digest())?;
    if e.d() == 1 {
        writeln!(out, "path_id,t,x")?;
    } else {
        writeln!(out, "path_id,component,t,x")?;
    }
    for p in 0..e.n_paths() {
        for c in 0..e.d() {
            for (t, x) in e.times().iter().zip(e.path(p, c)) {
                if e.d() == 1 {
                    writeln!(out, "{p},{t:?},{x:?}")?;
                } else {
                    writeln!(out, "{p},{c},{t:?},{x:?}")?;
                }
            }
        }
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}
