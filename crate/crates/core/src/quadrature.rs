//! Composite 16-node Gauss–Legendre quadrature with dyadic panels refined
//! toward the origin, where the limiting MSD integrands have their boundary
//! layer.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Maximum dyadic depth.
pub const MAX_DEPTH: u32 = 60;
const MAX_BISECTIONS: u32 = 24;

/// Nodes and weights of the 16-point rule on `[-1, 1]`.
pub fn gl16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let rule = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
        let mut pairs = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    })
}

/// One 16-point panel on `[a, b]`.
pub fn panel<F: Fn(f64) -> f64>(a: f64, b: f64, f: &F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * gl16()
        .iter()
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// Recursive bisection until a panel and its two halves agree to
/// `rel_tol` relative or `abs_tol` absolute.
pub fn adaptive_panel<F: Fn(f64) -> f64>(
    a: f64,
    b: f64,
    f: &F,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    bisect(a, b, panel(a, b, f), f, rel_tol, abs_tol, 0)
}

fn bisect<F: Fn(f64) -> f64>(
    a: f64,
    b: f64,
    whole: f64,
    f: &F,
    tol: f64,
    abs_tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = panel(a, m, f);
    let right = panel(m, b, f);
    let split = left + right;
    let diff = (split - whole).abs();
    if diff <= tol * split.abs() || diff <= abs_tol {
        return Ok(split);
    }
    if depth >= MAX_BISECTIONS {
        return Err(Error::numeric(format!(
            "panel [{a:e}, {b:e}] did not converge after {MAX_BISECTIONS} bisections (|Δ| = {:e})",
            (split - whole).abs()
        )));
    }
    Ok(bisect(a, m, left, f, tol, abs_tol, depth + 1)?
        + bisect(m, b, right, f, tol, abs_tol, depth + 1)?)
}

/// Integral over `[0, b]` with adaptive panels `[b 2^{-j-1}, b 2^{-j}]`,
/// `j < depth`, plus a single final panel `[0, b 2^{-depth}]`.
pub fn dyadic_integral<F: Fn(f64) -> f64>(f: &F, b: f64, depth: u32, rel_tol: f64) -> Result<f64> {
    let mut edges = Vec::with_capacity(depth as usize + 2);
    let mut hi = b;
    edges.push(hi);
    for _ in 0..depth {
        hi *= 0.5;
        edges.push(hi);
    }
    edges.push(0.0);
    let rough: f64 = edges.windows(2).map(|w| panel(w[1], w[0], f)).sum();
    // panels contributing below this are not refined further
    let abs_tol = 1e-2 * rel_tol * rough.abs();
    let tail = panel(0.0, hi, f);
    edges[..edges.len() - 1]
        .windows(2)
        .map(|w| adaptive_panel(w[1], w[0], f, rel_tol, abs_tol))
        .sum::<Result<f64>>()
        .map(|s| s + tail)
}

/// [`dyadic_integral`] starting at `initial_depth`, doubling the depth until
/// successive estimates agree to `rel_tol`.
pub fn dyadic_converged<F: Fn(f64) -> f64>(
    f: &F,
    b: f64,
    initial_depth: u32,
    rel_tol: f64,
) -> Result<f64> {
    let mut depth = initial_depth.clamp(1, MAX_DEPTH);
    let mut prev = dyadic_integral(f, b, depth, rel_tol)?;
    loop {
        let next_depth = (depth * 2).min(MAX_DEPTH);
        let next = dyadic_integral(f, b, next_depth, rel_tol)?;
        if (next - prev).abs() <= rel_tol * next.abs() || next == prev {
            return Ok(next);
        }
        if next_depth == MAX_DEPTH {
            return Err(Error::numeric(format!(
                "dyadic refinement did not converge by depth {MAX_DEPTH}: {prev:e} vs {next:e}"
            )));
        }
        depth = next_depth;
        prev = next;
    }
}

/// Fixed composite rule on `[0, b]` with `depth` dyadic panels, each split
/// into `split` equal sub-panels; used for tensor products.
pub fn dyadic_nodes(b: f64, depth: u32, split: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut push_panel = |lo: f64, hi: f64| {
        let w = (hi - lo) / split as f64;
        for s in 0..split {
            let a = lo + w * s as f64;
            let half = 0.5 * w;
            let mid = a + half;
            for (x, wt) in gl16() {
                out.push((mid + half * x, half * wt));
            }
        }
    };
    let mut hi = b;
    for _ in 0..depth {
        let lo = 0.5 * hi;
        push_panel(lo, hi);
        hi = lo;
    }
    push_panel(0.0, hi);
    out
}
