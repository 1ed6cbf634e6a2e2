//! Diffusive spectra: eigenvalues of `-L`, by dense solve or closed form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate_circulant, Family, LaplacianMatrix, WeightedGraph, DENSE_CAP};

mod shape;

pub use shape::{estimate_rho, shape_sup_distance, ProductShape, ShapeFunction};

/// Relative tolerance (to the spectral radius) for merging eigenvalues.
pub const MERGE_TOL: f64 = 1e-9;

/// Sorted eigenvalues of `-L` with multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumDoc")]
pub struct Spectrum {
    values: Vec<f64>,
    multiplicities: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumDoc {
    values: Vec<f64>,
    multiplicities: Vec<usize>,
}

impl TryFrom<SpectrumDoc> for Spectrum {
    type Error = Error;

    fn try_from(doc: SpectrumDoc) -> Result<Self> {
        Spectrum::from_parts(doc.values, doc.multiplicities)
    }
}

impl Spectrum {
    /// Validated constructor: values strictly increasing and finite,
    /// multiplicities positive and aligned.
    pub fn from_parts(values: Vec<f64>, multiplicities: Vec<usize>) -> Result<Self> {
        if values.len() != multiplicities.len() {
            return Err(Error::invalid(format!(
                "{} values but {} multiplicities",
                values.len(),
                multiplicities.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("spectrum values must be finite"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "spectrum values must be strictly increasing",
            ));
        }
        if multiplicities.contains(&0) {
            return Err(Error::invalid("multiplicities must be positive"));
        }
        Ok(Spectrum {
            values,
            multiplicities,
        })
    }

    /// Sorts and consolidates raw eigenvalues. Entries closer than
    /// [`MERGE_TOL`] times the spectral radius are merged, and a smallest
    /// value that small is clamped to exactly zero.
    pub fn merged(mut raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::invalid("empty spectrum"));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("non-finite eigenvalue"));
        }
        raw.sort_by(f64::total_cmp);
        let radius = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = MERGE_TOL * radius;
        let mut values: Vec<f64> = Vec::new();
        let mut mult: Vec<usize> = Vec::new();
        let mut sums: Vec<f64> = Vec::new();
        let mut anchor = f64::NAN;
        for v in raw {
            if !values.is_empty() && v - anchor <= tol {
                let last = values.len() - 1;
                mult[last] += 1;
                sums[last] += v;
                values[last] = sums[last] / mult[last] as f64;
            } else {
                anchor = v;
                values.push(v);
                mult.push(1);
                sums.push(v);
            }
        }
        if values[0].abs() <= tol {
            values[0] = 0.0;
        }
        Ok(Spectrum {
            values,
            multiplicities: mult,
        })
    }

    /// Sorts and consolidates closed-form eigenvalues, which carry no
    /// eigensolver error: entries within [`MERGE_TOL`] of each other relative
    /// to their own size are merged and zero stays exact.
    pub fn consolidated(mut raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::invalid("empty spectrum"));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("non-finite eigenvalue"));
        }
        raw.sort_by(f64::total_cmp);
        let mut values: Vec<f64> = Vec::new();
        let mut mult: Vec<usize> = Vec::new();
        let mut anchor = f64::NAN;
        for v in raw {
            if !values.is_empty() && v - anchor <= MERGE_TOL * v.abs().max(anchor.abs()) {
                *mult.last_mut().expect("nonempty") += 1;
            } else {
                anchor = v;
                values.push(v);
                mult.push(1);
            }
        }
        Ok(Spectrum {
            values,
            multiplicities: mult,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Total number of modes, including the zero mode.
    pub fn n_modes(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Every eigenvalue repeated by its multiplicity, ascending.
    pub fn flattened(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&v, &m)| std::iter::repeat_n(v, m))
            .collect()
    }

    /// Multiplicity of the exact zero eigenvalue.
    pub fn zero_multiplicity(&self) -> usize {
        self.values
            .iter()
            .zip(&self.multiplicities)
            .filter(|(v, _)| **v == 0.0)
            .map(|(_, m)| *m)
            .sum()
    }

    /// The spectrum with the zero mode removed.
    pub fn nonzero(&self) -> Spectrum {
        let (values, multiplicities) = self
            .values
            .iter()
            .zip(&self.multiplicities)
            .filter(|(v, _)| **v != 0.0)
            .map(|(v, m)| (*v, *m))
            .unzip();
        Spectrum {
            values,
            multiplicities,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Smallest strictly positive eigenvalue.
    pub fn min_positive(&self) -> Option<f64> {
        self.values.iter().copied().find(|v| *v > 0.0)
    }

    /// Multiplies every eigenvalue by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Spectrum {
        Spectrum {
            values: self.values.iter().map(|v| v * factor).collect(),
            multiplicities: self.multiplicities.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Eigenvalues of `-L` by dense symmetric eigensolve.
pub fn eig_spectrum(lap: &LaplacianMatrix) -> Result<Spectrum> {
    let n = lap.n();
    if n > DENSE_CAP {
        return Err(Error::resource(format!(
            "dense eigensolve of size {n} exceeds {DENSE_CAP}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("empty Laplacian"));
    }
    let neg = -lap.entries().clone();
    let eig = neg.try_symmetric_eigen(f64::EPSILON, 0).ok_or_else(|| {
        Error::numeric(format!("symmetric eigensolver did not converge (n = {n})"))
    })?;
    Spectrum::merged(eig.eigenvalues.iter().copied().collect())
}

/// Circulant eigenvalues `4 Σ_j κ_j sin²(π k j / n)` in natural order `k = 0..n`.
pub fn circulant_eigenvalues(n: usize, kappas: &[f64]) -> Result<Vec<f64>> {
    validate_circulant(n, kappas)?;
    Ok((0..n)
        .map(|k| {
            kappas
                .iter()
                .enumerate()
                .map(|(j, kappa)| {
                    let m = (k * (j + 1)) % n;
                    let s = (PI * m.min(n - m) as f64 / n as f64).sin();
                    4.0 * kappa * s * s
                })
                .sum()
        })
        .collect())
}

/// Closed-form circulant spectrum, without assembling the matrix.
pub fn circulant_spectrum(n: usize, kappas: &[f64]) -> Result<Spectrum> {
    Spectrum::consolidated(circulant_eigenvalues(n, kappas)?)
}

/// Generalized Rouse spectrum `(k/n)^ρ / τ₁` for `k = 0..n`, all simple.
pub fn power_law_spectrum(rho: f64, tau1: f64, n: usize) -> Result<Spectrum> {
    if !(rho > 0.0 && rho.is_finite()) || !(tau1 > 0.0 && tau1.is_finite()) {
        return Err(Error::invalid(format!(
            "need rho > 0 and tau1 > 0, got {rho}, {tau1}"
        )));
    }
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    let values: Vec<f64> = (0..n)
        .map(|k| (k as f64 / n as f64).powf(rho) / tau1)
        .collect();
    Spectrum::from_parts(values, vec![1; n])
}

/// Eigenvalues of `-L` in the family's natural index order, when the graph
/// came from a constructor with a closed form.
pub fn closed_form_eigenvalues(g: &WeightedGraph) -> Option<Vec<f64>> {
    family_eigenvalues(g.n_vertices(), g.family())
}

fn family_eigenvalues(n: usize, family: &Family) -> Option<Vec<f64>> {
    match family {
        Family::General => None,
        Family::Circulant { kappas, .. } => circulant_eigenvalues(n, kappas).ok(),
        Family::Complete { kappa } => Some(
            std::iter::once(0.0)
                .chain(std::iter::repeat_n(n as f64 * kappa, n - 1))
                .collect(),
        ),
        Family::Hypercube { kappa, .. } => Some(
            (0..n)
                .map(|v| 2.0 * kappa * (v as u64).count_ones() as f64)
                .collect(),
        ),
        Family::Product { factors } => {
            let mut acc = vec![0.0];
            for (nf, fam) in factors {
                let f = family_eigenvalues(*nf, fam)?;
                acc = acc
                    .iter()
                    .flat_map(|a| f.iter().map(move |b| a + b))
                    .collect();
            }
            Some(acc)
        }
    }
}

/// Spectrum of a graph: closed form when known, dense eigensolve otherwise.
pub fn graph_spectrum(g: &WeightedGraph) -> Result<Spectrum> {
    match closed_form_eigenvalues(g) {
        Some(v) => Spectrum::consolidated(v),
        None => eig_spectrum(&g.laplacian()?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::*;

    #[test]
    fn rouse_four() {
        let s = eig_spectrum(&rouse_cycle(4, 1.0).unwrap().laplacian().unwrap()).unwrap();
        assert_eq!(s.multiplicities(), &[1, 2, 1]);
        for (a, b) in s.values().iter().zip([0.0, 2.0, 4.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(s.values()[0], 0.0);
    }

    #[test]
    fn complete_three_normalized() {
        let s = eig_spectrum(&complete_graph_normalized(3).unwrap().laplacian().unwrap()).unwrap();
        assert_eq!(s.multiplicities(), &[1, 2]);
        assert!((s.values()[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn single_vertex() {
        let g = WeightedGraph::from_edges("dot", 1, []).unwrap();
        let s = eig_spectrum(&g.laplacian().unwrap()).unwrap();
        assert_eq!(s.values(), &[0.0]);
        assert_eq!(s.multiplicities(), &[1]);
    }

    #[test]
    fn circulant_rouse_formula() {
        let v = circulant_eigenvalues(8, &[1.0]).unwrap();
        for (k, lam) in v.iter().enumerate() {
            assert!((lam - 4.0 * (k as f64 * PI / 8.0).sin().powi(2)).abs() < 1e-15);
        }
        let s = circulant_spectrum(8, &[1.0]).unwrap();
        assert_eq!(s.multiplicities(), &[1, 2, 2, 2, 1]);
    }

    #[test]
    fn circulant_without_springs() {
        let s = circulant_spectrum(6, &[0.0]).unwrap();
        assert_eq!(s.values(), &[0.0]);
        assert_eq!(s.multiplicities(), &[6]);
    }

    #[test]
    fn power_law_values() {
        let s = power_law_spectrum(2.0, 1.0, 4).unwrap();
        assert_eq!(s.values(), &[0.0, 1.0 / 16.0, 0.25, 9.0 / 16.0]);
        let s = power_law_spectrum(1.0, 1.0, 5).unwrap();
        assert_eq!(s.values(), &[0.0, 0.2, 0.4, 0.6, 0.8]);
        let s = power_law_spectrum(4.0, 1.0, 1024).unwrap();
        let tau_n = 1.0 / s.min_positive().unwrap();
        assert!((tau_n / 1024f64.powi(4) - 1.0).abs() < 1e-12);
        assert!(power_law_spectrum(0.0, 1.0, 4).is_err());
        assert!(power_law_spectrum(1.0, 1.0, 1).is_err());
    }

    #[test]
    fn merge_clamps_zero_and_groups() {
        let s = Spectrum::merged(vec![1e-14, 2.0, 2.0 + 1e-12, 4.0]).unwrap();
        assert_eq!(s.values()[0], 0.0);
        assert_eq!(s.multiplicities(), &[1, 2, 1]);
        assert_eq!(s.n_modes(), 4);
        assert_eq!(s.flattened().len(), 4);
    }

    #[test]
    fn from_parts_validates() {
        assert!(Spectrum::from_parts(vec![0.0, 1.0], vec![1]).is_err());
        assert!(Spectrum::from_parts(vec![1.0, 1.0], vec![1, 1]).is_err());
        assert!(Spectrum::from_parts(vec![0.0], vec![0]).is_err());
        let s: Spectrum =
            serde_json::from_str(r#"{"values":[0,2],"multiplicities":[1,3]}"#).unwrap();
        assert_eq!(s.n_modes(), 4);
    }

    #[test]
    fn closed_forms_agree_with_dense() {
        let graphs = [
            circulant_chain(12, &[1.0, 0.5, 0.25]).unwrap(),
            complete_graph(7, 0.3).unwrap(),
            hypercube(4, 0.7).unwrap(),
            cartesian_product(
                &rouse_cycle(5, 1.0).unwrap(),
                &complete_graph(3, 2.0).unwrap(),
            )
            .unwrap(),
        ];
        for g in &graphs {
            let closed = graph_spectrum(g).unwrap();
            let dense = eig_spectrum(&g.laplacian().unwrap()).unwrap();
            assert_eq!(
                closed.multiplicities(),
                dense.multiplicities(),
                "{}",
                g.label()
            );
            for (a, b) in closed.values().iter().zip(dense.values()) {
                assert!(
                    (a - b).abs() <= 1e-9 * b.abs().max(1.0),
                    "{}: {a} vs {b}",
                    g.label()
                );
            }
        }
    }

    #[test]
    fn nonzero_drops_zero_mode() {
        let s = circulant_spectrum(8, &[1.0]).unwrap().nonzero();
        assert_eq!(s.n_modes(), 7);
        assert_eq!(s.zero_multiplicity(), 0);
    }

    #[test]
    fn closed_forms_keep_tiny_eigenvalues_distinct() {
        let g = crate::graph::repulsive_circulant(4096, 2).unwrap();
        let s = graph_spectrum(&g).unwrap();
        assert_eq!(s.zero_multiplicity(), 1);
        assert_eq!(s.multiplicities()[1], 2);
        let x = (PI / 4096.0).sin();
        let want = 16.0 * x.powi(4) * crate::graph::repulsive_weights(2).unwrap()[0] / 4.0;
        assert!(
            (s.values()[1] / want - 1.0).abs() < 1e-6,
            "{} vs {want}",
            s.values()[1]
        );
        assert!(s.values()[1] < s.values()[2]);
    }
}
