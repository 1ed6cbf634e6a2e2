use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Continuous limit φ of the diffusive spectrum as a function of `k/n`.
///
/// `rho` and `a0` describe the leading behaviour `φ(x) ≈ a0 x^rho` at zero
/// when known. Shapes that are even about `x = 1/2` (every circulant shape)
/// are flagged `symmetric`; integrals against them run over `[0, 1/2]` and
/// are doubled.
#[derive(Clone)]
pub struct ShapeFunction {
    name: String,
    eval: Eval,
    rho: Option<f64>,
    a0: Option<f64>,
    symmetric: bool,
}

impl fmt::Debug for ShapeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShapeFunction")
            .field("name", &self.name)
            .field("rho", &self.rho)
            .field("a0", &self.a0)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl ShapeFunction {
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        symmetric: bool,
    ) -> Self {
        ShapeFunction {
            name: name.into(),
            eval: Arc::new(eval),
            rho: None,
            a0: None,
            symmetric,
        }
    }

    /// Attach the leading power-law behaviour at zero.
    pub fn with_leading(mut self, rho: f64, a0: f64) -> Self {
        self.rho = Some(rho);
        self.a0 = Some(a0);
        self
    }

    /// `a0 · x^rho` on `[0, 1]`.
    pub fn power_law(a0: f64, rho: f64) -> Self {
        ShapeFunction::custom(format!("{a0}*x^{rho}"), move |x| a0 * x.powf(rho), false)
            .with_leading(rho, a0)
    }

    /// Rouse ring: `4κ sin²(πx)`.
    pub fn rouse(kappa: f64) -> Self {
        ShapeFunction::circulant(&[kappa])
    }

    /// Circulant shape `4 Σ_j κ_j sin²(π j x)`.
    ///
    /// The leading term at zero is read off the cosine series
    /// `2 Σ_j κ_j (1 − cos 2πjx)`: the first even power whose coefficient
    /// does not cancel.
    pub fn circulant(kappas: &[f64]) -> Self {
        let k: Vec<f64> = kappas.to_vec();
        let k2 = k.clone();
        let eval = move |x: f64| -> f64 {
            k2.iter()
                .enumerate()
                .map(|(j, kappa)| {
                    let s = (PI * (j + 1) as f64 * x).sin();
                    4.0 * kappa * s * s
                })
                .sum()
        };
        let mut shape = ShapeFunction::custom(format!("circulant{kappas:?}"), eval, true);
        let scale: f64 = k
            .iter()
            .map(|v| v.abs())
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        let mut fact = 1.0;
        for m in 1..=k.len().max(1) * 2 + 2 {
            fact *= ((2 * m - 1) * (2 * m)) as f64;
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            let c: f64 = k
                .iter()
                .enumerate()
                .map(|(j, kappa)| {
                    2.0 * kappa * sign * (2.0 * PI * (j + 1) as f64).powi(2 * m as i32) / fact
                })
                .sum();
            let mag: f64 = k
                .iter()
                .enumerate()
                .map(|(j, kappa)| {
                    2.0 * kappa.abs() * (2.0 * PI * (j + 1) as f64).powi(2 * m as i32) / fact
                })
                .sum();
            if c.abs() > 1e-9 * mag.max(scale) {
                shape = shape.with_leading(2.0 * m as f64, c);
                break;
            }
        }
        shape
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn rho(&self) -> Option<f64> {
        self.rho
    }

    pub fn a0(&self) -> Option<f64> {
        self.a0
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Integration range `[0, b]` and the weight applied to the result.
    pub fn half_range(&self) -> (f64, f64) {
        if self.symmetric {
            (0.5, 2.0)
        } else {
            (1.0, 1.0)
        }
    }

    /// Checks `φ(0) = 0` and `φ > 0` on an interior grid of `points` values.
    pub fn check_admissible(&self, points: usize) -> Result<()> {
        let at0 = self.eval(0.0);
        if at0.abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "shape {} has φ(0) = {at0}",
                self.name
            )));
        }
        let (b, _) = self.half_range();
        for i in 1..points {
            let x = b * i as f64 / points as f64;
            let v = self.eval(x);
            if !(v > 0.0) {
                return Err(Error::invalid(format!(
                    "shape {} not positive at x = {x}: {v}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Sum of one-dimensional shapes over `[0,1]^D`: the shape of a Cartesian
/// product network.
#[derive(Clone, Debug)]
pub struct ProductShape {
    pub factors: Vec<ShapeFunction>,
}

impl ProductShape {
    pub fn new(factors: Vec<ShapeFunction>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("product shape needs at least one factor"));
        }
        Ok(ProductShape { factors })
    }

    /// `D` copies of the same shape.
    pub fn power(shape: ShapeFunction, dims: usize) -> Result<Self> {
        ProductShape::new(vec![shape; dims])
    }

    pub fn dims(&self) -> usize {
        self.factors.len()
    }

    pub fn eval(&self, xs: &[f64]) -> f64 {
        self.factors.iter().zip(xs).map(|(f, x)| f.eval(*x)).sum()
    }
}

/// `max_k |λ_k − φ(k/n)|` for eigenvalues given in natural index order.
pub fn shape_sup_distance(natural: &[f64], shape: &ShapeFunction) -> Result<f64> {
    if natural.is_empty() {
        return Err(Error::invalid("empty eigenvalue family"));
    }
    let n = natural.len() as f64;
    Ok(natural
        .iter()
        .enumerate()
        .map(|(k, lam)| (lam - shape.eval(k as f64 / n)).abs())
        .fold(0.0, f64::max))
}

const RHO_POINTS: usize = 50;

/// Least-squares slope and intercept of `log φ` against `log x` on 50
/// geometric points in the window; returns `(rho, exp(intercept))`.
pub fn estimate_rho(shape: &ShapeFunction, window: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi && hi <= 0.1) {
        return Err(Error::invalid(format!(
            "window must satisfy 0 < lo < hi <= 0.1, got {window:?}"
        )));
    }
    let ratio = (hi / lo).ln();
    let mut xs = Vec::with_capacity(RHO_POINTS);
    let mut ys = Vec::with_capacity(RHO_POINTS);
    for i in 0..RHO_POINTS {
        let x = lo * (ratio * i as f64 / (RHO_POINTS - 1) as f64).exp();
        let v = shape.eval(x);
        if !(v > 0.0) {
            return Err(Error::invalid(format!(
                "shape {} not positive at x = {x}",
                shape.name()
            )));
        }
        xs.push(x.ln());
        ys.push(v.ln());
    }
    let m = RHO_POINTS as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mx).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{circulant_eigenvalues, power_law_spectrum};

    #[test]
    fn rouse_leading_term() {
        let s = ShapeFunction::rouse(1.0);
        assert_eq!(s.rho(), Some(2.0));
        assert!((s.a0().unwrap() - 4.0 * PI * PI).abs() < 1e-9);
        let (rho, a0) = estimate_rho(&s, (1e-4, 1e-2)).unwrap();
        assert!((rho - 2.0).abs() < 0.01);
        assert!((a0 / (4.0 * PI * PI) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn repulsive_leading_term_cancels_to_quartic() {
        let s = ShapeFunction::circulant(&[4.0, -1.0]);
        assert_eq!(s.rho(), Some(4.0));
        assert!((s.a0().unwrap() - 16.0 * PI.powi(4)).abs() < 1e-6);
        let (rho, _) = estimate_rho(&s, (1e-4, 1e-2)).unwrap();
        assert!((rho - 4.0).abs() < 0.02);
        let s = ShapeFunction::circulant(&[15.0, -6.0, 1.0]);
        assert_eq!(s.rho(), Some(6.0));
    }

    #[test]
    fn linear_shape_is_exact() {
        let (rho, a0) = estimate_rho(&ShapeFunction::power_law(1.0, 1.0), (1e-4, 1e-2)).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
        assert!((a0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sin_fourth_fit() {
        let s = ShapeFunction::custom("sin4", |x| (PI * x).sin().powi(4), true);
        let (rho, _) = estimate_rho(&s, (1e-4, 1e-2)).unwrap();
        assert!((rho - 4.0).abs() < 0.02);
    }

    #[test]
    fn rho_window_validated() {
        let s = ShapeFunction::rouse(1.0);
        assert!(estimate_rho(&s, (0.0, 1e-2)).is_err());
        assert!(estimate_rho(&s, (1e-2, 1e-3)).is_err());
        assert!(estimate_rho(&s, (1e-3, 0.5)).is_err());
        let neg = ShapeFunction::custom("neg", |x| -x, false);
        assert!(matches!(
            estimate_rho(&neg, (1e-3, 1e-2)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sup_distance_exact_families() {
        for n in [8, 64, 1000] {
            let v = circulant_eigenvalues(n, &[1.0]).unwrap();
            assert!(shape_sup_distance(&v, &ShapeFunction::rouse(1.0)).unwrap() < 1e-12);
        }
        let p = power_law_spectrum(2.5, 1.0, 100).unwrap();
        let d = shape_sup_distance(p.values(), &ShapeFunction::power_law(1.0, 2.5)).unwrap();
        assert!(d < 1e-15);
        let v = circulant_eigenvalues(64, &[1.0, 0.5]).unwrap();
        let oracle = |x: f64| 4.0 * (PI * x).sin().powi(2) + 2.0 * (2.0 * PI * x).sin().powi(2);
        let d = v
            .iter()
            .enumerate()
            .map(|(k, l)| (l - oracle(k as f64 / 64.0)).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-12);
        assert!(shape_sup_distance(&v, &ShapeFunction::circulant(&[1.0, 0.5])).unwrap() < 1e-12);
        assert!(shape_sup_distance(&[], &ShapeFunction::rouse(1.0)).is_err());
    }

    #[test]
    fn admissibility() {
        assert!(ShapeFunction::rouse(1.0).check_admissible(1000).is_ok());
        assert!(ShapeFunction::circulant(&[4.0, -1.0])
            .check_admissible(1000)
            .is_ok());
        assert!(ShapeFunction::custom("c", |_| 1.0, false)
            .check_admissible(10)
            .is_err());
    }
}
