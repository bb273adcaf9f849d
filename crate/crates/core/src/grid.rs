//! Quadrature grids on the half-line and complex profiles sampled on them.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measure the grid weights integrate against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// `du`
    Lebesgue,
    /// `u du`
    Radial,
}

/// Compact description of a log-spaced grid, as echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridSpec {
    pub u_min: f64,
    pub u_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub const DEFAULT: GridSpec = GridSpec { u_min: 1e-6, u_max: 1e6, n: 4000 };

    pub fn build(&self, measure: Measure) -> Result<RadialGrid> {
        RadialGrid::log_spaced(self.u_min, self.u_max, self.n, measure)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Strictly increasing positive nodes with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    measure: Measure,
}

impl RadialGrid {
    pub fn from_nodes(nodes: Vec<f64>, measure: Measure) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {}", nodes.len())));
        }
        if !nodes.iter().all(|u| u.is_finite() && *u > 0.0) {
            return Err(Error::InvalidGrid("nodes must be finite and positive".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = 0.5 * (nodes[i + 1] - nodes[i]);
            weights[i] += h;
            weights[i + 1] += h;
        }
        if measure == Measure::Radial {
            for (w, u) in weights.iter_mut().zip(&nodes) {
                *w *= u;
            }
        }
        Ok(Self { nodes, weights, measure })
    }

    pub fn log_spaced(u_min: f64, u_max: f64, n: usize, measure: Measure) -> Result<Self> {
        if !(u_min > 0.0 && u_max > u_min && u_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("bad range [{u_min}, {u_max}]")));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        let (a, b) = (u_min.ln(), u_max.ln());
        let step = (b - a) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
        nodes[0] = u_min;
        nodes[n - 1] = u_max;
        Self::from_nodes(nodes, measure)
    }

    pub fn uniform(u_min: f64, u_max: f64, n: usize, measure: Measure) -> Result<Self> {
        if !(u_min > 0.0 && u_max > u_min && u_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("bad range [{u_min}, {u_max}]")));
        }
        let h = (u_max - u_min) / (n.max(2) - 1) as f64;
        Self::from_nodes((0..n).map(|i| u_min + h * i as f64).collect(), measure)
    }

    /// The same nodes, reweighted for another measure.
    pub fn with_measure(&self, measure: Measure) -> Self {
        if measure == self.measure {
            return self.clone();
        }
        Self::from_nodes(self.nodes.clone(), measure).expect("nodes already validated")
    }

    /// Grid with nodes `f(u_i)` for a strictly increasing positive map `f`.
    pub fn mapped(&self, f: impl Fn(f64) -> f64, measure: Measure) -> Result<Self> {
        Self::from_nodes(self.nodes.iter().map(|&u| f(u)).collect(), measure)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { u_min: self.first(), u_max: self.last(), n: self.len() }
    }

    /// Index range excluding `fraction` of the nodes at each end.
    pub fn interior(&self, fraction: f64) -> std::ops::Range<usize> {
        let n = self.len();
        let skip = ((n as f64 * fraction).ceil() as usize).max(1);
        skip.min(n)..n.saturating_sub(skip).max(skip.min(n))
    }

    /// Two-sided secant derivative `(f[i+1] - f[i-1]) / (u[i+1] - u[i-1])`
    /// inside, one-sided at the ends.
    ///
    /// With trapezoid weights this stencil makes `sum w_i f_i (Df)_i`
    /// telescope, so `int f f' du` vanishes exactly for compact profiles.
    pub fn differentiate(&self, f: &[Complex64]) -> Vec<Complex64> {
        let u = &self.nodes;
        let n = u.len();
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        d[0] = (f[1] - f[0]) / (u[1] - u[0]);
        d[n - 1] = (f[n - 1] - f[n - 2]) / (u[n - 1] - u[n - 2]);
        for i in 1..n - 1 {
            d[i] = (f[i + 1] - f[i - 1]) / (u[i + 1] - u[i - 1]);
        }
        d
    }
}

/// Complex samples of a one-variable profile, annotated with the angular
/// mode it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Arc<RadialGrid>,
    samples: Vec<Complex64>,
    mode: i32,
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: samples.len() });
        }
        if !samples.iter().all(|s| s.is_finite()) {
            return Err(Error::NonFinite("profile samples"));
        }
        Ok(Self { grid, samples, mode: 0 })
    }

    pub fn from_real(grid: Arc<RadialGrid>, samples: Vec<f64>) -> Result<Self> {
        Self::new(grid, samples.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = grid.nodes().iter().map(|&u| f(u)).collect();
        Self::new(grid, samples)
    }

    pub fn from_real_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = grid.nodes().iter().map(|&u| Complex64::new(f(u), 0.0)).collect();
        Self::new(grid, samples)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, samples: vec![Complex64::new(0.0, 0.0); n], mode: 0 }
    }

    pub fn with_mode(mut self, mode: i32) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> i32 {
        self.mode
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.re).collect()
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|s| s.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Same grid, new samples.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let samples = self.grid.nodes().iter().zip(&self.samples).map(|(&u, &s)| f(u, s)).collect();
        Self { grid: self.grid.clone(), samples, mode: self.mode }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|_, s| s * c)
    }

    pub fn derivative(&self) -> Self {
        Self { grid: self.grid.clone(), samples: self.grid.differentiate(&self.samples), mode: self.mode }
    }

    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), self.grid.len());
        Self { grid: self.grid.clone(), samples, mode: self.mode }
    }

    /// Monotone cubic interpolant of the real and imaginary parts.
    pub fn interpolant(&self) -> ComplexPchip {
        ComplexPchip::new(self.grid.nodes(), &self.samples)
    }
}

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes, which
/// preserves monotonicity and sign of the data.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl Pchip {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        assert_eq!(x.len(), y.len());
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slope = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        slope[0] = end_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        slope[n - 1] = end_slope(
            h[n - 2],
            if n > 2 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n > 2 { delta[n - 3] } else { delta[n - 2] },
        );
        Self { x: x.to_vec(), y: y.to_vec(), slope }
    }

    /// Value at `t`, or `None` outside `[x_0, x_{n-1}]`.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let (i, s) = self.locate(t)?;
        let h = self.x[i + 1] - self.x[i];
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (d0, d1) = (self.slope[i], self.slope[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        Some(
            (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                + (s3 - 2.0 * s2 + s) * h * d0
                + (-2.0 * s3 + 3.0 * s2) * y1
                + (s3 - s2) * h * d1,
        )
    }

    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        let n = self.x.len();
        let (lo, hi) = (self.x[0], self.x[n - 1]);
        // Absorb rounding from maps such as sqrt(r^2).
        if !(t >= lo - 1e-12 * lo.abs() && t <= hi + 1e-12 * hi.abs()) {
            return None;
        }
        let t = t.clamp(lo, hi);
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k => (k - 1).min(n - 2),
        };
        Some((i, (t - self.x[i]) / (self.x[i + 1] - self.x[i])))
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[derive(Debug, Clone)]
pub struct ComplexPchip {
    re: Pchip,
    im: Pchip,
}

impl ComplexPchip {
    pub fn new(x: &[f64], y: &[Complex64]) -> Self {
        let re: Vec<f64> = y.iter().map(|c| c.re).collect();
        let im: Vec<f64> = y.iter().map(|c| c.im).collect();
        Self { re: Pchip::new(x, &re), im: Pchip::new(x, &im) }
    }

    pub fn eval(&self, t: f64) -> Option<Complex64> {
        Some(Complex64::new(self.re.eval(t)?, self.im.eval(t)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_nodes() {
        assert!(RadialGrid::from_nodes(vec![1.0, 2.0], Measure::Lebesgue).is_err());
        assert!(RadialGrid::from_nodes(vec![0.0, 1.0, 2.0], Measure::Lebesgue).is_err());
        assert!(RadialGrid::from_nodes(vec![1.0, 3.0, 2.0], Measure::Lebesgue).is_err());
        assert!(RadialGrid::log_spaced(1.0, 0.5, 10, Measure::Lebesgue).is_err());
    }

    #[test]
    fn lebesgue_weights_sum_to_length() {
        let g = RadialGrid::log_spaced(1e-3, 1e2, 500, Measure::Lebesgue).unwrap();
        let sum: f64 = g.weights().iter().sum();
        assert!((sum - (1e2 - 1e-3)).abs() < 1e-10);
        assert!(g.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn radial_weights_integrate_u_du() {
        let g = RadialGrid::uniform(1.0, 3.0, 2001, Measure::Radial).unwrap();
        // int_1^3 u * u^2 du = (81 - 1)/4
        let s: f64 = g.weights().iter().zip(g.nodes()).map(|(w, u)| w * u * u).sum();
        assert!((s - 20.0).abs() < 1e-5);
    }

    #[test]
    fn secant_derivative_is_exact_on_lines() {
        let g = Arc::new(RadialGrid::log_spaced(0.1, 10.0, 50, Measure::Lebesgue).unwrap());
        let f = RadialProfile::from_real_fn(g, |u| 3.0 * u - 1.0).unwrap();
        for d in f.derivative().samples() {
            assert!((d.re - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pchip_reproduces_and_preserves_sign() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| if *v < 4.0 { 0.0 } else { (v - 4.0).powi(2) }).collect();
        let p = Pchip::new(&x, &y);
        for (xi, yi) in x.iter().zip(&y) {
            assert!((p.eval(*xi).unwrap() - yi).abs() < 1e-14);
        }
        for k in 0..1000 {
            let t = 9.5 * k as f64 / 999.0;
            assert!(p.eval(t).unwrap() >= 0.0);
        }
        assert!(p.eval(-0.1).is_none());
        assert!(p.eval(9.6).is_none());
    }

    #[test]
    fn pchip_converges_on_smooth_data() {
        let x: Vec<f64> = (0..401).map(|i| 1.0 + i as f64 / 100.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let p = Pchip::new(&x, &y);
        let err = (0..1000)
            .map(|k| 1.0 + 4.0 * k as f64 / 999.0)
            .map(|t| (p.eval(t).unwrap() - t.sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-5, "{err}");
    }
}
