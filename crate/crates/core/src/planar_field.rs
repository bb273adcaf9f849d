//! Periodic sampled fields on `[-L/2, L/2)^2`, the transform as the Fourier
//! multiplier `conj(xi)/xi`, heat extensions and the associated checks.
//!
//! Derivatives are unhalved: `d = d_x - i d_y` and `dbar = d_x + i d_y`, so
//! the multiplier maps `dbar f` to `d f` on every discrete frequency.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::burkholder::Exponent;
use crate::error::{Error, Result};
use crate::grid::{Measure, RadialGrid, RadialProfile};
use crate::radial_reduction::{apply_lambda_m, PlaneSampler};

pub use crate::structural::{structural_identities, ModePair, StructuralReport, SurrogatePhi};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneField {
    n: usize,
    extent: f64,
    /// Row-major: `samples[iy * n + ix]` sits at `(x_ix, y_iy)`.
    samples: Vec<Complex64>,
}

impl PlaneField {
    pub fn new(n: usize, extent: f64, samples: Vec<Complex64>) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidField(format!("n = {n} is not a power of two >= 2")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidField(format!("extent {extent} must be positive and finite")));
        }
        if samples.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, got: samples.len() });
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::NonFinite("field samples"));
        }
        Ok(Self { n, extent, samples })
    }

    pub fn from_fn(n: usize, extent: f64, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let h = extent / n as f64;
        let c = |j: usize| -0.5 * extent + h * j as f64;
        let samples = (0..n * n).map(|k| f(c(k % n), c(k / n))).collect();
        Self::new(n, extent, samples)
    }

    pub fn zeros(n: usize, extent: f64) -> Result<Self> {
        Self::new(n, extent, vec![ZERO; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.n as f64
    }

    /// Coordinate of grid line `j` along either axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        -0.5 * self.extent + self.spacing() * j as f64
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.samples[iy * self.n + ix]
    }

    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / (self.n * self.n) as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// `(h^2 sum |f|^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        let h = self.spacing();
        (self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * h * h).sqrt()
    }

    /// Bilinear pairing `int f g dA` by the periodic trapezoid rule.
    pub fn pairing(&self, other: &PlaneField) -> Result<Complex64> {
        self.same_shape(other)?;
        let h = self.spacing();
        Ok(self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).sum::<Complex64>() * h * h)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> PlaneField {
        PlaneField { n: self.n, extent: self.extent, samples: self.samples.iter().map(|&s| f(s)).collect() }
    }

    pub fn sub(&self, other: &PlaneField) -> Result<PlaneField> {
        self.same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &PlaneField, f: impl Fn(Complex64, Complex64) -> Complex64) -> PlaneField {
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        PlaneField { n: self.n, extent: self.extent, samples }
    }

    fn same_shape(&self, other: &PlaneField) -> Result<()> {
        if self.n != other.n || self.extent != other.extent {
            return Err(Error::InvalidField(format!(
                "shape mismatch: n = {} / {}, extent = {} / {}",
                self.n, other.n, self.extent, other.extent
            )));
        }
        Ok(())
    }

    /// `max |f|` outside the central square `[-L/4, L/4]^2`, relative to `max |f|`.
    pub fn outer_fraction(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let q = 0.25 * self.extent;
        let mut outer = 0.0f64;
        for iy in 0..self.n {
            for ix in 0..self.n {
                if self.coordinate(ix).abs() > q || self.coordinate(iy).abs() > q {
                    outer = outer.max(self.at(ix, iy).norm());
                }
            }
        }
        outer / max
    }

    fn require_central(&self, what: &str) -> Result<()> {
        let outer = self.outer_fraction();
        if outer > 1e-8 {
            return Err(Error::SupportMismatch(format!(
                "{what} reaches {outer:e} of its maximum outside the central quarter"
            )));
        }
        Ok(())
    }

    /// Angular wave number of FFT bin `k`.
    fn wavenumber(&self, k: usize) -> f64 {
        let signed = if k < self.n / 2 { k as f64 } else { k as f64 - self.n as f64 };
        TAU * signed / self.extent
    }

    /// Multiplies the discrete spectrum by `m(xi_1, xi_2)`.
    pub fn apply_multiplier(&self, m: impl Fn(f64, f64) -> Complex64) -> PlaneField {
        let n = self.n;
        let mut data = self.samples.clone();
        fft2(&mut data, n, false);
        for ky in 0..n {
            let xi2 = self.wavenumber(ky);
            for kx in 0..n {
                data[ky * n + kx] *= m(self.wavenumber(kx), xi2);
            }
        }
        fft2(&mut data, n, true);
        let scale = 1.0 / (n * n) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        PlaneField { n, extent: self.extent, samples: data }
    }

    pub fn dx(&self) -> PlaneField {
        self.apply_multiplier(|x, _| Complex64::new(0.0, x))
    }

    pub fn dy(&self) -> PlaneField {
        self.apply_multiplier(|_, y| Complex64::new(0.0, y))
    }

    /// `d_x + i d_y`, with symbol `i xi`.
    pub fn dbar(&self) -> PlaneField {
        self.apply_multiplier(|x, y| Complex64::new(0.0, 1.0) * Complex64::new(x, y))
    }

    /// `d_x - i d_y`, with symbol `i conj(xi)`.
    pub fn d(&self) -> PlaneField {
        self.apply_multiplier(|x, y| Complex64::new(0.0, 1.0) * Complex64::new(x, -y))
    }
}

/// In-place unnormalized 2D DFT of an `n x n` row-major array.
fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    fft.process(data);
    let mut column = vec![ZERO; n];
    for ix in 0..n {
        for iy in 0..n {
            column[iy] = data[iy * n + ix];
        }
        fft.process(&mut column);
        for iy in 0..n {
            data[iy * n + ix] = column[iy];
        }
    }
}

/// Bilinear interpolation, periodic across the seam of the square.
impl PlaneSampler for PlaneField {
    fn sample(&self, x: f64, y: f64) -> Result<Complex64> {
        let half = 0.5 * self.extent * (1.0 + 1e-12);
        if !(x.abs() <= half && y.abs() <= half) {
            return Err(Error::NodeOutsideExtent { x, y });
        }
        let h = self.spacing();
        let n = self.n;
        let locate = |t: f64| {
            let s = (t + 0.5 * self.extent) / h;
            let i = s.floor();
            let frac = s - i;
            let i0 = (i as i64).rem_euclid(n as i64) as usize;
            (i0, (i0 + 1) % n, frac)
        };
        let (x0, x1, fx) = locate(x);
        let (y0, y1, fy) = locate(y);
        Ok(self.at(x0, y0) * ((1.0 - fx) * (1.0 - fy))
            + self.at(x1, y0) * (fx * (1.0 - fy))
            + self.at(x0, y1) * ((1.0 - fx) * fy)
            + self.at(x1, y1) * (fx * fy))
    }
}

/// The transform: multiplier `conj(xi)/xi` on nonzero frequencies, `0` at
/// `xi = 0`.
pub fn ab_transform(f: &PlaneField) -> Result<PlaneField> {
    let mean = f.mean().norm();
    let max = f.max_abs();
    if mean > 1e-12 * max {
        return Err(Error::NonzeroMean { mean, max });
    }
    Ok(f.apply_multiplier(|x, y| {
        if x == 0.0 && y == 0.0 {
            ZERO
        } else {
            let xi = Complex64::new(x, y);
            xi.conj() / xi
        }
    }))
}

/// Heat semigroup `exp(t Laplacian)` on the torus.
pub fn heat_extend(f: &PlaneField, t: f64) -> Result<PlaneField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NonFinite("heat time"));
    }
    Ok(f.apply_multiplier(|x, y| Complex64::new((-(x * x + y * y) * t).exp(), 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CrossCheck {
    /// Mode index `k` (in `f = sum e^{-ik theta} f_k`) carrying the most energy.
    pub phase_mode: i32,
    /// Share of the output energy in that mode.
    pub concentration: f64,
    /// Relative `L^2(r dr)` distance between the extracted radial factor
    /// and the one-dimensional prediction.
    pub mismatch: f64,
    /// The same distance in `L^p(r dr)`.
    pub mismatch_p: f64,
}

/// Embeds the radial profile `g(r)` into an `n x n` field on the square of
/// side `extent`, applies [`ab_transform`], and compares the dominant
/// angular mode with `((I - H) G)(r^2)`, `G(rho) = g(sqrt rho)`, evaluated
/// through [`apply_lambda_m`] with `m = 0`.
///
/// The discrete mean of the embedded field is removed first; the profile
/// must decay well inside the central quarter of the square.
pub fn crosscheck_radial(g: &RadialProfile, e: &Exponent, n: usize, extent: f64) -> Result<CrossCheck> {
    let interp = g.interpolant();
    let (r_lo, r_hi) = (g.grid().first(), g.grid().last());
    let head = g.samples()[0];
    let profile = |r: f64| {
        if r <= r_lo {
            head
        } else if r >= r_hi {
            ZERO
        } else {
            interp.eval(r).unwrap_or(ZERO)
        }
    };
    let field = PlaneField::from_fn(n, extent, |x, y| profile(x.hypot(y)))?;
    field.require_central("profile")?;
    let mean = field.mean();
    let tg = ab_transform(&field.map(|v| v - mean))?;

    // Polar resampling of the output: each ring's angular DFT gives every mode.
    let n_phi = 256.max(n);
    let radius = 0.5 * extent * 0.98;
    let n_r = n;
    let rings = Arc::new(RadialGrid::uniform(radius / n_r as f64, radius, n_r, Measure::Radial)?);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n_phi);
    let mut energy = vec![0.0; n_phi];
    let mut modes: Vec<Vec<Complex64>> = vec![Vec::with_capacity(n_r); n_phi];
    let mut ring = vec![ZERO; n_phi];
    for (&r, &w) in rings.nodes().iter().zip(rings.weights()) {
        for (j, v) in ring.iter_mut().enumerate() {
            let phi = TAU * j as f64 / n_phi as f64;
            *v = tg.sample(r * phi.cos(), r * phi.sin())?;
        }
        fft.process(&mut ring);
        // The coefficient of e^{-ik phi} lands in bin (-k) mod n_phi.
        for (b, v) in ring.iter().enumerate() {
            let c = v / n_phi as f64;
            energy[b] += w * c.norm_sqr();
            modes[b].push(c);
        }
    }
    let total: f64 = energy.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Ok(CrossCheck { phase_mode: 0, concentration: 1.0, mismatch: 0.0, mismatch_p: 0.0 });
    }
    let (best_bin, best) = energy
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (b, &v)| if v > acc.1 { (b, v) } else { acc });
    let concentration = best / total;
    let signed = |b: usize| if b <= n_phi / 2 { b as i64 } else { b as i64 - n_phi as i64 };
    let phase_mode = (-signed(best_bin)) as i32;
    if concentration < 0.99 {
        return Err(Error::ResolutionInsufficient(concentration));
    }

    // One-dimensional path on a fine rho-grid.
    let rho_grid = Arc::new(RadialGrid::log_spaced(
        (r_lo * r_lo).max(1e-12),
        r_hi * r_hi,
        20_000,
        Measure::Lebesgue,
    )?);
    let big_g = RadialProfile::from_fn(rho_grid.clone(), |rho| profile(rho.sqrt()))?;
    let lambda = apply_lambda_m(&big_g, 0)?.interpolant();
    let predicted: Vec<Complex64> = rings
        .nodes()
        .iter()
        .map(|&r| if r * r >= rho_grid.last() { ZERO } else { lambda.eval((r * r).max(rho_grid.first())).unwrap_or(ZERO) })
        .collect();
    let extracted = &modes[best_bin];
    let rel = |p: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for ((w, a), b) in rings.weights().iter().zip(extracted).zip(&predicted) {
            num += w * (a - b).norm().powf(p);
            den += w * b.norm().powf(p);
        }
        (num / den).powf(1.0 / p)
    };
    Ok(CrossCheck { phase_mode, concentration, mismatch: rel(2.0), mismatch_p: rel(e.p()) })
}

/// Which form of the heat-extension identity a [`HextResult`] found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HextVariant {
    /// `-2 int int (d_x + i d_y) f (d_x + i d_y) g`.
    Displayed,
    /// `-2 int int (d_x - i d_y) f (d_x - i d_y) g`.
    Conjugated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HextResult {
    pub lhs: Complex64,
    pub rhs_displayed: Complex64,
    pub rhs_conjugated: Complex64,
    pub residual_displayed: f64,
    pub residual_conjugated: f64,
    /// The smaller of the two residuals.
    pub residual: f64,
    pub variant: HextVariant,
    /// `t I(t)` at `t_max` relative to the accumulated `t`-integral.
    pub tail: f64,
}

/// Smallest time node of the `t`-quadrature.
pub const HEXT_T_MIN: f64 = 1e-6;

/// Compares `int f K g dA`, with `K` the convolution by `1/(pi z^2)` (that
/// is, minus [`ab_transform`]), against the time integrals of products of
/// derivatives of the heat extensions of `f` and `g`.
///
/// The `t`-integral runs over `nt` log-spaced nodes on
/// `[HEXT_T_MIN, t_max]` (trapezoid rule in `ln t`), plus `HEXT_T_MIN I(HEXT_T_MIN)`
/// for `[0, HEXT_T_MIN]`. The mean of `g` is removed before the transform;
/// neither side sees it otherwise.
pub fn hext_residual(f: &PlaneField, g: &PlaneField, t_max: f64, nt: usize) -> Result<HextResult> {
    f.same_shape(g)?;
    f.require_central("f")?;
    g.require_central("g")?;
    if !(t_max > HEXT_T_MIN && t_max.is_finite()) || nt < 2 {
        return Err(Error::InvalidField(format!("bad t-quadrature: t_max = {t_max}, nt = {nt}")));
    }
    let mean = g.mean();
    let lhs = -f.pairing(&ab_transform(&g.map(|v| v - mean))?)?;

    let (fb, fd) = (f.dbar(), f.d());
    let (gb, gd) = (g.dbar(), g.d());
    let integrands = |t: f64| -> Result<(Complex64, Complex64)> {
        let displayed = heat_extend(&fb, t)?.pairing(&heat_extend(&gb, t)?)?;
        let conjugated = heat_extend(&fd, t)?.pairing(&heat_extend(&gd, t)?)?;
        Ok((displayed, conjugated))
    };
    let (a, b) = (HEXT_T_MIN.ln(), t_max.ln());
    let ds = (b - a) / (nt - 1) as f64;
    let mut disp = ZERO;
    let mut conj = ZERO;
    let mut last = ZERO;
    for j in 0..nt {
        let t = (a + ds * j as f64).exp();
        let (d, c) = integrands(t)?;
        let w = if j == 0 || j == nt - 1 { 0.5 * ds } else { ds } * t;
        disp += d * w;
        conj += c * w;
        if j == 0 {
            disp += d * HEXT_T_MIN;
            conj += c * HEXT_T_MIN;
        }
        if j == nt - 1 {
            last = if d.norm() > c.norm() { d } else { c } * t;
        }
    }
    let rhs_displayed = -2.0 * disp;
    let rhs_conjugated = -2.0 * conj;
    let accumulated = disp.norm().max(conj.norm());
    let tail = if accumulated > 0.0 { last.norm() / accumulated } else { 0.0 };
    if tail > 1e-4 {
        return Err(Error::TailTooHeavy(tail));
    }
    let rel = |rhs: Complex64| {
        let scale = lhs.norm().max(rhs.norm());
        if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).norm() / scale
        }
    };
    let (residual_displayed, residual_conjugated) = (rel(rhs_displayed), rel(rhs_conjugated));
    let (residual, variant) = if residual_conjugated <= residual_displayed {
        (residual_conjugated, HextVariant::Conjugated)
    } else {
        (residual_displayed, HextVariant::Displayed)
    };
    Ok(HextResult { lhs, rhs_displayed, rhs_conjugated, residual_displayed, residual_conjugated, residual, variant, tail })
}

/// Default `t_max` for a square of side `extent`.
pub fn default_t_max(extent: f64) -> f64 {
    10.0 * extent * extent
}

/// `exp(-|z - c|^2 / a)`.
pub fn gaussian(cx: f64, cy: f64, a: f64) -> impl Fn(f64, f64) -> Complex64 {
    move |x, y| Complex64::new((-((x - cx).powi(2) + (y - cy).powi(2)) / a).exp(), 0.0)
}

/// Heat evolution of [`gaussian`] in the plane: `a/(a + 4t) exp(-|z - c|^2/(a + 4t))`.
pub fn gaussian_at_time(cx: f64, cy: f64, a: f64, t: f64) -> impl Fn(f64, f64) -> Complex64 {
    let b = a + 4.0 * t;
    move |x, y| Complex64::new(a / b * (-((x - cx).powi(2) + (y - cy).powi(2)) / b).exp(), 0.0)
}

/// `G(rho) = (1 - rho/s^2) exp(-rho/s^2)` at `rho = r^2`: a radial profile
/// with zero integral over the plane, for which `(I - H) G = -(rho/s^2) exp(-rho/s^2)`.
pub fn mexican_hat(grid: Arc<RadialGrid>, s: f64) -> Result<RadialProfile> {
    RadialProfile::from_real_fn(grid, |r| {
        let x = r * r / (s * s);
        (1.0 - x) * (-x).exp()
    })
}
