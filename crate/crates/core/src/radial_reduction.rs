//! Reduction of the planar transform to one-dimensional operators acting on
//! angular modes, and the calculus of stretch functions.
//!
//! Modes follow the convention `f(r e^{i theta}) = sum_k e^{-ik theta} f_k(r)`.
//! Operators of Hardy type act on functions of `u = r^2` sampled on a grid
//! with Lebesgue measure.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Measure, RadialGrid, RadialProfile};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Anything that can be evaluated at an arbitrary point of the plane.
pub trait PlaneSampler {
    fn sample(&self, x: f64, y: f64) -> Result<Complex64>;
}

impl<F: Fn(f64, f64) -> Complex64> PlaneSampler for F {
    fn sample(&self, x: f64, y: f64) -> Result<Complex64> {
        Ok(self(x, y))
    }
}

pub const DEFAULT_ANGLES: usize = 256;

/// `f_k(r) = (1/2pi) int e^{ik phi} f(r e^{i phi}) d phi` at every node, by
/// the trapezoid rule on `n_phi` angles.
pub fn project_mode<S: PlaneSampler + ?Sized>(
    field: &S,
    k: i32,
    grid: &Arc<RadialGrid>,
    n_phi: usize,
) -> Result<RadialProfile> {
    let n_phi = n_phi.max(DEFAULT_ANGLES);
    let angles: Vec<(f64, f64, Complex64)> = (0..n_phi)
        .map(|j| {
            let phi = TAU * j as f64 / n_phi as f64;
            (phi.cos(), phi.sin(), Complex64::from_polar(1.0, k as f64 * phi))
        })
        .collect();
    let mut samples = Vec::with_capacity(grid.len());
    for &r in grid.nodes() {
        let mut acc = ZERO;
        for &(c, s, phase) in &angles {
            acc += phase * field.sample(r * c, r * s)?;
        }
        samples.push(acc / n_phi as f64);
    }
    Ok(RadialProfile::new(grid.clone(), samples)?.with_mode(k))
}

/// Discrete `L^p(r dr d phi)` norms of the reconstructed `k`-mode and of the
/// field itself, on the polar grid used by [`project_mode`].
pub fn mode_contraction<S: PlaneSampler + ?Sized>(
    field: &S,
    k: i32,
    grid: &Arc<RadialGrid>,
    n_phi: usize,
    p: f64,
) -> Result<(f64, f64)> {
    let n_phi = n_phi.max(DEFAULT_ANGLES);
    let mode = project_mode(field, k, grid, n_phi)?;
    let radial = grid.with_measure(Measure::Radial);
    let (mut mode_sum, mut field_sum) = (0.0, 0.0);
    for (i, (&r, &w)) in radial.nodes().iter().zip(radial.weights()).enumerate() {
        let mut ring = 0.0;
        for j in 0..n_phi {
            let phi = TAU * j as f64 / n_phi as f64;
            ring += field.sample(r * phi.cos(), r * phi.sin())?.norm().powf(p);
        }
        let dphi = TAU / n_phi as f64;
        field_sum += w * ring * dphi;
        mode_sum += w * mode.samples()[i].norm().powf(p) * TAU;
    }
    Ok((mode_sum.powf(1.0 / p), field_sum.powf(1.0 / p)))
}

/// Kernel of the transform, `-1 / (pi z^2)`: the sign for which the
/// transform maps `dbar f` to `d f` with multiplier `conj(xi)/xi`.
pub fn beurling_kernel(z: Complex64) -> Complex64 {
    -1.0 / (PI * z * z)
}

/// `N_k(rho, r) = int_0^{2pi} K(r e^{it} + rho) e^{-ikt} dt`.
///
/// Only the absolutely continuous part is returned; the point mass on the
/// diagonal lives in the identity term of [`apply_lambda_m`]. The periodic
/// trapezoid rule is doubled until successive values agree to `1e-10`.
pub fn reduced_kernel_nk(rho: f64, r: f64, k: i32) -> Result<Complex64> {
    if !(rho > 0.0 && r > 0.0 && rho.is_finite() && r.is_finite()) {
        return Err(Error::NonFinite("kernel arguments"));
    }
    if (r - rho).abs() < 1e-8 * r.max(rho) {
        return Err(Error::SingularPoint(rho));
    }
    let eval = |n: usize| -> Complex64 {
        let h = TAU / n as f64;
        let mut acc = ZERO;
        for j in 0..n {
            let t = h * j as f64;
            let z = Complex64::from_polar(r, t) + rho;
            acc += beurling_kernel(z) * Complex64::from_polar(1.0, -(k as f64) * t);
        }
        acc * h
    };
    let mut n = 64;
    let mut prev = eval(n);
    const MAX_POINTS: usize = 1 << 24;
    while n < MAX_POINTS {
        n *= 2;
        let next = eval(n);
        if (next - prev).norm() < 1e-10 {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

/// Per-cell weights for `int_0^{u_i} v^alpha g(v) dv` with `g` piecewise
/// linear between nodes and held at `g(u_0)` on `[0, u_0]`.
#[derive(Debug, Clone)]
pub(crate) struct MomentWeights {
    pub head: f64,
    /// `(left, right)` weight of each cell `[u_j, u_{j+1}]`.
    pub cells: Vec<(f64, f64)>,
}

impl MomentWeights {
    pub fn new(grid: &RadialGrid, alpha: u32) -> Self {
        let u = grid.nodes();
        let head = u[0].powi(alpha as i32 + 1) / (alpha + 1) as f64;
        let cells = u
            .windows(2)
            .map(|w| {
                let (a, h) = (w[0], w[1] - w[0]);
                // Expand (a + h s)^alpha binomially; every term is positive.
                let (mut left, mut right) = (0.0, 0.0);
                let mut binom = 1.0;
                for j in 0..=alpha {
                    let term = binom * a.powi((alpha - j) as i32) * h.powi(j as i32);
                    let jf = j as f64;
                    left += term / ((jf + 1.0) * (jf + 2.0));
                    right += term / (jf + 2.0);
                    binom = binom * (alpha - j) as f64 / (jf + 1.0);
                }
                (left * h, right * h)
            })
            .collect();
        Self { head, cells }
    }

    pub fn cumulative(&self, g: &[Complex64]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(g.len());
        let mut acc = g[0] * self.head;
        out.push(acc);
        for (j, &(l, r)) in self.cells.iter().enumerate() {
            acc += g[j] * l + g[j + 1] * r;
            out.push(acc);
        }
        out
    }
}

fn require_lebesgue(grid: &RadialGrid) -> Result<()> {
    if grid.measure() != Measure::Lebesgue {
        return Err(Error::MeasureMismatch { expected: "lebesgue" });
    }
    Ok(())
}

/// Coefficient `(m+1) u^{-(m+2)/2}` of the integral term of `Lambda_m`.
pub(crate) fn lambda_scale(m: u32, u: f64) -> f64 {
    (m + 1) as f64 / u.powi((m / 2) as i32 + 1)
}

/// `Lambda_m g(u) = g(u) - (m+1) u^{-(m+2)/2} int_0^u v^{m/2} g(v) dv`.
///
/// `m` must be even. `Lambda_0 = I - H`.
pub fn apply_lambda_m(g: &RadialProfile, m: u32) -> Result<RadialProfile> {
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("lambda_m needs even m, got {m}")));
    }
    require_lebesgue(g.grid())?;
    let cum = MomentWeights::new(g.grid(), m / 2).cumulative(g.samples());
    let out = g
        .grid()
        .nodes()
        .iter()
        .zip(g.samples())
        .zip(cum)
        .map(|((&u, &gu), c)| gu - c * lambda_scale(m, u))
        .collect();
    Ok(g.with_samples(out))
}

/// Hardy average `Hg(u) = (1/u) int_0^u g(v) dv`.
pub fn apply_hardy(g: &RadialProfile) -> Result<RadialProfile> {
    require_lebesgue(g.grid())?;
    let cum = MomentWeights::new(g.grid(), 0).cumulative(g.samples());
    let out = g.grid().nodes().iter().zip(cum).map(|(&u, c)| c / u).collect();
    Ok(g.with_samples(out))
}

/// A stretch `g`, i.e. the radial factor of `f(r e^{i theta}) = g(r) e^{-i theta}`,
/// together with samples of `g'`.
#[derive(Debug, Clone)]
pub struct StretchProfile {
    profile: RadialProfile,
    derivative: RadialProfile,
    complex: bool,
}

/// Fraction of nodes at each end of the grid on which a stretch must vanish.
pub const SUPPORT_MARGIN: f64 = 0.01;

impl StretchProfile {
    /// A real stretch: nonnegative samples that vanish on the outer 1% of
    /// nodes at both ends.
    pub fn new(profile: RadialProfile, derivative: RadialProfile) -> Result<Self> {
        let scale = profile.max_abs();
        if !profile.is_real() {
            return Err(Error::InvalidStretch("samples must be real; use new_complex".into()));
        }
        if profile.samples().iter().any(|s| s.re < -1e-13 * scale) {
            return Err(Error::InvalidStretch("samples must be nonnegative".into()));
        }
        Self::build(profile, derivative, false)
    }

    /// A complex stretch; only the support condition is enforced.
    pub fn new_complex(profile: RadialProfile, derivative: RadialProfile) -> Result<Self> {
        Self::build(profile, derivative, true)
    }

    fn build(profile: RadialProfile, derivative: RadialProfile, complex: bool) -> Result<Self> {
        if derivative.grid() != profile.grid() {
            return Err(Error::InvalidStretch("derivative must share the grid".into()));
        }
        let scale = profile.max_abs();
        let inner = profile.grid().interior(SUPPORT_MARGIN);
        let outer = profile
            .samples()
            .iter()
            .enumerate()
            .filter(|(i, _)| !inner.contains(i))
            .map(|(_, s)| s.norm())
            .fold(0.0, f64::max);
        if outer > 1e-12 * scale {
            return Err(Error::InvalidStretch(format!(
                "not compactly supported: |g| = {outer:e} near the grid ends"
            )));
        }
        Ok(Self { profile, derivative, complex })
    }

    /// Real stretch whose derivative is taken numerically.
    pub fn from_samples(profile: RadialProfile) -> Result<Self> {
        let d = profile.derivative();
        Self::new(profile, d)
    }

    /// Real stretch with an analytic derivative.
    pub fn from_fn(
        grid: Arc<RadialGrid>,
        g: impl Fn(f64) -> f64,
        dg: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let profile = RadialProfile::from_real_fn(grid.clone(), g)?;
        let derivative = RadialProfile::from_real_fn(grid, dg)?;
        Self::new(profile, derivative)
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn derivative(&self) -> &RadialProfile {
        &self.derivative
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.profile.grid()
    }

    /// Smallest and largest node where `g` is nonzero.
    pub fn support(&self) -> Option<(f64, f64)> {
        let nodes = self.grid().nodes();
        let nz: Vec<usize> = (0..nodes.len()).filter(|&i| self.profile.samples()[i].norm() > 0.0).collect();
        Some((nodes[*nz.first()?], nodes[*nz.last()?]))
    }
}

/// `dbar = g' + g/r` (mode 0) and `dmag = g' - g/r` (mode 2): the radial
/// factors of `dbar f` and `d f` for `f = g(r) e^{-i theta}`.
pub fn stretch_derivatives(s: &StretchProfile) -> (RadialProfile, RadialProfile) {
    let r = s.grid().nodes();
    let g = s.profile.samples();
    let dg = s.derivative.samples();
    let dbar = (0..r.len()).map(|i| dg[i] + g[i] / r[i]).collect();
    let dmag = (0..r.len()).map(|i| dg[i] - g[i] / r[i]).collect();
    (s.profile.with_samples(dbar).with_mode(0), s.profile.with_samples(dmag).with_mode(2))
}

/// `beta(rho) = (g'(sqrt rho) + g(sqrt rho)/sqrt rho) / 2` on `rho_grid`.
pub fn beta_from_stretch(s: &StretchProfile, rho_grid: &Arc<RadialGrid>) -> Result<RadialProfile> {
    require_lebesgue(rho_grid)?;
    if let Some((lo, hi)) = s.support() {
        if rho_grid.first() > lo * lo * (1.0 + 1e-12) || rho_grid.last() < hi * hi * (1.0 - 1e-12) {
            return Err(Error::SupportMismatch(format!(
                "rho grid [{}, {}] does not cover [{}, {}]",
                rho_grid.first(),
                rho_grid.last(),
                lo * lo,
                hi * hi
            )));
        }
    }
    let g = s.profile.interpolant();
    let dg = s.derivative.interpolant();
    let samples = rho_grid
        .nodes()
        .iter()
        .map(|&rho| {
            let r = rho.sqrt();
            match (g.eval(r), dg.eval(r)) {
                (Some(gv), Some(dv)) => 0.5 * (dv + gv / r),
                _ => ZERO,
            }
        })
        .collect();
    RadialProfile::new(rho_grid.clone(), samples)
}

/// Inverts [`beta_from_stretch`]: `g(sqrt rho) = sqrt rho (H beta)(rho)` on
/// the grid `r_i = sqrt(rho_i)`, with `g'` taken numerically.
pub fn stretch_from_beta(beta: &RadialProfile) -> Result<StretchProfile> {
    require_lebesgue(beta.grid())?;
    let hb = apply_hardy(beta)?;
    let r_grid = Arc::new(beta.grid().mapped(f64::sqrt, Measure::Radial)?);
    let samples: Vec<Complex64> = r_grid.nodes().iter().zip(hb.samples()).map(|(&r, &h)| h * r).collect();
    let profile = RadialProfile::new(r_grid, samples)?.with_mode(1);
    let derivative = profile.derivative();
    if profile.is_real() {
        StretchProfile::new(profile, derivative)
    } else {
        StretchProfile::new_complex(profile, derivative)
    }
}

/// Max over interior nodes of `|(g' - g/r)/2 - (beta - H beta)|` at
/// `r = sqrt(rho)`, with `beta` built from `s` on the grid `rho_i = r_i^2`.
pub fn hm_identity_residual(s: &StretchProfile) -> Result<f64> {
    let rho_grid = Arc::new(s.grid().mapped(|r| r * r, Measure::Lebesgue)?);
    let beta = beta_from_stretch(s, &rho_grid)?;
    let hb = apply_hardy(&beta)?;
    let (_, dmag) = stretch_derivatives(s);
    let residual = rho_grid
        .interior(SUPPORT_MARGIN)
        .map(|i| (0.5 * dmag.samples()[i] - (beta.samples()[i] - hb.samples()[i])).norm())
        .fold(0.0, f64::max);
    Ok(residual)
}
