//! Identities satisfied by `B = Phi(|f|, |g|)` along the ansatz
//! `f = e^{2i theta}(m(r) + i k(r))`, `g = xi(r) + i eta(r)`, for any smooth
//! surrogate `Phi`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, RadialProfile};
use crate::radial_reduction::SUPPORT_MARGIN;

type Scalar2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `Phi(x, y)` with the partials `Phi_1`, `Phi_11`, `Phi_12`.
#[derive(Clone)]
pub struct SurrogatePhi {
    name: String,
    phi: Scalar2,
    phi1: Scalar2,
    phi11: Scalar2,
    phi12: Scalar2,
}

impl fmt::Debug for SurrogatePhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurrogatePhi").field("name", &self.name).finish_non_exhaustive()
    }
}

impl SurrogatePhi {
    /// Checks the partials against central differences of `phi` at
    /// `x, y in {0.25, 0.5, ..., 2}`; each must agree to `1e-6 (1 + |value|)`.
    pub fn new(
        name: impl Into<String>,
        phi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        phi1: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        phi11: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        phi12: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let s = Self {
            name: name.into(),
            phi: Arc::new(phi),
            phi1: Arc::new(phi1),
            phi11: Arc::new(phi11),
            phi12: Arc::new(phi12),
        };
        s.validate()?;
        Ok(s)
    }

    /// `Phi(x, y) = x^2 y + x y^2`.
    pub fn cubic() -> Self {
        Self::new("x^2 y + x y^2", |x, y| x * x * y + x * y * y, |x, y| 2.0 * x * y + y * y, |_, y| 2.0 * y, |x, y| {
            2.0 * x + 2.0 * y
        })
        .expect("the cubic surrogate has correct partials")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn phi(&self, x: f64, y: f64) -> f64 {
        (self.phi)(x, y)
    }

    pub fn phi1(&self, x: f64, y: f64) -> f64 {
        (self.phi1)(x, y)
    }

    pub fn phi11(&self, x: f64, y: f64) -> f64 {
        (self.phi11)(x, y)
    }

    pub fn phi12(&self, x: f64, y: f64) -> f64 {
        (self.phi12)(x, y)
    }

    fn validate(&self) -> Result<()> {
        let h = 1e-4;
        for i in 1..=8 {
            for j in 1..=8 {
                let (x, y) = (0.25 * i as f64, 0.25 * j as f64);
                let f = |a: f64, b: f64| self.phi(a, b);
                let checks = [
                    ("phi1", self.phi1(x, y), (f(x + h, y) - f(x - h, y)) / (2.0 * h)),
                    ("phi11", self.phi11(x, y), (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h)),
                    (
                        "phi12",
                        self.phi12(x, y),
                        (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h),
                    ),
                ];
                for (which, given, fd) in checks {
                    let error = (given - fd).abs() / (1.0 + given.abs());
                    if error.is_nan() || error > 1e-6 {
                        return Err(Error::InvalidSurrogate { which, error });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Radial data of `f = e^{2i theta}(m + ik)` and `g = xi + i eta`, with
/// derivatives.
#[derive(Debug, Clone)]
pub struct ModePair {
    values: [RadialProfile; 4],
    derivatives: [RadialProfile; 4],
}

impl ModePair {
    /// `values` and `derivatives` are `[m, k, xi, eta]` and their `r`-derivatives.
    pub fn new(values: [RadialProfile; 4], derivatives: [RadialProfile; 4]) -> Result<Self> {
        let grid = values[0].grid().clone();
        for p in values.iter().chain(&derivatives) {
            if p.grid() != &grid {
                return Err(Error::InvalidField("mode pair profiles must share one grid".into()));
            }
            if !p.is_real() {
                return Err(Error::InvalidField("mode pair profiles must be real".into()));
            }
        }
        let inner = grid.interior(SUPPORT_MARGIN);
        for (name, p) in ["m", "k", "xi", "eta"].iter().zip(&values) {
            let scale = p.max_abs();
            let outer = p
                .samples()
                .iter()
                .enumerate()
                .filter(|(i, _)| !inner.contains(i))
                .map(|(_, s)| s.norm())
                .fold(0.0, f64::max);
            if outer > 1e-12 * scale {
                return Err(Error::InvalidField(format!("{name} is not compactly supported")));
            }
        }
        Ok(Self { values, derivatives })
    }

    /// Builds the profiles from functions and their derivatives.
    pub fn from_fns(grid: Arc<RadialGrid>, fns: [&dyn Fn(f64) -> f64; 4], dfns: [&dyn Fn(f64) -> f64; 4]) -> Result<Self> {
        let build = |f: &dyn Fn(f64) -> f64| RadialProfile::from_real_fn(grid.clone(), f);
        let values = [build(fns[0])?, build(fns[1])?, build(fns[2])?, build(fns[3])?];
        let derivatives = [build(dfns[0])?, build(dfns[1])?, build(dfns[2])?, build(dfns[3])?];
        Self::new(values, derivatives)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.values[0].grid()
    }

    fn at(&self, i: usize) -> [(f64, f64); 4] {
        std::array::from_fn(|j| (self.values[j].samples()[i].re, self.derivatives[j].samples()[i].re))
    }
}

/// `|(a, b)|` and its derivative, given `a, a', b, b'`. Where the modulus
/// vanishes the one-sided derivative `|(a', b')|` is used.
fn modulus(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let m = a.0.hypot(b.0);
    if m == 0.0 {
        (0.0, a.1.hypot(b.1))
    } else {
        (m, (a.0 * a.1 + b.0 * b.1) / m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IbpCheck {
    /// `4 pi int (Phi_12 M N' + Phi_11 M M') dr`.
    pub a: f64,
    /// `4 pi int Phi_1 M' dr`.
    pub b: f64,
    /// `-4 pi Phi_1(M, N) M` at the first node.
    pub boundary: f64,
    pub scale: f64,
    /// `|a + b - boundary| / scale`.
    pub residual: f64,
}

/// The integration by parts behind `a + b`: since
/// `d/dr Phi_1(M, N) = Phi_11 M' + Phi_12 N'`, the sum `a + b` integrates
/// `4 pi (M Phi_1(M, N))'` and equals the boundary term at the inner end.
pub fn ibp_identity(mp: &ModePair, phi: &SurrogatePhi) -> IbpCheck {
    ibp_from(mp.grid().nodes(), |i| mp.at(i), phi)
}

/// [`ibp_identity`] for profiles `[m, k, xi, eta]` that need not vanish at
/// the inner end, so that the boundary term can be nonzero.
pub fn ibp_identity_profiles(values: &[RadialProfile; 4], derivatives: &[RadialProfile; 4], phi: &SurrogatePhi) -> Result<IbpCheck> {
    let grid = values[0].grid();
    if values.iter().chain(derivatives).any(|p| p.grid() != grid) {
        return Err(Error::InvalidField("profiles must share one grid".into()));
    }
    let at = |i: usize| std::array::from_fn(|j| (values[j].samples()[i].re, derivatives[j].samples()[i].re));
    Ok(ibp_from(grid.nodes(), at, phi))
}

fn ibp_from(r: &[f64], at: impl Fn(usize) -> [(f64, f64); 4], phi: &SurrogatePhi) -> IbpCheck {
    let four_pi = 4.0 * PI;
    let mut fa = Vec::with_capacity(r.len());
    let mut fb = Vec::with_capacity(r.len());
    let mut mags = Vec::with_capacity(r.len());
    for i in 0..r.len() {
        let [m, k, xi, eta] = at(i);
        let (big_m, dm) = modulus(m, k);
        let (big_n, dn) = modulus(xi, eta);
        let t1 = phi.phi12(big_m, big_n) * big_m * dn;
        let t2 = phi.phi11(big_m, big_n) * big_m * dm;
        let t3 = phi.phi1(big_m, big_n) * dm;
        fa.push(t1 + t2);
        fb.push(t3);
        mags.push(t1.abs() + t2.abs() + t3.abs());
    }
    let trap = |f: &[f64]| -> f64 { r.windows(2).zip(f.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum() };
    let a = four_pi * trap(&fa);
    let b = four_pi * trap(&fb);
    let [m0, k0, xi0, eta0] = at(0);
    let big_m0 = m0.0.hypot(k0.0);
    let boundary = -four_pi * phi.phi1(big_m0, xi0.0.hypot(eta0.0)) * big_m0;
    let scale = (four_pi * trap(&mags)).max(boundary.abs());
    let residual = if scale > 0.0 { (a + b - boundary).abs() / scale } else { (a + b - boundary).abs() };
    IbpCheck { a, b, boundary, scale, residual }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StructuralReport {
    /// Max over radii of `|circle integral of D1| / circle integral of the
    /// absolute values of its four terms`.
    pub d1_circle: f64,
    /// Max distance between `D1` from Hessian entries and the closed form
    /// `(u u_theta + v v_theta)(eta xi_r - xi eta_r) Phi_12 / (r |f| |g|)`,
    /// relative to the largest term.
    pub d1_closed_form: f64,
    /// Max of `|Im zeta_2 conj(zeta_1)|` relative to `max |zeta_1| |zeta_2|`.
    pub c_integrand: f64,
    /// Max of `|u v_theta - v u_theta - 2 M^2|` relative to `max 2 M^2`.
    pub angular_identity: f64,
    /// Max of `|u_r v_theta - v_r u_theta - 2 M M'|` relative to the largest
    /// of `|u_r v_theta|`, `|v_r u_theta|`.
    pub radial_identity: f64,
    pub ibp: IbpCheck,
}

/// Angles used on each circle.
pub const STRUCTURAL_ANGLES: usize = 64;

/// Spectral `d/d theta` of periodic samples.
fn angular_derivative(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut data: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut data);
    for (b, v) in data.iter_mut().enumerate() {
        let k = if b < n / 2 {
            b as f64
        } else if b == n / 2 {
            0.0
        } else {
            b as f64 - n as f64
        };
        *v *= Complex64::new(0.0, k / n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut data);
    data.iter().map(|v| v.re).collect()
}

/// Evaluates the identities on a polar grid: the mode pair's radii times
/// [`STRUCTURAL_ANGLES`] angles. `theta`-derivatives are spectral,
/// `r`-derivatives come from the profile derivatives.
pub fn structural_identities(mp: &ModePair, phi: &SurrogatePhi) -> StructuralReport {
    let n_t = STRUCTURAL_ANGLES;
    let thetas: Vec<f64> = (0..n_t).map(|j| TAU * j as f64 / n_t as f64).collect();
    let grad = |q_r: f64, q_t: f64, r: f64, th: f64| -> Complex64 {
        let (s, c) = th.sin_cos();
        Complex64::new(q_r * c - q_t * s / r, q_r * s + q_t * c / r)
    };
    let mut d1_circle = 0.0f64;
    let mut d1_closed = 0.0f64;
    let mut d1_scale = 0.0f64;
    let mut c_max = 0.0f64;
    let mut c_scale = 0.0f64;
    let mut ang = 0.0f64;
    let mut ang_scale = 0.0f64;
    let mut rad = 0.0f64;
    let mut rad_scale = 0.0f64;
    for (i, &r) in mp.grid().nodes().iter().enumerate() {
        let [m, k, xi, eta] = mp.at(i);
        let (big_m, dm) = modulus(m, k);
        let (big_n, _) = modulus(xi, eta);
        let field = |th: f64, d: bool| {
            let (a, b) = if d { (m.1, k.1) } else { (m.0, k.0) };
            let e = Complex64::from_polar(1.0, 2.0 * th) * Complex64::new(a, b);
            (e.re, e.im)
        };
        let (u, v): (Vec<f64>, Vec<f64>) = thetas.iter().map(|&t| field(t, false)).unzip();
        let (u_r, v_r): (Vec<f64>, Vec<f64>) = thetas.iter().map(|&t| field(t, true)).unzip();
        let (u_t, v_t) = (angular_derivative(&u), angular_derivative(&v));
        let xi_t = angular_derivative(&vec![xi.0; n_t]);
        let eta_t = angular_derivative(&vec![eta.0; n_t]);
        let mut circle = 0.0;
        let mut circle_abs = 0.0;
        for j in 0..n_t {
            let th = thetas[j];
            let z1 = grad(u_r[j], u_t[j], r, th);
            let z2 = grad(v_r[j], v_t[j], r, th);
            let zeta1 = grad(xi.1, xi_t[j], r, th);
            let zeta2 = grad(eta.1, eta_t[j], r, th);
            let im = |a: Complex64, b: Complex64| (a * b.conj()).im;

            if big_m > 0.0 && big_n > 0.0 {
                let p12 = phi.phi12(big_m, big_n) / (big_m * big_n);
                let (b13, b14) = (u[j] * xi.0 * p12, u[j] * eta.0 * p12);
                let (b23, b24) = (v[j] * xi.0 * p12, v[j] * eta.0 * p12);
                let terms = [b13 * im(zeta2, z1), b23 * im(zeta2, z2), b14 * im(z1, zeta1), b24 * im(z2, zeta1)];
                let d1: f64 = terms.iter().sum();
                let closed = (u[j] * u_t[j] + v[j] * v_t[j]) * (eta.0 * xi.1 - xi.0 * eta.1) / r * p12;
                let term_abs: f64 = terms.iter().map(|t| t.abs()).sum();
                circle += d1;
                circle_abs += term_abs;
                d1_closed = d1_closed.max((d1 - closed).abs());
                d1_scale = d1_scale.max(term_abs);
            }

            c_max = c_max.max(im(zeta2, zeta1).abs());
            c_scale = c_scale.max(zeta1.norm() * zeta2.norm());
            ang = ang.max((u[j] * v_t[j] - v[j] * u_t[j] - 2.0 * big_m * big_m).abs());
            ang_scale = ang_scale.max(2.0 * big_m * big_m);
            rad = rad.max((u_r[j] * v_t[j] - v_r[j] * u_t[j] - 2.0 * big_m * dm).abs());
            rad_scale = rad_scale.max((u_r[j] * v_t[j]).abs().max((v_r[j] * u_t[j]).abs()));
        }
        if circle_abs > 0.0 {
            d1_circle = d1_circle.max(circle.abs() / circle_abs);
        }
    }
    let rel = |x: f64, s: f64| if s > 0.0 { x / s } else { x };
    StructuralReport {
        d1_circle,
        d1_closed_form: rel(d1_closed, d1_scale),
        c_integrand: rel(c_max, c_scale),
        angular_identity: rel(ang, ang_scale),
        radial_identity: rel(rad, rad_scale),
        ibp: ibp_identity(mp, phi),
    }
}
