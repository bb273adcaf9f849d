//! Pointwise Burkholder-type functions of a pair of complex numbers, the
//! dictionary between 2x2 real matrices and such pairs, and the rank-one
//! convexity machinery built on top of them.
//!
//! A matrix `[[a, b], [c, d]]` corresponds to the pair
//! `z = (a - d) + i(b + c)`, `w = (a + d) + i(c - b)`. Under this map a
//! matrix has rank one exactly when `|z| = |w|`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// An exponent `p` in `(1, inf)` together with its conjugate `p'` and
/// `p* = max(p, p')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    p: f64,
    conj: f64,
    star: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let conj = p / (p - 1.0);
        Ok(Self { p, conj, star: p.max(conj) })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn conjugate(&self) -> f64 {
        self.conj
    }

    #[inline]
    pub fn star(&self) -> f64 {
        self.star
    }

    /// The sharp constant `p* - 1`.
    #[inline]
    pub fn sharp_constant(&self) -> f64 {
        self.star - 1.0
    }

    pub fn dual(&self) -> Self {
        Self { p: self.conj, conj: self.p, star: self.star }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub z: Complex64,
    pub w: Complex64,
}

impl PhasePoint {
    pub fn new(z: Complex64, w: Complex64) -> Self {
        Self { z, w }
    }

    pub fn from_moduli(z: f64, w: f64) -> Self {
        Self::new(Complex64::new(z, 0.0), Complex64::new(w, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.w.is_finite()
    }

    /// `(z + t Z, w + t W)`.
    pub fn along(&self, dir: &PhasePoint, t: f64) -> PhasePoint {
        PhasePoint::new(self.z + dir.z * t, self.w + dir.w * t)
    }

    pub fn scaled(&self, s: f64) -> PhasePoint {
        PhasePoint::new(self.z * s, self.w * s)
    }

    pub fn swapped(&self) -> PhasePoint {
        PhasePoint::new(self.w, self.z)
    }
}

/// A real 2x2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RealMatrix2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RealMatrix2 {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn frobenius_squared(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &RealMatrix2) -> RealMatrix2 {
        RealMatrix2::new(
            self.a + t * other.a,
            self.b + t * other.b,
            self.c + t * other.c,
            self.d + t * other.d,
        )
    }
}

/// A rank-one matrix, used as the direction of a line `A + tB`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOneDirection {
    matrix: RealMatrix2,
}

impl RankOneDirection {
    /// Accepts `matrix` when `det = 0` and `|Z| = |W|` hold to `1e-12`
    /// relative precision.
    pub fn new(matrix: RealMatrix2) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite("rank-one direction"));
        }
        let frob = matrix.frobenius_squared();
        if frob == 0.0 || matrix.det().abs() > 1e-12 * frob {
            return Err(Error::NotRankOne(format!("{matrix:?}")));
        }
        let ph = matrix_to_phase(&matrix);
        let (zm, wm) = (ph.z.norm(), ph.w.norm());
        if (zm - wm).abs() > 1e-12 * (zm + wm) {
            return Err(Error::NotRankOne(format!("phase moduli {zm} and {wm} differ")));
        }
        Ok(Self { matrix })
    }

    /// Outer product `u v^T`.
    pub fn outer(u: [f64; 2], v: [f64; 2]) -> Result<Self> {
        Self::new(RealMatrix2::new(u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]))
    }

    pub fn matrix(&self) -> &RealMatrix2 {
        &self.matrix
    }

    pub fn phase(&self) -> PhasePoint {
        matrix_to_phase(&self.matrix)
    }
}

pub fn matrix_to_phase(m: &RealMatrix2) -> PhasePoint {
    PhasePoint::new(
        Complex64::new(m.a - m.d, m.b + m.c),
        Complex64::new(m.a + m.d, m.c - m.b),
    )
}

pub fn phase_to_matrix(ph: &PhasePoint) -> RealMatrix2 {
    let (z, w) = (ph.z, ph.w);
    RealMatrix2::new(
        0.5 * (z.re + w.re),
        0.5 * (z.im - w.im),
        0.5 * (z.im + w.im),
        0.5 * (w.re - z.re),
    )
}

/// `L(z, w)`: `|z|^2 - |w|^2` on the closed set `|z| + |w| <= 1`, and
/// `2|z| - 1` outside it.
pub fn eval_l(ph: &PhasePoint) -> f64 {
    let (z, w) = (ph.z.norm(), ph.w.norm());
    if z + w <= 1.0 {
        z * z - w * w
    } else {
        2.0 * z - 1.0
    }
}

/// `M = L - (|z|^2 - |w|^2)`, which vanishes on `|z| + |w| <= 1`.
pub fn eval_m(ph: &PhasePoint) -> f64 {
    let (z, w) = (ph.z.norm(), ph.w.norm());
    if z + w > 1.0 {
        w * w - (z - 1.0) * (z - 1.0)
    } else {
        0.0
    }
}

/// `L_p(z, w) = ((p* - 1)|z| - |w|)(|z| + |w|)^(p-1)`.
pub fn eval_lp(ph: &PhasePoint, e: &Exponent) -> f64 {
    let (z, w) = (ph.z.norm(), ph.w.norm());
    let s = z + w;
    if s == 0.0 {
        return 0.0;
    }
    (e.sharp_constant() * z - w) * s.powf(e.p() - 1.0)
}

pub fn eval_psi(m: &RealMatrix2) -> f64 {
    eval_l(&matrix_to_phase(m))
}

pub fn eval_psi_p(m: &RealMatrix2, e: &Exponent) -> f64 {
    eval_lp(&matrix_to_phase(m), e)
}

/// Draws one rank-one direction from a seeded stream.
pub fn sample_rank_one(seed: u64) -> Result<RankOneDirection> {
    PhaseSampler::new(seed).rank_one()
}

/// Seeded source of the random inputs used by the pointwise checks.
///
/// Matrix entries are uniform in `[-1, 1]`; phase points have log-uniform
/// moduli in `[1e-3, 1e3]` and uniform arguments.
#[derive(Debug, Clone)]
pub struct PhaseSampler {
    rng: ChaCha8Rng,
}

impl PhaseSampler {
    pub const MAX_DRAWS: usize = 1000;

    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn matrix(&mut self) -> RealMatrix2 {
        let mut u = || self.rng.gen_range(-1.0..=1.0);
        RealMatrix2::new(u(), u(), u(), u())
    }

    pub fn rank_one(&mut self) -> Result<RankOneDirection> {
        let mut draws = 0;
        let mut vector = |rng: &mut ChaCha8Rng| -> Result<[f64; 2]> {
            loop {
                if draws >= Self::MAX_DRAWS {
                    return Err(Error::DegenerateSampler(draws));
                }
                draws += 1;
                let v: [f64; 2] = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
                if v[0].hypot(v[1]) > 1e-3 {
                    return Ok(v);
                }
            }
        };
        let u = vector(&mut self.rng)?;
        let v = vector(&mut self.rng)?;
        RankOneDirection::outer(u, v)
    }

    pub fn modulus(&mut self) -> f64 {
        10f64.powf(self.rng.gen_range(-3.0..=3.0))
    }

    pub fn phase_point(&mut self) -> PhasePoint {
        let z = Complex64::from_polar(self.modulus(), self.angle());
        let w = Complex64::from_polar(self.modulus(), self.angle());
        PhasePoint::new(z, w)
    }

    pub fn angle(&mut self) -> f64 {
        self.rng.gen_range(0.0..std::f64::consts::TAU)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}

/// The function probed along a rank-one line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvexityProbe {
    Psi,
    PsiP(Exponent),
    /// `t -> M(z + tZ, w + tW)` in phase coordinates.
    MAlongLine,
}

impl ConvexityProbe {
    pub fn eval(&self, m: &RealMatrix2) -> f64 {
        match self {
            ConvexityProbe::Psi => eval_psi(m),
            ConvexityProbe::PsiP(e) => eval_psi_p(m, e),
            ConvexityProbe::MAlongLine => eval_m(&matrix_to_phase(m)),
        }
    }
}

/// Midpoint convexity gap of a probe along `A + tB`.
#[derive(Debug, Clone, Copy)]
pub struct ConvexityMargin {
    pub margin: f64,
    /// Largest absolute probe value at the three points.
    pub scale: f64,
}

/// `(F(A + t1 B) + F(A + t2 B)) / 2 - F(A + (t1 + t2)/2 B)`.
pub fn midpoint_convexity_margin(
    probe: ConvexityProbe,
    a: &RealMatrix2,
    b: &RankOneDirection,
    t1: f64,
    t2: f64,
) -> ConvexityMargin {
    let dir = b.matrix();
    let f1 = probe.eval(&a.axpy(t1, dir));
    let f2 = probe.eval(&a.axpy(t2, dir));
    let fm = probe.eval(&a.axpy(0.5 * (t1 + t2), dir));
    ConvexityMargin {
        margin: 0.5 * (f1 + f2) - fm,
        scale: f1.abs().max(f2.abs()).max(fm.abs()),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BurkholderMargin {
    pub margin: f64,
    pub scale: f64,
}

/// `(p*-1)^p |z|^p - |w|^p - p (1 - 1/p*)^(p-1) L_p(z, w)`.
pub fn burkholder_margin(ph: &PhasePoint, e: &Exponent) -> BurkholderMargin {
    let p = e.p();
    let (z, w) = (ph.z.norm(), ph.w.norm());
    let lhs = e.sharp_constant().powf(p) * z.powf(p) - w.powf(p);
    let alpha = p * (1.0 - 1.0 / e.star()).powf(p - 1.0);
    let rhs = alpha * eval_lp(ph, e);
    BurkholderMargin {
        margin: lhs - rhs,
        scale: e.sharp_constant().powf(p) * z.powf(p) + w.powf(p) + rhs.abs(),
    }
}

/// Which integral representation of `L_p` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingBranch {
    /// `1 < p < 2`: `int t^(p-1) L(z/t, w/t) dt` against `L_p(z, w)`.
    Lower,
    /// `p > 2`: `int t^(p-1) M(z/t, w/t) dt` against `L_p(w, z)`.
    Upper,
}

impl ScalingBranch {
    pub fn for_exponent(e: &Exponent) -> Result<Self> {
        let p = e.p();
        if p < 2.0 {
            Ok(Self::Lower)
        } else if p > 2.0 {
            Ok(Self::Upper)
        } else {
            Err(Error::BranchMismatch { p, branch: "lower or upper" })
        }
    }

    fn check(&self, e: &Exponent) -> Result<()> {
        let p = e.p();
        match self {
            Self::Lower if p < 2.0 => Ok(()),
            Self::Upper if p > 2.0 => Ok(()),
            Self::Lower => Err(Error::BranchMismatch { p, branch: "1 < p < 2" }),
            Self::Upper => Err(Error::BranchMismatch { p, branch: "p > 2" }),
        }
    }

    /// The proportionality constant obtained by integrating in closed form
    /// at `(z, w) = (1, 0)`.
    pub fn closed_form_constant(&self, e: &Exponent) -> f64 {
        let p = e.p();
        match self {
            Self::Lower => 2.0 / (p * (2.0 - p)),
            Self::Upper => 2.0 / (p * (p - 1.0) * (p - 2.0)),
        }
    }

    fn integrand_value(&self, ph: &PhasePoint) -> f64 {
        match self {
            Self::Lower => eval_l(ph),
            Self::Upper => eval_m(ph),
        }
    }

    pub fn target(&self, ph: &PhasePoint, e: &Exponent) -> f64 {
        match self {
            Self::Lower => eval_lp(ph, e),
            Self::Upper => eval_lp(&ph.swapped(), e),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingIntegral {
    pub integral: f64,
    pub target: f64,
    pub ratio: f64,
}

/// Computes `int_0^inf t^(p-1) G(z/t, w/t) dt` and its ratio to the branch
/// target.
///
/// The integral is split at `t = |z| + |w|`, where the integrand has its only
/// kink. On `[0, s]` the substitution `t = s x^q` removes the integrable
/// power singularity at the origin; `[s, 1e3 s]` is integrated directly and
/// the remaining power-law tail `c t^(p-3)` is added analytically.
pub fn scaling_integral_ratio(
    ph: &PhasePoint,
    e: &Exponent,
    branch: ScalingBranch,
) -> Result<ScalingIntegral> {
    branch.check(e)?;
    if !ph.is_finite() {
        return Err(Error::NonFinite("phase point"));
    }
    let s = ph.z.norm() + ph.w.norm();
    if s == 0.0 {
        return Err(Error::NonIntegrable);
    }
    let p = e.p();
    let target = branch.target(ph, e);
    let tol = 1e-12 * target.abs().max(s.powf(p) * 1e-3);
    let integrand = |t: f64| t.powf(p - 1.0) * branch.integrand_value(&ph.scaled(1.0 / t));

    let q = match branch {
        ScalingBranch::Lower => 1.0 / (p - 1.0),
        ScalingBranch::Upper => 1.0 / (p - 2.0),
    };
    let inner = quadrature::integrate(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            let t = s * x.powf(q);
            if t <= 0.0 {
                return 0.0;
            }
            integrand(t) * s * q * x.powf(q - 1.0)
        },
        0.0,
        1.0,
        tol,
    );
    let t_max = 1e3 * s;
    let middle = quadrature::integrate(integrand, s, t_max, tol);
    let tail = match branch {
        ScalingBranch::Lower => integrand(t_max) * t_max / (2.0 - p),
        ScalingBranch::Upper => 0.0,
    };
    let integral = inner.value + middle.value + tail;
    Ok(ScalingIntegral { integral, target, ratio: integral / target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponent_rejects_out_of_range() {
        assert!(Exponent::new(1.0).is_err());
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        let e = Exponent::new(1.5).unwrap();
        assert!((1.0 / e.p() + 1.0 / e.conjugate() - 1.0).abs() < 1e-14);
        assert_eq!(e.star(), 3.0);
        assert_eq!(Exponent::new(4.0).unwrap().star(), 4.0);
    }

    #[test]
    fn dictionary_examples() {
        let ph = matrix_to_phase(&RealMatrix2::identity());
        assert_eq!((ph.z, ph.w), (c(0.0, 0.0), c(2.0, 0.0)));
        let ph = matrix_to_phase(&RealMatrix2::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!((ph.z, ph.w), (c(1.0, 0.0), c(1.0, 0.0)));
        assert_eq!(
            phase_to_matrix(&PhasePoint::new(c(0.0, 0.0), c(2.0, 0.0))),
            RealMatrix2::identity()
        );
        assert_eq!(
            phase_to_matrix(&PhasePoint::new(c(0.0, 0.0), c(0.0, 0.0))),
            RealMatrix2::default()
        );
    }

    #[test]
    fn dictionary_norm_identities() {
        let mut s = PhaseSampler::new(7);
        for _ in 0..10_000 {
            let m = s.matrix();
            let ph = matrix_to_phase(&m);
            let f = m.frobenius_squared();
            assert!((ph.z.norm_sqr() - (f - 2.0 * m.det())).abs() <= 1e-12 * f.max(1e-300));
            assert!((ph.w.norm_sqr() - (f + 2.0 * m.det())).abs() <= 1e-12 * f.max(1e-300));
        }
    }

    #[test]
    fn l_and_m_examples() {
        let zero = PhasePoint::from_moduli(0.0, 0.0);
        assert_eq!(eval_l(&zero), 0.0);
        assert_eq!(eval_l(&PhasePoint::from_moduli(1.0, 0.0)), 1.0);
        assert_eq!(eval_l(&PhasePoint::from_moduli(1.0, 1.0)), 1.0);
        assert_eq!(eval_m(&zero), 0.0);
        assert_eq!(eval_m(&PhasePoint::from_moduli(1.0, 1.0)), 1.0);
    }

    #[test]
    fn lp_examples() {
        let two = Exponent::new(2.0).unwrap();
        let ph = PhasePoint::new(c(0.3, -0.2), c(0.1, 0.7));
        assert!((eval_lp(&ph, &two) - (ph.z.norm_sqr() - ph.w.norm_sqr())).abs() < 1e-15);
        let e = Exponent::new(1.5).unwrap();
        let z = c(0.6, 0.8) * 2.0;
        let v = eval_lp(&PhasePoint::new(z, c(0.0, 0.0)), &e);
        assert!((v - 2.0 * 2f64.powf(1.5)).abs() < 1e-13);
        // (2*1 - 1) * 2^(1/2)
        assert!((eval_lp(&PhasePoint::from_moduli(1.0, 1.0), &e) - SQRT_2).abs() < 1e-15);
        assert_eq!(eval_lp(&PhasePoint::from_moduli(0.0, 0.0), &e), 0.0);
    }

    #[test]
    fn psi_matches_determinant_inside_unit_region() {
        let mut s = PhaseSampler::new(3);
        let two = Exponent::new(2.0).unwrap();
        let mut inside = 0;
        for _ in 0..5000 {
            let m = s.matrix();
            let small = RealMatrix2::new(0.3 * m.a, 0.3 * m.b, 0.3 * m.c, 0.3 * m.d);
            let ph = matrix_to_phase(&small);
            if ph.z.norm() + ph.w.norm() <= 1.0 {
                inside += 1;
                assert!((eval_psi(&small) + 4.0 * small.det()).abs() < 1e-12);
            }
            assert!((eval_psi_p(&m, &two) + 4.0 * m.det()).abs() < 1e-12);
        }
        assert!(inside > 1000);
        assert_eq!(eval_psi(&RealMatrix2::default()), 0.0);
        assert_eq!(eval_psi_p(&RealMatrix2::default(), &two), 0.0);
    }

    #[test]
    fn rank_one_sampler_is_deterministic_and_valid() {
        assert_eq!(sample_rank_one(11).unwrap(), sample_rank_one(11).unwrap());
        let mut s = PhaseSampler::new(5);
        for _ in 0..2000 {
            let b = s.rank_one().unwrap();
            let m = b.matrix();
            assert!(m.det().abs() <= 1e-12 * m.frobenius_squared());
            let ph = b.phase();
            assert!((ph.z.norm() - ph.w.norm()).abs() <= 1e-12 * (ph.z.norm() + ph.w.norm()));
        }
    }

    #[test]
    fn rank_one_rejects_full_rank() {
        assert!(RankOneDirection::new(RealMatrix2::identity()).is_err());
        assert!(RankOneDirection::new(RealMatrix2::default()).is_err());
    }

    #[test]
    fn convexity_examples() {
        let b = sample_rank_one(1).unwrap();
        let m = midpoint_convexity_margin(ConvexityProbe::Psi, &RealMatrix2::default(), &b, -1.0, 1.0);
        assert!(m.margin >= 0.0);
        // p = 2 reduces to -4 det, which is affine along rank-one lines.
        let two = Exponent::new(2.0).unwrap();
        let mut s = PhaseSampler::new(9);
        for _ in 0..1000 {
            let a = s.matrix();
            let b = s.rank_one().unwrap();
            let m = midpoint_convexity_margin(ConvexityProbe::PsiP(two), &a, &b, -0.7, 1.3);
            assert!(m.margin.abs() <= 1e-12 * m.scale.max(1.0));
        }
    }

    #[test]
    fn burkholder_examples() {
        let e = Exponent::new(3.0).unwrap();
        assert_eq!(burkholder_margin(&PhasePoint::from_moduli(0.0, 0.0), &e).margin, 0.0);
        let two = Exponent::new(2.0).unwrap();
        let m = burkholder_margin(&PhasePoint::new(c(0.4, 1.1), c(0.0, 0.0)), &two);
        assert!(m.margin.abs() < 1e-12 * m.scale);
        for p in [1.2, 1.5, 3.0, 6.0] {
            let e = Exponent::new(p).unwrap();
            let m = burkholder_margin(&PhasePoint::from_moduli(1.7, 0.0), &e);
            let ps = e.sharp_constant();
            let expect = ps.powf(p) * 1.7f64.powf(p)
                - p * (1.0 - 1.0 / e.star()).powf(p - 1.0) * ps * 1.7f64.powf(p);
            assert!((m.margin - expect).abs() < 1e-12 * m.scale);
            assert!(m.margin >= 0.0);
        }
    }

    #[test]
    fn scaling_branch_errors() {
        let e = Exponent::new(1.5).unwrap();
        let zero = PhasePoint::from_moduli(0.0, 0.0);
        assert_eq!(
            scaling_integral_ratio(&zero, &e, ScalingBranch::Lower).unwrap_err(),
            Error::NonIntegrable
        );
        let one = PhasePoint::from_moduli(1.0, 0.0);
        assert!(matches!(
            scaling_integral_ratio(&one, &e, ScalingBranch::Upper),
            Err(Error::BranchMismatch { .. })
        ));
        assert!(ScalingBranch::for_exponent(&Exponent::new(2.0).unwrap()).is_err());
    }

    #[test]
    fn scaling_integral_at_unit_point() {
        // Piecewise antiderivatives at (1, 0): 2/(p-1) - 1/p + 1/(2-p) = 16/3.
        let e = Exponent::new(1.5).unwrap();
        let r = scaling_integral_ratio(&PhasePoint::from_moduli(1.0, 0.0), &e, ScalingBranch::Lower)
            .unwrap();
        assert!((r.integral - 16.0 / 3.0).abs() < 1e-9, "{}", r.integral);
        assert!((r.ratio - 8.0 / 3.0).abs() < 1e-9);
        // Upper branch at (1, 0), p = 3: -1/(p-2) + 2/(p-1) - 1/p = -1/3.
        let e = Exponent::new(3.0).unwrap();
        let r = scaling_integral_ratio(&PhasePoint::from_moduli(1.0, 0.0), &e, ScalingBranch::Upper)
            .unwrap();
        assert!((r.integral + 1.0 / 3.0).abs() < 1e-9, "{}", r.integral);
        assert!((r.ratio - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn scaling_ratio_is_point_independent() {
        let e = Exponent::new(1.5).unwrap();
        let a = scaling_integral_ratio(&PhasePoint::from_moduli(1.0, 0.0), &e, ScalingBranch::Lower)
            .unwrap();
        let b = scaling_integral_ratio(&PhasePoint::from_moduli(0.3, 0.4), &e, ScalingBranch::Lower)
            .unwrap();
        assert!((a.ratio - b.ratio).abs() < 1e-6 * a.ratio.abs());
    }
}
