use beurling_core::burkholder::{
    burkholder_margin, eval_l, eval_lp, eval_m, matrix_to_phase, midpoint_convexity_margin, phase_to_matrix,
    scaling_integral_ratio, ConvexityProbe, PhaseSampler, ScalingBranch,
};
use beurling_core::{Exponent, PhasePoint, RankOneDirection, RealMatrix2};
use num_complex::Complex64;
use proptest::prelude::*;

fn modulus() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

fn angle() -> impl Strategy<Value = f64> {
    0.0..std::f64::consts::TAU
}

fn phase_point() -> impl Strategy<Value = PhasePoint> {
    (modulus(), angle(), modulus(), angle())
        .prop_map(|(a, s, b, t)| PhasePoint::new(Complex64::from_polar(a, s), Complex64::from_polar(b, t)))
}

fn exponent() -> impl Strategy<Value = Exponent> {
    (1.05f64..8.0).prop_map(|p| Exponent::new(p).unwrap())
}

fn matrix() -> impl Strategy<Value = RealMatrix2> {
    prop::array::uniform4(-1.0f64..1.0).prop_map(|[a, b, c, d]| RealMatrix2::new(a, b, c, d))
}

fn rank_one() -> impl Strategy<Value = RankOneDirection> {
    let v = prop::array::uniform2(-1.0f64..1.0).prop_filter("nonzero", |v| v[0].hypot(v[1]) > 1e-3);
    (v.clone(), v).prop_map(|(u, v)| RankOneDirection::outer(u, v).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn evaluators_ignore_phases(ph in phase_point(), e in exponent(), rot in prop::collection::vec((angle(), angle()), 100)) {
        let (l, m, lp) = (eval_l(&ph), eval_m(&ph), eval_lp(&ph, &e));
        let (z, w) = (ph.z.norm(), ph.w.norm());
        let quad = z * z + w * w + 2.0 * z + 1.0;
        let lp_scale = (e.sharp_constant() * z + w) * (z + w).powf(e.p() - 1.0);
        for (a, b) in rot {
            let q = PhasePoint::new(ph.z * Complex64::from_polar(1.0, a), ph.w * Complex64::from_polar(1.0, b));
            prop_assert!((eval_l(&q) - l).abs() <= 1e-14 * quad);
            prop_assert!((eval_m(&q) - m).abs() <= 1e-14 * quad);
            prop_assert!((eval_lp(&q, &e) - lp).abs() <= 1e-14 * lp_scale);
        }
    }

    #[test]
    fn l_is_continuous_across_the_unit_sum(s in 0.0f64..=1.0, a in angle(), b in angle()) {
        let (z, w) = (s, 1.0 - s);
        let inside = z * z - w * w;
        let outside = 2.0 * z - 1.0;
        prop_assert!((inside - outside).abs() <= 1e-12);
        let ph = PhasePoint::new(Complex64::from_polar(z, a), Complex64::from_polar(w, b));
        prop_assert!((eval_l(&ph) - (z - w)).abs() <= 1e-12);
        prop_assert!(eval_m(&ph).abs() <= 1e-12);
    }

    #[test]
    fn dictionary_matches_norms_and_determinant(a in matrix()) {
        let ph = matrix_to_phase(&a);
        let (f, det) = (a.frobenius_squared(), a.det());
        prop_assert!(rel(ph.z.norm_sqr(), f - 2.0 * det) <= 1e-12 || (ph.z.norm_sqr() - (f - 2.0 * det)).abs() <= 1e-15 * f);
        prop_assert!(rel(ph.w.norm_sqr(), f + 2.0 * det) <= 1e-12 || (ph.w.norm_sqr() - (f + 2.0 * det)).abs() <= 1e-15 * f);
        let back = phase_to_matrix(&ph);
        for (x, y) in [(back.a, a.a), (back.b, a.b), (back.c, a.c), (back.d, a.d)] {
            prop_assert!((x - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn probes_are_midpoint_convex_along_rank_one_lines(
        a in matrix(),
        b in rank_one(),
        t1 in -3.0f64..3.0,
        t2 in -3.0f64..3.0,
        p in prop_oneof![1.05f64..2.0, 2.0f64..8.0],
    ) {
        let e = Exponent::new(p).unwrap();
        for probe in [ConvexityProbe::Psi, ConvexityProbe::PsiP(e), ConvexityProbe::MAlongLine] {
            let c = midpoint_convexity_margin(probe, &a, &b, t1, t2);
            prop_assert!(c.margin >= -1e-9 * c.scale, "{probe:?}: {} at scale {}", c.margin, c.scale);
        }
    }

    #[test]
    fn burkholder_margin_is_nonnegative(ph in phase_point(), e in exponent()) {
        let m = burkholder_margin(&ph, &e);
        prop_assert!(m.margin >= -1e-12 * m.scale);
    }

    #[test]
    fn burkholder_margin_vanishes_at_w_zero_for_p_two(z in modulus(), a in angle()) {
        let e = Exponent::new(2.0).unwrap();
        let m = burkholder_margin(&PhasePoint::new(Complex64::from_polar(z, a), Complex64::new(0.0, 0.0)), &e);
        prop_assert!(m.margin.abs() <= 1e-12 * m.scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scaling_ratio_does_not_depend_on_the_point(
        p in prop_oneof![1.1f64..1.9, 2.1f64..4.0],
        seed in any::<u64>(),
    ) {
        let e = Exponent::new(p).unwrap();
        let branch = ScalingBranch::for_exponent(&e).unwrap();
        let reference = scaling_integral_ratio(&PhasePoint::from_moduli(1.0, 0.0), &e, branch).unwrap().ratio;
        let mut sampler = PhaseSampler::new(seed);
        for _ in 0..20 {
            let r = scaling_integral_ratio(&sampler.phase_point(), &e, branch).unwrap().ratio;
            prop_assert!(rel(r, reference) <= 1e-6, "p = {p}: {r} vs {reference}");
        }
    }
}

#[test]
fn sampler_draws_are_reproducible() {
    let mut a = PhaseSampler::new(9);
    let mut b = PhaseSampler::new(9);
    for _ in 0..100 {
        assert_eq!(a.phase_point(), b.phase_point());
        assert_eq!(a.rank_one().unwrap().matrix(), b.rank_one().unwrap().matrix());
    }
}

#[test]
fn rank_one_phase_has_equal_moduli() {
    let mut s = PhaseSampler::new(1);
    for _ in 0..1000 {
        let b = s.rank_one().unwrap();
        let ph = b.phase();
        assert!(b.matrix().det().abs() <= 1e-15);
        assert!((ph.z.norm() - ph.w.norm()).abs() <= 1e-12 * ph.z.norm().max(1e-300));
    }
}
