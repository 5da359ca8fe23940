use bimetric3::canonical::{canonicalize, sigma3};
use bimetric3::classifier::{classify, classify_with_report, ClassId};
use bimetric3::invariants::{
    associated_operator, char_poly, discriminant_d2, discriminant_d3, invariant_report, CharPoly,
    MetricPair,
};
use bimetric3::matrix::{Matrix3, SymMatrix3};
use bimetric3::numeric::{classify_float, critical_points, cubic_roots, FloatToleranceConfig};
use bimetric3::scalar::{q, qi, Q};
use bimetric3::testkit::{rng_from_seed, sample_with, sample_with_transform};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn small() -> impl Strategy<Value = i64> {
    -5i64..=5
}

fn rational() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=4).prop_map(|(p, d)| q(p, d))
}

fn int_matrix() -> impl Strategy<Value = Matrix3<Q>> {
    prop::array::uniform9(small()).prop_map(|e| Matrix3::from_fn(|i, j| qi(e[3 * i + j])))
}

fn invertible() -> impl Strategy<Value = Matrix3<Q>> {
    int_matrix().prop_filter("singular", |m| !m.det().is_zero())
}

fn symmetric() -> impl Strategy<Value = SymMatrix3<Q>> {
    prop::array::uniform6(-9i64..=9).prop_map(|u| SymMatrix3::from_upper(u.map(qi)))
}

fn class() -> impl Strategy<Value = ClassId> {
    prop::sample::select(ClassId::ALL.to_vec())
}

fn class_sample(class: ClassId, seed: u64) -> MetricPair<Q> {
    sample_with(&mut rng_from_seed(seed), class, None, 5)
        .unwrap()
        .pair
}

/// Valid pairs: a random symmetric ǧ against a scrambled Minkowski g.
fn valid_pair() -> impl Strategy<Value = MetricPair<Q>> {
    (invertible(), symmetric()).prop_map(|(t, gc)| {
        let g = SymMatrix3::diag([qi(1), qi(-1), qi(-1)]).congruence(&t);
        MetricPair::new(g, gc).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sylvester_law(t in invertible(), m in symmetric()) {
        prop_assert_eq!(m.congruence(&t).signature(), m.signature());
    }

    #[test]
    fn det_of_congruence(t in invertible(), m in symmetric()) {
        let dt = t.det();
        prop_assert_eq!(m.congruence(&t).det(), dt.clone() * dt * m.det());
    }

    #[test]
    fn rank_nullity(m in int_matrix()) {
        prop_assert_eq!(m.rank() + m.kernel_basis().len(), 3);
        for v in m.kernel_basis() {
            prop_assert!(m.mul_vec(&v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn inverse_round_trip(m in invertible()) {
        prop_assert_eq!(m.matmul(&m.inverse().unwrap()), Matrix3::identity());
    }

    #[test]
    fn char_poly_congruence_invariant(p in valid_pair(), t in invertible()) {
        let moved = p.congruent(&t, 0.0).unwrap();
        prop_assert_eq!(
            char_poly(&associated_operator(&moved)),
            char_poly(&associated_operator(&p))
        );
    }

    #[test]
    fn d2_nonnegative_on_d3_zero(c in class(), seed in any::<u64>()) {
        let p = class_sample(c, seed);
        let coeffs = char_poly(&associated_operator(&p));
        if discriminant_d3(&coeffs).is_zero() {
            prop_assert!(!discriminant_d2(&coeffs).is_negative());
        }
    }

    #[test]
    fn class_and_sigmas_congruence_invariant(c in class(), seed in any::<u64>(), t in invertible()) {
        let p = class_sample(c, seed);
        let a = invariant_report(&p).unwrap();
        let b = invariant_report(&p.congruent(&t, 0.0).unwrap()).unwrap();
        prop_assert_eq!(&a.coeffs, &b.coeffs);
        prop_assert_eq!(
            (a.sigma0, a.sigma1, a.sigma2, a.sigma3),
            (b.sigma0, b.sigma1, b.sigma2, b.sigma3)
        );
        prop_assert_eq!(classify(&p).unwrap(), c);
    }

    #[test]
    fn shift_covariance(c in class(), seed in any::<u64>(), t in rational()) {
        let p = class_sample(c, seed);
        let (ca, a) = classify_with_report(&p).unwrap();
        let (cb, b) = classify_with_report(&p.shifted(&t)).unwrap();
        prop_assert_eq!(ca, cb);
        prop_assert_eq!(&a.d2, &b.d2);
        prop_assert_eq!(&a.d3, &b.d3);
        prop_assert_eq!(
            (a.sigma0, a.sigma1, a.sigma2, a.sigma3),
            (b.sigma0, b.sigma1, b.sigma2, b.sigma3)
        );
        // P_b(λ) = P_a(λ − t)
        for x in [qi(-2), qi(0), q(1, 3), qi(5)] {
            prop_assert_eq!(b.coeffs.eval(&x), a.coeffs.eval(&(x.clone() - t.clone())));
        }
    }

    #[test]
    fn positive_scaling(c in class(), seed in any::<u64>(), num in 1i64..=9, den in 1i64..=4) {
        let s = q(num, den);
        let p = class_sample(c, seed);
        let (ca, a) = classify_with_report(&p).unwrap();
        let (cb, b) = classify_with_report(&p.scaled(&s)).unwrap();
        prop_assert_eq!(ca, cb);
        let s2 = s.clone() * s.clone();
        let s6 = s2.clone() * s2.clone() * s2.clone();
        prop_assert_eq!(b.d2, a.d2 * s2);
        prop_assert_eq!(b.d3, a.d3 * s6);
        prop_assert_eq!(
            (a.sigma0, a.sigma1, a.sigma2, a.sigma3),
            (b.sigma0, b.sigma1, b.sigma2, b.sigma3)
        );
    }

    #[test]
    fn sigma3_survives_family_transforms(
        seed in any::<u64>(),
        alpha in rational().prop_filter("nonzero", |v| !v.is_zero()),
        delta in rational().prop_filter("nonzero", |v| !v.is_zero()),
        beta in rational(),
        gamma in rational(),
    ) {
        let class = if seed % 2 == 0 { ClassId::T8 } else { ClassId::T9 };
        let s = sample_with(&mut rng_from_seed(seed), class, None, 5).unwrap();
        let root = match invariant_report(&s.pair).unwrap().branch {
            bimetric3::invariants::Branch::Triple { root } => root,
            _ => unreachable!(),
        };
        let before = sigma3(&s.pair, &root).unwrap();
        // Upper-triangular changes of the chain basis preserve the rank-1 structure.
        let m = Matrix3::from_rows([
            [alpha, beta, gamma],
            [qi(0), delta, qi(0)],
            [qi(0), qi(0), qi(1)],
        ]);
        let form = s.truth.clone();
        let moved = sample_with_transform(&form, m.matmul(&s.congruence)).unwrap();
        prop_assert_eq!(sigma3(&moved.pair, &root).unwrap(), before);
    }

    #[test]
    fn exact_float_agreement(p in valid_pair()) {
        let exact = classify(&p).unwrap();
        match classify_float(&p.to_f64(), &FloatToleranceConfig::default()) {
            Ok(fc) if !fc.is_flagged() => prop_assert_eq!(fc.class, exact),
            _ => {}
        }
    }

    #[test]
    fn canonical_params_are_invariants(c in class(), seed in any::<u64>(), t in invertible()) {
        let s = sample_with(&mut rng_from_seed(seed), c, None, 5).unwrap();
        let other = sample_with_transform(&s.truth, t).unwrap();
        let a = canonicalize(&s.pair, 1e-9).unwrap();
        let b = canonicalize(&other.pair, 1e-9).unwrap();
        prop_assert_eq!(a.form.class, b.form.class);
        for (x, y) in a.form.params.iter().zip(&b.form.params) {
            match (x.as_exact(), y.as_exact()) {
                (Some(x), Some(y)) => prop_assert_eq!(x, y),
                _ => prop_assert!((x.to_f64() - y.to_f64()).abs() <= 1e-9 * (1.0 + x.to_f64().abs())),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn root_coefficient_consistency(a0 in -50.0f64..50.0, a1 in -50.0f64..50.0, a2 in -50.0f64..50.0) {
        let c = CharPoly::new(a0, a1, a2);
        let cfg = FloatToleranceConfig::default();
        let s = FloatToleranceConfig::scale(&c);
        let roots = cubic_roots(&c, &cfg).expanded();
        prop_assert_eq!(roots.len(), 3);
        // Elementary symmetric functions over complex roots (re, im).
        let mul = |x: (f64, f64), y: (f64, f64)| (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
        let (r0, r1, r2) = (roots[0], roots[1], roots[2]);
        let e1 = r0.0 + r1.0 + r2.0;
        let p01 = mul(r0, r1);
        let e2 = p01.0 + mul(r0, r2).0 + mul(r1, r2).0;
        let e3 = mul(p01, r2).0;
        let slack = 1e-8;
        prop_assert!((e1 - a0).abs() <= slack * s);
        prop_assert!((e2 - a1).abs() <= slack * s * s);
        prop_assert!((e3 - a2).abs() <= slack * s * s * s);
    }

    #[test]
    fn critical_point_condition(a0 in -20.0f64..20.0, a1 in -20.0f64..20.0, a2 in -20.0f64..20.0) {
        let c = CharPoly::new(a0, a1, a2);
        let cfg = FloatToleranceConfig::default();
        let s = FloatToleranceConfig::scale(&c);
        let d2 = discriminant_d2(&c);
        let d3 = discriminant_d3(&c);
        if d2 > cfg.d2_threshold(s) * 10.0 && d3.abs() > cfg.d3_threshold(s) * 10.0 {
            let (lo, hi) = critical_points(&c).unwrap();
            let separated = c.eval(&lo) < 0.0 && c.eval(&hi) > 0.0;
            prop_assert_eq!(separated, d3 > 0.0);
        }
    }
}

#[test]
fn d3_sign_matches_exact_root_pattern() {
    let mut rng = rng_from_seed(11);
    use rand::Rng;
    for _ in 0..2000 {
        let r: [Q; 3] = std::array::from_fn(|_| qi(rng.random_range(-6..=6)));
        let c = CharPoly::from_roots(r.clone());
        let d3 = discriminant_d3(&c);
        let distinct = r[0] != r[1] && r[1] != r[2] && r[0] != r[2];
        assert_eq!(d3.is_positive(), distinct);
        assert_eq!(d3.is_zero(), !distinct);
    }
    let one = Q::one();
    let complex = CharPoly::new(one.clone(), one.clone(), one);
    assert!(discriminant_d3(&complex).is_negative());
}
