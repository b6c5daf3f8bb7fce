use proptest::prelude::*;

use spectral_means::barycenter::{objective, BarycenterProblem, WeightVector};
use spectral_means::divergence::phi;
use spectral_means::means::{f_mean, relative_difference};
use spectral_means::order::log_majorizes;
use spectral_means::{
    loewner_compare, random_spd, spectral_exp, spectral_log, spectral_power, Complex64, OrderRelation,
    SpdMatrix, DEFAULT_ORDER_TOL,
};

fn spd() -> impl Strategy<Value = SpdMatrix> {
    (1usize..=5, 1.0f64..1e3, any::<u64>()).prop_map(|(n, c, s)| random_spd(n, c, s).unwrap())
}

fn spd_pair() -> impl Strategy<Value = (SpdMatrix, SpdMatrix)> {
    (1usize..=5, 1.0f64..1e3, any::<u64>())
        .prop_map(|(n, c, s)| (random_spd(n, c, s).unwrap(), random_spd(n, c, s ^ 0x9e37_79b9).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_composes(a in spd(), p in -2.0f64..2.0, q in -2.0f64..2.0) {
        let lhs = spectral_power(&spectral_power(&a, p).unwrap(), q).unwrap();
        let rhs = spectral_power(&a, p * q).unwrap();
        prop_assert!(relative_difference(lhs.as_matrix(), rhs.as_matrix()) <= 1e-11);
    }

    #[test]
    fn first_power_is_identity_map(a in spd()) {
        let b = spectral_power(&a, 1.0).unwrap();
        prop_assert!(relative_difference(b.as_matrix(), a.as_matrix()) <= 1e-13);
    }

    #[test]
    fn exp_inverts_log(a in spd()) {
        let b = spectral_exp(&spectral_log(&a)).unwrap();
        prop_assert!(relative_difference(b.as_matrix(), a.as_matrix()) <= 1e-12);
    }

    #[test]
    fn loewner_is_transitive(a in spd(), s1 in 0.0f64..2.0, s2 in 0.0f64..2.0) {
        // B = A + s1 I and C = B + s2 I are ordered by construction.
        let n = a.dim();
        let b = SpdMatrix::from_matrix(a.as_matrix() + SpdMatrix::identity(n).as_matrix() * Complex64::from(s1)).unwrap();
        let c = SpdMatrix::from_matrix(b.as_matrix() + SpdMatrix::identity(n).as_matrix() * Complex64::from(s2)).unwrap();
        let ab = loewner_compare(&a, &b, DEFAULT_ORDER_TOL).unwrap();
        let bc = loewner_compare(&b, &c, DEFAULT_ORDER_TOL).unwrap();
        prop_assert!(ab.is_leq() && bc.is_leq());
        prop_assert!(loewner_compare(&a, &c, 2.0 * DEFAULT_ORDER_TOL).unwrap().is_leq());
        prop_assert_eq!(loewner_compare(&a, &a, 0.0).unwrap(), OrderRelation::Equal);
    }

    #[test]
    fn log_majorization_is_reflexive(a in spd()) {
        prop_assert!(log_majorizes(&a, &a, false, 1e-10).unwrap().holds);
    }

    #[test]
    fn divergence_is_nonnegative((a, b) in spd_pair(), t in 0.0f64..=1.0) {
        let v = phi(&a, &b, t).unwrap().value;
        prop_assert!(v >= 0.0);
        let scale = a.trace() + b.trace();
        prop_assert!(phi(&a, &a, t).unwrap().value <= 1e-10 * scale);
    }

    #[test]
    fn f_mean_endpoints((a, b) in spd_pair()) {
        let f0 = f_mean(&a, &b, 0.0).unwrap();
        let f1 = f_mean(&a, &b, 1.0).unwrap();
        prop_assert!(relative_difference(f0.as_matrix(), a.as_matrix()) <= 1e-10);
        prop_assert!(relative_difference(f1.as_matrix(), b.as_matrix()) <= 1e-10);
    }

    #[test]
    fn f_mean_determinant((a, b) in spd_pair(), t in 0.0f64..=1.0) {
        let f = f_mean(&a, &b, t).unwrap();
        let want = (1.0 - t) * a.log_det() + t * b.log_det();
        prop_assert!((f.log_det() - want).abs() <= 1e-9 * (1.0 + want.abs()));
    }

    #[test]
    fn objective_is_nonnegative((a, b) in spd_pair(), x in 1.0f64..10.0, t in 0.05f64..0.95) {
        let n = a.dim();
        let p = BarycenterProblem::new(vec![a, b], WeightVector::uniform(2).unwrap(), t).unwrap();
        let xm = random_spd(n, x, 5).unwrap();
        prop_assert!(objective(&p, &xm).unwrap() >= 0.0);
    }
}
