//! Property tests for the exact modules and the pointwise linear algebra.

use hebundle::contfrac::{cf_expand, convergents, CfInput, QuadSurd};
use hebundle::coulomb::{curvature, gauge_act, grid_norms, random_gauge_field, random_unitary_field, Fiber, Space};
use hebundle::farey::{is_farey_triangle, replay, stern_brocot_path, PrimitiveVector};
use hebundle::linalg::{self, CMat};
use hebundle::stability::{euler_pairing, lattice_interior_count, KClass};
use hebundle::torus::{build_model_bundle, random_metric, u_p, TorusGrid};
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hermitian(r: usize, v: &[f64]) -> CMat<f64> {
    let m = CMat::from_fn(r, r, |i, j| Complex::new(v[(i * r + j) % v.len()], v[(j * r + i + 7) % v.len()]));
    linalg::hermitian_part(&m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_expansion_terminates_at_the_input(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = BigRational::new(p.into(), q.into());
        let cf = cf_expand(&CfInput::Rational(r.clone()), 1000).unwrap();
        let n = cf.available_depth().unwrap();
        let conv = convergents(&cf, n).unwrap();
        prop_assert_eq!(conv[n].ratio(), r);
        for k in 1..=n {
            let det = &conv[k].p * &conv[k - 1].q - &conv[k - 1].p * &conv[k].q;
            let want = BigInt::from(if k % 2 == 1 { 1 } else { -1 });
            prop_assert_eq!(det, want);
        }
    }

    #[test]
    fn surd_arithmetic_is_exact(a in -50i64..50, b in 1i64..20, d in 2i64..40, c in 1i64..30, k in -20i64..20) {
        prop_assume!(((d as f64).sqrt() as i64).pow(2) != d && ((d as f64).sqrt() as i64 + 1).pow(2) != d);
        let x = QuadSurd::new(a.into(), b.into(), d.into(), c.into()).unwrap();
        let y = QuadSurd::new(k.into(), 1.into(), d.into(), 1.into()).unwrap();
        prop_assert_eq!(x.try_add(&y).unwrap().try_sub(&y).unwrap(), x.clone());
        let f = x.to_f64();
        let fl = x.floor();
        prop_assert!(BigInt::from(f.floor() as i64) == fl || (f - f.round()).abs() < 1e-9);
        if !x.is_zero() {
            let one = x.try_mul(&x.recip().unwrap()).unwrap();
            prop_assert_eq!(one, QuadSurd::from_int(1));
        }
    }

    #[test]
    fn stern_brocot_descends_through_farey_triangles(p in 1i64..500, q in 1i64..500) {
        let v = PrimitiveVector::reduced(p, q).unwrap();
        let path = stern_brocot_path(v).unwrap();
        prop_assert_eq!(replay(&path.moves), v);
        for t in &path.triangles {
            prop_assert!(is_farey_triangle(t).farey);
        }
    }

    #[test]
    fn pick_matches_enumeration(a in -12i64..12, b in -12i64..12, c in -12i64..12, d in -12i64..12) {
        prop_assume!(a * d - b * c != 0);
        let n = lattice_interior_count((a, b), (c, d)).unwrap();
        prop_assert_eq!(n.enumerated, n.pick);
    }

    #[test]
    fn euler_pairing_symmetrizes(d1 in -9i64..9, r1 in 1i64..9, d2 in -9i64..9, r2 in 1i64..9, g in 0i64..4) {
        let (e, f) = (KClass::new(d1, r1).unwrap(), KClass::new(d2, r2).unwrap());
        let sum = euler_pairing(f, e, g).unwrap() + euler_pairing(e, f, g).unwrap();
        prop_assert_eq!(sum, 2 * r1 * r2 * (1 - g));
    }

    #[test]
    fn hermitian_exp_log_roundtrip(v in prop::collection::vec(-1.0f64..1.0, 9), r in 1usize..4) {
        let x = hermitian(r, &v);
        let back = linalg::log_hermitian(&linalg::exp_hermitian(&x));
        prop_assert!((back - &x).norm() < 1e-10 * (1.0 + x.norm()));
        let (vals, vecs) = linalg::hermitian_eigen(&x);
        let diag = CMat::from_fn(r, r, |i, j| if i == j { Complex::new(vals[i], 0.0) } else { Complex::new(0.0, 0.0) });
        prop_assert!((&vecs * diag * vecs.adjoint() - &x).norm() < 1e-10);
    }

    #[test]
    fn unitary_exp_log_roundtrip(v in prop::collection::vec(-1.0f64..1.0, 9), r in 1usize..4) {
        let x = hermitian(r, &v) * Complex::new(0.0, 1.0);
        let u = linalg::exp_skew(&x);
        prop_assert!((u.adjoint() * &u - CMat::identity(r, r)).norm() < 1e-12);
        prop_assert!((linalg::log_unitary(&u) - &x).norm() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn u_p_is_non_increasing(seed in 0u64..1000) {
        let g = TorusGrid::new(16, Complex::new(0.2, 1.1)).unwrap();
        let m = build_model_bundle(2, 1, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_metric(&m.metric, &mut rng, 1, 0.8);
        let ps = [1.0, 2.0, 4.0, 16.0];
        let us: Vec<Vec<f64>> = ps.iter().map(|&p| u_p(&h, &m.metric, p).unwrap()).collect();
        for w in us.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                prop_assert!(b <= &(a + 1e-12));
            }
        }
    }

    #[test]
    fn curvature_norm_is_gauge_invariant(seed in 0u64..1000, rank in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_gauge_field::<f64>(8, rank, &mut rng, 2, 1.0).unwrap();
        let u = random_unitary_field::<f64>(8, rank, &mut rng, 2, 1.0).unwrap();
        let b = gauge_act(&u, &a).unwrap();
        let na = grid_norms(&curvature(&a), Fiber::Frobenius, Space::Lp(2.0)).unwrap().value;
        let nb = grid_norms(&curvature(&b), Fiber::Frobenius, Space::Lp(2.0)).unwrap().value;
        prop_assert!((na - nb).abs() < 1e-9 * (1.0 + na));
    }
}
