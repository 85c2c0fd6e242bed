//! The closed-form functional against its defining path integral
//! `M(K, K e^s) = ∫₀¹ ∫_X tr((√−1ΛF_{K e^{ts}} − 2πμ) s) dt`.

use hebundle::torus::{
    build_model_bundle, donaldson_functional, exp_relative, mean_curvature, random_hermitian_field,
    random_metric, DiffScheme, EndoField, MetricField, TorusGrid,
};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Gauss–Legendre nodes and weights on [0, 1] (Golub–Welsch).
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jac);
    (0..n)
        .map(|i| {
            let w = 2.0 * eig.eigenvectors[(0, i)].powi(2);
            ((eig.eigenvalues[i] + 1.0) / 2.0, w / 2.0)
        })
        .collect()
}

fn path_integral(
    conn: &hebundle::torus::ConnectionField<f64>,
    k: &MetricField<f64>,
    s: &EndoField<f64>,
) -> f64 {
    let mu = k.twist().mu();
    let r = k.rank();
    gauss_legendre(16)
        .into_iter()
        .map(|(t, w)| {
            let ht = exp_relative(k, &s.scale(Complex::new(t, 0.0))).unwrap();
            let kt = mean_curvature(conn, &ht).unwrap();
            let dens: Vec<f64> = kt
                .data
                .iter()
                .zip(&s.data)
                .map(|(m, s)| {
                    let p = m - DMatrix::identity(r, r) * Complex::new(2.0 * std::f64::consts::PI * mu, 0.0);
                    (p * s).trace().re
                })
                .collect();
            w * k.grid().integrate(&dens)
        })
        .sum()
}

#[test]
fn closed_form_matches_path_integral() {
    let g = TorusGrid::new(32, Complex::new(0.2, 0.9)).unwrap().with_scheme(DiffScheme::Spectral);
    for (r, d, seed) in [(1usize, 0i64, 1u64), (2, 1, 2), (3, -1, 3)] {
        let m = build_model_bundle(r, d, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_metric(&m.metric, &mut rng, 2, 0.6);
        // s self-adjoint for K: K⁻¹ X with X Hermitian
        let x = random_hermitian_field(&g, &m.twist, &mut rng, 2, 1.5);
        let s = x.zip_map(k.field(), |x, k| k.clone().try_inverse().unwrap() * x);
        let closed = donaldson_functional(&m.connection, &k, &s).unwrap();
        let path = path_integral(&m.connection, &k, &s);
        assert!(
            (closed - path).abs() < 1e-9 * closed.abs().max(1.0),
            "r={r} d={d}: closed {closed} path {path}"
        );
    }
}
