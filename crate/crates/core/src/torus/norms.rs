use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::poisson::log_det;
use super::{EndoField, MetricField, TorusError};
use crate::linalg;
use crate::Real;

/// Exponent of an `L^q` norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Lq {
    One,
    Two,
    Inf,
}

impl FromStr for Lq {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "1" => Ok(Lq::One),
            "2" => Ok(Lq::Two),
            "inf" | "∞" => Ok(Lq::Inf),
            _ => Err(format!("unsupported norm exponent `{s}` (use 1, 2 or inf)")),
        }
    }
}

/// `L^q` norms of the fiberwise spectral radius and Frobenius norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormPair<T> {
    pub rho: T,
    pub frob: T,
}

/// Nodewise `(|s|_ρ, |s|_2)` measured in `H`.
pub fn pointwise_norms<T: Real>(s: &EndoField<T>, h: &MetricField<T>) -> Result<Vec<NormPair<T>>, TorusError> {
    s.check_shape(h.grid(), h.rank())?;
    let (r, r_inv) = h.sqrt_factors();
    Ok(s.data
        .par_iter()
        .zip(r.par_iter().zip(&r_inv))
        .map(|(x, (r, ri))| NormPair {
            rho: linalg::spectral_radius_in(x, r, ri),
            frob: linalg::frobenius_in(x, r, ri),
        })
        .collect())
}

fn lq<T: Real>(vals: impl Iterator<Item = T>, q: Lq, weight: T) -> T {
    match q {
        Lq::One => vals.fold(T::zero(), |a, v| a + v) * weight,
        Lq::Two => (vals.fold(T::zero(), |a, v| a + v * v) * weight).sqrt(),
        Lq::Inf => vals.fold(T::zero(), |a, v| a.max(v)),
    }
}

/// `‖s‖_{ρ,H,L^q}` and `‖s‖_{2,H,L^q}` (volume is 1).
pub fn field_norms<T: Real>(s: &EndoField<T>, h: &MetricField<T>, q: Lq) -> Result<NormPair<T>, TorusError> {
    let p = pointwise_norms(s, h)?;
    let w = s.grid.weight();
    Ok(NormPair {
        rho: lq(p.iter().map(|n| n.rho), q, w),
        frob: lq(p.iter().map(|n| n.frob), q, w),
    })
}

/// `u_p = (1/p) log tr h^p` for `h = H H₀⁻¹`, nodewise. Non-increasing in `p`, with limit
/// `log λ_max`.
pub fn u_p<T: Real>(h: &MetricField<T>, h0: &MetricField<T>, p: T) -> Result<Vec<T>, TorusError> {
    h.field().check_shape(h0.grid(), h0.rank())?;
    let (_, r0_inv) = h0.sqrt_factors();
    Ok(h.data()
        .par_iter()
        .zip(&r0_inv)
        .map(|(m, ri)| {
            let (lam, _) = linalg::hermitian_eigen(&(ri * m * ri));
            let top = lam[lam.len() - 1];
            let sum = lam.iter().fold(T::zero(), |a, &l| a + (l / top).powf(p));
            top.ln() + sum.ln() / p
        })
        .collect())
}

/// `e^b H` with `b = −(1/r) log det(H H₀⁻¹)(p)`.
pub fn normalize_det_at_point<T: Real>(
    h: &MetricField<T>,
    h0: &MetricField<T>,
    node: (usize, usize),
) -> Result<MetricField<T>, TorusError> {
    h.field().check_shape(h0.grid(), h0.rank())?;
    let g = h.grid();
    if node.0 >= g.n() || node.1 >= g.n() {
        return Err(TorusError::Shape(format!("node {node:?} outside an {0}×{0} grid", g.n())));
    }
    let k = g.idx(node.0, node.1);
    let b = -(log_det(&h.data()[k]) - log_det(&h0.data()[k])) / T::of(h.rank() as f64);
    Ok(h.scaled(b.exp()))
}

/// `det(H H₀⁻¹)` at a node.
pub fn det_ratio_at<T: Real>(h: &MetricField<T>, h0: &MetricField<T>, node: (usize, usize)) -> T {
    let k = h.grid().idx(node.0, node.1);
    (log_det(&h.data()[k]) - log_det(&h0.data()[k])).exp()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;
    use num_complex::Complex;
    use crate::torus::{random_hermitian_field, random_metric, TorusGrid, Twist};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(r: usize, d: i64) -> (TorusGrid<f64>, Twist<f64>) {
        (TorusGrid::new(16, Complex::new(0.0, 1.0)).unwrap(), Twist::new(r, d).unwrap())
    }

    #[test]
    fn identity_norms() {
        let (g, tw) = setup(3, 1);
        let id = EndoField::identity(&g, &tw);
        let h = MetricField::identity(&g, &tw);
        for q in [Lq::One, Lq::Two, Lq::Inf] {
            let n = field_norms(&id, &h, q).unwrap();
            assert!((n.rho - 1.0).abs() < 1e-12 && (n.frob - 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn u_p_closed_form() {
        let (g, tw) = setup(2, 1);
        let e = std::f64::consts::E;
        let diag = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex::new(e, 0.0),
            Complex::new(1.0 / e, 0.0),
        ]));
        let h = MetricField::new(EndoField::constant(&g, &tw, diag)).unwrap();
        let h0 = MetricField::identity(&g, &tw);
        let mut prev = f64::INFINITY;
        for p in [1.0, 2.0, 4.0, 8.0, 32.0] {
            let u = u_p(&h, &h0, p).unwrap()[0];
            let want = (e.powf(p) + e.powf(-p)).ln() / p;
            assert!((u - want).abs() < 1e-12);
            assert!(u <= prev && u >= 1.0);
            prev = u;
        }
        assert!((u_p(&h, &h0, 200.0).unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn det_normalization() {
        let (g, tw) = setup(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h0 = MetricField::identity(&g, &tw);
        let h = random_metric(&h0, &mut rng, 2, 0.7);
        let s = normalize_det_at_point(&h, &h0, (3, 5)).unwrap();
        assert!((det_ratio_at(&s, &h0, (3, 5)) - 1.0).abs() < 1e-12);
        let two = normalize_det_at_point(&h0.scaled(2.0), &h0, (0, 0)).unwrap();
        assert!(two.field().max_distance(h0.field()) < 1e-14);
        let x = random_hermitian_field(&g, &tw, &mut rng, 2, 1.0);
        for n in pointwise_norms(&x, &h).unwrap() {
            assert!(n.rho <= n.frob + 1e-12);
        }
    }
}
