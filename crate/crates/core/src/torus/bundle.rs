use num_complex::Complex;
use rayon::prelude::*;

use super::diff::{dz_dzbar, gradient};
use super::{ConnectionField, EndoField, MetricField, TorusError, TorusGrid, Twist};
use crate::linalg::{self, CMat};
use crate::Real;

/// Projectively flat model: clock–shift gluing, `A = −2πiμ x dy·Id`, flat reference metric.
#[derive(Clone, Debug)]
pub struct ModelBundle<T: Real> {
    pub twist: Twist<T>,
    pub connection: ConnectionField<T>,
    pub metric: MetricField<T>,
}

impl<T: Real> ModelBundle<T> {
    pub fn grid(&self) -> &TorusGrid<T> {
        self.connection.grid()
    }
    pub fn mu(&self) -> T {
        self.twist.mu()
    }
    pub fn rank(&self) -> usize {
        self.twist.rank()
    }
}

pub fn build_model_bundle<T: Real>(
    r: usize,
    d: i64,
    grid: &TorusGrid<T>,
) -> Result<ModelBundle<T>, TorusError> {
    let twist = Twist::new(r, d)?;
    let mu = twist.mu();
    let ax = EndoField::zeros(grid, &twist);
    let ay = EndoField::from_fn(grid, &twist, |x, _| {
        linalg::scalar(r, Complex::new(T::zero(), -T::two_pi() * mu * x))
    });
    Ok(ModelBundle {
        metric: MetricField::identity(grid, &twist),
        connection: ConnectionField { ax, ay },
        twist,
    })
}

/// `√−1 Λ F` of the Chern connection of `H`, relative to the unitary connection `A`.
///
/// With `h = H` in the unitary frame, `F_H = F_A + ∂̄_A(h⁻¹ ∂_A h)` and
/// `√−1Λ(X dz∧dz̄) = 2 Im τ · X`.
pub fn mean_curvature<T: Real>(
    conn: &ConnectionField<T>,
    h: &MetricField<T>,
) -> Result<EndoField<T>, TorusError> {
    h.field().check_shape(conn.grid(), conn.ax.rank())?;
    let zero = Complex::new(T::zero(), T::zero());
    let (_, dax_y) = gradient(&conn.ax, zero);
    let (day_x, _) = gradient(&conn.ay, conn.seam_jump());
    let i = Complex::new(T::zero(), T::one());
    let flat: Vec<CMat<T>> = (0..dax_y.len())
        .into_par_iter()
        .map(|k| {
            let (ax, ay) = (&conn.ax.data[k], &conn.ay.data[k]);
            (&day_x[k] - &dax_y[k] + linalg::commutator(ax, ay)) * i
        })
        .collect();
    let az = conn.a_z();
    let azb = conn.a_zbar();
    let (dzh, _) = dz_dzbar(h.field(), zero);
    let theta: Vec<CMat<T>> = (0..dzh.len())
        .into_par_iter()
        .map(|k| {
            let hk = &h.data()[k];
            let inv = linalg::inverse(hk).expect("positive definite");
            inv * (&dzh[k] + linalg::commutator(&az.data[k], hk))
        })
        .collect();
    let theta = h.field().with_data(theta);
    let (_, dzb_theta) = dz_dzbar(&theta, zero);
    let c = Complex::new(T::of(2.0) * conn.grid().im_tau(), T::zero());
    let data = (0..flat.len())
        .into_par_iter()
        .map(|k| {
            &flat[k] - (&dzb_theta[k] + linalg::commutator(&azb.data[k], &theta.data[k])) * c
        })
        .collect();
    Ok(h.field().with_data(data))
}

/// `sup_x |√−1ΛF_H − 2πμ·Id|` in the fiberwise operator norm of `H`.
pub fn he_residual<T: Real>(
    conn: &ConnectionField<T>,
    h: &MetricField<T>,
    mu: T,
) -> Result<T, TorusError> {
    let k = mean_curvature(conn, h)?;
    Ok(residual_of(&k, h, mu))
}

pub(crate) fn residual_of<T: Real>(k: &EndoField<T>, h: &MetricField<T>, mu: T) -> T {
    let (r, ri) = h.sqrt_factors();
    let shift = Complex::new(T::two_pi() * mu, T::zero());
    let rank = h.rank();
    k.data
        .par_iter()
        .enumerate()
        .map(|(n, m)| {
            let p = m - linalg::scalar(rank, shift);
            linalg::op_norm_in(&p, &r[n], &ri[n])
        })
        .reduce(|| T::zero(), |a, b| a.max(b))
}
