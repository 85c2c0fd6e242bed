use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::diff::dz_dzbar;
use super::{ConnectionField, EndoField, MetricField, SectionField, TorusError};
use crate::linalg::{self, CMat};
use crate::Real;

/// Projection `π` onto a subbundle and `β = (1−π) ∂_H π`, stored as its `dz` coefficient.
#[derive(Clone, Debug)]
pub struct SecondFundamentalForm<T: Real> {
    pub pi: EndoField<T>,
    pub beta: EndoField<T>,
    /// `|β|²_H = 2 Im τ · tr(β^{*H} β)` at each node.
    pub norm_sq: Vec<T>,
    /// Smallest singular value of the inclusion over the grid, measured in `H`.
    pub min_sigma: T,
}

/// Second fundamental form of the span of `incl` inside `(E, H)` with Chern connection
/// built from the unitary connection `conn`. Errors if the inclusion's smallest singular
/// value drops below `floor` at some node.
pub fn second_fundamental_form<T: Real>(
    conn: &ConnectionField<T>,
    incl: &[SectionField<T>],
    h: &MetricField<T>,
    floor: T,
) -> Result<SecondFundamentalForm<T>, TorusError> {
    let g = h.grid().clone();
    h.field().check_shape(conn.grid(), conn.ax.rank())?;
    if incl.is_empty() {
        return Err(TorusError::Shape("empty inclusion".into()));
    }
    let r = h.rank();
    for s in incl {
        if s.data.len() != g.len() || s.data.iter().any(|v| v.len() != r) {
            return Err(TorusError::Shape("inclusion columns do not match the bundle".into()));
        }
    }
    let k = incl.len();
    let nodes: Vec<(CMat<T>, T)> = (0..g.len())
        .into_par_iter()
        .map(|n| {
            let iota = CMat::from_fn(r, k, |a, b| incl[b].data[n][a]);
            let hm = &h.data()[n];
            let gram = linalg::hermitian_part(&(iota.adjoint() * hm * &iota));
            let sigma = linalg::min_eigenvalue(&gram).max(T::zero()).sqrt();
            let pi = match linalg::inverse(&gram) {
                Some(gi) => &iota * gi * iota.adjoint() * hm,
                None => CMat::zeros(r, r),
            };
            (pi, sigma)
        })
        .collect();
    let (worst, min_sigma) = nodes
        .iter()
        .enumerate()
        .fold((0, nodes[0].1), |(w, m), (n, (_, s))| if *s < m { (n, *s) } else { (w, m) });
    if !(min_sigma >= floor) {
        let (i, j) = g.ij(worst);
        return Err(TorusError::SingularInclusion {
            i,
            j,
            sigma: min_sigma.to_f64(),
            floor: floor.to_f64(),
        });
    }
    let pi = h.field().with_data(nodes.into_iter().map(|(p, _)| p).collect());

    let zero = Complex::new(T::zero(), T::zero());
    let az = conn.a_z();
    let (dzh, _) = dz_dzbar(h.field(), zero);
    let (dzpi, _) = dz_dzbar(&pi, zero);
    let id = linalg::identity::<T>(r);
    let two_im = T::of(2.0) * g.im_tau();
    let (beta, norm_sq): (Vec<CMat<T>>, Vec<T>) = (0..g.len())
        .into_par_iter()
        .map(|n| {
            let hm = &h.data()[n];
            let hinv = linalg::inverse(hm).expect("positive definite");
            let theta = &hinv * (&dzh[n] + linalg::commutator(&az.data[n], hm));
            let conn_z = &az.data[n] + theta;
            let p = &pi.data[n];
            let d_pi = &dzpi[n] + linalg::commutator(&conn_z, p);
            let b = (&id - p) * d_pi;
            let adj = &hinv * b.adjoint() * hm;
            let nsq = (adj * &b).trace().re * two_im;
            (b, nsq)
        })
        .unzip();
    Ok(SecondFundamentalForm {
        beta: pi.with_data(beta),
        pi,
        norm_sq,
        min_sigma,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChernWeil<T> {
    pub lhs: T,
    pub rhs: T,
    pub rel_err: T,
}

/// Compares `∫|β|²_H` with `2π(μ_E − μ_S)·rk S`. When the right side vanishes the
/// error is absolute.
pub fn chern_weil_check<T: Real>(form: &SecondFundamentalForm<T>, mu_e: T, mu_s: T, rk_s: usize) -> ChernWeil<T> {
    let lhs = form.pi.grid.integrate(&form.norm_sq);
    let rhs = T::two_pi() * (mu_e - mu_s) * T::of(rk_s as f64);
    let diff = (lhs - rhs).abs();
    let rel_err = if rhs == T::zero() { diff } else { diff / rhs.abs() };
    ChernWeil { lhs, rhs, rel_err }
}

/// `sup|β|² / mean|β|²`, an empirical lower bound for the convergence threshold.
pub fn threshold_probe<T: Real>(norm_sq: &[T]) -> Result<T, TorusError> {
    let n = T::of(norm_sq.len() as f64);
    let sup = norm_sq.iter().fold(T::zero(), |a, &b| a.max(b));
    let mean = norm_sq.iter().fold(T::zero(), |a, &b| a + b) / n;
    if !(sup > T::zero()) {
        return Err(TorusError::ZeroForm);
    }
    Ok(sup / mean)
}
