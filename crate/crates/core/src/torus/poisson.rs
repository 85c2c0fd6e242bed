use num_complex::Complex;
use rayon::prelude::*;

use super::{mean_curvature, ConnectionField, MetricField, SectionField, TorusError, TorusGrid, Twist};
use super::diff::TwistedFourier;
use crate::linalg::CMat;
use crate::Real;

/// Symbol of `Δ_ω` on `e^{2πi(kx·x + ky·y)}`: `−(2π²/Im τ)|ky − τ kx|²`.
pub fn laplacian_symbol<T: Real>(grid: &TorusGrid<T>, kx: T, ky: T) -> T {
    let tau = grid.tau();
    let re = ky - tau.re * kx;
    let im = tau.im * kx;
    -(T::of(2.0) * T::pi() * T::pi() / tau.im) * (re * re + im * im)
}

fn scalar_apply<T: Real>(grid: &TorusGrid<T>, f: &[T], sym: impl Fn(T, T) -> Complex<T> + Sync) -> Vec<T> {
    let tw = Twist::new(1, 0).expect("trivial twist");
    let tf = TwistedFourier::new(grid, &tw);
    let data: Vec<CMat<T>> = f
        .iter()
        .map(|&v| CMat::from_element(1, 1, Complex::new(v, T::zero())))
        .collect();
    tf.apply(&data, |kx, ky, _, _| sym(kx, ky))
        .into_iter()
        .map(|m| m[(0, 0)].re)
        .collect()
}

/// `Δ_ω f` by Fourier differentiation.
pub fn spectral_laplacian<T: Real>(grid: &TorusGrid<T>, f: &[T]) -> Vec<T> {
    scalar_apply(grid, f, |kx, ky| Complex::new(laplacian_symbol(grid, kx, ky), T::zero()))
}

/// Mean-zero solution of `Δ_ω φ = rhs`.
///
/// Fails if `|mean(rhs)| > tol·max(1, sup|rhs|)`.
pub fn poisson_solve<T: Real>(grid: &TorusGrid<T>, rhs: &[T], tol: T) -> Result<Vec<T>, TorusError> {
    let mean = grid.integrate(rhs);
    let scale = rhs.iter().fold(T::one(), |a, v| a.max(v.abs()));
    if mean.abs() > tol * scale {
        return Err(TorusError::NotSolvable {
            defect: mean.to_f64(),
            tol: (tol * scale).to_f64(),
        });
    }
    Ok(scalar_apply(grid, rhs, |kx, ky| {
        let s = laplacian_symbol(grid, kx, ky);
        if s == T::zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::one() / s, T::zero())
        }
    }))
}

/// `|ψ|²_H`: the metric induced on the line spanned by a section, in the frame `ψ`.
pub fn restrict_metric<T: Real>(
    sections: &[SectionField<T>],
    h: &MetricField<T>,
) -> Result<MetricField<T>, TorusError> {
    if sections.len() != 1 {
        return Err(TorusError::Shape(format!(
            "restriction is implemented for a single section, got {}",
            sections.len()
        )));
    }
    let grid = h.grid().clone();
    let tw = Twist::new(1, 0)?;
    let data = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let v = &sections[0].data[n];
            let hv = &h.data()[n] * v;
            CMat::from_element(1, 1, v.dotc(&hv))
        })
        .collect();
    MetricField::new(super::EndoField {
        grid,
        twist: tw,
        data,
    })
}

#[derive(Clone, Debug)]
pub struct ConformalNormalization<T: Real> {
    pub phi: Vec<T>,
    /// `e^φ H|_S`.
    pub metric: MetricField<T>,
    /// `H₀` rescaled by the constant that makes the determinant ratio 1.
    pub h0_scaled: MetricField<T>,
    pub rhs: Vec<T>,
    /// Mean of the right-hand side (zero for solvable data).
    pub mean_defect: T,
    /// `sup |det(e^φ H|_S H₀⁻¹) − 1|` after rescaling.
    pub det_deviation: T,
    pub phi_mean: T,
}

/// Solves `Δφ = (1/k) tr √−1ΛF_{H|S} − 2πμ_S` and returns `e^φ H|_S`.
///
/// `conn_s` is the unitary reference connection of `S` in the frame where
/// `h_s` is expressed; `tr √−1ΛF_H = tr √−1ΛF_A − Δ_ω log det h`.
pub fn conformal_normalize<T: Real>(
    conn_s: &ConnectionField<T>,
    h_s: &MetricField<T>,
    h0: &MetricField<T>,
    mu_s: T,
    tol: T,
) -> Result<ConformalNormalization<T>, TorusError> {
    let grid = h_s.grid().clone();
    h0.field().check_shape(&grid, h_s.rank())?;
    let k = h_s.rank();
    let kt = T::of(k as f64);
    let flat = mean_curvature(conn_s, &MetricField::identity(&grid, h_s.twist()))?;
    let logdet: Vec<T> = h_s.data().iter().map(|m| log_det(m)).collect();
    let lap = spectral_laplacian(&grid, &logdet);
    let rhs: Vec<T> = (0..grid.len())
        .map(|n| (flat.data[n].trace().re - lap[n]) / kt - T::two_pi() * mu_s)
        .collect();
    let mean_defect = grid.integrate(&rhs);
    let phi = poisson_solve(&grid, &rhs, tol)?;
    let w: Vec<T> = phi.iter().map(|p| p.exp()).collect();
    let metric = h_s.conformal(&w);
    let log_ratio: Vec<T> = (0..grid.len())
        .map(|n| log_det(&metric.data()[n]) - log_det(&h0.data()[n]))
        .collect();
    let c = grid.integrate(&log_ratio);
    let h0_scaled = h0.scaled((c / kt).exp());
    let det_deviation = log_ratio
        .iter()
        .map(|l| ((*l - c).exp() - T::one()).abs())
        .fold(T::zero(), |a, b| a.max(b));
    let phi_mean = grid.integrate(&phi);
    Ok(ConformalNormalization {
        phi,
        metric,
        h0_scaled,
        rhs,
        mean_defect,
        det_deviation,
        phi_mean,
    })
}

pub(crate) fn log_det<T: Real>(m: &CMat<T>) -> T {
    crate::linalg::hermitian_eigen(m)
        .0
        .iter()
        .fold(T::zero(), |a, v| a + v.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::build_model_bundle;
    use std::f64::consts::PI;

    #[test]
    fn manufactured_cosine() {
        let tau = Complex::new(0.1, 1.3);
        let g = TorusGrid::new(32, tau).unwrap();
        let rhs: Vec<f64> = (0..g.len()).map(|k| (2.0 * PI * g.xy(k).0).cos()).collect();
        let phi = poisson_solve(&g, &rhs, 1e-12).unwrap();
        let factor = 2.0 * PI * PI * tau.norm_sqr() / tau.im;
        for (k, p) in phi.iter().enumerate() {
            let want = -(2.0 * PI * g.xy(k).0).cos() / factor;
            assert!((p - want).abs() < 1e-12);
        }
        let bad: Vec<f64> = rhs.iter().map(|v| v + 0.5).collect();
        assert!(matches!(
            poisson_solve(&g, &bad, 1e-12),
            Err(TorusError::NotSolvable { .. })
        ));
    }

    #[test]
    fn he_metric_needs_no_correction() {
        let g = TorusGrid::new(16, Complex::new(0.0, 1.0)).unwrap();
        let b = build_model_bundle(1, 0, &g).unwrap();
        let out = conformal_normalize(&b.connection, &b.metric, &b.metric, 0.0, 1e-10).unwrap();
        assert!(out.phi.iter().all(|p: &f64| p.abs() < 1e-14));
        assert!(out.det_deviation < 1e-14);
    }

    #[test]
    fn conformal_perturbation_is_undone() {
        let g = TorusGrid::new(32, Complex::new(0.2, 0.8)).unwrap();
        let b = build_model_bundle(1, 0, &g).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|k| {
                let (x, y) = g.xy(k);
                0.3 * (2.0 * PI * x).cos() + 0.2 * (2.0 * PI * (x + y)).sin()
            })
            .collect();
        let w: Vec<f64> = f.iter().map(|v| v.exp()).collect();
        let h = b.metric.conformal(&w);
        let out = conformal_normalize(&b.connection, &h, &b.metric, 0.0, 1e-10).unwrap();
        let mean_f = g.integrate(&f);
        for (p, fv) in out.phi.iter().zip(&f) {
            assert!((p + fv - mean_f).abs() < 1e-10);
        }
        assert!(out.det_deviation < 1e-10);
    }
}
