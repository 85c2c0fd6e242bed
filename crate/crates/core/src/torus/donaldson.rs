use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bundle::residual_of;
use super::diff::{dz_dzbar, TwistedFourier};
use super::poisson::laplacian_symbol;
use super::{mean_curvature, ConnectionField, EndoField, MetricField, TorusError};
use crate::linalg::{self, CMat};
use crate::Real;

/// `s = log(K⁻¹H)`, self-adjoint for `K`.
pub fn log_relative<T: Real>(k: &MetricField<T>, h: &MetricField<T>) -> Result<EndoField<T>, TorusError> {
    h.field().check_shape(k.grid(), k.rank())?;
    let (r, ri) = k.sqrt_factors();
    let data = (0..r.len())
        .into_par_iter()
        .map(|n| &ri[n] * linalg::log_hermitian(&linalg::hermitian_part(&(&ri[n] * &h.data()[n] * &ri[n]))) * &r[n])
        .collect();
    Ok(k.field().with_data(data))
}

/// `H = K e^s` for `s` self-adjoint with respect to `K`.
pub fn exp_relative<T: Real>(k: &MetricField<T>, s: &EndoField<T>) -> Result<MetricField<T>, TorusError> {
    s.check_shape(k.grid(), k.rank())?;
    let (r, ri) = k.sqrt_factors();
    let data = (0..r.len())
        .into_par_iter()
        .map(|n| {
            let x = linalg::hermitian_part(&(&r[n] * &s.data[n] * &ri[n]));
            &r[n] * linalg::exp_hermitian(&x) * &r[n]
        })
        .collect();
    MetricField::new(s.with_data(data))
}

/// `(e^x − x − 1)/x² = Σ x^k/(k+2)!`; the quotient cancels badly for `|x| < 1/2`.
fn phi<T: Real>(x: T) -> T {
    if x.abs() < T::of(0.5) {
        let mut term = T::of(0.5);
        let mut sum = term;
        for k in 1..20 {
            term = term * x / T::of((k + 2) as f64);
            sum += term;
        }
        sum
    } else {
        (x.exp() - x - T::one()) / (x * x)
    }
}

fn check_self_adjoint<T: Real>(k: &MetricField<T>, s: &EndoField<T>) -> Result<(), TorusError> {
    let n = k.grid().n();
    for (idx, (km, sm)) in k.data().iter().zip(&s.data).enumerate() {
        let ks = km * sm;
        let scale = T::one().max(linalg::frobenius(&ks));
        let defect = linalg::frobenius(&(&ks - ks.adjoint())) / scale;
        if defect > T::of(1e-8) {
            return Err(TorusError::NotSelfAdjoint {
                i: idx / n,
                j: idx % n,
                defect: defect.to_f64(),
            });
        }
    }
    Ok(())
}

/// `M(K, K e^s) = 2Imτ ∫ Σ φ(λ_i − λ_j)|(∂̄s)_{ij}|² + ∫ tr((√−1ΛF_K − 2πμ) s)`, with
/// `(∂̄s)_{ij}` taken in a `K`-orthonormal eigenbasis of `s`.
pub fn donaldson_functional<T: Real>(
    conn: &ConnectionField<T>,
    k: &MetricField<T>,
    s: &EndoField<T>,
) -> Result<T, TorusError> {
    s.check_shape(k.grid(), k.rank())?;
    check_self_adjoint(k, s)?;
    let mean = mean_curvature(conn, k)?;
    functional_with(conn, k, &mean, s)
}

fn functional_with<T: Real>(
    conn: &ConnectionField<T>,
    k: &MetricField<T>,
    mean: &EndoField<T>,
    s: &EndoField<T>,
) -> Result<T, TorusError> {
    let g = k.grid();
    let rank = k.rank();
    let zero = Complex::new(T::zero(), T::zero());
    let (_, dzb) = dz_dzbar(s, zero);
    let azb = conn.a_zbar();
    let (r, ri) = k.sqrt_factors();
    let shift = linalg::scalar(rank, Complex::new(T::two_pi() * k.twist().mu(), T::zero()));
    let two_im = T::of(2.0) * g.im_tau();
    let density: Vec<T> = (0..g.len())
        .into_par_iter()
        .map(|n| {
            let sh = linalg::hermitian_part(&(&r[n] * &s.data[n] * &ri[n]));
            let (lam, u) = linalg::hermitian_eigen(&sh);
            let b = &dzb[n] + linalg::commutator(&azb.data[n], &s.data[n]);
            let bp = u.adjoint() * &r[n] * b * &ri[n] * &u;
            let mut grad = T::zero();
            for i in 0..rank {
                for j in 0..rank {
                    grad += phi(lam[i] - lam[j]) * bp[(i, j)].norm_sqr();
                }
            }
            let lin = ((&mean.data[n] - &shift) * &s.data[n]).trace().re;
            two_im * grad + lin
        })
        .collect();
    Ok(g.integrate(&density))
}

/// Descent parameters. With `preconditioner = Some(c)` the direction is smoothed by
/// `(c − Δ_ω)⁻¹` in the frame `H^{1/2}`; otherwise the update is `H ← H e^{−ε P}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub step: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub max_halvings: usize,
    pub preconditioner: Option<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            max_iter: 1000,
            tol: 1e-6,
            max_halvings: 30,
            preconditioner: None,
        }
    }
}

/// One accepted iterate; `functional` is `M(K₀, H)` accumulated through the cocycle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowStep {
    pub iteration: usize,
    pub residual: f64,
    pub functional: f64,
    pub step: f64,
    pub halvings: usize,
}

#[derive(Clone, Debug)]
pub struct FlowOutcome<T: Real> {
    pub metric: MetricField<T>,
    pub converged: bool,
    pub residual: T,
    pub history: Vec<FlowStep>,
}

impl<T: Real> FlowOutcome<T> {
    pub fn iterations(&self) -> usize {
        self.history.len().saturating_sub(1)
    }

    /// Whether `M` never increased beyond `slack` between accepted iterates.
    pub fn monotone(&self, slack: f64) -> bool {
        self.history.windows(2).all(|w| w[1].functional <= w[0].functional + slack)
    }
}

/// Minimizes `M(K₀, ·)` by gradient descent with backtracking.
pub fn donaldson_flow<T: Real>(
    conn: &ConnectionField<T>,
    k0: &MetricField<T>,
    cfg: &FlowConfig,
) -> Result<FlowOutcome<T>, TorusError> {
    if !(cfg.step > 0.0) {
        return Err(TorusError::Shape(format!("step must be positive, got {}", cfg.step)));
    }
    k0.field().check_shape(conn.grid(), conn.ax.rank())?;
    let g = k0.grid().clone();
    let mu = k0.twist().mu();
    let rank = k0.rank();
    let tol = T::of(cfg.tol);
    let tf = cfg.preconditioner.map(|_| TwistedFourier::new(&g, k0.twist()));
    let shift = linalg::scalar(rank, Complex::new(T::two_pi() * mu, T::zero()));

    let mut h = k0.clone();
    let mut mean = mean_curvature(conn, &h)?;
    let mut residual = residual_of(&mean, &h, mu);
    let mut m_total = T::zero();
    let mut step = T::of(cfg.step);
    let mut history = vec![FlowStep {
        iteration: 0,
        residual: residual.to_f64(),
        functional: 0.0,
        step: 0.0,
        halvings: 0,
    }];
    for it in 1..=cfg.max_iter {
        if residual < tol {
            break;
        }
        // P in the Hermitian frame R = H^{1/2}
        let (r, ri) = h.sqrt_factors();
        let p_hat: Vec<CMat<T>> = (0..g.len())
            .into_par_iter()
            .map(|n| linalg::hermitian_part(&(&r[n] * (&mean.data[n] - &shift) * &ri[n])))
            .collect();
        let dir_hat = match (&tf, cfg.preconditioner) {
            (Some(tf), Some(c)) => {
                let c = T::of(c);
                tf.apply(&p_hat, |kx, ky, _, _| {
                    let s = c - laplacian_symbol(&g, kx, ky);
                    let v = if s > T::zero() { T::one() / s } else { T::zero() };
                    Complex::new(v, T::zero())
                })
                .iter()
                .map(linalg::hermitian_part)
                .collect()
            }
            _ => p_hat,
        };
        let dir = h.field().with_data(
            (0..g.len())
                .into_par_iter()
                .map(|n| &ri[n] * &dir_hat[n] * &r[n])
                .collect(),
        );
        let slack = T::of(1e-12) * T::one().max(m_total.abs());
        let mut halvings = 0;
        loop {
            let s = dir.scale(Complex::new(-step, T::zero()));
            let trial = exp_relative(&h, &s).ok().and_then(|next| {
                let dm = functional_with(conn, &h, &mean, &s).ok()?;
                (dm <= slack).then_some((next, dm))
            });
            match trial {
                Some((next, dm)) => {
                    h = next;
                    m_total += dm;
                    mean = mean_curvature(conn, &h)?;
                    residual = residual_of(&mean, &h, mu);
                    history.push(FlowStep {
                        iteration: it,
                        residual: residual.to_f64(),
                        functional: m_total.to_f64(),
                        step: step.to_f64(),
                        halvings,
                    });
                    if halvings == 0 && cfg.preconditioner.is_some() {
                        step = (step * T::of(2.0)).min(T::of(cfg.step));
                    }
                    break;
                }
                None if halvings < cfg.max_halvings => {
                    halvings += 1;
                    step /= T::of(2.0);
                }
                None => {
                    return Err(TorusError::Diverged {
                        iterations: it,
                        residual: residual.to_f64(),
                        history,
                    })
                }
            }
        }
    }
    Ok(FlowOutcome {
        converged: residual < tol,
        metric: h,
        residual,
        history,
    })
}
