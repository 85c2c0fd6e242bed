use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hodge::MixedSolver;
use super::norms::ratio_norms;
use super::{curvature, divergence, gauge_act, CoulombError, GaugeField, NodeField};
use crate::linalg::{self, CMat};
use crate::Real;

fn random_skew<T: Real>(r: usize, rng: &mut impl Rng) -> CMat<T> {
    let m = CMat::from_fn(r, r, |_, _| {
        Complex::new(T::of(rng.gen_range(-1.0..1.0)), T::of(rng.gen_range(-1.0..1.0)))
    });
    linalg::skew_part(&m)
}

/// Smooth skew-Hermitian function `Σ M_k sin(π(k_x x + k_y y) + φ_k)` with `k_x, k_y ≤ modes`.
fn smooth_skew<T: Real>(r: usize, rng: &mut impl Rng, modes: usize) -> impl Fn(T, T) -> CMat<T> + Sync {
    let mut terms = Vec::new();
    for kx in 0..=modes {
        for ky in 0..=modes {
            let m = random_skew::<T>(r, rng);
            let ph = T::of(rng.gen_range(0.0..std::f64::consts::TAU));
            terms.push((T::of(kx as f64), T::of(ky as f64), ph, m));
        }
    }
    move |x: T, y: T| {
        terms.iter().fold(CMat::zeros(r, r), |acc, (kx, ky, ph, m)| {
            acc + m * Complex::new((T::pi() * (*kx * x + *ky * y) + *ph).sin(), T::zero())
        })
    }
}

fn sup_op<T: Real>(data: &[CMat<T>]) -> T {
    data.iter().map(linalg::op_norm).fold(T::zero(), |a, b| a.max(b))
}

/// Smooth gauge field with `sup |A|_ρ = amplitude`.
pub fn random_gauge_field<T: Real>(
    n: usize,
    rank: usize,
    rng: &mut impl Rng,
    modes: usize,
    amplitude: T,
) -> Result<GaugeField<T>, CoulombError> {
    let fx = smooth_skew::<T>(rank, rng, modes);
    let fy = smooth_skew::<T>(rank, rng, modes);
    let a = GaugeField::from_fn(n, rank, fx, fy)?;
    let sup = sup_op(&a.ax.data).max(sup_op(&a.ay.data));
    let c = Complex::new(amplitude / sup, T::zero());
    Ok(a.zip_map(&a, |m, _| m * c))
}

/// `exp X` for a smooth skew-Hermitian `X` with `sup |X|_ρ = amplitude`.
pub fn random_unitary_field<T: Real>(
    n: usize,
    rank: usize,
    rng: &mut impl Rng,
    modes: usize,
    amplitude: T,
) -> Result<NodeField<T>, CoulombError> {
    let x = NodeField::from_fn(n, rank, smooth_skew::<T>(rank, rng, modes))?;
    let c = Complex::new(amplitude / sup_op(&x.values.data), T::zero());
    Ok(x.map(|m| linalg::exp_skew(&(m * c))))
}

/// `‖d*A‖_{L²}` over interior nodes and `max |ι_ν A|` on `∂Q`, the latter estimated by
/// `(h/2)|div A|` on the half-volumes along the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoulombResiduals {
    pub d_star: f64,
    pub boundary: f64,
}

pub fn coulomb_residuals<T: Real>(a: &GaugeField<T>) -> CoulombResiduals {
    let d = divergence(a, None);
    let h = a.h();
    let mut sum = T::zero();
    let mut bmax = T::zero();
    for i in 0..=a.n {
        for j in 0..=a.n {
            let v = linalg::frobenius(d.at(i, j));
            if d.is_boundary(i, j) {
                bmax = bmax.max(v * h / T::of(2.0));
            } else {
                sum += v * v * h * h;
            }
        }
    }
    CoulombResiduals { d_star: sum.sqrt().to_f64(), boundary: bmax.to_f64() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoulombConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Smallness threshold on `‖F(A)‖_{ρ,L²}`.
    pub eps0: f64,
}

impl Default for CoulombConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100, eps0: 0.1 }
    }
}

#[derive(Clone, Debug)]
pub struct CoulombOutcome<T: Real> {
    pub u: NodeField<T>,
    pub a_c: GaugeField<T>,
    pub iterations: usize,
    pub residuals: CoulombResiduals,
    pub history: Vec<CoulombResiduals>,
    pub curvature_l2: T,
    pub w12: T,
    /// `‖A_c‖_{ρ,W^{1,2}} / ‖F(A)‖_{ρ,L²}`, `NaN` when `F = 0`.
    pub ratio: T,
}

/// Iterates `u ← e^{−χ} u` with `L χ = −div(u(A))`, where `L` is the finite-volume
/// Neumann Laplacian, until `u(A)` is in Coulomb gauge.
pub fn coulomb_fix<T: Real>(a: &GaugeField<T>, cfg: &CoulombConfig) -> Result<CoulombOutcome<T>, CoulombError> {
    let f = curvature(a);
    let (_, f_l2) = ratio_norms(a, &f);
    if f_l2.to_f64() > cfg.eps0 {
        return Err(CoulombError::CurvatureTooLarge { measured: f_l2.to_f64(), eps0: cfg.eps0 });
    }
    let solver = MixedSolver::new(a.n);
    let mut u = NodeField::identity(a.n, a.rank)?;
    let mut cur = a.clone();
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let res = coulomb_residuals(&cur);
        history.push(res);
        if res.d_star < cfg.tol && res.boundary < cfg.tol {
            break;
        }
        if iterations == cfg.max_iter {
            return Err(CoulombError::NotConverged {
                iterations,
                residual: res.d_star.max(res.boundary),
                history,
            });
        }
        let div = divergence(&cur, None);
        let chi = solver.neumann(&div.map(|m| -m));
        let g = chi.map(|m| linalg::exp_skew(&linalg::skew_part(&-m)));
        u.values.data = g.values.data.par_iter().zip(&u.values.data).map(|(g, u)| g * u).collect();
        cur = gauge_act(&g, &cur)?;
        iterations += 1;
    }
    // recompute from the accumulated gauge so that A_c = u(A) holds exactly
    let a_c = if iterations == 0 { cur } else { gauge_act(&u, a)? };
    let residuals = coulomb_residuals(&a_c);
    let (w12, _) = ratio_norms(&a_c, &f);
    Ok(CoulombOutcome {
        u,
        iterations,
        residuals,
        history,
        curvature_l2: f_l2,
        w12,
        ratio: if f_l2 > T::zero() { w12 / f_l2 } else { T::from_subset(&f64::NAN) },
        a_c,
    })
}

/// One seeded experiment record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoulombRecord {
    pub seed: u64,
    pub rank: usize,
    pub eps: f64,
    pub iterations: usize,
    pub d_star_residual: f64,
    pub boundary_residual: f64,
    pub ratio: f64,
}

/// A small-curvature field scaled to `‖F‖_{ρ,L²} ≈ eps`, disguised by a random gauge of
/// size `gauge`, then fixed.
pub fn coulomb_experiment(
    seed: u64,
    rank: usize,
    n: usize,
    eps: f64,
    gauge: f64,
    cfg: &CoulombConfig,
) -> Result<CoulombRecord, CoulombError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = random_gauge_field::<f64>(n, rank, &mut rng, 3, 1.0)?;
    for _ in 0..3 {
        let (_, fl) = ratio_norms(&a, &curvature(&a));
        let c = Complex::new(eps / fl, 0.0);
        a = a.zip_map(&a, |m, _| m * c);
    }
    let u0 = random_unitary_field::<f64>(n, rank, &mut rng, 2, gauge)?;
    let a = gauge_act(&u0, &a)?;
    let out = coulomb_fix(&a, cfg)?;
    Ok(CoulombRecord {
        seed,
        rank,
        eps: out.curvature_l2,
        iterations: out.iterations,
        d_star_residual: out.residuals.d_star,
        boundary_residual: out.residuals.boundary,
        ratio: out.ratio,
    })
}
