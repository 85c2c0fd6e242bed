//! Gauge fields on the unit square `Q = [0, 1]²`.
//!
//! Discretization is a staggered lattice with `n` cells per side and `h = 1/n`:
//! scalars live on the `(n+1)²` nodes, `A_x` on horizontal edges `(i+½, j)`,
//! `A_y` on vertical edges `(i, j+½)`, and curvature on cell centres. A gauge
//! field acts through its links `U = exp(h A)`, so gauge transformations and the
//! plaquette curvature are exactly covariant.

mod fix;
mod hodge;
mod norms;

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{self, CMat};
use crate::Real;

pub use fix::{
    coulomb_experiment, coulomb_fix, coulomb_residuals, random_gauge_field, random_unitary_field,
    CoulombConfig, CoulombOutcome, CoulombRecord, CoulombResiduals,
};
pub use hodge::{hodge_solve, neumann_solve, HodgeSolution, MixedSolver};
pub use norms::{grid_norms, ratio_norms, Fiber, NormReport, Space};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoulombError {
    #[error("grid needs at least {min} cells per side, got {n}")]
    BadGrid { n: usize, min: usize },
    #[error("rank must be positive")]
    ZeroRank,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not unitary at node ({i}, {j}): defect {defect:e}")]
    NotUnitary { i: usize, j: usize, defect: f64 },
    #[error("incompatible data: ∫ψ − ∮w = {defect:e} exceeds {tol:e}")]
    Incompatible { defect: f64, tol: f64 },
    #[error("‖F(A)‖_L² = {measured:e} exceeds the smallness threshold {eps0:e}")]
    CurvatureTooLarge { measured: f64, eps0: f64 },
    #[error("no Coulomb gauge within {iterations} iterations (last residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<CoulombResiduals>,
    },
    #[error("unsupported norm: {0}")]
    UnsupportedNorm(String),
}

fn check_n(n: usize, rank: usize) -> Result<(), CoulombError> {
    if n < 2 {
        return Err(CoulombError::BadGrid { n, min: 2 });
    }
    if rank == 0 {
        return Err(CoulombError::ZeroRank);
    }
    Ok(())
}

/// Matrices on a regular `nx × ny` array with spacing `h` and the origin at `offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct Component<T: Real> {
    pub nx: usize,
    pub ny: usize,
    pub offset: (T, T),
    pub data: Vec<CMat<T>>,
}

impl<T: Real> Component<T> {
    fn from_fn(nx: usize, ny: usize, offset: (T, T), h: T, f: impl Fn(T, T) -> CMat<T> + Sync) -> Self {
        let data = (0..nx * ny)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / ny, k % ny);
                f(offset.0 + T::of(i as f64) * h, offset.1 + T::of(j as f64) * h)
            })
            .collect();
        Self { nx, ny, offset, data }
    }

    pub fn at(&self, i: usize, j: usize) -> &CMat<T> {
        &self.data[i * self.ny + j]
    }

    /// Trapezoid weights on `[0,1]²`: a point on the boundary of the square carries
    /// half its cell, a corner a quarter.
    pub(crate) fn weight(&self, i: usize, j: usize, h: T) -> T {
        let half = T::of(0.5);
        let on = |k: usize, len: usize, off: T| off == T::zero() && (k == 0 || k + 1 == len);
        let wx = if on(i, self.nx, self.offset.0) { half } else { T::one() };
        let wy = if on(j, self.ny, self.offset.1) { half } else { T::one() };
        wx * wy * h * h
    }
}

/// Matrix-valued function on the nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeField<T: Real> {
    pub n: usize,
    pub rank: usize,
    pub values: Component<T>,
}

impl<T: Real> NodeField<T> {
    pub fn from_fn(n: usize, rank: usize, f: impl Fn(T, T) -> CMat<T> + Sync) -> Result<Self, CoulombError> {
        check_n(n, rank)?;
        let h = T::one() / T::of(n as f64);
        Ok(Self { n, rank, values: Component::from_fn(n + 1, n + 1, (T::zero(), T::zero()), h, f) })
    }

    pub fn constant(n: usize, m: CMat<T>) -> Result<Self, CoulombError> {
        let r = m.nrows();
        Self::from_fn(n, r, move |_, _| m.clone())
    }

    pub fn identity(n: usize, rank: usize) -> Result<Self, CoulombError> {
        Self::constant(n, linalg::identity(rank))
    }

    pub fn zeros(n: usize, rank: usize) -> Result<Self, CoulombError> {
        Self::constant(n, CMat::zeros(rank, rank))
    }

    pub fn h(&self) -> T {
        T::one() / T::of(self.n as f64)
    }

    pub fn at(&self, i: usize, j: usize) -> &CMat<T> {
        self.values.at(i, j)
    }

    pub fn map(&self, f: impl Fn(&CMat<T>) -> CMat<T> + Sync + Send) -> Self {
        let mut out = self.clone();
        out.values.data = self.values.data.par_iter().map(f).collect();
        out
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n || j == self.n
    }
}

/// Matrix-valued function on cell centres, e.g. the curvature `F_xy`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField<T: Real> {
    pub n: usize,
    pub rank: usize,
    pub values: Component<T>,
}

pub type CurvatureField<T> = CellField<T>;

impl<T: Real> CellField<T> {
    pub fn from_fn(n: usize, rank: usize, f: impl Fn(T, T) -> CMat<T> + Sync) -> Result<Self, CoulombError> {
        check_n(n, rank)?;
        let h = T::one() / T::of(n as f64);
        let c = h / T::of(2.0);
        Ok(Self { n, rank, values: Component::from_fn(n, n, (c, c), h, f) })
    }

    pub fn at(&self, i: usize, j: usize) -> &CMat<T> {
        self.values.at(i, j)
    }
}

/// Matrix-valued 1-form `A_x dx + A_y dy` sampled at edge midpoints. A gauge field has
/// skew-Hermitian coefficients; solutions of Hodge systems need not.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeField<T: Real> {
    pub n: usize,
    pub rank: usize,
    /// `(i+½, j)`, `i < n`, `j ≤ n`
    pub ax: Component<T>,
    /// `(i, j+½)`, `i ≤ n`, `j < n`
    pub ay: Component<T>,
}

impl<T: Real> GaugeField<T> {
    pub fn from_fn(
        n: usize,
        rank: usize,
        fx: impl Fn(T, T) -> CMat<T> + Sync,
        fy: impl Fn(T, T) -> CMat<T> + Sync,
    ) -> Result<Self, CoulombError> {
        check_n(n, rank)?;
        let h = T::one() / T::of(n as f64);
        let c = h / T::of(2.0);
        Ok(Self {
            n,
            rank,
            ax: Component::from_fn(n, n + 1, (c, T::zero()), h, fx),
            ay: Component::from_fn(n + 1, n, (T::zero(), c), h, fy),
        })
    }

    pub fn zeros(n: usize, rank: usize) -> Result<Self, CoulombError> {
        let z = CMat::zeros(rank, rank);
        let z2 = z.clone();
        Self::from_fn(n, rank, move |_, _| z.clone(), move |_, _| z2.clone())
    }

    pub fn h(&self) -> T {
        T::one() / T::of(self.n as f64)
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&CMat<T>, &CMat<T>) -> CMat<T> + Sync + Send) -> Self {
        let mut out = self.clone();
        out.ax.data = self.ax.data.par_iter().zip(&other.ax.data).map(|(a, b)| f(a, b)).collect();
        out.ay.data = self.ay.data.par_iter().zip(&other.ay.data).map(|(a, b)| f(a, b)).collect();
        out
    }

    /// Largest nodewise difference in Frobenius norm.
    pub fn max_distance(&self, other: &Self) -> T {
        self.ax
            .data
            .iter()
            .zip(&other.ax.data)
            .chain(self.ay.data.iter().zip(&other.ay.data))
            .map(|(a, b)| linalg::frobenius(&(a - b)))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest defect of `A† = −A`.
    pub fn skew_defect(&self) -> T {
        self.ax
            .data
            .iter()
            .chain(&self.ay.data)
            .map(|a| linalg::frobenius(&(a + a.adjoint())))
            .fold(T::zero(), |a, b| a.max(b))
    }

    fn check_rank(&self, n: usize, rank: usize) -> Result<(), CoulombError> {
        if self.n != n || self.rank != rank {
            return Err(CoulombError::Shape(format!(
                "field is {}×{} rank {}, expected {n}×{n} rank {rank}",
                self.n, self.n, self.rank
            )));
        }
        Ok(())
    }
}

/// `F_xy` on cell centres from the plaquette holonomy
/// `U_x(i,j) U_y(i+1,j) U_x(i,j+1)⁻¹ U_y(i,j)⁻¹ = exp(h² F)`.
pub fn curvature<T: Real>(a: &GaugeField<T>) -> CellField<T> {
    let n = a.n;
    let h = a.h();
    let ux: Vec<CMat<T>> = a.ax.data.par_iter().map(|m| linalg::exp_skew(&(m * Complex::new(h, T::zero())))).collect();
    let uy: Vec<CMat<T>> = a.ay.data.par_iter().map(|m| linalg::exp_skew(&(m * Complex::new(h, T::zero())))).collect();
    let inv_h2 = Complex::new(T::one() / (h * h), T::zero());
    let data = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let p = &ux[i * (n + 1) + j]
                * &uy[(i + 1) * n + j]
                * ux[i * (n + 1) + j + 1].adjoint()
                * uy[i * n + j].adjoint();
            linalg::log_unitary(&p) * inv_h2
        })
        .collect();
    let c = h / T::of(2.0);
    CellField { n, rank: a.rank, values: Component { nx: n, ny: n, offset: (c, c), data } }
}

/// Largest defect of `u†u = Id` over the nodes.
fn check_unitary<T: Real>(u: &NodeField<T>) -> Result<(), CoulombError> {
    let id = linalg::identity::<T>(u.rank);
    let n1 = u.n + 1;
    for (k, m) in u.values.data.iter().enumerate() {
        let defect = linalg::frobenius(&(m.adjoint() * m - &id));
        if defect > T::of(1e-10) {
            return Err(CoulombError::NotUnitary { i: k / n1, j: k % n1, defect: defect.to_f64() });
        }
    }
    Ok(())
}

/// `u(A) = uAu⁻¹ − du u⁻¹`, acting on links as `U_{ab} ↦ u_a U_{ab} u_b⁻¹`.
pub fn gauge_act<T: Real>(u: &NodeField<T>, a: &GaugeField<T>) -> Result<GaugeField<T>, CoulombError> {
    a.check_rank(u.n, u.rank)?;
    check_unitary(u)?;
    let n = a.n;
    let h = a.h();
    let hc = Complex::new(h, T::zero());
    let inv_h = Complex::new(T::one() / h, T::zero());
    let link = |m: &CMat<T>, ua: &CMat<T>, ub: &CMat<T>| {
        let w = ua * linalg::exp_skew(&(m * hc)) * ub.adjoint();
        linalg::log_unitary(&w) * inv_h
    };
    let mut out = a.clone();
    out.ax.data = (0..n * (n + 1))
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / (n + 1), k % (n + 1));
            link(&a.ax.data[k], u.at(i, j), u.at(i + 1, j))
        })
        .collect();
    out.ay.data = (0..(n + 1) * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            link(&a.ay.data[k], u.at(i, j), u.at(i, j + 1))
        })
        .collect();
    Ok(out)
}

/// Finite-volume divergence on the node control volumes, with boundary flux `w`
/// (outward normal component) added when given.
pub fn divergence<T: Real>(a: &GaugeField<T>, w: Option<&NodeField<T>>) -> NodeField<T> {
    let n = a.n;
    let h = a.h();
    let r = a.rank;
    let data = (0..(n + 1) * (n + 1))
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / (n + 1), k % (n + 1));
            // face lengths and volume of the dual cell
            let ly = if j == 0 || j == n { h / T::of(2.0) } else { h };
            let lx = if i == 0 || i == n { h / T::of(2.0) } else { h };
            let vol = lx * ly;
            let mut flux = CMat::zeros(r, r);
            let c = |t: T| Complex::new(t, T::zero());
            if i < n {
                flux += a.ax.at(i, j) * c(ly);
            }
            if i > 0 {
                flux -= a.ax.at(i - 1, j) * c(ly);
            }
            if j < n {
                flux += a.ay.at(i, j) * c(lx);
            }
            if j > 0 {
                flux -= a.ay.at(i, j - 1) * c(lx);
            }
            if let Some(w) = w {
                let faces = [(i == 0, ly), (i == n, ly), (j == 0, lx), (j == n, lx)];
                for (on, len) in faces {
                    if on {
                        flux += w.at(i, j) * c(len);
                    }
                }
            }
            flux * c(T::one() / vol)
        })
        .collect();
    NodeField { n, rank: r, values: Component { nx: n + 1, ny: n + 1, offset: (T::zero(), T::zero()), data } }
}

/// `d*A = −div A` with zero boundary flux. At a boundary node, `(h/2)·div` estimates the
/// outward normal component.
pub fn d_star<T: Real>(a: &GaugeField<T>) -> NodeField<T> {
    divergence(a, None).map(|m| -m)
}

/// Curl `∂_x u_y − ∂_y u_x` on cell centres.
pub fn curl<T: Real>(a: &GaugeField<T>) -> CellField<T> {
    let n = a.n;
    let inv_h = Complex::new(T::one() / a.h(), T::zero());
    let data = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            ((a.ay.at(i + 1, j) - a.ay.at(i, j)) - (a.ax.at(i, j + 1) - a.ax.at(i, j))) * inv_h
        })
        .collect();
    let c = a.h() / T::of(2.0);
    CellField { n, rank: a.rank, values: Component { nx: n, ny: n, offset: (c, c), data } }
}

/// `f64` instantiations.
pub type GaugeField64 = GaugeField<f64>;
pub type NodeField64 = NodeField<f64>;
pub type CellField64 = CellField<f64>;

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn zero_field_is_flat() {
        let a = GaugeField::<f64>::zeros(8, 2).unwrap();
        assert!(curvature(&a).values.data.iter().all(|m| m.norm() == 0.0));
    }

    #[test]
    fn linear_potential_has_constant_curvature() {
        // A_y = i x T, rank 1: F = i T exactly on the lattice
        let t = 0.7;
        let a = GaugeField::from_fn(
            16,
            1,
            |_, _| CMat::zeros(1, 1),
            |x, _| CMat::from_element(1, 1, c(0.0, t * x)),
        )
        .unwrap();
        for m in &curvature(&a).values.data {
            assert!((m[(0, 0)] - c(0.0, t)).norm() < 1e-12);
        }
    }

    #[test]
    fn gauge_covariance_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_gauge_field(16, 3, &mut rng, 2, 1.0).unwrap();
        let u = random_unitary_field(16, 3, &mut rng, 2, 0.8).unwrap();
        let b = gauge_act(&u, &a).unwrap();
        let (fa, fb) = (curvature(&a), curvature(&b));
        for (k, (x, y)) in fa.values.data.iter().zip(&fb.values.data).enumerate() {
            let (i, j) = (k / 16, k % 16);
            let conj = u.at(i, j) * x * u.at(i, j).adjoint();
            assert!((conj - y).norm() < 1e-10);
        }
        // pure gauge: F = 0 up to roundoff
        let z = gauge_act(&u, &GaugeField::zeros(16, 3).unwrap()).unwrap();
        assert!(curvature(&z).values.data.iter().all(|m| m.norm() < 1e-10));
        assert!(gauge_act(&NodeField::identity(16, 3).unwrap(), &a).unwrap().max_distance(&a) < 1e-12);
        let bad = NodeField::constant(16, CMat::identity(3, 3) * c(2.0, 0.0)).unwrap();
        assert!(matches!(gauge_act(&bad, &a), Err(CoulombError::NotUnitary { .. })));
    }

    #[test]
    fn divergence_sums_to_boundary_flux() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_gauge_field(12, 2, &mut rng, 2, 1.0).unwrap();
        let d = divergence(&a, None);
        let total = d.values.data.iter().enumerate().fold(CMat::zeros(2, 2), |acc, (k, m)| {
            acc + m * c(d.values.weight(k / 13, k % 13, d.h()), 0.0)
        });
        assert!(total.norm() < 1e-12);
    }
}
