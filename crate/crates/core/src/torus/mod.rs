//! Grid numerics on a flat elliptic curve `C/(Z + τZ)`.
//!
//! A point is `z = x + τy` with lattice coordinates `x, y ∈ [0, 1)`; node
//! `(i, j)` sits at `(i/N, j/N)`. The area form `dx∧dy` has total volume 1.
//! Bundles of rank `r` and degree `d` are glued with constant unitaries:
//! sections satisfy `ψ(x+1, y) = e^{2πiμy} C ψ(x, y)` and `ψ(x, y+1) = S ψ(x, y)`
//! with `μ = d/r`, `C` the clock and `S` the shift matrix.

mod bundle;
mod diff;
mod donaldson;
mod dump;
mod norms;
mod poisson;
mod random;
mod sff;
mod theta;

use nalgebra::DVector;
use num_complex::Complex;
use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{self, CMat};
use crate::Real;

pub use bundle::{build_model_bundle, he_residual, mean_curvature, ModelBundle};
pub use diff::{DiffScheme, TwistedFourier};
pub use donaldson::{
    donaldson_flow, donaldson_functional, exp_relative, log_relative, FlowConfig, FlowOutcome,
    FlowStep,
};
pub use dump::{read_csv, write_csv, CsvGrid};
pub use norms::{det_ratio_at, field_norms, normalize_det_at_point, pointwise_norms, u_p, Lq, NormPair};
pub use poisson::{
    conformal_normalize, laplacian_symbol, poisson_solve, restrict_metric, spectral_laplacian,
    ConformalNormalization,
};
pub use random::{random_hermitian_field, random_metric, random_scalar_field};
pub use sff::{
    chern_weil_check, second_fundamental_form, threshold_probe, ChernWeil, SecondFundamentalForm,
};
pub use theta::{theta_section, theta_sections, ThetaSection};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("Im τ must be positive, got {0}")]
    BadModulus(f64),
    #[error("grid size must be even and at least {min}, got {n}")]
    BadGrid { n: usize, min: usize },
    #[error("rank must be positive")]
    ZeroRank,
    #[error("gcd(rank {r}, degree {d}) = {g}, need coprime data")]
    NotCoprime { r: usize, d: i64, g: i64 },
    #[error("{0}")]
    Shape(String),
    #[error("metric not positive definite at node ({i}, {j}): smallest eigenvalue {min_eig:e}")]
    NotPositive { i: usize, j: usize, min_eig: f64 },
    #[error("degree must be positive for holomorphic sections, got {0}")]
    NoSections(i64),
    #[error("characteristic ({a}, {b}) is not admissible for degree {d}, rank {r}")]
    BadCharacteristic { a: String, b: String, d: i64, r: usize },
    #[error("inclusion nearly singular at node ({i}, {j}): smallest singular value {sigma:e} below {floor:e}")]
    SingularInclusion { i: usize, j: usize, sigma: f64, floor: f64 },
    #[error("zero second fundamental form: threshold ratio undefined")]
    ZeroForm,
    #[error("right-hand side has mean {defect:e}, not 0 within {tol:e}")]
    NotSolvable { defect: f64, tol: f64 },
    #[error("endomorphism not self-adjoint for the metric at node ({i}, {j}): defect {defect:e}")]
    NotSelfAdjoint { i: usize, j: usize, defect: f64 },
    #[error("flow diverged after {iterations} iterations (residual {residual:e})")]
    Diverged {
        iterations: usize,
        residual: f64,
        history: Vec<FlowStep>,
    },
    #[error("csv: {0}")]
    Csv(String),
}

/// `N × N` grid over the torus with modulus `τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid<T: Real> {
    n: usize,
    tau: Complex<T>,
    scheme: DiffScheme,
}

pub const MIN_GRID: usize = 16;

impl<T: Real> TorusGrid<T> {
    /// Uses 4th-order finite differences; see [`TorusGrid::with_scheme`].
    pub fn new(n: usize, tau: Complex<T>) -> Result<Self, TorusError> {
        if tau.im <= T::zero() {
            return Err(TorusError::BadModulus(tau.im.to_f64()));
        }
        if n < MIN_GRID || n % 2 != 0 {
            return Err(TorusError::BadGrid { n, min: MIN_GRID });
        }
        Ok(Self {
            n,
            tau,
            scheme: DiffScheme::Fd4,
        })
    }

    pub fn with_scheme(mut self, scheme: DiffScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn tau(&self) -> Complex<T> {
        self.tau
    }
    pub fn scheme(&self) -> DiffScheme {
        self.scheme
    }
    pub fn im_tau(&self) -> T {
        self.tau.im
    }
    pub fn h(&self) -> T {
        T::one() / T::of(self.n as f64)
    }
    pub fn len(&self) -> usize {
        self.n * self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// Quadrature weight of each node; they sum to 1.
    pub fn weight(&self) -> T {
        self.h() * self.h()
    }
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }
    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k / self.n, k % self.n)
    }
    pub fn xy(&self, k: usize) -> (T, T) {
        let (i, j) = self.ij(k);
        (T::of(i as f64) * self.h(), T::of(j as f64) * self.h())
    }
    /// Quadrature of a scalar field.
    pub fn integrate(&self, f: &[T]) -> T {
        f.iter().fold(T::zero(), |a, &b| a + b) * self.weight()
    }
}

/// Clock and shift gluing data of a rank-`r`, degree-`d` model bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct Twist<T: Real> {
    rank: usize,
    degree: i64,
    clock: CMat<T>,
    shift: CMat<T>,
}

impl<T: Real> Twist<T> {
    pub fn new(rank: usize, degree: i64) -> Result<Self, TorusError> {
        if rank == 0 {
            return Err(TorusError::ZeroRank);
        }
        let g = (rank as i64).gcd(&degree);
        if g != 1 {
            return Err(TorusError::NotCoprime { r: rank, d: degree, g });
        }
        let two_pi = T::two_pi();
        let clock = CMat::from_fn(rank, rank, |a, b| {
            if a == b {
                let ang = -two_pi * T::of((degree * a as i64) as f64 / rank as f64);
                Complex::new(ang.cos(), ang.sin())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        let shift = CMat::from_fn(rank, rank, |a, b| {
            if a == (b + 1) % rank {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        Ok(Self {
            rank,
            degree,
            clock,
            shift,
        })
    }

    /// Trivial rank-`r` bundle: identity gluing, degree 0.
    pub fn trivial(rank: usize) -> Result<Self, TorusError> {
        if rank == 0 {
            return Err(TorusError::ZeroRank);
        }
        let id = linalg::identity(rank);
        Ok(Self {
            rank,
            degree: 0,
            clock: id.clone(),
            shift: id,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.degree == 0
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn degree(&self) -> i64 {
        self.degree
    }
    pub fn mu(&self) -> T {
        T::of(self.degree as f64 / self.rank as f64)
    }
    pub fn clock(&self) -> &CMat<T> {
        &self.clock
    }
    pub fn shift(&self) -> &CMat<T> {
        &self.shift
    }

    /// `X(x ± 1)` in terms of `X(x)` for an endomorphism.
    pub fn across_x(&self, m: &CMat<T>, forward: bool) -> CMat<T> {
        if forward {
            &self.clock * m * self.clock.adjoint()
        } else {
            self.clock.adjoint() * m * &self.clock
        }
    }

    /// `X(y ± 1)` in terms of `X(y)` for an endomorphism.
    pub fn across_y(&self, m: &CMat<T>, forward: bool) -> CMat<T> {
        if forward {
            &self.shift * m * self.shift.adjoint()
        } else {
            self.shift.adjoint() * m * &self.shift
        }
    }

    /// Defect of `S C = e^{2πi d/r} C S` and of unitarity.
    pub fn commutation_defect(&self) -> T {
        let ang = T::two_pi() * T::of(self.degree as f64 / self.rank as f64);
        let phase = Complex::new(ang.cos(), ang.sin());
        let lhs = &self.shift * &self.clock;
        let rhs = &self.clock * &self.shift * phase;
        let id = linalg::identity::<T>(self.rank);
        linalg::frobenius(&(lhs - rhs))
            .max(linalg::frobenius(&(self.clock.adjoint() * &self.clock - &id)))
            .max(linalg::frobenius(&(self.shift.adjoint() * &self.shift - id)))
    }

    /// Largest seam mismatch of an analytically given endomorphism field.
    pub fn seam_residual(&self, samples: usize, f: impl Fn(T, T) -> CMat<T>) -> T {
        let mut worst = T::zero();
        for k in 0..samples {
            let t = T::of(k as f64 / samples as f64);
            let a = f(T::one(), t) - self.across_x(&f(T::zero(), t), true);
            let b = f(t, T::one()) - self.across_y(&f(t, T::zero()), true);
            worst = worst.max(linalg::frobenius(&a)).max(linalg::frobenius(&b));
        }
        worst
    }
}

/// Grid of `r × r` matrices glued by conjugation with the twist.
#[derive(Clone, Debug, PartialEq)]
pub struct EndoField<T: Real> {
    pub grid: TorusGrid<T>,
    pub twist: Twist<T>,
    pub data: Vec<CMat<T>>,
}

impl<T: Real> EndoField<T> {
    pub fn from_fn(
        grid: &TorusGrid<T>,
        twist: &Twist<T>,
        f: impl Fn(T, T) -> CMat<T> + Sync,
    ) -> Self {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (x, y) = grid.xy(k);
                f(x, y)
            })
            .collect();
        Self {
            grid: grid.clone(),
            twist: twist.clone(),
            data,
        }
    }

    pub fn constant(grid: &TorusGrid<T>, twist: &Twist<T>, m: CMat<T>) -> Self {
        Self {
            grid: grid.clone(),
            twist: twist.clone(),
            data: vec![m; grid.len()],
        }
    }

    pub fn identity(grid: &TorusGrid<T>, twist: &Twist<T>) -> Self {
        Self::constant(grid, twist, linalg::identity(twist.rank()))
    }

    pub fn zeros(grid: &TorusGrid<T>, twist: &Twist<T>) -> Self {
        let r = twist.rank();
        Self::constant(grid, twist, CMat::zeros(r, r))
    }

    pub fn rank(&self) -> usize {
        self.twist.rank()
    }

    pub fn map(&self, f: impl Fn(&CMat<T>) -> CMat<T> + Sync + Send) -> Self {
        self.with_data(self.data.par_iter().map(f).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&CMat<T>, &CMat<T>) -> CMat<T> + Sync + Send) -> Self {
        self.with_data(
            self.data
                .par_iter()
                .zip(other.data.par_iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        )
    }

    pub fn with_data(&self, data: Vec<CMat<T>>) -> Self {
        Self {
            grid: self.grid.clone(),
            twist: self.twist.clone(),
            data,
        }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map(|m| m * c)
    }

    pub fn check_shape(&self, other_grid: &TorusGrid<T>, other_rank: usize) -> Result<(), TorusError> {
        if &self.grid != other_grid || self.rank() != other_rank {
            return Err(TorusError::Shape(format!(
                "field on N={} rank {} vs N={} rank {}",
                self.grid.n(),
                self.rank(),
                other_grid.n(),
                other_rank
            )));
        }
        Ok(())
    }

    /// Quadrature of the pointwise trace.
    pub fn integrate_trace(&self) -> Complex<T> {
        let s = self
            .data
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |a, m| a + m.trace());
        s * self.grid.weight()
    }

    /// Largest pointwise Frobenius distance.
    pub fn max_distance(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| linalg::frobenius(&(a - b)))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// Positive-definite Hermitian metric field.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField<T: Real>(EndoField<T>);

impl<T: Real> MetricField<T> {
    /// Hermitianizes and checks positivity at every node.
    pub fn new(field: EndoField<T>) -> Result<Self, TorusError> {
        let n = field.grid.n();
        let data: Vec<CMat<T>> = field.data.par_iter().map(linalg::hermitian_part).collect();
        for (k, m) in data.iter().enumerate() {
            let e = linalg::min_eigenvalue(m);
            if !(e > T::zero()) {
                return Err(TorusError::NotPositive {
                    i: k / n,
                    j: k % n,
                    min_eig: e.to_f64(),
                });
            }
        }
        Ok(Self(field.with_data(data)))
    }

    pub fn identity(grid: &TorusGrid<T>, twist: &Twist<T>) -> Self {
        Self(EndoField::identity(grid, twist))
    }

    pub fn field(&self) -> &EndoField<T> {
        &self.0
    }
    pub fn into_field(self) -> EndoField<T> {
        self.0
    }
    pub fn grid(&self) -> &TorusGrid<T> {
        &self.0.grid
    }
    pub fn twist(&self) -> &Twist<T> {
        &self.0.twist
    }
    pub fn data(&self) -> &[CMat<T>] {
        &self.0.data
    }
    pub fn rank(&self) -> usize {
        self.0.rank()
    }

    /// Multiply by a positive scalar field.
    pub fn conformal(&self, f: &[T]) -> Self {
        Self(self.0.with_data(
            self.0
                .data
                .iter()
                .zip(f)
                .map(|(m, &w)| m * Complex::new(w, T::zero()))
                .collect(),
        ))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self(self.0.scale(Complex::new(c, T::zero())))
    }

    /// Hermitian square roots `R` with `H = R R`; equivariant under the twist.
    pub fn sqrt_factors(&self) -> (Vec<CMat<T>>, Vec<CMat<T>>) {
        self.0
            .data
            .par_iter()
            .map(|h| {
                let (vals, v) = linalg::hermitian_eigen(h);
                let d = |p: T| {
                    CMat::from_diagonal(&DVector::from_iterator(
                        vals.len(),
                        vals.iter().map(|&x| Complex::new(x.sqrt().powf(p), T::zero())),
                    ))
                };
                (&v * d(T::one()) * v.adjoint(), &v * d(-T::one()) * v.adjoint())
            })
            .unzip()
    }
}

/// Unitary connection `A = A_x dx + A_y dy` on the model gluing.
///
/// Seams: `A_x(x+1) = C A_x C†`, `A_y(x+1) = C A_y C† − 2πiμ`, both conjugated by `S` in `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionField<T: Real> {
    pub ax: EndoField<T>,
    pub ay: EndoField<T>,
}

impl<T: Real> ConnectionField<T> {
    /// Additive seam jump of `A_y` across `x = 1`.
    pub fn seam_jump(&self) -> Complex<T> {
        Complex::new(T::zero(), -T::two_pi() * self.ax.twist.mu())
    }

    pub fn grid(&self) -> &TorusGrid<T> {
        &self.ax.grid
    }

    /// `A_z = (−i/2Imτ)(A_y − τ̄ A_x)`.
    pub fn a_z(&self) -> EndoField<T> {
        let tau = self.grid().tau();
        let c = Complex::new(T::zero(), -T::one() / (T::of(2.0) * tau.im));
        self.ay.zip_map(&self.ax, |ay, ax| (ay - ax * tau.conj()) * c)
    }

    /// `A_z̄ = (i/2Imτ)(A_y − τ A_x)`.
    pub fn a_zbar(&self) -> EndoField<T> {
        let tau = self.grid().tau();
        let c = Complex::new(T::zero(), T::one() / (T::of(2.0) * tau.im));
        self.ay.zip_map(&self.ax, |ay, ax| (ay - ax * tau) * c)
    }
}

/// Grid of `r`-vectors with the bundle's factor of automorphy.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionField<T: Real> {
    pub grid: TorusGrid<T>,
    pub twist: Twist<T>,
    pub data: Vec<DVector<Complex<T>>>,
}

impl<T: Real> SectionField<T> {
    pub fn pointwise_norm_sq(&self) -> Vec<T> {
        self.data.iter().map(|v| v.norm_squared()).collect()
    }
}

/// `f64` instantiations.
pub type TorusGrid64 = TorusGrid<f64>;
pub type Twist64 = Twist<f64>;
pub type EndoField64 = EndoField<f64>;
pub type MetricField64 = MetricField<f64>;
pub type ConnectionField64 = ConnectionField<f64>;
pub type SectionField64 = SectionField<f64>;
pub type ModelBundle64 = ModelBundle<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_shift_commutation() {
        for r in 1..=8usize {
            for d in -8i64..=8 {
                if (r as i64).gcd(&d) != 1 {
                    assert!(Twist::<f64>::new(r, d).is_err());
                    continue;
                }
                let t = Twist::<f64>::new(r, d).unwrap();
                assert!(t.commutation_defect() < 1e-13, "r={r} d={d}");
            }
        }
    }

    #[test]
    fn grid_validation() {
        let tau = Complex::new(0.0, 1.0);
        assert!(TorusGrid::new(15, tau).is_err());
        assert!(TorusGrid::new(8, tau).is_err());
        assert!(TorusGrid::new(16, Complex::new(0.3, -1.0)).is_err());
        let g = TorusGrid::<f64>::new(16, tau).unwrap();
        let ones = vec![1.0; g.len()];
        assert!((g.integrate(&ones) - 1.0).abs() < 1e-15);
    }
}
