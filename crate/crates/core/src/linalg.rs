//! Small dense complex matrix helpers.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex;

use crate::Real;

pub type CMat<T> = DMatrix<Complex<T>>;

pub fn identity<T: Real>(r: usize) -> CMat<T> {
    CMat::identity(r, r)
}

pub fn scalar<T: Real>(r: usize, z: Complex<T>) -> CMat<T> {
    CMat::from_diagonal_element(r, r, z)
}

pub fn hermitian_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()) * Complex::new(T::of(0.5), T::zero())
}

pub fn commutator<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a * b - b * a
}

pub fn trace<T: Real>(m: &CMat<T>) -> Complex<T> {
    m.trace()
}

/// Eigenvalues (ascending) and unitary eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// `V f(Λ) V†` for Hermitian `m`.
pub fn hermitian_fn<T: Real>(m: &CMat<T>, f: impl Fn(T) -> T) -> CMat<T> {
    let (vals, v) = hermitian_eigen(m);
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.into_iter().map(|x| Complex::new(f(x), T::zero())),
    ));
    &v * d * v.adjoint()
}

pub fn exp_hermitian<T: Real>(m: &CMat<T>) -> CMat<T> {
    hermitian_fn(m, |x| x.exp())
}

/// Principal logarithm of a positive-definite Hermitian matrix.
pub fn log_hermitian<T: Real>(m: &CMat<T>) -> CMat<T> {
    hermitian_fn(m, |x| x.ln())
}

pub fn sqrt_hermitian<T: Real>(m: &CMat<T>) -> CMat<T> {
    hermitian_fn(m, |x| x.max(T::zero()).sqrt())
}

pub fn min_eigenvalue<T: Real>(m: &CMat<T>) -> T {
    hermitian_eigen(m).0[0]
}

/// `exp(x)` for skew-Hermitian `x`, unitary to rounding.
pub fn exp_skew<T: Real>(x: &CMat<T>) -> CMat<T> {
    let k = x * Complex::new(T::zero(), -T::one());
    let (vals, v) = hermitian_eigen(&k);
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.into_iter().map(|t| Complex::new(t.cos(), t.sin())),
    ));
    &v * d * v.adjoint()
}

/// Skew-Hermitian principal logarithm of a unitary matrix.
pub fn log_unitary<T: Real>(u: &CMat<T>) -> CMat<T> {
    let n = u.nrows();
    let i = Complex::new(T::zero(), T::one());
    // Near the identity the eigenvectors of (U − U†)/2i are those of U.
    let s = (u - u.adjoint()) * Complex::new(T::zero(), T::of(-0.5));
    let (vals, v) = hermitian_eigen(&s);
    if vals.iter().all(|x| x.abs() < T::of(0.9)) {
        let theta: Vec<T> = vals.iter().map(|x| x.asin()).collect();
        let rebuilt = {
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                theta.iter().map(|t| Complex::new(t.cos(), t.sin())),
            ));
            &v * d * v.adjoint()
        };
        if frobenius(&(rebuilt - u)) < T::of(1e3) * T::eps() * T::of(n as f64) {
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                theta.into_iter().map(|t| i * t),
            ));
            let l = &v * d * v.adjoint();
            return skew_part(&l);
        }
    }
    let schur = u.clone().schur();
    let (q, t) = schur.unpack();
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        (0..n).map(|k| {
            let z = t[(k, k)];
            i * z.im.atan2(z.re)
        }),
    ));
    skew_part(&(&q * d * q.adjoint()))
}

pub fn skew_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m - m.adjoint()) * Complex::new(T::of(0.5), T::zero())
}

pub fn frobenius<T: Real>(m: &CMat<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr())
        .sqrt()
}

/// Largest singular value.
pub fn op_norm<T: Real>(m: &CMat<T>) -> T {
    if m.nrows() == 1 && m.ncols() == 1 {
        return nalgebra::ComplexField::modulus(m[(0, 0)]);
    }
    let g = m.adjoint() * m;
    let (vals, _) = hermitian_eigen(&g);
    vals.last().copied().unwrap_or(T::zero()).max(T::zero()).sqrt()
}

/// Upper factor `R` with `H = R† R`.
pub fn cholesky_upper<T: Real>(h: &CMat<T>) -> Option<CMat<T>> {
    let h = hermitian_part(h);
    Cholesky::<Complex<T>, Dyn>::new(h).map(|c| c.l().adjoint())
}

/// Inverse of an upper-triangular matrix.
pub fn upper_inverse<T: Real>(r: &CMat<T>) -> CMat<T> {
    let n = r.nrows();
    let mut out = identity::<T>(n);
    let ok = r.solve_upper_triangular_mut(&mut out);
    debug_assert!(ok);
    out
}

pub fn inverse<T: Real>(m: &CMat<T>) -> Option<CMat<T>> {
    m.clone().try_inverse()
}

/// Operator norm measured in the metric `H = R† R`: `‖R X R⁻¹‖`.
pub fn op_norm_in<T: Real>(x: &CMat<T>, r: &CMat<T>, r_inv: &CMat<T>) -> T {
    op_norm(&(r * x * r_inv))
}

/// Frobenius norm measured in the metric `H = R† R`.
pub fn frobenius_in<T: Real>(x: &CMat<T>, r: &CMat<T>, r_inv: &CMat<T>) -> T {
    frobenius(&(r * x * r_inv))
}

/// Spectral radius for matrices diagonalizable by a unitary in the given metric.
pub fn spectral_radius_in<T: Real>(x: &CMat<T>, r: &CMat<T>, r_inv: &CMat<T>) -> T {
    op_norm_in(x, r, r_inv)
}
