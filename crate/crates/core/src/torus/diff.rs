use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{EndoField, TorusGrid, Twist};
use crate::linalg::{self, CMat};
use crate::Real;

/// How matrix fields are differentiated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffScheme {
    /// 4th-order centered differences with twist-conjugated ghost nodes.
    Fd4,
    /// Fourier differentiation in the clock–shift basis `C^p S^q`.
    Spectral,
}

impl std::str::FromStr for DiffScheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fd4" => Ok(DiffScheme::Fd4),
            "spectral" => Ok(DiffScheme::Spectral),
            other => Err(format!("unknown scheme {other:?} (fd4 | spectral)")),
        }
    }
}

/// `(∂_x X, ∂_y X)`. `jump_x` is the additive seam offset `X(x+1) = C X C† + jump·Id`.
pub(crate) fn gradient<T: Real>(
    field: &EndoField<T>,
    jump_x: Complex<T>,
) -> (Vec<CMat<T>>, Vec<CMat<T>>) {
    match field.grid.scheme() {
        DiffScheme::Fd4 => fd4_gradient(field, jump_x),
        DiffScheme::Spectral => {
            let tf = TwistedFourier::new(&field.grid, &field.twist);
            tf.gradient(field, jump_x)
        }
    }
}

/// `∂_z X = (−i/2Imτ)(∂_y − τ̄∂_x)X` and `∂_z̄ X = (i/2Imτ)(∂_y − τ∂_x)X`.
pub(crate) fn dz_dzbar<T: Real>(
    field: &EndoField<T>,
    jump_x: Complex<T>,
) -> (Vec<CMat<T>>, Vec<CMat<T>>) {
    let (dx, dy) = gradient(field, jump_x);
    let tau = field.grid.tau();
    let s = T::one() / (T::of(2.0) * tau.im);
    let cz = Complex::new(T::zero(), -s);
    let czb = Complex::new(T::zero(), s);
    dx.par_iter()
        .zip(dy.par_iter())
        .map(|(gx, gy)| {
            (
                (gy - gx * tau.conj()) * cz,
                (gy - gx * tau) * czb,
            )
        })
        .unzip()
}

fn fd4_gradient<T: Real>(f: &EndoField<T>, jump_x: Complex<T>) -> (Vec<CMat<T>>, Vec<CMat<T>>) {
    let g = &f.grid;
    let n = g.n() as isize;
    let r = f.rank();
    let inv12h = T::one() / (T::of(12.0) * g.h());
    let id = linalg::identity::<T>(r);
    let at_x = |i: isize, j: usize| -> CMat<T> {
        if i >= n {
            f.twist.across_x(&f.data[g.idx((i - n) as usize, j)], true) + &id * jump_x
        } else if i < 0 {
            f.twist.across_x(&f.data[g.idx((i + n) as usize, j)], false) - &id * jump_x
        } else {
            f.data[g.idx(i as usize, j)].clone()
        }
    };
    let at_y = |i: usize, j: isize| -> CMat<T> {
        if j >= n {
            f.twist.across_y(&f.data[g.idx(i, (j - n) as usize)], true)
        } else if j < 0 {
            f.twist.across_y(&f.data[g.idx(i, (j + n) as usize)], false)
        } else {
            f.data[g.idx(i, j as usize)].clone()
        }
    };
    let eight = Complex::new(T::of(8.0), T::zero());
    let scale = Complex::new(inv12h, T::zero());
    (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = g.ij(k);
            let (ii, jj) = (i as isize, j as isize);
            let dx = ((at_x(ii + 1, j) - at_x(ii - 1, j)) * eight - (at_x(ii + 2, j) - at_x(ii - 2, j)))
                * scale;
            let dy = ((at_y(i, jj + 1) - at_y(i, jj - 1)) * eight - (at_y(i, jj + 2) - at_y(i, jj - 2)))
                * scale;
            (dx, dy)
        })
        .unzip()
}

/// Fourier analysis of twisted endomorphism fields.
///
/// `X = Σ_{p,q} C^p S^q f_{pq}` where `f_{pq} e^{−2πi(αx + βy)}` is periodic with
/// `α = −dq/r`, `β = dp/r`; untwisted fields use scaled elementary matrices. Wavenumbers `k + α` are taken in `[−N/2, N/2)`.
pub struct TwistedFourier<T: Real> {
    n: usize,
    rank: usize,
    basis: Vec<CMat<T>>,
    shifts: Vec<(T, T)>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> TwistedFourier<T> {
    pub fn new(grid: &TorusGrid<T>, twist: &Twist<T>) -> Self {
        let r = twist.rank();
        let d = twist.degree();
        let mut basis = Vec::with_capacity(r * r);
        let mut shifts = Vec::with_capacity(r * r);
        let zero = Complex::new(T::zero(), T::zero());
        if twist.is_trivial() {
            // untwisted: elementary matrices, all periodic
            for a in 0..r {
                for b in 0..r {
                    let mut e = CMat::from_element(r, r, zero);
                    e[(a, b)] = Complex::new(T::of(r as f64).sqrt(), T::zero());
                    basis.push(e);
                    shifts.push((T::zero(), T::zero()));
                }
            }
        } else {
            let mut cp = linalg::identity::<T>(r);
            for p in 0..r {
                let mut sq = linalg::identity::<T>(r);
                for q in 0..r {
                    basis.push(&cp * &sq);
                    let alpha = -((d * q as i64).rem_euclid(r as i64) as f64) / r as f64;
                    let beta = ((d * p as i64).rem_euclid(r as i64) as f64) / r as f64;
                    shifts.push((T::of(alpha), T::of(beta)));
                    sq = &sq * twist.shift();
                }
                cp = &cp * twist.clock();
            }
        }
        let mut planner = FftPlanner::new();
        let n = grid.n();
        Self {
            n,
            rank: r,
            basis,
            shifts,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    fn fft2(&self, buf: &mut [Complex<T>], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.inv } else { &self.fwd };
        // rows: index j contiguous
        for row in buf.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![Complex::new(T::zero(), T::zero()); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = buf[i * n + j];
            }
            plan.process(&mut col);
            for i in 0..n {
                buf[i * n + j] = col[i];
            }
        }
        if inverse {
            let s = T::one() / T::of((n * n) as f64);
            for z in buf.iter_mut() {
                *z = *z * s;
            }
        }
    }

    pub(crate) fn wavenumber(&self, k: usize, shift: T) -> T {
        let n = T::of(self.n as f64);
        let half = n / T::of(2.0);
        let mut w = T::of(k as f64) + shift;
        if w >= half {
            w -= n;
        }
        if w < -half {
            w += n;
        }
        w
    }

    /// Number of twisted basis blocks (`r²`) and their wavenumber shifts.
    pub(crate) fn shifts(&self) -> &[(T, T)] {
        &self.shifts
    }

    fn phase(&self, a: T, b: T, x: T, y: T, sign: T) -> Complex<T> {
        let ang = sign * T::two_pi() * (a * x + b * y);
        Complex::new(ang.cos(), ang.sin())
    }

    /// Spectral coefficients of each periodic part `g_{pq}`.
    pub fn analyze(&self, data: &[CMat<T>]) -> Vec<Vec<Complex<T>>> {
        let n = self.n;
        let h = T::one() / T::of(n as f64);
        let inv_r = Complex::new(T::one() / T::of(self.rank as f64), T::zero());
        (0..self.basis.len())
            .into_par_iter()
            .map(|b| {
                let w = self.basis[b].adjoint();
                let (a, be) = self.shifts[b];
                let mut buf: Vec<Complex<T>> = (0..n * n)
                    .map(|k| {
                        let (i, j) = (k / n, k % n);
                        let (x, y) = (T::of(i as f64) * h, T::of(j as f64) * h);
                        (&w * &data[k]).trace() * inv_r * self.phase(a, be, x, y, -T::one())
                    })
                    .collect();
                self.fft2(&mut buf, false);
                buf
            })
            .collect()
    }

    /// Inverse of [`TwistedFourier::analyze`].
    pub fn synthesize(&self, coeffs: Vec<Vec<Complex<T>>>) -> Vec<CMat<T>> {
        let n = self.n;
        let h = T::one() / T::of(n as f64);
        let parts: Vec<Vec<Complex<T>>> = coeffs
            .into_par_iter()
            .enumerate()
            .map(|(b, mut buf)| {
                self.fft2(&mut buf, true);
                let (a, be) = self.shifts[b];
                for (k, z) in buf.iter_mut().enumerate() {
                    let (i, j) = (k / n, k % n);
                    let (x, y) = (T::of(i as f64) * h, T::of(j as f64) * h);
                    *z = *z * self.phase(a, be, x, y, T::one());
                }
                buf
            })
            .collect();
        let r = self.rank;
        (0..n * n)
            .into_par_iter()
            .map(|k| {
                let mut m = CMat::zeros(r, r);
                for (b, part) in parts.iter().enumerate() {
                    m += &self.basis[b] * part[k];
                }
                m
            })
            .collect()
    }

    /// Applies a Fourier multiplier `σ(kx, ky, nyquist_x, nyquist_y)` with shifted wavenumbers.
    pub fn apply(
        &self,
        data: &[CMat<T>],
        symbol: impl Fn(T, T, bool, bool) -> Complex<T> + Sync,
    ) -> Vec<CMat<T>> {
        let mut coeffs = self.analyze(data);
        let n = self.n;
        let half = -T::of(n as f64) / T::of(2.0);
        coeffs.par_iter_mut().enumerate().for_each(|(b, buf)| {
            let (a, be) = self.shifts[b];
            for (k, z) in buf.iter_mut().enumerate() {
                let kx = self.wavenumber(k / n, a);
                let ky = self.wavenumber(k % n, be);
                *z = *z * symbol(kx, ky, kx == half, ky == half);
            }
        });
        self.synthesize(coeffs)
    }

    /// `(∂_x X, ∂_y X)` with an optional additive seam jump in `x`.
    pub fn gradient(&self, field: &EndoField<T>, jump_x: Complex<T>) -> (Vec<CMat<T>>, Vec<CMat<T>>) {
        let g = &field.grid;
        let r = self.rank;
        let id = linalg::identity::<T>(r);
        // remove the affine part jump·x·Id, which carries the seam offset
        let periodic: Vec<CMat<T>> = if jump_x == Complex::new(T::zero(), T::zero()) {
            field.data.clone()
        } else {
            (0..g.len())
                .map(|k| {
                    let (x, _) = g.xy(k);
                    &field.data[k] - &id * (jump_x * x)
                })
                .collect()
        };
        let mut coeffs = self.analyze(&periodic);
        let n = self.n;
        let half = -T::of(n as f64) / T::of(2.0);
        let mut cy = coeffs.clone();
        let tp = T::two_pi();
        coeffs.par_iter_mut().zip(cy.par_iter_mut()).enumerate().for_each(|(b, (bx, by))| {
            let (a, be) = self.shifts[b];
            for k in 0..n * n {
                let kx = self.wavenumber(k / n, a);
                let ky = self.wavenumber(k % n, be);
                let mx = if kx == half { T::zero() } else { tp * kx };
                let my = if ky == half { T::zero() } else { tp * ky };
                bx[k] = bx[k] * Complex::new(T::zero(), mx);
                by[k] = by[k] * Complex::new(T::zero(), my);
            }
        });
        let mut dx = self.synthesize(coeffs);
        let dy = self.synthesize(cy);
        if jump_x != Complex::new(T::zero(), T::zero()) {
            for m in dx.iter_mut() {
                *m += &id * jump_x;
            }
        }
        (dx, dy)
    }
}
