use num_complex::Complex;
use rand::Rng;

use super::{EndoField, MetricField, TorusGrid, Twist, TwistedFourier};
use crate::linalg::{self, CMat};
use crate::Real;

fn unit<T: Real>(rng: &mut impl Rng) -> Complex<T> {
    Complex::new(T::of(rng.gen_range(-1.0..1.0)), T::of(rng.gen_range(-1.0..1.0)))
}

/// Smooth Hermitian twisted field with Fourier content `|k| ≤ modes`, scaled so that
/// the sup of the fiberwise operator norm equals `amplitude`.
pub fn random_hermitian_field<T: Real>(
    grid: &TorusGrid<T>,
    twist: &Twist<T>,
    rng: &mut impl Rng,
    modes: usize,
    amplitude: T,
) -> EndoField<T> {
    let tf = TwistedFourier::new(grid, twist);
    let n = grid.n();
    let cut = T::of(modes as f64 + 0.5);
    let zero = Complex::new(T::zero(), T::zero());
    let coeffs: Vec<Vec<Complex<T>>> = tf
        .shifts()
        .to_vec()
        .into_iter()
        .map(|(a, b)| {
            (0..n * n)
                .map(|k| {
                    let kx = tf.wavenumber(k / n, a);
                    let ky = tf.wavenumber(k % n, b);
                    // draw unconditionally so the stream does not depend on the cut
                    let z = unit::<T>(rng);
                    if kx.abs() <= cut && ky.abs() <= cut {
                        z
                    } else {
                        zero
                    }
                })
                .collect()
        })
        .collect();
    let data: Vec<CMat<T>> = tf.synthesize(coeffs).iter().map(linalg::hermitian_part).collect();
    let sup = data.iter().map(linalg::op_norm).fold(T::zero(), |a, b| a.max(b));
    let f = EndoField { grid: grid.clone(), twist: twist.clone(), data };
    if sup > T::zero() {
        f.scale(Complex::new(amplitude / sup, T::zero()))
    } else {
        f
    }
}

/// `R e^X R` with `K = R²` and `X` random Hermitian of spectral bound `bound`.
pub fn random_metric<T: Real>(
    base: &MetricField<T>,
    rng: &mut impl Rng,
    modes: usize,
    bound: T,
) -> MetricField<T> {
    let x = random_hermitian_field(base.grid(), base.twist(), rng, modes, bound);
    let (r, _) = base.sqrt_factors();
    let data = x
        .data
        .iter()
        .zip(&r)
        .map(|(x, r)| r * linalg::exp_hermitian(x) * r)
        .collect();
    MetricField::new(x.with_data(data)).expect("R e^X R is positive")
}

/// Smooth real periodic function with `|k| ≤ modes` and sup norm `amplitude`.
pub fn random_scalar_field<T: Real>(
    grid: &TorusGrid<T>,
    rng: &mut impl Rng,
    modes: usize,
    amplitude: T,
) -> Vec<T> {
    let m = modes as i64;
    let mut terms = Vec::new();
    for kx in -m..=m {
        for ky in -m..=m {
            terms.push((T::of(kx as f64), T::of(ky as f64), unit::<T>(rng)));
        }
    }
    let f: Vec<T> = (0..grid.len())
        .map(|k| {
            let (x, y) = grid.xy(k);
            terms.iter().fold(T::zero(), |acc, &(kx, ky, c)| {
                let ang = T::two_pi() * (kx * x + ky * y);
                acc + c.re * ang.cos() + c.im * ang.sin()
            })
        })
        .collect();
    let sup = f.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if sup > T::zero() {
        f.into_iter().map(|v| v * amplitude / sup).collect()
    } else {
        f
    }
}
