use nalgebra::DVector;
use num_complex::Complex;
use num_rational::Rational64;
use num_traits::Zero;
use rayon::prelude::*;

use super::{SectionField, TorusError, TorusGrid, Twist};
use crate::Real;

/// Holomorphic section of the rank-`r`, degree-`d` model built from theta series.
///
/// Component `k` is `e^{iπμ(2xy + τy²)} Σ_m exp(iπτ m²/μ + 2πi m z)` over
/// `m ∈ (Z − dk/r) ∩ (j/r + μZ)`; the orbit `j ∈ {0, …, d−1}` labels the section.
#[derive(Clone, Debug)]
pub struct ThetaSection<T: Real> {
    twist: Twist<T>,
    tau: Complex<T>,
    orbit: i64,
    phase: Complex<T>,
    /// `m_k` for each component; the sum runs over `m_k + dZ`.
    offsets: Vec<T>,
}

fn cexp<T: Real>(re: T, im: T) -> Complex<T> {
    let m = re.exp();
    Complex::new(m * im.cos(), m * im.sin())
}

fn inverse_mod(d: i64, r: i64) -> i64 {
    if r == 1 {
        return 0;
    }
    (1..r).find(|x| (d * x).rem_euclid(r) == 1).expect("coprime")
}

impl<T: Real> ThetaSection<T> {
    /// `characteristic = (a, b)` with `a·d ∈ Z` choosing the orbit `j = a·d mod d`
    /// and `b·d/r ∈ Z`; `b` only multiplies the section by `e^{2πi ab}`.
    pub fn new(
        twist: &Twist<T>,
        tau: Complex<T>,
        characteristic: (Rational64, Rational64),
    ) -> Result<Self, TorusError> {
        let d = twist.degree();
        let r = twist.rank() as i64;
        if d <= 0 {
            return Err(TorusError::NoSections(d));
        }
        let (a, b) = characteristic;
        let ad = a * Rational64::from_integer(d);
        let bd = b * Rational64::new(d, r);
        if !ad.is_integer() || !bd.is_integer() {
            return Err(TorusError::BadCharacteristic {
                a: a.to_string(),
                b: b.to_string(),
                d,
                r: twist.rank(),
            });
        }
        let j = ad.to_integer().rem_euclid(d);
        let dinv = inverse_mod(d.rem_euclid(r), r);
        let offsets = (0..r)
            .map(|k| {
                let t = (-k - j * dinv).rem_euclid(r);
                T::of((j + d * t) as f64 / r as f64)
            })
            .collect();
        let ab = a * b;
        let ang = T::two_pi() * T::of(*ab.numer() as f64 / *ab.denom() as f64);
        Ok(Self {
            twist: twist.clone(),
            tau,
            orbit: j,
            phase: Complex::new(ang.cos(), ang.sin()),
            offsets,
        })
    }

    pub fn orbit(&self) -> i64 {
        self.orbit
    }

    /// Value at lattice coordinates `(x, y)`.
    pub fn eval(&self, x: T, y: T) -> DVector<Complex<T>> {
        let mu = self.twist.mu();
        let d = T::of(self.twist.degree() as f64);
        let (tr, ti) = (self.tau.re, self.tau.im);
        let pi = T::pi();
        let log_mag = |m: T| -pi * ti * m * m / mu - T::of(2.0) * pi * m * ti * y;
        let term = |m: T| {
            let re = log_mag(m);
            let im = pi * tr * m * m / mu + T::two_pi() * m * (x + tr * y);
            cexp(re, im)
        };
        let cutoff = T::of(1e-17).ln();
        let pre = {
            let re = -pi * mu * ti * y * y;
            let im = pi * mu * (T::of(2.0) * x * y + tr * y * y);
            cexp(re, im) * self.phase
        };
        let comps = self.offsets.iter().map(|&mk| {
            // the term magnitude peaks at m = −μy
            let s0 = ((-mu * y - mk) / d).round();
            let peak = log_mag(mk + d * s0);
            let mut acc = term(mk + d * s0);
            for dir in [T::one(), -T::one()] {
                let mut s = s0 + dir;
                loop {
                    let m = mk + d * s;
                    let lm = log_mag(m);
                    acc += term(m);
                    if lm - peak < cutoff && (m + mu * y) * dir > T::zero() {
                        break;
                    }
                    s += dir;
                }
            }
            acc * pre
        });
        DVector::from_iterator(self.offsets.len(), comps)
    }

    pub fn sample(&self, grid: &TorusGrid<T>) -> SectionField<T> {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (x, y) = grid.xy(k);
                self.eval(x, y)
            })
            .collect();
        SectionField {
            grid: grid.clone(),
            twist: self.twist.clone(),
            data,
        }
    }

    /// Relative mismatch of `ψ(x+1, y) = e^{2πiμy} C ψ` and `ψ(x, y+1) = S ψ`.
    pub fn quasi_periodicity_residual(&self, samples: usize) -> T {
        let mu = self.twist.mu();
        let mut worst = T::zero();
        let mut scale = T::zero();
        for a in 0..samples {
            for b in 0..samples {
                let x = T::of(a as f64 / samples as f64);
                let y = T::of(b as f64 / samples as f64);
                let v = self.eval(x, y);
                scale = scale.max(v.norm());
                let ang = T::two_pi() * mu * y;
                let fx = self.twist.clock() * &v * Complex::new(ang.cos(), ang.sin());
                let fy = self.twist.shift() * &v;
                worst = worst
                    .max((self.eval(x + T::one(), y) - fx).norm())
                    .max((self.eval(x, y + T::one()) - fy).norm());
            }
        }
        worst / scale
    }
}

/// The section with characteristic `(a, b)`, sampled on the grid.
pub fn theta_section<T: Real>(
    twist: &Twist<T>,
    grid: &TorusGrid<T>,
    characteristic: (Rational64, Rational64),
) -> Result<SectionField<T>, TorusError> {
    Ok(ThetaSection::new(twist, grid.tau(), characteristic)?.sample(grid))
}

/// One section per orbit `j = 0, …, d−1` (characteristics `(j/d, 0)`).
pub fn theta_sections<T: Real>(twist: &Twist<T>, grid: &TorusGrid<T>) -> Result<Vec<SectionField<T>>, TorusError> {
    let d = twist.degree();
    if d <= 0 {
        return Err(TorusError::NoSections(d));
    }
    (0..d)
        .map(|j| theta_section(twist, grid, (Rational64::new(j, d), Rational64::zero())))
        .collect()
}
