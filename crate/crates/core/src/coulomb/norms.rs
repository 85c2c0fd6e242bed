use serde::Serialize;

use super::{CellField, Component, CoulombError, GaugeField, NodeField};
use crate::linalg::{self, CMat};
use crate::Real;

/// Fiberwise norm: operator norm `|·|_ρ` or Frobenius `|·|₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Fiber {
    Rho,
    Frobenius,
}

/// `L^p` and `W^{1,p}` with `p ∈ {1, 2, 4, ∞}` (`f64::INFINITY`), or `C^α` with `α ∈ (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Space {
    Lp(f64),
    W1p(f64),
    Holder(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormReport<T> {
    pub fiber: Fiber,
    pub space: Space,
    pub value: T,
}

/// Fields made of regular arrays of matrices on `Q`.
pub trait GridField<T: Real> {
    fn components(&self) -> Vec<&Component<T>>;
    fn spacing(&self) -> T;
}

impl<T: Real> GridField<T> for NodeField<T> {
    fn components(&self) -> Vec<&Component<T>> {
        vec![&self.values]
    }
    fn spacing(&self) -> T {
        self.h()
    }
}

impl<T: Real> GridField<T> for CellField<T> {
    fn components(&self) -> Vec<&Component<T>> {
        vec![&self.values]
    }
    fn spacing(&self) -> T {
        T::one() / T::of(self.n as f64)
    }
}

impl<T: Real> GridField<T> for GaugeField<T> {
    fn components(&self) -> Vec<&Component<T>> {
        vec![&self.ax, &self.ay]
    }
    fn spacing(&self) -> T {
        self.h()
    }
}

fn fiber_norm<T: Real>(m: &CMat<T>, f: Fiber) -> T {
    match f {
        Fiber::Rho => linalg::op_norm(m),
        Fiber::Frobenius => linalg::frobenius(m),
    }
}

/// `(Σ w|·|^p)` over weighted samples, or the max for `p = ∞`.
struct Acc<T> {
    p: f64,
    sum: T,
}

impl<T: Real> Acc<T> {
    fn new(p: f64) -> Self {
        Self { p, sum: T::zero() }
    }
    fn add(&mut self, v: T, w: T) {
        if self.p.is_infinite() {
            self.sum = self.sum.max(v);
        } else {
            self.sum += w * v.powf(T::of(self.p));
        }
    }
    fn root(&self) -> T {
        if self.p.is_infinite() {
            self.sum
        } else {
            self.sum.powf(T::of(1.0 / self.p))
        }
    }
}

fn check_p(p: f64) -> Result<(), CoulombError> {
    if [1.0, 2.0, 4.0].contains(&p) || p == f64::INFINITY {
        Ok(())
    } else {
        Err(CoulombError::UnsupportedNorm(format!("p = {p} (use 1, 2, 4 or ∞)")))
    }
}

/// Discrete norms with trapezoid quadrature. A 1-form combines its components as
/// `Σ_c ∫|A_c|^p`, which is the usual norm for `p = 2`; all norms are rooted.
/// Hölder seminorms are taken over a subsample of at most 33 points per axis.
pub fn grid_norms<T: Real>(field: &impl GridField<T>, fiber: Fiber, space: Space) -> Result<NormReport<T>, CoulombError> {
    let h = field.spacing();
    let comps = field.components();
    let value = match space {
        Space::Lp(p) => {
            check_p(p)?;
            let mut acc = Acc::new(p);
            for c in &comps {
                for i in 0..c.nx {
                    for j in 0..c.ny {
                        acc.add(fiber_norm(c.at(i, j), fiber), c.weight(i, j, h));
                    }
                }
            }
            acc.root()
        }
        Space::W1p(p) => {
            check_p(p)?;
            let mut acc = Acc::new(p);
            let inv_h = num_complex::Complex::new(T::one() / h, T::zero());
            for c in &comps {
                for i in 0..c.nx {
                    for j in 0..c.ny {
                        acc.add(fiber_norm(c.at(i, j), fiber), c.weight(i, j, h));
                        if i + 1 < c.nx {
                            acc.add(fiber_norm(&((c.at(i + 1, j) - c.at(i, j)) * inv_h), fiber), h * h);
                        }
                        if j + 1 < c.ny {
                            acc.add(fiber_norm(&((c.at(i, j + 1) - c.at(i, j)) * inv_h), fiber), h * h);
                        }
                    }
                }
            }
            acc.root()
        }
        Space::Holder(alpha) => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(CoulombError::UnsupportedNorm(format!("α = {alpha} outside (0, 1)")));
            }
            let a = T::of(alpha);
            let mut sup = T::zero();
            let mut semi = T::zero();
            for c in &comps {
                for m in &c.data {
                    sup = sup.max(fiber_norm(m, fiber));
                }
                let sx = c.nx.div_ceil(33).max(1);
                let sy = c.ny.div_ceil(33).max(1);
                let pts: Vec<(usize, usize)> = (0..c.nx)
                    .step_by(sx)
                    .flat_map(|i| (0..c.ny).step_by(sy).map(move |j| (i, j)))
                    .collect();
                for (k, &(i1, j1)) in pts.iter().enumerate() {
                    for &(i2, j2) in &pts[k + 1..] {
                        let dx = T::of(i1 as f64 - i2 as f64) * h;
                        let dy = T::of(j1 as f64 - j2 as f64) * h;
                        let d = (dx * dx + dy * dy).sqrt();
                        semi = semi.max(fiber_norm(&(c.at(i1, j1) - c.at(i2, j2)), fiber) / d.powf(a));
                    }
                }
            }
            sup + semi
        }
    };
    Ok(NormReport { fiber, space, value })
}

/// `(‖A‖_{ρ,W^{1,2}}, ‖F‖_{ρ,L²})`, the two sides of the Coulomb estimate.
pub fn ratio_norms<T: Real>(a: &GaugeField<T>, f: &CellField<T>) -> (T, T) {
    let w = grid_norms(a, Fiber::Rho, Space::W1p(2.0)).expect("supported").value;
    let l = grid_norms(f, Fiber::Rho, Space::Lp(2.0)).expect("supported").value;
    (w, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coulomb::random_gauge_field;
    use num_complex::Complex;
    use rand::SeedableRng;

    #[test]
    fn identity_field() {
        for r in 1..=4 {
            let id = NodeField::<f64>::identity(8, r).unwrap();
            let rho = grid_norms(&id, Fiber::Rho, Space::Lp(2.0)).unwrap().value;
            let fro = grid_norms(&id, Fiber::Frobenius, Space::Lp(2.0)).unwrap().value;
            assert!((rho - 1.0).abs() < 1e-14 && (fro - (r as f64).sqrt()).abs() < 1e-14);
        }
        let id = NodeField::<f64>::identity(8, 2).unwrap();
        assert!(grid_norms(&id, Fiber::Rho, Space::Lp(3.0)).is_err());
        assert!(grid_norms(&id, Fiber::Rho, Space::Holder(1.0)).is_err());
    }

    #[test]
    fn rho_below_frobenius() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let a = random_gauge_field(16, 3, &mut rng, 3, 1.0).unwrap();
        for m in a.ax.data.iter().chain(&a.ay.data) {
            assert!(linalg::op_norm(m) <= linalg::frobenius(m) + 1e-14);
        }
        for sp in [Space::Lp(1.0), Space::Lp(4.0), Space::W1p(2.0), Space::Lp(f64::INFINITY)] {
            let r = grid_norms(&a, Fiber::Rho, sp).unwrap().value;
            let f = grid_norms(&a, Fiber::Frobenius, sp).unwrap().value;
            assert!(r <= f + 1e-12);
        }
    }

    #[test]
    fn holder_of_linear_field() {
        let slope: f64 = 3.0;
        let f = NodeField::from_fn(64, 1, |x, _| CMat::from_element(1, 1, Complex::new(slope * x, 0.0))).unwrap();
        // the seminorm is attained across the whole square, where |p − q| = 1
        for alpha in [0.5, 0.9, 0.999] {
            let semi = grid_norms(&f, Fiber::Rho, Space::Holder(alpha)).unwrap().value - slope;
            assert!((semi - slope).abs() < 1e-12, "{semi}");
        }
    }
}
