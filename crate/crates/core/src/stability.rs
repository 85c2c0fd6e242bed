//! Central charges, slopes, Euler pairings and the well-approximation inequality.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::contfrac::{
    approximation_product, below_one, convergents, theta_enclosure, ContFracError, ContinuedFraction, Enclosure, FloatInterval, QuadSurd};
use crate::farey::FareyTriangle;
use crate::Verdict;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("the zero class has no slope")]
    ZeroClass,
    #[error("rank must be nonnegative, got {0}")]
    NegativeRank(i64),
    #[error("need 1 <= rk S0 < rk S, got rk S0 = {rk0}, rk S = {rk}")]
    RankOrder { rk0: i64, rk: i64 },
    #[error("threshold L must be at least 1, got {0}")]
    ThresholdBelowOne(String),
    #[error("genus must be nonnegative, got {0}")]
    NegativeGenus(i64),
    #[error("vectors {0:?} and {1:?} are parallel")]
    Degenerate((i64, i64), (i64, i64)),
    #[error("(m, n) = (0, 0) gives the zero class")]
    ZeroCombination,
    #[error("integer overflow building class {0}")]
    Overflow(String),
    #[error(transparent)]
    ContFrac(#[from] ContFracError),
}

/// K-theory class `(deg, rk)` with central charge `−deg + i·rk`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KClass {
    pub deg: i64,
    pub rk: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slope {
    Finite(Rational64),
    Infinite,
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(r) => write!(f, "{r}"),
            Slope::Infinite => write!(f, "+inf"),
        }
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Slope::Finite(a), Slope::Finite(b)) => a.cmp(b),
            (Slope::Finite(_), Slope::Infinite) => Ordering::Less,
            (Slope::Infinite, Slope::Finite(_)) => Ordering::Greater,
            (Slope::Infinite, Slope::Infinite) => Ordering::Equal,
        }
    }
}

impl KClass {
    pub fn new(deg: i64, rk: i64) -> Result<Self, StabilityError> {
        if rk < 0 {
            return Err(StabilityError::NegativeRank(rk));
        }
        if deg == 0 && rk == 0 {
            return Err(StabilityError::ZeroClass);
        }
        Ok(Self { deg, rk })
    }

    /// `(Re Z, Im Z) = (−deg, rk)`.
    pub fn central_charge(&self) -> (i64, i64) {
        (-self.deg, self.rk)
    }

    fn slope_rational(&self) -> BigRational {
        BigRational::new(self.deg.into(), self.rk.into())
    }
}

/// `deg/rk`, or `+∞` for torsion classes.
pub fn slope(c: KClass) -> Result<Slope, StabilityError> {
    if c.deg == 0 && c.rk == 0 {
        return Err(StabilityError::ZeroClass);
    }
    if c.rk == 0 {
        Ok(Slope::Infinite)
    } else {
        Ok(Slope::Finite(Rational64::new(c.deg, c.rk)))
    }
}

/// `χ(F, E) = deg E·rk F − deg F·rk E + rk F·rk E·(1 − g)`.
pub fn euler_pairing(f: KClass, e: KClass, genus: i64) -> Result<i64, StabilityError> {
    if genus < 0 {
        return Err(StabilityError::NegativeGenus(genus));
    }
    Ok(e.deg * f.rk - f.deg * e.rk + f.rk * e.rk * (1 - genus))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeCount {
    /// Interior lattice points by enumeration.
    pub enumerated: u64,
    /// Interior lattice points by Pick's theorem.
    pub pick: u64,
}

fn det(a: (i64, i64), b: (i64, i64)) -> i128 {
    a.0 as i128 * b.1 as i128 - a.1 as i128 * b.0 as i128
}

/// Lattice points strictly inside `{s·v1 + t·v3 : 0 < s, t < 1}`.
pub fn lattice_interior_count(v1: (i64, i64), v3: (i64, i64)) -> Result<LatticeCount, StabilityError> {
    let d = det(v1, v3);
    if d == 0 {
        return Err(StabilityError::Degenerate(v1, v3));
    }
    let xs = [0, v1.0, v3.0, v1.0 + v3.0];
    let ys = [0, v1.1, v3.1, v1.1 + v3.1];
    let (x0, x1) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
    let (y0, y1) = (*ys.iter().min().unwrap(), *ys.iter().max().unwrap());
    let ad = d.abs();
    let sgn = d.signum();
    let mut enumerated = 0u64;
    for x in x0..=x1 {
        for y in y0..=y1 {
            // s = det(p, v3)/d, t = det(v1, p)/d
            let s = det((x, y), v3) * sgn;
            let t = det(v1, (x, y)) * sgn;
            if s > 0 && s < ad && t > 0 && t < ad {
                enumerated += 1;
            }
        }
    }
    let g1 = v1.0.gcd(&v1.1) as i128;
    let g3 = v3.0.gcd(&v3.1) as i128;
    let boundary = 2 * (g1 + g3);
    let pick = (ad - boundary / 2 + 1) as u64;
    Ok(LatticeCount { enumerated, pick })
}

/// Inputs to the well-approximation inequality.
#[derive(Clone, Debug)]
pub struct WellApproxParams {
    pub l: BigRational,
    pub theta: Enclosure,
    pub genus: i64,
}

impl WellApproxParams {
    pub fn new(l: BigRational, theta: Enclosure, genus: i64) -> Result<Self, StabilityError> {
        if l < BigRational::from_integer(1.into()) {
            return Err(StabilityError::ThresholdBelowOne(l.to_string()));
        }
        if genus < 1 {
            return Err(StabilityError::NegativeGenus(genus));
        }
        Ok(Self { l, theta, genus })
    }

    /// θ taken from a continued fraction (exact when finite or periodic).
    pub fn from_cf(l: BigRational, cf: &ContinuedFraction, genus: i64) -> Result<Self, StabilityError> {
        Self::new(l, theta_enclosure(cf), genus)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WellApproxResult {
    pub verdict: Verdict,
    /// `RHS − LHS`.
    pub margin: Enclosure,
    pub lhs: Enclosure,
    pub rhs: BigRational,
}

/// `L(θ − μ(S))·rk S < rk S₀·(μ(S) − μ(S₀))`.
pub fn well_approx_check(
    s: KClass,
    s0: KClass,
    params: &WellApproxParams,
) -> Result<WellApproxResult, StabilityError> {
    if !(1 <= s0.rk && s0.rk < s.rk) {
        return Err(StabilityError::RankOrder { rk0: s0.rk, rk: s.rk });
    }
    let mu = s.slope_rational();
    let mu0 = s0.slope_rational();
    let rk = BigRational::from_integer(s.rk.into());
    let rhs = BigRational::from_integer(s0.rk.into()) * (&mu - &mu0);
    let scale = &params.l * &rk;
    let lhs = match &params.theta {
        Enclosure::Point(t) => Enclosure::Point(
            t.add_rational(&-&mu)
                .try_mul(&QuadSurd::from_rational(&scale))
                .expect("rational factor"),
        ),
        Enclosure::Interval { lo, hi } => Enclosure::Interval {
            lo: (lo - &mu) * &scale,
            hi: (hi - &mu) * &scale,
        },
    };
    let margin = match &lhs {
        Enclosure::Point(x) => Enclosure::Point(x.neg().add_rational(&rhs)),
        Enclosure::Interval { lo, hi } => Enclosure::Interval {
            lo: &rhs - hi,
            hi: &rhs - lo,
        },
    };
    let verdict = match &margin {
        Enclosure::Point(m) => Verdict::from_bool(m.signum() == Ordering::Greater),
        Enclosure::Interval { lo, hi } => {
            if lo > &BigRational::zero() {
                Verdict::True
            } else if hi <= &BigRational::zero() {
                Verdict::False
            } else {
                Verdict::Undecided
            }
        }
    };
    Ok(WellApproxResult { verdict, margin, lhs, rhs })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsequenceEntry {
    pub i: usize,
    #[serde(serialize_with = "crate::contfrac::ser_bigint")]
    pub p: BigInt,
    #[serde(serialize_with = "crate::contfrac::ser_bigint")]
    pub q: BigInt,
    /// `(θ − p_{2i}/q_{2i})·q_{2i}²·L`.
    pub product: FloatInterval,
    /// Exact symbolic product when θ is a quadratic surd.
    pub exact: Option<String>,
    /// `product < 1`.
    pub pass: Verdict,
}

/// Even convergents `i = 0..count` with the scaled approximation product.
pub fn select_subsequence(
    cf: &ContinuedFraction,
    l: &BigRational,
    count: usize,
) -> Result<Vec<SubsequenceEntry>, StabilityError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if l < &BigRational::from_integer(1.into()) {
        return Err(StabilityError::ThresholdBelowOne(l.to_string()));
    }
    let theta = theta_enclosure(cf);
    let conv = convergents(cf, 2 * (count - 1))?;
    Ok((0..count)
        .map(|i| {
            let c = &conv[2 * i];
            let prod = approximation_product(&theta, &c.p, &c.q, l);
            SubsequenceEntry {
                i,
                p: c.p.clone(),
                q: c.q.clone(),
                product: prod.floats(),
                exact: match &prod {
                    Enclosure::Point(s) => Some(s.to_string()),
                    Enclosure::Interval { .. } => None,
                },
                pass: below_one(&prod),
            }
        })
        .collect())
}

/// `deg = m p₁ + n p₃`, `rk = m q₁ + n q₃`.
pub fn charge_combine(t: &FareyTriangle, m: u64, n: u64) -> Result<KClass, StabilityError> {
    if m == 0 && n == 0 {
        return Err(StabilityError::ZeroCombination);
    }
    let (m, n) = (m as i64, n as i64);
    KClass::new(
        m * t.left.p() + n * t.right.p(),
        m * t.left.q() + n * t.right.q(),
    )
}

/// Classes `(p_{2i}, q_{2i})` for `i < count`.
pub fn build_sequence(cf: &ContinuedFraction, count: usize) -> Result<Vec<KClass>, StabilityError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let conv = convergents(cf, 2 * (count - 1))?;
    (0..count)
        .map(|i| {
            let c = &conv[2 * i];
            match (c.p.to_i64(), c.q.to_i64()) {
                (Some(p), Some(q)) => KClass::new(p, q),
                _ => Err(StabilityError::Overflow(format!("{}/{}", c.p, c.q))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::PrimitiveVector;

    fn k(deg: i64, rk: i64) -> KClass {
        KClass::new(deg, rk).unwrap()
    }

    fn golden_conj() -> ContinuedFraction {
        ContinuedFraction::periodic(0.into(), vec![], vec![1.into()]).unwrap()
    }

    fn tri(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> FareyTriangle {
        FareyTriangle {
            left: PrimitiveVector::new(a.0, a.1).unwrap(),
            middle: PrimitiveVector::new(b.0, b.1).unwrap(),
            right: PrimitiveVector::new(c.0, c.1).unwrap(),
        }
    }

    #[test]
    fn slopes() {
        assert_eq!(slope(k(1, 2)).unwrap(), Slope::Finite(Rational64::new(1, 2)));
        assert_eq!(slope(k(1, 0)).unwrap(), Slope::Infinite);
        assert_eq!(slope(k(-3, 5)).unwrap(), Slope::Finite(Rational64::new(-3, 5)));
        assert!(KClass::new(0, 0).is_err());
    }

    #[test]
    fn euler_pairings() {
        assert_eq!(euler_pairing(k(1, 1), k(0, 1), 2).unwrap(), -2);
        assert_eq!(euler_pairing(k(1, 1), k(0, 1), 1).unwrap(), -1);
        assert_eq!(euler_pairing(k(0, 1), k(0, 1), 1).unwrap(), 0);
    }

    #[test]
    fn lattice_counts() {
        let c = lattice_interior_count((0, 1), (-1, 1)).unwrap();
        assert_eq!((c.enumerated, c.pick), (0, 0));
        let c = lattice_interior_count((0, 2), (-1, 0)).unwrap();
        assert_eq!((c.enumerated, c.pick), (0, 0));
        let c = lattice_interior_count((1, 0), (0, 1)).unwrap();
        assert_eq!(c.enumerated, 0);
        let c = lattice_interior_count((2, 1), (1, 3)).unwrap();
        assert_eq!(c.enumerated, c.pick);
        assert_eq!(c.enumerated, 4);
        assert!(lattice_interior_count((1, 2), (2, 4)).is_err());
    }

    #[test]
    fn well_approx_examples() {
        let params = WellApproxParams::from_cf(BigRational::from_integer(1.into()), &golden_conj(), 1).unwrap();
        let r = well_approx_check(k(1, 2), k(0, 1), &params).unwrap();
        assert_eq!(r.verdict, Verdict::True);
        match &r.lhs {
            Enclosure::Point(s) => assert!((s.to_f64() - 0.236_068).abs() < 1e-6),
            _ => unreachable!(),
        }
        assert_eq!(r.rhs, BigRational::new(1.into(), 2.into()));
        // equal slopes destabilize
        let r = well_approx_check(k(2, 4), k(1, 2), &params).unwrap();
        assert_eq!(r.rhs, BigRational::zero());
        assert_eq!(r.verdict, Verdict::False);
        let r = well_approx_check(k(1, 3), k(0, 1), &params).unwrap();
        assert_eq!(r.verdict, Verdict::False);
        let p = WellApproxParams::new(
            BigRational::from_integer(3.into()),
            Enclosure::Point(QuadSurd::from_rational(&BigRational::new(1.into(), 2.into()))),
            1,
        )
        .unwrap();
        assert!(well_approx_check(k(1, 2), k(0, 1), &p).unwrap().verdict.is_true());
        assert!(well_approx_check(k(1, 2), k(1, 3), &params).is_err());
    }

    #[test]
    fn golden_products() {
        let one = BigRational::from_integer(1.into());
        let seq = select_subsequence(&golden_conj(), &one, 4).unwrap();
        let want = [0.618_034, 0.472_136, 0.450_850, 0.447_744];
        for (e, w) in seq.iter().zip(want) {
            assert!((e.product.lo - w).abs() < 1e-5, "{:?}", e.product);
            assert!(e.pass.is_true());
        }
        let three = BigRational::from_integer(3.into());
        let seq = select_subsequence(&golden_conj(), &three, 6).unwrap();
        assert!(seq[2..].iter().all(|e| e.pass == Verdict::False));
    }

    #[test]
    fn charges_and_sequences() {
        let t = tri((0, 1), (1, 2), (1, 1));
        assert_eq!(charge_combine(&t, 1, 1).unwrap(), k(1, 2));
        assert_eq!(charge_combine(&t, 2, 3).unwrap(), k(3, 5));
        assert_eq!(charge_combine(&t, 1, 0).unwrap(), k(0, 1));
        let seq = build_sequence(&golden_conj(), 4).unwrap();
        assert_eq!(seq, vec![k(0, 1), k(1, 2), k(3, 5), k(8, 13)]);
        let sqrt2 = ContinuedFraction::periodic(1.into(), vec![], vec![2.into()]).unwrap();
        assert_eq!(build_sequence(&sqrt2, 3).unwrap(), vec![k(1, 1), k(7, 5), k(41, 29)]);
    }
}
