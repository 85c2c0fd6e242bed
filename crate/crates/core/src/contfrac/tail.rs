use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{convergents, eval_finite, CfSource, ContFracError, ContinuedFraction, QuadSurd};

/// A closed real interval with exact endpoints.
#[derive(Clone, Debug, PartialEq)]
pub enum Enclosure {
    Point(QuadSurd),
    Interval { lo: BigRational, hi: BigRational },
}

/// Float rendering, rounded outward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FloatInterval {
    pub lo: f64,
    pub hi: f64,
}

impl FloatInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl Enclosure {
    pub fn is_point(&self) -> bool {
        matches!(self, Enclosure::Point(_))
    }

    pub fn floats(&self) -> FloatInterval {
        match self {
            Enclosure::Point(s) => {
                let v = s.to_f64();
                if s.is_rational() && (BigRational::from_float(v).as_ref() == s.to_rational().as_ref()) {
                    FloatInterval { lo: v, hi: v }
                } else {
                    FloatInterval {
                        lo: v.next_down(),
                        hi: v.next_up(),
                    }
                }
            }
            Enclosure::Interval { lo, hi } => FloatInterval {
                lo: rat_f64(lo).next_down(),
                hi: rat_f64(hi).next_up(),
            },
        }
    }

    /// Shift both ends by an exact rational.
    pub fn add_rational(&self, r: &BigRational) -> Enclosure {
        match self {
            Enclosure::Point(s) => Enclosure::Point(s.add_rational(r)),
            Enclosure::Interval { lo, hi } => Enclosure::Interval {
                lo: lo + r,
                hi: hi + r,
            },
        }
    }

    /// `true` if `other` lies inside `self`.
    pub fn contains(&self, other: &Enclosure) -> bool {
        match (self, other) {
            (Enclosure::Interval { lo, hi }, Enclosure::Interval { lo: l2, hi: h2 }) => {
                lo <= l2 && h2 <= hi
            }
            (Enclosure::Interval { lo, hi }, Enclosure::Point(s)) => {
                s.cmp_rational(lo).is_ge() && s.cmp_rational(hi).is_le()
            }
            (Enclosure::Point(a), Enclosure::Point(b)) => a == b,
            (Enclosure::Point(_), Enclosure::Interval { lo, hi }) => lo == hi && self.contains(&Enclosure::Point(QuadSurd::from_rational(lo))),
        }
    }
}

pub(crate) fn rat_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact value of the purely periodic continued fraction `[(b_0; b_1, …, b_{p−1})]`.
pub(crate) fn purely_periodic(block: &[BigInt]) -> QuadSurd {
    let cf = ContinuedFraction::finite(block[0].clone(), block[1..].to_vec())
        .expect("digits validated upstream");
    let conv = convergents(&cf, block.len() - 1).expect("within range");
    let n = block.len();
    let (p, q) = (&conv[n - 1].p, &conv[n - 1].q);
    let (pp, qq) = if n >= 2 {
        (conv[n - 2].p.clone(), conv[n - 2].q.clone())
    } else {
        (BigInt::one(), BigInt::zero())
    };
    // y = (p y + pp)/(q y + qq)  ⇒  q y² + (qq − p) y − pp = 0, positive root
    let b = p - &qq;
    let disc = &b * &b + BigInt::from(4) * q * &pp;
    QuadSurd::new_lenient(b, BigInt::one(), disc, BigInt::from(2) * q)
        .expect("discriminant is positive")
}

/// `[d_0; d_1, …, d_{k−1}, y]`.
fn prepend(prefix: &[BigInt], y: QuadSurd) -> QuadSurd {
    prefix.iter().rev().fold(y, |x, a| {
        x.recip().expect("complete quotients exceed 1").add_int(a)
    })
}

/// Exact `[a_k; a_{k+1}, …]` of a periodic continued fraction.
pub fn periodic_tail(cf: &ContinuedFraction, k: usize) -> QuadSurd {
    let CfSource::Periodic { preperiod, period } = *cf.source() else {
        panic!("periodic_tail needs a periodic source");
    };
    let start = k.max(preperiod + 1);
    let block: Vec<BigInt> = (start..start + period)
        .map(|i| cf.digit(i).unwrap().clone())
        .collect();
    let prefix: Vec<BigInt> = (k..start).map(|i| cf.digit(i).unwrap().clone()).collect();
    prepend(&prefix, purely_periodic(&block))
}

/// `[0; a_n, a_{n−1}, …, a_1] = q_{n−1}/q_n`, with value 0 at `n = 0`.
pub fn reversed_tail(cf: &ContinuedFraction, n: usize) -> Result<BigRational, ContFracError> {
    if n == 0 {
        return Ok(BigRational::zero());
    }
    let conv = convergents(cf, n)?;
    Ok(BigRational::new(conv[n - 1].q.clone(), conv[n].q.clone()))
}

/// Rigorous enclosure of `[a_k; a_{k+1}, …]`.
///
/// Periodic sources give the exact point. Otherwise the tail is bracketed by
/// `[a_k; …, a_m]` and `[a_k; …, a_m + 1]` with `m = min(k + depth, last known digit)`.
pub fn tail_value(cf: &ContinuedFraction, k: usize, depth: usize) -> Result<Enclosure, ContFracError> {
    match cf.source() {
        CfSource::Periodic { .. } => Ok(Enclosure::Point(periodic_tail(cf, k))),
        CfSource::Finite => {
            let avail = cf.available_depth().unwrap();
            cf.require(k)?;
            let m = (k + depth).min(avail);
            let digits: Vec<BigInt> = (k..=m).map(|i| cf.digit(i).unwrap().clone()).collect();
            if m == avail {
                Ok(Enclosure::Point(QuadSurd::from_rational(&eval_finite(&digits))))
            } else {
                Ok(bracket(digits))
            }
        }
        CfSource::Truncated { .. } => {
            let avail = cf.available_depth().unwrap();
            cf.require(k)?;
            let m = (k + depth).min(avail);
            let digits: Vec<BigInt> = (k..=m).map(|i| cf.digit(i).unwrap().clone()).collect();
            Ok(bracket(digits))
        }
    }
}

fn bracket(mut digits: Vec<BigInt>) -> Enclosure {
    let a = eval_finite(&digits);
    *digits.last_mut().unwrap() += 1;
    let b = eval_finite(&digits);
    if a <= b {
        Enclosure::Interval { lo: a, hi: b }
    } else {
        Enclosure::Interval { lo: b, hi: a }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&a| BigInt::from(a)).collect()
    }

    #[test]
    fn periodic_tails_solve_their_fixed_point() {
        let twos = ContinuedFraction::periodic(2.into(), vec![], big(&[2])).unwrap();
        let t = periodic_tail(&twos, 0);
        // x = 2 + 1/x
        assert_eq!(t.recip().unwrap().add_int(&BigInt::from(2)), t);
        assert!((t.to_f64() - 2.414_213_56).abs() < 1e-8);
        let ones = ContinuedFraction::periodic(1.into(), vec![], big(&[1])).unwrap();
        let t = periodic_tail(&ones, 5);
        assert_eq!(t.recip().unwrap().add_int(&BigInt::from(1)), t);
        assert!((t.to_f64() - 1.618_033_99).abs() < 1e-8);
    }

    #[test]
    fn finite_tail_is_exact() {
        let cf = ContinuedFraction::from_i64(&[7]).unwrap();
        assert_eq!(
            tail_value(&cf, 0, 3).unwrap(),
            Enclosure::Point(QuadSurd::from_int(7))
        );
    }

    #[test]
    fn truncated_tails_nest_and_shrink() {
        let digits: Vec<i64> = (1..=40).map(|i| 1 + (i % 3)).collect();
        let cf = ContinuedFraction::truncated(0.into(), big(&digits), 0.0, 0.0, false).unwrap();
        let mut prev = tail_value(&cf, 3, 1).unwrap();
        for depth in 2..30 {
            let cur = tail_value(&cf, 3, depth).unwrap();
            assert!(prev.contains(&cur), "depth {depth}");
            assert!(cur.floats().width() <= prev.floats().width());
            prev = cur;
        }
    }

    #[test]
    fn reversed_tail_matches_direct_evaluation() {
        let cf = ContinuedFraction::from_i64(&[0, 3, 1, 4, 1, 5, 9]).unwrap();
        for n in 1..=6 {
            let mut rev: Vec<BigInt> = vec![BigInt::zero()];
            rev.extend((1..=n).rev().map(|i| cf.digit(i).unwrap().clone()));
            assert_eq!(reversed_tail(&cf, n).unwrap(), eval_finite(&rev));
        }
    }
}
