//! Continued fractions: expansion, convergents, tails, parity Lagrange
//! numbers and Gauss-map digit statistics.

mod gauss;
mod lagrange;
mod surd;
mod tail;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

pub use gauss::{gauss_digit_density, gauss_reference_density, DensityEstimate};
pub(crate) use lagrange::below_one;
pub use lagrange::{
    approximation_check, approximation_product, periodic_lagrange, theta_enclosure, lagrange_estimate, ApproxIndex, LagrangeEstimate, Parity,
    PeriodicLagrange,
};
pub use surd::QuadSurd;
pub use tail::{periodic_tail, reversed_tail, tail_value, Enclosure, FloatInterval};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContFracError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("radicand {0} is a perfect square")]
    SquareRadicand(String),
    #[error("radicand {0} is not positive")]
    NotARealSurd(String),
    #[error("cannot combine surds with radicands {0} and {1}")]
    MixedRadicands(String, String),
    #[error("digit a_{index} = {value} must be a positive integer")]
    NonPositiveDigit { index: usize, value: String },
    #[error("periodic continued fraction needs a nonempty period")]
    EmptyPeriod,
    #[error("max_depth must be at least 1")]
    ZeroDepth,
    #[error("float input {0} is not finite")]
    NonFinite(f64),
    #[error("requested index {requested} exceeds available depth {available}")]
    DepthExceeded { requested: usize, available: usize },
    #[error("semiconvergent m_max = {m_max} exceeds a_(i+2) = {limit}")]
    SemiconvergentRange { m_max: String, limit: String },
}

/// Where the digits came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CfSource {
    /// Exact rational input; the digit list is complete.
    Finite,
    /// `a_1..a_preperiod` followed by a repeating block of `period` digits.
    Periodic { preperiod: usize, period: usize },
    /// Digits of a real number known only approximately (or a rational cut short).
    Truncated {
        value: f64,
        depth: usize,
        /// Rigorous bound on `|θ − [a_0; …, a_depth]|`.
        error_bound: f64,
        /// True when the input precision ran out before `max_depth`.
        exhausted: bool,
    },
}

/// `θ = [a_0; a_1, a_2, …]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuedFraction {
    a0: BigInt,
    /// `a_1, a_2, …`; for periodic sources the preperiod followed by one period.
    digits: Vec<BigInt>,
    source: CfSource,
}

fn check_digits(digits: &[BigInt]) -> Result<(), ContFracError> {
    for (k, a) in digits.iter().enumerate() {
        if !a.is_positive() {
            return Err(ContFracError::NonPositiveDigit {
                index: k + 1,
                value: a.to_string(),
            });
        }
    }
    Ok(())
}

impl ContinuedFraction {
    pub fn finite(a0: BigInt, digits: Vec<BigInt>) -> Result<Self, ContFracError> {
        check_digits(&digits)?;
        Ok(Self {
            a0,
            digits,
            source: CfSource::Finite,
        })
    }

    /// `[a_0; pre…, (per…)]` with the block `per` repeating forever.
    pub fn periodic(a0: BigInt, pre: Vec<BigInt>, per: Vec<BigInt>) -> Result<Self, ContFracError> {
        if per.is_empty() {
            return Err(ContFracError::EmptyPeriod);
        }
        let preperiod = pre.len();
        let period = per.len();
        let mut digits = pre;
        digits.extend(per);
        check_digits(&digits)?;
        Ok(Self {
            a0,
            digits,
            source: CfSource::Periodic { preperiod, period },
        })
    }

    /// Digits of a number known to `error_bound` after the listed digits.
    pub fn truncated(
        a0: BigInt,
        digits: Vec<BigInt>,
        value: f64,
        error_bound: f64,
        exhausted: bool,
    ) -> Result<Self, ContFracError> {
        check_digits(&digits)?;
        let depth = digits.len();
        Ok(Self {
            a0,
            digits,
            source: CfSource::Truncated {
                value,
                depth,
                error_bound,
                exhausted,
            },
        })
    }

    /// Convenience for small digit lists: `from_i64(&[a0, a1, …])`, finite.
    pub fn from_i64(all: &[i64]) -> Result<Self, ContFracError> {
        let (a0, rest) = all.split_first().ok_or(ContFracError::ZeroDepth)?;
        Self::finite(BigInt::from(*a0), rest.iter().map(|&a| BigInt::from(a)).collect())
    }

    pub fn source(&self) -> &CfSource {
        &self.source
    }

    pub fn a0(&self) -> &BigInt {
        &self.a0
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.source, CfSource::Periodic { .. })
    }

    /// Number of known digits after `a_0`; `None` for periodic (unbounded).
    pub fn available_depth(&self) -> Option<usize> {
        match self.source {
            CfSource::Periodic { .. } => None,
            _ => Some(self.digits.len()),
        }
    }

    /// Stored digits `a_1, …` (for periodic sources: preperiod then one period).
    pub fn stored_digits(&self) -> &[BigInt] {
        &self.digits
    }

    /// `a_i`, if known.
    pub fn digit(&self, i: usize) -> Option<&BigInt> {
        if i == 0 {
            return Some(&self.a0);
        }
        let k = i - 1;
        match self.source {
            CfSource::Periodic { preperiod, period } => {
                if k < preperiod {
                    Some(&self.digits[k])
                } else {
                    Some(&self.digits[preperiod + (k - preperiod) % period])
                }
            }
            _ => self.digits.get(k),
        }
    }

    fn require(&self, i: usize) -> Result<(), ContFracError> {
        match self.available_depth() {
            Some(avail) if i > avail => Err(ContFracError::DepthExceeded {
                requested: i,
                available: avail,
            }),
            _ => Ok(()),
        }
    }

    /// `a_0, …, a_n` as owned integers.
    pub fn digits_through(&self, n: usize) -> Result<Vec<BigInt>, ContFracError> {
        self.require(n)?;
        Ok((0..=n).map(|i| self.digit(i).unwrap().clone()).collect())
    }

    /// Exact value when the source determines it (finite or periodic).
    pub fn exact_value(&self) -> Option<QuadSurd> {
        match self.source {
            CfSource::Finite => {
                let digits: Vec<BigInt> = std::iter::once(self.a0.clone())
                    .chain(self.digits.iter().cloned())
                    .collect();
                Some(QuadSurd::from_rational(&eval_finite(&digits)))
            }
            CfSource::Periodic { .. } => Some(periodic_tail(self, 0)),
            CfSource::Truncated { .. } => None,
        }
    }

    /// Compact textual form, e.g. `[1; 2, (1, 3)]`.
    pub fn render(&self) -> String {
        let join = |v: &[BigInt]| {
            v.iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self.source {
            CfSource::Periodic { preperiod, .. } => {
                let (pre, per) = self.digits.split_at(preperiod);
                if pre.is_empty() {
                    format!("[{}; ({})]", self.a0, join(per))
                } else {
                    format!("[{}; {}, ({})]", self.a0, join(pre), join(per))
                }
            }
            CfSource::Truncated { .. } => format!("[{}; {}, …]", self.a0, join(&self.digits)),
            CfSource::Finite => {
                if self.digits.is_empty() {
                    format!("[{}]", self.a0)
                } else {
                    format!("[{}; {}]", self.a0, join(&self.digits))
                }
            }
        }
    }
}

/// `[d_0; d_1, …, d_n]` as an exact rational.
pub(crate) fn eval_finite(digits: &[BigInt]) -> BigRational {
    let mut it = digits.iter().rev();
    let mut x = BigRational::from_integer(it.next().cloned().unwrap_or_default());
    for a in it {
        x = x.recip() + BigRational::from_integer(a.clone());
    }
    x
}

/// Input accepted by [`cf_expand`].
#[derive(Clone, Debug)]
pub enum CfInput {
    Rational(BigRational),
    Surd(QuadSurd),
    Float(f64),
}

/// Expands `x` into a continued fraction.
///
/// Rationals terminate (or are cut at `max_depth` with an exact error bound),
/// quadratic surds return their exact eventual period, floats stop as soon as
/// the next digit is not determined by the input's last-bit uncertainty.
pub fn cf_expand(x: &CfInput, max_depth: usize) -> Result<ContinuedFraction, ContFracError> {
    if max_depth == 0 {
        return Err(ContFracError::ZeroDepth);
    }
    match x {
        CfInput::Rational(r) => Ok(expand_rational(r, max_depth)),
        CfInput::Surd(s) => expand_surd(s),
        CfInput::Float(v) => expand_float(*v, max_depth),
    }
}

fn expand_rational(r: &BigRational, max_depth: usize) -> ContinuedFraction {
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    let (a0, rem) = num.div_mod_floor(&den);
    num = den.clone();
    den = rem;
    let mut digits = Vec::new();
    while !den.is_zero() && digits.len() < max_depth {
        let (a, rem) = num.div_mod_floor(&den);
        digits.push(a);
        num = den;
        den = rem;
    }
    if den.is_zero() {
        return ContinuedFraction {
            a0,
            digits,
            source: CfSource::Finite,
        };
    }
    let mut all = vec![a0.clone()];
    all.extend(digits.iter().cloned());
    let err = (r - eval_finite(&all)).abs().to_f64().unwrap_or(f64::INFINITY);
    let depth = digits.len();
    ContinuedFraction {
        a0,
        digits,
        source: CfSource::Truncated {
            value: r.to_f64().unwrap_or(f64::NAN),
            depth,
            error_bound: err,
            exhausted: false,
        },
    }
}

/// Complete-quotient recursion on `(P + √M)/Q` with `Q | M − P²`.
fn expand_surd(s: &QuadSurd) -> Result<ContinuedFraction, ContFracError> {
    if s.is_rational() {
        return Ok(expand_rational(&s.to_rational().unwrap(), usize::MAX));
    }
    let b = s.b();
    let m0 = b * b * s.radicand();
    let (mut p, mut q) = if b.is_positive() {
        (s.a().clone(), s.c().clone())
    } else {
        (-s.a(), -s.c())
    };
    let mut m = m0;
    if !((&m - &p * &p) % &q).is_zero() {
        let aq = q.abs();
        p *= &aq;
        m *= &aq * &aq;
        q *= &aq;
    }
    let root = m.sqrt();
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut all: Vec<BigInt> = Vec::new();
    loop {
        if let Some(&k1) = seen.get(&(p.clone(), q.clone())) {
            let k2 = all.len();
            let per_len = k2 - k1;
            let start = k1.max(1);
            // when the period starts at a_0, its rotation starting at a_1 is used
            let mut digits: Vec<BigInt> = all[1..start].to_vec();
            for t in 0..per_len {
                let idx = start + t;
                let v = if idx < k2 {
                    all[idx].clone()
                } else {
                    all[k1 + (idx - k1) % per_len].clone()
                };
                digits.push(v);
            }
            let pre: Vec<BigInt> = digits[..start - 1].to_vec();
            let per: Vec<BigInt> = digits[start - 1..].to_vec();
            return ContinuedFraction::periodic(all[0].clone(), pre, per);
        }
        seen.insert((p.clone(), q.clone()), all.len());
        let a = if q.is_positive() {
            (&p + &root).div_floor(&q)
        } else {
            (&p + &root + BigInt::one()).div_floor(&q)
        };
        let p_next = &a * &q - &p;
        let q_next = (&m - &p_next * &p_next) / &q;
        all.push(a);
        p = p_next;
        q = q_next;
    }
}

fn expand_float(v: f64, max_depth: usize) -> Result<ContinuedFraction, ContFracError> {
    if !v.is_finite() {
        return Err(ContFracError::NonFinite(v));
    }
    // One ulp either side covers rounding of whatever produced `v`.
    let lo_f = v.next_down();
    let hi_f = v.next_up();
    let to_rat = |x: f64| BigRational::from_float(x).expect("finite");
    let lo = to_rat(lo_f);
    let hi = to_rat(hi_f);
    let (a0, exhausted_at_0) = {
        let fl = lo.floor();
        let fh = hi.floor();
        (fl.to_integer(), fl != fh)
    };
    if exhausted_at_0 {
        // Even a_0 is ambiguous; report it with the widest honest bound.
        return ContinuedFraction::truncated(a0, vec![], v, (hi - lo).to_f64().unwrap(), true);
    }
    let a0_r = BigRational::from_integer(a0.clone());
    let mut xl = lo - &a0_r;
    let mut xh = hi - &a0_r;
    let mut digits = Vec::new();
    let mut exhausted = false;
    while digits.len() < max_depth {
        if xl.is_zero() || xh.is_zero() {
            exhausted = true;
            break;
        }
        let yl = xl.recip();
        let yh = xh.recip();
        let dl = yl.floor();
        let dh = yh.floor();
        if dl != dh {
            exhausted = true;
            break;
        }
        let d = dl.to_integer();
        if !d.is_positive() {
            exhausted = true;
            break;
        }
        xl = &yl - &dl;
        xh = &yh - &dh;
        digits.push(d);
    }
    let mut all = vec![a0.clone()];
    all.extend(digits.iter().cloned());
    let approx = eval_finite(&all);
    let bound = (to_rat(lo_f) - &approx)
        .abs()
        .max((to_rat(hi_f) - &approx).abs())
        .to_f64()
        .unwrap_or(f64::INFINITY);
    ContinuedFraction::truncated(a0, digits, v, bound, exhausted)
}

/// `β_i = p_i / q_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub index: usize,
    #[serde(serialize_with = "ser_bigint")]
    pub p: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub q: BigInt,
}

pub(crate) fn ser_bigint<S: serde::Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl Convergent {
    pub fn ratio(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

/// `β_0, …, β_n`.
pub fn convergents(cf: &ContinuedFraction, n: usize) -> Result<Vec<Convergent>, ContFracError> {
    cf.require(n)?;
    let (mut p2, mut p1) = (BigInt::zero(), BigInt::one());
    let (mut q2, mut q1) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let a = cf.digit(i).unwrap();
        let p = a * &p1 + &p2;
        let q = a * &q1 + &q2;
        out.push(Convergent {
            index: i,
            p: p.clone(),
            q: q.clone(),
        });
        p2 = std::mem::replace(&mut p1, p);
        q2 = std::mem::replace(&mut q1, q);
    }
    Ok(out)
}

/// `β_{i,m} = (p_i + m p_{i+1})/(q_i + m q_{i+1})` for `m = 0..=m_max`.
pub fn semiconvergents(
    cf: &ContinuedFraction,
    i: usize,
    m_max: &BigInt,
) -> Result<Vec<BigRational>, ContFracError> {
    let conv = convergents(cf, i + 2)?;
    let limit = cf.digit(i + 2).unwrap();
    if m_max.is_negative() || m_max > limit {
        return Err(ContFracError::SemiconvergentRange {
            m_max: m_max.to_string(),
            limit: limit.to_string(),
        });
    }
    let m_max = m_max.to_usize().expect("bounded by a digit");
    let (pi, qi) = (&conv[i].p, &conv[i].q);
    let (pn, qn) = (&conv[i + 1].p, &conv[i + 1].q);
    Ok((0..=m_max)
        .map(|m| {
            let m = BigInt::from(m);
            BigRational::new(pi + &m * pn, qi + &m * qn)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&a| BigInt::from(a)).collect()
    }

    fn surd(a: i64, b: i64, d: i64, c: i64) -> QuadSurd {
        QuadSurd::new(a.into(), b.into(), d.into(), c.into()).unwrap()
    }

    #[test]
    fn golden_expands_with_period_one() {
        let cf = cf_expand(&CfInput::Surd(surd(1, 1, 5, 2)), 10).unwrap();
        assert_eq!(cf.a0(), &BigInt::from(1));
        assert_eq!(cf.source(), &CfSource::Periodic { preperiod: 0, period: 1 });
        assert_eq!(cf.stored_digits(), &big(&[1])[..]);
    }

    #[test]
    fn sqrt2_expands_with_period_two_digit() {
        let cf = cf_expand(&CfInput::Surd(surd(0, 1, 2, 1)), 8).unwrap();
        assert_eq!(cf.a0(), &BigInt::from(1));
        assert_eq!(cf.source(), &CfSource::Periodic { preperiod: 0, period: 1 });
        assert_eq!(cf.digit(7), Some(&BigInt::from(2)));
    }

    #[test]
    fn purely_periodic_from_a0() {
        // 1 + √2 = [2; 2, 2, …]
        let cf = cf_expand(&CfInput::Surd(surd(1, 1, 2, 1)), 8).unwrap();
        assert_eq!(cf.a0(), &BigInt::from(2));
        assert_eq!(cf.digit(1), Some(&BigInt::from(2)));
        // √7 = [2; (1, 1, 1, 4)]
        let cf = cf_expand(&CfInput::Surd(surd(0, 1, 7, 1)), 8).unwrap();
        assert_eq!(cf.render(), "[2; (1, 1, 1, 4)]");
        // (√5 - 1)/2 = [0; (1)], negative b handled through sign flip
        let cf = cf_expand(&CfInput::Surd(surd(-1, 1, 5, 2)), 8).unwrap();
        assert_eq!(cf.render(), "[0; (1)]");
        let cf = cf_expand(&CfInput::Surd(surd(3, -1, 2, 7)), 8).unwrap();
        let v = cf.exact_value().unwrap();
        assert_eq!(v, surd(3, -1, 2, 7));
    }

    #[test]
    fn rationals_terminate() {
        let cf = cf_expand(&CfInput::Rational(BigRational::from_integer(3.into())), 10).unwrap();
        assert_eq!(cf.render(), "[3]");
        let r = BigRational::new(355.into(), 113.into());
        let cf = cf_expand(&CfInput::Rational(r), 10).unwrap();
        assert_eq!(cf.render(), "[3; 7, 16]");
        let r = BigRational::new((-7).into(), 3.into());
        let cf = cf_expand(&CfInput::Rational(r.clone()), 10).unwrap();
        assert_eq!(cf.exact_value().unwrap(), QuadSurd::from_rational(&r));
    }

    #[test]
    fn float_expansion_stops_when_ambiguous() {
        let cf = cf_expand(&CfInput::Float(std::f64::consts::PI), 100).unwrap();
        let d = cf.digits_through(4).unwrap();
        assert_eq!(d, big(&[3, 7, 15, 1, 292]));
        match cf.source() {
            CfSource::Truncated {
                exhausted,
                error_bound,
                depth,
                ..
            } => {
                assert!(*exhausted);
                assert!(*depth < 100);
                assert!(*error_bound < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn convergents_of_examples() {
        let cf = ContinuedFraction::from_i64(&[0, 1, 1, 1, 1, 1, 1]).unwrap();
        let c = convergents(&cf, 6).unwrap();
        let pq: Vec<(i64, i64)> = c
            .iter()
            .map(|c| (c.p.to_i64().unwrap(), c.q.to_i64().unwrap()))
            .collect();
        assert_eq!(pq, vec![(0, 1), (1, 1), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13)]);
        let pi = ContinuedFraction::from_i64(&[3, 7, 15, 1]).unwrap();
        let c = convergents(&pi, 3).unwrap();
        assert_eq!(c[3].p, BigInt::from(355));
        assert_eq!(c[3].q, BigInt::from(113));
        assert_eq!(c[2].p, BigInt::from(333));
        let five = ContinuedFraction::from_i64(&[5]).unwrap();
        assert_eq!(convergents(&five, 0).unwrap()[0].p, BigInt::from(5));
        assert!(matches!(
            convergents(&five, 1),
            Err(ContFracError::DepthExceeded { available: 0, .. })
        ));
    }

    #[test]
    fn semiconvergent_examples() {
        let pi = ContinuedFraction::from_i64(&[3, 7, 15, 1]).unwrap();
        let s = semiconvergents(&pi, 0, &BigInt::from(2)).unwrap();
        let want: Vec<BigRational> = [(3, 1), (25, 8), (47, 15)]
            .iter()
            .map(|&(p, q)| BigRational::new(p.into(), q.into()))
            .collect();
        assert_eq!(s, want);
        let golden = ContinuedFraction::periodic(0.into(), vec![], big(&[1])).unwrap();
        let s = semiconvergents(&golden, 0, &BigInt::one()).unwrap();
        assert_eq!(s[0], BigRational::from_integer(0.into()));
        assert_eq!(s[1], BigRational::new(1.into(), 2.into()));
        assert!(semiconvergents(&golden, 0, &BigInt::from(2)).is_err());
        let full = semiconvergents(&pi, 1, &BigInt::from(1)).unwrap();
        assert_eq!(full.last().unwrap(), &BigRational::new(355.into(), 113.into()));
    }

    #[test]
    fn rejects_bad_digits() {
        assert!(ContinuedFraction::from_i64(&[1, 0]).is_err());
        assert!(ContinuedFraction::periodic(1.into(), vec![], vec![]).is_err());
    }
}
