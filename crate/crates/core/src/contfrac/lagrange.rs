use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::tail::{purely_periodic, FloatInterval};
use super::{
    convergents, periodic_tail, tail_value, CfSource, ContFracError, ContinuedFraction, Enclosure,
    QuadSurd,
};
use crate::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Convergent index `n = 2i` or `2i + 1`.
    pub fn index(self, i: usize) -> usize {
        match self {
            Parity::Even => 2 * i,
            Parity::Odd => 2 * i + 1,
        }
    }

    fn matches(self, n: usize) -> bool {
        (n % 2 == 0) == (self == Parity::Even)
    }
}

impl std::str::FromStr for Parity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even" | "0" => Ok(Parity::Even),
            "odd" | "1" => Ok(Parity::Odd),
            other => Err(format!("parity must be even or odd, got {other:?}")),
        }
    }
}

/// Exact limsup for an eventually periodic expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicLagrange {
    pub value: QuadSurd,
    /// Whether infinitely many terms reach the limsup (so the supremum is a maximum).
    pub attainable: bool,
}

#[derive(Clone, Debug)]
pub struct LagrangeEstimate {
    pub parity: Parity,
    /// Largest `i` evaluated.
    pub depth: usize,
    pub tail_depth: usize,
    /// Enclosures of `[a_{n+1}; a_{n+2}, …] + [0; a_n, …, a_1]`, `n = 2i` or `2i+1`.
    pub running_values: Vec<Enclosure>,
    /// `max_{j ≤ i}` of the lower and upper ends.
    pub running_max: Vec<FloatInterval>,
    /// `max_{i ≤ j ≤ depth}` of the lower and upper ends.
    pub tail_sup: Vec<FloatInterval>,
    /// Limsup estimate from the second half of the evaluated range,
    /// or the exact value for periodic input.
    pub estimate: FloatInterval,
    pub exact: Option<PeriodicLagrange>,
    /// Fewer indices than requested could be evaluated.
    pub partial: bool,
}

impl LagrangeEstimate {
    pub fn values(&self) -> Vec<FloatInterval> {
        self.running_values.iter().map(Enclosure::floats).collect()
    }
}

/// Running evaluation of the parity Lagrange number of `cf`.
pub fn lagrange_estimate(
    cf: &ContinuedFraction,
    parity: Parity,
    i_max: usize,
    tail_depth: usize,
) -> Result<LagrangeEstimate, ContFracError> {
    let mut last = i_max;
    let mut partial = false;
    if let Some(avail) = cf.available_depth() {
        // need a_{n+1}
        if avail < parity.index(0) + 1 {
            return Err(ContFracError::DepthExceeded {
                requested: parity.index(0) + 1,
                available: avail,
            });
        }
        let fit = (avail - 1 - parity.index(0)) / 2;
        if fit < i_max {
            last = fit;
            partial = true;
        }
    }
    let conv = convergents(cf, parity.index(last))?;
    let mut running_values = Vec::with_capacity(last + 1);
    for i in 0..=last {
        let n = parity.index(i);
        let rev = if n == 0 {
            BigRational::zero()
        } else {
            BigRational::new(conv[n - 1].q.clone(), conv[n].q.clone())
        };
        let fwd = tail_value(cf, n + 1, tail_depth)?;
        running_values.push(fwd.add_rational(&rev));
    }
    let floats: Vec<FloatInterval> = running_values.iter().map(Enclosure::floats).collect();
    let mut running_max = Vec::with_capacity(floats.len());
    let mut acc = FloatInterval {
        lo: f64::NEG_INFINITY,
        hi: f64::NEG_INFINITY,
    };
    for v in &floats {
        acc.lo = acc.lo.max(v.lo);
        acc.hi = acc.hi.max(v.hi);
        running_max.push(acc);
    }
    let mut tail_sup = vec![acc; floats.len()];
    let mut acc = FloatInterval {
        lo: f64::NEG_INFINITY,
        hi: f64::NEG_INFINITY,
    };
    for (k, v) in floats.iter().enumerate().rev() {
        acc.lo = acc.lo.max(v.lo);
        acc.hi = acc.hi.max(v.hi);
        tail_sup[k] = acc;
    }
    let exact = match cf.source() {
        CfSource::Periodic { .. } => Some(periodic_lagrange(cf, parity)),
        _ => None,
    };
    let estimate = match &exact {
        Some(p) => Enclosure::Point(p.value.clone()).floats(),
        None => tail_sup[last / 2],
    };
    Ok(LagrangeEstimate {
        parity,
        depth: last,
        tail_depth,
        running_values,
        running_max,
        tail_sup,
        estimate,
        exact,
        partial,
    })
}

/// Exact limsup over one parity class for an eventually periodic expansion.
///
/// Along each residue class of `n` modulo `lcm(2, period)` the forward tail is
/// a fixed surd and the reversed part converges to the backward-periodic surd.
pub fn periodic_lagrange(cf: &ContinuedFraction, parity: Parity) -> PeriodicLagrange {
    let CfSource::Periodic { preperiod, period } = *cf.source() else {
        panic!("periodic_lagrange needs a periodic source");
    };
    let modulus = period.lcm(&2);
    let n0 = preperiod + period;
    let mut best: Option<QuadSurd> = None;
    let mut classes: Vec<(usize, QuadSurd, QuadSurd)> = Vec::new();
    for n in n0..n0 + modulus {
        if !parity.matches(n) {
            continue;
        }
        let fwd = periodic_tail(cf, n + 1);
        let block: Vec<BigInt> = (0..period)
            .map(|t| cf.digit(n - t).unwrap().clone())
            .collect();
        let back = purely_periodic(&block).recip().expect("positive");
        let limit = fwd.try_add(&back).expect("same quadratic field");
        if best
            .as_ref()
            .map_or(true, |b| limit.try_cmp(b).expect("same field") == Ordering::Greater)
        {
            best = Some(limit.clone());
        }
        classes.push((n, fwd, limit));
    }
    let value = best.expect("at least one class of each parity");
    let mut attainable = false;
    for (n, fwd, limit) in &classes {
        if limit != &value {
            continue;
        }
        // The sign of (finite value − limit) is constant along the class.
        let far = n + 4 * modulus;
        let conv = convergents(cf, far).expect("periodic");
        let rev = BigRational::new(conv[far - 1].q.clone(), conv[far].q.clone());
        let v = fwd.add_rational(&rev);
        if v.try_cmp(&value).expect("same field") == Ordering::Greater {
            attainable = true;
        }
    }
    PeriodicLagrange { value, attainable }
}

/// `|θ − p/q| · q² · L` as an enclosure.
pub fn approximation_product(theta: &Enclosure, p: &BigInt, q: &BigInt, l: &BigRational) -> Enclosure {
    let beta = BigRational::new(p.clone(), q.clone());
    let scale = BigRational::from_integer(q * q) * l;
    match theta {
        Enclosure::Point(t) => {
            let gap = t.try_sub(&QuadSurd::from_rational(&beta)).expect("rational");
            let gap = if gap.signum() == Ordering::Less { gap.neg() } else { gap };
            Enclosure::Point(gap.try_mul(&QuadSurd::from_rational(&scale)).expect("rational"))
        }
        Enclosure::Interval { lo, hi } => {
            let a = lo - &beta;
            let b = hi - &beta;
            let (lo_abs, hi_abs) = if a.is_negative() && b.is_positive() {
                (BigRational::zero(), a.abs().max(b.abs()))
            } else {
                let (x, y) = (a.abs(), b.abs());
                if x <= y { (x, y) } else { (y, x) }
            };
            Enclosure::Interval {
                lo: lo_abs * &scale,
                hi: hi_abs * &scale,
            }
        }
    }
}

/// Three-valued `x < 1`.
pub(crate) fn below_one(x: &Enclosure) -> Verdict {
    let one = BigRational::one();
    match x {
        Enclosure::Point(s) => Verdict::from_bool(s.cmp_rational(&one) == Ordering::Less),
        Enclosure::Interval { lo, hi } => {
            if hi < &one {
                Verdict::True
            } else if lo >= &one {
                Verdict::False
            } else {
                Verdict::Undecided
            }
        }
    }
}

/// Enclosure of θ itself.
pub fn theta_enclosure(cf: &ContinuedFraction) -> Enclosure {
    match cf.source() {
        CfSource::Periodic { .. } | CfSource::Finite => Enclosure::Point(cf.exact_value().unwrap()),
        CfSource::Truncated { .. } => {
            tail_value(cf, 0, cf.available_depth().unwrap()).expect("k = 0 always in range")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxIndex {
    pub i: usize,
    pub n: usize,
    /// `|θ − p_n/q_n| q_n² L < 1`
    pub verdict: Verdict,
}

/// Direct test of `|θ − λ_n| < 1/(L q_n²)` over the parity class, `i ≤ i_max`.
pub fn approximation_check(
    cf: &ContinuedFraction,
    parity: Parity,
    l: &BigRational,
    i_max: usize,
) -> Result<Vec<ApproxIndex>, ContFracError> {
    let theta = theta_enclosure(cf);
    let conv = convergents(cf, parity.index(i_max))?;
    Ok((0..=i_max)
        .map(|i| {
            let n = parity.index(i);
            let prod = approximation_product(&theta, &conv[n].p, &conv[n].q, l);
            ApproxIndex {
                i,
                n,
                verdict: below_one(&prod),
            }
        })
        .collect())
}
