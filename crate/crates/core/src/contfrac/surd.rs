//! Exact arithmetic in a real quadratic field.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ContFracError;

/// The real number `(a + b·√d) / c`.
///
/// Canonical form: `c > 0`, `gcd(a, b, c) = 1`, `d` squarefree and `> 1`
/// whenever `b != 0`. Rationals are stored with `b = 0, d = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    a: BigInt,
    b: BigInt,
    d: BigInt,
    c: BigInt,
}

fn squarefree_split(d: &BigInt) -> (BigInt, BigInt) {
    // d = s^2 * core
    let mut core = d.clone();
    let mut s = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= core {
        let pp = &p * &p;
        while (&core % &pp).is_zero() {
            core /= &pp;
            s *= &p;
        }
        p += 1;
        if p > BigInt::from(1_000_000u32) {
            break;
        }
    }
    (s, core)
}

impl QuadSurd {
    /// Builds `(a + b√d)/c`. `d` must be a positive non-square when `b != 0`.
    pub fn new(a: BigInt, b: BigInt, d: BigInt, c: BigInt) -> Result<Self, ContFracError> {
        if c.is_zero() {
            return Err(ContFracError::ZeroDenominator);
        }
        if b.is_zero() {
            return Ok(Self::from_ratio(a, c));
        }
        if !d.is_positive() {
            return Err(ContFracError::NotARealSurd(d.to_string()));
        }
        let r = d.sqrt();
        if &r * &r == d {
            return Err(ContFracError::SquareRadicand(d.to_string()));
        }
        let (s, core) = squarefree_split(&d);
        Ok(Self::normalized(a, b * s, core, c))
    }

    /// Like [`QuadSurd::new`] but a perfect-square radicand is folded into the rational part.
    pub fn new_lenient(a: BigInt, b: BigInt, d: BigInt, c: BigInt) -> Result<Self, ContFracError> {
        if !b.is_zero() && d.is_positive() {
            let r = d.sqrt();
            if &r * &r == d {
                return Ok(Self::from_ratio(a + b * r, c));
            }
        }
        Self::new(a, b, d, c)
    }

    fn normalized(mut a: BigInt, mut b: BigInt, mut d: BigInt, mut c: BigInt) -> Self {
        if b.is_zero() {
            d = BigInt::one();
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_zero() && !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        Self { a, b, d, c }
    }

    pub fn from_ratio(a: BigInt, c: BigInt) -> Self {
        Self::normalized(a, BigInt::zero(), BigInt::one(), c)
    }

    pub fn from_int(a: impl Into<BigInt>) -> Self {
        Self::from_ratio(a.into(), BigInt::one())
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self::from_ratio(r.numer().clone(), r.denom().clone())
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn radicand(&self) -> &BigInt {
        &self.d
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    fn common_radicand(&self, other: &Self) -> Result<BigInt, ContFracError> {
        match (self.is_rational(), other.is_rational()) {
            (true, _) => Ok(other.d.clone()),
            (_, true) => Ok(self.d.clone()),
            _ if self.d == other.d => Ok(self.d.clone()),
            _ => Err(ContFracError::MixedRadicands(
                self.d.to_string(),
                other.d.to_string(),
            )),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ContFracError> {
        let d = self.common_radicand(other)?;
        Ok(Self::normalized(
            &self.a * &other.c + &other.a * &self.c,
            &self.b * &other.c + &other.b * &self.c,
            d,
            &self.c * &other.c,
        ))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ContFracError> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ContFracError> {
        let d = self.common_radicand(other)?;
        Ok(Self::normalized(
            &self.a * &other.a + &self.b * &other.b * &d,
            &self.a * &other.b + &self.b * &other.a,
            d,
            &self.c * &other.c,
        ))
    }

    pub fn neg(&self) -> Self {
        Self::normalized(-&self.a, -&self.b, self.d.clone(), self.c.clone())
    }

    /// `1/x`, rationalizing the denominator.
    pub fn recip(&self) -> Result<Self, ContFracError> {
        if self.is_zero() {
            return Err(ContFracError::ZeroDenominator);
        }
        // c / (a + b√d) = c (a - b√d) / (a² - b² d)
        let norm = &self.a * &self.a - &self.b * &self.b * &self.d;
        Ok(Self::normalized(
            &self.c * &self.a,
            -&self.c * &self.b,
            self.d.clone(),
            norm,
        ))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, ContFracError> {
        self.try_mul(&other.recip()?)
    }

    pub fn add_int(&self, k: &BigInt) -> Self {
        Self::normalized(&self.a + k * &self.c, self.b.clone(), self.d.clone(), self.c.clone())
    }

    pub fn add_rational(&self, r: &BigRational) -> Self {
        self.try_add(&Self::from_rational(r))
            .expect("rationals share every radicand")
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign of the value.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.sign();
        let sb = self.b.sign();
        use num_bigint::Sign::*;
        match (sa, sb) {
            (NoSign, NoSign) => Ordering::Equal,
            (Plus, Plus) | (Plus, NoSign) | (NoSign, Plus) => Ordering::Greater,
            (Minus, Minus) | (Minus, NoSign) | (NoSign, Minus) => Ordering::Less,
            _ => {
                // opposite signs: compare a² with b²d
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * &self.d;
                match a2.cmp(&b2d) {
                    Ordering::Greater => {
                        if sa == Plus {
                            Ordering::Greater
                        } else {
                            Ordering::Less
                        }
                    }
                    Ordering::Less => {
                        if sb == Plus {
                            Ordering::Greater
                        } else {
                            Ordering::Less
                        }
                    }
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn try_cmp(&self, other: &Self) -> Result<Ordering, ContFracError> {
        Ok(self.try_sub(other)?.signum())
    }

    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        self.try_sub(&Self::from_rational(r))
            .expect("rationals share every radicand")
            .signum()
    }

    /// `⌊x⌋`, exact.
    pub fn floor(&self) -> BigInt {
        // m = ⌊a + b√d⌋, then ⌊x⌋ = ⌊m / c⌋ because the value is irrational.
        if self.is_rational() {
            return self.a.div_floor(&self.c);
        }
        let n = &self.b * &self.b * &self.d;
        let r = n.sqrt();
        let m = if self.b.is_positive() {
            &self.a + r
        } else {
            &self.a - r - 1
        };
        m.div_floor(&self.c)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return BigRational::new(self.a.clone(), self.c.clone())
                .to_f64()
                .unwrap_or(f64::NAN);
        }
        // 2^-96 accurate rational approximation of b√d, then one rounding.
        let shift = 96u32;
        let scale = BigInt::one() << shift;
        let n = &self.b * &self.b * &self.d * &scale * &scale;
        let r = n.sqrt();
        let num = &self.a * &scale + if self.b.is_positive() { r } else { -r };
        BigRational::new(num, &self.c * &scale)
            .to_f64()
            .unwrap_or(f64::NAN)
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            if self.c.is_one() {
                return write!(f, "{}", self.a);
            }
            return write!(f, "{}/{}", self.a, self.c);
        }
        let radical = if self.b.is_one() {
            format!("√{}", self.d)
        } else if self.b == -BigInt::one() {
            format!("-√{}", self.d)
        } else {
            format!("{}√{}", self.b, self.d)
        };
        let body = if self.a.is_zero() {
            radical
        } else if self.b.is_negative() {
            format!("{}{}", self.a, radical)
        } else {
            format!("{}+{}", self.a, radical)
        };
        if self.c.is_one() {
            write!(f, "{body}")
        } else {
            write!(f, "({body})/{}", self.c)
        }
    }
}
