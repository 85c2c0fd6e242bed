//! `θ` specifications: `rational:p/q`, `periodic:pre|per`, `decimal:x@depth`, `surd:a,b,D,c`.

use std::fmt;
use std::str::FromStr;

use hebundle::contfrac::{cf_expand, CfInput, ContinuedFraction, QuadSurd};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum ThetaSpec {
    Rational(BigRational),
    /// `a_0` and the preperiod, then the repeating block.
    Periodic { pre: Vec<BigInt>, per: Vec<BigInt> },
    /// The decimal literal read exactly, expanded to `depth` digits.
    Decimal { value: BigRational, literal: String, depth: usize },
    /// `(a + b√D)/c`.
    Surd([BigInt; 4]),
}

fn bad(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Theta {
        field: field.to_string(),
        msg: msg.into(),
    }
}

fn int(field: &str, s: &str) -> Result<BigInt, CliError> {
    s.trim()
        .parse()
        .map_err(|_| bad(field, format!("{:?} is not an integer", s.trim())))
}

fn digit_list(field: &str, s: &str) -> Result<Vec<BigInt>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| int(field, t)).collect()
}

/// Exact value of a decimal literal such as `-3.1415`.
fn parse_decimal(s: &str) -> Result<BigRational, CliError> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    let all_digits = |t: &str| t.chars().all(|c| c.is_ascii_digit());
    if (whole.is_empty() && frac.is_empty()) || !all_digits(whole) || !all_digits(frac) {
        return Err(bad("decimal.value", format!("{s:?} is not a decimal literal")));
    }
    let digits = format!("{whole}{frac}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().expect("checked digits") };
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(num, den);
    Ok(if neg { -v } else { v })
}

impl FromStr for ThetaSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| bad("kind", format!("{s:?} has no `kind:` prefix")))?;
        match kind.trim() {
            "rational" => {
                let (p, q) = body.split_once('/').unwrap_or((body, "1"));
                let p = int("rational.numerator", p)?;
                let q = int("rational.denominator", q)?;
                if q.is_zero() {
                    return Err(bad("rational.denominator", "zero denominator"));
                }
                Ok(ThetaSpec::Rational(BigRational::new(p, q)))
            }
            "periodic" => {
                let (pre, per) = body
                    .split_once('|')
                    .ok_or_else(|| bad("periodic", "expected `pre|per`"))?;
                let pre = digit_list("periodic.pre", pre)?;
                let per = digit_list("periodic.per", per)?;
                if pre.is_empty() {
                    return Err(bad("periodic.pre", "needs at least a_0"));
                }
                if per.is_empty() {
                    return Err(bad("periodic.per", "empty period"));
                }
                if let Some(a) = pre[1..].iter().chain(&per).find(|a| !a.is_positive()) {
                    return Err(bad("periodic.digits", format!("digit {a} must be positive")));
                }
                Ok(ThetaSpec::Periodic { pre, per })
            }
            "decimal" => {
                let (lit, depth) = body
                    .split_once('@')
                    .ok_or_else(|| bad("decimal", "expected `x@depth`"))?;
                let depth: usize = depth
                    .trim()
                    .parse()
                    .map_err(|_| bad("decimal.depth", format!("{:?} is not a depth", depth.trim())))?;
                if depth == 0 {
                    return Err(bad("decimal.depth", "depth must be positive"));
                }
                Ok(ThetaSpec::Decimal {
                    value: parse_decimal(lit)?,
                    literal: lit.trim().to_string(),
                    depth,
                })
            }
            "surd" => {
                let parts: Vec<&str> = body.split(',').collect();
                if parts.len() != 4 {
                    return Err(bad("surd", format!("expected a,b,D,c, got {} fields", parts.len())));
                }
                let names = ["surd.a", "surd.b", "surd.D", "surd.c"];
                let v: Vec<BigInt> = parts
                    .iter()
                    .zip(names)
                    .map(|(p, n)| int(n, p))
                    .collect::<Result<_, _>>()?;
                let spec = ThetaSpec::Surd([v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()]);
                spec.surd()?;
                Ok(spec)
            }
            other => Err(bad("kind", format!("unknown kind {other:?} (rational | periodic | decimal | surd)"))),
        }
    }
}

impl ThetaSpec {
    fn surd(&self) -> Result<QuadSurd, CliError> {
        let ThetaSpec::Surd([a, b, d, c]) = self else {
            unreachable!("surd() on a non-surd spec")
        };
        QuadSurd::new(a.clone(), b.clone(), d.clone(), c.clone()).map_err(|e| bad("surd", e.to_string()))
    }

    /// Continued fraction; `depth` caps rational expansions.
    pub fn expand(&self, depth: usize) -> Result<ContinuedFraction, CliError> {
        let r = match self {
            ThetaSpec::Rational(q) => cf_expand(&CfInput::Rational(q.clone()), depth),
            ThetaSpec::Periodic { pre, per } => {
                ContinuedFraction::periodic(pre[0].clone(), pre[1..].to_vec(), per.clone())
            }
            ThetaSpec::Decimal { value, depth, .. } => cf_expand(&CfInput::Rational(value.clone()), *depth),
            ThetaSpec::Surd(_) => cf_expand(&CfInput::Surd(self.surd()?), depth),
        };
        r.map_err(|e| bad("expansion", e.to_string()))
    }
}

fn join(v: &[BigInt]) -> String {
    v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ThetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaSpec::Rational(q) if q.denom().is_one() => write!(f, "rational:{}/1", q.numer()),
            ThetaSpec::Rational(q) => write!(f, "rational:{q}"),
            ThetaSpec::Periodic { pre, per } => write!(f, "periodic:{}|{}", join(pre), join(per)),
            ThetaSpec::Decimal { literal, depth, .. } => write!(f, "decimal:{literal}@{depth}"),
            ThetaSpec::Surd(v) => write!(f, "surd:{}", join(v)),
        }
    }
}
