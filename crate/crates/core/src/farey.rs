//! Primitive integral vectors, Farey geodesics and triangles, Stern–Brocot descent.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FareyError {
    #[error("{p}/{q} is not reduced")]
    NotReduced { p: i64, q: i64 },
    #[error("0/0 is not a vector")]
    Zero,
    #[error("denominator must be nonnegative, got {0}")]
    NegativeDenominator(i64),
    #[error("Stern–Brocot descent needs a positive finite fraction, got {0}")]
    OutOfTree(String),
    #[error("cannot parse fraction {0:?}")]
    Parse(String),
}

/// `p/q` in lowest terms with `q ≥ 0`; `1/0` is ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimitiveVector {
    p: i64,
    q: i64,
}

impl PrimitiveVector {
    /// Requires `gcd(p, q) = 1`, `q ≥ 0`, and `p = 1` when `q = 0`.
    pub fn new(p: i64, q: i64) -> Result<Self, FareyError> {
        if p == 0 && q == 0 {
            return Err(FareyError::Zero);
        }
        if q < 0 {
            return Err(FareyError::NegativeDenominator(q));
        }
        if p.gcd(&q) != 1 || (q == 0 && p != 1) {
            return Err(FareyError::NotReduced { p, q });
        }
        Ok(Self { p, q })
    }

    /// Reduces `p/q` (sign moved to `p`).
    pub fn reduced(p: i64, q: i64) -> Result<Self, FareyError> {
        if p == 0 && q == 0 {
            return Err(FareyError::Zero);
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        if q == 0 {
            p = 1;
        }
        Ok(Self { p, q })
    }

    pub const INFINITY: Self = Self { p: 1, q: 0 };

    pub fn p(&self) -> i64 {
        self.p
    }
    pub fn q(&self) -> i64 {
        self.q
    }
    pub fn is_infinite(&self) -> bool {
        self.q == 0
    }

    /// `p_b q_a − q_b p_a`.
    pub fn det(a: &Self, b: &Self) -> i128 {
        b.p as i128 * a.q as i128 - b.q as i128 * a.p as i128
    }
}

impl Ord for PrimitiveVector {
    fn cmp(&self, other: &Self) -> Ordering {
        // q ≥ 0 so cross-multiplication preserves order; ∞ is the largest.
        (self.p as i128 * other.q as i128).cmp(&(other.p as i128 * self.q as i128))
    }
}

impl PartialOrd for PrimitiveVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PrimitiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl Serialize for PrimitiveVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for PrimitiveVector {
    type Err = FareyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FareyError::Parse(s.to_string());
        let (p, q) = match s.trim().split_once('/') {
            Some((p, q)) => (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        Self::new(p, q)
    }
}

/// `(p_a + p_b)/(q_a + q_b)`, reduced.
pub fn mediant(a: PrimitiveVector, b: PrimitiveVector) -> PrimitiveVector {
    PrimitiveVector::reduced(a.p + b.p, a.q + b.q).expect("sum of vectors in the closed upper half plane is nonzero")
}

/// `|p_b q_a − q_b p_a| = 1`, tested after ordering the pair.
pub fn is_farey_geodesic(a: PrimitiveVector, b: PrimitiveVector) -> bool {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    PrimitiveVector::det(&a, &b) == 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FareyTriangle {
    pub left: PrimitiveVector,
    pub middle: PrimitiveVector,
    pub right: PrimitiveVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FareyCheck {
    pub triangle: [PrimitiveVector; 3],
    pub farey: bool,
    pub violated: Option<String>,
}

/// Checks ordering, the mediant relation and both unimodularity determinants.
pub fn is_farey_triangle(t: &FareyTriangle) -> FareyCheck {
    let FareyTriangle { left, middle, right } = *t;
    let violated = if middle.is_infinite() {
        Some("middle vertex must be finite".to_string())
    } else if !(left < middle && middle < right) {
        Some(format!("ordering {left} < {middle} < {right} fails"))
    } else if middle.p != left.p + right.p || middle.q != left.q + right.q {
        Some(format!(
            "mediant relation fails: {}/{} != ({}+{})/({}+{})",
            middle.p, middle.q, left.p, right.p, left.q, right.q
        ))
    } else if PrimitiveVector::det(&left, &middle) != 1 {
        Some(format!(
            "left determinant is {}, not 1",
            PrimitiveVector::det(&left, &middle)
        ))
    } else if PrimitiveVector::det(&middle, &right) != 1 {
        Some(format!(
            "right determinant is {}, not 1",
            PrimitiveVector::det(&middle, &right)
        ))
    } else {
        None
    };
    FareyCheck {
        triangle: [left, middle, right],
        farey: violated.is_none(),
        violated,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Move {
    L,
    R,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SternBrocotPath {
    pub moves: Vec<Move>,
    /// `(lower bound, node, upper bound)` at the root and after every move.
    pub triangles: Vec<FareyTriangle>,
}

/// Descends the mediant tree rooted at `1/1` (between `0/1` and `1/0`).
pub fn stern_brocot_path(target: PrimitiveVector) -> Result<SternBrocotPath, FareyError> {
    if target.q <= 0 || target.p <= 0 {
        return Err(FareyError::OutOfTree(target.to_string()));
    }
    let mut lo = PrimitiveVector { p: 0, q: 1 };
    let mut hi = PrimitiveVector::INFINITY;
    let mut node = mediant(lo, hi);
    let mut moves = Vec::new();
    let mut triangles = vec![FareyTriangle { left: lo, middle: node, right: hi }];
    while node != target {
        if target < node {
            hi = node;
            moves.push(Move::L);
        } else {
            lo = node;
            moves.push(Move::R);
        }
        node = mediant(lo, hi);
        triangles.push(FareyTriangle { left: lo, middle: node, right: hi });
    }
    Ok(SternBrocotPath { moves, triangles })
}

/// Replays a move sequence from the root.
pub fn replay(moves: &[Move]) -> PrimitiveVector {
    let mut lo = PrimitiveVector { p: 0, q: 1 };
    let mut hi = PrimitiveVector::INFINITY;
    let mut node = mediant(lo, hi);
    for m in moves {
        match m {
            Move::L => hi = node,
            Move::R => lo = node,
        }
        node = mediant(lo, hi);
    }
    node
}

/// All Farey triangles inside `[0, 1]` whose vertices have denominators `≤ max_q`.
///
/// These are exactly the mediant triples `(a, a ⊕ b, b)` for geodesic pairs `a < b`
/// with `q_a + q_b ≤ max_q`.
pub fn farey_triangles_up_to(max_q: i64) -> Vec<FareyTriangle> {
    let mut out = Vec::new();
    let mut stack = vec![(PrimitiveVector { p: 0, q: 1 }, PrimitiveVector { p: 1, q: 1 })];
    while let Some((a, b)) = stack.pop() {
        if a.q + b.q > max_q {
            continue;
        }
        let m = mediant(a, b);
        out.push(FareyTriangle { left: a, middle: m, right: b });
        stack.push((a, m));
        stack.push((m, b));
    }
    out
}
