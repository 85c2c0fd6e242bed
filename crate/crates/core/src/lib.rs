//! Diophantine approximation, Farey arithmetic, slope stability and
//! Hermitian–Einstein numerics on flat tori, plus Coulomb gauge fixing on the
//! unit square.
//!
//! Exact modules (`contfrac`, `farey`, `stability`) work over big integers.
//! Grid modules (`torus`, `coulomb`) are generic over [`Real`]; the `*64`
//! aliases fix `f64`.

pub mod contfrac;
pub mod coulomb;
pub mod farey;
pub mod linalg;
pub mod scalar;
pub mod stability;
pub mod torus;

pub use coulomb::{CellField64, GaugeField64, NodeField64};
pub use scalar::Real;
pub use torus::{
    ConnectionField64, EndoField64, MetricField64, ModelBundle64, SectionField64, TorusGrid64, Twist64,
};

use serde::Serialize;

/// Outcome of a strict inequality that may not be decidable from an enclosure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Undecided,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Verdict::True
    }
}
